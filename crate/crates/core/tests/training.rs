//! Loop-level training checks on a scalar plant and a short benchmark run.

use zubov_core::dynamics::{ControlSystem, DynamicsModel, SystemKind};
use zubov_core::net::Actuation;
use zubov_core::scalar::Scalar;
use zubov_core::train::{train, LossMode, TrainConfig};

/// ẋ = −x + u.
struct ScalarStable;

impl ControlSystem for ScalarStable {
    fn state_dim(&self) -> usize {
        1
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn field<S: Scalar>(&self, x: &[S], u: &[S]) -> Vec<S> {
        vec![u[0] - x[0]]
    }
    fn equilibrium_input(&self) -> Vec<f64> {
        vec![0.0]
    }
}

fn scalar_config() -> TrainConfig {
    TrainConfig {
        iterations: 500,
        batch_size: 32,
        trajectories_per_iter: 4,
        alpha: 0.5,
        learning_rate: 2e-3,
        lambda_barrier: 0.5,
        r1: vec![[-2.0, 2.0]],
        w_dims: vec![1, 8, 8, 1],
        pi_dims: vec![1, 6, 1],
        actuation: Actuation::BoxSquash {
            lower: vec![-1.0],
            upper: vec![1.0],
        },
        seed: 11,
        ..TrainConfig::default()
    }
}

#[test]
fn scalar_plant_learns_a_monotone_certificate() {
    let cfg = scalar_config();
    let result = train(&cfg, &ScalarStable, |_, _, _| {}).unwrap();
    let last = result.history.last().unwrap();
    assert!(last.total.is_finite());
    // single-iteration L_p is a fresh-batch sample; average the tail
    let tail = &result.history[result.history.len() - 20..];
    let l_p = tail.iter().map(|r| r.l_p).sum::<f64>() / tail.len() as f64;
    assert!(l_p < 0.05, "final PDE residual {l_p}");
    // W increases with |x| on a grid of the region of interest
    let w = |x: f64| result.w.forward(&[x]).unwrap()[0];
    for i in 1..20 {
        let a = 1.8 * i as f64 / 20.0;
        let b = 1.8 * (i + 1) as f64 / 20.0;
        assert!(w(b) >= w(a) - 1e-3, "W not monotone at {a}: {} vs {}", w(a), w(b));
        assert!(
            w(-b) >= w(-a) - 1e-3,
            "W not monotone at {}: {} vs {}",
            -a,
            w(-a),
            w(-b)
        );
    }
}

#[test]
fn same_seed_reproduces_history_bitwise() {
    let cfg = TrainConfig {
        iterations: 40,
        ..scalar_config()
    };
    let a = train(&cfg, &ScalarStable, |_, _, _| {}).unwrap();
    let b = train(&cfg, &ScalarStable, |_, _, _| {}).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.w.flat_params(), b.w.flat_params());
    assert_eq!(a.policy.core.flat_params(), b.policy.core.flat_params());
}

#[test]
fn double_integrator_short_run_decreases_loss() {
    let cfg = TrainConfig {
        iterations: 600,
        seed: 3,
        ..TrainConfig::default()
    };
    let model = DynamicsModel::with_defaults(SystemKind::DoubleIntegrator);
    let mut checkpoints = Vec::new();
    let result = train(&cfg, &model, |it, _, _| checkpoints.push(it)).unwrap();
    assert_eq!(checkpoints, vec![500]);
    let early = result.history[10].total;
    let late: f64 = result.history[result.history.len() - 10..]
        .iter()
        .map(|r| r.total)
        .sum::<f64>()
        / 10.0;
    assert!(late.is_finite());
    assert!(
        late < early / 5.0,
        "loss did not drop: early {early}, late mean {late}"
    );
}

#[test]
fn lyapunov_risk_mode_runs_and_shrinks() {
    let cfg = TrainConfig {
        iterations: 200,
        loss_mode: LossMode::LyapunovRisk,
        seed: 5,
        ..TrainConfig::default()
    };
    let model = DynamicsModel::with_defaults(SystemKind::DoubleIntegrator);
    let result = train(&cfg, &model, |_, _, _| {}).unwrap();
    let first = result.history[0].total;
    let last = result.history.last().unwrap().total;
    assert!(last.is_finite() && last <= first);
}
