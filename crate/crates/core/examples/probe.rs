// scratch probe (removed before finalizing)
use zubov_core::dynamics::ControlSystem;
use zubov_core::net::Actuation;
use zubov_core::scalar::Scalar;
use zubov_core::train::{train, TrainConfig};

struct ScalarStable;
impl ControlSystem for ScalarStable {
    fn state_dim(&self) -> usize { 1 }
    fn input_dim(&self) -> usize { 1 }
    fn field<S: Scalar>(&self, x: &[S], u: &[S]) -> Vec<S> { vec![u[0] - x[0]] }
    fn equilibrium_input(&self) -> Vec<f64> { vec![0.0] }
}

fn main() {
    let iters: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(500);
    let lr: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let cfg = TrainConfig {
        iterations: iters,
        batch_size: 32,
        trajectories_per_iter: 4,
        alpha: 0.5,
        learning_rate: lr,
        r1: vec![[-2.0, 2.0]],
        w_dims: vec![1, 8, 8, 1],
        pi_dims: vec![1, 6, 1],
        actuation: Actuation::BoxSquash { lower: vec![-1.0], upper: vec![1.0] },
        seed: 11,
        lambda_barrier: std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(5.0),
        ..TrainConfig::default()
    };
    let result = train(&cfg, &ScalarStable, |_, _, _| {}).unwrap();
    for (i, r) in result.history.iter().enumerate() {
        if i % 50 == 0 || i + 1 == result.history.len() {
            println!("{:5}  total {:8.4}  z {:7.4}  r {:7.4}  p {:7.4}  a {:8.4}  b {:7.4}",
                i, r.total, r.l_z, r.l_r, r.l_p, r.l_actor, r.l_b);
        }
    }
    println!("W on grid (with pointwise residual):");
    for i in 0..=20 {
        let x = -2.0 + 4.0 * i as f64 / 20.0;
        let w = result.w.forward(&[x]).unwrap()[0];
        let g = result.w.input_gradient(&[x]).unwrap()[0];
        let u = result.policy.eval(&[x]).unwrap()[0];
        let f = u - x;
        let r = g * f + cfg.alpha * (1.0 - w * w) * x.abs();
        println!("  x {:5.2}  W {:8.4}  u {:8.4}  resid {:8.4}", x, w, u, r);
    }
}
