//! Benchmark control systems: double integrator, Van der Pol, inverted
//! pendulum, and bicycle path tracking. All are two-state, single-input.
//!
//! Physical parameters default to values customary in this benchmark
//! family (they are configuration choices, overridable per run):
//! μ = 1; g = 9.81, l = 0.5, m = 0.15, b = 0.1; v = 1, l = 1.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    DoubleIntegrator,
    VanDerPol,
    InvertedPendulum,
    BicycleTracking,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::DoubleIntegrator,
        SystemKind::VanDerPol,
        SystemKind::InvertedPendulum,
        SystemKind::BicycleTracking,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::DoubleIntegrator => "double-integrator",
            SystemKind::VanDerPol => "van-der-pol",
            SystemKind::InvertedPendulum => "inverted-pendulum",
            SystemKind::BicycleTracking => "bicycle-tracking",
        }
    }
}

/// Named physical parameters; only the fields used by the chosen system
/// matter. All must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Van der Pol damping μ.
    pub mu: f64,
    /// Pendulum gravity, pole length, mass, friction.
    pub gravity: f64,
    pub pole_length: f64,
    pub mass: f64,
    pub friction: f64,
    /// Bicycle speed and wheelbase.
    pub speed: f64,
    pub wheelbase: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            mu: 1.0,
            gravity: 9.81,
            pole_length: 0.5,
            mass: 0.15,
            friction: 0.1,
            speed: 1.0,
            wheelbase: 1.0,
        }
    }
}

/// A system that can be evaluated generically (plain numbers, intervals,
/// or autodiff variables). Implemented by [`DynamicsModel`] and by ad-hoc
/// test systems.
pub trait ControlSystem: Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    /// ẋ = f(x, u). Inputs are assumed dimension-checked by the caller.
    fn field<S: Scalar>(&self, x: &[S], u: &[S]) -> Vec<S>;
    /// The input with f(0, u*) = 0.
    fn equilibrium_input(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsModel {
    pub kind: SystemKind,
    pub params: SystemParams,
}

impl DynamicsModel {
    pub fn new(kind: SystemKind, params: SystemParams) -> Result<Self> {
        let p = &params;
        let all = [
            p.mu,
            p.gravity,
            p.pole_length,
            p.mass,
            p.friction,
            p.speed,
            p.wheelbase,
        ];
        if all.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config(
                "all physical parameters must be strictly positive".into(),
            ));
        }
        Ok(DynamicsModel { kind, params })
    }

    pub fn with_defaults(kind: SystemKind) -> Self {
        DynamicsModel {
            kind,
            params: SystemParams::default(),
        }
    }

    pub fn state_dim(&self) -> usize {
        2
    }

    pub fn input_dim(&self) -> usize {
        1
    }

    /// ẋ = f(x, u) with dimension and domain checks.
    pub fn eval_f(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(x, u)?;
        if self.kind == SystemKind::BicycleTracking && x[0] == 1.0 {
            return Err(Error::Singularity(
                "bicycle tracking is singular at d_e = 1".into(),
            ));
        }
        Ok(self.field(x, u))
    }

    fn check_dims(&self, x: &[f64], u: &[f64]) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.state_dim(),
                got: x.len(),
            });
        }
        if u.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "input",
                expected: self.input_dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Jacobians (A, B) at an equilibrium, by central finite differences
    /// with step 1e-6. Closed-form Jacobians exist for every system and are
    /// kept as test oracles only.
    pub fn linearize(&self, x_star: &[f64], u_star: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let f0 = self.eval_f(x_star, u_star)?;
        let norm0 = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 >= 1e-9 {
            return Err(Error::Precondition(format!(
                "linearize requires an equilibrium; |f(x*,u*)| = {norm0:.3e}"
            )));
        }
        let n = self.state_dim();
        let m = self.input_dim();
        let h = 1e-6;
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, m);
        for j in 0..n {
            let mut xp = x_star.to_vec();
            let mut xm = x_star.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let fp = self.eval_f(&xp, u_star)?;
            let fm = self.eval_f(&xm, u_star)?;
            for i in 0..n {
                a[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        for j in 0..m {
            let mut up = u_star.to_vec();
            let mut um = u_star.to_vec();
            up[j] += h;
            um[j] -= h;
            let fp = self.eval_f(x_star, &up)?;
            let fm = self.eval_f(x_star, &um)?;
            for i in 0..n {
                b[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        Ok((a, b))
    }
}

/// ẋ = f(x, π(x)).
pub fn closed_loop(
    model: &DynamicsModel,
    policy: &crate::net::PolicyNet,
    x: &[f64],
) -> Result<Vec<f64>> {
    if policy.input_dim() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "policy input",
            expected: model.state_dim(),
            got: policy.input_dim(),
        });
    }
    let u = policy.eval(x)?;
    model.eval_f(x, &u)
}

impl ControlSystem for DynamicsModel {
    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn field<S: Scalar>(&self, x: &[S], u: &[S]) -> Vec<S> {
        let p = &self.params;
        match self.kind {
            SystemKind::DoubleIntegrator => vec![x[1], u[0]],
            SystemKind::VanDerPol => {
                let mu = x[0].lift(p.mu);
                let one = x[0].lift(1.0);
                // ẋ₂ = x₁ − μ(1 − x₁²)x₂ + u
                vec![x[1], x[0] - mu * (one - x[0].square()) * x[1] + u[0]]
            }
            SystemKind::InvertedPendulum => {
                let ml2 = p.mass * p.pole_length * p.pole_length;
                let g_l = x[0].lift(p.gravity / p.pole_length);
                let b_ml2 = x[0].lift(p.friction / ml2);
                let inv_ml2 = x[0].lift(1.0 / ml2);
                // θ̈ = (g/l)·sin θ − b·θ̇/(m l²) + u/(m l²)
                vec![x[1], g_l * x[0].sin() - b_ml2 * x[1] + inv_ml2 * u[0]]
            }
            SystemKind::BicycleTracking => {
                let v = x[0].lift(p.speed);
                let v_l = x[0].lift(p.speed / p.wheelbase);
                let one = x[0].lift(1.0);
                // ḋ = v·sin θe,  θ̇e = v·tan(u)/l − cos θe/(1 − d)
                vec![
                    v * x[1].sin(),
                    v_l * u[0].tan() - x[1].cos() / (one - x[0]),
                ]
            }
        }
    }

    fn equilibrium_input(&self) -> Vec<f64> {
        match self.kind {
            SystemKind::BicycleTracking => {
                // v·tan(u*)/l = cos(0)/(1 − 0)  ⇒  u* = atan(l/v)
                vec![(self.params.wheelbase / self.params.speed).atan()]
            }
            _ => vec![0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(kind: SystemKind) -> DynamicsModel {
        DynamicsModel::with_defaults(kind)
    }

    #[test]
    fn double_integrator_direct_substitution() {
        let m = model(SystemKind::DoubleIntegrator);
        assert_eq!(m.eval_f(&[1.0, 2.0], &[0.5]).unwrap(), vec![2.0, 0.5]);
    }

    #[test]
    fn van_der_pol_direct_substitution() {
        let m = model(SystemKind::VanDerPol);
        assert_eq!(m.eval_f(&[1.0, 0.0], &[0.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn pendulum_equilibrium_at_origin() {
        let m = model(SystemKind::InvertedPendulum);
        assert_eq!(m.eval_f(&[0.0, 0.0], &[0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn bicycle_equilibrium_input_solves_balance() {
        // Oracle: solve v·tan(u*)/l = 1 by bisection, independent of atan.
        let m = model(SystemKind::BicycleTracking);
        let (mut lo, mut hi) = (0.0f64, 1.5f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid.tan() < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u_star = m.equilibrium_input();
        assert!((u_star[0] - 0.5 * (lo + hi)).abs() < 1e-12);
        let f = m.eval_f(&[0.0, 0.0], &u_star).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn every_model_vanishes_at_equilibrium() {
        for kind in SystemKind::ALL {
            let m = model(kind);
            let f = m.eval_f(&[0.0, 0.0], &m.equilibrium_input()).unwrap();
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1e-12, "{kind:?} residual {norm:e}");
        }
    }

    #[test]
    fn bicycle_singularity_rejected() {
        let m = model(SystemKind::BicycleTracking);
        assert!(matches!(
            m.eval_f(&[1.0, 0.0], &[0.0]),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = model(SystemKind::DoubleIntegrator);
        assert!(m.eval_f(&[1.0], &[0.0]).is_err());
        assert!(m.eval_f(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn linearize_double_integrator_is_exact() {
        let m = model(SystemKind::DoubleIntegrator);
        let (a, b) = m.linearize(&[0.0, 0.0], &[0.0]).unwrap();
        let a_ref = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b_ref = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!((a - a_ref).norm() < 1e-6);
        assert!((b - b_ref).norm() < 1e-6);
    }

    #[test]
    fn linearize_pendulum_matches_symbolic_jacobian() {
        let m = model(SystemKind::InvertedPendulum);
        let p = m.params;
        let ml2 = p.mass * p.pole_length * p.pole_length;
        let (a, b) = m.linearize(&[0.0, 0.0], &[0.0]).unwrap();
        let a_ref = DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, p.gravity / p.pole_length, -p.friction / ml2],
        );
        let b_ref = DMatrix::from_row_slice(2, 1, &[0.0, 1.0 / ml2]);
        assert!((a - a_ref).norm() < 1e-6);
        assert!((b - b_ref).norm() < 1e-6);
    }

    #[test]
    fn linearize_van_der_pol_matches_symbolic_jacobian() {
        let m = model(SystemKind::VanDerPol);
        let (a, b) = m.linearize(&[0.0, 0.0], &[0.0]).unwrap();
        let a_ref = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, -1.0]);
        let b_ref = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!((a - a_ref).norm() < 1e-6);
        assert!((b - b_ref).norm() < 1e-6);
    }

    #[test]
    fn linearize_rejects_non_equilibrium() {
        let m = model(SystemKind::VanDerPol);
        assert!(matches!(
            m.linearize(&[0.5, 0.0], &[0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn taylor_remainder_is_second_order() {
        // ‖f(x*+δx, u*+δu) − (A δx + B δu)‖ = O(‖δ‖²). Halving δ quarters a
        // generic quadratic remainder; Van der Pol and the pendulum have a
        // vanishing Hessian at the origin, so their remainder is cubic and
        // halving divides it by 8. The double integrator is exactly linear.
        let mut rng_state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for kind in SystemKind::ALL {
            let m = model(kind);
            let u_star = m.equilibrium_input();
            let (a, b) = m.linearize(&[0.0, 0.0], &u_star).unwrap();
            let expected = match kind {
                SystemKind::BicycleTracking => 3.5..=4.5,
                SystemKind::VanDerPol | SystemKind::InvertedPendulum => 7.5..=8.5,
                SystemKind::DoubleIntegrator => 3.5..=8.5, // residual ≈ 0, skipped below
            };
            for _ in 0..20 {
                let dir_x = [next(), next()];
                let dir_u = [next()];
                let resid = |s: f64| -> f64 {
                    let x = [dir_x[0] * s, dir_x[1] * s];
                    let u = [u_star[0] + dir_u[0] * s];
                    let f = m.eval_f(&x, &u).unwrap();
                    let lin = [
                        a[(0, 0)] * x[0] + a[(0, 1)] * x[1] + b[(0, 0)] * dir_u[0] * s,
                        a[(1, 0)] * x[0] + a[(1, 1)] * x[1] + b[(1, 0)] * dir_u[0] * s,
                    ];
                    ((f[0] - lin[0]).powi(2) + (f[1] - lin[1]).powi(2)).sqrt()
                };
                let r1 = resid(1e-2);
                let r2 = resid(5e-3);
                if r1 > 1e-9 {
                    let ratio = r1 / r2;
                    assert!(
                        expected.contains(&ratio),
                        "{kind:?}: ratio {ratio} out of range"
                    );
                }
            }
        }
    }

    #[test]
    fn closed_loop_constant_policy() {
        use crate::net::PolicyNet;
        for kind in SystemKind::ALL {
            let m = model(kind);
            let pi = PolicyNet::constant(2, &m.equilibrium_input());
            let f = closed_loop(&m, &pi, &[0.0, 0.0]).unwrap();
            assert!(f.iter().all(|v| v.abs() < 1e-12));
        }
        // double integrator with constant policy u = -1
        let m = model(SystemKind::DoubleIntegrator);
        let pi = PolicyNet::constant(2, &[-1.0]);
        assert_eq!(closed_loop(&m, &pi, &[1.0, 2.0]).unwrap(), vec![2.0, -1.0]);
        // Van der Pol with the zero policy
        let m = model(SystemKind::VanDerPol);
        let pi = PolicyNet::constant(2, &[0.0]);
        assert_eq!(closed_loop(&m, &pi, &[0.0, 1.0]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn eval_is_deterministic() {
        let m = model(SystemKind::VanDerPol);
        let a = m.eval_f(&[0.3, -0.7], &[0.1]).unwrap();
        let b = m.eval_f(&[0.3, -0.7], &[0.1]).unwrap();
        assert_eq!(a, b);
    }
}
