//! Closed-loop trajectory rollout with a fixed-step RK4 integrator and
//! estimation of the value integral `V(x₀) = ∫₀^∞ ‖x(t)‖ dt` used as the
//! critic's regression target.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Stop conditions for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryStatus {
    /// Final state norm dropped to `r_conv`.
    Converged,
    /// Some state norm reached `R_div` (non-finite states count as
    /// infinitely far).
    Diverged,
    /// `t_max` elapsed without either.
    HorizonExhausted,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    pub status: TrajectoryStatus,
}

/// Integration and stopping parameters. The paper-style training loop uses
/// these defaults; the tail of the value integral past `r_conv` is
/// truncated (the bias is O(r_conv) and vanishes under the tanh squash).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    pub dt: f64,
    pub t_max: f64,
    pub r_conv: f64,
    pub r_div: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 0.01,
            t_max: 30.0,
            r_conv: 1e-3,
            r_div: 50.0,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One classical 4-stage Runge–Kutta step.
pub fn rk4_step(field: &mut impl FnMut(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let k1 = field(x);
    let mut xt: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k1[i]).collect();
    let k2 = field(&xt);
    for i in 0..n {
        xt[i] = x[i] + 0.5 * h * k2[i];
    }
    let k3 = field(&xt);
    for i in 0..n {
        xt[i] = x[i] + h * k3[i];
    }
    let k4 = field(&xt);
    (0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Roll out the closed loop from `x0` until convergence, divergence, or
/// the time horizon. All outcomes are encoded in the returned status.
pub fn simulate(
    field: &mut impl FnMut(&[f64]) -> Vec<f64>,
    x0: &[f64],
    params: &SimParams,
) -> Trajectory {
    assert!(params.dt > 0.0, "dt must be positive");
    assert!(
        0.0 < params.r_conv && params.r_conv < params.r_div,
        "need 0 < r_conv < R_div"
    );
    let max_steps = (params.t_max / params.dt).round() as usize;
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let status = loop {
        let r = norm(&x);
        if !r.is_finite() || r >= params.r_div {
            break TrajectoryStatus::Diverged;
        }
        if r <= params.r_conv {
            break TrajectoryStatus::Converged;
        }
        if states.len() > max_steps {
            break TrajectoryStatus::HorizonExhausted;
        }
        x = rk4_step(field, &x, params.dt);
        states.push(x.clone());
    };
    Trajectory {
        states,
        dt: params.dt,
        status,
    }
}

/// Trapezoidal estimate of `∫ ‖x(t)‖ dt` over the recorded states.
/// Non-converging trajectories map to `+∞`, whose regression target under
/// the tanh squash is exactly 1.
pub fn estimate_value(traj: &Trajectory) -> f64 {
    match traj.status {
        TrajectoryStatus::Converged => {
            let mut acc = 0.0;
            for w in traj.states.windows(2) {
                acc += 0.5 * (norm(&w[0]) + norm(&w[1])) * traj.dt;
            }
            acc
        }
        TrajectoryStatus::Diverged | TrajectoryStatus::HorizonExhausted => f64::INFINITY,
    }
}

/// Write `t, x1, ..., xn` rows for plotting.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (k, x) in traj.states.iter().enumerate() {
        let row: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{}", k as f64 * traj.dt, row.join(","))?;
    }
    Ok(())
}
