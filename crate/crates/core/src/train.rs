//! Actor-critic co-training of the certificate network `W_θ` and the
//! policy network `π_γ`.
//!
//! The combined objective is
//! `λ0·W(0)² + L_r + L_p + λc·L_actor + λb·L_b`, where
//! `L_r` regresses `W` onto `tanh(α·V̂)` from simulated trajectories,
//! `L_p` penalizes the squared PDE residual
//! `∇W·f(x, sg(π(x))) + α(1−W)(1+W)‖x‖`,
//! `L_actor` is the normalized Lie derivative `sg(∇W/‖∇W‖)·f(x, π(x))`,
//! and `L_b` pins `W ≈ 1` on the boundary of the region of interest.
//! Stop-gradients decouple the two updates inside one loss: the critic
//! terms see the policy as a constant, the actor term sees the gradient
//! field as a constant.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::ControlSystem;
use crate::error::{Error, Result};
use crate::net::tape::{leaf_gradients, Tape};
use crate::net::{Actuation, LiftedMlp, LiftedPolicy, Mlp, OutputActivation, PolicyNet};
use crate::scalar::Scalar;
use crate::sim::{estimate_value, simulate, SimParams};
use crate::verify::interval::BoxRegion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossMode {
    /// Zubov PDE objective (the method under study).
    Zubov,
    /// Expected violation of the plain Lyapunov conditions, as a
    /// comparison mode. Admits the shortcut solution `V ≡ 0`.
    LyapunovRisk,
}

/// All hyperparameters of the objective and loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// M: value-target trajectories per iteration.
    pub trajectories_per_iter: usize,
    /// K: PDE/boundary batch size.
    pub batch_size: usize,
    pub lambda_zero: f64,
    pub lambda_actor: f64,
    pub lambda_barrier: f64,
    /// α: Zubov sharpness in `W = tanh(αV)`.
    pub alpha: f64,
    /// T: optimizer iterations.
    pub iterations: usize,
    pub learning_rate: f64,
    /// Exponential schedule: the rate at iteration t is
    /// `learning_rate * lr_decay^(t/T)`. 1.0 disables the schedule.
    pub lr_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    /// R1: sampling box, per-dimension `[lo, hi]`.
    pub r1: Vec<[f64; 2]>,
    /// a: region-of-interest scale, R2 = {a·x : x ∈ R1}.
    pub region_scale: f64,
    pub seed: u64,
    pub loss_mode: LossMode,
    pub w_dims: Vec<usize>,
    pub pi_dims: Vec<usize>,
    pub actuation: Actuation,
    /// ε_g: actor gradient-norm guard.
    pub grad_norm_guard: f64,
    pub sim: SimParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            trajectories_per_iter: 8,
            batch_size: 64,
            lambda_zero: 5.0,
            lambda_actor: 0.5,
            lambda_barrier: 5.0,
            alpha: 0.05,
            iterations: 3000,
            learning_rate: 1e-3,
            lr_decay: 0.1,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            r1: vec![[-2.5, 2.5], [-2.5, 2.5]],
            region_scale: 0.9,
            seed: 0,
            loss_mode: LossMode::Zubov,
            w_dims: vec![2, 20, 20, 1],
            pi_dims: vec![2, 10, 10, 1],
            actuation: Actuation::BoxSquash {
                lower: vec![-1.0],
                upper: vec![1.0],
            },
            grad_norm_guard: 1e-8,
            // The policy has no hard equilibrium anchor, so the closed loop
            // settles at a small offset point; value targets must count
            // arrival near the origin as convergence or the regression
            // saturates at 1.
            sim: SimParams {
                r_conv: 0.05,
                ..SimParams::default()
            },
        }
    }
}

impl TrainConfig {
    pub fn r1_region(&self) -> BoxRegion {
        BoxRegion::from_bounds(&self.r1)
    }

    pub fn r2_region(&self) -> BoxRegion {
        self.r1_region().scale(self.region_scale)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectories_per_iter == 0 || self.batch_size == 0 || self.iterations == 0 {
            return Err(Error::Config("M, K, T must be positive".into()));
        }
        if self.lambda_zero < 0.0 || self.lambda_actor < 0.0 || self.lambda_barrier < 0.0 {
            return Err(Error::Config("loss weights must be nonnegative".into()));
        }
        if !(self.alpha > 0.0) || !(self.region_scale > 0.0) {
            return Err(Error::Config("alpha and region scale must be positive".into()));
        }
        if self.r1.iter().any(|b| !(b[0] < 0.0 && 0.0 < b[1])) {
            return Err(Error::Config(
                "R1 must contain the origin strictly inside".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform i.i.d. samples inside the box.
pub fn sample_interior<R: Rng>(region: &BoxRegion, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            region
                .dims
                .iter()
                .map(|d| rng.gen_range(d.lo..d.hi))
                .collect()
        })
        .collect()
}

/// Uniform samples on the box boundary: pick a face with probability
/// proportional to its (n−1)-measure, then sample the free coordinates.
pub fn sample_boundary<R: Rng>(region: &BoxRegion, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = region.dim();
    // face k = 2*dim + side; measure = product of the other widths
    let mut weights = Vec::with_capacity(2 * n);
    for i in 0..n {
        let m: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| region.dims[j].width())
            .product();
        weights.push(m);
        weights.push(m);
    }
    let total: f64 = weights.iter().sum();
    (0..count)
        .map(|_| {
            let mut pick = rng.gen_range(0.0..total);
            let mut face = 0;
            for (k, w) in weights.iter().enumerate() {
                if pick < *w || k == weights.len() - 1 {
                    face = k;
                    break;
                }
                pick -= w;
            }
            let (dim, side) = (face / 2, face % 2);
            (0..n)
                .map(|j| {
                    if j == dim {
                        if side == 0 {
                            region.dims[j].lo
                        } else {
                            region.dims[j].hi
                        }
                    } else {
                        rng.gen_range(region.dims[j].lo..region.dims[j].hi)
                    }
                })
                .collect()
        })
        .collect()
}

/// The Zubov PDE residual bracket: `Ẇ + α(1−W)(1+W)·Φ` with `Φ = ‖x‖`.
pub fn zubov_pde_residual(w: f64, lie_derivative: f64, norm_x: f64, alpha: f64) -> f64 {
    lie_derivative + alpha * (1.0 - w) * (1.0 + w) * norm_x
}

/// Which terms enter the final sum. Term subgraphs are always built, so
/// masked and unmasked runs do identical arithmetic on the shared parts
/// (gradients of the remaining terms are bit-identical).
#[derive(Debug, Clone, Copy)]
pub struct LossMask {
    pub zero: bool,
    pub regression: bool,
    pub pde: bool,
    pub actor: bool,
    pub barrier: bool,
}

impl LossMask {
    pub const ALL: LossMask = LossMask {
        zero: true,
        regression: true,
        pde: true,
        actor: true,
        barrier: true,
    };
}

/// Per-iteration sample sets.
#[derive(Debug, Clone, Default)]
pub struct Batches {
    /// K points from R1 for the PDE and actor terms.
    pub pde: Vec<Vec<f64>>,
    /// K points from ∂R2 for the barrier term.
    pub boundary: Vec<Vec<f64>>,
    /// M points from R1 with simulated value targets `tanh(α·V̂)`.
    pub value_points: Vec<Vec<f64>>,
    pub value_targets: Vec<f64>,
}

pub struct LossTerms<S> {
    pub l_z: S,
    pub l_r: S,
    pub l_p: S,
    pub l_actor: S,
    pub l_b: S,
    pub total: S,
}

struct LossWeights {
    lambda_zero: f64,
    lambda_actor: f64,
    lambda_barrier: f64,
    alpha: f64,
    grad_norm_guard: f64,
}

impl From<&TrainConfig> for LossWeights {
    fn from(cfg: &TrainConfig) -> Self {
        LossWeights {
            lambda_zero: cfg.lambda_zero,
            lambda_actor: cfg.lambda_actor,
            lambda_barrier: cfg.lambda_barrier,
            alpha: cfg.alpha,
            grad_norm_guard: cfg.grad_norm_guard,
        }
    }
}

fn mean<S: Scalar>(values: &[S]) -> S {
    let mut sum = values[0];
    for v in &values[1..] {
        sum = sum + *v;
    }
    sum * values[0].lift(1.0 / values.len() as f64)
}

fn lift_point<S: Scalar>(anchor: S, x: &[f64]) -> Vec<S> {
    x.iter().map(|&v| anchor.lift(v)).collect()
}

/// Build every loss term in one scalar domain. With `S = f64` this is the
/// plain value; with tape variables the result feeds the gradient sweep.
fn zubov_loss_terms<S: Scalar, Sys: ControlSystem>(
    w: &LiftedMlp<S>,
    policy: &LiftedPolicy<S>,
    sys: &Sys,
    weights: &LossWeights,
    batches: &Batches,
    mask: LossMask,
) -> LossTerms<S> {
    let anchor = w.biases[0][0];
    let zero_v = anchor.lift(0.0);
    let one = anchor.lift(1.0);
    let alpha = anchor.lift(weights.alpha);

    // L_z = W(0)²
    let origin = vec![zero_v; w.layer_dims[0]];
    let l_z = w.forward(&origin)[0].square();

    // L_r = mean (W(x_i) − tanh(α V̂(x_i)))²
    let l_r = if batches.value_points.is_empty() {
        zero_v
    } else {
        let sq: Vec<S> = batches
            .value_points
            .iter()
            .zip(&batches.value_targets)
            .map(|(x, &t)| {
                let xs = lift_point(anchor, x);
                (w.forward(&xs)[0] - anchor.lift(t)).square()
            })
            .collect();
        mean(&sq)
    };

    // L_p and the actor term share forward passes over the PDE batch.
    let mut pde_sq = Vec::with_capacity(batches.pde.len().max(1));
    let mut actor_terms = Vec::with_capacity(batches.pde.len().max(1));
    if batches.pde.is_empty() {
        pde_sq.push(zero_v);
        actor_terms.push(zero_v);
    }
    for x in &batches.pde {
        let xs = lift_point(anchor, x);
        let (w_val, grad) = w.forward_with_input_grad(&xs);
        let u = policy.eval(&xs);

        // critic residual: policy under stop-gradient
        let u_sg: Vec<S> = u.iter().map(|v| v.stop_gradient()).collect();
        let f_sg = sys.field(&xs, &u_sg);
        let mut lie_sg = grad[0] * f_sg[0];
        for i in 1..grad.len() {
            lie_sg = lie_sg + grad[i] * f_sg[i];
        }
        let norm_x = anchor.lift(x.iter().map(|v| v * v).sum::<f64>().sqrt());
        let residual = lie_sg + alpha * (one - w_val) * (one + w_val) * norm_x;
        pde_sq.push(residual.square());

        // actor: normalized gradient under stop-gradient, live policy
        let mut g_norm_sq = grad[0].square();
        for g in &grad[1..] {
            g_norm_sq = g_norm_sq + g.square();
        }
        let denom = g_norm_sq.sqrt().max(anchor.lift(weights.grad_norm_guard));
        let f_live = sys.field(&xs, &u);
        let mut dot = (grad[0] / denom).stop_gradient() * f_live[0];
        for i in 1..grad.len() {
            dot = dot + (grad[i] / denom).stop_gradient() * f_live[i];
        }
        actor_terms.push(dot);
    }
    let l_p = mean(&pde_sq);
    let l_actor = mean(&actor_terms);

    // L_b = mean |W(x') − 1|
    let l_b = if batches.boundary.is_empty() {
        zero_v
    } else {
        let devs: Vec<S> = batches
            .boundary
            .iter()
            .map(|x| {
                let xs = lift_point(anchor, x);
                (w.forward(&xs)[0] - one).abs()
            })
            .collect();
        mean(&devs)
    };

    let mut total = zero_v;
    if mask.zero {
        total = total + anchor.lift(weights.lambda_zero) * l_z;
    }
    if mask.regression {
        total = total + l_r;
    }
    if mask.pde {
        total = total + l_p;
    }
    if mask.actor {
        total = total + anchor.lift(weights.lambda_actor) * l_actor;
    }
    if mask.barrier {
        total = total + anchor.lift(weights.lambda_barrier) * l_b;
    }

    LossTerms {
        l_z,
        l_r,
        l_p,
        l_actor,
        l_b,
        total,
    }
}

/// Expected violation of the plain Lyapunov conditions (comparison mode):
/// mean of `V(0)² + (−V(x))₊ + (∇V(x)·f(x, π(x)))₊`.
fn lyapunov_risk_terms<S: Scalar, Sys: ControlSystem>(
    v: &LiftedMlp<S>,
    policy: &LiftedPolicy<S>,
    sys: &Sys,
    batch: &[Vec<f64>],
) -> S {
    let anchor = v.biases[0][0];
    let zero_v = anchor.lift(0.0);
    let origin = vec![zero_v; v.layer_dims[0]];
    let v0_sq = v.forward(&origin)[0].square();
    let terms: Vec<S> = batch
        .iter()
        .map(|x| {
            let xs = lift_point(anchor, x);
            let (v_val, grad) = v.forward_with_input_grad(&xs);
            let u = policy.eval(&xs);
            let f = sys.field(&xs, &u);
            let mut lie = grad[0] * f[0];
            for i in 1..grad.len() {
                lie = lie + grad[i] * f[i];
            }
            v0_sq + (-v_val).max(zero_v) + lie.max(zero_v)
        })
        .collect();
    mean(&terms)
}

/// Loss component values at the current parameters (plain evaluation).
pub fn critic_loss<Sys: ControlSystem>(
    w: &Mlp,
    policy: &PolicyNet,
    sys: &Sys,
    alpha: f64,
    batches: &Batches,
) -> (f64, f64, f64) {
    let weights = LossWeights {
        lambda_zero: 1.0,
        lambda_actor: 0.0,
        lambda_barrier: 0.0,
        alpha,
        grad_norm_guard: 1e-8,
    };
    let terms = zubov_loss_terms(
        &w.lift(|v| v),
        &policy.lift(|v| v),
        sys,
        &weights,
        batches,
        LossMask::ALL,
    );
    (terms.l_z, terms.l_r, terms.l_p)
}

pub fn actor_loss<Sys: ControlSystem>(
    w: &Mlp,
    policy: &PolicyNet,
    sys: &Sys,
    batch: &[Vec<f64>],
    grad_norm_guard: f64,
) -> f64 {
    let weights = LossWeights {
        lambda_zero: 0.0,
        lambda_actor: 1.0,
        lambda_barrier: 0.0,
        alpha: 1.0,
        grad_norm_guard,
    };
    let batches = Batches {
        pde: batch.to_vec(),
        ..Batches::default()
    };
    zubov_loss_terms(
        &w.lift(|v| v),
        &policy.lift(|v| v),
        sys,
        &weights,
        &batches,
        LossMask::ALL,
    )
    .l_actor
}

pub fn barrier_loss(w: &Mlp, boundary_batch: &[Vec<f64>]) -> f64 {
    boundary_batch
        .iter()
        .map(|x| (w.forward(x).unwrap()[0] - 1.0).abs())
        .sum::<f64>()
        / boundary_batch.len() as f64
}

pub fn lyapunov_risk_loss<Sys: ControlSystem>(
    v: &Mlp,
    policy: &PolicyNet,
    sys: &Sys,
    batch: &[Vec<f64>],
) -> f64 {
    lyapunov_risk_terms(&v.lift(|x| x), &policy.lift(|x| x), sys, batch)
}

/// Total Eq-style loss value with the stop-gradient placements (values are
/// unaffected by stop-gradient; see [`zubov_loss_gradients`] for the
/// derivative contract).
pub fn total_loss<Sys: ControlSystem>(
    w: &Mlp,
    policy: &PolicyNet,
    sys: &Sys,
    cfg: &TrainConfig,
    batches: &Batches,
) -> LossTerms<f64> {
    zubov_loss_terms(
        &w.lift(|v| v),
        &policy.lift(|v| v),
        sys,
        &LossWeights::from(cfg),
        batches,
        LossMask::ALL,
    )
}

/// Loss values and exact parameter gradients (∇θ, ∇γ) of the combined
/// objective, including the second-order terms from differentiating the
/// input gradient, with the stated stop-gradient placements.
pub fn zubov_loss_gradients<Sys: ControlSystem>(
    w: &Mlp,
    policy: &PolicyNet,
    sys: &Sys,
    cfg: &TrainConfig,
    batches: &Batches,
    mask: LossMask,
) -> (LossTerms<f64>, Vec<f64>, Vec<f64>) {
    let tape = Tape::new();
    let (w_lift, theta) = w.lift_leaves(&tape);
    let (pi_lift, gamma) = policy.lift_leaves(&tape);
    let terms = zubov_loss_terms(
        &w_lift,
        &pi_lift,
        sys,
        &LossWeights::from(cfg),
        batches,
        mask,
    );
    let grad_theta = leaf_gradients(&tape, terms.total, &theta);
    let grad_gamma = leaf_gradients(&tape, terms.total, &gamma);
    let values = LossTerms {
        l_z: terms.l_z.value(),
        l_r: terms.l_r.value(),
        l_p: terms.l_p.value(),
        l_actor: terms.l_actor.value(),
        l_b: terms.l_b.value(),
        total: terms.total.value(),
    };
    (values, grad_theta, grad_gamma)
}

fn lyapunov_risk_gradients<Sys: ControlSystem>(
    v: &Mlp,
    policy: &PolicyNet,
    sys: &Sys,
    batch: &[Vec<f64>],
) -> (f64, Vec<f64>, Vec<f64>) {
    let tape = Tape::new();
    let (v_lift, theta) = v.lift_leaves(&tape);
    let (pi_lift, gamma) = policy.lift_leaves(&tape);
    let loss = lyapunov_risk_terms(&v_lift, &pi_lift, sys, batch);
    (
        loss.value(),
        leaf_gradients(&tape, loss, &theta),
        leaf_gradients(&tape, loss, &gamma),
    )
}

/// Adam with bias correction.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n: usize, lr: f64, beta1: f64, beta2: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub l_z: f64,
    pub l_r: f64,
    pub l_p: f64,
    pub l_actor: f64,
    pub l_b: f64,
    pub total: f64,
}

pub struct TrainResult {
    pub w: Mlp,
    pub policy: PolicyNet,
    pub history: Vec<HistoryRow>,
}

pub const CHECKPOINT_EVERY: usize = 500;

/// Run the full loop: sample, simulate value targets, one optimizer step
/// per iteration. Fully deterministic under the seed. `on_checkpoint` is
/// invoked every [`CHECKPOINT_EVERY`] iterations.
pub fn train<Sys: ControlSystem>(
    cfg: &TrainConfig,
    sys: &Sys,
    mut on_checkpoint: impl FnMut(usize, &Mlp, &PolicyNet),
) -> Result<TrainResult> {
    cfg.validate()?;
    if cfg.w_dims.first() != Some(&sys.state_dim()) || cfg.w_dims.last() != Some(&1) {
        return Err(Error::Config("certificate dims must map state to scalar".into()));
    }
    if cfg.pi_dims.first() != Some(&sys.state_dim()) {
        return Err(Error::Config("policy dims must start at state dim".into()));
    }
    if cfg.r1.len() != sys.state_dim() {
        return Err(Error::Config("R1 dimension must match the state".into()));
    }

    let r1 = cfg.r1_region();
    let r2 = cfg.r2_region();

    let mut rng_w = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut rng_pi = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut rng_samples = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));

    let mut w = Mlp::random(&cfg.w_dims, OutputActivation::Tanh, &mut rng_w);
    let core = Mlp::random(&cfg.pi_dims, OutputActivation::Identity, &mut rng_pi);
    let mut policy = PolicyNet::new(core, cfg.actuation.clone())?;

    let mut adam_w = Adam::new(w.param_count(), cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2);
    let mut adam_pi = Adam::new(
        policy.core.param_count(),
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
    );

    let mut history = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let lr = cfg.learning_rate
            * cfg.lr_decay.powf(it as f64 / cfg.iterations as f64);
        adam_w.lr = lr;
        adam_pi.lr = lr;
        let pde = sample_interior(&r1, cfg.batch_size, &mut rng_samples);
        let boundary = sample_boundary(&r2, cfg.batch_size, &mut rng_samples);

        let row = match cfg.loss_mode {
            LossMode::Zubov => {
                let value_points =
                    sample_interior(&r1, cfg.trajectories_per_iter, &mut rng_samples);
                // trajectories are independent; results are assembled by index
                let pi_eval = policy.lift(|v| v);
                let value_targets: Vec<f64> = value_points
                    .par_iter()
                    .map(|x0| {
                        let mut field = |x: &[f64]| {
                            let u = pi_eval.eval(x);
                            sys.field(x, &u)
                        };
                        let v_hat = estimate_value(&simulate(&mut field, x0, &cfg.sim));
                        (cfg.alpha * v_hat).tanh()
                    })
                    .collect();
                let batches = Batches {
                    pde,
                    boundary,
                    value_points,
                    value_targets,
                };
                let (values, g_theta, g_gamma) =
                    zubov_loss_gradients(&w, &policy, sys, cfg, &batches, LossMask::ALL);

                let mut theta = w.flat_params();
                adam_w.step(&mut theta, &g_theta);
                w.set_flat_params(&theta);
                let mut gamma = policy.core.flat_params();
                adam_pi.step(&mut gamma, &g_gamma);
                policy.core.set_flat_params(&gamma);

                HistoryRow {
                    iteration: it,
                    l_z: values.l_z,
                    l_r: values.l_r,
                    l_p: values.l_p,
                    l_actor: values.l_actor,
                    l_b: values.l_b,
                    total: values.total,
                }
            }
            LossMode::LyapunovRisk => {
                let (loss, g_theta, g_gamma) =
                    lyapunov_risk_gradients(&w, &policy, sys, &pde);
                let mut theta = w.flat_params();
                adam_w.step(&mut theta, &g_theta);
                w.set_flat_params(&theta);
                let mut gamma = policy.core.flat_params();
                adam_pi.step(&mut gamma, &g_gamma);
                policy.core.set_flat_params(&gamma);
                HistoryRow {
                    iteration: it,
                    l_z: 0.0,
                    l_r: 0.0,
                    l_p: 0.0,
                    l_actor: 0.0,
                    l_b: 0.0,
                    total: loss,
                }
            }
        };

        if !row.total.is_finite() {
            return Err(Error::NonFiniteLoss {
                iteration: it,
                detail: format!(
                    "l_z={} l_r={} l_p={} l_actor={} l_b={}",
                    row.l_z, row.l_r, row.l_p, row.l_actor, row.l_b
                ),
            });
        }
        history.push(row);

        if (it + 1) % CHECKPOINT_EVERY == 0 {
            on_checkpoint(it + 1, &w, &policy);
        }
        if it % 200 == 0 {
            log::info!(
                "iter {it}: total={:.4} l_z={:.4} l_r={:.4} l_p={:.4} l_actor={:.4} l_b={:.4}",
                row.total,
                row.l_z,
                row.l_r,
                row.l_p,
                row.l_actor,
                row.l_b
            );
        }
    }

    Ok(TrainResult { w, policy, history })
}

/// Write the training history as CSV.
pub fn write_history_csv(path: &std::path::Path, history: &[HistoryRow]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "iteration,l_z,l_r,l_p,l_actor,l_b,total")?;
    for r in history {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iteration, r.l_z, r.l_r, r.l_p, r.l_actor, r.l_b, r.total
        )?;
    }
    Ok(())
}
