//! Small fully connected networks with tanh hidden layers, the actuation
//! parameterizations for box-constrained policies, and weight-file I/O.
//!
//! Evaluation is generic over [`Scalar`], so the same forward and
//! input-gradient code serves plain evaluation, interval bounding, and
//! tape-based differentiation.

pub mod tape;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use tape::{Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputActivation {
    Tanh,
    Identity,
}

/// Fully connected network. `weights[l]` is row-major: entry `i * n_in + j`
/// maps input `j` of layer `l` to output `i`. Hidden activations are tanh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub output_activation: OutputActivation,
}

impl Mlp {
    pub fn new(
        layer_dims: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        let layers = layer_dims.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::Config("weights/biases do not match layer count".into()));
        }
        for l in 0..layers {
            let (n_in, n_out) = (layer_dims[l], layer_dims[l + 1]);
            if weights[l].len() != n_in * n_out {
                return Err(Error::Config(format!(
                    "layer {l}: expected {}x{} weights, got {}",
                    n_out,
                    n_in,
                    weights[l].len()
                )));
            }
            if biases[l].len() != n_out {
                return Err(Error::Config(format!(
                    "layer {l}: expected {n_out} biases, got {}",
                    biases[l].len()
                )));
            }
        }
        Ok(Mlp {
            layer_dims,
            weights,
            biases,
            output_activation,
        })
    }

    /// Seeded init, uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn random<R: Rng>(
        layer_dims: &[usize],
        output_activation: OutputActivation,
        rng: &mut R,
    ) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_dims.len() - 1 {
            let (n_in, n_out) = (layer_dims[l], layer_dims[l + 1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            weights.push(
                (0..n_in * n_out)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            biases.push((0..n_out).map(|_| rng.gen_range(-bound..bound)).collect());
        }
        Mlp {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            output_activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Canonical parameter order: per layer, weights row-major then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut k = 0;
        for l in 0..self.weights.len() {
            let nw = self.weights[l].len();
            self.weights[l].copy_from_slice(&params[k..k + nw]);
            k += nw;
            let nb = self.biases[l].len();
            self.biases[l].copy_from_slice(&params[k..k + nb]);
            k += nb;
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(self.lift_by_value().forward(x))
    }

    /// Exact gradient of the (scalar) output with respect to the input.
    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.output_dim() != 1 {
            return Err(Error::Precondition(
                "input_gradient requires a scalar-output network".into(),
            ));
        }
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let (_, g) = self.lift_by_value().forward_with_input_grad(x);
        Ok(g)
    }

    /// Lift the parameters into any scalar domain.
    pub fn lift<S: Scalar>(&self, mut embed: impl FnMut(f64) -> S) -> LiftedMlp<S> {
        LiftedMlp {
            layer_dims: self.layer_dims.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| w.iter().map(|&v| embed(v)).collect())
                .collect(),
            biases: self
                .biases
                .iter()
                .map(|b| b.iter().map(|&v| embed(v)).collect())
                .collect(),
            output_activation: self.output_activation,
        }
    }

    fn lift_by_value(&self) -> LiftedMlp<f64> {
        self.lift(|v| v)
    }

    /// Bind every parameter as a tape leaf; returns the leaf indices in
    /// [`Mlp::flat_params`] order.
    pub fn lift_leaves<'t>(&self, tape: &'t Tape) -> (LiftedMlp<Var<'t>>, Vec<u32>) {
        let mut leaves = Vec::with_capacity(self.param_count());
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..self.weights.len() {
            let w: Vec<Var<'t>> = self.weights[l].iter().map(|&v| tape.leaf(v)).collect();
            let b: Vec<Var<'t>> = self.biases[l].iter().map(|&v| tape.leaf(v)).collect();
            leaves.extend(w.iter().map(|v| v.index()));
            leaves.extend(b.iter().map(|v| v.index()));
            weights.push(w);
            biases.push(b);
        }
        (
            LiftedMlp {
                layer_dims: self.layer_dims.clone(),
                weights,
                biases,
                output_activation: self.output_activation,
            },
            leaves,
        )
    }
}

/// An [`Mlp`] with parameters embedded in a scalar domain `S`.
pub struct LiftedMlp<S> {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<S>>,
    pub biases: Vec<Vec<S>>,
    pub output_activation: OutputActivation,
}

impl<S: Scalar> LiftedMlp<S> {
    pub fn forward(&self, x: &[S]) -> Vec<S> {
        self.activations(x).pop().unwrap()
    }

    fn activations(&self, x: &[S]) -> Vec<Vec<S>> {
        let layers = self.weights.len();
        let mut acts: Vec<Vec<S>> = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        for l in 0..layers {
            let n_in = self.layer_dims[l];
            let n_out = self.layer_dims[l + 1];
            let prev = &acts[l];
            let mut next = Vec::with_capacity(n_out);
            for i in 0..n_out {
                let mut z = self.biases[l][i];
                for j in 0..n_in {
                    z = z + self.weights[l][i * n_in + j] * prev[j];
                }
                let a = if l + 1 < layers || self.output_activation == OutputActivation::Tanh {
                    z.tanh()
                } else {
                    z
                };
                next.push(a);
            }
            acts.push(next);
        }
        acts
    }

    /// Scalar output and its gradient with respect to the input. The
    /// reverse pass is expressed in the same scalar domain, so on the tape
    /// the gradient itself stays differentiable, and with intervals it
    /// yields a sound gradient enclosure from the cached activation
    /// intervals.
    pub fn forward_with_input_grad(&self, x: &[S]) -> (S, Vec<S>) {
        let acts = self.activations(x);
        let layers = self.weights.len();
        let out = acts[layers][0];
        let one = out.lift(1.0);
        // seed: d out / d z_last
        let mut g: Vec<S> = match self.output_activation {
            OutputActivation::Tanh => vec![one - out.square()],
            OutputActivation::Identity => vec![one],
        };
        for l in (0..layers).rev() {
            let n_in = self.layer_dims[l];
            let n_out = self.layer_dims[l + 1];
            let mut g_prev = Vec::with_capacity(n_in);
            for j in 0..n_in {
                let mut s = self.weights[l][j] * g[0];
                for i in 1..n_out {
                    s = s + self.weights[l][i * n_in + j] * g[i];
                }
                if l > 0 {
                    // chain through tanh of the previous layer
                    let a = acts[l][j];
                    s = s * (one - a.square());
                }
                g_prev.push(s);
            }
            g = g_prev;
        }
        (out, g)
    }
}

/// Numerically stable softmax (shift by the running maximum).
pub fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    let mut m = logits[0];
    for &l in &logits[1..] {
        m = m.max(l);
    }
    let exps: Vec<S> = logits.iter().map(|&l| (l - m).exp()).collect();
    let mut sum = exps[0];
    for &e in &exps[1..] {
        sum = sum + e;
    }
    exps.into_iter().map(|e| e / sum).collect()
}

/// How the raw network output is mapped into the actuation constraint set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Actuation {
    /// `u = lower + (upper − lower)·(tanh(core)+1)/2`, componentwise.
    BoxSquash { lower: Vec<f64>, upper: Vec<f64> },
    /// `u = V · softmax(core)`; `vertices[i][k]` is component `i` of
    /// vertex `k`, so the output is a convex combination of the columns.
    VertexSoftmax { vertices: Vec<Vec<f64>> },
    /// Closed-form Euclidean projection onto a box (clamp). Inference-only
    /// mode; the trained parameterizations above are used during learning.
    BoxProject { lower: Vec<f64>, upper: Vec<f64> },
}

impl Actuation {
    /// Output dimension the core network must produce.
    fn core_output_dim(&self, m: usize) -> usize {
        match self {
            Actuation::BoxSquash { .. } | Actuation::BoxProject { .. } => m,
            Actuation::VertexSoftmax { vertices } => vertices[0].len(),
        }
    }

    fn input_dim(&self) -> usize {
        match self {
            Actuation::BoxSquash { lower, .. } | Actuation::BoxProject { lower, .. } => lower.len(),
            Actuation::VertexSoftmax { vertices } => vertices.len(),
        }
    }

    pub fn lift<S: Scalar>(&self, mut embed: impl FnMut(f64) -> S) -> LiftedActuation<S> {
        match self {
            Actuation::BoxSquash { lower, upper } => LiftedActuation::BoxSquash {
                lower: lower.iter().map(|&v| embed(v)).collect(),
                upper: upper.iter().map(|&v| embed(v)).collect(),
            },
            Actuation::VertexSoftmax { vertices } => LiftedActuation::VertexSoftmax {
                vertices: vertices
                    .iter()
                    .map(|r| r.iter().map(|&v| embed(v)).collect())
                    .collect(),
            },
            Actuation::BoxProject { lower, upper } => LiftedActuation::BoxProject {
                lower: lower.iter().map(|&v| embed(v)).collect(),
                upper: upper.iter().map(|&v| embed(v)).collect(),
            },
        }
    }
}

/// Policy network: a core [`Mlp`] composed with an actuation map.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    pub core: Mlp,
    pub actuation: Actuation,
}

impl PolicyNet {
    pub fn new(core: Mlp, actuation: Actuation) -> Result<Self> {
        let m = actuation.input_dim();
        if let Actuation::BoxSquash { lower, upper } | Actuation::BoxProject { lower, upper } =
            &actuation
        {
            if lower.len() != upper.len() {
                return Err(Error::Config("actuation bounds length mismatch".into()));
            }
            if lower.iter().zip(upper).any(|(l, u)| l > u) {
                return Err(Error::Config("actuation lower bound above upper".into()));
            }
        }
        if let Actuation::VertexSoftmax { vertices } = &actuation {
            let cols = vertices[0].len();
            if vertices.iter().any(|r| r.len() != cols) {
                return Err(Error::Config("ragged vertex matrix".into()));
            }
        }
        if core.output_dim() != actuation.core_output_dim(m) {
            return Err(Error::DimensionMismatch {
                what: "policy core output",
                expected: actuation.core_output_dim(m),
                got: core.output_dim(),
            });
        }
        Ok(PolicyNet { core, actuation })
    }

    /// A constant policy `π(x) ≡ u` (degenerate box squash).
    pub fn constant(input_dim: usize, u: &[f64]) -> Self {
        let core = Mlp {
            layer_dims: vec![input_dim, u.len()],
            weights: vec![vec![0.0; input_dim * u.len()]],
            biases: vec![vec![0.0; u.len()]],
            output_activation: OutputActivation::Identity,
        };
        PolicyNet {
            core,
            actuation: Actuation::BoxSquash {
                lower: u.to_vec(),
                upper: u.to_vec(),
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        self.core.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.actuation.input_dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "policy input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(self.lift(|v| v).eval(x))
    }

    pub fn lift<S: Scalar>(&self, mut embed: impl FnMut(f64) -> S) -> LiftedPolicy<S> {
        LiftedPolicy {
            core: self.core.lift(&mut embed),
            actuation: self.actuation.lift(&mut embed),
        }
    }

    /// Bind core parameters as tape leaves (actuation constants stay
    /// constant).
    pub fn lift_leaves<'t>(&self, tape: &'t Tape) -> (LiftedPolicy<Var<'t>>, Vec<u32>) {
        let (core, leaves) = self.core.lift_leaves(tape);
        (
            LiftedPolicy {
                core,
                actuation: self.actuation.lift(|v| tape.constant(v)),
            },
            leaves,
        )
    }
}

pub enum LiftedActuation<S> {
    BoxSquash { lower: Vec<S>, upper: Vec<S> },
    VertexSoftmax { vertices: Vec<Vec<S>> },
    BoxProject { lower: Vec<S>, upper: Vec<S> },
}

pub struct LiftedPolicy<S> {
    pub core: LiftedMlp<S>,
    pub actuation: LiftedActuation<S>,
}

impl<S: Scalar> LiftedPolicy<S> {
    pub fn eval(&self, x: &[S]) -> Vec<S> {
        let raw = self.core.forward(x);
        match &self.actuation {
            LiftedActuation::BoxSquash { lower, upper } => raw
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&r, (&lo, &hi))| {
                    let half = r.lift(0.5);
                    let one = r.lift(1.0);
                    lo + (hi - lo) * ((r.tanh() + one) * half)
                })
                .collect(),
            LiftedActuation::VertexSoftmax { vertices } => {
                let coeffs = softmax(&raw);
                vertices
                    .iter()
                    .map(|row| {
                        let mut s = row[0] * coeffs[0];
                        for k in 1..coeffs.len() {
                            s = s + row[k] * coeffs[k];
                        }
                        s
                    })
                    .collect()
            }
            LiftedActuation::BoxProject { lower, upper } => raw
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&r, (&lo, &hi))| {
                    // clamp: min(max(r, lo), hi) with min via negation
                    let m = r.max(lo);
                    -((-m).max(-hi))
                })
                .collect(),
        }
    }
}

/// On-disk weight schema. `serde_json` prints shortest round-trip decimal
/// representations, so save/load is bit-stable.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub output_activation: OutputActivation,
    pub actuation: Option<Actuation>,
}

pub fn save_weights(path: &Path, net: &Mlp, actuation: Option<&Actuation>) -> Result<()> {
    let file = WeightsFile {
        layer_dims: net.layer_dims.clone(),
        weights: net.weights.clone(),
        biases: net.biases.clone(),
        output_activation: net.output_activation,
        actuation: actuation.cloned(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<(Mlp, Option<Actuation>)> {
    let text = std::fs::read_to_string(path)?;
    let file: WeightsFile = serde_json::from_str(&text)?;
    let net = Mlp::new(
        file.layer_dims,
        file.weights,
        file.biases,
        file.output_activation,
    )?;
    Ok((net, file.actuation))
}

pub fn load_policy(path: &Path) -> Result<PolicyNet> {
    let (core, actuation) = load_weights(path)?;
    let actuation = actuation.ok_or_else(|| {
        Error::Config(format!("{} has no actuation block", path.display()))
    })?;
    PolicyNet::new(core, actuation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_layer(w: Vec<f64>, b: Vec<f64>, n_in: usize, act: OutputActivation) -> Mlp {
        let n_out = b.len();
        Mlp::new(vec![n_in, n_out], vec![w], vec![b], act).unwrap()
    }

    #[test]
    fn forward_affine() {
        let net = single_layer(vec![1.0, -1.0], vec![0.0], 2, OutputActivation::Identity);
        assert_eq!(net.forward(&[3.0, 1.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn tanh_output_in_open_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = Mlp::random(&[2, 8, 3], OutputActivation::Tanh, &mut rng);
        for _ in 0..50 {
            let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            for v in net.forward(&x).unwrap() {
                assert!(v > -1.0 && v < 1.0);
            }
        }
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = single_layer(vec![0.0, 0.0], vec![0.0], 2, OutputActivation::Tanh);
        assert_eq!(net.forward(&[4.2, -3.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn input_gradient_of_linear_map() {
        let net = single_layer(vec![2.0, -3.0], vec![1.0], 2, OutputActivation::Identity);
        assert_eq!(net.input_gradient(&[0.7, 0.3]).unwrap(), vec![2.0, -3.0]);
    }

    #[test]
    fn input_gradient_of_tanh_first_coordinate() {
        // W(x) = tanh(x1): gradient at x1 = 0 is [1, 0]
        let net = single_layer(vec![1.0, 0.0], vec![0.0], 2, OutputActivation::Tanh);
        let g = net.input_gradient(&[0.0, 5.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let net = Mlp::random(&[2, 8, 1], OutputActivation::Tanh, &mut rng);
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let g = net.input_gradient(&x).unwrap();
            let h = 1e-5;
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let fd =
                    (net.forward(&xp).unwrap()[0] - net.forward(&xm).unwrap()[0]) / (2.0 * h);
                let denom = fd.abs().max(g[j].abs()).max(1e-3);
                assert!(
                    ((g[j] - fd) / denom).abs() < 1e-6,
                    "component {j}: ad {} vs fd {}",
                    g[j],
                    fd
                );
            }
        }
    }

    #[test]
    fn input_gradient_requires_scalar_output() {
        let net = single_layer(
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            2,
            OutputActivation::Identity,
        );
        assert!(net.input_gradient(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn box_squash_midpoint_and_range() {
        let core = single_layer(vec![0.0, 0.0], vec![0.0], 2, OutputActivation::Identity);
        let policy = PolicyNet::new(
            core,
            Actuation::BoxSquash {
                lower: vec![-1.0],
                upper: vec![1.0],
            },
        )
        .unwrap();
        assert_eq!(policy.eval(&[0.3, -0.8]).unwrap(), vec![0.0]);
    }

    #[test]
    fn vertex_softmax_symmetric_and_saturated() {
        // V = [-1, 1] as a 1x2 vertex matrix; constant logits come from biases.
        let mk = |b: Vec<f64>| {
            let core = Mlp::new(
                vec![2, 2],
                vec![vec![0.0; 4]],
                vec![b],
                OutputActivation::Identity,
            )
            .unwrap();
            PolicyNet::new(
                core,
                Actuation::VertexSoftmax {
                    vertices: vec![vec![-1.0, 1.0]],
                },
            )
            .unwrap()
        };
        let u = mk(vec![0.0, 0.0]).eval(&[0.0, 0.0]).unwrap();
        assert!(u[0].abs() < 1e-15);
        // logits [20, 0]: softmax ≈ [1 − 2.06e-9, 2.06e-9], u ≈ −1
        let u = mk(vec![20.0, 0.0]).eval(&[0.0, 0.0]).unwrap();
        let p = 1.0 / (1.0 + (-20.0f64).exp());
        let expected = -p + (1.0 - p);
        assert!((u[0] - expected).abs() < 1e-15);
        assert!((u[0] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn vertex_softmax_coefficients_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let logits: Vec<f64> = (0..4).map(|_| rng.gen_range(-30.0..30.0)).collect();
            let coeffs = softmax(&logits);
            let sum: f64 = coeffs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(coeffs.iter().all(|&c| c >= 0.0));
        }
    }

    #[test]
    fn box_project_clamps() {
        let core = single_layer(vec![1.0, 0.0], vec![0.0], 2, OutputActivation::Identity);
        let policy = PolicyNet::new(
            core,
            Actuation::BoxProject {
                lower: vec![-1.0],
                upper: vec![1.0],
            },
        )
        .unwrap();
        assert_eq!(policy.eval(&[5.0, 0.0]).unwrap(), vec![1.0]);
        assert_eq!(policy.eval(&[-5.0, 0.0]).unwrap(), vec![-1.0]);
        assert_eq!(policy.eval(&[0.25, 0.0]).unwrap(), vec![0.25]);
    }

    #[test]
    fn weights_roundtrip_is_bit_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = Mlp::random(&[2, 5, 1], OutputActivation::Tanh, &mut rng);
        let dir = std::env::temp_dir().join("zubov_net_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.json");
        let act = Actuation::BoxSquash {
            lower: vec![-1.0],
            upper: vec![1.0],
        };
        save_weights(&path, &net, Some(&act)).unwrap();
        let (loaded, loaded_act) = load_weights(&path).unwrap();
        assert_eq!(net, loaded);
        assert_eq!(Some(act), loaded_act);
        // save again: byte-identical file
        let first = std::fs::read(&path).unwrap();
        save_weights(&path, &loaded, loaded_act.as_ref()).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }
}
