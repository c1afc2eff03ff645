//! SMT-LIB 2 export of the certification conditions for cross-checking
//! with a delta-SAT solver (dReal dialect: nonlinear reals with tanh, sin,
//! cos, tan, exp).
//!
//! Each query asserts the NEGATION of one condition over R2, so `unsat`
//! means the condition holds. The network is unrolled into `define-fun`
//! chains: forward activations, then the reverse pass for the gradient
//! terms of the Lie derivative.

use crate::dynamics::{DynamicsModel, SystemKind};
use crate::net::{Actuation, Mlp, OutputActivation, PolicyNet};
use crate::verify::interval::BoxRegion;

/// One query text per condition of the certification predicate.
#[derive(Debug, Clone)]
pub struct SmtExport {
    /// `∃x: W(x) ≤ W(0) ∧ W(x) < c ∧ ‖x‖² ≥ ε²`
    pub condition1: String,
    /// `∃x: Ẇ(x) ≥ 0 ∧ W(x) < c ∧ ‖x‖² ≥ ε²`
    pub condition2: String,
    /// `∃x ∈ ∂R2: W(x) ≤ c`
    pub condition3: String,
}

/// Decimal literal (SMT-LIB has no scientific notation; negatives are
/// unary applications).
fn num(v: f64) -> String {
    if v < 0.0 || v.is_sign_negative() {
        return format!("(- {})", num(-v));
    }
    let mut s = format!("{v}");
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

struct SmtBuilder {
    lines: Vec<String>,
}

impl SmtBuilder {
    fn new(n: usize, r2: &BoxRegion) -> Self {
        let mut lines = vec!["(set-logic QF_NRA)".to_string()];
        for i in 1..=n {
            lines.push(format!("(declare-fun x{i} () Real)"));
        }
        for (i, d) in r2.dims.iter().enumerate() {
            lines.push(format!("(assert (<= {} x{}))", num(d.lo), i + 1));
            lines.push(format!("(assert (<= x{} {}))", i + 1, num(d.hi)));
        }
        SmtBuilder { lines }
    }

    fn def(&mut self, name: &str, term: &str) {
        self.lines.push(format!("(define-fun {name} () Real {term})"));
    }

    fn assert(&mut self, term: &str) {
        self.lines.push(format!("(assert {term})"));
    }

    fn finish(mut self) -> String {
        self.lines.push("(check-sat)".to_string());
        self.lines.push("(exit)".to_string());
        self.lines.join("\n") + "\n"
    }

    /// Forward pass: defines `{prefix}a{l}_{i}` activations; returns the
    /// output names. Inputs are `x1..xn`.
    fn mlp_forward(&mut self, net: &Mlp, prefix: &str) -> Vec<String> {
        let layers = net.weights.len();
        let mut prev: Vec<String> = (1..=net.input_dim()).map(|i| format!("x{i}")).collect();
        for l in 0..layers {
            let n_in = net.layer_dims[l];
            let n_out = net.layer_dims[l + 1];
            let mut cur = Vec::with_capacity(n_out);
            for i in 0..n_out {
                let mut terms = vec![num(net.biases[l][i])];
                for j in 0..n_in {
                    terms.push(format!("(* {} {})", num(net.weights[l][i * n_in + j]), prev[j]));
                }
                let z = format!("(+ {})", terms.join(" "));
                let act = if l + 1 < layers || net.output_activation == OutputActivation::Tanh {
                    format!("(tanh {z})")
                } else {
                    z
                };
                let name = format!("{prefix}a{}_{i}", l + 1);
                self.def(&name, &act);
                cur.push(name);
            }
            prev = cur;
        }
        prev
    }

    /// Reverse pass for a scalar-output net whose forward activations were
    /// defined with `mlp_forward`; returns the input-gradient names.
    fn mlp_input_gradient(&mut self, net: &Mlp, prefix: &str, out_name: &str) -> Vec<String> {
        let layers = net.weights.len();
        // seed: derivative of the output activation w.r.t. the last pre-activation
        let seed = format!("{prefix}gz{layers}_0");
        match net.output_activation {
            OutputActivation::Tanh => {
                self.def(&seed, &format!("(- 1.0 (* {out_name} {out_name}))"))
            }
            OutputActivation::Identity => self.def(&seed, "1.0"),
        }
        let mut g: Vec<String> = vec![seed];
        for l in (0..layers).rev() {
            let n_in = net.layer_dims[l];
            let n_out = net.layer_dims[l + 1];
            let mut g_prev = Vec::with_capacity(n_in);
            for j in 0..n_in {
                let sum: Vec<String> = (0..n_out)
                    .map(|i| format!("(* {} {})", num(net.weights[l][i * n_in + j]), g[i]))
                    .collect();
                let mut term = if sum.len() == 1 {
                    sum[0].clone()
                } else {
                    format!("(+ {})", sum.join(" "))
                };
                if l > 0 {
                    let a = format!("{prefix}a{l}_{j}");
                    term = format!("(* {term} (- 1.0 (* {a} {a})))");
                }
                let name = if l > 0 {
                    format!("{prefix}gz{l}_{j}")
                } else {
                    format!("{prefix}gx{}", j + 1)
                };
                self.def(&name, &term);
                g_prev.push(name);
            }
            g = g_prev;
        }
        g
    }

    /// Policy output terms `u_1..u_m`.
    fn policy(&mut self, policy: &PolicyNet) -> Vec<String> {
        let raw = self.mlp_forward(&policy.core, "p_");
        match &policy.actuation {
            Actuation::BoxSquash { lower, upper } => raw
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let name = format!("u_{}", i + 1);
                    self.def(
                        &name,
                        &format!(
                            "(+ {} (* {} (* 0.5 (+ 1.0 (tanh {r})))))",
                            num(lower[i]),
                            num(upper[i] - lower[i])
                        ),
                    );
                    name
                })
                .collect(),
            Actuation::VertexSoftmax { vertices } => {
                for (k, r) in raw.iter().enumerate() {
                    self.def(&format!("p_e{k}"), &format!("(exp {r})"));
                }
                let sum: Vec<String> = (0..raw.len()).map(|k| format!("p_e{k}")).collect();
                self.def("p_esum", &format!("(+ {})", sum.join(" ")));
                vertices
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let terms: Vec<String> = row
                            .iter()
                            .enumerate()
                            .map(|(k, &v)| format!("(* {} (/ p_e{k} p_esum))", num(v)))
                            .collect();
                        let name = format!("u_{}", i + 1);
                        self.def(&name, &format!("(+ {})", terms.join(" ")));
                        name
                    })
                    .collect()
            }
            Actuation::BoxProject { lower, upper } => raw
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let name = format!("u_{}", i + 1);
                    self.def(
                        &name,
                        &format!(
                            "(ite (< {r} {lo}) {lo} (ite (> {r} {hi}) {hi} {r}))",
                            lo = num(lower[i]),
                            hi = num(upper[i])
                        ),
                    );
                    name
                })
                .collect(),
        }
    }

    /// Closed-loop field terms `f_1..f_n` for the benchmark systems.
    fn dynamics(&mut self, model: &DynamicsModel, u: &[String]) -> Vec<String> {
        let p = &model.params;
        let defs: Vec<String> = match model.kind {
            SystemKind::DoubleIntegrator => vec!["x2".into(), u[0].clone()],
            SystemKind::VanDerPol => vec![
                "x2".into(),
                format!(
                    "(+ (- x1 (* {} (- 1.0 (* x1 x1)) x2)) {})",
                    num(p.mu),
                    u[0]
                ),
            ],
            SystemKind::InvertedPendulum => {
                let ml2 = p.mass * p.pole_length * p.pole_length;
                vec![
                    "x2".into(),
                    format!(
                        "(+ (- (* {} (sin x1)) (* {} x2)) (* {} {}))",
                        num(p.gravity / p.pole_length),
                        num(p.friction / ml2),
                        num(1.0 / ml2),
                        u[0]
                    ),
                ]
            }
            SystemKind::BicycleTracking => vec![
                format!("(* {} (sin x2))", num(p.speed)),
                format!(
                    "(- (* {} (tan {})) (/ (cos x2) (- 1.0 x1)))",
                    num(p.speed / p.wheelbase),
                    u[0]
                ),
            ],
        };
        defs.iter()
            .enumerate()
            .map(|(i, term)| {
                let name = format!("f_{}", i + 1);
                self.def(&name, term);
                name
            })
            .collect()
    }
}

fn norm_sq_term(n: usize) -> String {
    let terms: Vec<String> = (1..=n).map(|i| format!("(* x{i} x{i})")).collect();
    format!("(+ {})", terms.join(" "))
}

pub fn export_smt2(
    net: &Mlp,
    policy: &PolicyNet,
    model: &DynamicsModel,
    r2: &BoxRegion,
    c: f64,
    epsilon: f64,
) -> SmtExport {
    let n = model.state_dim();
    let w0 = net.forward(&vec![0.0; n]).expect("origin evaluation")[0];

    // condition 1 negated: W(x) ≤ W(0), inside the active set
    let mut b1 = SmtBuilder::new(n, r2);
    let w_out = b1.mlp_forward(net, "w_").pop().unwrap();
    b1.assert(&format!("(<= {w_out} {})", num(w0)));
    b1.assert(&format!("(< {w_out} {})", num(c)));
    b1.assert(&format!("(>= {} {})", norm_sq_term(n), num(epsilon * epsilon)));
    let condition1 = b1.finish();

    // condition 2 negated: Ẇ(x) ≥ 0, inside the active set
    let mut b2 = SmtBuilder::new(n, r2);
    let w_out = b2.mlp_forward(net, "w_").pop().unwrap();
    let grads = b2.mlp_input_gradient(net, "w_", &w_out);
    let u = b2.policy(policy);
    let f = b2.dynamics(model, &u);
    let lie_terms: Vec<String> = grads
        .iter()
        .zip(&f)
        .map(|(g, fi)| format!("(* {g} {fi})"))
        .collect();
    b2.def("lie", &format!("(+ {})", lie_terms.join(" ")));
    b2.assert("(>= lie 0.0)");
    b2.assert(&format!("(< {w_out} {})", num(c)));
    b2.assert(&format!("(>= {} {})", norm_sq_term(n), num(epsilon * epsilon)));
    let condition2 = b2.finish();

    // condition 3 negated: W(x) ≤ c somewhere on ∂R2
    let mut b3 = SmtBuilder::new(n, r2);
    let w_out = b3.mlp_forward(net, "w_").pop().unwrap();
    let faces: Vec<String> = r2
        .dims
        .iter()
        .enumerate()
        .flat_map(|(i, d)| {
            [
                format!("(= x{} {})", i + 1, num(d.lo)),
                format!("(= x{} {})", i + 1, num(d.hi)),
            ]
        })
        .collect();
    b3.assert(&format!("(or {})", faces.join(" ")));
    b3.assert(&format!("(<= {w_out} {})", num(c)));
    let condition3 = b3.finish();

    SmtExport {
        condition1,
        condition2,
        condition3,
    }
}
