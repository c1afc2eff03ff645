//! LQR baseline: continuous algebraic Riccati solution by Newton–Kleinman
//! iteration (Bass initialization), gain computation, and bisection for the
//! largest ellipsoidal sublevel set `xᵀPx < c` on which the nonlinear
//! closed loop `ẋ = f(x, sat(u* − Kx))` is certified.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlSystem, DynamicsModel};
use crate::error::{Error, Result};
use crate::verify::bnb::{explore, BnbOutcome, ExploreStatus};
use crate::verify::interval::{BoxRegion, Interval};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LqrSolution {
    /// Riccati solution, symmetric positive definite.
    pub p: Vec<Vec<f64>>,
    /// Gain, `u = sat(u* − Kx)`.
    pub k: Vec<Vec<f64>>,
    /// Frobenius norm of the CARE residual.
    pub residual: f64,
    /// Largest certified level of `xᵀPx`.
    pub c_lqr: f64,
    /// `π·c/√det(P)` for n = 2.
    pub ellipse_area: f64,
}

/// Solve `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` for symmetric PSD `P`.
///
/// Newton–Kleinman: starting from a stabilizing gain (Bass construction),
/// each step solves one Lyapunov equation; convergence is quadratic. The
/// contract is the residual, checked on exit.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Solver("CARE: inconsistent matrix dimensions".into()));
    }
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("CARE: R is singular".into()))?;

    let mut k = stabilizing_gain(a, b)?;
    let mut p = DMatrix::zeros(n, n);
    for _ in 0..60 {
        let a_cl = a - b * &k;
        // (A−BK)ᵀ P + P (A−BK) = −(Q + Kᵀ R K)
        let rhs = -(q + k.transpose() * r * &k);
        p = solve_lyapunov(&a_cl.transpose(), &rhs)?;
        p = (&p + p.transpose()) * 0.5;
        k = &r_inv * b.transpose() * &p;
        if care_residual(a, b, q, r, &p) < 1e-13 {
            break;
        }
    }
    let residual = care_residual(a, b, q, r, &p);
    if residual >= 1e-9 {
        return Err(Error::Solver(format!(
            "CARE iteration did not converge (residual {residual:.3e}); is (A, B) stabilizable?"
        )));
    }
    if !is_hurwitz(&(a - b * lqr_gain(&p, b, r)?)) {
        return Err(Error::Solver("CARE produced a non-stabilizing solution".into()));
    }
    Ok(p)
}

/// `K = R⁻¹ Bᵀ P`.
pub fn lqr_gain(p: &DMatrix<f64>, b: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("lqr_gain: R is singular".into()))?;
    Ok(r_inv * b.transpose() * p)
}

pub fn care_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> f64 {
    let r_inv = r.clone().try_inverse().expect("R invertible");
    (a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q).norm()
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    m.complex_eigenvalues().iter().all(|l| l.re < 0.0)
}

/// Solve `MᵀX + XM = C` by Kronecker vectorization (small n); the caller
/// passes `Mᵀ` directly.
fn solve_lyapunov(m_t: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m_t.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    // column-major vec: vec(MᵀX) = (I ⊗ Mᵀ)vec(X), vec(XM) = (Mᵀ ⊗ I)vec(X)
    let coeff = eye.kronecker(m_t) + m_t.kronecker(&eye);
    let rhs = DVector::from_column_slice(c.as_slice());
    let sol = coeff
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("Lyapunov equation is singular".into()))?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

/// Bass construction of a stabilizing gain: with β above the spectral
/// radius, solve `(A+βI)Z + Z(A+βI)ᵀ = 2BBᵀ` and take `K₀ = BᵀZ⁻¹`.
fn stabilizing_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut beta = a.norm() + 0.5;
    for _ in 0..6 {
        let shifted = a + DMatrix::<f64>::identity(n, n) * beta;
        // A Z + Z Aᵀ = C  is  (Aᵀ)ᵀ Z + Z Aᵀ …: reuse the Mᵀ-form with M = shiftedᵀ
        if let Ok(z) = solve_lyapunov(&shifted, &(b * b.transpose() * 2.0)) {
            if let Some(z_inv) = z.clone().try_inverse() {
                let k0 = b.transpose() * z_inv;
                if is_hurwitz(&(a - b * &k0)) {
                    return Ok(k0);
                }
            }
        }
        beta *= 2.0;
    }
    Err(Error::Solver(
        "could not construct a stabilizing initial gain; is (A, B) stabilizable?".into(),
    ))
}

/// Saturated LQR law about the equilibrium input: `u = sat(u* − Kx)` with
/// componentwise saturation to `[-1, 1]`.
pub fn lqr_control(k: &DMatrix<f64>, u_star: &[f64], x: &[f64]) -> Vec<f64> {
    (0..k.nrows())
        .map(|i| {
            let kx: f64 = (0..k.ncols()).map(|j| k[(i, j)] * x[j]).sum();
            (u_star[i] - kx).clamp(-1.0, 1.0)
        })
        .collect()
}

fn quad_form(p: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[i] * p[(i, j)] * x[j];
        }
    }
    s
}

/// Largest modulus of `u*_i − kᵢᵀx` over the ellipse `xᵀPx ≤ c`, in closed
/// form: `|u*_i| + sqrt(c · kᵢᵀ P⁻¹ kᵢ)`.
pub fn max_input_over_ellipse(
    p: &DMatrix<f64>,
    k: &DMatrix<f64>,
    u_star: &[f64],
    c: f64,
) -> Result<f64> {
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("P is singular".into()))?;
    let mut worst = 0.0f64;
    for i in 0..k.nrows() {
        let ki = k.row(i).transpose();
        let support = (c * (ki.transpose() * &p_inv * &ki)[(0, 0)]).max(0.0).sqrt();
        worst = worst.max(u_star[i].abs() + support);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LqrCertifyParams {
    pub epsilon: f64,
    pub delta_min: f64,
    pub budget: u64,
}

impl Default for LqrCertifyParams {
    fn default() -> Self {
        LqrCertifyParams {
            epsilon: 0.1,
            delta_min: 1e-5,
            budget: 2_000_000,
        }
    }
}

/// Certify `xᵀPẋ < 0` and `‖u* − Kx‖∞ ≤ 1` over `{xᵀPx < c, ‖x‖ ≥ ε}`
/// with the nonlinear closed loop. The input bound is checked analytically
/// via the ellipse support function; the decay condition by interval
/// branch-and-bound over the bounding box of the ellipse. `Unknown`
/// (budget or width exhaustion) counts as not certified.
pub fn certify_lqr(
    model: &DynamicsModel,
    p: &DMatrix<f64>,
    k: &DMatrix<f64>,
    c: f64,
    params: &LqrCertifyParams,
) -> Result<bool> {
    if c <= 0.0 {
        return Ok(true);
    }
    let u_star = model.equilibrium_input();
    if max_input_over_ellipse(p, k, &u_star, c)? > 1.0 {
        return Ok(false);
    }
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("P is singular".into()))?;
    let n = model.state_dim();
    // bounding box of the ellipse: |x_i| ≤ sqrt(c · (P⁻¹)_ii)
    let root = BoxRegion::new(
        (0..n)
            .map(|i| {
                let h = (c * p_inv[(i, i)]).max(0.0).sqrt();
                Interval::new(-h, h)
            })
            .collect(),
    );
    let eps = params.epsilon;

    let decay_point = |x: &[f64]| -> f64 {
        let u = lqr_control(k, &u_star, x);
        let f = model.field(x, &u);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * p[(i, j)] * f[j];
            }
        }
        s
    };

    let check = |b: &BoxRegion| -> BnbOutcome {
        // activation predicate: xᵀPx < c and ‖x‖ ≥ ε
        let mut qf = Interval::point(0.0);
        for i in 0..n {
            for j in 0..n {
                qf = qf + b.dims[i] * Interval::point(p[(i, j)]) * b.dims[j];
            }
        }
        if qf.lo >= c {
            return BnbOutcome::Discharged;
        }
        if Interval::norm(&b.dims).hi <= eps {
            return BnbOutcome::Discharged;
        }
        // decay: xᵀPẋ < 0 with u = sat(u* − Kx)
        let u: Vec<Interval> = (0..k.nrows())
            .map(|i| {
                let mut kx = Interval::point(0.0);
                for j in 0..n {
                    kx = kx + Interval::point(k[(i, j)]) * b.dims[j];
                }
                (Interval::point(u_star[i]) - kx).clamp(-1.0, 1.0)
            })
            .collect();
        let f = model.field(&b.dims, &u);
        let mut decay = Interval::point(0.0);
        for i in 0..n {
            for j in 0..n {
                decay = decay + b.dims[i] * Interval::point(p[(i, j)]) * f[j];
            }
        }
        if decay.hi < 0.0 {
            BnbOutcome::Discharged
        } else {
            BnbOutcome::Undecided
        }
    };
    let falsify = |x: &[f64]| {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if quad_form(p, x) < c && nx >= eps && decay_point(x) >= 0.0 {
            Some((x.to_vec(), decay_point(x)))
        } else {
            None
        }
    };

    let result = explore(vec![root], &check, &falsify, params.delta_min, params.budget);
    Ok(matches!(result.status, ExploreStatus::AllDischarged))
}

/// Bisection for the largest certified level. Returns 0 when even the
/// smallest probe fails.
pub fn bisect_c_lqr(
    model: &DynamicsModel,
    p: &DMatrix<f64>,
    k: &DMatrix<f64>,
    c_max: f64,
    tol: f64,
    params: &LqrCertifyParams,
) -> Result<f64> {
    let certify = |c: f64| certify_lqr(model, p, k, c, params);
    if !certify(tol)? {
        log::warn!("LQR certification failed even at c = {tol}");
        return Ok(0.0);
    }
    if certify(c_max)? {
        return Ok(c_max);
    }
    let (mut lo, mut hi) = (tol, c_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if certify(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Full baseline for one system: solve CARE with Q = R = I about the
/// equilibrium, then bisect for the largest certified ellipse. The
/// bisection is capped at the largest value of `xᵀPx` over the corners of
/// the region of interest.
pub fn lqr_baseline(
    model: &DynamicsModel,
    r2: &BoxRegion,
    tol: f64,
    params: &LqrCertifyParams,
) -> Result<LqrSolution> {
    let u_star = model.equilibrium_input();
    let (a, b) = model.linearize(&[0.0, 0.0], &u_star)?;
    let n = model.state_dim();
    let q = DMatrix::<f64>::identity(n, n);
    let r = DMatrix::<f64>::identity(model.input_dim(), model.input_dim());
    let p = solve_care(&a, &b, &q, &r)?;
    let k = lqr_gain(&p, &b, &r)?;
    let residual = care_residual(&a, &b, &q, &r, &p);
    let mut c_cap = 0.0f64;
    for mask in 0..(1usize << n) {
        let corner: Vec<f64> = (0..n)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    r2.dims[i].hi
                } else {
                    r2.dims[i].lo
                }
            })
            .collect();
        c_cap = c_cap.max(quad_form(&p, &corner));
    }
    let c_lqr = bisect_c_lqr(model, &p, &k, c_cap, tol, params)?;
    let det = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
    let ellipse_area = std::f64::consts::PI * c_lqr / det.sqrt();
    Ok(LqrSolution {
        p: (0..n).map(|i| (0..n).map(|j| p[(i, j)]).collect()).collect(),
        k: (0..k.nrows())
            .map(|i| (0..n).map(|j| k[(i, j)]).collect())
            .collect(),
        residual,
        c_lqr,
        ellipse_area,
    })
}
