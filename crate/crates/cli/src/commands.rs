//! Subcommand implementations. Exit codes: 0 success/verified, 2 usage,
//! 3 unknown (verification inconclusive), 4 falsified, 1 internal error.

use std::path::{Path, PathBuf};

use serde::Serialize;
use zubov_core::dynamics::ControlSystem;
use zubov_core::net::{load_policy, load_weights, save_weights, Mlp, PolicyNet};
use zubov_core::plot;
use zubov_core::presets;
use zubov_core::sim::{simulate, write_trajectory_csv};
use zubov_core::train::{sample_interior, train, write_history_csv};
use zubov_core::verify::smt::export_smt2;
use zubov_core::verify::{
    certify_conditions, doa_area, find_max_level, AreaEstimate, CertStatus, CertificationResult,
    NeuralCertSystem,
};
use zubov_core::Error;

use crate::config::Resolved;

pub enum CmdError {
    Usage(String),
    Internal(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Internal(e.to_string())
    }
}

pub type CmdResult = Result<u8, CmdError>;

fn ensure_dir(path: &Path) -> Result<(), CmdError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CmdError::Internal(format!("cannot create {}: {e}", path.display())))
}

fn w_theta_path(dir: &Path) -> PathBuf {
    dir.join("w_theta.json")
}

fn pi_gamma_path(dir: &Path) -> PathBuf {
    dir.join("pi_gamma.json")
}

fn load_nets(dir: &Path) -> Result<(Mlp, PolicyNet), CmdError> {
    let (w, _) = load_weights(&w_theta_path(dir))
        .map_err(|e| CmdError::Usage(format!("cannot load certificate weights: {e}")))?;
    let policy = load_policy(&pi_gamma_path(dir))
        .map_err(|e| CmdError::Usage(format!("cannot load policy weights: {e}")))?;
    Ok((w, policy))
}

pub fn cmd_train(cfg: &Resolved) -> CmdResult {
    ensure_dir(&cfg.weights_out)?;
    ensure_dir(&cfg.data_out)?;
    let checkpoint_dir = cfg.weights_out.join("checkpoints");
    ensure_dir(&checkpoint_dir)?;

    let result = train(&cfg.train, &cfg.model, |it, w, policy| {
        let tag = format!("{it:06}");
        let _ = save_weights(&checkpoint_dir.join(format!("w_theta_{tag}.json")), w, None);
        let _ = save_weights(
            &checkpoint_dir.join(format!("pi_gamma_{tag}.json")),
            &policy.core,
            Some(&policy.actuation),
        );
    });
    let result = match result {
        Ok(r) => r,
        Err(Error::NonFiniteLoss { iteration, detail }) => {
            eprintln!("training aborted at iteration {iteration}: {detail}");
            eprintln!("checkpoints (if any) are under {}", checkpoint_dir.display());
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };

    save_weights(&w_theta_path(&cfg.weights_out), &result.w, None)?;
    save_weights(
        &pi_gamma_path(&cfg.weights_out),
        &result.policy.core,
        Some(&result.policy.actuation),
    )?;
    write_history_csv(&cfg.data_out.join("history.csv"), &result.history)?;

    let last = result.history.last().expect("nonempty history");
    println!(
        "trained {} for {} iterations (seed {})",
        cfg.kind.name(),
        cfg.train.iterations,
        cfg.train.seed
    );
    println!(
        "final losses: l_z={:.6} l_r={:.6} l_p={:.6} l_actor={:.6} l_b={:.6} total={:.6}",
        last.l_z, last.l_r, last.l_p, last.l_actor, last.l_b, last.total
    );
    println!("weights: {}", cfg.weights_out.display());
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport {
    system: String,
    #[serde(flatten)]
    result: CertificationResult,
    area_estimate: Option<AreaEstimate>,
    /// Published level for this system, for informational comparison.
    reference_c: f64,
}

pub fn cmd_verify(cfg: &Resolved, weights_dir: Option<&Path>) -> CmdResult {
    let dir = weights_dir.unwrap_or(&cfg.weights_out);
    let (w, policy) = load_nets(dir)?;
    let r2 = cfg.train.r2_region();
    let sys = NeuralCertSystem::new(&w, &policy, &cfg.model);

    let (c, result) = match cfg.fixed_c {
        Some(c) => (c, certify_conditions(&sys, &r2, c, &cfg.verify)),
        None => find_max_level(&sys, &r2, &cfg.verify, cfg.level_tol),
    };

    let area_estimate = if result.is_verified() {
        let w_eval = w.lift(|v| v);
        Some(doa_area(
            |x| w_eval.forward(x)[0],
            c,
            &r2,
            200_000,
            cfg.train.seed,
        ))
    } else {
        None
    };

    let report = VerifyReport {
        system: cfg.kind.name().to_string(),
        result,
        area_estimate,
        reference_c: presets::reference_level(cfg.kind),
    };
    if let Some(parent) = cfg.report_out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    std::fs::write(
        &cfg.report_out,
        serde_json::to_string_pretty(&report).map_err(|e| CmdError::Internal(e.to_string()))?,
    )
    .map_err(|e| CmdError::Internal(e.to_string()))?;

    match &report.result.status {
        CertStatus::Verified => {
            println!(
                "verified: c = {c:.4} (published reference {:.2}), {} boxes, report {}",
                report.reference_c,
                report.result.boxes_processed,
                cfg.report_out.display()
            );
            if let Some(a) = &report.area_estimate {
                println!("region area {:.4} ± {:.4}", a.area, a.std_error);
            }
            Ok(0)
        }
        CertStatus::Unknown => {
            println!("inconclusive at c = {c:.4}; report {}", cfg.report_out.display());
            Ok(3)
        }
        CertStatus::Falsified { counterexample } => {
            println!(
                "falsified condition {} at {:?} (margin {:.3e}); report {}",
                counterexample.condition,
                counterexample.x,
                counterexample.margin,
                cfg.report_out.display()
            );
            Ok(4)
        }
    }
}

pub fn cmd_lqr(cfg: &Resolved) -> CmdResult {
    let r2 = cfg.train.r2_region();
    let params = zubov_core::lqr::LqrCertifyParams {
        epsilon: cfg.verify.epsilon,
        ..Default::default()
    };
    let solution = zubov_core::lqr::lqr_baseline(&cfg.model, &r2, 1e-3, &params)?;
    let out = cfg.report_out.with_file_name("lqr_report.json");
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    std::fs::write(
        &out,
        serde_json::to_string_pretty(&solution).map_err(|e| CmdError::Internal(e.to_string()))?,
    )
    .map_err(|e| CmdError::Internal(e.to_string()))?;
    println!(
        "lqr baseline: c_lqr = {:.4}, ellipse area = {:.4}, CARE residual = {:.2e}",
        solution.c_lqr, solution.ellipse_area, solution.residual
    );
    println!("report {}", out.display());
    Ok(0)
}

pub fn cmd_simulate(
    cfg: &Resolved,
    weights_dir: Option<&Path>,
    x0: &[f64],
    out: Option<&Path>,
) -> CmdResult {
    if x0.len() != cfg.model.state_dim() {
        return Err(CmdError::Usage(format!(
            "--x0 needs {} comma-separated values",
            cfg.model.state_dim()
        )));
    }
    let dir = weights_dir.unwrap_or(&cfg.weights_out);
    let policy = load_policy(&pi_gamma_path(dir))
        .map_err(|e| CmdError::Usage(format!("cannot load policy weights: {e}")))?;
    let pi = policy.lift(|v| v);
    let model = cfg.model;
    let mut field = |x: &[f64]| {
        let u = pi.eval(x);
        model.field(x, &u)
    };
    let traj = simulate(&mut field, x0, &cfg.train.sim);
    let default_out = cfg.data_out.join("trajectory.csv");
    let path = out.unwrap_or(&default_out);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    write_trajectory_csv(path, &traj)?;
    println!(
        "simulated {} steps, status {:?}, wrote {}",
        traj.states.len() - 1,
        traj.status,
        path.display()
    );
    Ok(0)
}

pub fn cmd_area(cfg: &Resolved, weights_dir: Option<&Path>, c: f64, samples: u64) -> CmdResult {
    let dir = weights_dir.unwrap_or(&cfg.weights_out);
    let (w, _) = load_weights(&w_theta_path(dir))
        .map_err(|e| CmdError::Usage(format!("cannot load certificate weights: {e}")))?;
    let r2 = cfg.train.r2_region();
    let w_eval = w.lift(|v| v);
    let est = doa_area(|x| w_eval.forward(x)[0], c, &r2, samples, cfg.train.seed);
    println!(
        "{}",
        serde_json::to_string_pretty(&est).map_err(|e| CmdError::Internal(e.to_string()))?
    );
    Ok(0)
}

pub fn cmd_plot_data(
    cfg: &Resolved,
    weights_dir: Option<&Path>,
    c: f64,
    grid_n: usize,
) -> CmdResult {
    if cfg.model.state_dim() != 2 {
        return Err(CmdError::Usage("plot-data supports two-dimensional systems".into()));
    }
    let dir = weights_dir.unwrap_or(&cfg.weights_out);
    let (w, policy) = load_nets(dir)?;
    let r2 = cfg.train.r2_region();
    ensure_dir(&cfg.data_out)?;

    let w_eval = w.lift(|v| v);
    let w_fn = |x: &[f64]| w_eval.forward(x)[0];
    plot::write_grid_csv(
        &cfg.data_out.join("w_grid.csv"),
        &plot::grid_values(w_fn, &r2, grid_n),
    )?;

    let pi = policy.lift(|v| v);
    let model = cfg.model;
    let field = |x: &[f64]| {
        let u = pi.eval(x);
        model.field(x, &u)
    };
    plot::write_vector_field_csv(
        &cfg.data_out.join("vector_field.csv"),
        &plot::vector_field(field, &r2, 21),
    )?;

    let segments = plot::level_segments(w_fn, &r2, grid_n, c, 1e-4);
    plot::write_level_csv(&cfg.data_out.join(format!("level_{c}.csv")), &segments)?;

    // a few closed-loop trajectories for the phase portrait
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.train.seed);
    let starts = sample_interior(&r2, 8, &mut rng);
    for (i, x0) in starts.iter().enumerate() {
        let mut field = |x: &[f64]| {
            let u = pi.eval(x);
            model.field(x, &u)
        };
        let traj = simulate(&mut field, x0, &cfg.train.sim);
        write_trajectory_csv(&cfg.data_out.join(format!("trajectory_{i}.csv")), &traj)?;
    }
    println!(
        "wrote w_grid.csv ({grid_n}x{grid_n}), vector_field.csv, level_{c}.csv, 8 trajectories to {}",
        cfg.data_out.display()
    );
    Ok(0)
}

pub fn cmd_export_smt(cfg: &Resolved, weights_dir: Option<&Path>, c: f64) -> CmdResult {
    let dir = weights_dir.unwrap_or(&cfg.weights_out);
    let (w, policy) = load_nets(dir)?;
    let r2 = cfg.train.r2_region();
    let export = export_smt2(&w, &policy, &cfg.model, &r2, c, cfg.verify.epsilon);
    ensure_dir(&cfg.data_out)?;
    for (name, text) in [
        ("condition1.smt2", &export.condition1),
        ("condition2.smt2", &export.condition2),
        ("condition3.smt2", &export.condition3),
    ] {
        std::fs::write(cfg.data_out.join(name), text)
            .map_err(|e| CmdError::Internal(e.to_string()))?;
    }
    println!(
        "wrote condition1.smt2, condition2.smt2, condition3.smt2 to {} (unsat = condition holds)",
        cfg.data_out.display()
    );
    Ok(0)
}
