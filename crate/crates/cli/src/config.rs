//! Run configuration: JSON file schema with per-system defaults baked in.
//! Explicit file fields override the defaults; command-line flags override
//! the file. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use zubov_core::dynamics::{DynamicsModel, SystemKind, SystemParams};
use zubov_core::presets;
use zubov_core::train::{LossMode, TrainConfig};
use zubov_core::verify::VerifyParams;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    pub system: Option<SystemSection>,
    pub train: Option<TrainSection>,
    pub verify: Option<VerifySection>,
    pub paths: Option<PathsSection>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub kind: SystemKind,
    #[serde(default)]
    pub params: Option<SystemParams>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub trajectories_per_iter: Option<usize>,
    pub batch_size: Option<usize>,
    pub lambda_zero: Option<f64>,
    pub lambda_actor: Option<f64>,
    pub lambda_barrier: Option<f64>,
    pub alpha: Option<f64>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub lr_decay: Option<f64>,
    pub adam_beta1: Option<f64>,
    pub adam_beta2: Option<f64>,
    pub r1: Option<Vec<[f64; 2]>>,
    pub region_scale: Option<f64>,
    pub loss_mode: Option<LossMode>,
    pub w_dims: Option<Vec<usize>>,
    pub pi_dims: Option<Vec<usize>>,
    pub grad_norm_guard: Option<f64>,
    pub sim: Option<SimSection>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub r_conv: Option<f64>,
    pub r_div: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Fixed level to certify; absent means bisect for the largest.
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta_min: Option<f64>,
    pub budget: Option<u64>,
    /// Bisection bracket width for the level search.
    pub tol: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub weights_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub data_out: Option<PathBuf>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: DynamicsModel,
    pub kind: SystemKind,
    pub train: TrainConfig,
    pub verify: VerifyParams,
    /// Fixed certification level; `None` bisects.
    pub fixed_c: Option<f64>,
    pub level_tol: f64,
    pub weights_out: PathBuf,
    pub report_out: PathBuf,
    pub data_out: PathBuf,
}

impl TrainSection {
    fn apply(&self, cfg: &mut TrainConfig) {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            };
        }
        set!(trajectories_per_iter);
        set!(batch_size);
        set!(lambda_zero);
        set!(lambda_actor);
        set!(lambda_barrier);
        set!(alpha);
        set!(iterations);
        set!(learning_rate);
        set!(lr_decay);
        set!(adam_beta1);
        set!(adam_beta2);
        set!(r1);
        set!(region_scale);
        set!(loss_mode);
        set!(w_dims);
        set!(pi_dims);
        set!(grad_norm_guard);
        if let Some(sim) = &self.sim {
            if let Some(v) = sim.dt {
                cfg.sim.dt = v;
            }
            if let Some(v) = sim.t_max {
                cfg.sim.t_max = v;
            }
            if let Some(v) = sim.r_conv {
                cfg.sim.r_conv = v;
            }
            if let Some(v) = sim.r_div {
                cfg.sim.r_div = v;
            }
        }
    }
}

pub fn load_file(path: &Path) -> Result<RunConfigFile, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

/// Merge defaults ← config file ← flags into a resolved configuration.
pub fn resolve(
    file: Option<&RunConfigFile>,
    system_flag: Option<SystemKind>,
    seed_flag: Option<u64>,
) -> Result<Resolved, String> {
    let kind = system_flag
        .or_else(|| file.and_then(|f| f.system.as_ref()).map(|s| s.kind))
        .ok_or_else(|| "no system selected: pass --system or a config with a system block".to_string())?;
    let params = file
        .and_then(|f| f.system.as_ref())
        .and_then(|s| s.params)
        .unwrap_or_default();
    let model = DynamicsModel::new(kind, params).map_err(|e| e.to_string())?;

    let mut train = presets::train_config(kind);
    if let Some(section) = file.and_then(|f| f.train.as_ref()) {
        section.apply(&mut train);
    }
    if let Some(seed) = file.and_then(|f| f.seed) {
        train.seed = seed;
    }
    if let Some(seed) = seed_flag {
        train.seed = seed;
    }
    train.validate().map_err(|e| e.to_string())?;

    let mut verify = presets::verify_params(kind);
    let mut fixed_c = None;
    let mut level_tol = 0.01;
    if let Some(section) = file.and_then(|f| f.verify.as_ref()) {
        if let Some(c) = section.c {
            if !(0.0 < c && c < 1.0) {
                return Err(format!("verification level c = {c} outside (0, 1)"));
            }
            fixed_c = Some(c);
        }
        if let Some(e) = section.epsilon {
            verify.epsilon = e;
        }
        if section.delta_min.is_some() {
            verify.delta_min = section.delta_min;
        }
        if let Some(b) = section.budget {
            verify.budget = b;
        }
        if let Some(t) = section.tol {
            level_tol = t;
        }
    }

    let default_dir = PathBuf::from(format!("out-{}", kind.name()));
    let paths = file.and_then(|f| f.paths.as_ref());
    let weights_out = paths
        .and_then(|p| p.weights_out.clone())
        .unwrap_or_else(|| default_dir.clone());
    let report_out = paths
        .and_then(|p| p.report_out.clone())
        .unwrap_or_else(|| default_dir.join("report.json"));
    let data_out = paths
        .and_then(|p| p.data_out.clone())
        .unwrap_or_else(|| default_dir.clone());

    Ok(Resolved {
        model,
        kind,
        train,
        verify,
        fixed_c,
        level_tol,
        weights_out,
        report_out,
        data_out,
    })
}
