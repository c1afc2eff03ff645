//! Per-system default configurations: network sizes and sharpness per the
//! benchmark table, sampling regions, and verification radii scaled to
//! each system's state range.

use crate::dynamics::SystemKind;
use crate::sim::SimParams;
use crate::train::TrainConfig;
use crate::verify::VerifyParams;

/// Training defaults for one benchmark system. Shared loss weights
/// (M = 8, K = 64, λ0 = 5, λc = 0.5, λb = 5) come from
/// `TrainConfig::default()`.
pub fn train_config(kind: SystemKind) -> TrainConfig {
    let base = TrainConfig::default();
    match kind {
        SystemKind::DoubleIntegrator => TrainConfig {
            alpha: 0.05,
            w_dims: vec![2, 20, 20, 1],
            pi_dims: vec![2, 10, 10, 1],
            r1: vec![[-2.5, 2.5], [-2.5, 2.5]],
            sim: SimParams {
                r_conv: 0.1,
                ..SimParams::default()
            },
            ..base
        },
        SystemKind::VanDerPol => TrainConfig {
            alpha: 0.1,
            w_dims: vec![2, 30, 30, 1],
            pi_dims: vec![2, 30, 30, 1],
            r1: vec![[-2.5, 2.5], [-2.5, 2.5]],
            sim: SimParams {
                r_conv: 0.1,
                ..SimParams::default()
            },
            ..base
        },
        SystemKind::InvertedPendulum => TrainConfig {
            alpha: 0.2,
            w_dims: vec![2, 20, 20, 1],
            pi_dims: vec![2, 5, 5, 1],
            r1: vec![[-6.0, 6.0], [-6.0, 6.0]],
            sim: SimParams {
                r_conv: 0.25,
                ..SimParams::default()
            },
            ..base
        },
        SystemKind::BicycleTracking => TrainConfig {
            alpha: 1.5,
            w_dims: vec![2, 20, 20, 1],
            pi_dims: vec![2, 10, 10, 1],
            r1: vec![[-0.8, 0.8], [-0.8, 0.8]],
            sim: SimParams {
                r_conv: 0.05,
                ..SimParams::default()
            },
            ..base
        },
    }
}

/// Verification defaults. The ε-ball must cover the small neighborhood
/// where the learned policy's closed loop settles (its radius scales with
/// the state range), so ε is proportionally larger for wide regions.
pub fn verify_params(kind: SystemKind) -> VerifyParams {
    let epsilon = match kind {
        SystemKind::DoubleIntegrator | SystemKind::VanDerPol => 0.25,
        SystemKind::InvertedPendulum => 0.7,
        SystemKind::BicycleTracking => 0.15,
    };
    VerifyParams {
        epsilon,
        ..VerifyParams::default()
    }
}

/// Published certified levels per system, kept as informational
/// regression references for trained models.
pub fn reference_level(kind: SystemKind) -> f64 {
    match kind {
        SystemKind::DoubleIntegrator => 0.7,
        SystemKind::VanDerPol => 0.5,
        SystemKind::InvertedPendulum => 0.7,
        SystemKind::BicycleTracking => 0.4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_validate_and_match_state_dims() {
        for kind in SystemKind::ALL {
            let cfg = train_config(kind);
            cfg.validate().unwrap();
            assert_eq!(cfg.w_dims[0], 2);
            assert_eq!(cfg.pi_dims[0], 2);
            assert_eq!(*cfg.w_dims.last().unwrap(), 1);
            assert_eq!(cfg.trajectories_per_iter, 8);
            assert_eq!(cfg.batch_size, 64);
            assert_eq!(cfg.lambda_zero, 5.0);
            assert_eq!(cfg.lambda_actor, 0.5);
            assert_eq!(cfg.lambda_barrier, 5.0);
            assert!(verify_params(kind).epsilon > 0.0);
            let c = reference_level(kind);
            assert!(c > 0.0 && c < 1.0);
        }
    }
}
