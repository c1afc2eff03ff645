// scratch per-system pipeline experiment (removed before finalizing)
use std::time::Instant;
use zubov_core::dynamics::{DynamicsModel, SystemKind};
use zubov_core::lqr::{lqr_baseline, LqrCertifyParams};
use zubov_core::train::{train, TrainConfig};
use zubov_core::verify::{doa_area, find_max_level, NeuralCertSystem, VerifyParams};

fn main() {
    let name = std::env::args().nth(1).unwrap();
    let seed: u64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(1);
    let iters: usize = std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(3000);
    let eps: f64 = std::env::args().nth(4).map(|s| s.parse().unwrap()).unwrap_or(0.25);

    let (kind, alpha, w_dims, pi_dims, r1) = match name.as_str() {
        "di" => (SystemKind::DoubleIntegrator, 0.05, vec![2,20,20,1], vec![2,10,10,1], [2.5, 2.5]),
        "vdp" => (SystemKind::VanDerPol, 0.1, vec![2,30,30,1], vec![2,30,30,1], [2.5, 2.5]),
        "pend" => (SystemKind::InvertedPendulum, 0.2, vec![2,20,20,1], vec![2,5,5,1], [6.0, 6.0]),
        "bike" => (SystemKind::BicycleTracking, 1.5, vec![2,20,20,1], vec![2,10,10,1], [0.8, 0.8]),
        _ => panic!("unknown system"),
    };
    let model = DynamicsModel::with_defaults(kind);
    let r_conv: f64 = std::env::args().nth(5).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let mut cfg = TrainConfig {
        seed, iterations: iters, alpha, w_dims, pi_dims,
        r1: vec![[-r1[0], r1[0]], [-r1[1], r1[1]]],
        ..TrainConfig::default()
    };
    cfg.sim.r_conv = r_conv;

    let t0 = Instant::now();
    let result = train(&cfg, &model, |_, _, _| {}).unwrap();
    let tail = &result.history[result.history.len() - 20..];
    let mean = |f: fn(&zubov_core::train::HistoryRow) -> f64| tail.iter().map(f).sum::<f64>() / 20.0;
    println!("train {:.0}s; tail: z {:.4} r {:.4} p {:.4} a {:.4} b {:.4}", t0.elapsed().as_secs_f64(),
        mean(|r| r.l_z), mean(|r| r.l_r), mean(|r| r.l_p), mean(|r| r.l_actor), mean(|r| r.l_b));

    let r2 = cfg.r2_region();
    let sys = NeuralCertSystem::new(&result.w, &result.policy, &model);
    let params = VerifyParams { epsilon: eps, ..VerifyParams::default() };
    for c in [0.05, 0.1, 0.2, 0.4] {
        let res = zubov_core::verify::certify_conditions(&sys, &r2, c, &params);
        match &res.status {
            zubov_core::verify::CertStatus::Falsified { counterexample } => {
                let cx = &counterexample.x;
                println!("  certify c={c}: falsified cond {} at [{:.3}, {:.3}] (r={:.3}) margin {:.2e}",
                    counterexample.condition, cx[0], cx[1], (cx[0]*cx[0]+cx[1]*cx[1]).sqrt(), counterexample.margin);
            }
            other => println!("  certify c={c}: {:?} boxes {}", std::mem::discriminant(other), res.boxes_processed),
        }
    }
    let t1 = Instant::now();
    let (c_star, res) = find_max_level(&sys, &r2, &params, 0.01);
    println!("c* = {c_star:.4} verified={} in {:.0}s boxes {}", res.is_verified(), t1.elapsed().as_secs_f64(), res.boxes_processed);
    let w_eval = result.w.lift(|v| v);
    let area = doa_area(|x| w_eval.forward(x)[0], c_star, &r2, 200_000, 7);
    let t2 = Instant::now();
    let lqr = lqr_baseline(&model, &r2, 1e-3, &LqrCertifyParams { epsilon: eps, ..LqrCertifyParams::default() }).unwrap();
    println!("lqr c={:.4} area={:.4} ({:.0}s); ours area={:.4}; ratio {:.2}",
        lqr.c_lqr, lqr.ellipse_area, t2.elapsed().as_secs_f64(), area.area, area.area / lqr.ellipse_area);
}
