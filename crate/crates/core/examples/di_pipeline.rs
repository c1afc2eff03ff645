// scratch pipeline experiment (removed before finalizing)
use std::time::Instant;
use zubov_core::dynamics::{DynamicsModel, SystemKind};
use zubov_core::lqr::{lqr_baseline, LqrCertifyParams};
use zubov_core::train::{train, TrainConfig};
use zubov_core::verify::{certify_conditions, doa_area, find_max_level, NeuralCertSystem, VerifyParams};

fn main() {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let iters: usize = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(3000);
    let model = DynamicsModel::with_defaults(SystemKind::DoubleIntegrator);
    let r_conv: f64 = std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(0.05);
    let mut cfg = TrainConfig { seed, iterations: iters, ..TrainConfig::default() };
    cfg.sim.r_conv = r_conv;

    let t0 = Instant::now();
    let result = train(&cfg, &model, |_, _, _| {}).unwrap();
    println!("train: {:.1}s", t0.elapsed().as_secs_f64());
    let tail = &result.history[result.history.len() - 20..];
    let mean = |f: fn(&zubov_core::train::HistoryRow) -> f64| tail.iter().map(f).sum::<f64>() / 20.0;
    println!("tail losses: z {:.4} r {:.4} p {:.4} a {:.4} b {:.4}",
        mean(|r| r.l_z), mean(|r| r.l_r), mean(|r| r.l_p), mean(|r| r.l_actor), mean(|r| r.l_b));

    let r2 = cfg.r2_region();
    let sys = NeuralCertSystem::new(&result.w, &result.policy, &model);
    let eps: f64 = std::env::args().nth(4).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let params = VerifyParams { epsilon: eps, ..VerifyParams::default() };
    // halo scan: largest radius with Ẇ ≥ 0 (grid)
    {
        use zubov_core::verify::CertSystem;
        let mut halo: f64 = 0.0;
        for i in 0..600 {
            for j in 0..600 {
                let x = [-2.25 + 4.5 * i as f64 / 599.0, -2.25 + 4.5 * j as f64 / 599.0];
                if sys.lie(&x) >= 0.0 {
                    let w = sys.w(&x);
                    if w < 0.8 {
                        halo = halo.max((x[0] * x[0] + x[1] * x[1]).sqrt());
                    }
                }
            }
        }
        println!("lie>=0 halo radius (where W<0.8): {halo:.3}");
    }

    // probe certify at a couple of fixed levels first
    // closed-loop equilibrium diagnostics
    let pi = result.policy.lift(|v| v);
    println!("u(0) = {:?}", pi.eval(&[0.0, 0.0]));
    // u zero-crossing along the x1 axis, W negative set extent
    let w_eval0 = result.w.lift(|v| v);
    let w0 = w_eval0.forward(&[0.0, 0.0])[0];
    println!("W(0) = {w0:.4}");
    let mut worst_r: f64 = 0.0;
    let mut min_w = f64::INFINITY;
    for i in 0..400 {
        for j in 0..400 {
            let x = [-2.25 + 4.5 * i as f64 / 399.0, -2.25 + 4.5 * j as f64 / 399.0];
            let w = w_eval0.forward(&x)[0];
            if w <= w0 {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                worst_r = worst_r.max(r);
            }
            min_w = min_w.min(w);
        }
    }
    println!("farthest point with W <= W(0): r = {worst_r:.3}; min W = {min_w:.4}");
    // policy equilibrium offset: simulate from a few starts, report final state
    for x0 in [[1.0, 0.0], [-1.0, 0.5], [0.3, -0.3]] {
        let mut field = |x: &[f64]| {
            let u = pi.eval(x);
            vec![x[1], u[0]]
        };
        let mut sp = cfg.sim.clone();
        sp.r_conv = 1e-9; // run the full horizon to find the settle point
        sp.t_max = 40.0;
        let traj = zubov_core::sim::simulate(&mut field, &x0, &sp);
        let xf = traj.states.last().unwrap();
        println!("settle from {:?}: [{:.4}, {:.4}]  ({:?})", x0, xf[0], xf[1], traj.status);
    }
    for c in [0.01, 0.05, 0.1, 0.2, 0.4, 0.6] {
        let t = Instant::now();
        let res = certify_conditions(&sys, &r2, c, &params);
        match &res.status {
            zubov_core::verify::CertStatus::Falsified { counterexample } => {
                let cx = &counterexample.x;
                println!("certify c={c}: falsified cond {} at [{:.4}, {:.4}] (r={:.3}) margin {:.2e} W {:.4} boxes {} {:.1}s",
                    counterexample.condition, cx[0], cx[1],
                    (cx[0]*cx[0]+cx[1]*cx[1]).sqrt(), counterexample.margin,
                    result.w.forward(cx).unwrap()[0],
                    res.boxes_processed, t.elapsed().as_secs_f64());
            }
            other => println!("certify c={c}: {:?} boxes {} depth {} {:.1}s", other, res.boxes_processed, res.max_depth, t.elapsed().as_secs_f64()),
        }
    }

    let t1 = Instant::now();
    let (c_star, res) = find_max_level(&sys, &r2, &params, 0.01);
    println!("find_max_level: c* = {c_star:.4} ({:?}) in {:.1}s, boxes {}",
        res.is_verified(), t1.elapsed().as_secs_f64(), res.boxes_processed);

    let w_eval = result.w.lift(|v| v);
    let area = doa_area(|x| w_eval.forward(x)[0], c_star, &r2, 200_000, 7);
    println!("verified area: {:.4} ± {:.4}", area.area, area.std_error);

    let t2 = Instant::now();
    let lqr = lqr_baseline(&model, &r2, 1e-3, &LqrCertifyParams::default()).unwrap();
    println!("lqr: c={:.4} area={:.4} in {:.1}s", lqr.c_lqr, lqr.ellipse_area, t2.elapsed().as_secs_f64());
    println!("ratio: {:.2}", area.area / lqr.ellipse_area);
}
