//! Scratch calibration runs for picking solver boxes, step sizes, and
//! horizons. Not part of the test suite.

use hheat_core::grid::GridSpec;
use hheat_core::solver::{solve, InitialData, InitialProfile, SolveConfig, SolveStatus};

fn run(label: &str, p: f64, gamma: f64, amp: f64, spec: GridSpec, dt: f64, t_end: f64) {
    let mut cfg = SolveConfig::new(
        1,
        p,
        gamma,
        spec,
        InitialData::Profile {
            profile: InitialProfile::KoranyiGaussian,
            amplitude: amp,
        },
    );
    cfg.time_step = dt;
    cfg.t_end = t_end;
    let start = std::time::Instant::now();
    match solve(cfg) {
        Ok(res) => {
            let last_sup = res.sup_norms.last().unwrap();
            println!(
                "{label}: status={:?} final_sup={:.3e} steps={} window={:.3} worst_resid={:.3e} min={:.3e} elapsed={:.1?}",
                res.status,
                last_sup,
                res.times.len() - 1,
                res.window_guaranteed,
                res.monitors.worst_moment_residual,
                res.monitors.min_value_seen,
                start.elapsed()
            );
            if let SolveStatus::BlowupDetected { t_est } = res.status {
                println!("    t_est = {t_est:.4}");
            }
        }
        Err(e) => println!("{label}: error {e}"),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("all");

    if which == "all" || which == "gz" {
        // gamma = 0, p = 2, unit amplitude on boxes of growing size
        for (l, m) in [(3.0, 17), (4.0, 17), (4.0, 25)] {
            let spec = GridSpec::new(1, l, l * l, m, m).unwrap();
            run(&format!("gz L={l} m={m}"), 2.0, 0.0, 1.0, spec, 0.05, 20.0);
        }
    }
    if which == "all" || which == "p15" {
        // p = 1.5, gamma = 0.5 blow-up scenarios
        for amp in [1.0, 2.0] {
            let spec = GridSpec::new(1, 3.0, 9.0, 17, 21).unwrap();
            run(&format!("p15 amp={amp}"), 1.5, 0.5, amp, spec, 0.05, 20.0);
        }
        let spec = GridSpec::new(1, 4.0, 16.0, 25, 25).unwrap();
        run("p15 amp=1 box4", 1.5, 0.5, 1.0, spec, 0.05, 20.0);
    }
    if which == "all" || which == "p3" {
        let spec = GridSpec::new(1, 4.0, 16.0, 25, 25).unwrap();
        run("p3 amp=0.01", 3.0, 0.5, 0.01, spec, 0.05, 10.0);
    }
    if which == "slopes" {
        use hheat_core::grid::GridField;
        use hheat_core::semigroup::{lp_lq_decay_fit, SemigroupBackend};
        use hheat_core::bump::smooth_transition;
        use hheat_core::point::koranyi_norm;
        use hheat_core::GroupPoint;
        let spec = GridSpec::new(1, 10.0, 70.0, 21, 141).unwrap();
        let f = GridField::from_fn(spec, |c| {
            let pt = GroupPoint::new(vec![c[0]], vec![c[1]], c[2]).unwrap();
            let nrm = koranyi_norm(&pt);
            smooth_transition(nrm * nrm / 0.16)
        });
        let sup_times = [1.0, 2.0, 4.0, 7.0, 10.0];
        let times = [0.5, 1.0, 2.0, 3.5, 5.0];
        for (p_exp, q_exp) in [(1.0, f64::INFINITY), (1.0, 1.0), (1.0, 2.0)] {
            let tt: &[f64] = if q_exp.is_infinite() { &sup_times } else { &times };
            let fit = lp_lq_decay_fit(&f, p_exp, q_exp, tt, SemigroupBackend::KernelConvolution).unwrap();
            println!("p={p_exp} q={q_exp}: fitted={:.4} theory={:.4}", fit.fitted_slope, fit.theoretical_slope);
            for (t, n) in &fit.norms {
                println!("   t={t:.2} norm={n:.6e}  t^2*norm={:.6e}", n * t * t);
            }
        }
    }
    if which == "gzlong" {
        let spec = GridSpec::new(1, 4.0, 16.0, 25, 25).unwrap();
        let mut cfg = SolveConfig::new(
            1,
            2.0,
            0.0,
            spec,
            InitialData::Profile {
                profile: InitialProfile::KoranyiGaussian,
                amplitude: 1.0,
            },
        );
        cfg.time_step = 0.1;
        cfg.t_end = 150.0;
        let res = solve(cfg).unwrap();
        println!("gzlong: status={:?}", res.status);
        for (i, t) in res.times.iter().enumerate() {
            if i % 50 == 0 || i + 3 > res.times.len() {
                println!("  t={t:.1} sup={:.4e} moment={:.4e}", res.sup_norms[i], res.moment[i]);
            }
        }
    }
    if which == "eps" {
        // lifespan ladder feel: p = 1.4, gamma = 0.5
        let spec = GridSpec::new(1, 4.0, 16.0, 25, 25).unwrap();
        for k in 0..7 {
            let eps = 0.5f64.powi(k);
            run(&format!("eps={eps}"), 1.4, 0.5, eps, spec, 0.1, 120.0);
        }
    }
}
// quick trend probe appended during calibration; remove before shipping
