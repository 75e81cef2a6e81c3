//! Acceptance gate: eleven end-to-end criteria, one per test, each printing
//! a single pass/fail line. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines for passing criteria too).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctqw_search::experiments::{
    fit_loglog, grouped_spectrum_for, hitting_bracket, hitting_time_exact, rook_size_sweep,
    run_instance, trotter_error_audit, InstanceOptions,
};
use ctqw_search::graph::{build_graph, normalize, GraphSpec};
use ctqw_search::predictor::{predict_critical, PredictorConfig};
use ctqw_search::rank_one::{dense_oracle, first_peak, solve_search_spectrum};
use ctqw_search::spectra::{
    decompose, rotated_overlap, s_params_with_epsilon, DPolicy, GroupedSpectrum,
    InitialStatePolicy, SParams, GROUP_TOL,
};

fn verdict(criterion: usize, what: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:2} ({what}): {status}");
    assert!(pass, "criterion {criterion} ({what}) failed: {detail}");
}

/// Deterministic mixed bag of dense-sized connected instances, avoiding
/// bipartite families (their eigenvalue -1 carries marked-node weight, which
/// breaks the spectral-ratio bracket checked in criterion 3).
fn dense_instance_set(count: usize, seed: u64) -> Vec<(GraphSpec, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let spec = match i % 6 {
            0 => GraphSpec::Complete {
                n: rng.gen_range(24..=256),
            },
            1 => GraphSpec::Rook {
                n1: 1 << rng.gen_range(1..=3),
                n2: 1 << rng.gen_range(3..=5),
            },
            2 => GraphSpec::Hypercube {
                dim: rng.gen_range(4..=8),
            },
            3 => GraphSpec::ErdosRenyi {
                n: rng.gen_range(32..=192),
                p: rng.gen_range(0.3..0.8),
                seed: rng.gen(),
            },
            4 => GraphSpec::JoinedComplete {
                n: 2 * rng.gen_range(16..=96),
            },
            _ => GraphSpec::BridgedComplete {
                n: 2 * rng.gen_range(16..=96),
            },
        };
        let marked = rng.gen_range(0..spec.node_count());
        out.push((spec, marked));
    }
    out
}

fn dense_spectrum(spec: &GraphSpec, marked: usize) -> GroupedSpectrum {
    let adj = build_graph(spec).unwrap();
    let h = normalize(&adj, spec.default_normalization()).unwrap();
    decompose(&h, marked, GROUP_TOL).unwrap()
}

fn params_for(gs: &GroupedSpectrum, d: usize) -> SParams {
    let (epsilon, _) = rotated_overlap(gs, d, InitialStatePolicy::TopEigenvector).unwrap();
    s_params_with_epsilon(gs, d, epsilon).unwrap()
}

#[test]
fn criterion_01_closed_form_matches_dense_dynamics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut max_err: f64 = 0.0;
    let mut worst = String::new();
    for (spec, marked) in dense_instance_set(50, 1) {
        let adj = build_graph(&spec).unwrap();
        let h = normalize(&adj, spec.default_normalization()).unwrap();
        let gs = decompose(&h, marked, GROUP_TOL).unwrap();
        let sp = params_for(&gs, 1);
        // 4 couplings around critical x 5 times out to a few beat periods
        for _ in 0..4 {
            let r = sp.s1 * rng.gen_range(0.4..2.5);
            let ss = solve_search_spectrum(&gs, r).unwrap();
            let t_scale = std::f64::consts::PI
                / ss.roots
                    .iter()
                    .map(|root| root.energy_minus_r.abs())
                    .fold(f64::INFINITY, f64::min);
            let times: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..3.0) * t_scale).collect();
            let dense = dense_oracle(&h, marked, r, &times, None).unwrap();
            for (t, a) in times.iter().zip(&dense.amplitudes) {
                let err = (ss.abs_amplitude(sp.epsilon, *t) - a.norm()).abs();
                if err > max_err {
                    max_err = err;
                    worst = format!("{spec:?} marked {marked} r {r} t {t}");
                }
            }
        }
    }
    verdict(
        1,
        "closed-form amplitude matches dense diagonalization to 1e-8",
        max_err <= 1e-8,
        format!("max |closed - dense| = {max_err:.3e} at {worst}"),
    );
}

#[test]
fn criterion_02_secular_roots_are_certified() {
    // dense mixed bag plus closed-form instances far beyond the dense cap
    let mut cases: Vec<(GroupedSpectrum, f64)> = Vec::new();
    for (spec, marked) in dense_instance_set(12, 2) {
        let gs = dense_spectrum(&spec, marked);
        let s1 = params_for(&gs, 1).s1;
        cases.push((gs, s1));
    }
    for spec in [
        GraphSpec::Complete { n: 1 << 14 },
        GraphSpec::Rook {
            n1: 64,
            n2: 1 << 12,
        },
        GraphSpec::BridgedComplete { n: 1 << 16 },
    ] {
        let gs = grouped_spectrum_for(&spec, 0, None, GROUP_TOL).unwrap();
        let s1 = params_for(&gs, 1).s1;
        cases.push((gs, s1));
    }
    let mut detail = String::new();
    let mut pass = true;
    for (gs, s1) in &cases {
        for factor in [0.3, 1.0, 3.7] {
            if let Err(e) = solve_search_spectrum(gs, factor * s1)
                .and_then(|ss| ss.check_integrity().map(|_| ss))
            {
                pass = false;
                detail = format!("r = {factor} s1: {e}");
            }
        }
    }
    verdict(
        2,
        "secular residual 1e-10, interlacing, residue sum rule 1e-9",
        pass,
        detail,
    );
}

#[test]
fn criterion_03_spectral_ratio_bracket() {
    let mut pass = true;
    let mut detail = String::new();
    for (spec, marked) in dense_instance_set(30, 3) {
        let gs = dense_spectrum(&spec, marked);
        let sp = params_for(&gs, 1);
        let ratio = sp.s1 / sp.s2.sqrt();
        let lower = (sp.gap.min(1.0) * (1.0 - sp.epsilon)).sqrt();
        if !(lower <= ratio + 1e-12 && ratio <= 1.0 + 1e-12) {
            pass = false;
            detail = format!("{spec:?}: lower {lower} ratio {ratio}");
        }
    }
    // complete graphs saturate the lower end exactly
    let mut max_slack: f64 = 0.0;
    for n in [8usize, 64, 1024, 1 << 14] {
        let gs = grouped_spectrum_for(&GraphSpec::Complete { n }, 0, None, GROUP_TOL).unwrap();
        let sp = params_for(&gs, 1);
        let slack = (sp.s1 / sp.s2.sqrt() - (sp.gap.min(1.0) * (1.0 - sp.epsilon)).sqrt()).abs();
        max_slack = max_slack.max(slack);
    }
    verdict(
        3,
        "sqrt(gap(1-eps)) <= S1/sqrt(S2) <= 1, saturated by complete graphs",
        pass && max_slack <= 1e-12,
        format!("{detail}; complete-graph slack {max_slack:.3e}"),
    );
}

#[test]
fn criterion_04_complete_graph_peak_scaling() {
    let mut pass = true;
    let mut detail = String::new();
    for k in [8u32, 10, 12, 14] {
        let n = 1usize << k;
        let gs = grouped_spectrum_for(&GraphSpec::Complete { n }, 0, None, GROUP_TOL).unwrap();
        let sp = params_for(&gs, 1);
        let pred = predict_critical(&sp, &PredictorConfig::default());
        let ss = solve_search_spectrum(&gs, pred.r_star).unwrap();
        let (t_peak, a_peak) = first_peak(&ss, sp.epsilon).unwrap();
        let a_ref = (1.0 - 1.0 / n as f64).sqrt();
        let amp_err = (a_peak - a_ref).abs() / a_ref;
        let time_err = (t_peak - pred.t_pred).abs() / pred.t_pred;
        if amp_err > 0.10 || time_err > 0.10 {
            pass = false;
            detail = format!("n = {n}: amp_err {amp_err:.3}, time_err {time_err:.3}");
        }
    }
    verdict(
        4,
        "complete-graph peaks within 10% of sqrt(1-1/n) at pi/(2 delta0)",
        pass,
        detail,
    );
}

#[test]
fn criterion_05_robust_window_on_complete_graph() {
    let gs = grouped_spectrum_for(&GraphSpec::Complete { n: 4096 }, 0, None, GROUP_TOL).unwrap();
    let sp = params_for(&gs, 1);
    let pred = predict_critical(&sp, &PredictorConfig::default());
    let xi = 0.05 * (sp.epsilon * sp.s2).sqrt() / sp.s1;
    let mut pass = true;
    let mut detail = String::new();
    for r in [sp.s1 * (1.0 - xi), sp.s1 * (1.0 + xi)] {
        let ss = solve_search_spectrum(&gs, r).unwrap();
        let (t_peak, a_peak) = first_peak(&ss, sp.epsilon).unwrap();
        let amp_err = (a_peak - pred.nu_pred).abs() / pred.nu_pred;
        let time_err = (t_peak - pred.t_pred).abs() / pred.t_pred;
        if amp_err > 0.25 || time_err > 0.25 {
            pass = false;
            detail = format!("r = {r}: amp_err {amp_err:.3}, time_err {time_err:.3}");
        }
    }
    verdict(
        5,
        "peaks persist within 25% across the detuning window",
        pass,
        detail,
    );
}

#[test]
fn criterion_06_off_critical_bounds_hold() {
    // run_instance audits r in {s1/4, s1/2, 2 s1, 4 s1} against the rigorous
    // off-critical amplitude bound over a 20 pi / delta0 horizon
    let mut pass = true;
    let mut detail = String::new();
    for spec in [
        GraphSpec::Complete { n: 4096 },
        GraphSpec::Rook { n1: 16, n2: 256 },
    ] {
        let rec = run_instance(
            &spec,
            0,
            &InstanceOptions {
                d_policy: DPolicy::Explicit(1),
                ..InstanceOptions::default()
            },
            &PredictorConfig::default(),
        )
        .unwrap();
        if rec.bound_checks.len() != 4 || rec.bound_checks.iter().any(|c| !c.pass) {
            pass = false;
            detail = format!("{spec:?}: {:?}", rec.bound_checks);
        }
    }
    verdict(
        6,
        "no amplitude exceeds its off-critical bound",
        pass,
        detail,
    );
}

#[test]
fn criterion_07_rook_scaling_exponents() {
    let sizes: Vec<u32> = (10..=18).collect();
    let fit = |points: &[ctqw_search::experiments::RookSweepPoint], f: &dyn Fn(&_) -> f64| {
        let ns: Vec<usize> = points.iter().map(|p| p.n).collect();
        let vals: Vec<f64> = points.iter().map(f).collect();
        fit_loglog(&ns, &vals).unwrap().slope
    };
    let mut pass = true;
    let mut detail = String::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if (got - want).abs() > 0.05 {
            pass = false;
            detail.push_str(&format!("{name}: slope {got:.3} vs {want}; "));
        }
    };

    let wide = rook_size_sweep(0.4, &sizes, false).unwrap();
    check("sigma 0.4 time", fit(&wide, &|p| p.peak_time), 0.50);
    check("sigma 0.4 amplitude", fit(&wide, &|p| p.peak_abs), 0.0);

    let narrow = rook_size_sweep(0.28, &sizes, false).unwrap();
    check("sigma 0.28 time", fit(&narrow, &|p| p.peak_time), 0.58);
    check("sigma 0.28 amplitude", fit(&narrow, &|p| p.peak_abs), -0.08);

    let column = rook_size_sweep(0.0, &sizes, true).unwrap();
    check("column-subspace time", fit(&column, &|p| p.peak_time), 0.50);
    check(
        "column-subspace amplitude",
        fit(&column, &|p| p.peak_abs),
        0.0,
    );

    verdict(7, "rook size-scaling exponents match theory", pass, detail);
}

#[test]
fn criterion_08_quasi_degenerate_prediction_vs_dense() {
    let mut pass = true;
    let mut detail = String::new();
    for k in [8u32, 9, 10, 11] {
        let n = 1usize << k;
        let spec = GraphSpec::JoinedComplete { n };
        let adj = build_graph(&spec).unwrap();
        let h = normalize(&adj, spec.default_normalization()).unwrap();
        let gs = decompose(&h, 0, GROUP_TOL).unwrap();
        let sp = params_for(&gs, 2);
        let pred = predict_critical(&sp, &PredictorConfig::default());
        let times: Vec<f64> = (0..=800)
            .map(|i| 2.0 * pred.t_pred * i as f64 / 800.0)
            .collect();
        let curve = dense_oracle(&h, 0, pred.r_star, &times, None).unwrap();
        let amp_err = (curve.peak_abs - pred.nu_pred).abs() / pred.nu_pred;
        let time_err = (curve.peak_time - pred.t_pred).abs() / pred.t_pred;
        if amp_err > 0.25 || time_err > 0.25 {
            pass = false;
            detail = format!("n = {n}: amp_err {amp_err:.3}, time_err {time_err:.3}");
        }
    }
    verdict(
        8,
        "two-level predictions match dense dynamics on joined cliques",
        pass,
        detail,
    );
}

#[test]
fn criterion_09_degenerate_collapse_error_bound() {
    let mut pass = true;
    let mut detail = String::new();
    for spec in [
        GraphSpec::JoinedComplete { n: 1024 },
        GraphSpec::BridgedComplete { n: 1024 },
    ] {
        let gs = grouped_spectrum_for(&spec, 0, None, GROUP_TOL).unwrap();
        let sp = params_for(&gs, 2);
        let pred = predict_critical(&sp, &PredictorConfig::default());
        let audit = trotter_error_audit(&gs, 2, pred.r_star, sp.epsilon, pred.t_pred, 64).unwrap();
        if !audit.pass {
            pass = false;
            detail = format!("{spec:?}: prefactor {:.3}", audit.fitted_prefactor);
        }
    }
    verdict(
        9,
        "collapsing near-degenerate levels errs below 10 r gap_D sqrt(eps_D) t^2",
        pass,
        detail,
    );
}

#[test]
fn criterion_10_hitting_time_bracket_and_scaling() {
    let mut pass = true;
    let mut detail = String::new();
    for (spec, marked) in dense_instance_set(18, 10) {
        let adj = build_graph(&spec).unwrap();
        let exact = hitting_time_exact(&adj, marked).unwrap();
        let (lower, upper) = hitting_bracket(&adj, marked).unwrap();
        if !(lower <= exact && exact <= upper) {
            pass = false;
            detail = format!("{spec:?}: {lower} <= {exact} <= {upper} violated");
        }
    }
    // thin rook columns: hitting time grows linearly in n
    let sizes: Vec<usize> = (8u32..=11).map(|k| 1usize << k).collect();
    let hts: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let adj = build_graph(&GraphSpec::Rook { n1: 2, n2: n / 2 }).unwrap();
            hitting_time_exact(&adj, 0).unwrap()
        })
        .collect();
    let slope = fit_loglog(&sizes, &hts).unwrap().slope;
    if (slope - 1.0).abs() > 0.05 {
        pass = false;
        detail.push_str(&format!("rook hitting-time exponent {slope:.3}"));
    }
    verdict(
        10,
        "classical hitting times sit in [1/eps, 1/(gap eps)] and scale linearly",
        pass,
        detail,
    );
}

#[test]
fn criterion_11_gap_alone_does_not_certify_optimality() {
    // sigma = 0.28 rooks: the scaled gap grows without bound while the
    // success amplitude still decays — the gap is not a sufficient statistic
    let sizes: Vec<u32> = (10..=18).collect();
    let points = rook_size_sweep(0.28, &sizes, false).unwrap();
    let ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    let scaled_gap: Vec<f64> = points.iter().map(|p| p.gap * (p.n as f64).sqrt()).collect();
    let amps: Vec<f64> = points.iter().map(|p| p.peak_abs).collect();
    let gap_slope = fit_loglog(&ns, &scaled_gap).unwrap().slope;
    let amp_slope = fit_loglog(&ns, &amps).unwrap().slope;
    verdict(
        11,
        "scaled gap diverges while the amplitude exponent stays negative",
        gap_slope > 0.0 && amp_slope < -0.03,
        format!("gap*sqrt(n) slope {gap_slope:.3}, amplitude slope {amp_slope:.3}"),
    );
}
