//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line each, and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use darkport::estimation::{run_experiment, ExperimentConfig};
use darkport::fisher::{self, ApproxFisherModel, FisherCurve, FisherModes};
use darkport::fock::{self, DEFAULT_TAIL_TOL};
use darkport::gaussian::{dark_port_fidelity, phase_to_displacement, InterferometerConfig};
use darkport::loss::{self, LossChannel};
use darkport::semiclassics;
use darkport::truncated;
use darkport::SqueezedVacuumSpec;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn spec(r: f64) -> SqueezedVacuumSpec {
    SqueezedVacuumSpec::new(r).unwrap()
}

fn ch(e: f64) -> LossChannel {
    LossChannel::new(e).unwrap()
}

fn c1_cfi_saturation() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.21, 0.5, 0.8, 1.0] {
        let s = spec(r);
        for x in [0.0, 0.5, s.chi_c(), 2.0 * s.chi_c()] {
            let c = fisher::exact_cfi(x, &s, &ch(0.0)).unwrap();
            worst = worst.max((c / (4.0 * (2.0 * r).exp()) - 1.0).abs());
        }
    }
    (worst <= 1e-6, format!("max relative deviation {worst:.2e} (tol 1e-6)"))
}

fn c2_critical_displacements() -> Outcome {
    let cases = [(0.8, 3.74), (0.5, 1.37), (0.21, 0.38)];
    let got: Vec<f64> = cases.iter().map(|(r, _)| spec(*r).chi_c()).collect();
    let ok = cases.iter().zip(&got).all(|((_, want), g)| (g - want).abs() <= 0.01);
    (ok, format!("chi_c = {:.4}, {:.4}, {:.4}", got[0], got[1], got[2]))
}

fn c3_zero_points() -> Outcome {
    let cases = [(1.0, 4, 1.16), (1.0, 6, 1.65), (0.8, 4, 1.14), (0.8, 6, 1.62)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, n, want) in cases {
        let x = fock::zeros(n, &spec(r)).positive[0].x;
        ok &= (x - want).abs() <= 0.01;
        detail.push(format!("x_{{{n},1}}(r={r}) = {x:.4}"));
    }
    (ok, detail.join(", "))
}

fn c4_sigmoid() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut half = f64::NAN;
    for r in [0.5, 0.8, 1.0] {
        let s = spec(r);
        let chi = s.chi_c();
        for x in fisher::linspace(0.01, 4.0 * chi, 50) {
            let got = fisher::avg_photon_sensitivity(x, &s, &ch(0.0)).unwrap() / s.qfi();
            worst = worst.max((got - x * x / (x * x + chi * chi)).abs());
        }
        if r == 0.8 {
            half = fisher::avg_photon_sensitivity(chi, &s, &ch(0.0)).unwrap() / s.qfi();
        }
    }
    let ok = worst <= 1e-8 && (half - 0.5).abs() <= 1e-8;
    (ok, format!("max deviation {worst:.2e}, I_avg(chi_c)/H_F = {half:.10} (r=0.8)"))
}

fn c5_geometry() -> Outcome {
    // both constants are large-squeezing limits
    let s = spec(4.0);
    let ratio = semiclassics::y_of_minimum(1, s.chi_c(), &s).unwrap() / s.delta_y0();
    let offset = semiclassics::first_minimum_offset_large_r(&s).unwrap();
    let ok = (ratio - 2.154).abs() <= 1e-3 && (offset - 2.07).abs() <= 1e-2;
    (ok, format!("r=4: y_min/DeltaY = {ratio:.5}, (n_min - nbar)/Dn = {offset:.4}"))
}

fn c6_mass_fractions() -> Outcome {
    let s = spec(1.0);
    let at = |x: f64| {
        let d = fock::distribution(x, &s, DEFAULT_TAIL_TOL).unwrap();
        semiclassics::mass_below_first_minimum(&d, x, &s).unwrap()
    };
    let x_dy = semiclassics::chi_delta_y(&s).unwrap();
    let low = at(x_dy);
    let high = at(s.chi_c());
    let ok_low = (low - 0.68).abs() <= 0.05;
    let ok_high = (high - 0.95).abs() <= 0.02;
    (
        ok_low && ok_high,
        format!(
            "exact mass below n_min: {low:.4} at chi_DeltaY ({}), {high:.4} at chi_c ({})",
            if ok_low { "ok" } else { "out of 0.68+-0.05" },
            if ok_high { "ok" } else { "out of 0.95+-0.02" }
        ),
    )
}

fn c7_loss_equivalence() -> Outcome {
    let dim = 260;
    let mut worst_tv: f64 = 0.0;
    let mut worst_td: f64 = 0.0;
    for r in [0.8, 1.0] {
        let s = spec(r);
        for x in [0.5, 1.5, 3.0] {
            for e in [0.002, 0.05] {
                let c = ch(e);
                let rho = truncated::density_operator_oracle(x, &s, &c, dim).unwrap();
                let diag: Vec<f64> = (0..dim).map(|n| rho[(n, n)]).collect();
                let p = loss::lossy_distribution(x, &s, &c, DEFAULT_TAIL_TOL).unwrap();
                worst_tv = worst_tv.max(loss::total_variation(&p.probs, &diag));
                let after = truncated::displaced_after_loss_oracle(x, &s, &c, dim).unwrap();
                worst_td = worst_td.max(truncated::trace_distance(&rho, &after));
            }
        }
    }
    (
        worst_tv <= 1e-10 && worst_td <= 1e-9,
        format!("max TV vs Kraus oracle {worst_tv:.2e} (tol 1e-10), max trace distance of displace-after-loss {worst_td:.2e} (tol 1e-9)"),
    )
}

fn c8_beta_universality() -> Outcome {
    let s = spec(1.0);
    let c = ch(1e-3);
    let beta = c.beta(&s);
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (n, k) in [(2, 1), (4, 1), (6, 1), (4, 2)] {
        let fit = fisher::fit_dip_sharpness(n, k, &s, &c).unwrap();
        worst = worst.max((fit / beta - 1.0).abs());
        detail.push(format!("({n},{k}) {:.3}", fit / beta));
    }
    (worst <= 0.15, format!("fit/beta: {} (tol 15%)", detail.join(", ")))
}

fn c9_approx_fidelity() -> Outcome {
    let s = spec(1.0);
    let c = ch(0.002);
    let xs = fisher::linspace(0.2, 4.0, 1901);
    let curve = FisherCurve::compute(&s, &c, &xs, FisherModes { exact: true, approx: true, avg: false }).unwrap();
    let dips: Vec<f64> = curve.dips.iter().map(|d| d.x_dip).collect();
    let exact = curve.cfi_exact.as_ref().unwrap();
    let approx = curve.ifisher_approx.as_ref().unwrap();
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        if dips.iter().any(|d| (x - d).abs() < 0.01) {
            continue;
        }
        let dev = (approx[i] / exact[i] - 1.0).abs();
        if dev > worst {
            worst = dev;
            at = x;
        }
    }

    let asym = (1.0 - c.epsilon()) * fisher::quantum_fisher(&s, &c);
    let lo = 3.0 * s.chi_c();
    let far = fisher::linspace(lo, lo + 1.0, 4001);
    let model = ApproxFisherModel::new(&s, &c, fock::resolve_cutoff(c.x_eff(lo + 1.0), &c.effective_spec(&s), DEFAULT_TAIL_TOL).unwrap());
    let vals: Vec<f64> = far.iter().map(|&x| model.eval(x).unwrap()).collect();
    let peaks: Vec<f64> = (1..vals.len() - 1)
        .filter(|&i| vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1])
        .map(|i| vals[i] / asym)
        .collect();
    let peak_worst = peaks.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    let exact_far: Vec<f64> = [lo, lo + 0.5, lo + 1.0]
        .iter()
        .map(|&x| fisher::exact_cfi(x, &s, &c).unwrap() / asym)
        .collect();
    (
        worst <= 0.03 && !peaks.is_empty() && peak_worst <= 0.02,
        format!(
            "max |approx/exact - 1| = {worst:.4} at x = {at:.3} away from {} dips (tol 0.03); {} approx maxima in [3chi_c, 3chi_c+1] within {peak_worst:.4} of (1-eps)H_F (tol 0.02); exact CFI / (1-eps)H_F at 3chi_c + (0, 0.5, 1) = {:.4}, {:.4}, {:.4}",
            dips.len(),
            peaks.len(),
            exact_far[0],
            exact_far[1],
            exact_far[2]
        ),
    )
}

fn c10_ordering() -> Outcome {
    let xs = fisher::linspace(0.0, 4.0, 201);
    let mut bad = Vec::new();
    for (r, e) in [(1.0, 0.0), (1.0, 0.002), (1.0, 0.05), (0.5, 0.002), (0.5, 0.05), (0.8, 0.01), (0.21, 0.002)] {
        let curve = FisherCurve::compute(&spec(r), &ch(e), &xs, FisherModes::ALL).unwrap();
        for v in curve.violations() {
            bad.push(format!("{v} at r={r} eps={e}"));
        }
        if e > 0.0 && curve.cfi_exact.as_ref().unwrap()[0] > 1e-6 {
            bad.push(format!("CFI(x=0) = {} at r={r} eps={e}", curve.cfi_exact.unwrap()[0]));
        }
    }
    let s = spec(1.0);
    let c = ch(0.002);
    let dips = fisher::dip_annotations(&s, &c, 8);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    for d in dips.iter().filter(|d| d.x_dip > 0.0) {
        let x = fisher::locate_dip(d.n, d.k, &s, &c).unwrap();
        let per = fisher::exact_outcome_fisher(x, &s, &c).unwrap();
        worst_ratio = worst_ratio.max(per[d.n] / d.depth);
        worst_shift = worst_shift.max((x - d.x_dip).abs());
    }
    if worst_ratio > 1e-12 {
        bad.push(format!("I_n/depth at located dip = {worst_ratio:.2e}"));
    }
    (
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "7 curves ordered; I_n at located dips <= {worst_ratio:.1e} of depth (n <= 8, max offset from predicted dip {worst_shift:.1e})"
            )
        } else {
            bad.join("; ")
        },
    )
}

fn c11_monte_carlo() -> Outcome {
    let s = spec(1.0);
    let c = ch(0.002);
    let eff = c.effective_spec(&s);
    let scale = c.x_eff_scale();
    let x5 = fock::zeros(5, &eff).positive[0].x / scale;
    let x6 = fock::zeros(6, &eff).positive[0].x / scale;
    let x4 = fock::zeros(4, &eff).positive[0].x / scale;
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, n, trials) in [("full", 2000, 200), ("reduced", 500, 50)] {
        for (where_, x) in [("mid", 0.5 * (x5 + x6)), ("dip", x4)] {
            let mut cfg = ExperimentConfig::new(1.0, 0.002, x);
            cfg.n_samples = n;
            cfg.n_trials = trials;
            cfg.seed = 0;
            let rep = run_experiment(&cfg).unwrap();
            let z = rep.z_score();
            ok &= z <= 3.0;
            detail.push(format!(
                "{label} {where_} x={x:.4}: {:.2} +- {:.2} vs CFI {:.2} (z={z:.2})",
                rep.sensitivity, rep.standard_error, rep.predicted_cfi
            ));
        }
    }
    (ok, detail.join("; "))
}

fn c12_dark_port() -> Outcome {
    let fid = |alpha: f64, phi: f64| {
        let cfg = InterferometerConfig::new(alpha, phi, 1.0).unwrap();
        dark_port_fidelity(&cfg.output_state(), &cfg.spec(), phase_to_displacement(&cfg)).unwrap()
    };
    let base = fid(100.0, 0.02);
    let phis = fisher::linspace(0.02, 0.5, 25);
    let series: Vec<f64> = phis.iter().map(|&p| fid(2.0 / p, p)).collect();
    let monotone = series.windows(2).all(|w| w[1] < w[0]);
    (
        base >= 0.999 && monotone,
        format!(
            "F(alpha=100, phi=0.02) = {base:.6}; at alpha*phi = 2, F falls monotonically to {:.4} at phi = 0.5: {monotone}",
            series[series.len() - 1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("1 CFI saturation", c1_cfi_saturation),
        ("2 critical displacements", c2_critical_displacements),
        ("3 zero points", c3_zero_points),
        ("4 sigmoid law", c4_sigmoid),
        ("5 geometry constants", c5_geometry),
        ("6 mass fractions", c6_mass_fractions),
        ("7 loss-channel equivalence", c7_loss_equivalence),
        ("8 beta universality", c8_beta_universality),
        ("9 approximate I_F fidelity", c9_approx_fidelity),
        ("10 ordering invariants", c10_ordering),
        ("11 Monte Carlo", c11_monte_carlo),
        ("12 dark-port approximation", c12_dark_port),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = run();
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
