//! Data sets behind the figures, one directory of CSV files per figure id.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use darkport::estimation::{EstimationReport, ExperimentConfig};
use darkport::fisher::{self, ApproxFisherModel, FisherCurve, FisherModes};
use darkport::fock::{self, DEFAULT_TAIL_TOL};
use darkport::semiclassics;
use darkport::{LossChannel, SqueezedVacuumSpec};
use rayon::prelude::*;

use crate::commands::{run_simulation, zero_table, zeros_csv, Estimator};
use crate::output::num;

pub const FIGURE_IDS: [&str; 9] = ["fig3", "fig5", "fig6", "fig7a", "fig7b", "fig7c", "fig7d", "fig8a", "fig8b"];

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub seed: u64,
    pub n_samples: usize,
    pub n_trials: usize,
}

pub struct FigureData {
    pub files: Vec<(String, String)>,
    pub gnuplot: String,
    pub violations: Vec<String>,
}

pub fn generate(id: &str, opts: &FigureOptions) -> Result<FigureData> {
    match id {
        "fig3" => fig3(),
        "fig5" => fig5(),
        "fig6" => fig6(),
        "fig7a" => fig7a(),
        "fig7b" => fisher_panel("fig7b", 0.002, Some(opts)),
        "fig7c" => fisher_panel("fig7c", 0.01, None),
        "fig7d" => fisher_panel("fig7d", 0.05, None),
        "fig8a" => fig8("fig8a", 0.5, 4.0),
        "fig8b" => fig8("fig8b", 0.21, 1.5),
        _ => bail!("unknown figure id `{id}`; valid ids: {}", FIGURE_IDS.join(", ")),
    }
}

fn spec(r: f64) -> Result<SqueezedVacuumSpec> {
    Ok(SqueezedVacuumSpec::new(r)?)
}

fn row(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

/// `p_n(x)` for `n <= 10` at `r = 1`, the zero points, and the two
/// distributions at the lowest zeros of `p_4` and `p_6`.
fn fig3() -> Result<FigureData> {
    let s = spec(1.0)?;
    let n_max = 10;
    let mut pn = String::from("x");
    for n in 0..=n_max {
        write!(pn, ",p{n}")?;
    }
    pn.push('\n');
    let xs = fisher::linspace(0.0, 3.0, 301);
    let rows: Vec<String> = xs
        .par_iter()
        .map(|&x| {
            let mut v = vec![x];
            v.extend(fock::amplitudes(x, &s, n_max).probabilities());
            row(&v)
        })
        .collect();
    for r in rows {
        pn.push_str(&r);
        pn.push('\n');
    }

    let x4 = fock::zeros(4, &s).positive[0].x;
    let x6 = fock::zeros(6, &s).positive[0].x;
    let p4 = fock::distribution(x4, &s, DEFAULT_TAIL_TOL)?;
    let p6 = fock::distribution(x6, &s, DEFAULT_TAIL_TOL)?;
    let mut dist = String::from("n,p_at_x41,p_at_x61\n");
    for n in 0..=20 {
        writeln!(dist, "{n},{},{}", num(p4.get(n)), num(p6.get(n)))?;
    }
    let gnuplot = "set datafile separator ','\n\
        set xlabel 'x'\n\
        set ylabel 'p_n + 0.2 (n + 1/2)'\n\
        plot for [n=0:10] 'fig3_pn.csv' using 1:(column(n+2) + 0.2*(n+0.5)) with lines title sprintf('n=%d', n), \\\n  \
        'fig3_zeros.csv' using 3:(0.2*($1+0.5)) with points pt 6 title 'x_{n,k}'\n"
        .to_string();
    Ok(FigureData {
        files: vec![
            ("fig3_pn.csv".into(), pn),
            ("fig3_zeros.csv".into(), zeros_csv(&zero_table(1.0, n_max)?)),
            ("fig3_dist.csv".into(), dist),
        ],
        gnuplot,
        violations: Vec::new(),
    })
}

/// `S/π + 1/4` over `(x/χ_ΔY, y/ΔY)` for large squeezing, plus the first
/// four minimum lines `y_min^(k)`.
fn fig5() -> Result<FigureData> {
    let s = spec(4.0)?;
    let chi_dy = semiclassics::chi_delta_y(&s)?;
    let dy = s.delta_y0();
    let to_chi_c = chi_dy / s.chi_c();
    let a_grid = fisher::linspace(0.1, 20.0, 200);
    let b_grid = fisher::linspace(0.0, 4.0, 201);
    let mut grid = String::from("x_over_chi_dy,x_over_chi_c,y_over_dy,s_over_pi_plus_quarter\n");
    for &a in &a_grid {
        for &b in &b_grid {
            let v = semiclassics::action(b * dy, a * chi_dy, &s)? / std::f64::consts::PI + 0.25;
            grid.push_str(&row(&[a, a * to_chi_c, b, v]));
            grid.push('\n');
        }
    }
    let mut minima = String::from("x_over_chi_dy,k,y_min_over_dy\n");
    for &a in &a_grid {
        for k in 1..=4 {
            let y = semiclassics::y_of_minimum(k, a * chi_dy, &s)? / dy;
            writeln!(minima, "{},{k},{}", num(a), num(y))?;
        }
    }
    let gnuplot = "set datafile separator ','\n\
        set xlabel 'x / chi_DY'\n\
        set ylabel 'y / DY'\n\
        set view map\n\
        splot 'fig5_contour.csv' using 1:3:4 with points pt 5 ps 0.5 palette notitle\n"
        .to_string();
    Ok(FigureData {
        files: vec![("fig5_contour.csv".into(), grid), ("fig5_minima.csv".into(), minima)],
        gnuplot,
        violations: Vec::new(),
    })
}

/// Exact, interference-fringe and Gaussian distributions at `r = 0.8`.
fn fig6() -> Result<FigureData> {
    let s = spec(0.8)?;
    let panels = [
        ("a", fock::zeros(4, &s).positive[0].x),
        ("b", fock::zeros(6, &s).positive[0].x),
        ("c", s.chi_c()),
    ];
    let mut files = Vec::new();
    let mut geometry = String::from("panel,x,n_min_1,nbar,nbar_plus_2dn\n");
    for (panel, x) in panels {
        let exact = fock::distribution(x, &s, DEFAULT_TAIL_TOL)?;
        let n_max = (s.mean_photon_number(x) + 5.0 * s.photon_number_variance(x).sqrt()).ceil() as usize + 5;
        let wkb = semiclassics::wkb_approx(x, &s, n_max)?;
        let mut t = String::from("n,exact,wkb,envelope_2rho,gaussian\n");
        for n in 0..=n_max {
            let v = [
                exact.get(n),
                wkb.approx_probs[n],
                2.0 * wkb.envelope[n],
                semiclassics::gaussian_approx(n as f64, x, &s),
            ];
            writeln!(t, "{n},{}", row(&v))?;
        }
        files.push((format!("fig6{panel}.csv"), t));
        let nbar = s.mean_photon_number(x);
        writeln!(
            geometry,
            "{panel},{}",
            row(&[
                x,
                semiclassics::n_of_minimum(1, x, &s)?,
                nbar,
                nbar + 2.0 * s.photon_number_variance(x).sqrt()
            ])
        )?;
    }
    files.push(("fig6_geometry.csv".into(), geometry));
    let gnuplot = "set datafile separator ','\n\
        set style data histograms\n\
        set multiplot layout 3,1\n\
        do for [p in 'a b c'] {\n  \
        plot 'fig6'.p.'.csv' using 1:2 with boxes title 'exact', '' using 1:3 with points pt 5 title 'fringes', \
        '' using 1:4 with lines dt 2 title '2 rho', '' using 1:5 with points pt 7 title 'Gaussian'\n}\n\
        unset multiplot\n"
        .to_string();
    Ok(FigureData {
        files,
        gnuplot,
        violations: Vec::new(),
    })
}

/// Approximate Fisher information over `(x, ε)` at `r = 1`.
fn fig7a() -> Result<FigureData> {
    let s = spec(1.0)?;
    let xs = fisher::linspace(0.0, 4.0, 201);
    let eps = fisher::linspace(0.0, 0.05, 26);
    let blocks = eps
        .par_iter()
        .map(|&e| -> Result<String> {
            let c = LossChannel::new(e)?;
            let n = fock::resolve_cutoff(c.x_eff(4.0), &c.effective_spec(&s), DEFAULT_TAIL_TOL)?;
            let model = ApproxFisherModel::new(&s, &c, n);
            let mut out = String::new();
            for &x in &xs {
                writeln!(out, "{}", row(&[x, e, c.x_eff(x), model.eval(x)?]))?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let surface = String::from("x,epsilon,x_eff,ifisher_approx\n") + &blocks.concat();
    let gnuplot = "set datafile separator ','\n\
        set xlabel 'x'\n\
        set ylabel 'epsilon'\n\
        splot 'fig7a_surface.csv' using 1:2:4 with points pt 7 ps 0.4 palette notitle\n"
        .to_string();
    Ok(FigureData {
        files: vec![("fig7a_surface.csv".into(), surface)],
        gnuplot,
        violations: Vec::new(),
    })
}

fn curve_table(curve: &FisherCurve, channel: &LossChannel) -> String {
    let t = 1.0 - channel.epsilon();
    let mut s = String::from("x,x_eff,cfi_exact,ifisher_approx,i_avg,qfi,asymptote\n");
    let pick = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map_or(f64::NAN, |v| v[i]);
    for (i, &x) in curve.x_grid.iter().enumerate() {
        let v = [
            x,
            channel.x_eff(x),
            pick(&curve.cfi_exact, i),
            pick(&curve.ifisher_approx, i),
            pick(&curve.i_avg, i),
            curve.qfi[i],
            t * curve.qfi[i],
        ];
        s.push_str(&row(&v));
        s.push('\n');
    }
    s
}

fn dips_table(curve: &FisherCurve) -> String {
    let mut s = String::from("n,k,x_dip,depth\n");
    for d in &curve.dips {
        s.push_str(&format!("{},{},{},{}\n", d.n, d.k, num(d.x_dip), num(d.depth)));
    }
    s
}

/// Fisher information at `r = 1` for one loss rate; with `sim`, also the
/// Monte Carlo sensitivities at points between the first few dips.
fn fisher_panel(id: &str, eps: f64, sim: Option<&FigureOptions>) -> Result<FigureData> {
    let s = spec(1.0)?;
    let c = LossChannel::new(eps)?;
    let curve = FisherCurve::compute(&s, &c, &fisher::linspace(0.0, 4.0, 801), FisherModes::ALL)?;
    let mut violations: Vec<String> = curve.violations().into_iter().map(String::from).collect();
    let mut files = vec![
        (format!("{id}.csv"), curve_table(&curve, &c)),
        (format!("{id}_dips.csv"), dips_table(&curve)),
    ];
    let mut plot_sim = String::new();
    if let Some(opts) = sim {
        let xs = fisher::linspace(0.3, 3.5, 17);
        let reports = xs
            .iter()
            .map(|&x| {
                let mut cfg = ExperimentConfig::new(1.0, eps, x);
                cfg.n_samples = opts.n_samples;
                cfg.n_trials = opts.n_trials;
                cfg.seed = opts.seed;
                run_simulation(&cfg, Estimator::Mle)
            })
            .collect::<Result<Vec<_>>>()?;
        if reports.iter().any(|r| r.sensitivity.is_nan() || r.sensitivity <= 0.0) {
            violations.push("positive_sensitivity".into());
        }
        let mut t = String::from(EstimationReport::CSV_HEADER) + "\n";
        for r in &reports {
            t.push_str(&r.csv_row());
            t.push('\n');
        }
        files.push((format!("{id}_sim.csv"), t));
        plot_sim = format!(", \\\n  '{id}_sim.csv' using 4:9:10 with yerrorbars pt 6 title '1/(N d^2x)'");
    }
    let gnuplot = format!(
        "set datafile separator ','\n\
         set xlabel 'x'\n\
         set ylabel 'I_F'\n\
         plot '{id}.csv' using 1:4 with lines title 'approximate', '' using 1:3 with lines dt 4 title 'exact', \
         '' using 1:7 with lines dt 2 title '(1-eps) H_F'{plot_sim}\n"
    );
    Ok(FigureData {
        files,
        gnuplot,
        violations,
    })
}

/// Fisher information against the mean-photon-number sensitivity for
/// `ε = 0.002` and `ε = 0.05`.
fn fig8(id: &str, r: f64, x_max: f64) -> Result<FigureData> {
    let s = spec(r)?;
    let mut files = Vec::new();
    let mut violations = Vec::new();
    let mut plots = Vec::new();
    for (tag, eps) in [("eps0.002", 0.002), ("eps0.05", 0.05)] {
        let c = LossChannel::new(eps)?;
        let curve = FisherCurve::compute(&s, &c, &fisher::linspace(0.0, x_max, 601), FisherModes::ALL)?;
        violations.extend(curve.violations().into_iter().map(|v| format!("{v} ({tag})")));
        files.push((format!("{id}_{tag}.csv"), curve_table(&curve, &c)));
        files.push((format!("{id}_{tag}_dips.csv"), dips_table(&curve)));
        plots.push(format!(
            "'{id}_{tag}.csv' using 1:3 with lines title 'I_F {tag}', '' using 1:7 with lines dt 2 title 'asymptote {tag}', \
             '' using 1:5 with lines dt 3 title 'I_avg {tag}'"
        ));
    }
    let gnuplot = format!(
        "set datafile separator ','\nset xlabel 'x'\nset ylabel 'I_F'\nplot {}\n",
        plots.join(", \\\n  ")
    );
    Ok(FigureData {
        files,
        gnuplot,
        violations,
    })
}
