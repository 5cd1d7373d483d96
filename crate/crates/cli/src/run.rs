use std::time::Instant;

use alphamu::alpha_mu::alpha_moment;
use alphamu::combining::{G_BPSK, G_MIN_CORRELATION_BPSK, G_ORTHOGONAL_BPSK};
use alphamu::oracles::{convolution_pdf_extrapolated, mc_empirical_cdf};
use alphamu::series::{evaluate, required_terms, truncation_bound, truncation_error_reference};
use alphamu::{
    aser, aser_asymptotic, op_asymptotic, outage_probability, CombinerKind, Error, EvalOptions, GainSummary,
    SeriesKind, SnrConfig, SumSpec,
};
use rayon::prelude::*;

use crate::args::{AccuracyArgs, BenchArgs, Combiner, DensityArgs, Kind, LinkArgs, Output, Params, ValidateArgs};
use crate::error::{usage, CliError};
use crate::output::{emit, Cell, Table};
use crate::presets::{self, Curve};

/// (α, μ, r̂, L, r) of the accuracy table.
const ACCURACY_ROWS: [(f64, f64, f64, u32, f64); 6] = [
    (0.8, 0.2, 5.0, 3, 2.0),
    (1.2, 0.5, 1.0, 3, 2.0),
    (0.7, 0.1, 7.0, 4, 2.0),
    (1.5, 0.7, 2.0, 4, 2.0),
    (0.9, 0.7, 10.0, 5, 3.0),
    (1.7, 1.0, 3.0, 5, 3.0),
];

/// A curve, its validated spec and its r sweep.
type Sweep = (Curve, SumSpec, Vec<f64>);

const DENSITY_HEADER: [&str; 4] = ["r", "value", "n_terms", "bound"];
const LINK_HEADER: [&str; 5] = ["snr_db", "exact", "asymptotic", "diversity_gain", "coding_gain"];

fn domain(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::Domain(msg.into()))
}

fn finish(table: &Table, out: &Output) -> Result<(), CliError> {
    emit(&table.render(out.format), out.output.as_deref())
}

fn spec_from(p: &Params) -> Result<SumSpec, CliError> {
    let missing: Vec<&str> = [
        ("--alpha", p.alpha.is_none()),
        ("--mu", p.mu.is_none()),
        ("--rhat", p.rhat.is_none()),
        ("--L", p.l.is_none()),
    ]
    .into_iter()
    .filter_map(|(n, m)| m.then_some(n))
    .collect();
    if !missing.is_empty() {
        return Err(usage(format!("missing {} (or give --preset)", missing.join(", "))));
    }
    let l = p.l.unwrap();
    let l = u32::try_from(l).map_err(|_| domain(format!("L must be a positive integer, got {l}")))?;
    Ok(SumSpec::from_parts(p.alpha.unwrap(), p.mu.unwrap(), p.rhat.unwrap(), l)?)
}

fn check_tol(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn prefix(c: &Curve) -> Vec<Cell> {
    vec![c.0.into(), c.1.into(), c.2.into(), c.3.into()]
}

pub fn density(args: &DensityArgs, kind: SeriesKind) -> Result<(), CliError> {
    check_tol("--tol", args.tol)?;
    if args.nt_max == 0 {
        return Err(domain("--nt-max must be at least 1"));
    }
    if args.points == 0 {
        return Err(domain("--points must be at least 1"));
    }
    let opts = EvalOptions {
        target_abs_err: args.tol,
        max_terms: args.nt_max,
        ..EvalOptions::default()
    };

    // (curve, spec, r) tasks, all validated before any evaluation.
    let (curves, with_prefix): (Vec<Sweep>, bool) = match &args.preset {
        Some(name) => {
            let p = presets::density(name, kind == SeriesKind::Cdf)?;
            let rs = linspace(p.r_max / args.points as f64, p.r_max, args.points);
            let curves = p
                .curves
                .into_iter()
                .map(|c| Ok((c, SumSpec::from_parts(c.0, c.1, c.2, c.3)?, rs.clone())))
                .collect::<Result<_, CliError>>()?;
            (curves, true)
        }
        None => {
            let spec = spec_from(&args.params)?;
            let rs = match (args.r, args.r_min, args.r_max) {
                (Some(r), _, _) => vec![r],
                (None, Some(lo), Some(hi)) => {
                    if !(hi > lo) {
                        return Err(domain(format!("--r-max ({hi}) must exceed --r-min ({lo})")));
                    }
                    linspace(lo, hi, args.points)
                }
                _ => return Err(usage("give --r or both --r-min and --r-max")),
            };
            if let Some(bad) = rs.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
                return Err(domain(format!("r must be positive and finite, got {bad}")));
            }
            let p = spec.params();
            let c = (p.alpha(), p.mu(), p.r_hat(), spec.branches());
            (vec![(c, spec, rs)], false)
        }
    };

    let tasks: Vec<(&Curve, &SumSpec, f64)> =
        curves.iter().flat_map(|(c, s, rs)| rs.iter().map(move |&r| (c, s, r))).collect();
    let rows = tasks
        .par_iter()
        .map(|&(c, s, r)| {
            let e = evaluate(s, r, kind, &opts)?;
            let mut row = if with_prefix { prefix(c) } else { Vec::new() };
            row.extend([r.into(), e.value.into(), e.terms_used.into(), e.certified_bound.into()]);
            Ok(row)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut table = if with_prefix {
        Table::with_prefix(&["alpha", "mu", "rhat", "L"], &DENSITY_HEADER)
    } else {
        Table::new(&DENSITY_HEADER)
    };
    table.rows = rows;
    finish(&table, &args.out)
}

pub fn accuracy_table(args: &AccuracyArgs) -> Result<(), CliError> {
    check_tol("--target", args.target)?;
    let kind = match args.kind {
        Kind::Pdf => SeriesKind::Pdf,
        Kind::Cdf => SeriesKind::Cdf,
    };
    let rows = ACCURACY_ROWS
        .par_iter()
        .map(|&(a, m, rh, l, r)| {
            let s = SumSpec::from_parts(a, m, rh, l)?;
            let n = required_terms(&s, r, args.target, kind)?;
            let value = evaluate(&s, r, kind, &EvalOptions::with_target(args.target))?.value;
            Ok(vec![
                a.into(),
                m.into(),
                rh.into(),
                l.into(),
                r.into(),
                value.into(),
                n.into(),
                truncation_error_reference(&s, r, n, kind)?.into(),
                truncation_bound(&s, r, n, kind)?.into(),
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut table = Table::new(&["alpha", "mu", "rhat", "L", "r", "value", "n_terms", "truncation_error", "bound"]);
    table.rows = rows;
    finish(&table, &args.out)
}

fn modulation(g: &str) -> Result<f64, CliError> {
    let v = match g {
        "bpsk" => G_BPSK,
        "orthogonal-bpsk" => G_ORTHOGONAL_BPSK,
        "min-correlation-bpsk" => G_MIN_CORRELATION_BPSK,
        other => other
            .parse::<f64>()
            .map_err(|_| usage(format!("--G must be a number or a modulation name, got '{other}'")))?,
    };
    check_tol("--G", v)?;
    Ok(v)
}

fn snr_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(domain(format!("SNR range [{lo}, {hi}] dB is empty or not finite")));
    }
    check_tol("--snr-db-step", step)?;
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

pub fn link(args: &LinkArgs, outage: bool) -> Result<(), CliError> {
    check_tol("--tol", args.tol)?;
    let dbs = snr_grid(args.snr_db_min, args.snr_db_max, args.snr_db_step)?;
    let both = [CombinerKind::Egc, CombinerKind::Mrc];
    let chosen = args.combiner.map(|c| match c {
        Combiner::Egc => CombinerKind::Egc,
        Combiner::Mrc => CombinerKind::Mrc,
    });

    let (curves, combiners, g, gamma_db, with_prefix) = match &args.preset {
        Some(name) => {
            let p = presets::link(name, outage)?;
            let combiners = chosen.map_or(both.to_vec(), |c| vec![c]);
            let gamma = args.gamma_out_db.unwrap_or(p.gamma_out_db);
            (p.curves, combiners, p.g, gamma, true)
        }
        None => {
            let spec = spec_from(&args.params)?;
            let c = chosen.ok_or_else(|| usage("missing --combiner (or give --preset)"))?;
            let gamma = match (outage, args.gamma_out_db) {
                (true, Some(v)) => v,
                (true, None) => return Err(usage("op needs --gamma-out-db")),
                (false, v) => v.unwrap_or(0.0),
            };
            let p = spec.params();
            let curve = (p.alpha(), p.mu(), p.r_hat(), spec.branches());
            (vec![curve], vec![c], modulation(&args.g)?, gamma, false)
        }
    };
    if !gamma_db.is_finite() {
        return Err(domain("--gamma-out-db must be finite"));
    }
    let specs = curves
        .iter()
        .map(|c| SumSpec::from_parts(c.0, c.1, c.2, c.3))
        .collect::<Result<Vec<_>, Error>>()?;

    let mut tasks = Vec::new();
    for (c, s) in curves.iter().zip(&specs) {
        for &comb in &combiners {
            for &db in &dbs {
                tasks.push((c, s, comb, db));
            }
        }
    }
    let rows = tasks
        .par_iter()
        .map(|&(curve, s, comb, db)| {
            let cfg = SnrConfig::from_db(db, g, gamma_db)?;
            let (exact, (asym, gains)): (f64, (f64, GainSummary)) = if outage {
                (outage_probability(s, comb, &cfg, args.tol)?.value, op_asymptotic(s, comb, &cfg)?)
            } else {
                (aser(s, comb, &cfg, args.tol)?.value, aser_asymptotic(s, comb, &cfg)?)
            };
            let mut row = Vec::new();
            if with_prefix {
                row.extend(prefix(curve));
                row.push(comb.name().into());
            }
            row.extend([
                db.into(),
                exact.into(),
                if args.asymptotic { Cell::Float(asym) } else { Cell::Empty },
                gains.diversity_gain.into(),
                gains.coding_gain.into(),
            ]);
            Ok(row)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut table = if with_prefix {
        Table::with_prefix(&["alpha", "mu", "rhat", "L", "combiner"], &LINK_HEADER)
    } else {
        Table::new(&LINK_HEADER)
    };
    table.rows = rows;
    finish(&table, &args.out)
}

/// Series value with the precision guard off; the comparison against the
/// oracle decides whether it is good enough.
fn raw_series(s: &SumSpec, r: f64, kind: SeriesKind, target: f64) -> f64 {
    let opts = EvalOptions {
        target_abs_err: target,
        rounding_rel_tol: f64::INFINITY,
        ..EvalOptions::default()
    };
    match evaluate(s, r, kind, &opts) {
        Ok(e) => e.value,
        Err(Error::PrecisionLoss { value, .. }) => value,
        Err(_) => f64::NAN,
    }
}

fn max_abs_diff(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs.fold(0.0f64, |m, (a, b)| {
        let d = (a - b).abs();
        if d.is_nan() { f64::INFINITY } else { m.max(d) }
    })
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let p = &args.params;
    let params = Params {
        alpha: p.alpha.or(Some(0.5)),
        mu: p.mu.or(Some(2.5)),
        rhat: p.rhat.or(Some(5.0)),
        l: p.l.or(Some(3)),
    };
    let spec = spec_from(&params)?;
    let rh = spec.params().r_hat();
    const CONV_TOL: f64 = 1e-6;

    let conv = convolution_pdf_extrapolated(&spec, None, args.grid)?;
    let h = conv.grid_step;
    let (lo, hi) = (0.1 * rh, (4.0 * rh).min(*conv.grid.last().unwrap()));
    let on_range: Vec<(f64, f64)> = conv
        .grid
        .iter()
        .zip(&conv.densities)
        .filter(|(r, _)| (lo..=hi).contains(*r))
        .map(|(r, d)| (*r, *d))
        .collect();
    let series_pdf: Vec<f64> = on_range.par_iter().map(|(r, _)| raw_series(&spec, *r, SeriesKind::Pdf, 1e-9)).collect();
    let d_conv = max_abs_diff(series_pdf.iter().zip(&on_range).map(|(s, (_, c))| (*s, *c)));

    // Upper cell edges, where the lattice CDF is a plain cumulative sum.
    let cum: Vec<f64> = conv
        .densities
        .iter()
        .scan(0.0, |acc, d| {
            *acc += d * h;
            Some(*acc)
        })
        .collect();
    let idx: Vec<usize> = (1..=16)
        .map(|j| ((4.0 * rh * j as f64 / 16.0) / h).round() as usize)
        .filter(|&i| i < conv.grid.len())
        .collect();
    let edges: Vec<f64> = idx.iter().map(|&i| conv.grid[i] + 0.5 * h).collect();
    let mc = mc_empirical_cdf(&spec, &edges, args.samples, args.seed)?;
    let series_cdf: Vec<f64> = edges.par_iter().map(|&r| raw_series(&spec, r, SeriesKind::Cdf, 1e-8)).collect();
    let d_series_mc = max_abs_diff(series_cdf.iter().copied().zip(mc.values.iter().copied()));
    let d_conv_mc = max_abs_diff(idx.iter().map(|&i| cum[i]).zip(mc.values.iter().copied()));

    let checks = [
        ("series_vs_convolution", on_range.len(), d_conv, CONV_TOL),
        ("series_vs_monte_carlo", edges.len(), d_series_mc, mc.dkw_band),
        ("convolution_vs_monte_carlo", edges.len(), d_conv_mc, mc.dkw_band),
    ];
    let mut table = Table::new(&["check", "points", "max_diff", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for (name, n, d, tol) in checks {
        let ok = d <= tol;
        if !ok {
            failed.push(name);
        }
        table.rows.push(vec![name.into(), n.into(), d.into(), tol.into(), if ok { "pass" } else { "fail" }.into()]);
    }
    finish(&table, &args.out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    check_tol("--tol", args.tol)?;
    if args.points == 0 || args.reps == 0 || args.l_list.is_empty() {
        return Err(domain("--points, --reps and --L-list must be non-empty"));
    }
    let p = &args.params;
    let (a, m, rh) = (p.alpha.unwrap_or(1.1), p.mu.unwrap_or(0.6), p.rhat.unwrap_or(2.0));
    let specs = args
        .l_list
        .iter()
        .map(|&l| SumSpec::from_parts(a, m, rh, l))
        .collect::<Result<Vec<_>, Error>>()?;
    let opts = EvalOptions::with_target(args.tol);

    let mut table = Table::new(&["L", "kind", "points", "mean_terms", "min_seconds", "max_seconds", "per_point_us"]);
    for s in &specs {
        // The large-L series only stays within f64 in the lower part of the bulk.
        let mean = s.branches() as f64 * alpha_moment(s.params(), 1.0)?;
        let rs = linspace(0.3 * mean / args.points as f64, 0.3 * mean, args.points);
        for (name, kind) in [("pdf", SeriesKind::Pdf), ("cdf", SeriesKind::Cdf)] {
            // Warm-up sweep builds the cached coefficient table.
            let terms: usize = rs
                .iter()
                .map(|&r| evaluate(s, r, kind, &opts).map(|e| e.terms_used))
                .sum::<Result<usize, Error>>()?;
            let mut times = Vec::with_capacity(args.reps);
            for _ in 0..args.reps {
                let start = Instant::now();
                for &r in &rs {
                    std::hint::black_box(evaluate(s, r, kind, &opts)?);
                }
                times.push(start.elapsed().as_secs_f64());
            }
            let min = times.iter().copied().fold(f64::INFINITY, f64::min);
            let max = times.iter().copied().fold(0.0, f64::max);
            table.rows.push(vec![
                s.branches().into(),
                name.into(),
                args.points.into(),
                (terms as f64 / rs.len() as f64).into(),
                min.into(),
                max.into(),
                (min / args.points as f64 * 1e6).into(),
            ]);
        }
    }
    finish(&table, &args.out)
}
