//! Independent references for the series engine: Monte Carlo empirical CDFs,
//! an iterated numerical convolution of the marginal density, and direct
//! quadrature of the ASER integral.

use rayon::prelude::*;

use crate::alpha_mu::{marginal_cdf, marginal_pdf, marginal_sf, stream_rng, upper_quantile, Sampler};
use crate::combining::{envelope_at_snr, CombinerKind, SnrConfig};
use crate::error::{domain, require_positive, Error, Result};
use crate::quad::gauss_legendre;
use crate::series::{evaluate, EvalOptions, SeriesKind, SumSpec};

/// Samples drawn from one random stream; fixed so results do not depend on
/// the thread count.
pub const MC_CHUNK: usize = 1 << 16;

/// Largest tolerated mass deficit of a convolution grid.
pub const GRID_MASS_TOLERANCE: f64 = 1e-4;

pub const MIN_GRID: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_samples: usize,
    pub dkw_band: f64,
}

impl EmpiricalCdf {
    /// Whether `f(grid[i])` lies within the band around `values[i]` for all i.
    pub fn contains<F>(&self, mut f: F) -> Result<bool>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        for (x, v) in self.grid.iter().zip(&self.values) {
            if (f(*x)? - v).abs() > self.dkw_band {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Half-width of the 99% Dvoretzky-Kiefer-Wolfowitz band for n samples.
pub fn dkw_band(n: usize) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("evaluation grid is empty"));
    }
    if grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(domain("evaluation grid must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("evaluation grid must be sorted"));
    }
    Ok(())
}

/// Empirical CDF of `transform(branch draws)` on `grid`.
///
/// Chunk j of [`MC_CHUNK`] samples uses stream j of `seed`; per-chunk counts
/// are integers, so the reduction is exact and the result bit-reproducible.
fn mc_cdf_by<F>(spec: &SumSpec, grid: &[f64], n_samples: usize, seed: u64, transform: F) -> Result<EmpiricalCdf>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n_samples < 1000 {
        return Err(domain(format!("need at least 1000 samples, got {n_samples}")));
    }
    check_grid(grid)?;
    let sampler = Sampler::new(*spec.params());
    let l = spec.branches() as usize;
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let len = MC_CHUNK.min(n_samples - j * MC_CHUNK);
            let mut rng = stream_rng(seed, j as u64);
            let mut branch = vec![0.0; l];
            let mut draws: Vec<f64> = (0..len)
                .map(|_| {
                    for b in branch.iter_mut() {
                        *b = sampler.draw(&mut rng);
                    }
                    transform(&branch)
                })
                .collect();
            draws.sort_unstable_by(f64::total_cmp);
            grid.iter()
                .map(|x| draws.partition_point(|d| d <= x) as u64)
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(EmpiricalCdf {
        grid: grid.to_vec(),
        values: counts.iter().map(|&c| c as f64 / n_samples as f64).collect(),
        n_samples,
        dkw_band: dkw_band(n_samples),
    })
}

/// Empirical CDF of the sum of L independent envelopes.
pub fn mc_empirical_cdf(spec: &SumSpec, grid: &[f64], n_samples: usize, seed: u64) -> Result<EmpiricalCdf> {
    mc_cdf_by(spec, grid, n_samples, seed, |b| b.iter().sum())
}

/// Empirical CDF of the combiner SNR: k (Σ R)² for EGC, k Σ R² for MRC.
pub fn mc_snr_empirical_cdf(
    spec: &SumSpec,
    c: CombinerKind,
    cfg: &SnrConfig,
    grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<EmpiricalCdf> {
    let cfg = SnrConfig::new(cfg.es_n0, cfg.modulation_g, cfg.gamma_out)?;
    let k = cfg.es_n0 / spec.branches() as f64;
    match c {
        CombinerKind::Egc => mc_cdf_by(spec, grid, n_samples, seed, |b| {
            let s: f64 = b.iter().sum();
            k * s * s
        }),
        CombinerKind::Mrc => mc_cdf_by(spec, grid, n_samples, seed, |b| {
            k * b.iter().map(|r| r * r).sum::<f64>()
        }),
    }
}

/// Density of the sum sampled on the uniform grid `i · grid_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPdf {
    pub grid: Vec<f64>,
    pub densities: Vec<f64>,
    pub grid_step: f64,
    /// Probability mass captured on the grid; 1 minus the truncated tail.
    pub mass: f64,
}

impl GridPdf {
    /// Four-point Lagrange interpolation of the densities at r.
    pub fn value_at(&self, r: f64) -> Result<f64> {
        let n = self.grid.len();
        let t = r / self.grid_step;
        if !(t >= 0.0) || t > (n - 1) as f64 {
            return Err(domain(format!("r = {r} lies outside the grid")));
        }
        let j = (t.floor() as usize).clamp(1, n - 3) - 1;
        let s = t - j as f64;
        let y = &self.densities[j..j + 4];
        let mut v = 0.0;
        for (a, ya) in y.iter().enumerate() {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (s - b as f64) / (a as f64 - b as f64);
                }
            }
            v += w * ya;
        }
        Ok(v)
    }
}

/// Grid end used when none is given: wide enough that the union bound
/// L · (1 − F(r/L)) leaves at most 1e-6 of the sum's mass beyond it.
pub fn default_r_max(spec: &SumSpec) -> Result<f64> {
    let p = spec.params();
    let l = spec.branches() as f64;
    let base = l * p.r_hat() * (1.0 + 8.0 / (p.alpha() * p.mu()).sqrt());
    Ok(base.max(l * upper_quantile(p, 1e-6 / l)?))
}

/// Probability of the marginal cell [a, b], taken from whichever of the CDF
/// or survival function is smaller so that tail cells keep their digits.
fn cell_mass(spec: &SumSpec, a: f64, b: f64) -> Result<f64> {
    let p = spec.params();
    let fa = marginal_cdf(p, a)?;
    if fa < 0.5 {
        Ok(marginal_cdf(p, b)? - fa)
    } else {
        Ok(marginal_sf(p, a)? - marginal_sf(p, b)?)
    }
}

/// Iterated numerical convolution of the marginal density.
///
/// Node j of the lattice carries the marginal probability of the cell
/// [r_j − h/2, r_j + h/2] (the first cell is [0, h/2]), computed from the
/// CDF so that the r^{αμ−1} singularity at the origin needs no special
/// quadrature. L − 1 direct discrete convolutions of these masses give the
/// cell masses of the sum, and density = mass / h. For L = 1 the marginal
/// density itself is sampled, with the cell average at the origin when the
/// density is infinite there.
pub fn convolution_pdf(spec: &SumSpec, r_max: Option<f64>, n_grid: usize) -> Result<GridPdf> {
    if n_grid < MIN_GRID {
        return Err(Error::Resolution(format!(
            "convolution grid of {n_grid} points is below the minimum of {MIN_GRID}"
        )));
    }
    let r_max = match r_max {
        Some(v) => {
            require_positive("r_max", v)?;
            v
        }
        None => default_r_max(spec)?,
    };
    let h = r_max / (n_grid - 1) as f64;
    let grid: Vec<f64> = (0..n_grid).map(|j| j as f64 * h).collect();
    let p = spec.params();

    let marg: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(j, &r)| {
            if j == 0 {
                marginal_cdf(p, 0.5 * h)
            } else {
                cell_mass(spec, r - 0.5 * h, r + 0.5 * h)
            }
        })
        .collect::<Result<_>>()?;

    let l = spec.branches();
    let (densities, mass) = if l == 1 {
        let d = grid
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let f = marginal_pdf(p, r)?;
                Ok(if j == 0 && !f.is_finite() { marg[0] / (0.5 * h) } else { f })
            })
            .collect::<Result<Vec<f64>>>()?;
        (d, marginal_cdf(p, r_max + 0.5 * h)?)
    } else {
        let mut acc = marg.clone();
        for _ in 1..l {
            acc = (0..n_grid)
                .into_par_iter()
                .map(|k| {
                    let mut s = 0.0;
                    for j in 0..=k {
                        s += acc[j] * marg[k - j];
                    }
                    s
                })
                .collect();
        }
        let mass = acc.iter().sum::<f64>();
        (acc.iter().map(|m| m / h).collect(), mass)
    };

    if 1.0 - mass > GRID_MASS_TOLERANCE {
        return Err(Error::Resolution(format!(
            "grid on [0, {r_max}] captures mass {mass:.8}; increase r_max or n_grid"
        )));
    }
    Ok(GridPdf {
        grid,
        densities,
        grid_step: h,
        mass,
    })
}

/// Richardson extrapolation of [`convolution_pdf`] from steps h and h/2.
///
/// The lattice error is even in h, so (4 f_{h/2} − f_h)/3 removes the h²
/// term. The result lives on the `n_grid` lattice; its mass is that of the
/// finer grid.
pub fn convolution_pdf_extrapolated(spec: &SumSpec, r_max: Option<f64>, n_grid: usize) -> Result<GridPdf> {
    let r_max = match r_max {
        Some(v) => v,
        None => default_r_max(spec)?,
    };
    let coarse = convolution_pdf(spec, Some(r_max), n_grid)?;
    let fine = convolution_pdf(spec, Some(r_max), 2 * n_grid - 1)?;
    let densities = coarse
        .densities
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let f = fine.densities[2 * j];
            if j == 0 && spec.params().alpha() * spec.params().mu() * spec.branches() as f64 <= 1.0 {
                f
            } else {
                (4.0 * f - c) / 3.0
            }
        })
        .collect();
    Ok(GridPdf {
        densities,
        mass: fine.mass,
        ..coarse
    })
}

/// Survival of the combiner output above r, bounded through the union bound
/// on the branches.
fn output_tail_bound(spec: &SumSpec, c: CombinerKind, r: f64) -> Result<f64> {
    let l = spec.branches() as f64;
    let per_branch = match c {
        CombinerKind::Egc => r / l,
        CombinerKind::Mrc => (r / l).sqrt(),
    };
    Ok((l * marginal_sf(spec.params(), per_branch)?).min(1.0))
}

/// ASER by direct quadrature of E[Q(√(2GΨ))].
///
/// Integrating by parts and substituting ψ = t² gives
/// ∫₀^∞ F_Ψ(t²) √(G/π) e^{−G t²} dt, which is smooth apart from a power
/// law at the origin. The range is cut at G t² = 28 and split into panels
/// graded geometrically toward zero; the rule is accepted when 20- and
/// 30-point Gauss-Legendre agree to 1e-12. F is evaluated to an absolute
/// accuracy of 1e-12 divided by the Gaussian weight. Where the series cannot
/// be evaluated in f64, F is taken as the midpoint of [1 − u, 1] with u the
/// union bound on the tail, and half that interval enters the error.
pub fn aser_quadrature(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig) -> Result<f64> {
    Ok(aser_quadrature_with_error(spec, c, cfg)?.0)
}

/// [`aser_quadrature`] together with the accumulated rounding estimate of the
/// CDF values at the nodes. Fails if that estimate exceeds 1e-6 relative.
pub fn aser_quadrature_with_error(
    spec: &SumSpec,
    c: CombinerKind,
    cfg: &SnrConfig,
) -> Result<(f64, f64)> {
    let cfg = SnrConfig::new(cfg.es_n0, cfg.modulation_g, cfg.gamma_out)?;
    let g = cfg.modulation_g;
    let t_max = (28.0 / g).sqrt();
    let mut edges = vec![0.0];
    edges.extend((0..=48).rev().map(|k| t_max * 0.5f64.powi(k)));

    let env = crate::combining::envelope_spec(spec, c);
    let norm = (g / std::f64::consts::PI).sqrt();
    // Weighted integrand and its rounding estimate.
    let integrand = |t: f64| -> Result<(f64, f64)> {
        let psi = t * t;
        let w = norm * (-g * psi).exp();
        if psi == 0.0 {
            return Ok((0.0, 0.0));
        }
        let r = envelope_at_snr(spec, c, &cfg, psi);
        // Absolute accuracy of F only matters in proportion to the weight.
        let opts = EvalOptions {
            target_abs_err: (1e-12 / w).clamp(1e-13, 1e-4),
            rounding_rel_tol: 1e-9,
            ..EvalOptions::default()
        };
        // Where the series gives up, 1 − F is still bounded by the union bound.
        let fallback = |series: Option<(f64, f64)>| -> Result<(f64, f64)> {
            let u = output_tail_bound(spec, c, r)?.min(1.0);
            Ok(match series {
                Some((v, est)) if est < 0.5 * u => (v.clamp(0.0, 1.0) * w, est * w),
                _ => ((1.0 - 0.5 * u) * w, 0.5 * u * w),
            })
        };
        match evaluate(&env, r, SeriesKind::Cdf, &opts) {
            Ok(e) => Ok((e.value * w, e.rounding_estimate * w)),
            Err(Error::PrecisionLoss { value, estimate, .. }) => fallback(Some((value, estimate))),
            Err(Error::Convergence { .. }) => fallback(None),
            Err(e) => Err(e),
        }
    };

    let (x20, w20) = gauss_legendre(20);
    let (x30, w30) = gauss_legendre(30);
    let (coarse, _) = weighted_panels(integrand, &edges, &x20, &w20)?;
    let (fine, err) = weighted_panels(integrand, &edges, &x30, &w30)?;
    if (coarse - fine).abs() > 1e-12 {
        return Err(Error::Resolution(format!(
            "ASER quadrature did not settle: {coarse:e} vs {fine:e}"
        )));
    }
    let allowed = 1e-12f64.max(1e-6 * fine);
    if err > allowed {
        return Err(Error::PrecisionLoss { value: fine, estimate: err, target: allowed });
    }
    Ok((fine, err))
}

/// Gauss-Legendre panels over an integrand that also reports an error estimate.
fn weighted_panels<F>(f: F, edges: &[f64], nodes: &[f64], weights: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut total = 0.0;
    let mut err = 0.0;
    for pair in edges.windows(2) {
        let c = 0.5 * (pair[0] + pair[1]);
        let h = 0.5 * (pair[1] - pair[0]);
        for (x, w) in nodes.iter().zip(weights) {
            let (v, e) = f(c + h * x)?;
            total += h * w * v;
            err += h * w * e;
        }
    }
    Ok((total, err))
}
