//! Parameter sets behind the figure presets. Each r range stays inside the
//! region where every curve of the figure evaluates at the default tolerance.

use crate::error::{usage, CliError};

/// (α, μ, r̂, L) of one curve.
pub type Curve = (f64, f64, f64, u32);

pub struct DensityPreset {
    pub curves: Vec<Curve>,
    pub r_max: f64,
}

pub struct LinkPreset {
    pub curves: Vec<Curve>,
    pub g: f64,
    pub gamma_out_db: f64,
}

fn mu_rhat_pairs(alpha: f64) -> Vec<Curve> {
    [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0), (1.0, 2.0)]
        .into_iter()
        .map(|(m, rh)| (alpha, m, rh, 3))
        .collect()
}

fn alpha_rhat_pairs(mu: f64) -> Vec<Curve> {
    [(1.0, 1.0), (1.5, 1.0), (2.0, 1.0), (1.5, 2.0)]
        .into_iter()
        .map(|(a, rh)| (a, mu, rh, 3))
        .collect()
}

/// Figures 1-3 (PDF) and 4-6 (CDF) share their parameter sets.
pub fn density(name: &str, cdf: bool) -> Result<DensityPreset, CliError> {
    let n: u32 = name
        .strip_prefix("fig")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| usage(format!("unknown preset '{name}'")))?;
    let base = match (cdf, n) {
        (false, 1..=3) => n,
        (true, 4..=6) => n - 3,
        _ => {
            let range = if cdf { "fig4..fig6" } else { "fig1..fig3" };
            return Err(usage(format!("preset '{name}' does not apply here; use {range}")));
        }
    };
    Ok(match base {
        1 => DensityPreset { curves: mu_rhat_pairs(1.7), r_max: 3.0 },
        2 => DensityPreset { curves: alpha_rhat_pairs(1.7), r_max: 3.0 },
        _ => DensityPreset {
            curves: (2..=6).map(|l| (0.5, 1.5, 1.0, l)).collect(),
            r_max: 7.0,
        },
    })
}

/// Figures 7-9 (ASER) and 10-12 (OP).
pub fn link(name: &str, outage: bool) -> Result<LinkPreset, CliError> {
    let n: u32 = name
        .strip_prefix("fig")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| usage(format!("unknown preset '{name}'")))?;
    let sweep = [0.5, 1.0, 1.5, 2.0];
    let alphas = [0.6, 1.0, 1.4, 1.8];
    let curves: Vec<Curve> = match (outage, n) {
        (false, 7) => sweep.iter().map(|&m| (1.2, m, 2.0, 3)).collect(),
        (false, 8) => alphas.iter().map(|&a| (a, 0.9, 2.0, 3)).collect(),
        (false, 9) => (2..=5).map(|l| (0.9, 0.5, 1.0, l)).collect(),
        (true, 10) => sweep.iter().map(|&m| (1.2, m, 3.0, 3)).collect(),
        (true, 11) => alphas.iter().map(|&a| (a, 0.8, 6.0, 3)).collect(),
        (true, 12) => (2..=5).map(|l| (0.5, 0.7, 3.0, l)).collect(),
        _ => {
            let range = if outage { "fig10..fig12" } else { "fig7..fig9" };
            return Err(usage(format!("preset '{name}' does not apply here; use {range}")));
        }
    };
    Ok(LinkPreset {
        curves,
        g: 1.0,
        gamma_out_db: if n == 12 { 1.0 } else { 10.0 },
    })
}
