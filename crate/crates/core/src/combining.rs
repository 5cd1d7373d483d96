//! Equal-gain and maximal-ratio combining over i.i.d. α-μ branches: SNR
//! statistics, outage probability and average symbol error rate, exact and
//! asymptotic.
//!
//! MRC adds branch powers, and R² is itself α-μ with parameters
//! (α/2, μ, r̂²), so both combiners reduce to the sum series of an
//! "envelope spec": the original one for EGC, the squared one for MRC.

use crate::error::{domain, require_positive, Error, Result};
use crate::series::{
    cached_coefficients, evaluate, jitter, lgamma_err, shadowed_sum, EvalOptions, SeriesEval,
    SeriesKind, SumSpec, U,
};
use crate::special::lgamma;

/// Modulation constant for coherent BPSK.
pub const G_BPSK: f64 = 1.0;
/// Modulation constant for orthogonal BPSK.
pub const G_ORTHOGONAL_BPSK: f64 = 0.5;
/// Modulation constant for BPSK with minimum correlation.
pub const G_MIN_CORRELATION_BPSK: f64 = 0.715;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    Egc,
    Mrc,
}

impl CombinerKind {
    /// 1 for EGC, 2 for MRC.
    pub fn theta(&self) -> u32 {
        match self {
            CombinerKind::Egc => 1,
            CombinerKind::Mrc => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CombinerKind::Egc => "egc",
            CombinerKind::Mrc => "mrc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "egc" => Ok(CombinerKind::Egc),
            "mrc" => Ok(CombinerKind::Mrc),
            _ => Err(domain(format!("unknown combiner '{s}', expected egc or mrc"))),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Mean SNR per symbol, modulation constant and outage threshold, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConfig {
    pub es_n0: f64,
    pub modulation_g: f64,
    pub gamma_out: f64,
}

impl SnrConfig {
    pub fn new(es_n0: f64, modulation_g: f64, gamma_out: f64) -> Result<Self> {
        require_positive("Es/N0", es_n0)?;
        require_positive("modulation constant G", modulation_g)?;
        require_positive("outage threshold", gamma_out)?;
        Ok(Self {
            es_n0,
            modulation_g,
            gamma_out,
        })
    }

    /// Builds a config from Es/N0 and γ_out given in dB.
    pub fn from_db(es_n0_db: f64, modulation_g: f64, gamma_out_db: f64) -> Result<Self> {
        if !es_n0_db.is_finite() || !gamma_out_db.is_finite() {
            return Err(domain("SNR values in dB must be finite"));
        }
        Self::new(db_to_linear(es_n0_db), modulation_g, db_to_linear(gamma_out_db))
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.es_n0, self.modulation_g, self.gamma_out).map(|_| ())
    }
}

/// High-SNR asymptote P ≈ (coding_gain · Es/N0)^(−diversity_gain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSummary {
    pub diversity_gain: f64,
    pub coding_gain: f64,
}

impl GainSummary {
    pub fn asymptote(&self, es_n0: f64) -> f64 {
        (-(self.diversity_gain) * (self.coding_gain * es_n0).ln()).exp()
    }
}

/// The sum whose series describes the combiner output R_ν = Σ R_n^ϑ.
pub fn envelope_spec(spec: &SumSpec, c: CombinerKind) -> SumSpec {
    match c {
        CombinerKind::Egc => *spec,
        CombinerKind::Mrc => {
            let p = spec.params();
            SumSpec::from_parts(p.alpha() / 2.0, p.mu(), p.r_hat() * p.r_hat(), spec.branches())
                .expect("squared envelope parameters stay positive")
        }
    }
}

/// Density of R_EGC = Σ R_n or R_MRC = Σ R_n².
pub fn combined_envelope_pdf(spec: &SumSpec, c: CombinerKind, r: f64, target_abs_err: f64) -> Result<SeriesEval> {
    evaluate(
        &envelope_spec(spec, c),
        r,
        SeriesKind::Pdf,
        &EvalOptions::with_target(target_abs_err),
    )
}

fn snr_scale(spec: &SumSpec, cfg: &SnrConfig) -> f64 {
    cfg.es_n0 / spec.branches() as f64
}

/// Combiner output r at which the instantaneous SNR equals ψ.
pub fn envelope_at_snr(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig, psi: f64) -> f64 {
    (psi / snr_scale(spec, cfg)).powf(c.theta() as f64 / 2.0)
}

fn scaled(e: SeriesEval, f: f64) -> SeriesEval {
    SeriesEval {
        value: e.value * f,
        certified_bound: e.certified_bound.map(|b| b * f),
        rounding_estimate: e.rounding_estimate * f,
        ..e
    }
}

/// Density of the instantaneous combiner SNR Ψ_ν.
pub fn snr_pdf(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig, psi: f64, target_abs_err: f64) -> Result<SeriesEval> {
    cfg.validate()?;
    require_positive("psi", psi)?;
    let r = envelope_at_snr(spec, c, cfg, psi);
    let jac = c.theta() as f64 / 2.0 * r / psi;
    let mut opts = EvalOptions::with_target(target_abs_err);
    if target_abs_err > 0.0 {
        opts.target_abs_err = target_abs_err / jac;
    }
    let e = evaluate(&envelope_spec(spec, c), r, SeriesKind::Pdf, &opts)?;
    Ok(scaled(e, jac))
}

/// CDF of the instantaneous combiner SNR Ψ_ν.
pub fn snr_cdf(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig, psi: f64, target_abs_err: f64) -> Result<SeriesEval> {
    cfg.validate()?;
    require_positive("psi", psi)?;
    let r = envelope_at_snr(spec, c, cfg, psi);
    evaluate(
        &envelope_spec(spec, c),
        r,
        SeriesKind::Cdf,
        &EvalOptions::with_target(target_abs_err),
    )
}

/// Pr[Ψ_ν ≤ γ_out], through the same code path as [`snr_cdf`].
pub fn outage_probability(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig, target_abs_err: f64) -> Result<SeriesEval> {
    snr_cdf(spec, c, cfg, cfg.gamma_out, target_abs_err)
}

/// β_0 = αμL/2 and c_0 = αμL/ϑ, the leading exponents in ψ and in r_ν.
fn leading_exponents(spec: &SumSpec, c: CombinerKind) -> (f64, f64) {
    let p = spec.params();
    let aml = p.alpha() * p.mu() * spec.branches() as f64;
    (aml / 2.0, aml / c.theta() as f64)
}

/// Asymptotic outage probability and its gains.
pub fn op_asymptotic(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig) -> Result<(f64, GainSummary)> {
    cfg.validate()?;
    let (beta0, c0) = leading_exponents(spec, c);
    let lp = cached_coefficients(&envelope_spec(spec, c), 1)?.log_prefactor();
    let ln_b = lp - lgamma(c0 + 1.0);
    let l = spec.branches() as f64;
    let gains = GainSummary {
        diversity_gain: beta0,
        coding_gain: (-ln_b / beta0).exp() / (l * cfg.gamma_out),
    };
    Ok((gains.asymptote(cfg.es_n0), gains))
}

/// Asymptotic ASER and its gains.
pub fn aser_asymptotic(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig) -> Result<(f64, GainSummary)> {
    cfg.validate()?;
    let (beta0, c0) = leading_exponents(spec, c);
    let lp = cached_coefficients(&envelope_spec(spec, c), 1)?.log_prefactor();
    let ln_a = lp + lgamma(beta0 + 0.5) - ln_two_sqrt_pi() - lgamma(c0 + 1.0);
    let l = spec.branches() as f64;
    let gains = GainSummary {
        diversity_gain: beta0,
        coding_gain: cfg.modulation_g / l * (-ln_a / beta0).exp(),
    };
    Ok((gains.asymptote(cfg.es_n0), gains))
}

fn ln_two_sqrt_pi() -> f64 {
    (2.0 * std::f64::consts::PI.sqrt()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AserMethod {
    Series,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AserEval {
    pub value: f64,
    pub method: AserMethod,
    /// Series terms summed; 0 for quadrature results.
    pub terms_used: usize,
    pub rounding_estimate: f64,
}

/// ASER from the closed-form series, without any fallback.
///
/// Term i is P δ_i Γ(β_i + 1/2) (G Es/(L N0))^(−β_i) / (2√π Γ(c_i + 1)) with
/// β_i = (αi + αμL)/2 and c_i = 2β_i/ϑ, using the coefficients of the
/// envelope spec. There is no closed-form tail bound, so summation stops
/// after three consecutive terms below 1e-16 of the partial sum.
pub fn aser_series(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig, max_terms: usize) -> Result<AserEval> {
    cfg.validate()?;
    let env = envelope_spec(spec, c);
    let table = cached_coefficients(&env, max_terms.max(1))?;
    let p = spec.params();
    let (a, aml) = (p.alpha(), p.alpha() * p.mu() * spec.branches() as f64);
    let theta = c.theta() as f64;
    let ln_gk = (cfg.modulation_g * snr_scale(spec, cfg)).ln();
    let lp = table.log_prefactor();
    let fixed = ln_two_sqrt_pi();

    let term = |sg: i8, ld: f64, i: usize, shadow: Option<usize>| -> Option<(f64, f64)> {
        if sg == 0 {
            return None;
        }
        let beta = (a * i as f64 + aml) / 2.0;
        let ci = 2.0 * beta / theta;
        let mut g1 = lgamma(beta + 0.5);
        let mut g2 = lgamma(ci + 1.0);
        let mut pw = beta * ln_gk;
        if let Some(k) = shadow {
            g1 += jitter(k, i, 1) * lgamma_err(beta + 0.5);
            g2 += jitter(k, i, 2) * lgamma_err(ci + 1.0);
            pw += jitter(k, 0, 4) * U * beta * (1.0 + ln_gk.abs()) + jitter(k, i, 5) * U * pw.abs();
        }
        let mut x = lp + ld + g1 - pw - fixed - g2;
        if let Some(k) = shadow {
            let mag = lp.abs() + ld.abs() + g1.abs() + pw.abs() + fixed + g2.abs();
            x += jitter(k, i, 3) * U * (6.0 + mag);
        }
        Some((sg as f64, x))
    };

    // Empirical stopping rule on the running sum.
    let mut mx = f64::NEG_INFINITY;
    let mut running = 0.0f64;
    let mut small = 0;
    for i in 0..max_terms.max(1) {
        let (sg, ld) = table.normalized_delta(i);
        let Some((sg, x)) = term(sg, ld, i, None) else {
            continue;
        };
        if x > mx {
            if mx > f64::NEG_INFINITY {
                running *= (mx - x).exp();
            }
            mx = x;
        }
        running += sg * (x - mx).exp();
        if x < mx + running.abs().ln() + (1e-16f64).ln() {
            small += 1;
            if small == 3 {
                let (value, rounding_estimate) = shadowed_sum(&table, 0..i + 1, term);
                return Ok(AserEval {
                    value,
                    method: AserMethod::Series,
                    terms_used: i + 1,
                    rounding_estimate,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Convergence {
        what: format!("ASER series did not settle within {max_terms} terms"),
        value: running.signum() * (mx + running.abs().ln()).exp(),
        bound: f64::NAN,
    })
}

/// Exact ASER.
///
/// The series is used at or above 0 dB when α < 2, where it converges. Below
/// 0 dB, for α ≥ 2, or when the series fails to settle or loses too many
/// digits, the result comes from [`crate::oracles::aser_quadrature`] and is
/// marked [`AserMethod::Quadrature`].
pub fn aser(spec: &SumSpec, c: CombinerKind, cfg: &SnrConfig, target_abs_err: f64) -> Result<AserEval> {
    cfg.validate()?;
    let opts = EvalOptions::with_target(target_abs_err);
    let target = if target_abs_err > 0.0 { target_abs_err } else { opts.target_abs_err };
    if cfg.es_n0 >= 1.0 && spec.params().alpha() < 2.0 {
        match aser_series(spec, c, cfg, opts.max_terms) {
            Ok(e) if e.rounding_estimate <= target.max(opts.rounding_rel_tol * e.value.abs()) => {
                return Ok(e)
            }
            Ok(_) | Err(Error::Convergence { .. }) | Err(Error::NumericRange(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let (value, rounding_estimate) = crate::oracles::aser_quadrature_with_error(spec, c, cfg)?;
    Ok(AserEval {
        value,
        method: AserMethod::Quadrature,
        terms_used: 0,
        rounding_estimate,
    })
}
