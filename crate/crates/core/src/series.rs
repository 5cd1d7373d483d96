//! Exact series for the PDF and CDF of a sum of L i.i.d. α-μ envelopes.
//!
//! The coefficients are kept normalized by Γ(αμ)^L and stored as sign plus
//! log-magnitude; the raw values overflow f64 after a few hundred terms.
//! Alongside each coefficient the table carries an estimate of its relative
//! rounding error, taken from the spread of a few shadow runs of the
//! recursion with randomized rounding. Every evaluation uses it to report how
//! many digits survived the cancellation of the alternating series.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::alpha_mu::AlphaMuParams;
use crate::error::{domain, require_positive, Error, Result};
use crate::special::{lgamma, ln_mittag_leffler_tail, ln_reg_lower_incomplete_gamma, SeriesControl};

/// Default absolute accuracy requested from [`sum_pdf`] and [`sum_cdf`].
pub const DEFAULT_TARGET: f64 = 1e-12;
/// Default cap on the number of series terms.
pub const DEFAULT_MAX_TERMS: usize = 500;
/// Default relative rounding tolerance, see [`EvalOptions::rounding_rel_tol`].
pub const DEFAULT_ROUNDING_REL_TOL: f64 = 1e-6;

pub(crate) const U: f64 = f64::EPSILON * 0.5;
const REFERENCE_EXTRA_TERMS: usize = 200;
const EMPIRICAL_REL: f64 = 1e-16;

/// L i.i.d. α-μ branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumSpec {
    params: AlphaMuParams,
    branches: u32,
}

impl SumSpec {
    pub fn new(params: AlphaMuParams, branches: u32) -> Result<Self> {
        if branches == 0 {
            return Err(domain("number of branches L must be at least 1"));
        }
        Ok(Self { params, branches })
    }

    pub fn from_parts(alpha: f64, mu: f64, r_hat: f64, branches: u32) -> Result<Self> {
        Self::new(AlphaMuParams::new(alpha, mu, r_hat)?, branches)
    }

    pub fn params(&self) -> &AlphaMuParams {
        &self.params
    }

    pub fn branches(&self) -> u32 {
        self.branches
    }

    fn l(&self) -> f64 {
        self.branches as f64
    }

    fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    /// αμL, the leading exponent of the series.
    fn aml(&self) -> f64 {
        self.params.alpha() * self.params.mu() * self.l()
    }

    fn key(&self) -> (u64, u64, u64, u32) {
        (
            self.params.alpha().to_bits(),
            self.params.mu().to_bits(),
            self.params.r_hat().to_bits(),
            self.branches,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Pdf,
    Cdf,
}

/// Which closed-form truncation bound certified a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Mittag-Leffler tail bound, 0 < α < 1.
    Dagger,
    /// Incomplete-gamma bound, α ≥ 1.
    Star,
    None,
}

impl BoundKind {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha < 1.0 {
            BoundKind::Dagger
        } else {
            BoundKind::Star
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::Dagger => "dagger",
            BoundKind::Star => "star",
            BoundKind::None => "none",
        }
    }
}

/// A series value together with what is known about its accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    /// Number of leading terms summed (indices 0..terms_used).
    pub terms_used: usize,
    /// Truncation bound for the discarded tail, when one could be computed.
    pub certified_bound: Option<f64>,
    pub bound_kind: BoundKind,
    /// First-order estimate of the floating-point error of `value`.
    pub rounding_estimate: f64,
}

/// Accuracy target and term cap for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Absolute accuracy; 0 selects [`DEFAULT_TARGET`].
    pub target_abs_err: f64,
    pub max_terms: usize,
    /// A result is rejected as imprecise only when its rounding estimate
    /// exceeds both the absolute target and this fraction of |value|.
    pub rounding_rel_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            target_abs_err: DEFAULT_TARGET,
            max_terms: DEFAULT_MAX_TERMS,
            rounding_rel_tol: DEFAULT_ROUNDING_REL_TOL,
        }
    }
}

impl EvalOptions {
    pub fn with_target(target_abs_err: f64) -> Self {
        Self {
            target_abs_err,
            ..Self::default()
        }
    }

    fn resolved_target(&self) -> Result<f64> {
        let t = self.target_abs_err;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(domain(format!("target accuracy must be finite and ≥ 0, got {t}")));
        }
        Ok(if t == 0.0 { DEFAULT_TARGET } else { t })
    }
}

/// Normalized coefficients δ̃_i = δ_i / Γ(αμ)^L of the sum series.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    spec: SumSpec,
    log_prefactor: f64,
    ln_w: Vec<f64>,
    err_w: Vec<f64>,
    sign: Vec<i8>,
    ln_abs: Vec<f64>,
    rel_err: Vec<f64>,
    shadows: Vec<Shadow>,
    max_spread: f64,
}

impl CoefficientTable {
    fn new(spec: SumSpec) -> Self {
        let p = spec.params;
        let (a, m) = (p.alpha(), p.mu());
        let log_prefactor = spec.l() * (p.ln_norm() + lgamma(a * m));
        Self {
            spec,
            log_prefactor,
            ln_w: vec![0.0],
            err_w: vec![0.0],
            sign: vec![1],
            ln_abs: vec![0.0],
            rel_err: vec![0.0],
            shadows: (0..SHADOWS)
                .map(|k| Shadow {
                    slope: jitter(k, 0, usize::MAX - 1)
                        * U
                        * (3.0 + m.ln().abs() + 2.0 * (a * p.r_hat().ln()).abs()),
                    ln_w: vec![0.0],
                    sign: vec![1],
                    ln_abs: vec![0.0],
                })
                .collect(),
            max_spread: 0.0,
        }
    }

    pub fn spec(&self) -> &SumSpec {
        &self.spec
    }

    /// L [ln α + μ ln μ + ln Γ(αμ) − ln Γ(μ) − αμ ln r̂].
    pub fn log_prefactor(&self) -> f64 {
        self.log_prefactor
    }

    pub fn len(&self) -> usize {
        self.sign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sign.is_empty()
    }

    /// δ̃_i as (sign, ln|δ̃_i|); the sign is 0 for an exactly vanishing entry.
    pub fn normalized_delta(&self, i: usize) -> (i8, f64) {
        (self.sign[i], self.ln_abs[i])
    }

    /// δ̃_i as plain floats. Late entries may overflow to ±∞; use
    /// [`Self::normalized_delta`] for the lossless form.
    pub fn normalized_deltas(&self) -> Vec<f64> {
        self.sign
            .iter()
            .zip(&self.ln_abs)
            .map(|(&s, &l)| s as f64 * l.exp())
            .collect()
    }

    /// Number of leading entries that still carry correct digits.
    pub fn usable_len(&self) -> usize {
        self.rel_err.iter().position(|e| e.is_infinite()).unwrap_or(self.len())
    }

    /// Estimated relative rounding error of δ̃_i; infinite once no digit is left.
    pub fn relative_error_estimate(&self, i: usize) -> f64 {
        self.rel_err[i]
    }

    fn push_weight(&mut self) {
        let l = self.ln_w.len() as f64;
        let p = self.spec.params;
        let (a, m) = (p.alpha(), p.mu());
        let power = l * (m.ln() - a * p.r_hat().ln());
        let (g1, g2, g3) = (a * (l + m), l + 1.0, a * m);
        let w = lgamma(g1) + power - lgamma(g2) - lgamma(g3);
        self.ln_w.push(w);
        self.err_w.push(
            lgamma_err(g1) + lgamma_err(g2) + lgamma_err(g3) + U * (4.0 + power.abs() + w.abs()),
        );
    }

    /// Grows the table to `n` entries; existing entries are never touched.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        let big_l = self.spec.l();
        let mut xs: Vec<(f64, f64)> = Vec::with_capacity(n);
        while self.len() < n {
            let i = self.len();
            self.push_weight();
            let (sg, ln_abs) = recursion_step(i, big_l, &self.sign, &self.ln_abs, &self.ln_w, None, &mut xs);
            if !ln_abs.is_finite() && sg != 0 {
                return Err(Error::NumericRange(format!(
                    "coefficient {i} left the representable range (ln|δ̃| = {ln_abs})"
                )));
            }
            self.sign.push(sg);
            self.ln_abs.push(ln_abs);

            // Running maximum: single readings are quantized to ulps of ln|δ̃|
            // and occasionally come out as zero.
            let mut spread = self.max_spread;
            for (k, sh) in self.shadows.iter_mut().enumerate() {
                let l = sh.ln_w.len();
                sh.ln_w.push(
                    self.ln_w[l] + jitter(k, l, usize::MAX) * self.err_w[l] + l as f64 * sh.slope,
                );
                let (s2, a2) = recursion_step(i, big_l, &sh.sign, &sh.ln_abs, &sh.ln_w, Some(k), &mut xs);
                sh.sign.push(s2);
                sh.ln_abs.push(a2);
                let dev = if sg == 0 && s2 == 0 {
                    0.0
                } else if sg != s2 || !a2.is_finite() {
                    f64::INFINITY
                } else {
                    (a2 - ln_abs).exp_m1().abs()
                };
                spread = spread.max(dev);
            }
            self.max_spread = spread;
            let est = SHADOW_SAFETY * spread;
            // Past full loss of a coefficient the shadows no longer measure
            // anything, and every later entry depends on it.
            self.rel_err.push(if est >= 1.0 {
                f64::INFINITY
            } else {
                est + 4.0 * U * (2.0 + ln_abs.abs())
            });
        }
        Ok(())
    }
}

/// Copy of the recursion run with every elementary rounding replaced by a
/// random perturbation of the same size.
#[derive(Debug, Clone)]
struct Shadow {
    /// Shared error of ln μ − α ln r̂, which enters every weight l times.
    slope: f64,
    ln_w: Vec<f64>,
    sign: Vec<i8>,
    ln_abs: Vec<f64>,
}

const SHADOWS: usize = 3;

/// Bound on the absolute error of [`lgamma`] at x, measured to stay below
/// 2.4 u max(1, |ln Γ(x)|, |x ln x|) on (0.01, 5000).
pub(crate) fn lgamma_err(x: f64) -> f64 {
    3.0 * U * 1f64.max(lgamma(x).abs()).max((x * x.ln()).abs())
}
const SHADOW_SAFETY: f64 = 16.0;

/// Deterministic value in [−1, 1] for (shadow, i, l).
pub(crate) fn jitter(k: usize, i: usize, l: usize) -> f64 {
    let mut z = (k as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (i as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (l as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// δ̃_i from the earlier entries, as (sign, ln|δ̃_i|). With `shadow` set,
/// each product and the final assembly are perturbed by one rounding unit
/// of their own size.
fn recursion_step(
    i: usize,
    big_l: f64,
    sign: &[i8],
    ln_abs: &[f64],
    ln_w: &[f64],
    shadow: Option<usize>,
    xs: &mut Vec<(f64, f64)>,
) -> (i8, f64) {
    xs.clear();
    for l in 1..=i {
        let s_prev = sign[i - l];
        let k = l as f64 * big_l + l as f64 - i as f64;
        if s_prev == 0 || k == 0.0 {
            continue;
        }
        let mut sg = s_prev as f64 * k.signum();
        if l % 2 == 1 {
            sg = -sg;
        }
        let mut x = ln_abs[i - l] + ln_w[l] + k.abs().ln();
        if let Some(sh) = shadow {
            x += jitter(sh, i, l) * U * (3.0 + x.abs());
        }
        xs.push((sg, x));
    }
    let mx = xs.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let mut s = crate::special::CompensatedSum::new();
    for &(sg, x) in xs.iter() {
        let v = (x - mx).exp();
        if v != 0.0 {
            s.add(sg * v);
        }
    }
    let s = s.value();
    if s == 0.0 || xs.is_empty() {
        return (0, f64::NEG_INFINITY);
    }
    let mut out = mx + s.abs().ln() - (i as f64).ln();
    if let Some(sh) = shadow {
        out += jitter(sh, i, 0) * U * (2.0 + out.abs());
    }
    (if s > 0.0 { 1 } else { -1 }, out)
}

/// First `n_terms` normalized recursion coefficients.
pub fn delta_coefficients(spec: &SumSpec, n_terms: usize) -> Result<CoefficientTable> {
    if n_terms == 0 {
        return Err(domain("n_terms must be at least 1"));
    }
    let mut t = CoefficientTable::new(*spec);
    t.extend_to(n_terms)?;
    Ok(t)
}

type CacheKey = (u64, u64, u64, u32);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<CoefficientTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<CoefficientTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// A shared table with at least `n` entries, built or extended on demand.
pub fn cached_coefficients(spec: &SumSpec, n: usize) -> Result<Arc<CoefficientTable>> {
    let key = spec.key();
    let existing = {
        let map = cache().read().unwrap_or_else(|e| e.into_inner());
        map.get(&key).cloned()
    };
    if let Some(t) = &existing {
        if t.len() >= n {
            return Ok(t.clone());
        }
    }
    let mut table = match existing {
        Some(t) => (*t).clone(),
        None => CoefficientTable::new(*spec),
    };
    let want = n.max(32).max(2 * table.len());
    table.extend_to(want)?;
    let table = Arc::new(table);
    let mut map = cache().write().unwrap_or_else(|e| e.into_inner());
    let keep = match map.get(&key) {
        Some(t) if t.len() >= table.len() => t.clone(),
        _ => {
            map.insert(key, table.clone());
            table
        }
    };
    Ok(keep)
}

/// Drops every cached coefficient table.
pub fn clear_coefficient_cache() {
    cache().write().unwrap_or_else(|e| e.into_inner()).clear();
}

fn check_r(r: f64) -> Result<()> {
    require_positive("r", r)
}

/// (exponent offset, gamma offset): r^{αi + e} / Γ(αi + b).
fn shape(spec: &SumSpec, kind: SeriesKind) -> (f64, f64) {
    let aml = spec.aml();
    match kind {
        SeriesKind::Pdf => (aml - 1.0, aml),
        SeriesKind::Cdf => (aml, aml + 1.0),
    }
}

/// Signed sum of terms given as (sign, ln|term|), rescaled by `mx`:
/// returns Σ sign e^{ln − mx}.
fn scaled_sum(terms: impl Iterator<Item = (f64, f64)>, mx: f64) -> f64 {
    let mut s = crate::special::CompensatedSum::new();
    for (sg, x) in terms {
        let v = (x - mx).exp();
        if v != 0.0 {
            s.add(sg * v);
        }
    }
    s.value()
}

/// Term i as (sign, ln|term|) for the given coefficient; `shadow` replaces
/// each rounding by a random perturbation of its size.
fn ln_term(
    t: &CoefficientTable,
    sign: i8,
    ln_abs: f64,
    i: usize,
    ln_r: f64,
    (e, b): (f64, f64),
    shadow: Option<usize>,
) -> Option<(f64, f64)> {
    if sign == 0 {
        return None;
    }
    let ai = t.spec.alpha() * i as f64;
    let lp = t.log_prefactor;
    let mut g = lgamma(ai + b);
    let mut p = (ai + e) * ln_r;
    if let Some(k) = shadow {
        g += jitter(k, i, 1) * lgamma_err(ai + b);
        p += jitter(k, i, 2) * U * (1.0 + p.abs());
    }
    let mut x = lp + ln_abs + p - g;
    if let Some(k) = shadow {
        x += jitter(k, i, 3) * U * (4.0 + lp.abs() + ln_abs.abs() + p.abs() + g.abs());
    }
    Some((sign as f64, x))
}

/// Σ over `range` of the terms built by `term(sign, ln|δ̃_i|, i, shadow)`,
/// with its rounding estimate.
///
/// The estimate repeats the sum with each shadow coefficient table, where
/// `term` is expected to replace its own roundings by random perturbations of
/// the same size, and scales the largest deviation by the same safety factor
/// as the coefficients. A term built on a coefficient whose digits are all
/// gone, or an overflowing sum, makes the estimate infinite.
pub(crate) fn shadowed_sum<F>(t: &CoefficientTable, range: std::ops::Range<usize>, term: F) -> (f64, f64)
where
    F: Fn(i8, f64, usize, Option<usize>) -> Option<(f64, f64)>,
{
    let primary: Vec<(f64, f64)> = range
        .clone()
        .filter_map(|i| term(t.sign[i], t.ln_abs[i], i, None))
        .collect();
    let mx = primary.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    let s = scaled_sum(primary.iter().copied(), mx);
    let value = if s == 0.0 { 0.0 } else { s.signum() * (mx + s.abs().ln()).exp() };
    if !value.is_finite() || range.clone().any(|i| t.rel_err[i].is_infinite() && t.sign[i] != 0) {
        return (value, f64::INFINITY);
    }
    let mut spread: f64 = 0.0;
    for (k, sh) in t.shadows.iter().enumerate() {
        let sk = scaled_sum(
            range
                .clone()
                .filter_map(|i| term(sh.sign[i], sh.ln_abs[i], i, Some(k))),
            mx,
        );
        spread = spread.max((sk - s).abs());
    }
    let ln_est = mx + (SHADOW_SAFETY * spread + 4.0 * U * s.abs()).ln();
    (value, ln_est.exp())
}

fn partial_sum(t: &CoefficientTable, r: f64, range: std::ops::Range<usize>, kind: SeriesKind) -> (f64, f64) {
    let shape = shape(&t.spec, kind);
    let ln_r = r.ln();
    shadowed_sum(t, range, |sign, ln_abs, i, shadow| {
        // ln r is shared by every term, so its rounding is drawn once per shadow.
        let ln_r = match shadow {
            Some(k) => ln_r + jitter(k, 0, 4) * U * (1.0 + ln_r.abs()),
            None => ln_r,
        };
        ln_term(t, sign, ln_abs, i, ln_r, shape, shadow)
    })
}

/// ln K = ln[α μ^μ Γ(αμ) (r/r̂)^{αμ} / Γ(μ)], the per-branch bound factor.
fn ln_k(p: &AlphaMuParams, r: f64) -> f64 {
    let (a, m) = (p.alpha(), p.mu());
    a.ln() + m * m.ln() + lgamma(a * m) + a * m * (r / p.r_hat()).ln() - lgamma(m)
}

fn ln_truncation_bound(spec: &SumSpec, r: f64, n_t: usize, kind: SeriesKind) -> Result<f64> {
    check_r(r)?;
    if n_t == 0 {
        return Err(domain("n_t must be at least 1"));
    }
    let p = spec.params;
    let (a, m) = (p.alpha(), p.mu());
    let big_l = spec.l();
    let ln_r_factor = match kind {
        SeriesKind::Pdf => -r.ln(),
        SeriesKind::Cdf => 0.0,
    };
    let base = big_l * ln_k(&p, r) + ln_r_factor;
    if a < 1.0 {
        let ln_z = (2.0 * m * big_l).ln() + a * (r / p.r_hat()).ln() + lgamma(m * a + a);
        let b = match kind {
            SeriesKind::Pdf => spec.aml(),
            SeriesKind::Cdf => spec.aml() + 1.0,
        };
        let ctrl = SeriesControl::default();
        match ln_mittag_leffler_tail(a, b, ln_z, n_t, ctrl) {
            Ok(tail) => Ok(base + tail),
            Err(e @ Error::Convergence { .. }) => {
                // A single late term already pushes the bound past f64::MAX.
                let k = (n_t + ctrl.max_terms - 1) as f64;
                let lower = base + k * ln_z - lgamma(a * k + b);
                if lower > f64::MAX.ln() {
                    Ok(f64::INFINITY)
                } else {
                    Err(e)
                }
            }
            Err(e) => Err(e),
        }
    } else {
        let x = p.gamma_arg(r);
        let lp = ln_reg_lower_incomplete_gamma(n_t as f64, x)?;
        Ok(base + (2.0 * big_l).ln() + x + lp)
    }
}

/// Closed-form bound on the PDF tail Σ_{i ≥ n_t}.
pub fn pdf_truncation_bound(spec: &SumSpec, r: f64, n_t: usize) -> Result<f64> {
    Ok(ln_truncation_bound(spec, r, n_t, SeriesKind::Pdf)?.exp())
}

/// Closed-form bound on the CDF tail Σ_{i ≥ n_t}.
pub fn cdf_truncation_bound(spec: &SumSpec, r: f64, n_t: usize) -> Result<f64> {
    Ok(ln_truncation_bound(spec, r, n_t, SeriesKind::Cdf)?.exp())
}

pub fn truncation_bound(spec: &SumSpec, r: f64, n_t: usize, kind: SeriesKind) -> Result<f64> {
    Ok(ln_truncation_bound(spec, r, n_t, kind)?.exp())
}

fn bound_or_inf(spec: &SumSpec, r: f64, n: usize, kind: SeriesKind) -> Result<f64> {
    match truncation_bound(spec, r, n, kind) {
        Ok(b) if !b.is_nan() => Ok(b),
        Ok(_) | Err(Error::Convergence { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Smallest n_t ≤ `cap` whose truncation bound is at most `target`.
///
/// Doubling brackets the answer and bisection pins it down; both rely on the
/// bound being nonincreasing in n_t.
pub fn required_terms_capped(
    spec: &SumSpec,
    r: f64,
    target: f64,
    kind: SeriesKind,
    cap: usize,
) -> Result<usize> {
    check_r(r)?;
    require_positive("target", target)?;
    if cap == 0 {
        return Err(domain("term cap must be at least 1"));
    }
    let mut hi = 1usize;
    let mut b_hi = bound_or_inf(spec, r, hi, kind)?;
    let mut lo = 0usize;
    while b_hi > target {
        if hi >= cap {
            return Err(Error::Convergence {
                what: format!("truncation bound above target {target:e} at the term cap {cap}"),
                value: f64::NAN,
                bound: b_hi,
            });
        }
        lo = hi;
        hi = (2 * hi).min(cap);
        b_hi = bound_or_inf(spec, r, hi, kind)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound_or_inf(spec, r, mid, kind)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// [`required_terms_capped`] with the default cap of 500 terms.
pub fn required_terms(spec: &SumSpec, r: f64, target: f64, kind: SeriesKind) -> Result<usize> {
    required_terms_capped(spec, r, target, kind, DEFAULT_MAX_TERMS)
}

/// Terms needed by the empirical rule: stop after three consecutive terms
/// below 1e-16 of the running partial sum.
fn empirical_terms(t: &CoefficientTable, r: f64, cap: usize, kind: SeriesKind) -> Option<usize> {
    let (e, b) = shape(&t.spec, kind);
    let ln_r = r.ln();
    let ln_rel = EMPIRICAL_REL.ln();
    let mut mx = f64::NEG_INFINITY;
    let mut s = 0.0f64;
    let mut small = 0;
    for i in 0..cap.min(t.len()) {
        let Some((sg, x)) = ln_term(t, t.sign[i], t.ln_abs[i], i, ln_r, (e, b), None) else {
            continue;
        };
        if x > mx {
            if mx > f64::NEG_INFINITY {
                s *= (mx - x).exp();
            }
            mx = x;
        }
        s += sg * (x - mx).exp();
        let ln_partial = mx + s.abs().ln();
        if x < ln_partial + ln_rel {
            small += 1;
            if small == 3 {
                return Some(i + 1);
            }
        } else {
            small = 0;
        }
    }
    None
}

/// Terms needed by the empirical rule: stop after three consecutive terms
/// below 1e-16 of the running partial sum. `None` if that does not happen
/// within `cap` terms.
pub fn empirical_required_terms(spec: &SumSpec, r: f64, kind: SeriesKind, cap: usize) -> Result<Option<usize>> {
    check_r(r)?;
    let table = cached_coefficients(spec, cap.max(1))?;
    Ok(empirical_terms(&table, r, cap, kind))
}

/// Sum of the first `n_t` terms with the bound for the discarded tail.
///
/// Fewer terms are summed if the coefficient table loses all digits before
/// `n_t`; `terms_used` then reports the shorter count.
pub fn evaluate_fixed_terms(spec: &SumSpec, r: f64, n_t: usize, kind: SeriesKind) -> Result<SeriesEval> {
    check_r(r)?;
    if n_t == 0 {
        return Err(domain("n_t must be at least 1"));
    }
    let table = cached_coefficients(spec, n_t)?;
    // Coefficients past the first one without any correct digit are dropped;
    // the bound then accounts for them as part of the tail.
    let n_t = n_t.min(table.usable_len());
    let (value, est) = partial_sum(&table, r, 0..n_t, kind);
    let bound = bound_or_inf(spec, r, n_t, kind)?;
    Ok(SeriesEval {
        value,
        terms_used: n_t,
        certified_bound: bound.is_finite().then_some(bound),
        bound_kind: if bound.is_finite() {
            BoundKind::for_alpha(spec.alpha())
        } else {
            BoundKind::None
        },
        rounding_estimate: est,
    })
}

/// Adaptive evaluation of the PDF or CDF series.
pub fn evaluate(spec: &SumSpec, r: f64, kind: SeriesKind, opts: &EvalOptions) -> Result<SeriesEval> {
    check_r(r)?;
    let target = opts.resolved_target()?;
    let cap = opts.max_terms.max(1);
    let (certified, best_bound) = match required_terms_capped(spec, r, target, kind, cap) {
        Ok(n) => (Some(n), f64::NAN),
        Err(Error::Convergence { bound, .. }) => (None, bound),
        Err(e) => return Err(e),
    };
    let mut out = match certified {
        Some(n) if n <= cached_coefficients(spec, n)?.usable_len() => evaluate_fixed_terms(spec, r, n, kind)?,
        // The bound cannot certify the target with coefficients that still
        // carry digits: fall back to the empirical stopping rule.
        _ => {
            let table = cached_coefficients(spec, cap)?;
            let usable = table.usable_len().min(cap);
            match empirical_terms(&table, r, usable, kind) {
                Some(n) => evaluate_fixed_terms(spec, r, n, kind)?,
                None if usable < cap => {
                    let (value, _) = partial_sum(&table, r, 0..usable, kind);
                    return Err(Error::PrecisionLoss { value, estimate: f64::INFINITY, target });
                }
                None => {
                    let (value, _) = partial_sum(&table, r, 0..cap, kind);
                    return Err(Error::Convergence {
                        what: format!(
                            "{kind:?} series at r={r} did not reach target {target:e} within {cap} terms"
                        ),
                        value,
                        bound: best_bound,
                    });
                }
            }
        }
    };
    if out.rounding_estimate > target
        && out.rounding_estimate > opts.rounding_rel_tol * out.value.abs()
    {
        return Err(Error::PrecisionLoss {
            value: out.value,
            estimate: out.rounding_estimate,
            target,
        });
    }
    if kind == SeriesKind::Cdf {
        let slack = out.certified_bound.unwrap_or(0.0) + out.rounding_estimate;
        if out.value < 0.0 {
            if -out.value > slack {
                return Err(Error::NumericRange(format!(
                    "CDF series gave {} at r={r}, beyond its error allowance {slack:e}",
                    out.value
                )));
            }
            out.value = 0.0;
        } else if out.value > 1.0 {
            if out.value - 1.0 > slack {
                return Err(Error::NumericRange(format!(
                    "CDF series gave {} at r={r}, beyond its error allowance {slack:e}",
                    out.value
                )));
            }
            out.value = 1.0;
        }
    }
    Ok(out)
}

/// PDF of the sum at r > 0; `target_abs_err` = 0 selects the default.
pub fn sum_pdf(spec: &SumSpec, r: f64, target_abs_err: f64) -> Result<SeriesEval> {
    evaluate(spec, r, SeriesKind::Pdf, &EvalOptions::with_target(target_abs_err))
}

/// CDF of the sum at r > 0; `target_abs_err` = 0 selects the default.
pub fn sum_cdf(spec: &SumSpec, r: f64, target_abs_err: f64) -> Result<SeriesEval> {
    evaluate(spec, r, SeriesKind::Cdf, &EvalOptions::with_target(target_abs_err))
}

/// |Σ_{i ≥ from} t_i| over the next 200 terms, summed as a tail so that
/// tiny remainders keep their relative accuracy.
pub fn tail_sum(spec: &SumSpec, r: f64, from: usize, kind: SeriesKind) -> Result<f64> {
    check_r(r)?;
    let end = from + REFERENCE_EXTRA_TERMS;
    let table = cached_coefficients(spec, end)?;
    Ok(partial_sum(&table, r, from..end, kind).0.abs())
}

/// Error of the partial sum that keeps indices 0..=n_t, measured against a
/// reference with 200 further terms.
pub fn truncation_error_reference(spec: &SumSpec, r: f64, n_t: usize, kind: SeriesKind) -> Result<f64> {
    if n_t == 0 {
        return Err(domain("n_t must be at least 1"));
    }
    tail_sum(spec, r, n_t + 1, kind)
}
