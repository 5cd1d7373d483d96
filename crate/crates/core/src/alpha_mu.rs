//! The marginal α-μ envelope distribution.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::error::{domain, require_positive, Result};
use crate::special::{lgamma, reg_lower_incomplete_gamma, reg_upper_incomplete_gamma};

/// Shape α, inverse normalized variance μ and α-root mean value r̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaMuParams {
    alpha: f64,
    mu: f64,
    r_hat: f64,
}

impl AlphaMuParams {
    pub fn new(alpha: f64, mu: f64, r_hat: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("mu", mu)?;
        require_positive("r_hat", r_hat)?;
        Ok(Self { alpha, mu, r_hat })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn r_hat(&self) -> f64 {
        self.r_hat
    }

    /// ln of the density normalizer α μ^μ / (Γ(μ) r̂^{αμ}).
    pub(crate) fn ln_norm(&self) -> f64 {
        let (a, m) = (self.alpha, self.mu);
        a.ln() + m * m.ln() - lgamma(m) - a * m * self.r_hat.ln()
    }

    /// μ (r/r̂)^α, the Gamma(μ) variate behind the envelope.
    pub(crate) fn gamma_arg(&self, r: f64) -> f64 {
        self.mu * (r / self.r_hat).powf(self.alpha)
    }
}

fn check_r(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("envelope value must be nonnegative, got {r}")))
    }
}

/// Marginal density at r ≥ 0; +∞ at the origin when αμ < 1.
pub fn marginal_pdf(p: &AlphaMuParams, r: f64) -> Result<f64> {
    check_r(r)?;
    let am = p.alpha * p.mu;
    if r == 0.0 {
        return Ok(if am > 1.0 {
            0.0
        } else if am == 1.0 {
            (p.alpha.ln() + p.mu * p.mu.ln() - lgamma(p.mu) - p.r_hat.ln()).exp()
        } else {
            f64::INFINITY
        });
    }
    if r == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((p.ln_norm() + (am - 1.0) * r.ln() - p.gamma_arg(r)).exp())
}

/// Marginal CDF, P(μ, μ (r/r̂)^α).
pub fn marginal_cdf(p: &AlphaMuParams, r: f64) -> Result<f64> {
    check_r(r)?;
    reg_lower_incomplete_gamma(p.mu, p.gamma_arg(r))
}

/// Marginal survival function 1 − F(r), accurate deep in the upper tail.
pub fn marginal_sf(p: &AlphaMuParams, r: f64) -> Result<f64> {
    check_r(r)?;
    reg_upper_incomplete_gamma(p.mu, p.gamma_arg(r))
}

/// E[R^k] = r̂^k Γ(μ + k/α) / (μ^{k/α} Γ(μ)).
pub fn alpha_moment(p: &AlphaMuParams, k: f64) -> Result<f64> {
    require_positive("moment order", k)?;
    let ka = k / p.alpha;
    Ok((k * p.r_hat.ln() + lgamma(p.mu + ka) - ka * p.mu.ln() - lgamma(p.mu)).exp())
}

/// Smallest r with 1 − F(r) ≤ tail, found by bisection on the survival function.
pub fn upper_quantile(p: &AlphaMuParams, tail: f64) -> Result<f64> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(domain(format!("tail probability must lie in (0, 1), got {tail}")));
    }
    let mut hi = p.r_hat;
    while marginal_sf(p, hi)? > tail {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if marginal_sf(p, mid)? > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Generator for stream `stream` of seed `seed`: ChaCha8 keyed by
/// `seed_from_u64(seed)` with its 64-bit stream id set to `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws envelopes as r̂ (g/μ)^{1/α} with g ~ Gamma(μ, 1).
///
/// Shapes below one use g = g₁ U^{1/μ} with g₁ ~ Gamma(1 + μ), carried in
/// log form so that tiny μ cannot underflow g to zero.
#[derive(Debug, Clone)]
pub struct Sampler {
    params: AlphaMuParams,
    gamma: Gamma<f64>,
    boosted: bool,
}

impl Sampler {
    pub fn new(params: AlphaMuParams) -> Self {
        let boosted = params.mu < 1.0;
        let shape = if boosted { params.mu + 1.0 } else { params.mu };
        let gamma = Gamma::new(shape, 1.0).expect("shape validated by AlphaMuParams");
        Self {
            params,
            gamma,
            boosted,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = &self.params;
        let mut ln_g = self.gamma.sample(rng).ln();
        if self.boosted {
            let u: f64 = Open01.sample(rng);
            ln_g += u.ln() / p.mu;
        }
        let r = p.r_hat * ((ln_g - p.mu.ln()) / p.alpha).exp();
        r.max(f64::MIN_POSITIVE)
    }
}

/// `n` independent envelope draws.
pub fn sample<R: Rng + ?Sized>(p: &AlphaMuParams, rng: &mut R, n: usize) -> Vec<f64> {
    let s = Sampler::new(*p);
    (0..n).map(|_| s.draw(rng)).collect()
}
