//! Exact evaluation of the distribution of a sum of i.i.d. α-μ fading
//! envelopes, with closed-form truncation bounds, plus the receiver metrics
//! that follow from it for equal-gain and maximal-ratio combining.
//!
//! ```
//! use alphamu::{sum_pdf, SumSpec};
//!
//! let spec = SumSpec::from_parts(0.8, 0.2, 5.0, 3).unwrap();
//! let f = sum_pdf(&spec, 2.0, 1e-10).unwrap();
//! assert!((f.value - 0.0621864).abs() < 1e-6);
//! assert!(f.certified_bound.unwrap() <= 1e-10);
//! ```

pub mod alpha_mu;
pub mod combining;
pub mod error;
pub mod oracles;
pub mod quad;
pub mod series;
pub mod special;

pub use alpha_mu::{alpha_moment, marginal_cdf, marginal_pdf, sample, AlphaMuParams};
pub use combining::{
    aser, aser_asymptotic, combined_envelope_pdf, op_asymptotic, outage_probability, snr_cdf,
    snr_pdf, AserEval, AserMethod, CombinerKind, GainSummary, SnrConfig,
};
pub use error::{Error, Result};
pub use oracles::{aser_quadrature, convolution_pdf, mc_empirical_cdf, EmpiricalCdf, GridPdf};
pub use series::{
    cdf_truncation_bound, delta_coefficients, pdf_truncation_bound, required_terms, sum_cdf,
    sum_pdf, truncation_error_reference, BoundKind, CoefficientTable, EvalOptions, SeriesEval,
    SeriesKind, SumSpec,
};
pub use special::SeriesControl;
