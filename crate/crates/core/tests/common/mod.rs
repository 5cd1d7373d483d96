#![allow(dead_code)]

use alphamu::SumSpec;

/// (α, μ, r̂, L, r) of the accuracy tables.
pub const ACCURACY_ROWS: [(f64, f64, f64, u32, f64); 6] = [
    (0.8, 0.2, 5.0, 3, 2.0),
    (1.2, 0.5, 1.0, 3, 2.0),
    (0.7, 0.1, 7.0, 4, 2.0),
    (1.5, 0.7, 2.0, 4, 2.0),
    (0.9, 0.7, 10.0, 5, 3.0),
    (1.7, 1.0, 3.0, 5, 3.0),
];

/// Published PDF values, N_T, truncation errors and bounds.
pub const PUBLISHED_PDF: [(f64, usize, f64, f64); 6] = [
    (0.06218, 13, 1.94428e-26, 5.44576e-11),
    (0.24861, 15, 4.62796e-14, 2.49407e-11),
    (0.04389, 13, 2.46361e-31, 1.15486e-11),
    (0.02492, 12, 3.14923e-16, 7.20537e-11),
    (0.00067, 15, 2.81411e-26, 2.13662e-11),
    (0.00013, 15, 1.27159e-22, 2.39054e-11),
];

/// Published CDF values, N_T, truncation errors and bounds.
pub const PUBLISHED_CDF: [(f64, usize, f64, f64); 6] = [
    (0.27666, 13, 3.33080e-27, 9.94579e-11),
    (0.42717, 15, 4.42165e-15, 4.98814e-11),
    (0.32405, 11, 1.41096e-29, 2.98271e-11),
    (0.01330, 13, 9.61472e-19, 7.72864e-11),
    (0.00068, 14, 3.02419e-25, 2.30528e-11),
    (0.00005, 15, 1.07039e-23, 7.17163e-11),
];

/// 60-digit series values (tests/data/gen_frozen.py).
pub const FROZEN_PDF: [f64; 6] = [
    0.062186353741166476,
    0.24861152134259635,
    0.043894634967590774,
    0.024921147276227306,
    0.00067222974298895592,
    0.00013969872614541832,
];
pub const FROZEN_CDF: [f64; 6] = [
    0.27666577429329318,
    0.42717731125812247,
    0.32405094170747676,
    0.013309825101681349,
    0.0006800318274678956,
    5.2802452352219053e-5,
];

/// (α, μ, r̂, L, r) of the efficiency tables with their published values.
pub const EFFICIENCY_PDF_ROWS: [(f64, f64, f64, u32, f64, f64); 10] = [
    (2.0, 1.0, 1.0, 3, 5.0, 0.0054),
    (2.0, 1.0, 1.0, 4, 5.0, 0.1222),
    (2.0, 2.0, 1.0, 5, 5.0, 0.3079),
    (2.0, 2.0, 1.0, 6, 5.0, 0.3475),
    (2.0, 3.0, 1.0, 7, 5.0, 0.5572),
    (0.5, 2.5, 5.0, 3, 5.0, 0.0306),
    (1.0, 2.5, 5.0, 4, 15.0, 0.0572),
    (1.5, 2.5, 5.0, 5, 15.0, 0.0111),
    (2.0, 2.5, 5.0, 6, 20.0, 0.0069),
    (2.5, 2.5, 5.0, 7, 22.0, 0.0002),
];
pub const EFFICIENCY_CDF_ROWS: [(f64, f64, f64, u32, f64, f64); 5] = [
    (0.5, 2.5, 5.0, 3, 5.0, 0.0729),
    (1.0, 2.5, 5.0, 4, 15.0, 0.2235),
    (1.5, 2.5, 5.0, 5, 15.0, 0.0158),
    (2.0, 2.5, 5.0, 6, 20.0, 0.0311),
    (2.5, 2.5, 5.0, 7, 22.0, 0.0101),
];

/// 60-digit series values at the efficiency-table rows, in the order above.
pub const FROZEN_EFFICIENCY_PDF: [f64; 10] = [
    0.01326430488313935,
    0.12122185461553344,
    0.46632454617031292,
    0.37512387155364927,
    0.033646997490224696,
    0.030647854192101556,
    0.057220246939115678,
    0.011193717815156252,
    0.0069889128446078209,
    0.00020458750893784788,
];
pub const FROZEN_EFFICIENCY_CDF: [f64; 5] = [
    0.072989739378980011,
    0.22359238698028557,
    0.01589599097265373,
    0.0084109388614490848,
    0.00015591658080704256,
];
/// CDF at the first five rows of the PDF efficiency table.
pub const FROZEN_EFFICIENCY_CDF_T3: [f64; 5] = [
    0.99544185911128174,
    0.93369878265264713,
    0.66173972672281492,
    0.22601014513356239,
    0.0082168527786926396,
];

/// Two-branch references by direct quadrature of f(u) f(r − u):
/// (α, μ, r̂, r, pdf, cdf).
pub const BRENNAN2: [(f64, f64, f64, f64, f64, f64); 7] = [
    (0.8, 0.2, 5.0, 1.0, 0.10867675817485949, 0.35394490132538114),
    (0.8, 0.2, 5.0, 6.0, 0.026733472186893217, 0.59716843744283922),
    (1.5, 0.7, 2.0, 1.5, 0.18628204123430774, 0.15540687113704966),
    (1.5, 0.7, 2.0, 3.0, 0.20688248491111079, 0.46887883831157859),
    (2.5, 1.3, 1.5, 2.0, 0.35752040956989781, 0.15508753142482388),
    (0.5, 2.5, 5.0, 8.0, 0.050260481973919158, 0.40515218345949928),
    (2.0, 1.0, 1.0, 2.0, 0.522331209124208, 0.65788440688010606),
];

/// ASER at 10 dB for α=1.2, μ=0.9, r̂=2, L=3, G=1: (EGC, MRC).
pub const FROZEN_ASER_10DB: (f64, f64) = (0.00043561302629127257, 0.0013950490957378626);

pub fn spec(a: f64, m: f64, rh: f64, l: u32) -> SumSpec {
    SumSpec::from_parts(a, m, rh, l).unwrap()
}

/// Relative agreement to `sig` significant figures after rounding both.
pub fn same_sig_figs(a: f64, b: f64, sig: i32) -> bool {
    let round = |x: f64| {
        let e = x.abs().log10().floor() as i32;
        let s = 10f64.powi(sig - 1 - e);
        (x * s).round() / s
    };
    (round(a) - round(b)).abs() <= 1e-12 * b.abs()
}

/// Least-squares slope of log10(y) against x / 10 (x in dB).
pub fn db_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    10.0 * sxy / sxx
}
