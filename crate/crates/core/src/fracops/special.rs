//! Gamma and Beta functions plus the small amount of quadrature machinery the
//! product-integration rules need.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * lanczos(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Γ(x) for x > 0 (Lanczos, g = 7, nine coefficients).
///
/// Γ(1) and Γ(2) are returned exactly so that order-one kernels carry no
/// rounding from the normalisation.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(1.0);
    }
    Ok(lanczos(x))
}

/// Γ for arguments the caller has already validated as positive.
pub(crate) fn gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x == 1.0 || x == 2.0 {
        1.0
    } else {
        lanczos(x)
    }
}

/// B(p, q) = Γ(p)Γ(q)/Γ(p+q).
pub fn beta_fn(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::Domain(format!(
            "beta requires positive arguments, got ({p}, {q})"
        )));
    }
    Ok(beta(p, q))
}

pub(crate) fn beta(p: f64, q: f64) -> f64 {
    gamma(p) * gamma(q) / gamma(p + q)
}

/// Power series of the lower incomplete Beta integral, valid for x <= 1/2.
fn inc_beta_series(x: f64, p: f64, q: f64) -> f64 {
    // ∫_0^x τ^{p-1}(1-τ)^{q-1} dτ = x^p Σ_k (1-q)_k/k! · x^k/(p+k)
    let mut coeff = 1.0;
    let mut xk = 1.0;
    let mut sum = 1.0 / p;
    for k in 1..400 {
        let kf = k as f64;
        coeff *= (kf - q) / kf;
        xk *= x;
        let term = coeff * xk / (p + kf);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    x.powf(p) * sum
}

/// Unnormalised lower incomplete Beta integral ∫_0^x τ^{p-1}(1-τ)^{q-1} dτ for
/// x in [0, 1] and p, q > 0.
pub fn incomplete_beta(x: f64, p: f64, q: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        beta(p, q)
    } else if x <= 0.5 {
        inc_beta_series(x, p, q)
    } else {
        beta(p, q) - inc_beta_series(1.0 - x, q, p)
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the three-term recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached Gauss-Legendre rule; `m` must be one of the sizes used by the
/// product rules.
pub(crate) fn cached_rule(m: usize) -> &'static (Vec<f64>, Vec<f64>) {
    type Rules = Vec<(usize, (Vec<f64>, Vec<f64>))>;
    static RULES: OnceLock<Rules> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        [3usize, 4, 5, 6, 8, 10, 20]
            .iter()
            .map(|&m| (m, gauss_legendre(m)))
            .collect()
    });
    &rules
        .iter()
        .find(|(size, _)| *size == m)
        .expect("unsupported Gauss-Legendre size")
        .1
}
