//! Real gamma-family functions on `x > 0`, the Beta-integral check and the
//! scanners for the three gamma-sequence inequalities used in the bootstrap
//! estimates.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::{graded_unit_integral, GaussLegendre};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// `B_{2k}/(2k(2k−1))` for `k = 1..=8`.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `B_{2k}/(2k)` for `k = 1..=8`.
const DIGAMMA_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

const ZETA_TERMS: usize = 48;

/// `(−1)^k (ζ(k) − 1)/k` for `k = 0..ZETA_TERMS`, entries 0 and 1 unused.
fn zeta_series() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; ZETA_TERMS];
        for (k, slot) in t.iter_mut().enumerate().skip(2) {
            let z = zeta_minus_one(k as f64);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *slot = sign * z / k as f64;
        }
        t
    })
}

/// `ζ(s) − 1` for `s ≥ 2` by direct summation to `j = 19` and an
/// Euler–Maclaurin tail from `j = 20`.
fn zeta_minus_one(s: f64) -> f64 {
    const J: f64 = 20.0;
    // B_{2m}/(2m)!
    const B: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
    ];
    let mut tail = J.powf(1.0 - s) / (s - 1.0) + 0.5 * J.powf(-s);
    let mut rising = s;
    let mut power = J.powf(-s - 1.0);
    for (m, b) in B.iter().enumerate() {
        tail += b * rising * power;
        let k = 2.0 * m as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        power /= J * J;
    }
    let head: f64 = (2..20).rev().map(|j| (j as f64).powf(-s)).sum();
    head + tail
}

/// `lnΓ(1 + z) + ln(1 + z)` for `|z| ≤ 0.5`, i.e. `lnΓ(2 + z)`.
fn ln_gamma_two_plus(z: f64) -> f64 {
    let t = zeta_series();
    let mut acc = 0.0;
    for k in (2..ZETA_TERMS).rev() {
        acc = (acc + t[k]) * z;
    }
    z * (1.0 - EULER_GAMMA + acc)
}

fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * r + c;
    }
    acc / x
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    if x < 1.5 {
        let z = x - 1.0;
        return ln_gamma_two_plus(z) - z.ln_1p();
    }
    if x < 2.5 {
        return ln_gamma_two_plus(x - 2.0);
    }
    if x < 20.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return ln_gamma_two_plus(y - 2.0) + prod.ln();
    }
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + stirling_tail(x)
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// [`log_gamma`] for callers that have already established `x > 0`.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "lgamma({x})");
    ln_gamma_unchecked(x)
}

/// `ln(Γ(x + b)/Γ(x))`, using a Stirling difference when both arguments are
/// large so that no precision is lost to cancellation.
pub fn log_gamma_ratio(x: f64, b: f64) -> Result<f64> {
    if x.is_nan() || b.is_nan() || x <= 0.0 || x + b <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma_ratio needs x > 0 and x + b > 0, got x = {x}, b = {b}"
        )));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let y = x + b;
    if x >= 20.0 && y >= 20.0 {
        return Ok((x - 0.5) * (b / x).ln_1p() + b * y.ln() - b + stirling_tail(y) - stirling_tail(x));
    }
    Ok(ln_gamma_unchecked(y) - ln_gamma_unchecked(x))
}

/// `Γ(x + b)/Γ(x)`.
pub fn gamma_ratio(x: f64, b: f64) -> Result<f64> {
    log_gamma_ratio(x, b).map(f64::exp)
}

/// `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("digamma needs x > 0, got {x}")));
    }
    let mut y = x;
    let mut shift = 0.0;
    while y < 10.0 {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    let mut acc = 0.0;
    for c in DIGAMMA_COEFFS.iter().rev() {
        acc = acc * r + c;
    }
    Ok(shift + y.ln() - 0.5 / y - acc * r)
}

/// Quadrature value and closed form of `∫₀^∞ s^{y−1}(1+s)^{−x−y} ds`.
///
/// The substitution `s = t/(1 − t)` turns the integrand into
/// `t^{y−1}(1 − t)^{x−1}` on `[0, 1]`, integrated with a mesh graded towards
/// both endpoints (`quad_panels/2` panels per half, 20 nodes each).
pub fn beta_check(x: f64, y: f64, quad_panels: usize) -> Result<(f64, f64)> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("beta_check needs x, y > 0, got ({x}, {y})")));
    }
    if quad_panels < 2 {
        return Err(Error::Argument("beta_check needs at least 2 panels".into()));
    }
    let lhs = graded_unit_integral(
        |t, u| ((y - 1.0) * t.ln() + (x - 1.0) * u.ln()).exp(),
        quad_panels / 2,
        20,
    );
    let rhs = (lgamma(x) + lgamma(y) - lgamma(x + y)).exp();
    Ok((lhs, rhs))
}

/// Default panel count for [`beta_check`].
pub const BETA_DEFAULT_PANELS: usize = 128;

/// Which gamma-sequence inequality [`empirical_constant`] scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InequalityKind {
    /// `Σ_{k=2}^{n−2} Γ_k Γ_{n−k} ≤ C Γ_{n−2}`.
    Conv,
    /// `Σ_{j=2}^{k−2} ρ^{j−k+2} Γ_j ≤ C Γ_{k−2}`.
    Rho,
    /// `Σ_{l=2}^{⌊k/2⌋} ξ^{l−2} Γ_{k−2(l−1)} ≤ C Γ_{k−2}`.
    Xi,
}

/// Largest quotient `LHS/Γ_{n−2}` over `4 ≤ n ≤ n_max`, with `Γ_n = Γ(n + b)`.
///
/// `aux` is `ρ` for [`InequalityKind::Rho`] and `ξ` for [`InequalityKind::Xi`].
pub fn empirical_constant(kind: InequalityKind, b: f64, aux: f64, n_max: usize) -> Result<f64> {
    if b.is_nan() || b <= -2.0 {
        return Err(Error::Domain(format!("empirical_constant needs b > −2, got {b}")));
    }
    if kind != InequalityKind::Conv && !(aux > 0.0) {
        return Err(Error::Domain(format!("auxiliary parameter must be positive, got {aux}")));
    }
    if n_max < 4 {
        return Err(Error::Argument(format!("n_max must be at least 4, got {n_max}")));
    }
    let lg: Vec<f64> = (0..=n_max)
        .map(|n| if n >= 2 { lgamma(n as f64 + b) } else { f64::NAN })
        .collect();
    let ln_aux = aux.ln();
    let mut best = f64::NEG_INFINITY;
    for n in 4..=n_max {
        let base = lg[n - 2];
        let q: f64 = match kind {
            InequalityKind::Conv => (2..=n - 2).map(|k| (lg[k] + lg[n - k] - base).exp()).sum(),
            InequalityKind::Rho => (2..=n - 2)
                .map(|j| ((j as f64 - n as f64 + 2.0) * ln_aux + lg[j] - base).exp())
                .sum(),
            InequalityKind::Xi => (2..=n / 2)
                .map(|l| ((l as f64 - 2.0) * ln_aux + lg[n - 2 * (l - 1)] - base).exp())
                .sum(),
        };
        best = best.max(q);
    }
    Ok(best)
}

/// `Γ(x) = ∫₀^∞ t^{x−1}e^{−t} dt` evaluated independently of [`log_gamma`]:
/// the piece on `[0, 1]` by its convergent series `Σ (−1)^k/(k!(x+k))`, the
/// rest by Gauss–Legendre panels of unit width.
pub fn gamma_by_quadrature(x: f64) -> f64 {
    let mut head = 0.0;
    let mut term = 1.0;
    for k in 0..60 {
        if k > 0 {
            term *= -1.0 / k as f64;
        }
        head += term / (x + k as f64);
    }
    let rule = GaussLegendre::new(30);
    let end = (60.0 + 2.0 * x).ceil() as usize;
    let tail: f64 = (1..end)
        .map(|k| rule.integrate(k as f64, k as f64 + 1.0, |t: f64| ((x - 1.0) * t.ln() - t).exp()))
        .sum();
    head + tail
}
