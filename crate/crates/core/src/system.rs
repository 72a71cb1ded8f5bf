//! Saddle-node systems `x²y' = −(1 + ax)y + f(x, y)`, their JSON file format,
//! and the reduction to the normal form
//! `x²y' = −(1 + ax)y + x²f₀(x) + x²y²f₂(x, y)` with `a ≥ 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, SignedLog};
use crate::series::{cauchy_product, exp_integral_series, BSeries, USeries};

/// A system in the prepared form with `f(0,0) = f_y(0,0) = f_xy(0,0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSystem {
    a: f64,
    f: BSeries<f64>,
}

impl RawSystem {
    /// Validates that the coefficients of `1`, `y` and `xy` in `f` vanish.
    pub fn new(a: f64, f: BSeries<f64>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::Validation(format!("a must be finite, got {a}")));
        }
        for ((n, l), c) in f.iter() {
            if !c.is_finite() {
                return Err(Error::Validation(format!("coefficient f[{n},{l}] is not finite")));
            }
        }
        for (n, l, what) in [(0, 0, "f(0,0)"), (0, 1, "∂f/∂y(0,0)"), (1, 1, "∂²f/∂x∂y(0,0)")] {
            let c = f.get(n, l);
            if c != 0.0 {
                return Err(Error::Validation(format!(
                    "coefficient f[{n},{l}] = {c} must vanish ({what} = 0)"
                )));
            }
        }
        Ok(Self { a, f })
    }

    /// Builds a system from `(n, l, c)` triples for `c·xⁿyˡ`.
    pub fn from_terms(a: f64, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let nx = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let ny = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let mut f = BSeries::new(nx, ny);
        for &(n, l, c) in terms {
            f.insert(n, l, c)?;
        }
        Self::new(a, f)
    }

    /// `x²y' = −(1 + ax)y + bx² + y²`.
    pub fn riccati(a: f64, b: f64) -> Self {
        Self::from_terms(a, &[(2, 0, b), (0, 2, 1.0)]).expect("Riccati system is valid")
    }

    /// `x²y' = −y + x`, whose center manifold is `Σ (−1)^{n−1}(n−1)! xⁿ`.
    pub fn euler() -> Self {
        Self::from_terms(0.0, &[(1, 0, 1.0)]).expect("Euler system is valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `a − 2f₀₂f₁₀`, the coefficient of `xy` after translating by `φ₁x`.
    pub fn effective_a(&self) -> f64 {
        self.a - 2.0 * self.f.get(0, 2) * self.f.get(1, 0)
    }

    /// Blow-up exponent `M` used by [`normalize`].
    pub fn blow_up_exponent(&self) -> usize {
        blow_up_exponent(self.effective_a())
    }

    pub fn f(&self) -> &BSeries<f64> {
        &self.f
    }

    /// Nonzero terms as `(n, l, c)`.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        self.f.iter().map(|((n, l), c)| (n, l, c)).collect()
    }
}

/// A system `x²y' = −(1 + ax)y + x²f₀(x) + x²y²f₂(x, y)` with `a ≥ 2`.
///
/// Coefficients are stored with full powers: `g0[n]` multiplies `xⁿ` (so
/// `n ≥ 2`), and the entry `(n, l)` of `g2` multiplies `xⁿyˡ` with `n ≥ 2`,
/// `l ≥ 2`. `order` is the truncation order in `x` when the system came out
/// of a finite-order computation, and `None` for exactly polynomial data.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSystem {
    a: f64,
    g0: Vec<f64>,
    g2: Vec<(usize, usize, f64)>,
    order: Option<usize>,
}

impl NormalizedSystem {
    /// Builds a normalized system from full-power coefficients.
    pub fn new(
        a: f64,
        g0: &[(usize, f64)],
        g2: &[(usize, usize, f64)],
        order: Option<usize>,
    ) -> Result<Self> {
        if !(a >= 2.0) || !a.is_finite() {
            return Err(Error::Validation(format!("normalized systems need a ≥ 2, got {a}")));
        }
        let mut dense = Vec::new();
        for &(n, c) in g0 {
            if n < 2 {
                return Err(Error::Validation(format!("f0 term x^{n} must carry the factor x²")));
            }
            if !c.is_finite() {
                return Err(Error::Validation(format!("f0 coefficient of x^{n} is not finite")));
            }
            if dense.len() <= n {
                dense.resize(n + 1, 0.0);
            }
            dense[n] += c;
        }
        let mut terms = Vec::new();
        for &(n, l, c) in g2 {
            if n < 2 || l < 2 {
                return Err(Error::Validation(format!(
                    "f2 term x^{n} y^{l} must carry the factor x²y²"
                )));
            }
            if !c.is_finite() {
                return Err(Error::Validation(format!("f2 coefficient of x^{n} y^{l} is not finite")));
            }
            if c != 0.0 {
                terms.push((n, l, c));
            }
        }
        terms.sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
        Ok(Self {
            a,
            g0: dense,
            g2: terms,
            order,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    /// Coefficient of `xⁿ` in `x²f₀(x)`.
    pub fn g0(&self, n: usize) -> f64 {
        self.g0.get(n).copied().unwrap_or(0.0)
    }

    /// Nonzero `(n, l, c)` for `c·xⁿyˡ` in `x²y²f₂`, sorted by `l` then `n`.
    pub fn g2_terms(&self) -> &[(usize, usize, f64)] {
        &self.g2
    }

    /// Largest power of `y` present (0 for a linear system).
    pub fn max_y_degree(&self) -> usize {
        self.g2.iter().map(|t| t.1).max().unwrap_or(0)
    }

    /// The same system viewed as a raw system `−(1 + ax)y + f`.
    pub fn to_raw(&self) -> RawSystem {
        let mut terms: Vec<(usize, usize, f64)> = self
            .g0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(n, &c)| (n, 0, c))
            .collect();
        terms.extend_from_slice(&self.g2);
        RawSystem::from_terms(self.a, &terms).expect("normalized terms satisfy the raw constraints")
    }

    /// Bivariate coefficients of the whole nonlinearity `x²f₀ + x²y²f₂`.
    pub fn nonlinearity(&self) -> BSeries<f64> {
        self.to_raw().f
    }
}

/// Bookkeeping needed to map results of the normalized system back:
/// `y = Σ_{n ≤ M+1} φₙxⁿ + x^M q(x) ỹ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    /// Blow-up exponent `M = max(2, 2 + ⌈−a_effective⌉)`.
    pub m: usize,
    /// `φ₁ … φ_{M+1}` of the original system.
    pub prefix: Vec<f64>,
    /// Coefficients `q₀ = 1, q₁, …` of the integrating factor.
    pub q: Vec<f64>,
    pub a_original: f64,
    /// `a` after translation: `a − 2 f₀₂ φ₁`, the growth exponent of `φₙ`.
    pub a_effective: f64,
    /// `a_effective + M ≥ 2`.
    pub a_normalized: f64,
}

impl TransformRecord {
    /// `(−1)^M`: the rescaled limit of the original system equals this sign
    /// times that of the normalized one.
    pub fn limit_sign(&self) -> f64 {
        if self.m % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Record with `M = 0`, `q = 1` and empty prefix.
    #[cfg(test)]
    pub(crate) fn identity(order: usize, a: f64) -> Self {
        let mut q = vec![0.0; order + 1];
        q[0] = 1.0;
        Self {
            m: 0,
            prefix: vec![0.0],
            q,
            a_original: a,
            a_effective: a,
            a_normalized: a,
        }
    }
}

/// Blow-up exponent `max(2, 2 + ⌈−a⌉)`.
pub fn blow_up_exponent(a: f64) -> usize {
    let c = (-a).ceil();
    (2.0 + c).max(2.0) as usize
}

/// Working arrays of the coefficient recursion
/// `φₙ = [f(x, φ)]ₙ − (n − 1 + a)φ_{n−1}`.
struct Recursion<T> {
    a: f64,
    terms: Vec<(usize, usize, f64)>,
    phi: Vec<T>,
    // pow[l][k] = (φˡ)_k for l ≥ 1.
    pow: Vec<Vec<T>>,
    flagged: usize,
}

impl<T: Scalar> Recursion<T> {
    fn new(sys: &RawSystem, n_max: usize) -> Self {
        let lmax = sys.f.max_y_degree();
        Self {
            a: sys.a,
            terms: sys.f.iter().map(|((n, l), c)| (n, l, c)).collect(),
            phi: vec![T::zero(); n_max + 1],
            pow: vec![vec![T::zero(); n_max + 1]; lmax + 1],
            flagged: 0,
        }
    }

    fn convert<U: Scalar>(&self) -> Recursion<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::from_f64(x.to_f64())).collect();
        Recursion {
            a: self.a,
            terms: self.terms.clone(),
            phi: conv(&self.phi),
            pow: self.pow.iter().map(conv).collect(),
            flagged: self.flagged,
        }
    }

    /// Computes `φₙ` and `(φˡ)ₙ`; returns the largest magnitude produced.
    fn step(&mut self, n: usize) -> f64 {
        let lmax = self.pow.len() - 1;
        let mut biggest = 0.0f64;
        for l in 2..=lmax {
            let mut acc = T::zero();
            for i in 1..=n.saturating_sub(l - 1) {
                let (x, y) = (self.phi[i], self.pow[l - 1][n - i]);
                if !x.is_zero() && !y.is_zero() {
                    acc = acc + x * y;
                }
            }
            self.pow[l][n] = acc;
            biggest = biggest.max(acc.to_f64().abs());
        }
        let mut p = T::zero();
        for &(m, l, c) in &self.terms {
            if m > n {
                continue;
            }
            if l == 0 {
                if m == n {
                    p = p + T::from_f64(c);
                }
            } else {
                let v = self.pow[l][n - m];
                if !v.is_zero() {
                    p = p + T::from_f64(c) * v;
                }
            }
        }
        let lin = T::from_f64(n as f64 - 1.0 + self.a) * self.phi[n - 1];
        let (value, cancelled) = p.add_flagged(-lin);
        self.flagged += usize::from(cancelled);
        self.phi[n] = value;
        if lmax >= 1 {
            self.pow[1][n] = value;
        }
        biggest.max(value.to_f64().abs()).max(p.to_f64().abs()).max(lin.to_f64().abs())
    }
}

/// Magnitude beyond which the recursion leaves plain floating point.
const FLOAT_RANGE_LIMIT: f64 = 1e200;

/// `φ₀ = 0, φ₁, …, φ_N` by the coefficient recursion, together with the
/// number of additions flagged for catastrophic cancellation.
///
/// The recursion runs in `f64` while every intermediate stays below
/// [`FLOAT_RANGE_LIMIT`] and continues in [`SignedLog`] from the first step
/// that would exceed it.
pub(crate) fn raw_recursion(sys: &RawSystem, n_max: usize) -> (Vec<SignedLog>, usize) {
    let mut float = Recursion::<f64>::new(sys, n_max);
    for n in 1..=n_max {
        let peak = float.step(n);
        if !(peak < FLOAT_RANGE_LIMIT) {
            let mut wide: Recursion<SignedLog> = float.convert();
            for k in n..=n_max {
                wide.step(k);
            }
            return (wide.phi, wide.flagged);
        }
    }
    let phi = float.phi.iter().map(|&x| SignedLog::from_f64(x)).collect();
    (phi, float.flagged)
}

/// `φ₁ … φ_K` of the formal center manifold, by the coefficient recursion.
pub fn low_order_prefix(sys: &RawSystem, k: usize) -> Vec<f64> {
    let mut rec = Recursion::<f64>::new(sys, k);
    for n in 1..=k {
        rec.step(n);
    }
    rec.phi[1..].to_vec()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Reduces a raw system to the normal form, with all re-expansions carried to
/// order `N` in `x`.
///
/// The pipeline translates by the prefix `φ₁ … φ_{M+1}`, removes the
/// remaining linear-in-`y` terms with the integrating factor
/// `q = exp(∫ s⁻² f₁)`, and blows up `ỹ = x^M y̌`.
pub fn normalize(sys: &RawSystem, n: usize) -> Result<(NormalizedSystem, TransformRecord)> {
    let a = sys.a;
    let a_eff = sys.effective_a();
    let m = blow_up_exponent(a_eff);
    if n < m + 4 {
        return Err(Error::Precondition(format!(
            "normalization to order {n} needs N ≥ M + 4 = {}",
            m + 4
        )));
    }
    let prefix = low_order_prefix(sys, m + 1);
    let w = n + m + 1;
    let p = USeries::new(1, prefix.clone(), w)?;
    let lmax = sys.f.max_y_degree();

    // Powers P^j, j = 0..=lmax, to order w.
    let mut ppow = vec![USeries::monomial(1.0, 0, w)];
    for j in 1..=lmax {
        let next = cauchy_product(&p, &ppow[j - 1], w)?;
        ppow.push(next);
    }

    // F_k = Σ_{l ≥ k} f_{m,l} C(l, k) x^m P^{l−k}.
    let mut big_f: Vec<Vec<f64>> = vec![vec![0.0; w + 1]; lmax + 1];
    for ((mm, l), c) in sys.f.iter() {
        for (k, fk) in big_f.iter_mut().enumerate().take(l + 1) {
            let coef = c * binomial(l, k);
            let pw = &ppow[l - k];
            for j in 0..=w.saturating_sub(mm) {
                let v = pw.coeff(j);
                if v != 0.0 {
                    fk[mm + j] += coef * v;
                }
            }
        }
    }
    // Residual of the translation: F₀ − (1 + ax)P − x²P' = O(x^{M+2}).
    let scale = big_f[0].iter().chain(prefix.iter()).fold(1.0f64, |s, v| s.max(v.abs()));
    for j in 1..=w {
        let pj = p.coeff(j);
        let pj1 = p.coeff(j - 1);
        big_f[0][j] -= pj + a * pj1 + (j as f64 - 1.0) * pj1;
    }
    for j in 0..=(m + 1) {
        debug_assert!(
            big_f[0][j].abs() <= 1e-8 * scale * (1.0 + j as f64).powi(2),
            "translation residual at x^{j}: {}",
            big_f[0][j]
        );
        big_f[0][j] = 0.0;
    }
    // f₁ = F₁ without its x-linear part, which is absorbed into a_eff.
    let mut f1 = if lmax >= 1 { big_f[1].clone() } else { vec![0.0; w + 1] };
    f1[0] = 0.0;
    f1[1] = 0.0;
    let f1 = USeries::from_dense(f1);
    let q = exp_integral_series(&f1, w - 1)?;
    let qinv = exp_integral_series(&f1.scale(-1.0), w - 1)?;

    let g_order = w - 1;
    let f0 = USeries::from_dense(big_f[0][..=g_order].to_vec());
    let g0_full = cauchy_product(&f0, &qinv, g_order)?;
    let g0: Vec<(usize, f64)> = (2..=n)
        .map(|k| (k, g0_full.coeff(k + m)))
        .filter(|t| t.1 != 0.0)
        .collect();

    let mut g2 = Vec::new();
    let mut qpow = q.clone();
    for (k, fk_dense) in big_f.iter().enumerate().skip(2) {
        if k > 2 {
            qpow = cauchy_product(&qpow, &q, g_order)?;
        }
        let fk = USeries::from_dense(fk_dense[..=g_order].to_vec());
        let gk = cauchy_product(&fk, &qpow, g_order)?;
        let shift = (k - 1) * m;
        for nn in shift.max(2)..=n {
            let c = gk.coeff(nn - shift);
            if c != 0.0 {
                g2.push((nn, k, c));
            }
        }
    }
    let a_norm = a_eff + m as f64;
    let normalized = NormalizedSystem::new(a_norm, &g0, &g2, Some(n))?;
    let record = TransformRecord {
        m,
        prefix,
        q: q.dense(),
        a_original: a,
        a_effective: a_eff,
        a_normalized: a_norm,
    };
    Ok((normalized, record))
}

/// Coefficients of `y = Σ_{n≤M+1} φₙxⁿ + x^M q(x) φ̃(x)` up to `x^N`.
pub fn pullback_expansion<T: Scalar>(
    tilde_phi: &USeries<T>,
    rec: &TransformRecord,
    n: usize,
) -> Result<USeries<T>> {
    if tilde_phi.leading_order() < 2 && !tilde_phi.is_zero() {
        return Err(Error::Precondition(format!(
            "pullback needs φ̃ ∈ x²ℝ[[x]], got leading order {}",
            tilde_phi.leading_order()
        )));
    }
    let m = rec.m;
    if n > tilde_phi.order() + m {
        return Err(Error::Length(format!(
            "pullback to x^{n} needs φ̃ to x^{} but it is known to x^{}",
            n - m,
            tilde_phi.order()
        )));
    }
    if n >= m + 2 && rec.q.len() < n - m - 1 {
        return Err(Error::Length(format!(
            "pullback to x^{n} needs q to x^{} but the record holds x^{}",
            n - m - 2,
            rec.q.len() as isize - 1
        )));
    }
    let q: Vec<T> = rec.q.iter().map(|&c| T::from_f64(c)).collect();
    let mut out = vec![T::zero(); n + 1];
    for (k, &c) in rec.prefix.iter().enumerate() {
        if k + 1 <= n {
            out[k + 1] = T::from_f64(c);
        }
    }
    for (k, slot) in out.iter_mut().enumerate().skip(m + 2) {
        let mut acc = T::zero();
        for j in 2..=(k - m) {
            let (x, y) = (q[k - m - j], tilde_phi.coeff(j));
            if !x.is_zero() && !y.is_zero() {
                acc = acc + x * y;
            }
        }
        *slot = *slot + acc;
    }
    USeries::new(0, out, n)
}

/// A parsed system file.
#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Raw(RawSystem),
    Normalized(NormalizedSystem),
}

impl System {
    pub fn a(&self) -> f64 {
        match self {
            System::Raw(s) => s.a,
            System::Normalized(s) => s.a,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Document {
    Raw {
        a: f64,
        #[serde(default)]
        f: Vec<(usize, usize, f64)>,
        #[serde(default, skip_serializing)]
        meta: Option<serde_json::Value>,
    },
    Normalized {
        a: f64,
        #[serde(default)]
        f0: Vec<(usize, f64)>,
        #[serde(default)]
        f2: Vec<(usize, usize, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transform: Option<TransformRecord>,
        #[serde(default, skip_serializing)]
        meta: Option<serde_json::Value>,
    },
    Riccati {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing)]
        meta: Option<serde_json::Value>,
    },
}

/// Parses a system file together with an embedded transform record, if any.
pub fn parse_document(text: &str) -> Result<(System, Option<TransformRecord>)> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    match doc {
        Document::Raw { a, f, .. } => Ok((System::Raw(RawSystem::from_terms(a, &f)?), None)),
        Document::Riccati { a, b, .. } => {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Validation("riccati parameters must be finite".into()));
            }
            Ok((System::Raw(RawSystem::riccati(a, b)), None))
        }
        Document::Normalized {
            a,
            f0,
            f2,
            order,
            transform,
            ..
        } => {
            let g0: Vec<(usize, f64)> = f0.iter().map(|&(n, c)| (n + 2, c)).collect();
            let g2: Vec<(usize, usize, f64)> = f2.iter().map(|&(n, l, c)| (n + 2, l, c)).collect();
            for &(_, l, _) in &f2 {
                if l < 2 {
                    return Err(Error::Validation(format!("f2 entries need l ≥ 2, got l = {l}")));
                }
            }
            let sys = NormalizedSystem::new(a, &g0, &g2, order)?;
            Ok((System::Normalized(sys), transform))
        }
    }
}

/// Parses a system file (`kind` = `raw`, `normalized` or `riccati`).
/// An optional `meta` object is accepted and ignored.
///
/// In `normalized` documents `f0` holds `[n, c]` for the term `c·x^{n+2}` and
/// `f2` holds `[n, l, c]` for `c·x^{n+2}yˡ` with `l ≥ 2`.
pub fn parse_system(text: &str) -> Result<System> {
    parse_document(text).map(|(s, _)| s)
}

/// Serializes a raw system as a `raw` document.
pub fn raw_to_json(sys: &RawSystem) -> String {
    let doc = Document::Raw {
        a: sys.a,
        f: sys.terms(),
        meta: None,
    };
    serde_json::to_string_pretty(&doc).expect("documents serialize")
}

/// Serializes a normalized system, optionally with its transform record.
pub fn normalized_to_json(sys: &NormalizedSystem, transform: Option<&TransformRecord>) -> String {
    let doc = Document::Normalized {
        a: sys.a,
        f0: sys
            .g0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(n, &c)| (n - 2, c))
            .collect(),
        f2: sys.g2.iter().map(|&(n, l, c)| (n - 2, l, c)).collect(),
        order: sys.order,
        transform: transform.cloned(),
        meta: None,
    };
    serde_json::to_string_pretty(&doc).expect("documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euler_prefix() {
        let p = low_order_prefix(&RawSystem::euler(), 6);
        assert_eq!(p, vec![1.0, -1.0, 2.0, -6.0, 24.0, -120.0]);
        let zero = RawSystem::from_terms(1.3, &[]).unwrap();
        assert!(low_order_prefix(&zero, 10).iter().all(|&c| c == 0.0));
    }

    #[test]
    fn riccati_prefix_by_direct_recursion() {
        let (a, b) = (-3.0, 1.0);
        let p = low_order_prefix(&RawSystem::riccati(a, b), 30);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1], 1.0);
        assert_eq!(p[2], 1.0);
        let mut phi = vec![0.0; 31];
        for n in 2..=30usize {
            let conv: f64 = (2..=n.saturating_sub(2)).map(|i| phi[i] * phi[n - i]).sum();
            let pn = if n == 2 { b } else { 0.0 } + conv;
            phi[n] = pn - (n as f64 - 1.0 + a) * phi[n - 1];
        }
        for n in 1..=30 {
            assert_eq!(p[n - 1], phi[n], "n = {n}");
        }
    }

    #[test]
    fn parse_examples() {
        let s = parse_system(r#"{"kind": "riccati", "a": -2, "b": 0}"#).unwrap();
        match s {
            System::Raw(r) => {
                assert_eq!(r.a(), -2.0);
                assert_eq!(r.f().get(0, 2), 1.0);
                assert_eq!(r.f().get(0, 0), 0.0);
            }
            _ => panic!("expected a raw system"),
        }
        let bad = parse_system(r#"{"kind": "raw", "a": 1, "f": [[0, 1, 0.5]]}"#);
        match bad {
            Err(Error::Validation(msg)) => assert!(msg.contains("f[0,1]"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_system(r#"{"kind": "normalized", "a": 0.5, "f0": [[0, 1]]}"#),
            Err(Error::Validation(_))
        ));
        match parse_system("{\n\"kind\": \"raw\",\n\"a\": 1,\n\"f\": [[1, 0, ]]\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_system(r#"{"kind": "raw", "a": 1, "g": []}"#), Err(Error::Parse { .. })));
    }

    #[test]
    fn normalized_round_trip_keeps_17_digits() {
        let sys = NormalizedSystem::new(
            2.718281828459045,
            &[(2, 0.1), (5, -1.0 / 3.0)],
            &[(3, 2, std::f64::consts::PI), (2, 3, 1e-300)],
            Some(40),
        )
        .unwrap();
        let text = normalized_to_json(&sys, None);
        match parse_system(&text).unwrap() {
            System::Normalized(back) => assert_eq!(back, sys),
            _ => panic!(),
        }
        let raw = RawSystem::from_terms(-0.1, &[(2, 0, 0.30000000000000004), (1, 2, -7.0)]).unwrap();
        match parse_system(&raw_to_json(&raw)).unwrap() {
            System::Raw(back) => assert_eq!(back, raw),
            _ => panic!(),
        }
    }

    #[test]
    fn normalize_examples() {
        let (n, rec) = normalize(&RawSystem::riccati(0.5, 1.0), 40).unwrap();
        assert_eq!(rec.m, 2);
        assert_eq!(n.a(), 2.5);
        let (n, rec) = normalize(&RawSystem::riccati(-3.2, 1.0), 40).unwrap();
        assert_eq!(rec.m, 6);
        assert!((n.a() - 2.8).abs() < 1e-15);
        let already = RawSystem::from_terms(3.0, &[(2, 0, 1.0), (2, 2, 0.5)]).unwrap();
        let (n, rec) = normalize(&already, 20).unwrap();
        assert_eq!(rec.m, 2);
        assert_eq!(n.a(), 5.0);
        assert_eq!(rec.q[0], 1.0);
        assert!(matches!(normalize(&already, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn blow_up_exponents() {
        assert_eq!(blow_up_exponent(0.5), 2);
        assert_eq!(blow_up_exponent(3.0), 2);
        assert_eq!(blow_up_exponent(-0.5), 3);
        assert_eq!(blow_up_exponent(-2.0), 4);
        assert_eq!(blow_up_exponent(-2.5), 5);
        assert_eq!(blow_up_exponent(-3.2), 6);
    }

    #[test]
    fn identity_record_pullback() {
        let c: Vec<f64> = (2..=12).map(|k| (k as f64).sin()).collect();
        let phi = USeries::new(2, c, 12).unwrap();
        let rec = TransformRecord::identity(12, 3.0);
        let back = pullback_expansion(&phi, &rec, 12).unwrap();
        for k in 0..=12 {
            assert_eq!(back.coeff(k), phi.coeff(k));
        }
    }

    #[test]
    fn prefix_only_pullback() {
        let (_, rec) = normalize(&RawSystem::riccati(0.5, 1.0), 30).unwrap();
        let zero = USeries::<f64>::zero_from(2, 20);
        let back = pullback_expansion(&zero, &rec, 20).unwrap();
        for k in 1..=20 {
            let want = if k <= rec.m + 1 { rec.prefix[k - 1] } else { 0.0 };
            assert_eq!(back.coeff(k), want);
        }
        let short = USeries::<f64>::zero_from(2, 5);
        assert!(matches!(pullback_expansion(&short, &rec, 20), Err(Error::Length(_))));
    }

    /// φ̃ of a normalized system by its own raw recursion, as a series.
    fn normalized_phi(sys: &NormalizedSystem, n: usize) -> USeries<SignedLog> {
        let (phi, _) = raw_recursion(&sys.to_raw(), n);
        USeries::new(2, phi[2..].to_vec(), n).unwrap()
    }

    fn assert_pullback_matches(raw: &RawSystem, k: usize, tol: f64) {
        let (norm, rec) = normalize(raw, k).unwrap();
        let tilde = normalized_phi(&norm, k - rec.m);
        let back = pullback_expansion(&tilde, &rec, k).unwrap();
        let direct = low_order_prefix(raw, k);
        for n in 1..=k {
            let want = direct[n - 1];
            let got = back.coeff(n).to_f64();
            let scale = want.abs().max(1e-300);
            assert!(
                (got - want).abs() <= tol * scale || (got - want).abs() < 1e-13,
                "n = {n}: {got} vs {want} (a = {}, terms {:?})",
                raw.a(),
                raw.terms()
            );
        }
    }

    #[test]
    fn riccati_pullback_agrees_with_direct_prefix() {
        assert_pullback_matches(&RawSystem::riccati(0.5, 1.0), 40, 1e-10);
        assert_pullback_matches(&RawSystem::riccati(-3.2, 0.7), 40, 1e-10);
        assert_pullback_matches(&RawSystem::riccati(-2.5, 0.5), 12, 1e-10);
    }

    #[test]
    fn effective_a_accounts_for_translation() {
        let raw = RawSystem::from_terms(1.0, &[(1, 0, 0.5), (0, 2, 0.8)]).unwrap();
        let (norm, rec) = normalize(&raw, 20).unwrap();
        assert!((rec.a_effective - (1.0 - 2.0 * 0.8 * 0.5)).abs() < 1e-15);
        assert!((norm.a() - rec.a_effective - rec.m as f64).abs() < 1e-15);
        assert_pullback_matches(&raw, 30, 1e-9);
    }

    fn arb_raw() -> impl Strategy<Value = RawSystem> {
        (
            -4.0f64..4.0,
            proptest::collection::vec((0usize..4, 0usize..4, -0.5f64..0.5), 1..7),
        )
            .prop_map(|(a, terms)| {
                let terms: Vec<_> = terms
                    .into_iter()
                    .filter(|&(n, l, _)| !matches!((n, l), (0, 0) | (0, 1) | (1, 1)))
                    .collect();
                RawSystem::from_terms(a, &terms).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn normalization_reaches_a_at_least_two(raw in arb_raw()) {
            let (norm, rec) = normalize(&raw, 24).unwrap();
            prop_assert!(norm.a() >= 2.0);
            prop_assert_eq!(rec.q[0], 1.0);
            prop_assert_eq!(rec.prefix.len(), rec.m + 1);
        }

        #[test]
        fn pullback_reproduces_prefix(raw in arb_raw()) {
            assert_pullback_matches(&raw, 30, 1e-9);
        }
    }
}
