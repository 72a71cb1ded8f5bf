//! Truncated power series in `x` ([`USeries`]) and in `(x, y)` ([`BSeries`]),
//! with the coefficient-level algebra used by every other module.
//!
//! Truncation orders are explicit: an operation that would need a coefficient
//! beyond the stored order returns [`Error::Truncation`] instead of padding.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `Σ_{k=lead}^{order} c_k x^k`, with every coefficient up to `order` known.
#[derive(Clone, Debug, PartialEq)]
pub struct USeries<T> {
    leading_order: usize,
    coeffs: Vec<T>,
    order: usize,
}

impl<T: Scalar> USeries<T> {
    /// Coefficients of `x^lead, x^{lead+1}, …`; missing entries up to `order`
    /// are zero.
    pub fn new(leading_order: usize, coeffs: Vec<T>, order: usize) -> Result<Self> {
        let capacity = (order + 1).saturating_sub(leading_order);
        if coeffs.len() > capacity {
            return Err(Error::Length(format!(
                "{} coefficients starting at x^{leading_order} exceed truncation order {order}",
                coeffs.len()
            )));
        }
        let mut coeffs = coeffs;
        coeffs.resize(capacity, T::zero());
        Ok(Self {
            leading_order: leading_order.min(order + 1),
            coeffs,
            order,
        })
    }

    /// Dense coefficients `c_0, …, c_{len-1}`, truncated at `len − 1`.
    pub fn from_dense(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        let order = coeffs.len() - 1;
        Self {
            leading_order: 0,
            coeffs,
            order,
        }
    }

    pub fn zero(order: usize) -> Self {
        Self::zero_from(0, order)
    }

    /// The zero series with a declared leading order, e.g. `0 ∈ x²ℝ[[x]]`.
    pub fn zero_from(leading_order: usize, order: usize) -> Self {
        let lead = leading_order.min(order + 1);
        Self {
            leading_order: lead,
            coeffs: vec![T::zero(); order + 1 - lead],
            order,
        }
    }

    /// `c·x^k` truncated at `order`.
    pub fn monomial(c: T, k: usize, order: usize) -> Self {
        let mut s = Self::zero_from(k, order);
        if k <= order {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn leading_order(&self) -> usize {
        self.leading_order
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Stored coefficients, `coeffs()[k − leading_order]` being that of `x^k`.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, or `None` beyond the truncation order.
    pub fn get(&self, k: usize) -> Option<T> {
        if k > self.order {
            None
        } else if k < self.leading_order {
            Some(T::zero())
        } else {
            Some(self.coeffs[k - self.leading_order])
        }
    }

    /// Coefficient of `x^k`.
    ///
    /// # Panics
    /// If `k` exceeds the truncation order.
    pub fn coeff(&self, k: usize) -> T {
        self.get(k).unwrap_or_else(|| {
            panic!("coefficient x^{k} requested beyond truncation order {}", self.order)
        })
    }

    /// All coefficients `c_0 … c_order`.
    pub fn dense(&self) -> Vec<T> {
        (0..=self.order).map(|k| self.coeff(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The same series truncated at a lower order.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::Truncation(format!(
                "cannot extend a series known to x^{} up to x^{order}",
                self.order
            )));
        }
        let keep = (order + 1).saturating_sub(self.leading_order);
        Ok(Self {
            leading_order: self.leading_order.min(order + 1),
            coeffs: self.coeffs[..keep].to_vec(),
            order,
        })
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        Self {
            leading_order: self.leading_order + k,
            coeffs: self.coeffs.clone(),
            order: self.order + k,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> USeries<U> {
        USeries {
            leading_order: self.leading_order,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            order: self.order,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// Term-wise sum, truncated at the smaller of the two orders.
    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let lead = self.leading_order.min(other.leading_order).min(order + 1);
        let coeffs = (lead..=order)
            .map(|k| self.coeff(k) + other.coeff(k))
            .collect();
        Self {
            leading_order: lead,
            coeffs,
            order,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.map(|c| -c))
    }
}

/// Highest order up to which `A·B` is determined by the stored coefficients.
fn product_capacity<T: Scalar>(a: &USeries<T>, b: &USeries<T>) -> usize {
    (a.order + b.leading_order).min(b.order + a.leading_order)
}

/// Cauchy product `A·B` up to `x^N`.
///
/// Both factors share the scalar kind by construction of the type parameter.
pub fn cauchy_product<T: Scalar>(a: &USeries<T>, b: &USeries<T>, n: usize) -> Result<USeries<T>> {
    let cap = product_capacity(a, b);
    if n > cap {
        return Err(Error::Truncation(format!(
            "product requested to x^{n} but factors determine it only to x^{cap}"
        )));
    }
    let lead = (a.leading_order + b.leading_order).min(n + 1);
    let mut coeffs = Vec::with_capacity(n + 1 - lead);
    for k in lead..=n {
        let mut acc = T::zero();
        for i in a.leading_order..=(k - b.leading_order) {
            let ai = a.coeffs[i - a.leading_order];
            let bj = b.coeffs[k - i - b.leading_order];
            if !ai.is_zero() && !bj.is_zero() {
                acc = acc + ai * bj;
            }
        }
        coeffs.push(acc);
    }
    Ok(USeries {
        leading_order: lead,
        coeffs,
        order: n,
    })
}

/// `A^l` up to `x^N` by repeated Cauchy products.
pub fn series_power<T: Scalar>(a: &USeries<T>, l: usize, n: usize) -> Result<USeries<T>> {
    if l == 0 {
        return Err(Error::Precondition("series_power needs l ≥ 1".into()));
    }
    let lead = a.leading_order;
    let cap = a.order + (l - 1) * lead;
    if n > cap {
        return Err(Error::Truncation(format!(
            "power {l} requested to x^{n} but the base determines it only to x^{cap}"
        )));
    }
    if l * lead > n {
        return Ok(USeries::zero_from(l * lead, n));
    }
    let mut p = a.truncated(n - (l - 1) * lead)?;
    for i in 2..=l {
        p = cauchy_product(a, &p, n - (l - i) * lead)?;
    }
    Ok(p)
}

/// Bivariate coefficients `f_{n,l}` of `xⁿ yˡ`, bounded by `n ≤ x_order` and
/// `l ≤ y_order`; absent entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BSeries<T> {
    terms: BTreeMap<(usize, usize), T>,
    x_order: usize,
    y_order: usize,
}

impl<T: Scalar> BSeries<T> {
    pub fn new(x_order: usize, y_order: usize) -> Self {
        Self {
            terms: BTreeMap::new(),
            x_order,
            y_order,
        }
    }

    /// Adds `c` to the coefficient of `xⁿ yˡ`.
    pub fn insert(&mut self, n: usize, l: usize, c: T) -> Result<()> {
        if n > self.x_order || l > self.y_order {
            return Err(Error::Length(format!(
                "term x^{n} y^{l} outside declared bounds x^{} y^{}",
                self.x_order, self.y_order
            )));
        }
        let slot = self.terms.entry((n, l)).or_insert_with(T::zero);
        *slot = *slot + c;
        Ok(())
    }

    pub fn get(&self, n: usize, l: usize) -> T {
        self.terms.get(&(n, l)).copied().unwrap_or_else(T::zero)
    }

    pub fn x_order(&self) -> usize {
        self.x_order
    }

    pub fn y_order(&self) -> usize {
        self.y_order
    }

    /// Nonzero terms as `((n, l), c)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&k, &c)| (k, c))
    }

    /// Largest `l` with a nonzero coefficient (0 for a y-free series).
    pub fn max_y_degree(&self) -> usize {
        self.iter().map(|((_, l), _)| l).max().unwrap_or(0)
    }

    /// Coefficient of `yˡ` as a series in `x` truncated at `order`.
    pub fn y_slice(&self, l: usize, order: usize) -> USeries<T> {
        let mut dense = vec![T::zero(); order + 1];
        for ((n, ll), c) in self.iter() {
            if ll == l && n <= order {
                dense[n] = dense[n] + c;
            }
        }
        USeries::from_dense(dense)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> BSeries<U> {
        BSeries {
            terms: self.terms.iter().map(|(&k, &c)| (k, f(c))).collect(),
            x_order: self.x_order,
            y_order: self.y_order,
        }
    }
}

/// Coefficients of `p(x) = f(x, φ(x))` up to `x^N`.
///
/// `φ` must lie in `x²ℝ[[x]]` so that every coefficient of `p` involves
/// finitely many terms of `f`.
pub fn compose_f<T: Scalar>(f: &BSeries<T>, phi: &USeries<T>, n: usize) -> Result<USeries<T>> {
    if phi.leading_order < 2 {
        return Err(Error::Precondition(format!(
            "compose_f needs φ ∈ x²ℝ[[x]], got leading order {}",
            phi.leading_order
        )));
    }
    let lmax = f.max_y_degree();
    let mut out = vec![T::zero(); n + 1];
    let mut power: Option<USeries<T>> = None;
    for l in 0..=lmax {
        if l >= 1 {
            let cap = (phi.order + (l - 1) * phi.leading_order).min(n);
            power = Some(match power {
                None => phi.truncated(cap.min(phi.order))?,
                Some(prev) => cauchy_product(phi, &prev, cap)?,
            });
        }
        for ((m, ll), c) in f.iter() {
            if ll != l || m > n {
                continue;
            }
            if l == 0 {
                out[m] = out[m] + c;
                continue;
            }
            let pw = power.as_ref().expect("power computed for l ≥ 1");
            if n - m > pw.order {
                return Err(Error::Truncation(format!(
                    "term x^{m} y^{l} needs φ^{l} to x^{} but it is known only to x^{}",
                    n - m,
                    pw.order
                )));
            }
            for k in pw.leading_order..=(n - m) {
                let v = pw.coeff(k);
                if !v.is_zero() {
                    out[m + k] = out[m + k] + c * v;
                }
            }
        }
    }
    Ok(USeries::from_dense(out))
}

/// `q(x) = exp(∫₀ˣ s⁻² f₁(s) ds)` up to `x^N`, so that `q(0) = 1` and
/// `x² q' = f₁ q`.
pub fn exp_integral_series<T: Scalar>(f1: &USeries<T>, n: usize) -> Result<USeries<T>> {
    if f1.leading_order < 2 && !f1.coeffs.iter().take(2 - f1.leading_order).all(|c| c.is_zero()) {
        return Err(Error::Precondition(
            "exp_integral_series needs f₁ ∈ x²ℝ[[x]] (integrand s⁻²f₁ must be analytic)".into(),
        ));
    }
    if f1.order < n + 1 {
        return Err(Error::Truncation(format!(
            "q to x^{n} needs f₁ to x^{} but it is known only to x^{}",
            n + 1,
            f1.order
        )));
    }
    // With g = ∫ s⁻² f₁, q' = g' q gives n q_n = Σ_{k=1}^{n} k g_k q_{n−k} and k g_k = f₁_{k+1}.
    let mut q = Vec::with_capacity(n + 1);
    q.push(T::one());
    for m in 1..=n {
        let mut acc = T::zero();
        for k in 1..=m {
            let c = f1.coeff(k + 1);
            if !c.is_zero() {
                acc = acc + c * q[m - k];
            }
        }
        q.push(acc / T::from_f64(m as f64));
    }
    Ok(USeries::from_dense(q))
}

/// Borel transform on coefficients: `Φ_{n−1} = φₙ/(n−1)!`.
pub fn borel_coeffs<T: Scalar>(phi: &USeries<T>) -> Result<USeries<T>> {
    if phi.leading_order == 0 && !phi.coeffs[0].is_zero() {
        return Err(Error::Precondition(
            "Borel transform is defined on xℝ[[x]]; constant term present".into(),
        ));
    }
    if phi.order == 0 {
        return Err(Error::Truncation("series holds no coefficient beyond x^0".into()));
    }
    let fact = T::factorials(phi.order);
    let lead = phi.leading_order.max(1);
    let coeffs = (lead..=phi.order)
        .map(|k| {
            let c = phi.coeff(k);
            if c.is_zero() {
                c
            } else {
                c / fact[k - 1]
            }
        })
        .collect();
    USeries::new(lead - 1, coeffs, phi.order - 1)
}

/// Inverse of [`borel_coeffs`]: `φ_{n+1} = n!·Φₙ`.
pub fn inverse_borel_coeffs<T: Scalar>(big_phi: &USeries<T>) -> Result<USeries<T>> {
    let fact = T::factorials(big_phi.order);
    let coeffs = (big_phi.leading_order..=big_phi.order)
        .map(|k| {
            let c = big_phi.coeff(k);
            if c.is_zero() {
                c
            } else {
                c * fact[k]
            }
        })
        .collect();
    USeries::new(big_phi.leading_order + 1, coeffs, big_phi.order + 1)
}
