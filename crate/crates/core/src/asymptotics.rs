//! Center-manifold coefficients `φₙ` and the rescaled partial sums
//! `sₙ = (−1)ⁿφₙ/Γ(n + a)` whose limit is `S∞`.
//!
//! Two recursions are provided. [`expand_raw`] runs `φₙ + (n − 1 + a)φ_{n−1} = pₙ`
//! in [`SignedLog`] arithmetic for any raw system. [`expand_rescaled`] works on
//! normalized systems directly with the differences
//! `sₙ − s_{n−1} = (−1)ⁿpₙ/Γ(n + a)`, where every product of coefficients is
//! formed in rescaled coordinates and only gamma ratios `≤ 1` appear, so it
//! never overflows.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::SignedLog;
use crate::special::lgamma;
use crate::system::{normalize, raw_recursion, NormalizedSystem, RawSystem, TransformRecord};

/// Coefficients and rescaled partial sums up to order `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    a: f64,
    phi: Vec<SignedLog>,
    s: Vec<Option<f64>>,
    cancellations: usize,
    noise_floor: f64,
}

impl Expansion {
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Truncation order `N`.
    pub fn n_max(&self) -> usize {
        self.phi.len() - 1
    }

    /// `φₙ` for `0 ≤ n ≤ N` (with `φ₀ = 0`).
    pub fn phi(&self, n: usize) -> SignedLog {
        self.phi[n]
    }

    pub fn phis(&self) -> &[SignedLog] {
        &self.phi
    }

    /// `sₙ`, or `None` where `Γ(n + a)` has a non-positive argument.
    pub fn s(&self, n: usize) -> Option<f64> {
        self.s.get(n).copied().flatten()
    }

    /// `sₙ − s_{n−1}` where both are defined.
    pub fn ds(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        Some(self.s(n)? - self.s(n - 1)?)
    }

    /// Number of opposite-sign additions that lost more than twelve digits.
    pub fn cancellations(&self) -> usize {
        self.cancellations
    }

    /// Accumulated rounding scale of `s_N`: unit roundoff times the sum of
    /// magnitudes that entered the partial sums.
    pub fn noise_floor(&self) -> f64 {
        self.noise_floor
    }

    /// CSV rows `n,sign,log_abs_phi,s,ds` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,sign,log_abs_phi,s,ds\n");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for n in 1..self.phi.len() {
            let p = self.phi[n];
            let lm = if p.is_zero() { None } else { Some(p.logmag()) };
            let lm = lm.map(|x| format!("{x:.16e}")).unwrap_or_else(|| "-inf".into());
            let _ = writeln!(
                out,
                "{n},{},{lm},{},{}",
                p.sign(),
                fmt(self.s(n)),
                fmt(self.ds(n))
            );
        }
        out
    }
}

fn sign_pow(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients of a raw system by the direct recursion in [`SignedLog`].
pub fn expand_raw(sys: &RawSystem, n: usize) -> Expansion {
    let (phi, cancellations) = raw_recursion(sys, n);
    let a = sys.a();
    let mut s = vec![None; n + 1];
    let mut noise = 0.0;
    for (k, slot) in s.iter_mut().enumerate() {
        let arg = k as f64 + a;
        if arg > 0.0 {
            let v = sign_pow(k) * phi[k].to_f64_scaled(lgamma(arg));
            *slot = Some(v);
            noise += v.abs();
        }
    }
    Expansion {
        a,
        phi,
        s,
        cancellations,
        noise_floor: 2.0 * f64::EPSILON * noise,
    }
}

/// Rescaled recursion on a normalized system (`a ≥ 2`), valid for any `N`.
pub fn expand_rescaled(sys: &NormalizedSystem, n: usize) -> Result<Expansion> {
    let a = sys.a();
    if !(a >= 2.0) {
        return Err(Error::Domain(format!(
            "the rescaled recursion needs a ≥ 2 (got {a}); normalize the system first"
        )));
    }
    if n < 4 {
        return Err(Error::Argument(format!("expansion order must be at least 4, got {n}")));
    }
    if let Some(order) = sys.order() {
        if n > order {
            return Err(Error::Truncation(format!(
                "system coefficients are known to x^{order}, expansion to x^{n} requested"
            )));
        }
    }
    let lg: Vec<f64> = (0..=n).map(|k| lgamma(k as f64 + a)).collect();
    let lmax = sys.max_y_degree();
    // v[l][k] = (−1)^k (φˡ)_k / Γ(k + a); v[1] = s.
    let mut v: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; lmax.max(1) + 1];
    let mut vabs: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; lmax.max(1) + 1];
    let terms = sys.g2_terms();
    let mut noise = 0.0;
    for k in 2..=n {
        for l in 2..=lmax {
            let mut acc = 0.0;
            let mut mag = 0.0;
            for i in 2..=(k.saturating_sub(2 * (l - 1))) {
                let (si, vj) = (v[1][i], v[l - 1][k - i]);
                if si != 0.0 && vj != 0.0 {
                    let w = (lg[i] + lg[k - i] - lg[k]).exp();
                    acc += w * si * vj;
                    mag += w * vabs[1][i] * vabs[l - 1][k - i];
                }
            }
            v[l][k] = acc;
            vabs[l][k] = mag;
        }
        let mut ds = sign_pow(k) * sys.g0(k) * (-lg[k]).exp();
        let mut mag = ds.abs();
        for &(m, l, c) in terms {
            if m > k {
                continue;
            }
            let vl = v[l][k - m];
            if vl != 0.0 {
                let t = c * sign_pow(m) * (lg[k - m] - lg[k]).exp();
                ds += t * vl;
                mag += (t * vabs[l][k - m]).abs();
            }
        }
        v[1][k] = v[1][k - 1] + ds;
        vabs[1][k] = v[1][k].abs();
        noise += mag + v[1][k].abs();
    }
    let phi = v[1]
        .iter()
        .enumerate()
        .map(|(k, &sk)| {
            let p = SignedLog::from_f64(sign_pow(k) * sk);
            if k >= 2 {
                p.scale_exp(lg[k])
            } else {
                SignedLog::ZERO
            }
        })
        .collect();
    Ok(Expansion {
        a,
        phi,
        s: v[1].iter().map(|&x| Some(x)).collect(),
        cancellations: 0,
        noise_floor: 2.0 * f64::EPSILON * noise,
    })
}

/// Normalizes `sys` to order `max(N, M + 4)` and expands the normal form to
/// order `N`.
///
/// The rescaled limit of `sys` itself is `transform.limit_sign()` times the
/// limit of the returned expansion.
pub fn expand_via_normal_form(sys: &RawSystem, n: usize) -> Result<(Expansion, TransformRecord)> {
    let (norm, rec) = normalize(sys, n.max(sys.blow_up_exponent() + 4))?;
    let exp = expand_rescaled(&norm, n)?;
    Ok((exp, rec))
}

/// How [`estimate_sinf`] extrapolates the partial sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SinfMethod {
    LastTerm,
    Aitken,
}

impl SinfMethod {
    pub fn name(self) -> &'static str {
        match self {
            SinfMethod::LastTerm => "last_term",
            SinfMethod::Aitken => "aitken",
        }
    }
}

impl std::str::FromStr for SinfMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last_term" => Ok(SinfMethod::LastTerm),
            "aitken" => Ok(SinfMethod::Aitken),
            other => Err(Error::Argument(format!(
                "unknown method {other:?}, expected last_term or aitken"
            ))),
        }
    }
}

/// Tail model behind every error estimate.
pub const TAIL_MODEL: &str = "sum_{j>N} K/j^3 ~ K/(2N^2), K = |ds_N| N^3";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinfEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub method: SinfMethod,
    pub n_used: usize,
}

fn aitken_at(exp: &Expansion, n: usize) -> Option<f64> {
    let s = exp.s(n)?;
    let d1 = exp.ds(n)?;
    let d0 = exp.ds(n - 1)?;
    let den = d1 - d0;
    if den == 0.0 || d1 == 0.0 {
        return Some(s);
    }
    Some(s - d1 * d1 / den)
}

/// Estimates `S∞` from the last partial sums of `exp`.
///
/// `last_term` returns `s_N` with error `|Δs_N|·N/2`; `aitken` returns the
/// Δ²-accelerated `A_N = s_N − Δs_N²/(Δs_N − Δs_{N−1})` with error
/// `|A_N − A_{N−1}|·N/2`.
pub fn estimate_sinf(exp: &Expansion, method: SinfMethod) -> Result<SinfEstimate> {
    let n = exp.n_max();
    if n < 10 {
        return Err(Error::Precondition(format!("S∞ estimation needs N ≥ 10, got {n}")));
    }
    let missing = || Error::Domain(format!("partial sums near N = {n} are undefined for a = {}", exp.a));
    let (value, err) = match method {
        SinfMethod::LastTerm => {
            let s = exp.s(n).ok_or_else(missing)?;
            let d = exp.ds(n).ok_or_else(missing)?;
            (s, d.abs() * n as f64 / 2.0)
        }
        SinfMethod::Aitken => {
            let a1 = aitken_at(exp, n).ok_or_else(missing)?;
            let a0 = aitken_at(exp, n - 1).ok_or_else(missing)?;
            (a1, (a1 - a0).abs() * n as f64 / 2.0)
        }
    };
    let error_estimate = if exp.cancellations > 0 && value.abs() < exp.noise_floor {
        exp.noise_floor
    } else {
        err
    };
    Ok(SinfEstimate {
        value,
        error_estimate,
        method,
        n_used: n,
    })
}

/// Tail decay of the partial-sum differences over the window `[N/2, N]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayDiagnostics {
    /// Least-squares slope of `ln|Δsₙ|` against `ln n`, or `−∞` when every
    /// difference in the window is at the rounding level.
    pub slope: f64,
    /// `max |Δsₙ|·n³` over the window (0 with the `−∞` sentinel).
    pub k_hat: f64,
}

pub fn decay_diagnostics(exp: &Expansion) -> Result<DecayDiagnostics> {
    let n = exp.n_max();
    if n < 50 {
        return Err(Error::Precondition(format!("decay diagnostics need N ≥ 50, got {n}")));
    }
    let threshold = exp.noise_floor.max(f64::MIN_POSITIVE);
    let pts: Vec<(f64, f64, f64)> = (n / 2..=n)
        .filter_map(|k| exp.ds(k).map(|d| (k as f64, d.abs())))
        .filter(|&(_, d)| d > threshold)
        .map(|(k, d)| (k.ln(), d.ln(), d * k.powi(3)))
        .collect();
    if pts.len() < 2 {
        return Ok(DecayDiagnostics {
            slope: f64::NEG_INFINITY,
            k_hat: 0.0,
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let k_hat = pts.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(DecayDiagnostics {
        slope: sxy / sxx,
        k_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(x: f64, y: f64) -> f64 {
        if x == y {
            0.0
        } else {
            (x - y).abs() / x.abs().max(y.abs())
        }
    }

    #[test]
    fn euler_coefficients_are_factorials() {
        let e = expand_raw(&RawSystem::euler(), 100);
        let mut log_fact = 0.0f64;
        for n in 1..=100usize {
            if n >= 2 {
                log_fact += ((n - 1) as f64).ln();
            }
            let p = e.phi(n);
            assert_eq!(p.sign(), if n % 2 == 1 { 1 } else { -1 });
            assert!((p.logmag() - log_fact).abs() <= 1e-12 * log_fact.max(1.0), "n = {n}");
        }
        assert_eq!(e.cancellations(), 0);
        assert!((e.s(100).unwrap() + 1.0).abs() < 1e-12);
        let far = expand_raw(&RawSystem::euler(), 220);
        for n in [150usize, 200, 220] {
            let want = lgamma(n as f64);
            assert!((far.phi(n).logmag() - want).abs() <= 1e-12 * want, "n = {n}");
            assert!((far.s(n).unwrap() + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_manifold_when_b_vanishes() {
        let e = expand_raw(&RawSystem::riccati(-2.0, 0.0), 60);
        assert!(e.phis().iter().all(|p| p.is_zero()));
        assert_eq!(e.s(2), None);
        assert_eq!(e.s(3), Some(0.0));
        let lin = NormalizedSystem::new(3.0, &[], &[], None).unwrap();
        let e = expand_rescaled(&lin, 40).unwrap();
        assert!((0..=40).all(|k| e.s(k) == Some(0.0)));
    }

    #[test]
    fn riccati_raw_matches_float_recursion() {
        let (a, b) = (-3.0, 1.0);
        let e = expand_raw(&RawSystem::riccati(a, b), 50);
        let mut phi = vec![0.0f64; 51];
        for n in 2..=50usize {
            let conv: f64 = (2..=n.saturating_sub(2)).map(|i| phi[i] * phi[n - i]).sum();
            let pn = if n == 2 { b } else { 0.0 } + conv;
            phi[n] = pn - (n as f64 - 1.0 + a) * phi[n - 1];
        }
        for n in 1..=50 {
            assert_eq!(e.phi(n).to_f64(), phi[n], "n = {n}");
        }
    }

    #[test]
    fn linear_closed_form() {
        let a = 2.5;
        let g0: Vec<(usize, f64)> = (2..=30).map(|k| (k, ((k * 7) as f64).sin())).collect();
        let sys = NormalizedSystem::new(a, &g0, &[], None).unwrap();
        let e = expand_rescaled(&sys, 30).unwrap();
        // Γ(4.5) = 3.5·2.5·1.5·0.5·√π
        let gamma_2a = 3.5 * 2.5 * 1.5 * 0.5 * std::f64::consts::PI.sqrt();
        let mut acc = 0.0;
        let mut prod = 1.0;
        for j in 2..=30usize {
            if j > 2 {
                prod *= j as f64 - 1.0 + a;
            }
            acc += sign_pow(j) * g0[j - 2].1 / prod;
            let got = e.s(j).unwrap() * gamma_2a;
            assert!((got - acc).abs() < 1e-12 * acc.abs().max(1.0), "j = {j}");
        }
        let raw = expand_raw(&sys.to_raw(), 30);
        for j in 2..=30 {
            assert!(rel(raw.phi(j).to_f64(), e.phi(j).to_f64()) < 1e-10, "j = {j}");
        }
    }

    #[test]
    fn branch_case_vanishes() {
        let (e, rec) = expand_via_normal_form(&RawSystem::riccati(-2.5, 0.5), 70).unwrap();
        assert_eq!(rec.m, 5);
        assert!(e.s(70).unwrap().abs() < 1e-12, "{}", e.s(70).unwrap());
        let est = estimate_sinf(&e, SinfMethod::LastTerm).unwrap();
        assert!(est.value.abs() < 1e-12 && est.error_estimate < 1e-12, "{est:?}");
        let (e, _) = expand_via_normal_form(&RawSystem::riccati(-2.5, 0.5), 120).unwrap();
        assert_eq!(decay_diagnostics(&e).unwrap().slope, f64::NEG_INFINITY);
    }

    #[test]
    fn b_zero_gives_exact_zero() {
        for a in [-3.7, -1.0, 0.0, 2.2] {
            let (e, _) = expand_via_normal_form(&RawSystem::riccati(a, 0.0), 40).unwrap();
            for m in [SinfMethod::LastTerm, SinfMethod::Aitken] {
                assert_eq!(estimate_sinf(&e, m).unwrap().value, 0.0);
            }
        }
    }

    #[test]
    fn single_forcing_term_stabilizes() {
        let sys = NormalizedSystem::new(2.0, &[(2, 1.0)], &[], None).unwrap();
        let e = expand_rescaled(&sys, 60).unwrap();
        assert!((3..=60).all(|k| e.ds(k) == Some(0.0)));
        let d = decay_diagnostics(&e).unwrap();
        assert_eq!(d.slope, f64::NEG_INFINITY);
        assert_eq!(d.k_hat, 0.0);
    }

    #[test]
    fn riccati_estimates_are_consistent() {
        let (e, _) = expand_via_normal_form(&RawSystem::riccati(0.5, 1.0), 300).unwrap();
        let last = estimate_sinf(&e, SinfMethod::LastTerm).unwrap();
        let ait = estimate_sinf(&e, SinfMethod::Aitken).unwrap();
        assert!((last.value - ait.value).abs() <= last.error_estimate + ait.error_estimate);
        let d = decay_diagnostics(&e).unwrap();
        assert!(d.slope <= -2.5, "{d:?}");
        assert!(d.k_hat.is_finite() && d.k_hat > 0.0);
    }

    #[test]
    fn rescaled_refuses_unnormalized_or_overlong() {
        let sys = NormalizedSystem::new(2.0, &[(2, 1.0)], &[], Some(30)).unwrap();
        assert!(matches!(expand_rescaled(&sys, 31), Err(Error::Truncation(_))));
        assert!(matches!(expand_rescaled(&sys, 3), Err(Error::Argument(_))));
        let short = expand_raw(&RawSystem::euler(), 8);
        assert!(matches!(estimate_sinf(&short, SinfMethod::LastTerm), Err(Error::Precondition(_))));
        assert!(matches!(decay_diagnostics(&short), Err(Error::Precondition(_))));
    }

    #[test]
    fn csv_rows() {
        let e = expand_raw(&RawSystem::euler(), 5);
        let csv = e.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,sign,log_abs_phi,s,ds");
        assert_eq!(lines.len(), 6);
        assert!(lines[3].starts_with("3,1,6.9314718055994"));
        assert_eq!("aitken".parse::<SinfMethod>().unwrap(), SinfMethod::Aitken);
    }

    fn arb_normalized() -> impl Strategy<Value = NormalizedSystem> {
        (
            2.0f64..10.0,
            proptest::collection::vec((2usize..8, -1.0f64..1.0), 1..5),
            proptest::collection::vec((2usize..8, 2usize..4, -1.0f64..1.0), 0..5),
        )
            .prop_map(|(a, g0, g2)| NormalizedSystem::new(a, &g0, &g2, None).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn raw_and_rescaled_paths_agree(sys in arb_normalized()) {
            let r = expand_raw(&sys.to_raw(), 140);
            let q = expand_rescaled(&sys, 140).unwrap();
            let scale = (2..=140).filter_map(|k| q.s(k)).fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 2..=140 {
                let (x, y) = (r.s(k).unwrap(), q.s(k).unwrap());
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()) + 1e-13 * scale,
                    "k = {}: {} vs {}", k, x, y);
            }
        }

        #[test]
        fn linear_phi_matches_partial_sums(
            a in 2.0f64..10.0,
            g0 in proptest::collection::vec((2usize..12, -1.0f64..1.0), 1..6),
        ) {
            let sys = NormalizedSystem::new(a, &g0, &[], None).unwrap();
            let r = expand_raw(&sys.to_raw(), 130);
            let q = expand_rescaled(&sys, 130).unwrap();
            for k in 2..=130usize {
                let sk = q.s(k).unwrap();
                let want = sign_pow(k) * sk;
                let got = r.phi(k).to_f64_scaled(lgamma(k as f64 + a));
                prop_assert!((got - want).abs() <= 1e-10 * want.abs() + 1e-15,
                    "k = {}: {} vs {}", k, got, want);
            }
        }

        #[test]
        fn riccati_growth_bound_stabilizes(a in -3.0f64..3.0, b in 0.1f64..1.5) {
            let (e, _) = expand_via_normal_form(&RawSystem::riccati(a, b), 300).unwrap();
            let an = e.a();
            let mut running = 0.0f64;
            let mut at_100 = 0.0;
            for k in 2..=300usize {
                let v = e.phi(k).to_f64_scaled(lgamma(an + k as f64 + 1.0)).abs();
                running = running.max(v);
                if k == 100 {
                    at_100 = running;
                }
            }
            prop_assert!(running.is_finite());
            prop_assert!(running <= at_100 * (1.0 + 1e-9));
            let weighted = |lo: usize, hi: usize| {
                (lo..=hi)
                    .filter_map(|k| e.ds(k).map(|d| d.abs() * (k as f64).powi(3)))
                    .fold(0.0f64, f64::max)
            };
            prop_assert!(weighted(150, 300) <= 10.0 * weighted(50, 150) + 1e-12);
        }
    }
}
