//! Borel-plane diagnostics on the unit disc: convolution quadrature, the
//! auxiliary equation `(w + 1)Y + a(1 ⋆ Y) = H`, residuals of the Borel-plane
//! form of the normal-form equation, deconvolution of the `w = −1`
//! singularity, the weighted norm, sampled inequality checks and
//! Borel–Padé–Laplace summation.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::Expansion;
use crate::error::{Error, Result};
use crate::quadrature::Composite;
use crate::scalar::SignedLog;
use crate::series::{borel_coeffs, USeries};
use crate::system::RawSystem;

/// Panels used by the Borel-plane routines unless a caller overrides them.
pub const DEFAULT_PANELS: usize = 8;

type Sampler = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// An analytic function on a disc `|w| < radius ≤ 1`, given either by Taylor
/// coefficients or by a callable.
#[derive(Clone)]
pub enum DiscFunction {
    Taylor { coeffs: Vec<f64>, radius: f64 },
    Closure { f: Sampler, radius: f64 },
}

impl std::fmt::Debug for DiscFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiscFunction::Taylor { coeffs, radius } => f
                .debug_struct("Taylor")
                .field("terms", &coeffs.len())
                .field("radius", radius)
                .finish(),
            DiscFunction::Closure { radius, .. } => {
                f.debug_struct("Closure").field("radius", radius).finish()
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius <= 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("radius of validity must lie in (0, 1], got {radius}")))
    }
}

fn horner(c: &[f64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * w + x)
}

impl DiscFunction {
    pub fn taylor(coeffs: Vec<f64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(DiscFunction::Taylor { coeffs, radius })
    }

    pub fn from_fn(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(DiscFunction::Closure {
            f: Arc::new(f),
            radius,
        })
    }

    /// The zero function on the unit disc.
    pub fn zero() -> Self {
        DiscFunction::Taylor {
            coeffs: Vec::new(),
            radius: 1.0,
        }
    }

    /// `Φ = B(φ)` with `Φₙ = φ_{n+1}/n!`, valid on the unit disc.
    pub fn borel_of(exp: &Expansion) -> Result<Self> {
        Self::taylor(borel_of_expansion(exp)?, 1.0)
    }

    pub fn radius(&self) -> f64 {
        match self {
            DiscFunction::Taylor { radius, .. } | DiscFunction::Closure { radius, .. } => *radius,
        }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        match self {
            DiscFunction::Taylor { coeffs, .. } => horner(coeffs, w),
            DiscFunction::Closure { f, .. } => f(w),
        }
    }
}

/// Borel coefficients `Φₙ = φ_{n+1}/n!`, `n = 0 … N − 1`, formed in
/// [`SignedLog`] before rounding to `f64`.
pub fn borel_of_expansion(exp: &Expansion) -> Result<Vec<f64>> {
    let phi = USeries::new(0, exp.phis().to_vec(), exp.n_max())?;
    let big: USeries<SignedLog> = borel_coeffs(&phi)?;
    Ok(big.dense().into_iter().map(|c| c.to_f64()).collect())
}

fn check_panels(panels: usize) -> Result<()> {
    if panels < 8 {
        return Err(Error::Argument(format!("at least 8 panels are required, got {panels}")));
    }
    Ok(())
}

/// `(Y ⋆ Z)(w) = w ∫₀¹ Y(wt) Z(w(1 − t)) dt` by composite Gauss–Legendre.
pub fn convolve_quad(y: &DiscFunction, z: &DiscFunction, w: Complex64, panels: usize) -> Result<Complex64> {
    check_panels(panels)?;
    let r = y.radius().min(z.radius());
    if !(w.norm() < r) {
        return Err(Error::Domain(format!("|w| = {} is outside the disc of radius {r}", w.norm())));
    }
    let rule = Composite::new(panels);
    let integral: Complex64 = rule.integrate(0.0, 1.0, |t| y.eval(w * t) * z.eval(w * (1.0 - t)));
    Ok(w * integral)
}

/// Solution of `(w + 1)Y + a(1 ⋆ Y) = H`, `Y(0) = 0`:
/// `Y = H/(1 + w) − a(1 + w)^{−(a+1)} ∫₀ʷ H(s)(1 + s)^{a−1} ds`, principal branch.
pub fn solve_aux(h: &DiscFunction, a: f64, w: Complex64, panels: usize) -> Result<Complex64> {
    check_panels(panels)?;
    if !(a > 1.0) {
        return Err(Error::Argument(format!("the auxiliary equation needs a > 1, got {a}")));
    }
    if w.im == 0.0 && w.re <= -1.0 {
        return Err(Error::Domain(format!("w = {w} lies on the branch cut (−∞, −1]")));
    }
    if !(w.norm() < h.radius()) {
        return Err(Error::Domain(format!(
            "|w| = {} is outside the disc of radius {}",
            w.norm(),
            h.radius()
        )));
    }
    let h0 = h.eval(Complex64::new(0.0, 0.0));
    if h0.norm() > 1e-12 {
        return Err(Error::Precondition(format!("H(0) must vanish, got {h0}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let rule = Composite::new(panels);
    let integral: Complex64 =
        rule.integrate(0.0, 1.0, |t| h.eval(w * t) * (one + w * t).powf(a - 1.0));
    Ok(h.eval(w) / (one + w) - a * (one + w).powf(-(a + 1.0)) * w * integral)
}

/// Chebyshev points and barycentric weights on `[0, 1]`.
struct ChebyshevGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const RAY_NODES: usize = 48;

impl ChebyshevGrid {
    fn new(k: usize) -> Self {
        let nodes = (0..=k)
            .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / k as f64).cos()))
            .collect();
        let weights = (0..=k)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == k {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { nodes, weights }
    }

    fn interpolate(&self, values: &[Complex64], s: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((&x, &wt), &v) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = s - x;
            if d == 0.0 {
                return v;
            }
            let c = wt / d;
            num += v * c;
            den += c;
        }
        num / den
    }
}

/// Result of [`residual_yeqn`].
#[derive(Clone, Debug, PartialEq)]
pub struct YeqnResidual {
    /// `max |R(w)|` over the evaluation points.
    pub max_residual: f64,
    /// `|R(w)|` at each point, in input order.
    pub per_point: Vec<f64>,
    /// Set when `L_max` is below the `y`-degree of the nonlinearity.
    pub truncated: bool,
}

/// Residual of the Borel-plane equation
/// `(w + 1)Φ + a(1 ⋆ Φ) = F₀ + Σ_l F_l ⋆ Φ^{⋆l} + Σ_l c_l Φ^{⋆l}`,
/// where `F_l` is the Borel transform of the `x^{m≥1}yˡ` part of `f` and
/// `c_l` its `x⁰yˡ` coefficient, with the `l`-sum truncated at `L_max`.
///
/// Powers `Φ^{⋆l}` along the segment `[0, w]` are tabulated at Chebyshev
/// points and interpolated barycentrically, so each additional power costs a
/// single quadrature per node.
pub fn residual_yeqn(
    sys: &RawSystem,
    phi: &DiscFunction,
    points: &[Complex64],
    panels: usize,
    l_max: usize,
) -> Result<YeqnResidual> {
    check_panels(panels)?;
    let degree = sys.f().max_y_degree();
    let top = degree.min(l_max);
    // big_f[l] are Taylor coefficients of F_l; c[l] the x⁰ coefficients.
    let mut big_f: Vec<Vec<f64>> = vec![Vec::new(); degree + 1];
    let mut c = vec![0.0; degree + 1];
    for ((m, l), v) in sys.f().iter() {
        if m == 0 {
            c[l] += v;
        } else {
            let k = m - 1;
            if big_f[l].len() <= k {
                big_f[l].resize(k + 1, 0.0);
            }
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            big_f[l][k] += v / fact;
        }
    }
    let grid = ChebyshevGrid::new(RAY_NODES);
    let rule = Composite::new(panels);
    let unit = rule.points(0.0, 1.0);
    let a = sys.a();
    let mut per_point = Vec::with_capacity(points.len());
    for &w in points {
        if !(w.norm() < phi.radius()) {
            return Err(Error::Domain(format!(
                "|w| = {} is outside the disc of radius {}",
                w.norm(),
                phi.radius()
            )));
        }
        // g[l][k] = Φ^{⋆l}(w s_k).
        let mut g: Vec<Vec<Complex64>> = vec![Vec::new(); top.max(1) + 1];
        g[1] = grid.nodes.iter().map(|&s| phi.eval(w * s)).collect();
        for l in 2..=top {
            let prev = &g[l - 1];
            let next: Vec<Complex64> = grid
                .nodes
                .iter()
                .map(|&s| {
                    if s == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let ws = w * s;
                    let acc: Complex64 = unit
                        .iter()
                        .map(|&(u, wt)| phi.eval(ws * u) * grid.interpolate(prev, s * (1.0 - u)) * wt)
                        .sum();
                    ws * acc
                })
                .collect();
            g[l] = next;
        }
        let one = Complex64::new(1.0, 0.0);
        let conv_one: Complex64 = unit.iter().map(|&(u, wt)| phi.eval(w * u) * wt).sum::<Complex64>() * w;
        let mut r = (w + one) * phi.eval(w) + a * conv_one - horner(&big_f[0], w);
        for l in 1..=top {
            if c[l] != 0.0 {
                r -= c[l] * grid.interpolate(&g[l], 1.0);
            }
            if big_f[l].iter().any(|&v| v != 0.0) {
                let conv: Complex64 = unit
                    .iter()
                    .map(|&(u, wt)| horner(&big_f[l], w * (1.0 - u)) * grid.interpolate(&g[l], u) * wt)
                    .sum();
                r -= w * conv;
            }
        }
        per_point.push(r.norm());
    }
    Ok(YeqnResidual {
        max_residual: per_point.iter().copied().fold(0.0, f64::max),
        per_point,
        truncated: l_max < degree,
    })
}

/// Borel coefficients `Φₙ` split as `Φ = Z ·(1 + w)^{−(a+1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityProfile {
    pub a: f64,
    pub phi: Vec<f64>,
    pub z: Vec<f64>,
    pub sup_z: f64,
}

impl SingularityProfile {
    /// `Σ_k c_k Z_{n−k}` with `c_k` the Taylor coefficients of
    /// `(1 + w)^{−(a+1)}`; reproduces `Φₙ`.
    pub fn reconvolve(&self) -> Vec<f64> {
        let c = kernel_coeffs(self.a, self.z.len());
        (0..self.z.len())
            .map(|n| (0..=n).map(|k| c[k] * self.z[n - k]).sum())
            .collect()
    }

    /// CSV rows `n,Phi,Z` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,Phi,Z\n");
        for (n, (p, z)) in self.phi.iter().zip(&self.z).enumerate() {
            let _ = writeln!(out, "{n},{p:.16e},{z:.16e}");
        }
        out
    }
}

fn kernel_coeffs(a: f64, n: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n);
    let mut ck = 1.0;
    for k in 0..n {
        if k > 0 {
            ck = ck * -(a + k as f64) / k as f64;
        }
        c.push(ck);
    }
    c
}

/// Solves `Φₙ = Σ_{k=0}^{n} c_k Z_{n−k}` for `Z` (unit lower-triangular).
pub fn deconvolve_coeffs(phi: &[f64], a: f64) -> SingularityProfile {
    let c = kernel_coeffs(a, phi.len());
    let mut z = Vec::with_capacity(phi.len());
    for n in 0..phi.len() {
        let tail: f64 = (1..=n).map(|k| c[k] * z[n - k]).sum();
        z.push(phi[n] - tail);
    }
    let sup_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    SingularityProfile {
        a,
        phi: phi.to_vec(),
        z,
        sup_z,
    }
}

/// [`deconvolve_coeffs`] applied to the Borel coefficients of an expansion.
pub fn deconvolve_singularity(exp: &Expansion, a: f64) -> Result<SingularityProfile> {
    if !a.is_finite() {
        return Err(Error::Argument(format!("a must be finite, got {a}")));
    }
    Ok(deconvolve_coeffs(&borel_of_expansion(exp)?, a))
}

/// Abel mean `Σ Zⱼ(−r)ʲ`, a probe of the boundary value `Z(−1)` as `r → 1⁻`.
pub fn abel_boundary_value(profile: &SingularityProfile, r: f64) -> f64 {
    profile
        .z
        .iter()
        .rev()
        .fold(0.0, |acc, &z| acc * (-r) + z)
}

/// Parameters of the weighted sup-norm on the unit disc.
#[derive(Clone, Debug, PartialEq)]
pub struct NormParams {
    pub epsilon: f64,
    pub delta: f64,
    pub a: f64,
    pub grid: Vec<Complex64>,
}

/// Minimum distance of norm sample points from `w = −1`.
pub const MIN_DISTANCE_TO_CUT: f64 = 1e-6;

impl NormParams {
    /// Parameters with the coupling `δ = ε^{2/3}`.
    pub fn new(epsilon: f64, a: f64, grid: Vec<Complex64>) -> Result<Self> {
        Self::with_delta(epsilon, epsilon.powf(2.0 / 3.0), a, grid)
    }

    pub fn with_delta(epsilon: f64, delta: f64, a: f64, grid: Vec<Complex64>) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Argument(format!("ε must be positive, got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Argument(format!("δ must lie in (0, 1/2), got {delta}")));
        }
        if !(a > 1.0) {
            return Err(Error::Argument(format!("the norm needs a > 1, got {a}")));
        }
        Ok(Self {
            epsilon,
            delta,
            a,
            grid,
        })
    }

    /// Polar grid `r e^{iθ}` with `n_r` radii in `(0, 0.999]` and `n_theta`
    /// angles, dropping points within [`MIN_DISTANCE_TO_CUT`] of `−1`.
    pub fn polar_grid(n_r: usize, n_theta: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n_r * n_theta);
        for i in 1..=n_r {
            let r = 0.999 * i as f64 / n_r as f64;
            for j in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                let w = Complex64::from_polar(r, th);
                if (w + 1.0).norm() >= MIN_DISTANCE_TO_CUT {
                    out.push(w);
                }
            }
        }
        out
    }
}

/// Norm weight `e^{−|w|/ε}(1 + |w|⁴/ε⁴)|w|⁻¹|1 + w|^{a+1}`.
pub fn norm_weight(w: Complex64, epsilon: f64, a: f64) -> f64 {
    let r = w.norm();
    let p = r / epsilon;
    (-p).exp() * (1.0 + p.powi(4)) / r * (w + 1.0).norm().powf(a + 1.0)
}

/// Grid lower bound of `sup |Y(w)| e^{−|w|/ε}(1 + |w|⁴/ε⁴)|w|⁻¹|1 + w|^{a+1}`.
///
/// The point `w = 0` is skipped since the weight is singular there.
pub fn triple_norm_eval(y: &DiscFunction, p: &NormParams) -> Result<f64> {
    if p.grid.is_empty() {
        return Err(Error::Argument("the norm sample grid is empty".into()));
    }
    let mut best = 0.0f64;
    for &w in &p.grid {
        if (w + 1.0).norm() < MIN_DISTANCE_TO_CUT {
            return Err(Error::Argument(format!("grid point {w} is too close to w = −1")));
        }
        if w.norm() == 0.0 {
            continue;
        }
        best = best.max(y.eval(w).norm() * norm_weight(w, p.epsilon, p.a));
    }
    Ok(best)
}

/// Which inequality [`inequality_samplers`] checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    /// `|1 + w(1 − t)| ≥ (|1 + w| + t)/√5` for `w ∈ B_δ(−1) ∩ B₁(0)`, `t ∈ (0, 1)`.
    LowerBound1,
    /// `e^{−rp}(1 + r⁴p⁴)/(e^{−p}(1 + p⁴)) ≤ 7.66` on `[0, 20] × (1, 50]`.
    Embedding,
}

/// Bound checked by [`SamplerKind::Embedding`].
pub const EMBEDDING_BOUND: f64 = 7.66;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerParams {
    pub delta: f64,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self { delta: 0.5, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerReport {
    pub violations: usize,
    /// Smallest `lhs − rhs` (lower bound) or `bound − ratio` (embedding).
    pub worst_margin: f64,
    /// Largest embedding ratio seen, or the smallest `lhs/rhs` for the lower bound.
    pub extreme: f64,
}

/// Monte-Carlo check of the lower bound, or a `√trials × √trials` grid
/// search of the embedding constant.
pub fn inequality_samplers(kind: SamplerKind, trials: usize, params: &SamplerParams) -> Result<SamplerReport> {
    if trials == 0 {
        return Err(Error::Argument("at least one trial is required".into()));
    }
    match kind {
        SamplerKind::LowerBound1 => {
            let delta = params.delta;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::Argument(format!("δ must lie in (0, 1), got {delta}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let inv_sqrt5 = 1.0 / 5f64.sqrt();
            let mut report = SamplerReport {
                violations: 0,
                worst_margin: f64::INFINITY,
                extreme: f64::INFINITY,
            };
            let mut done = 0;
            while done < trials {
                let r = delta * rng.gen::<f64>().sqrt();
                let th = std::f64::consts::PI * (rng.gen::<f64>() - 0.5);
                let w = Complex64::new(-1.0, 0.0) + Complex64::from_polar(r, th);
                if !(w.norm() < 1.0) || r == 0.0 {
                    continue;
                }
                let t: f64 = rng.gen();
                if t == 0.0 {
                    continue;
                }
                let lhs = (w * (1.0 - t) + 1.0).norm();
                let rhs = inv_sqrt5 * ((w + 1.0).norm() + t);
                let margin = lhs - rhs;
                if margin < 0.0 {
                    report.violations += 1;
                }
                report.worst_margin = report.worst_margin.min(margin);
                report.extreme = report.extreme.min(lhs / rhs);
                done += 1;
            }
            Ok(report)
        }
        SamplerKind::Embedding => {
            let side = ((trials as f64).sqrt().ceil() as usize).max(2);
            let mut worst = 0.0f64;
            let mut violations = 0;
            for i in 0..side {
                let p = 20.0 * i as f64 / (side - 1) as f64;
                let den = (-p).exp() * (1.0 + p.powi(4));
                for j in 1..=side {
                    let r = 1.0 + 49.0 * j as f64 / side as f64;
                    let rp = r * p;
                    let q = (-rp).exp() * (1.0 + rp.powi(4)) / den;
                    if q > EMBEDDING_BOUND {
                        violations += 1;
                    }
                    worst = worst.max(q);
                }
            }
            Ok(SamplerReport {
                violations,
                worst_margin: EMBEDDING_BOUND - worst,
                extreme: worst,
            })
        }
    }
}

/// Rational approximant `P(w)/Q(w)` with `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pade {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
}

impl Pade {
    pub fn eval(&self, w: f64) -> f64 {
        let p = self.numerator.iter().rev().fold(0.0, |acc, &c| acc * w + c);
        let q = self.denominator.iter().rev().fold(0.0, |acc, &c| acc * w + c);
        p / q
    }

    pub fn eval_denominator(&self, w: f64) -> f64 {
        self.denominator.iter().rev().fold(0.0, |acc, &c| acc * w + c)
    }
}

/// Relative singular-value threshold for rank detection in [`pade`].
pub const PADE_TOL: f64 = 1e-14;

/// Type `[m/n]` approximant from `c₀ … c_{m+n}` by the SVD-based robust
/// method: the degrees drop until the Toeplitz block has full rank and the
/// denominator is a null vector of that block.
pub fn pade(c: &[f64], m: usize, n: usize) -> Result<Pade> {
    if c.len() < m + n + 1 {
        return Err(Error::Precondition(format!(
            "a [{m}/{n}] approximant needs {} coefficients, got {}",
            m + n + 1,
            c.len()
        )));
    }
    let c = &c[..=m + n];
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || c[..=m].iter().map(|v| v * v).sum::<f64>().sqrt() <= PADE_TOL * norm {
        return Ok(Pade {
            numerator: vec![0.0],
            denominator: vec![1.0],
        });
    }
    let tol = PADE_TOL * norm;
    let coef = |i: isize| if i >= 0 { c[i as usize] } else { 0.0 };
    let (mut m, mut n) = (m, n);
    let b: Vec<f64> = loop {
        if n == 0 {
            break vec![1.0];
        }
        // Rows m+1 … m+n of the Toeplitz matrix, padded with a zero row.
        let block = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            if i < n {
                coef((m + 1 + i) as isize - j as isize)
            } else {
                0.0
            }
        });
        let svd = block.svd(false, true);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        if rank < n {
            let drop = n - rank;
            m = m.saturating_sub(drop);
            n = rank;
            continue;
        }
        let v_t = svd.v_t.expect("right singular vectors were requested");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
        break v_t.row(imin).iter().copied().collect();
    };
    let mut a: Vec<f64> = (0..=m)
        .map(|i| (0..b.len()).map(|j| coef(i as isize - j as isize) * b[j]).sum())
        .collect();
    let mut b = b;
    let lead = b.iter().position(|v| v.abs() > PADE_TOL).unwrap_or(0);
    b.drain(..lead);
    a.drain(..lead.min(a.len()));
    if a.is_empty() {
        a.push(0.0);
    }
    let b0 = b[0];
    for v in a.iter_mut() {
        *v /= b0;
    }
    for v in b.iter_mut() {
        *v /= b0;
    }
    while a.len() > 1 && a.last().is_some_and(|v| v.abs() <= tol) {
        a.pop();
    }
    while b.len() > 1 && b.last().is_some_and(|v| v.abs() <= PADE_TOL) {
        b.pop();
    }
    Ok(Pade {
        numerator: a,
        denominator: b,
    })
}

/// Smallest admissible `ray_cutoff / x`.
pub const MIN_CUTOFF_RATIO: f64 = 30.0;
/// Default `ray_cutoff / x`.
pub const DEFAULT_CUTOFF_RATIO: f64 = 40.0;
/// Default number of panels on the Laplace ray.
pub const DEFAULT_RAY_PANELS: usize = 32;
const DENOMINATOR_SCAN: usize = 4096;

/// `∫₀^cutoff e^{−w/x} P(w)/Q(w) dw` for the diagonal `[k/k]` Padé
/// approximant of the Borel coefficients `Φ₀, Φ₁, …`.
pub fn pade_laplace_coeffs(
    big_phi: &[f64],
    x: f64,
    pade_order: usize,
    ray_panels: usize,
    ray_cutoff: f64,
) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Argument(format!("x must be positive, got {x}")));
    }
    if !(ray_cutoff >= MIN_CUTOFF_RATIO * x) {
        return Err(Error::Precondition(format!(
            "ray cutoff {ray_cutoff} must be at least {MIN_CUTOFF_RATIO}·x = {}",
            MIN_CUTOFF_RATIO * x
        )));
    }
    if ray_panels == 0 {
        return Err(Error::Argument("the Laplace ray needs at least one panel".into()));
    }
    let approx = pade(big_phi, pade_order, pade_order)?;
    let rule = Composite::new(ray_panels);
    let nodes = rule.points(0.0, ray_cutoff);
    let scan = (0..=DENOMINATOR_SCAN).map(|i| ray_cutoff * i as f64 / DENOMINATOR_SCAN as f64);
    for w in scan.chain(nodes.iter().map(|p| p.0)) {
        if !(approx.eval_denominator(w) > 0.0) {
            return Err(Error::SingularApproximant(format!(
                "Padé denominator of order {pade_order} vanishes near w = {w:.6}; lower the order"
            )));
        }
    }
    Ok(nodes.iter().map(|&(w, wt)| (-w / x).exp() * approx.eval(w) * wt).sum())
}

/// Borel–Padé–Laplace sum of the expansion at `x > 0`.
pub fn borel_pade_laplace(
    exp: &Expansion,
    x: f64,
    pade_order: usize,
    ray_panels: usize,
    ray_cutoff: f64,
) -> Result<f64> {
    pade_laplace_coeffs(&borel_of_expansion(exp)?, x, pade_order, ray_panels, ray_cutoff)
}

/// Default Padé order `N/2 − 1` for an expansion to order `N`.
pub fn default_pade_order(n: usize) -> usize {
    (n / 2).saturating_sub(1)
}
