//! Fixed-node Gauss–Legendre rules: plain, composite, geometrically graded
//! towards the endpoints, and a half-line variant via `s = t/(1 − t)`.
//!
//! Nothing here is adaptive, so every integral is a deterministic function of
//! its inputs.

use std::ops::{Add, Mul};

/// Nodes per panel for composite rules.
pub const NODES_PER_PANEL: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `n ≥ 1` nodes, computed by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_lo^hi f(t) dt`, exact for polynomials of degree `≤ 2n − 1`.
    pub fn integrate<T, F>(&self, lo: f64, hi: f64, f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = T::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on equal panels.
#[derive(Clone, Debug)]
pub struct Composite {
    rule: GaussLegendre,
    panels: usize,
}

impl Composite {
    pub fn new(panels: usize) -> Self {
        Self::with_nodes(panels, NODES_PER_PANEL)
    }

    pub fn with_nodes(panels: usize, nodes: usize) -> Self {
        assert!(panels >= 1, "a composite rule needs at least one panel");
        Self {
            rule: GaussLegendre::new(nodes),
            panels,
        }
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// All `(node, weight)` pairs on `[lo, hi]`.
    pub fn points(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let h = (hi - lo) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.rule.nodes.len());
        for p in 0..self.panels {
            let a = lo + h * p as f64;
            out.extend(self.rule.mapped(a, a + h));
        }
        out
    }

    pub fn integrate<T, F>(&self, lo: f64, hi: f64, f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        let h = (hi - lo) / self.panels as f64;
        let mut acc = T::default();
        for p in 0..self.panels {
            let a = lo + h * p as f64;
            acc = acc + self.rule.integrate(a, a + h, &f);
        }
        acc
    }
}

/// Ratio of consecutive panel widths in [`graded_unit_integral`].
pub const GRADING_RATIO: f64 = 0.15;

/// `∫₀¹ f(t, 1 − t) dt` for integrands with algebraic endpoint singularities.
///
/// Each half of the interval is split into `panels_per_half` panels whose
/// widths shrink geometrically by [`GRADING_RATIO`] towards the endpoint. The
/// integrand receives both `t` and `1 − t`, each computed without rounding
/// loss near its own endpoint.
pub fn graded_unit_integral<F: Fn(f64, f64) -> f64>(f: F, panels_per_half: usize, nodes: usize) -> f64 {
    let rule = GaussLegendre::new(nodes);
    let mut edges = Vec::with_capacity(panels_per_half + 1);
    let mut h = 0.5;
    edges.push(0.0);
    let mut inner: Vec<f64> = (1..panels_per_half)
        .map(|_| {
            h *= GRADING_RATIO;
            h
        })
        .collect();
    inner.reverse();
    edges.extend(inner);
    edges.push(0.5);
    let mut acc = 0.0;
    for w in edges.windows(2) {
        acc += rule.integrate(w[0], w[1], |t| f(t, 1.0 - t));
        acc += rule.integrate(w[0], w[1], |u| f(1.0 - u, u));
    }
    acc
}

/// `∫₀^∞ f(s) ds` through `s = t/(1 − t)`, composite rule on `[0, 1]`.
pub fn half_line_integral<F: Fn(f64) -> f64>(f: F, panels: usize) -> f64 {
    Composite::new(panels).integrate(0.0, 1.0, |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        f(t / u) / (u * u)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 16, 20, 64] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}: {s}");
            for i in 0..n {
                assert!((r.nodes()[i] + r.nodes()[n - 1 - i]).abs() < 1e-15);
            }
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let r = GaussLegendre::new(8);
        for d in 0..16 {
            let got: f64 = r.integrate(0.0, 1.0, |x| x.powi(d));
            assert!((got - 1.0 / (d as f64 + 1.0)).abs() < 1e-15, "degree {d}");
        }
    }

    #[test]
    fn composite_complex_integrand() {
        let c = Composite::new(8);
        let got: Complex64 = c.integrate(0.0, 1.0, |t| (Complex64::i() * t).exp());
        let want = ((Complex64::i()).exp() - 1.0) / Complex64::i();
        assert!((got - want).norm() < 1e-15);
        assert_eq!(c.points(0.0, 2.0).len(), 8 * NODES_PER_PANEL);
    }

    #[test]
    fn graded_rule_handles_endpoint_singularities() {
        let got = graded_unit_integral(|t, u| t.powf(-0.8) * u.powf(-0.5), 64, 20);
        // B(0.2, 0.5) = Γ(0.2)Γ(0.5)/Γ(0.7)
        let want = 4.590843711998803 * 1.772453850905516 / 1.298055332647558;
        assert!((got - want).abs() / want < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn half_line_quarter_pi() {
        let got = half_line_integral(|s| s / (1.0 + s.powi(4)), 128);
        assert!((got - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
}
