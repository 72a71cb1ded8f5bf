//! The Riccati family `x²y' = −(1 + ax)y + bx² + y²`: partial sums
//! `S_N(a, b)`, parameter-plane sign maps, and probes of `S∞` near `b = 0`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::asymptotics::expand_via_normal_form;
use crate::error::{Error, Result};
use crate::special::lgamma;
use crate::system::RawSystem;

/// Default truncation order of Riccati evaluations.
pub const DEFAULT_ORDER: usize = 70;

/// `S_N(a, b)` through the normal form, for any real `a`.
///
/// The system is normalized with blow-up exponent `M`, the normalized partial
/// sum `S̃_N` is computed by the rescaled recursion, and `(−1)^M S̃_N` is
/// returned. `b = 0` gives exactly 0.
pub fn riccati_sn(a: f64, b: f64, n: usize) -> Result<f64> {
    check_inputs(a, b, n)?;
    if b == 0.0 {
        return Ok(0.0);
    }
    let (exp, rec) = expand_via_normal_form(&RawSystem::riccati(a, b), n)?;
    let s = exp.s(n).expect("rescaled partial sums are defined for every n");
    Ok(rec.limit_sign() * s)
}

fn check_inputs(a: f64, b: f64, n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::Argument(format!("N must be at least 4, got {n}")));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Argument(format!("parameters must be finite, got ({a}, {b})")));
    }
    Ok(())
}

/// `S_N(a, b)` from the coefficient recursion of the Riccati system itself,
/// for `a > −2`: `s₂ = b/Γ(2 + a)` and
/// `sₙ − s_{n−1} = Σ_{i=2}^{n−2} Γ(i+a)Γ(n−i+a)/Γ(n+a) · sᵢ s_{n−i}`.
///
/// The `b`-linear part of `S_N` is exactly `b/Γ(2 + a)` on this path.
pub fn riccati_sn_direct(a: f64, b: f64, n: usize) -> Result<f64> {
    check_inputs(a, b, n)?;
    if !(a > -2.0) {
        return Err(Error::Domain(format!("the direct Riccati path needs a > −2, got {a}")));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let lg: Vec<f64> = (0..=n)
        .map(|k| if k >= 2 { lgamma(k as f64 + a) } else { 0.0 })
        .collect();
    let mut s = vec![0.0; n + 1];
    s[2] = b * (-lg[2]).exp();
    for k in 3..=n {
        let mut ds = 0.0;
        for i in 2..=k.saturating_sub(2) {
            ds += (lg[i] + lg[k - i] - lg[k]).exp() * s[i] * s[k - i];
        }
        s[k] = s[k - 1] + ds;
    }
    Ok(s[n])
}

/// Sign of `S_N` on a rectangular `(a, b)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SignMap {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub na: usize,
    pub nb: usize,
    pub n_used: usize,
    /// `S_N(a_i, b_j)` at index `i·nb + j`.
    pub values: Vec<f64>,
}

fn grid_point(range: (f64, f64), i: usize, n: usize) -> f64 {
    range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

impl SignMap {
    /// Builds a map from values given at index `i·nb + j`.
    pub fn from_values(
        a_range: (f64, f64),
        b_range: (f64, f64),
        na: usize,
        nb: usize,
        n_used: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_grid(a_range, b_range, na, nb)?;
        if values.len() != na * nb {
            return Err(Error::Length(format!(
                "a {na}×{nb} map needs {} values, got {}",
                na * nb,
                values.len()
            )));
        }
        Ok(Self {
            a_range,
            b_range,
            na,
            nb,
            n_used,
            values,
        })
    }

    pub fn a_at(&self, i: usize) -> f64 {
        grid_point(self.a_range, i, self.na)
    }

    pub fn b_at(&self, j: usize) -> f64 {
        grid_point(self.b_range, j, self.nb)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nb + j]
    }

    pub fn sign(&self, i: usize, j: usize) -> i8 {
        sign_of(self.value(i, j))
    }

    /// Cell widths `(Δa, Δb)`.
    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.a_range.1 - self.a_range.0) / (self.na - 1) as f64,
            (self.b_range.1 - self.b_range.0) / (self.nb - 1) as f64,
        )
    }

    /// CSV `a,b,S_N,sign`, `a` outer and `b` inner, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,S_N,sign\n");
        for i in 0..self.na {
            for j in 0..self.nb {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{}",
                    self.a_at(i),
                    self.b_at(j),
                    self.value(i, j),
                    self.sign(i, j)
                );
            }
        }
        out
    }

    /// Plain PGM (P2, maxval 2) of `sign + 1`; columns run over `a`
    /// ascending and the top row is the largest `b`.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n2\n", self.na, self.nb);
        for j in (0..self.nb).rev() {
            let row: Vec<String> = (0..self.na).map(|i| (self.sign(i, j) + 1).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn check_grid(a_range: (f64, f64), b_range: (f64, f64), na: usize, nb: usize) -> Result<()> {
    if na < 2 || nb < 2 {
        return Err(Error::Argument(format!("grids need at least 2×2 points, got {na}×{nb}")));
    }
    for (name, r) in [("a", a_range), ("b", b_range)] {
        if !(r.0 < r.1) || !r.0.is_finite() || !r.1.is_finite() {
            return Err(Error::Argument(format!(
                "{name} range must satisfy lo < hi, got {}:{}",
                r.0, r.1
            )));
        }
    }
    Ok(())
}

/// Evaluates [`riccati_sn`] on an `na × nb` grid using `workers` threads.
///
/// Cells are independent and results are gathered by index, so the map does
/// not depend on the worker count or schedule.
pub fn scan(
    a_range: (f64, f64),
    b_range: (f64, f64),
    na: usize,
    nb: usize,
    n: usize,
    workers: usize,
) -> Result<SignMap> {
    check_grid(a_range, b_range, na, nb)?;
    if workers == 0 {
        return Err(Error::Argument("at least one worker is required".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;
    let values: Result<Vec<f64>> = pool.install(|| {
        (0..na * nb)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / nb, idx % nb);
                riccati_sn(grid_point(a_range, i, na), grid_point(b_range, j, nb), n)
            })
            .collect()
    });
    SignMap::from_values(a_range, b_range, na, nb, n, values?)
}

/// Central difference `(S_N(a, h) − S_N(a, −h))/(2h)` on the direct path,
/// which approximates `∂S∞/∂b(a, 0) = 1/Γ(a + 2)`.
pub fn derivative_probe(a: f64, h: f64, n: usize) -> Result<f64> {
    if !(a > -2.0) {
        return Err(Error::Domain(format!("the derivative probe needs a > −2, got {a}")));
    }
    if !(h > 0.0 && h <= 0.01) {
        return Err(Error::Domain(format!("the step h must lie in (0, 0.01], got {h}")));
    }
    Ok((riccati_sn_direct(a, h, n)? - riccati_sn_direct(a, -h, n)?) / (2.0 * h))
}

/// Estimate of `Q(−2, 0)` where `S∞(−2, b) = b²Q(−2, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QProbe {
    /// Richardson limit of `S_N/b²` from the first two `b` values, or the
    /// single ratio when only one value is given.
    pub q: f64,
    pub extrapolated: bool,
    /// `(b, S_N(−2, b)/b²)` for every input `b`.
    pub ratios: Vec<(f64, f64)>,
    /// `(S_N(−2, b) + S_N(−2, −b) − 2S_N(−2, 0))/b²` at the first `b`, which
    /// approximates `∂²S∞/∂b²(−2, 0) = 2Q(−2, 0)`.
    pub second_difference: f64,
}

pub fn q_probe(b_values: &[f64], n: usize) -> Result<QProbe> {
    let a = -2.0;
    if b_values.is_empty() {
        return Err(Error::Argument("q_probe needs at least one b value".into()));
    }
    if b_values.iter().any(|&b| b == 0.0 || !b.is_finite()) {
        return Err(Error::Argument("q_probe b values must be finite and nonzero".into()));
    }
    let ratios: Vec<(f64, f64)> = b_values
        .iter()
        .map(|&b| riccati_sn(a, b, n).map(|s| (b, s / (b * b))))
        .collect::<Result<_>>()?;
    let (q, extrapolated) = match ratios.as_slice() {
        [(_, r)] => (*r, false),
        [(b1, r1), (b2, r2), ..] => ((b1 * r2 - b2 * r1) / (b1 - b2), true),
        [] => unreachable!(),
    };
    let b = b_values[0];
    let second_difference =
        (riccati_sn(a, b, n)? + riccati_sn(a, -b, n)? - 2.0 * riccati_sn(a, 0.0, n)?) / (b * b);
    Ok(QProbe {
        q,
        extrapolated,
        ratios,
        second_difference,
    })
}
