//! Zero level sets of sign maps by marching squares, and straight-line fits
//! of the branches `a = −b/(k − 1) − k` through `(−k, 0)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::riccati::SignMap;

/// A polyline in the `(a, b)` plane.
pub type Polyline = Vec<(f64, f64)>;

/// Zero contours of a map together with its cell widths.
#[derive(Clone, Debug, PartialEq)]
pub struct Contours {
    pub lines: Vec<Polyline>,
    pub da: f64,
    pub db: f64,
}

impl Contours {
    /// CSV `contour,a,b` with one row per vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("contour,a,b\n");
        for (id, line) in self.lines.iter().enumerate() {
            for &(a, b) in line {
                let _ = writeln!(out, "{id},{a:.16e},{b:.16e}");
            }
        }
        out
    }
}

/// Grid edge carrying a crossing: horizontal edges join `(i, j)` and
/// `(i + 1, j)`, vertical ones `(i, j)` and `(i, j + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Marching-squares polylines of `{S_N = 0}` with linear interpolation on
/// cell edges. Vertices are classified as `S_N > 0` versus `S_N ≤ 0`, and
/// saddle cells are resolved by the average of the four corner values.
/// Chains that collapse to a single grid vertex are dropped.
pub fn zero_contours(map: &SignMap) -> Contours {
    let (da, db) = map.spacing();
    let inside = |i: usize, j: usize| map.value(i, j) > 0.0;
    let point = |e: Edge| -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (v0, v1) = (map.value(i0, j0), map.value(i1, j1));
        let t = v0 / (v0 - v1);
        let (a0, b0) = (map.a_at(i0), map.b_at(j0));
        let (a1, b1) = (map.a_at(i1), map.b_at(j1));
        (a0 + t * (a1 - a0), b0 + t * (b1 - b0))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..map.na - 1 {
        for j in 0..map.nb - 1 {
            // Corners counter-clockwise from (i, j); edge k joins corner k and k + 1.
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let e = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let crossing: Vec<usize> = (0..4).filter(|&k| c[k] != c[(k + 1) % 4]).collect();
            match crossing.len() {
                2 => segments.push((e[crossing[0]], e[crossing[1]])),
                4 => {
                    let center = 0.25
                        * (map.value(i, j) + map.value(i + 1, j) + map.value(i + 1, j + 1) + map.value(i, j + 1));
                    // Cut off the corners whose class differs from the center.
                    let center_inside = center > 0.0;
                    for k in 0..4 {
                        if c[k] != center_inside {
                            segments.push((e[(k + 3) % 4], e[k]));
                        }
                    }
                }
                _ => {}
            }
        }
    }

    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (s, &(p, q)) in segments.iter().enumerate() {
        by_edge.entry(p).or_default().push(s);
        by_edge.entry(q).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start: usize, from: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut chain = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            used[seg] = true;
            let (p, q) = segments[seg];
            let next = if p == at { q } else { p };
            chain.push(next);
            at = next;
            match by_edge[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        chain
    };
    // Open chains start at edges used by a single segment.
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        let (p, q) = segments[s];
        let start = if by_edge[&p].len() == 1 {
            Some(p)
        } else if by_edge[&q].len() == 1 {
            Some(q)
        } else {
            None
        };
        if let Some(from) = start {
            lines.push(walk(s, from, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let from = segments[s].0;
            lines.push(walk(s, from, &mut used));
        }
    }
    Contours {
        lines: lines
            .into_iter()
            .map(|chain| {
                let mut line: Polyline = chain.into_iter().map(point).collect();
                line.dedup();
                line
            })
            .filter(|line| line.len() >= 2)
            .collect(),
        da,
        db,
    }
}

/// Least-squares line `a = slope·b + intercept` through a branch near `(−k, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchFit {
    pub k: usize,
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub points: usize,
}

/// Half-width in `a` of the window around `(−k, 0)` used by [`branch_fit`].
pub const BRANCH_WINDOW_A: f64 = 0.45;
/// Largest `|b|` used by [`branch_fit`].
pub const BRANCH_WINDOW_B: f64 = 0.5;

/// Fits the branch through `(−k, 0)`, using vertices of contours that pass
/// within two cells of that point, with `2Δb ≤ |b| ≤ 0.5` and
/// `|a + k| ≤ 0.45`.
pub fn branch_fit(contours: &Contours, k: usize) -> Result<BranchFit> {
    if k < 2 {
        return Err(Error::Argument(format!("branches are indexed by k ≥ 2, got {k}")));
    }
    let target = -(k as f64);
    let near = |&(a, b): &(f64, f64)| (a - target).abs() <= 2.0 * contours.da && b.abs() <= 2.0 * contours.db;
    let pts: Vec<(f64, f64)> = contours
        .lines
        .iter()
        .filter(|line| line.iter().any(near))
        .flat_map(|line| line.iter().copied())
        .filter(|&(a, b)| {
            b.abs() >= 2.0 * contours.db && b.abs() <= BRANCH_WINDOW_B && (a - target).abs() <= BRANCH_WINDOW_A
        })
        .collect();
    if pts.len() < 5 {
        return Err(Error::NotFound(format!(
            "no zero contour with at least 5 usable points near (a, b) = ({target}, 0)"
        )));
    }
    let m = pts.len() as f64;
    let mb = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let ma = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let sbb: f64 = pts.iter().map(|p| (p.1 - mb).powi(2)).sum();
    let sab: f64 = pts.iter().map(|p| (p.1 - mb) * (p.0 - ma)).sum();
    let slope = sab / sbb;
    let intercept = ma - slope * mb;
    let rms = (pts.iter().map(|p| (p.0 - slope * p.1 - intercept).powi(2)).sum::<f64>() / m).sqrt();
    Ok(BranchFit {
        k,
        slope,
        intercept,
        rms,
        points: pts.len(),
    })
}
