//! Half-line Sturm–Liouville problems `−u″ + q u` in one or several coordinates.
//!
//! A problem is a chain of segments. Each segment lives in its own variable:
//! the radius `r`, `t = log r`, `s = log t` past `r = e` (outer), or
//! `x = −log(−t)` below `r = 1/e` (inner). Inside a segment the solution is
//! related to the `t`-frame function `v` by `v = g(x) u`, and neighbouring
//! segments are glued by continuity of `(v, v_t)`. Every coordinate change is
//! a Liouville transform, so negative-eigenvalue counts are preserved.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// `x = r`
    Radius,
    /// `x = t = log r`
    Log,
    /// `x = s = log t`, for `t > 0`
    OuterLogLog,
    /// `x = −log(−t)`, for `t < 0`; increases with `r`
    InnerLogLog,
}

impl Coordinate {
    pub fn name(self) -> &'static str {
        match self {
            Coordinate::Radius => "r",
            Coordinate::Log => "t",
            Coordinate::OuterLogLog => "s",
            Coordinate::InnerLogLog => "s_inner",
        }
    }

    /// `t` at coordinate value `x`.
    pub fn t_of(self, x: f64) -> f64 {
        match self {
            Coordinate::Radius => x.ln(),
            Coordinate::Log => x,
            Coordinate::OuterLogLog => x.exp(),
            Coordinate::InnerLogLog => -(-x).exp(),
        }
    }

    /// Coordinate value at `t`, if `t` lies in the coordinate's range.
    pub fn x_of_t(self, t: f64) -> Option<f64> {
        match self {
            Coordinate::Radius => Some(t.exp()),
            Coordinate::Log => Some(t),
            Coordinate::OuterLogLog => (t > 0.0).then(|| t.ln()),
            Coordinate::InnerLogLog => (t < 0.0).then(|| -(-t).ln()),
        }
    }

    /// `(u, u')` in this coordinate to `(v, v_t)`.
    pub fn to_t_frame(self, x: f64, u: f64, du: f64) -> (f64, f64) {
        match self {
            Coordinate::Log => (u, du),
            Coordinate::Radius => {
                let sr = x.sqrt();
                let v = u / sr;
                (v, sr * du - 0.5 * v)
            }
            Coordinate::OuterLogLog => {
                let e = (0.5 * x).exp();
                (e * u, (du + 0.5 * u) / e)
            }
            Coordinate::InnerLogLog => {
                let e = (0.5 * x).exp();
                (u / e, e * (du - 0.5 * u))
            }
        }
    }

    /// `(v, v_t)` to `(u, u')` in this coordinate.
    pub fn from_t_frame(self, x: f64, v: f64, dv: f64) -> (f64, f64) {
        match self {
            Coordinate::Log => (v, dv),
            Coordinate::Radius => {
                let sr = x.sqrt();
                (sr * v, (dv + 0.5 * v) / sr)
            }
            Coordinate::OuterLogLog => {
                let e = (0.5 * x).exp();
                let u = v / e;
                (u, e * dv - 0.5 * u)
            }
            Coordinate::InnerLogLog => {
                let e = (0.5 * x).exp();
                let u = e * v;
                (u, dv / e + 0.5 * u)
            }
        }
    }

    /// `g` in `v = g u`.
    pub fn scale(self, x: f64) -> f64 {
        match self {
            Coordinate::Log => 1.0,
            Coordinate::Radius => 1.0 / x.sqrt(),
            Coordinate::OuterLogLog => (0.5 * x).exp(),
            Coordinate::InnerLogLog => (-0.5 * x).exp(),
        }
    }

    /// `c` such that `∫(v_t² + q_t v²) dt` over a segment equals the segment's own
    /// form plus `[c u²]` taken from the lower to the upper end.
    pub fn boundary_coefficient(self, x: f64) -> f64 {
        match self {
            Coordinate::Log => 0.0,
            Coordinate::Radius => -0.5 / x,
            Coordinate::OuterLogLog => 0.5,
            Coordinate::InnerLogLog => -0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Neumann,
    /// `u' = h u`
    Robin(f64),
    /// `u' = u/(2x)`: Neumann for `f = x^{-1/2} u` in the radius variable.
    WeightedNeumann,
}

impl Boundary {
    /// `h` in `u' = h u` at the end `x`, or `None` for Dirichlet.
    pub fn robin_h(self, x: f64) -> Option<f64> {
        match self {
            Boundary::Dirichlet => None,
            Boundary::Neumann => Some(0.0),
            Boundary::Robin(h) => Some(h),
            Boundary::WeightedNeumann => Some(0.5 / x),
        }
    }
}

#[derive(Clone)]
pub struct Segment {
    pub coordinate: Coordinate,
    pub lo: f64,
    pub hi: f64,
    pub q: Coefficient,
    /// Coordinate values where `q` jumps or kinks.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Segment")
            .field("coordinate", &self.coordinate)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Segment {
    pub fn new(coordinate: Coordinate, lo: f64, hi: f64, q: Coefficient) -> Self {
        Self { coordinate, lo, hi, q, breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, mut b: Vec<f64>) -> Self {
        b.retain(|x| *x > self.lo && *x < self.hi);
        b.sort_by(|a, b| a.partial_cmp(b).unwrap());
        b.dedup();
        self.breakpoints = b;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Uniform (or geometric) cells per segment before local refinement.
    pub base_cells: usize,
    /// Largest `sqrt|q|·h` allowed on a cell at level 0.
    pub phase_per_cell: f64,
    /// Geometric base nodes; only meaningful for the radius coordinate.
    pub geometric: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { base_cells: 256, phase_per_cell: 0.5, geometric: false }
    }
}

#[derive(Debug, Clone)]
pub struct HalfLineProblem {
    pub segments: Vec<Segment>,
    pub left: Boundary,
    pub right: Boundary,
    pub grid: GridSpec,
}

impl HalfLineProblem {
    pub fn single(coordinate: Coordinate, lo: f64, hi: f64, q: Coefficient) -> Self {
        Self {
            segments: vec![Segment::new(coordinate, lo, hi, q)],
            left: Boundary::Dirichlet,
            right: Boundary::Dirichlet,
            grid: GridSpec::default(),
        }
    }

    pub fn with_boundaries(mut self, left: Boundary, right: Boundary) -> Self {
        self.left = left;
        self.right = right;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    /// Variable name of a single-segment problem, or the chain of names.
    pub fn variable(&self) -> String {
        self.segments.iter().map(|s| s.coordinate.name()).collect::<Vec<_>>().join("+")
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].lo, self.segments.last().unwrap().hi)
    }

    /// Evaluates `q` of the segment containing coordinate value `x` of segment `i`.
    pub fn q_at(&self, segment: usize, x: f64) -> f64 {
        (self.segments[segment].q)(x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Domain("half-line problem without segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.lo < s.hi) || !s.lo.is_finite() || !s.hi.is_finite() {
                return Err(Error::Domain(format!("segment {i} has empty or infinite domain ({}, {})", s.lo, s.hi)));
            }
            if s.coordinate == Coordinate::Radius && s.lo <= 0.0 {
                return Err(Error::Domain("radius segment needs r_min > 0".into()));
            }
        }
        for w in self.segments.windows(2) {
            let t_a = w[0].coordinate.t_of(w[0].hi);
            let t_b = w[1].coordinate.t_of(w[1].lo);
            if (t_a - t_b).abs() > 1e-9 * (1.0 + t_a.abs()) {
                return Err(Error::Domain(format!("segments do not meet: t = {t_a} vs {t_b}")));
            }
        }
        Ok(())
    }

    /// Nodes of every segment at refinement `level`.
    pub fn nodes(&self, level: u32) -> Vec<Vec<f64>> {
        self.segments.iter().map(|s| segment_nodes(s, &self.grid, level)).collect()
    }

    /// Number of cells at refinement `level`.
    pub fn cell_count(&self, level: u32) -> usize {
        self.nodes(level).iter().map(|n| n.len() - 1).sum()
    }
}

const MAX_SUB: usize = 1 << 16;
const POS_SUB: usize = 64;

fn segment_nodes(seg: &Segment, grid: &GridSpec, level: u32) -> Vec<f64> {
    let n = grid.base_cells.max(1);
    let mut base: Vec<f64> = if grid.geometric && seg.coordinate == Coordinate::Radius {
        let ratio = (seg.hi / seg.lo).ln() / n as f64;
        (0..=n).map(|i| seg.lo * (ratio * i as f64).exp()).collect()
    } else {
        let h = (seg.hi - seg.lo) / n as f64;
        (0..=n).map(|i| seg.lo + h * i as f64).collect()
    };
    base[n] = seg.hi;
    base.extend(seg.breakpoints.iter().copied());
    base.sort_by(|a, b| a.partial_cmp(b).unwrap());
    base.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));

    let fine = 1usize << level;
    let phase = grid.phase_per_cell;
    let mut out = Vec::with_capacity(base.len() * fine);
    out.push(base[0]);
    for w in base.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        // oscillatory zones need the full phase budget; evanescent ones only
        // need enough cells to place a sign change, so their share is capped
        let (mut neg, mut pos) = (0.0f64, 0.0f64);
        for f in [0.02, 0.25, 0.5, 0.75, 0.98] {
            let q = (seg.q)(a + f * h);
            if q.is_nan() || q == f64::NEG_INFINITY {
                neg = f64::MAX;
            } else if q < 0.0 {
                neg = neg.max(-q);
            } else {
                pos = pos.max(q);
            }
        }
        let cells = |q: f64| (q.sqrt().min(1e12) * h / phase).ceil() as usize;
        let local = cells(neg).max(cells(pos).min(POS_SUB)).clamp(1, MAX_SUB);
        let m = local * fine;
        for j in 1..m {
            out.push(a + h * j as f64 / m as f64);
        }
        out.push(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frame_maps_are_inverse() {
        for c in [Coordinate::Radius, Coordinate::Log, Coordinate::OuterLogLog, Coordinate::InnerLogLog] {
            for &x in &[0.3, 1.7, 4.0] {
                let (v, dv) = c.to_t_frame(x, 0.8, -1.3);
                let (u, du) = c.from_t_frame(x, v, dv);
                assert_relative_eq!(u, 0.8, max_relative = 1e-14);
                assert_relative_eq!(du, -1.3, max_relative = 1e-14);
                assert_relative_eq!(v, c.scale(x) * 0.8, max_relative = 1e-14);
                let t = c.t_of(x);
                assert_relative_eq!(c.x_of_t(t).unwrap(), x, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn frame_maps_follow_a_solution() {
        // v(t) = sin(t) solves −v'' − v = 0; in s = log t, u = e^{-s/2} sin(e^s)
        let s = 0.9f64;
        let t = s.exp();
        let u = (-0.5 * s).exp() * t.sin();
        // du/ds = −u/2 + e^{-s/2} cos(t) t
        let du = -0.5 * u + (-0.5 * s).exp() * t.cos() * t;
        let (v, dv) = Coordinate::OuterLogLog.to_t_frame(s, u, du);
        assert_relative_eq!(v, t.sin(), max_relative = 1e-13);
        assert_relative_eq!(dv, t.cos(), max_relative = 1e-13);
    }

    #[test]
    fn grid_resolves_oscillation() {
        let p = HalfLineProblem::single(Coordinate::Log, 0.0, 10.0, Arc::new(|_| -400.0));
        let nodes = &p.nodes(0)[0];
        let hmax = nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(20.0 * hmax <= 0.5 + 1e-12);
        assert_eq!(p.cell_count(1), 2 * p.cell_count(0));
    }
}
