//! Prüfer-angle shooting with cellwise-constant coefficients.
//!
//! On each cell `q` is frozen at its midpoint value and the Prüfer angle is
//! advanced by the exact solution of the frozen equation, so the count is
//! exact for the piecewise-constant problem and converges as cells shrink.

use std::f64::consts::PI;

use crate::halfline::HalfLineProblem;

/// Distance (in units of π) of the end phase to a multiple of π treated as a tie.
pub const TIE_TOL: f64 = 1e-9;

const Q_CAP: f64 = 1e200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShootOutcome {
    Count(u64),
    /// The final phase sits on an eigenvalue at zero; refine and retry.
    Tie,
    /// Non-finite coefficient met on the grid.
    BadCoefficient,
}

/// Prüfer state: θ = n·π + φ with φ ∈ [0, π).
#[derive(Debug, Clone, Copy)]
struct Phase {
    n: i64,
    phi: f64,
}

impl Phase {
    fn normalize(mut self) -> Self {
        while self.phi >= PI {
            self.phi -= PI;
            self.n += 1;
        }
        while self.phi < 0.0 {
            if self.phi > -1e-13 {
                self.phi = 0.0;
                break;
            }
            self.phi += PI;
            self.n -= 1;
        }
        self
    }

    fn value(self) -> f64 {
        self.n as f64 * PI + self.phi
    }
}

fn step(p: Phase, q: f64, h: f64) -> Phase {
    let (s, c) = p.phi.sin_cos();
    if q < 0.0 {
        // ψ with tan ψ = k tan φ advances by exactly k·h
        let k = (-q).sqrt();
        let psi = (k * s).atan2(c);
        let total = psi + k * h;
        let turns = (total / PI).floor();
        let rem = total - turns * PI;
        let phi = rem.sin().atan2(k * rem.cos());
        // atan2 returns π for rem = π exactly after rounding
        let (n, phi) = if phi >= PI { (p.n + turns as i64 + 1, phi - PI) } else { (p.n + turns as i64, phi) };
        Phase { n, phi }.normalize()
    } else {
        let (u1, du1) = if q == 0.0 {
            (s + c * h, c)
        } else {
            let k = q.sqrt();
            let th = (k * h).tanh();
            (s + c * th / k, s * k * th + c)
        };
        let raw = u1.atan2(du1);
        let mut d = raw - p.phi;
        // the true change lies in (−π, π)
        if d > PI {
            d -= 2.0 * PI;
        } else if d <= -PI {
            d += 2.0 * PI;
        }
        Phase { n: p.n, phi: p.phi + d }.normalize()
    }
}

/// Counts eigenvalues below zero at refinement `level`.
pub fn shoot(problem: &HalfLineProblem, level: u32) -> ShootOutcome {
    let nodes = problem.nodes(level);
    shoot_on_nodes(problem, &nodes)
}

pub(crate) fn shoot_on_nodes(problem: &HalfLineProblem, nodes: &[Vec<f64>]) -> ShootOutcome {
    let first = &problem.segments[0];
    let alpha = match problem.left.robin_h(first.lo) {
        None => 0.0,
        Some(h) => 1.0f64.atan2(h),
    };
    let mut p = Phase { n: 0, phi: alpha };
    let mut q_last = 0.0;
    for (i, seg) in problem.segments.iter().enumerate() {
        if i > 0 {
            // glue through the t-frame; u keeps its sign so n is unchanged
            let prev = &problem.segments[i - 1];
            let (s, c) = p.phi.sin_cos();
            let (v, dv) = prev.coordinate.to_t_frame(prev.hi, s, c);
            let (u, du) = seg.coordinate.from_t_frame(seg.lo, v, dv);
            let phi = u.atan2(du);
            p = Phase { n: p.n, phi: if phi >= PI { 0.0 } else { phi.max(0.0) } }.normalize();
        }
        let xs = &nodes[i];
        for w in xs.windows(2) {
            let h = w[1] - w[0];
            let mut q = (seg.q)(0.5 * (w[0] + w[1]));
            if q.is_nan() {
                return ShootOutcome::BadCoefficient;
            }
            q = q.clamp(-Q_CAP, Q_CAP);
            q_last = q;
            p = step(p, q, h);
        }
    }
    let last = problem.segments.last().unwrap();
    let beta = match problem.right.robin_h(last.hi) {
        None => PI,
        Some(h) => 1.0f64.atan2(h),
    };
    // eigenvalues below zero: #{k ≥ 0 : β + kπ < θ(b)}
    let x = (p.value() - beta) / PI;
    // ties are judged on the angle of (u, u'/k), the natural scale of the
    // last cell, so a deep evanescent tail does not look like a zero mode
    let k = q_last.abs().max(1.0).sqrt();
    let scaled = |a: f64| {
        let (s, c) = a.sin_cos();
        (k * s).atan2(c).rem_euclid(PI)
    };
    let gap = (scaled(p.phi) - scaled(beta)).abs();
    let gap = gap.min(PI - gap) / PI;
    if gap < TIE_TOL + 1e-12 * x.abs() && x.round() >= 0.0 {
        return ShootOutcome::Tie;
    }
    if x <= 0.0 {
        ShootOutcome::Count(0)
    } else {
        ShootOutcome::Count(x.ceil() as u64)
    }
}
