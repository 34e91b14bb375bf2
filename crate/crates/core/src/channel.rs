//! Angular-momentum channels `h_m` and their half-line forms.
//!
//! Channel `m` carries the effective potential `(Φ(r)+m)²/r² + shift − λV̂(r)`.
//! After `u = √r f` it becomes `−u″ + q u` on the half-line, and in the
//! log variable `t = log r` the coefficient is
//! `q_t = (Φ(e^t)+m)² + r²·shift − λ r² V̂`, with the `−1/(4r²)` absorbed.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::halfline::{Boundary, Coefficient, Coordinate, GridSpec, HalfLineProblem, Segment};
use crate::potential::{LogPoint, PotentialProfile, SingularityTag, DecayTag, Weight};

/// A positive term `coefficient · ρ(r)` added to the channel operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shift {
    pub weight: Weight,
    pub coefficient: f64,
}

#[derive(Debug, Clone)]
pub struct ChannelProblem {
    pub m: i64,
    pub field: Arc<FieldProfile>,
    pub potential: Arc<PotentialProfile>,
    pub lambda: f64,
    pub shift: Option<Shift>,
}

pub fn build_channel(field: &FieldProfile, potential: &PotentialProfile, m: i64, lambda: f64, shift: Option<Shift>) -> ChannelProblem {
    ChannelProblem {
        m,
        field: Arc::new(field.clone()),
        potential: Arc::new(potential.clone()),
        lambda,
        shift,
    }
}

impl ChannelProblem {
    pub fn with_shared(field: Arc<FieldProfile>, potential: Arc<PotentialProfile>, m: i64, lambda: f64, shift: Option<Shift>) -> Self {
        Self { m, field, potential, lambda, shift }
    }

    /// `Φ(r) + m`.
    fn offset(&self, r: f64) -> f64 {
        self.field.flux_unchecked(r) + self.m as f64
    }

    /// `(Φ(r)+m)²/r²`.
    pub fn effective_centrifugal(&self, r: f64) -> f64 {
        let c = self.offset(r);
        c * c / (r * r)
    }

    pub fn shift_value(&self, r: f64) -> f64 {
        self.shift.map_or(0.0, |s| s.coefficient * s.weight.value(r))
    }

    /// `(Φ+m)²/r² + shift − λV̂`.
    pub fn effective_potential(&self, r: f64) -> f64 {
        let v = if self.lambda == 0.0 { 0.0 } else { self.lambda * self.potential.angular_average(r).unwrap_or(f64::INFINITY) };
        self.effective_centrifugal(r) + self.shift_value(r) - v
    }

    fn ln_shift(&self, p: LogPoint) -> f64 {
        match self.shift {
            Some(s) if s.coefficient > 0.0 => s.coefficient.ln() + s.weight.ln_r2w(p),
            _ => f64::NEG_INFINITY,
        }
    }

    fn ln_potential(&self, p: LogPoint) -> f64 {
        if self.lambda > 0.0 {
            self.lambda.ln() + self.potential.ln_r2v_hat(p)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `q_t` scaled by `e^{ln_jac}`, built term by term in log space.
    fn scaled_log_coefficient(&self, p: LogPoint, ln_jac: f64) -> f64 {
        let c = self.offset(p.r());
        let cent = if c == 0.0 { 0.0 } else { (2.0 * c.abs().ln() + ln_jac).exp() };
        cent + (self.ln_shift(p) + ln_jac).exp() - (self.ln_potential(p) + ln_jac).exp()
    }

    /// Coefficient `q` of the channel in the given coordinate.
    pub fn coefficient(&self, coordinate: Coordinate, x: f64) -> f64 {
        match coordinate {
            Coordinate::Radius => {
                let c = self.offset(x);
                let p = LogPoint::from_r(x);
                let ln_r2 = 2.0 * p.t;
                (c * c - 0.25) / (x * x) + (self.ln_shift(p) - ln_r2).exp() - (self.ln_potential(p) - ln_r2).exp()
            }
            Coordinate::Log => self.scaled_log_coefficient(LogPoint::from_t(x), 0.0),
            Coordinate::OuterLogLog => 0.25 + self.scaled_log_coefficient(LogPoint::from_outer(x), 2.0 * x),
            Coordinate::InnerLogLog => 0.25 + self.scaled_log_coefficient(LogPoint::from_inner(x), -2.0 * x),
        }
    }

    fn coefficient_fn(&self, coordinate: Coordinate) -> Coefficient {
        let me = self.clone();
        Arc::new(move |x| me.coefficient(coordinate, x))
    }

    /// Radii where the coefficient kinks.
    pub fn breakpoints_r(&self) -> Vec<f64> {
        let mut b = self.field.breakpoints();
        b.extend(self.potential.breakpoints());
        if let Some(s) = self.shift {
            b.extend(s.weight.breakpoints_t().iter().map(|t| t.exp()));
        }
        b
    }

    fn segment(&self, coordinate: Coordinate, lo: f64, hi: f64) -> Segment {
        let bps = self
            .breakpoints_r()
            .iter()
            .filter_map(|r| coordinate.x_of_t(r.ln()))
            .collect();
        Segment::new(coordinate, lo, hi, self.coefficient_fn(coordinate)).with_breakpoints(bps)
    }

    /// Single-segment problem in the given coordinate with Dirichlet ends.
    pub fn halfline_in(&self, coordinate: Coordinate, lo: f64, hi: f64) -> HalfLineProblem {
        HalfLineProblem {
            segments: vec![self.segment(coordinate, lo, hi)],
            left: Boundary::Dirichlet,
            right: Boundary::Dirichlet,
            grid: GridSpec::default(),
        }
    }

    /// Chain with optional inner and outer log-log pieces around a log piece.
    /// The middle piece spans `t ∈ [t_a, t_b]`; the inner piece reaches down
    /// to `x = x_lo` and the outer piece up to `s = s_hi`.
    pub fn chain(&self, inner: Option<f64>, t_a: f64, t_b: f64, outer: Option<f64>) -> Result<HalfLineProblem> {
        let mut segments = Vec::new();
        if let Some(x_lo) = inner {
            if !(t_a < 0.0) {
                return Err(Error::Domain("inner piece needs the middle piece to start at t < 0".into()));
            }
            let x_hi = -(-t_a).ln();
            segments.push(self.segment(Coordinate::InnerLogLog, x_lo, x_hi));
        }
        segments.push(self.segment(Coordinate::Log, t_a, t_b));
        if let Some(s_hi) = outer {
            if !(t_b > 0.0) {
                return Err(Error::Domain("outer piece needs the middle piece to end at t > 0".into()));
            }
            segments.push(self.segment(Coordinate::OuterLogLog, t_b.ln(), s_hi));
        }
        let p = HalfLineProblem { segments, left: Boundary::Dirichlet, right: Boundary::Dirichlet, grid: GridSpec::default() };
        p.validate()?;
        Ok(p)
    }
}

/// Half-line form of a channel in the radius variable on `(r_min, r_max)`.
pub fn liouville_halfline(channel: &ChannelProblem, r_min: f64, r_max: f64) -> Result<HalfLineProblem> {
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(Error::Domain(format!("need 0 < r_min < r_max, got ({r_min}, {r_max})")));
    }
    Ok(channel.halfline_in(Coordinate::Radius, r_min, r_max))
}

fn transform_boundary(b: Boundary, from: Coordinate, x_old: f64, to: Coordinate, x_new: f64) -> Boundary {
    match b.robin_h(x_old) {
        None => Boundary::Dirichlet,
        Some(h) => {
            let (v, dv) = from.to_t_frame(x_old, 1.0, h);
            let (u, du) = to.from_t_frame(x_new, v, dv);
            let h_new = du / u;
            if h_new.abs() < 1e-12 {
                Boundary::Neumann
            } else {
                Boundary::Robin(h_new)
            }
        }
    }
}

/// One logarithmic change of variables of a single-segment problem:
/// `r → t = log r`, then `t → s = log t` (for `t > 0`) or `t → −log(−t)` (for `t < 0`).
/// The coefficient becomes `1/4 + J·q` with the matching Jacobian and the count is preserved.
pub fn log_transform(problem: &HalfLineProblem) -> Result<HalfLineProblem> {
    if problem.segments.len() != 1 {
        return Err(Error::Precondition("log_transform acts on single-segment problems".into()));
    }
    let seg = &problem.segments[0];
    let from = seg.coordinate;
    let to = match from {
        Coordinate::Radius => {
            if !(seg.lo > 0.0) {
                return Err(Error::Domain("log transform needs r_min > 0".into()));
            }
            Coordinate::Log
        }
        Coordinate::Log if seg.lo > 0.0 => Coordinate::OuterLogLog,
        Coordinate::Log if seg.hi < 0.0 => Coordinate::InnerLogLog,
        Coordinate::Log => return Err(Error::Domain("t-domain must not contain t = 0 for a second log transform".into())),
        _ => return Err(Error::Precondition("no further log transform defined".into())),
    };
    let q = seg.q.clone();
    // coefficient in t, then in the new variable
    let q_t: Coefficient = match from {
        Coordinate::Radius => Arc::new(move |t: f64| {
            let r = t.exp();
            0.25 + r * r * q(r)
        }),
        _ => q,
    };
    let q_new: Coefficient = match to {
        Coordinate::Log => q_t,
        Coordinate::OuterLogLog => Arc::new(move |s: f64| 0.25 + (2.0 * s).exp() * q_t(s.exp())),
        Coordinate::InnerLogLog => Arc::new(move |x: f64| 0.25 + (-2.0 * x).exp() * q_t(-(-x).exp())),
        Coordinate::Radius => unreachable!(),
    };
    let map = |x: f64| to.x_of_t(from.t_of(x)).unwrap();
    let (lo, hi) = (map(seg.lo), map(seg.hi));
    let bps = seg.breakpoints.iter().map(|&x| map(x)).collect();
    Ok(HalfLineProblem {
        segments: vec![Segment::new(to, lo, hi, q_new).with_breakpoints(bps)],
        left: transform_boundary(problem.left, from, seg.lo, to, lo),
        right: transform_boundary(problem.right, from, seg.hi, to, hi),
        grid: problem.grid,
    })
}

/// Channels with `|m| > M` have nonnegative operators.
///
/// For `|m| > n₀` one has `(Φ+m)² ≥ m²/2`, and `m²/2 > λ sup r²V̂` once
/// `|m| > √(2λ sup r²V̂)`.
pub fn channel_cutoff(field: &FieldProfile, potential: &PotentialProfile, lambda: f64) -> Result<u64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("coupling must be finite and nonnegative, got {lambda}")));
    }
    let sup = potential.sup_r2v_hat();
    if !sup.is_finite() {
        return Err(Error::Precondition("r²V̂ is unbounded; cannot certify a channel cutoff".into()));
    }
    let n0 = field.n0();
    let m_pot = (2.0 * lambda * sup).sqrt().ceil() as u64;
    Ok(n0.max(m_pot))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableChoice {
    #[default]
    Auto,
    R,
    Log,
    Loglog,
}

/// Truncation of the radial half-line and its growth policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub variable: VariableChoice,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self { r_min: 1e-6, r_max: 1e3, variable: VariableChoice::Auto }
    }
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(Error::Domain(format!("need 0 < r_min < 1 < r_max, got ({}, {})", self.r_min, self.r_max)));
        }
        Ok(())
    }

    /// Which log-log pieces a channel problem gets under this spec.
    pub fn pieces(&self, potential: &PotentialProfile) -> (bool, bool) {
        match self.variable {
            VariableChoice::Loglog => (true, true),
            VariableChoice::Auto => (
                potential.singularity_tag() == SingularityTag::OriginLogSquare,
                potential.decay_tag() == DecayTag::Borderline,
            ),
            _ => (false, false),
        }
    }

    /// The channel problem at domain level `level`: every level doubles the
    /// extent of the outermost coordinate at each end (`r` itself for the
    /// radius variable).
    pub fn problem(&self, channel: &ChannelProblem, level: u32, grid: GridSpec) -> Result<HalfLineProblem> {
        self.validate()?;
        let f = (1u64 << level.min(60)) as f64;
        let t_lo = self.r_min.ln();
        let t_hi = self.r_max.ln();
        let p = match self.variable {
            VariableChoice::R => liouville_halfline(channel, self.r_min / f, self.r_max * f)?,
            _ => {
                let (inner, outer) = self.pieces(&channel.potential);
                if (inner && t_lo >= -1.0) || (outer && t_hi <= 1.0) {
                    return Err(Error::Domain("log-log pieces need r_min < 1/e and r_max > e".into()));
                }
                let a = if inner { -1.0 } else { t_lo * f };
                let b = if outer { 1.0 } else { t_hi * f };
                let x_lo = inner.then(|| -(-t_lo).ln() * f);
                let s_hi = outer.then(|| t_hi.ln() * f);
                channel.chain(x_lo, a, b, s_hi)?
            }
        };
        Ok(p.with_grid(grid))
    }
}

/// Compact description of a problem's domain, e.g. `t[-13.8,6.9]`.
pub fn describe_domain(p: &HalfLineProblem) -> String {
    p.segments
        .iter()
        .map(|s| format!("{}[{:.6},{:.6}]", s.coordinate.name(), s.lo, s.hi))
        .collect::<Vec<_>>()
        .join("+")
}
