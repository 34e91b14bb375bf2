//! Magnetic Hardy and Sobolev quotients.
//!
//! Channel constants are the lowest generalized eigenvalue of the channel
//! form `∫ v_t² + (Φ+m)² v²` against `∫ r²ρ v²` (both in `t = log r`) on a
//! truncated domain, found by bisection on the inertia of `A − μB`. They are
//! upper bounds that decrease under refinement and domain growth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::channel::{ChannelProblem, Shift};
use crate::counting::inertia::{assemble, negative_eigenvalues, operator_matrix, MassKind};
use crate::error::{Error, Result};
use crate::field::{FieldProfile, FluxClass};
use crate::halfline::{Coordinate, GridSpec};
use crate::potential::{LogPoint, PotentialProfile, Weight};
use crate::quadrature::integrate_log_line;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardyOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub base_cells: usize,
    pub grid_level: u32,
    /// Each level doubles both extents in `t`.
    pub domain_level: u32,
    pub rel_tol: f64,
}

impl Default for HardyOptions {
    fn default() -> Self {
        Self { r_min: 1e-6, r_max: 1e3, base_cells: 256, grid_level: 2, domain_level: 0, rel_tol: 1e-6 }
    }
}

impl HardyOptions {
    fn t_range(&self) -> Result<(f64, f64)> {
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(Error::Domain(format!("need 0 < r_min < 1 < r_max, got ({}, {})", self.r_min, self.r_max)));
        }
        let f = (1u64 << self.domain_level.min(60)) as f64;
        Ok((self.r_min.ln() * f, self.r_max.ln() * f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyChannel {
    pub m: i64,
    pub value: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub cells: usize,
}

/// Smallest `μ` with `h_m ≥ μ ρ` on the truncated, discretized channel.
pub fn hardy_constant_channel(field: &FieldProfile, m: i64, weight: Weight, opts: &HardyOptions) -> Result<HardyChannel> {
    let (lo, hi) = opts.t_range()?;
    // a zero-coefficient shift only contributes the weight's breakpoints
    let ch = ChannelProblem::with_shared(Arc::new(field.clone()), Arc::new(PotentialProfile::zero()), m, 0.0, Some(Shift { weight, coefficient: 0.0 }));
    let p = ch.halfline_in(Coordinate::Log, lo, hi).with_grid(GridSpec { base_cells: opts.base_cells, ..GridSpec::default() });
    let nodes = p.nodes(opts.grid_level);
    let a = operator_matrix(&p, &nodes, MassKind::Consistent);
    let b = assemble(&p, &nodes, false, |_, t| weight.r2w(LogPoint::from_t(t)), MassKind::Consistent, false);
    if b.diag.iter().all(|d| *d <= 0.0) {
        return Err(Error::Precondition(format!("weight {} vanishes on every node", weight.name())));
    }
    let below = |mu: f64| negative_eigenvalues(&a.pencil(&b, mu)).negative;
    if below(0.0) > 0 {
        return Err(Error::Precondition("channel form is not positive on the truncated domain".into()));
    }
    let mut hi_mu = 1.0;
    while below(hi_mu) == 0 {
        hi_mu *= 2.0;
        if hi_mu > 1e30 {
            return Err(Error::Precondition(format!("weight {} too small to bound the form", weight.name())));
        }
    }
    let mut lo_mu = 0.0;
    while hi_mu - lo_mu > opts.rel_tol * hi_mu {
        let mid = 0.5 * (lo_mu + hi_mu);
        if below(mid) > 0 {
            hi_mu = mid;
        } else {
            lo_mu = mid;
        }
    }
    Ok(HardyChannel { m, value: hi_mu, t_min: lo, t_max: hi, cells: nodes[0].len() - 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub weight: Weight,
    pub value: f64,
    pub argmin_channel: Option<i64>,
    pub per_channel: BTreeMap<i64, f64>,
    /// `((M+1)²/2)/sup r²ρ`, valid for every `|m| > M ≥ n₀`.
    pub tail_floor: f64,
    pub options: HardyOptions,
}

/// Minimum of the channel constants over `|m| ≤ m_max`, together with the tail floor.
pub fn hardy_constant(field: &FieldProfile, weight: Weight, m_max: u64, opts: &HardyOptions) -> Result<HardyReport> {
    let n0 = field.n0();
    if m_max < n0 {
        return Err(Error::Precondition(format!("M_max = {m_max} is below n₀ = {n0}")));
    }
    let m_max_i = m_max as i64;
    let rows: Vec<HardyChannel> = (-m_max_i..=m_max_i).into_par_iter().map(|m| hardy_constant_channel(field, m, weight, opts)).collect::<Result<_>>()?;
    let next = (m_max + 1) as f64;
    let tail_floor = 0.5 * next * next / weight.sup_r2w();
    let mut per_channel = BTreeMap::new();
    let mut best = (tail_floor, None);
    for r in rows {
        if r.value < best.0 {
            best = (r.value, Some(r.m));
        }
        per_channel.insert(r.m, r.value);
    }
    Ok(HardyReport { weight, value: best.0, argmin_channel: best.1, per_channel, tail_floor, options: *opts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSample {
    pub trial: String,
    pub n: Option<u64>,
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: Option<f64>,
}

/// Radial trial profiles `f(r)` carried by a channel `e^{imθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Trial {
    /// `min{(log rn)₊, 1, (log(en/r))₊}`. When the channel's flux offset does
    /// not vanish at the origin the inner ramp sits on `[1, e]` instead.
    PiecewiseLog { n: u64, m: i64 },
    /// `(r/w)^{|m|} e^{−r²/w²}`.
    Gaussian { width: f64, m: i64 },
}

impl Trial {
    pub fn name(&self) -> String {
        match self {
            Trial::PiecewiseLog { n, m } => format!("piecewise-log(n={n},m={m})"),
            Trial::Gaussian { width, m } => format!("gaussian(w={width},m={m})"),
        }
    }

    pub fn channel(&self) -> i64 {
        match *self {
            Trial::PiecewiseLog { m, .. } | Trial::Gaussian { m, .. } => m,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Trial::PiecewiseLog { n, .. } if n < 1 => Err(Error::Domain("trial index n must be ≥ 1".into())),
            Trial::Gaussian { width, .. } if !(width > 0.0 && width.is_finite()) => Err(Error::Domain("gaussian width must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Support in `t`, ramp breakpoints, and `(ln|v|, ln|v_t|)` at `t`.
    fn shape(&self, field: &FieldProfile) -> TrialShape {
        match *self {
            Trial::PiecewiseLog { n, m } => {
                let ln_n = (n as f64).ln();
                let anchored = (field.flux_unchecked(0.0) + m as f64).abs() > 1e-12;
                let start = if anchored { 0.0 } else { -ln_n };
                let end = ln_n + 1.0;
                TrialShape::Ramp { start, up: start + 1.0, down: ln_n, end }
            }
            Trial::Gaussian { width, m } => TrialShape::Gaussian { ln_w: width.ln(), k: m.unsigned_abs() as f64 },
        }
    }
}

enum TrialShape {
    Ramp { start: f64, up: f64, down: f64, end: f64 },
    Gaussian { ln_w: f64, k: f64 },
}

impl TrialShape {
    fn range(&self) -> (f64, f64, Vec<f64>) {
        match *self {
            TrialShape::Ramp { start, up, down, end } => (start, end, vec![up, down]),
            TrialShape::Gaussian { ln_w, .. } => (f64::NEG_INFINITY, f64::INFINITY, vec![ln_w]),
        }
    }

    fn ln_v(&self, t: f64) -> f64 {
        match *self {
            TrialShape::Ramp { start, up, down, end } => {
                let v = (t - start).min(1.0).min(end - t).max(0.0);
                if up > down {
                    // ramps overlap for tiny n: the tent never reaches 1
                    return v.min(0.5 * (end - start)).ln();
                }
                v.ln()
            }
            TrialShape::Gaussian { ln_w, k } => {
                let s = t - ln_w;
                k * s - (2.0 * s).exp()
            }
        }
    }

    fn ln_dv(&self, t: f64) -> f64 {
        match *self {
            TrialShape::Ramp { start, up, down, end } => {
                let on_ramp = (t > start && t < up.min(0.5 * (start + end))) || (t > down.max(0.5 * (start + end)) && t < end);
                if on_ramp {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            TrialShape::Gaussian { ln_w, k } => {
                let s = t - ln_w;
                self.ln_v(t) + (k - 2.0 * (2.0 * s).exp()).abs().ln()
            }
        }
    }
}

const QTOL: f64 = 1e-9;

fn trial_numerator(field: &FieldProfile, trial: &Trial) -> Result<f64> {
    let shape = trial.shape(field);
    let (lo, hi, mut breaks) = shape.range();
    breaks.extend(field.breakpoints().iter().map(|r| r.ln()));
    let m = trial.channel() as f64;
    let kinetic = |p: LogPoint| 2.0 * shape.ln_dv(p.t);
    let magnetic = |p: LogPoint| {
        let c = field.flux_unchecked(p.r()) + m;
        if c == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * c.abs().ln() + 2.0 * shape.ln_v(p.t)
        }
    };
    let a = integrate_log_line(&kinetic, lo, hi, &breaks, QTOL)?;
    let b = integrate_log_line(&magnetic, lo, hi, &breaks, QTOL)?;
    Ok(2.0 * PI * (a + b))
}

fn trial_weighted_power(field: &FieldProfile, trial: &Trial, q: f64, ln_r2w: &dyn Fn(LogPoint) -> f64, wbreaks: &[f64]) -> Result<f64> {
    let shape = trial.shape(field);
    let (lo, hi, mut breaks) = shape.range();
    breaks.extend_from_slice(wbreaks);
    let f = |p: LogPoint| q * shape.ln_v(p.t) + ln_r2w(p);
    Ok(2.0 * PI * integrate_log_line(&f, lo, hi, &breaks, QTOL)?)
}

/// Hardy quotient of the test family in the channel `−k` of an integer-flux field.
pub fn test_family_quotient(field: &FieldProfile, n: u64, weight: Weight) -> Result<QuotientSample> {
    let (total, class) = field.total_flux()?;
    if class == FluxClass::NonInteger {
        return Err(Error::Precondition(format!("test family needs integer total flux, got {total}")));
    }
    let trial = Trial::PiecewiseLog { n, m: -(total.round() as i64) };
    trial.validate()?;
    let numerator = trial_numerator(field, &trial)?;
    let ln_w = |p: LogPoint| weight.ln_r2w(p);
    let denominator = trial_weighted_power(field, &trial, 2.0, &ln_w, &weight.breakpoints_t())?;
    let quotient = (denominator > 0.0).then(|| numerator / denominator);
    Ok(QuotientSample { trial: trial.name(), n: Some(n), numerator, denominator, quotient })
}

/// Form value over `(∫ |u|^q (1+|x|)^{-2} dx)^{2/q}`.
pub fn sobolev_quotient(field: &FieldProfile, q: f64, trial: &Trial) -> Result<QuotientSample> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::Domain(format!("Sobolev exponent must lie in [2, ∞), got {q}")));
    }
    trial.validate()?;
    let numerator = trial_numerator(field, trial)?;
    let ln_w = |p: LogPoint| Weight::InvSqSmooth.ln_r2w(p);
    let integral = trial_weighted_power(field, trial, q, &ln_w, &[])?;
    if integral <= 0.0 {
        return Err(Error::Precondition("trial has zero weighted L^q norm".into()));
    }
    let denominator = integral.powf(2.0 / q);
    let n = match trial {
        Trial::PiecewiseLog { n, .. } => Some(*n),
        _ => None,
    };
    Ok(QuotientSample { trial: trial.name(), n, numerator, denominator, quotient: Some(numerator / denominator) })
}
