//! Radial magnetic fields and their flux profiles.
//!
//! The flux through the disc of radius `r` is `Φ(r) = ∫₀^r B(t) t dt`, i.e. the
//! field integral over the disc divided by 2π. Everything downstream consumes
//! only `Φ`, never `B` directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for calling a total flux an integer.
pub const TAU_INT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldKind {
    Zero,
    /// `B = b0` on `[0, radius]`, zero outside.
    Step { b0: f64, radius: f64 },
    /// `values[i]` on `[radii[i-1], radii[i])` with `radii[-1] = 0`, zero past the last radius.
    PiecewiseConstant { radii: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation of `b` on the nodes `r`; constant `b[0]` below the
    /// first node and zero past the last one.
    Sampled { r: Vec<f64>, b: Vec<f64> },
    /// Flux concentrated at the origin.
    AharonovBohm { flux: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxClass {
    Integer,
    NonInteger,
    Zero,
}

/// A validated field with its cumulative flux table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldKind", into = "FieldKind")]
pub struct FieldProfile {
    kind: FieldKind,
    // flux at the nodes of the piecewise/sampled kinds
    cumulative: Vec<f64>,
}

impl From<FieldProfile> for FieldKind {
    fn from(f: FieldProfile) -> Self {
        f.kind
    }
}

impl TryFrom<FieldKind> for FieldProfile {
    type Error = Error;
    fn try_from(kind: FieldKind) -> Result<Self> {
        FieldProfile::new(kind)
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

// ∫_{r0}^{x} (b0 + s (t - r0)) t dt
fn linear_segment_flux(r0: f64, b0: f64, s: f64, x: f64) -> f64 {
    let sq = 0.5 * (x * x - r0 * r0);
    let cube = (x * x * x - r0 * r0 * r0) / 3.0;
    b0 * sq + s * (cube - r0 * sq)
}

impl FieldProfile {
    pub fn new(kind: FieldKind) -> Result<Self> {
        let mut cumulative = Vec::new();
        match &kind {
            FieldKind::Zero => {}
            FieldKind::Step { b0, radius } => {
                if !(radius.is_finite() && *radius > 0.0 && b0.is_finite()) {
                    return Err(Error::Domain("step field needs finite b0 and radius > 0".into()));
                }
            }
            FieldKind::PiecewiseConstant { radii, values } => {
                if radii.len() != values.len() || radii.is_empty() {
                    return Err(Error::Domain("piecewise field: radii and values must have equal nonzero length".into()));
                }
                if radii[0] <= 0.0 || !strictly_increasing(radii) || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("piecewise field: radii must be positive and increasing".into()));
                }
                let mut acc = 0.0;
                let mut prev = 0.0;
                for (r, b) in radii.iter().zip(values) {
                    acc += b * 0.5 * (r * r - prev * prev);
                    cumulative.push(acc);
                    prev = *r;
                }
            }
            FieldKind::Sampled { r, b } => {
                if r.len() != b.len() || r.len() < 2 {
                    return Err(Error::Domain("sampled field: need at least two nodes".into()));
                }
                if r[0] < 0.0 || !strictly_increasing(r) || b.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("sampled field: nodes must be nonnegative and increasing".into()));
                }
                let mut acc = b[0] * 0.5 * r[0] * r[0];
                cumulative.push(acc);
                for i in 0..r.len() - 1 {
                    let s = (b[i + 1] - b[i]) / (r[i + 1] - r[i]);
                    acc += linear_segment_flux(r[i], b[i], s, r[i + 1]);
                    cumulative.push(acc);
                }
            }
            FieldKind::AharonovBohm { flux } => {
                if !flux.is_finite() {
                    return Err(Error::Domain("AB flux must be finite".into()));
                }
            }
        }
        Ok(Self { kind, cumulative })
    }

    pub fn zero() -> Self {
        Self::new(FieldKind::Zero).unwrap()
    }

    pub fn step(b0: f64, radius: f64) -> Result<Self> {
        Self::new(FieldKind::Step { b0, radius })
    }

    pub fn aharonov_bohm(flux: f64) -> Result<Self> {
        Self::new(FieldKind::AharonovBohm { flux })
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn is_aharonov_bohm(&self) -> bool {
        matches!(self.kind, FieldKind::AharonovBohm { .. })
    }

    /// Flux through the disc of radius `r`.
    pub fn flux_at(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!("flux_at needs r >= 0, got {r}")));
        }
        Ok(self.flux_unchecked(r))
    }

    /// `flux_at` without the sign check; `r = +inf` gives the total flux.
    pub(crate) fn flux_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::AharonovBohm { flux } => *flux,
            FieldKind::Step { b0, radius } => {
                let x = r.min(*radius);
                0.5 * b0 * x * x
            }
            FieldKind::PiecewiseConstant { radii, values } => {
                let i = radii.partition_point(|&ri| ri <= r);
                if i == radii.len() {
                    return *self.cumulative.last().unwrap();
                }
                let (base, lo) = if i == 0 { (0.0, 0.0) } else { (self.cumulative[i - 1], radii[i - 1]) };
                base + values[i] * 0.5 * (r * r - lo * lo)
            }
            FieldKind::Sampled { r: nodes, b } => {
                if r <= nodes[0] {
                    return b[0] * 0.5 * r * r;
                }
                let n = nodes.len();
                if r >= nodes[n - 1] {
                    return self.cumulative[n - 1];
                }
                let i = nodes.partition_point(|&x| x <= r) - 1;
                let s = (b[i + 1] - b[i]) / (nodes[i + 1] - nodes[i]);
                self.cumulative[i] + linear_segment_flux(nodes[i], b[i], s, r)
            }
        }
    }

    pub fn total_flux(&self) -> Result<(f64, FluxClass)> {
        if let FieldKind::Sampled { b, .. } = &self.kind {
            let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let last = b.last().unwrap().abs();
            if last > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotConverged(format!(
                    "sampled field tail has not decayed: last sample B = {last:e}"
                )));
            }
        }
        let value = self.flux_unchecked(f64::INFINITY);
        Ok((value, classify(value)))
    }

    /// The gauge `a(r) = Φ(r)/r`.
    pub fn gauge_a(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!("gauge_a needs r >= 0, got {r}")));
        }
        if r == 0.0 {
            if self.is_aharonov_bohm() {
                return Err(Error::Singularity("AB gauge is singular at the origin".into()));
            }
            return Ok(0.0);
        }
        Ok(self.flux_unchecked(r) / r)
    }

    /// Radii where `Φ` changes its closed form.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            FieldKind::Zero | FieldKind::AharonovBohm { .. } => vec![],
            FieldKind::Step { radius, .. } => vec![*radius],
            FieldKind::PiecewiseConstant { radii, .. } => radii.clone(),
            FieldKind::Sampled { r, .. } => r.iter().copied().filter(|x| *x > 0.0).collect(),
        }
    }

    /// `sup_r |Φ(r)|`.
    pub fn sup_abs_flux(&self) -> f64 {
        match &self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::AharonovBohm { flux } => flux.abs(),
            FieldKind::Step { b0, radius } => 0.5 * b0.abs() * radius * radius,
            FieldKind::PiecewiseConstant { .. } => self.cumulative.iter().fold(0.0, |m, v| m.max(v.abs())),
            FieldKind::Sampled { r, b } => {
                let mut best = self.cumulative.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                // interior extrema sit where the interpolated B changes sign
                for i in 0..r.len() - 1 {
                    if b[i] * b[i + 1] < 0.0 {
                        let root = r[i] + b[i] / (b[i] - b[i + 1]) * (r[i + 1] - r[i]);
                        best = best.max(self.flux_unchecked(root).abs());
                    }
                }
                best
            }
        }
    }

    /// Channels with `|m| > n₀` satisfy `(Φ(r)+m)² ≥ m²/2` for every `r`.
    ///
    /// From `|Φ+m| ≥ |m| − S` the bound needs `|m|(1 − 1/√2) ≥ S`,
    /// which gives the factor `2 + √2`.
    pub fn n0(&self) -> u64 {
        ((2.0 + std::f64::consts::SQRT_2) * self.sup_abs_flux()).ceil() as u64
    }

    pub fn check_flux_assumption(&self, epsilon: f64, r_max: f64, grid: usize) -> Result<AssumptionReport> {
        check_flux_assumption(self, epsilon, r_max, grid)
    }
}

pub fn classify(value: f64) -> FluxClass {
    if value.abs() <= TAU_INT {
        FluxClass::Zero
    } else if (value - value.round()).abs() <= TAU_INT {
        FluxClass::Integer
    } else {
        FluxClass::NonInteger
    }
}

fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub epsilon: f64,
    /// Open intervals `(α_j, β_j)`; `β = +inf` marks an unbounded trailing interval.
    pub intervals: Vec<(f64, f64)>,
    pub satisfied: bool,
    pub witness: Option<String>,
    /// Smallest `A` with `|I_j| ≤ A·min{1+α_j, α_j−β_{j−1}, α_{j+1}−β_j}` for each `j` separately.
    pub constant_per_interval: Option<f64>,
    /// Smallest `A` when the minimum is taken over all `j` at once.
    pub constant_global_min: Option<f64>,
}

pub fn check_flux_assumption(field: &FieldProfile, epsilon: f64, r_max: f64, grid: usize) -> Result<AssumptionReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    if !(r_max > 0.0) || grid < 2 {
        return Err(Error::Precondition("need r_max > 0 and at least two grid cells".into()));
    }
    let g = |r: f64| dist_to_integer(field.flux_unchecked(r)) - epsilon;
    let h = r_max / grid as f64;
    let bisect = |mut a: f64, mut b: f64| {
        let ga = g(a) < 0.0;
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if (g(m) < 0.0) == ga {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-14 * b.max(1.0) {
                break;
            }
        }
        0.5 * (a + b)
    };

    let mut intervals = Vec::new();
    // r = 0 is excluded from the set (r > 0), but the set can start there
    let mut inside = g(0.0) < 0.0;
    let mut start = 0.0;
    let mut prev = 0.0;
    for i in 1..=grid {
        let r = i as f64 * h;
        let now = g(r) < 0.0;
        let probes = [prev + 0.25 * h, prev + 0.5 * h, prev + 0.75 * h];
        if now == inside && probes.iter().any(|&p| (g(p) < 0.0) != inside) {
            return Err(Error::Resolution {
                message: format!("near-integer set changes twice inside ({prev}, {r})"),
                suggested: grid * 4,
            });
        }
        if now != inside {
            let root = bisect(prev, r);
            if now {
                start = root;
            } else {
                intervals.push((start, root));
            }
            inside = now;
        }
        prev = r;
    }

    let (total, class) = match field.total_flux() {
        Ok(v) => v,
        Err(_) => {
            let v = field.flux_unchecked(f64::INFINITY);
            (v, classify(v))
        }
    };
    let stabilizes = dist_to_integer(total) < epsilon;
    let mut witness = None;
    let mut satisfied = true;
    if inside {
        if stabilizes {
            intervals.push((start, f64::INFINITY));
        } else {
            // the set closes beyond r_max; report the interval truncated there
            intervals.push((start, r_max));
        }
    }
    if matches!(class, FluxClass::Integer | FluxClass::Zero) {
        satisfied = false;
        let from = intervals.last().map(|iv| iv.0).unwrap_or(r_max);
        if intervals.last().map(|iv| iv.1.is_finite()).unwrap_or(true) {
            intervals.push((from.max(r_max), f64::INFINITY));
        }
        witness = Some(format!(
            "total flux {total} is an integer: Φ(r) stays within ε of it on ({}, ∞)",
            intervals.last().unwrap().0
        ));
    } else if stabilizes {
        satisfied = false;
        witness = Some(format!("flux settles within ε of an integer beyond r = {}", intervals.last().unwrap().0));
    }

    let (per, global) = assumption_constants(&intervals);
    Ok(AssumptionReport {
        epsilon,
        intervals,
        satisfied,
        witness,
        constant_per_interval: per,
        constant_global_min: global,
    })
}

// Both readings of the interval-length condition; None when some interval is unbounded.
fn assumption_constants(intervals: &[(f64, f64)]) -> (Option<f64>, Option<f64>) {
    if intervals.is_empty() {
        return (Some(0.0), Some(0.0));
    }
    if intervals.iter().any(|iv| !iv.1.is_finite()) {
        return (None, None);
    }
    let n = intervals.len();
    let mut mins = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = intervals[j];
        let left_gap = if j == 0 { f64::INFINITY } else { a - intervals[j - 1].1 };
        let right_gap = if j + 1 == n { f64::INFINITY } else { intervals[j + 1].0 - b };
        mins.push((1.0 + a).min(left_gap).min(right_gap));
    }
    let per = intervals
        .iter()
        .zip(&mins)
        .map(|(iv, m)| (iv.1 - iv.0) / m)
        .fold(0.0, f64::max);
    let global_min = mins.iter().copied().fold(f64::INFINITY, f64::min);
    let longest = intervals.iter().map(|iv| iv.1 - iv.0).fold(0.0, f64::max);
    (Some(per), Some(longest / global_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn step_flux_values() {
        let f = FieldProfile::step(1.0, 1.0).unwrap();
        assert_relative_eq!(f.flux_at(0.5).unwrap(), 0.125);
        assert_relative_eq!(f.flux_at(2.0).unwrap(), 0.5);
        assert!(f.flux_at(-1.0).is_err());
        assert_eq!(FieldProfile::zero().flux_at(3.0).unwrap(), 0.0);
    }

    #[test]
    fn totals_and_classes() {
        assert_eq!(FieldProfile::step(2.0, 1.0).unwrap().total_flux().unwrap(), (1.0, FluxClass::Integer));
        assert_eq!(FieldProfile::step(1.0, 1.0).unwrap().total_flux().unwrap(), (0.5, FluxClass::NonInteger));
        assert_eq!(FieldProfile::zero().total_flux().unwrap(), (0.0, FluxClass::Zero));
        assert_eq!(FieldProfile::aharonov_bohm(0.3).unwrap().total_flux().unwrap().0, 0.3);
    }

    #[test]
    fn gauge() {
        let f = FieldProfile::step(1.0, 1.0).unwrap();
        assert_relative_eq!(f.gauge_a(0.5).unwrap(), 0.25);
        assert_relative_eq!(f.gauge_a(2.0).unwrap(), 0.25);
        let ab = FieldProfile::aharonov_bohm(0.5).unwrap();
        assert_relative_eq!(ab.gauge_a(0.25).unwrap(), 2.0);
        assert!(matches!(ab.gauge_a(0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn piecewise_matches_sum_of_steps() {
        let f = FieldProfile::new(FieldKind::PiecewiseConstant { radii: vec![1.0, 2.0], values: vec![1.0, -0.5] }).unwrap();
        // 1/2 - 0.5 * (4 - 1)/2
        assert_relative_eq!(f.total_flux().unwrap().0, 0.5 - 0.75);
        assert_relative_eq!(f.flux_at(1.5).unwrap(), 0.5 - 0.25 * (2.25 - 1.0));
        assert_relative_eq!(f.sup_abs_flux(), 0.5);
    }

    #[test]
    fn sampled_linear_field_is_integrated_exactly() {
        // B(r) = 1 - r on [0,1]: Φ(r) = r²/2 - r³/3
        let f = FieldProfile::new(FieldKind::Sampled { r: vec![0.0, 1.0], b: vec![1.0, 0.0] }).unwrap();
        assert_relative_eq!(f.flux_at(0.5).unwrap(), 0.125 - 0.125 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(f.total_flux().unwrap().0, 1.0 / 6.0, epsilon = 1e-15);
        let bad = FieldProfile::new(FieldKind::Sampled { r: vec![0.0, 1.0], b: vec![1.0, 1.0] }).unwrap();
        assert!(bad.total_flux().is_err());
    }

    #[test]
    fn n0_guarantees_half_centrifugal() {
        // a channel that the smaller factor 1+√2 would wrongly exclude
        let f = FieldProfile::aharonov_bohm(1.2).unwrap();
        let m = -4.0f64;
        assert!((1.2 + m).powi(2) < m * m / 2.0);
        assert!(f.n0() >= 4);
        for m in (f.n0() as i64 + 1)..40 {
            for s in [-1.0, 1.0] {
                let mm = s * m as f64;
                assert!((1.2 + mm).powi(2) >= mm * mm / 2.0);
            }
        }
    }

    #[test]
    fn assumption_examples() {
        let half = FieldProfile::step(1.0, 1.0).unwrap();
        let rep = half.check_flux_assumption(0.1, 10.0, 2000).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.intervals.len(), 1);
        assert_relative_eq!(rep.intervals[0].1, 0.2f64.sqrt(), epsilon = 1e-12);

        let one = FieldProfile::step(2.0, 1.0).unwrap();
        let rep = one.check_flux_assumption(0.1, 10.0, 2000).unwrap();
        assert!(!rep.satisfied);
        let last = rep.intervals.last().unwrap();
        assert!(last.1.is_infinite());
        // Φ(r) = r² crosses 1 - ε at r = √0.9
        assert_relative_eq!(last.0, 0.9f64.sqrt(), epsilon = 1e-12);

        let ab = FieldProfile::aharonov_bohm(0.5).unwrap();
        let rep = ab.check_flux_assumption(0.25, 10.0, 100).unwrap();
        assert!(rep.satisfied && rep.intervals.is_empty());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        // flux oscillates through an integer on a scale far below the grid
        let f = FieldProfile::new(FieldKind::PiecewiseConstant {
            radii: vec![1.4, 1.5, 1.6],
            values: vec![0.0, 80.0, -80.0 * 0.29 / 0.31],
        })
        .unwrap();
        let err = f.check_flux_assumption(0.1, 10.0, 10).unwrap_err();
        assert!(matches!(err, Error::Resolution { .. }));
    }
}
