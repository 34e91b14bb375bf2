//! Electric potentials, weights, weighted norms and bound right-hand sides.

mod bounds;
mod norms;
mod weights;

pub use bounds::{bound_rhs, BoundReport, TheoremId};
pub use norms::{weighted_norm, WeightId};
pub use weights::Weight;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point on the radial half-line, carried as `t = log r` together with
/// `log|t|` so that points with `|t|` beyond `f64` range stay usable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPoint {
    pub t: f64,
    pub ln_abs_t: f64,
}

impl LogPoint {
    pub fn from_t(t: f64) -> Self {
        Self { t, ln_abs_t: t.abs().ln() }
    }

    pub fn from_r(r: f64) -> Self {
        Self::from_t(r.ln())
    }

    /// `t = e^x`, used past `r = e`.
    pub fn from_outer(x: f64) -> Self {
        Self { t: x.exp(), ln_abs_t: x }
    }

    /// `t = −e^{−x}`, used below `r = 1/e`.
    pub fn from_inner(x: f64) -> Self {
        Self { t: -(-x).exp(), ln_abs_t: -x }
    }

    /// The radius, which may under- or overflow to `0` or `inf`.
    pub fn r(&self) -> f64 {
        self.t.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialKind {
    Zero,
    IndicatorDisk { radius: f64 },
    /// `values[i]` on `[radii[i-1], radii[i])`, zero past the last radius.
    Steps { radii: Vec<f64>, values: Vec<f64> },
    /// `r⁻² |ln r|⁻² (ln|ln r|)^{−1/σ}` for `r < e⁻²`.
    VSigma { sigma: f64 },
    /// `r⁻² |ln r|⁻² (ln ln r)^{−1/σ}` for `r > e²`.
    WSigma { sigma: f64 },
    /// `min(β², β²/r²)`.
    UBeta { beta: f64 },
    /// `(1 − r²)²` on the unit disc.
    Bump,
    /// `amplitude · exp(−r²/width²)`.
    Gaussian { amplitude: f64, width: f64 },
    /// Linear interpolation on the nodes, `v[0]` below the first node, zero past the last.
    Sampled { r: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityTag {
    None,
    OriginLogSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayTag {
    Compact,
    Integrable,
    Borderline,
    /// `r⁻²` decay of the `U_β` family; not integrable on the plane.
    InverseSquare,
}

/// Angular factor made of constant sectors `[from, to)` in radians; zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularFactor {
    pub sectors: Vec<(f64, f64, f64)>,
}

impl AngularFactor {
    pub fn validate(&self) -> Result<()> {
        let mut s = self.sectors.clone();
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (i, &(a, b, g)) in s.iter().enumerate() {
            if !(0.0..=2.0 * PI).contains(&a) || !(a..=2.0 * PI).contains(&b) || !(0.0..=1.0).contains(&g) {
                return Err(Error::Domain(format!("bad angular sector ({a}, {b}, {g})")));
            }
            if i > 0 && a < s[i - 1].1 {
                return Err(Error::Domain("angular sectors overlap".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let th = theta.rem_euclid(2.0 * PI);
        self.sectors.iter().find(|s| th >= s.0 && th < s.1).map(|s| s.2).unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.sectors.iter().map(|s| (s.1 - s.0) * s.2).sum::<f64>() / (2.0 * PI)
    }

    pub fn sup(&self) -> f64 {
        self.sectors.iter().map(|s| s.2).fold(0.0, f64::max)
    }
}

fn default_strength() -> f64 {
    1.0
}

/// `V(r, θ) = strength · V(r) · g(θ)`, with `g ≡ 1` when no angular factor is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialProfile {
    pub radial: RadialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<AngularFactor>,
    #[serde(default = "default_strength")]
    pub strength: f64,
}

fn increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

impl PotentialProfile {
    pub fn radial(radial: RadialKind) -> Result<Self> {
        let p = Self { radial, angular: None, strength: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self { radial: RadialKind::Zero, angular: None, strength: 1.0 }
    }

    pub fn indicator_disk(radius: f64) -> Result<Self> {
        Self::radial(RadialKind::IndicatorDisk { radius })
    }

    pub fn v_sigma(sigma: f64) -> Result<Self> {
        Self::radial(RadialKind::VSigma { sigma })
    }

    pub fn w_sigma(sigma: f64) -> Result<Self> {
        Self::radial(RadialKind::WSigma { sigma })
    }

    pub fn steps(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::radial(RadialKind::Steps { radii, values })
    }

    pub fn with_angular(mut self, angular: AngularFactor) -> Result<Self> {
        angular.validate()?;
        self.angular = Some(angular);
        Ok(self)
    }

    /// `λ·V`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut p = self.clone();
        p.strength *= lambda;
        p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::Domain("potential strength must be finite and nonnegative".into()));
        }
        if let Some(a) = &self.angular {
            a.validate()?;
        }
        let bad = |m: &str| Err(Error::Domain(m.to_string()));
        match &self.radial {
            RadialKind::Zero | RadialKind::Bump => Ok(()),
            RadialKind::IndicatorDisk { radius } if !(*radius > 0.0 && radius.is_finite()) => bad("indicator radius must be positive"),
            RadialKind::Steps { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() || radii[0] <= 0.0 || !increasing(radii) {
                    return bad("step potential needs positive increasing radii matching values");
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return bad("step potential values must be nonnegative");
                }
                Ok(())
            }
            RadialKind::VSigma { sigma } | RadialKind::WSigma { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => bad("sigma must be positive"),
            RadialKind::UBeta { beta } if !(*beta > 0.0 && beta.is_finite()) => bad("U_beta kind needs beta > 0"),
            RadialKind::Gaussian { amplitude, width } if !(*amplitude >= 0.0 && *width > 0.0) => bad("gaussian needs amplitude >= 0 and width > 0"),
            RadialKind::Sampled { r, v } => {
                if r.len() < 2 || r.len() != v.len() || r[0] < 0.0 || !increasing(r) {
                    return bad("sampled potential needs at least two increasing nodes");
                }
                if v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                    return bad("sampled potential values must be nonnegative");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn singularity_tag(&self) -> SingularityTag {
        match self.radial {
            RadialKind::VSigma { .. } => SingularityTag::OriginLogSquare,
            _ => SingularityTag::None,
        }
    }

    pub fn decay_tag(&self) -> DecayTag {
        match self.radial {
            RadialKind::WSigma { .. } => DecayTag::Borderline,
            RadialKind::UBeta { .. } => DecayTag::InverseSquare,
            RadialKind::Gaussian { .. } => DecayTag::Integrable,
            _ => DecayTag::Compact,
        }
    }

    fn mean_factor(&self) -> f64 {
        self.strength * self.angular.as_ref().map_or(1.0, |a| a.mean())
    }

    fn sup_factor(&self) -> f64 {
        self.strength * self.angular.as_ref().map_or(1.0, |a| a.sup())
    }

    /// The radial profile `V(r)` before strength and angular factors.
    fn radial_value(&self, r: f64) -> f64 {
        match &self.radial {
            RadialKind::Zero => 0.0,
            RadialKind::IndicatorDisk { radius } => (r < *radius) as u8 as f64,
            RadialKind::Steps { radii, values } => {
                let i = radii.partition_point(|&x| x <= r);
                values.get(i).copied().unwrap_or(0.0)
            }
            RadialKind::VSigma { .. } | RadialKind::WSigma { .. } => {
                if r == 0.0 {
                    return f64::INFINITY;
                }
                let p = LogPoint::from_r(r);
                (self.ln_r2_radial(p) - 2.0 * p.t).exp()
            }
            RadialKind::UBeta { beta } => beta * beta / (r * r).max(1.0),
            RadialKind::Bump => {
                if r < 1.0 {
                    (1.0 - r * r).powi(2)
                } else {
                    0.0
                }
            }
            RadialKind::Gaussian { amplitude, width } => amplitude * (-(r / width).powi(2)).exp(),
            RadialKind::Sampled { r: nodes, v } => sampled_value(nodes, v, r),
        }
    }

    /// `ln(r² V(r))` of the bare radial profile.
    fn ln_r2_radial(&self, p: LogPoint) -> f64 {
        const NEG: f64 = f64::NEG_INFINITY;
        let ln = |x: f64| if x > 0.0 { x.ln() } else { NEG };
        match &self.radial {
            RadialKind::Zero => NEG,
            RadialKind::IndicatorDisk { radius } => {
                if p.t < radius.ln() {
                    2.0 * p.t
                } else {
                    NEG
                }
            }
            RadialKind::VSigma { sigma } => {
                if p.t < -2.0 {
                    -2.0 * p.ln_abs_t - p.ln_abs_t.ln() / sigma
                } else {
                    NEG
                }
            }
            RadialKind::WSigma { sigma } => {
                if p.t > 2.0 {
                    -2.0 * p.ln_abs_t - p.ln_abs_t.ln() / sigma
                } else {
                    NEG
                }
            }
            RadialKind::UBeta { beta } => 2.0 * beta.ln() + 2.0 * p.t.min(0.0),
            RadialKind::Bump => {
                if p.t < 0.0 {
                    let r2 = (2.0 * p.t).exp();
                    2.0 * p.t + 2.0 * (-r2).ln_1p()
                } else {
                    NEG
                }
            }
            RadialKind::Gaussian { amplitude, width } => {
                if p.t > 400.0 || p.t == NEG {
                    return NEG;
                }
                let x = p.t.exp() / width;
                2.0 * p.t + ln(*amplitude) - x * x
            }
            RadialKind::Steps { radii, .. } => {
                if p.t >= radii.last().unwrap().ln() || p.t == NEG {
                    return NEG;
                }
                2.0 * p.t + ln(self.radial_value(p.t.exp()))
            }
            RadialKind::Sampled { r, .. } => {
                if p.t >= r.last().unwrap().ln() || p.t == NEG {
                    return NEG;
                }
                2.0 * p.t + ln(self.radial_value(p.t.exp()))
            }
        }
    }

    /// `ln(r² V̂(r))`, stable at any `t`.
    pub fn ln_r2v_hat(&self, p: LogPoint) -> f64 {
        let f = self.mean_factor();
        if f == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_r2_radial(p) + f.ln()
    }

    /// `ln(r² Ṽ(r))`.
    pub fn ln_r2v_tilde(&self, p: LogPoint) -> f64 {
        let f = self.sup_factor();
        if f == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_r2_radial(p) + f.ln()
    }

    pub fn r2v_hat(&self, p: LogPoint) -> f64 {
        self.ln_r2v_hat(p).exp()
    }

    /// Pointwise value; `theta = None` reads the radial part only.
    pub fn eval(&self, r: f64, theta: Option<f64>) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!("potential evaluated at r = {r}")));
        }
        if r == 0.0 && self.singularity_tag() == SingularityTag::OriginLogSquare {
            return Err(Error::Singularity("V_sigma is singular at the origin".into()));
        }
        let g = match (theta, &self.angular) {
            (Some(th), Some(a)) => a.eval(th),
            _ => 1.0,
        };
        Ok(self.strength * g * self.radial_value(r))
    }

    /// `V̂(r)`, the angular mean.
    pub fn angular_average(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r, None)? * self.angular.as_ref().map_or(1.0, |a| a.mean()))
    }

    /// `Ṽ(r)`, the angular supremum.
    pub fn sup_angular(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r, None)? * self.angular.as_ref().map_or(1.0, |a| a.sup()))
    }

    /// Radii where the profile kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let e2 = (2.0f64).exp();
        match &self.radial {
            RadialKind::Zero | RadialKind::Gaussian { .. } => vec![],
            RadialKind::IndicatorDisk { radius } => vec![*radius],
            RadialKind::Steps { radii, .. } => radii.clone(),
            RadialKind::VSigma { .. } => vec![1.0 / e2],
            RadialKind::WSigma { .. } => vec![e2],
            RadialKind::UBeta { .. } | RadialKind::Bump => vec![1.0],
            RadialKind::Sampled { r, .. } => r.iter().copied().filter(|x| *x > 0.0).collect(),
        }
    }

    /// `sup_r r² V̂(r)` over the whole half-line.
    pub fn sup_r2v_hat(&self) -> f64 {
        let f = self.mean_factor();
        let s = match &self.radial {
            RadialKind::Zero => 0.0,
            RadialKind::IndicatorDisk { radius } => radius * radius,
            RadialKind::Steps { radii, values } => radii.iter().zip(values).map(|(r, v)| r * r * v).fold(0.0, f64::max),
            RadialKind::VSigma { sigma } | RadialKind::WSigma { sigma } => 1.0 / (4.0 * std::f64::consts::LN_2.powf(1.0 / sigma)),
            RadialKind::UBeta { beta } => beta * beta,
            RadialKind::Bump => 4.0 / 27.0,
            RadialKind::Gaussian { amplitude, width } => amplitude * width * width / std::f64::consts::E,
            RadialKind::Sampled { r, v } => {
                let mut best = 0.0f64;
                for i in 0..r.len() - 1 {
                    best = best.max(v[i].max(v[i + 1]) * r[i + 1] * r[i + 1]);
                }
                best
            }
        };
        f * s
    }
}

fn sampled_value(nodes: &[f64], v: &[f64], r: f64) -> f64 {
    if r <= nodes[0] {
        return v[0];
    }
    let n = nodes.len();
    if r >= nodes[n - 1] {
        return 0.0;
    }
    let i = nodes.partition_point(|&x| x <= r) - 1;
    let w = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
    v[i] * (1.0 - w) + v[i + 1] * w
}

/// The weight family: `min{β², β²/r²}` for `β > 0` and the fixed bump `(1−r²)²₊` for `β = 0`.
pub fn make_u_beta(beta: f64) -> Result<PotentialProfile> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Domain(format!("U_beta needs beta >= 0, got {beta}")));
    }
    if beta == 0.0 {
        PotentialProfile::radial(RadialKind::Bump)
    } else {
        PotentialProfile::radial(RadialKind::UBeta { beta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn model_potential_values() {
        let v = PotentialProfile::v_sigma(2.0).unwrap();
        let r = (-3.0f64).exp();
        let want = 6.0f64.exp() / 9.0 / 3.0f64.ln().sqrt();
        assert_relative_eq!(v.eval(r, None).unwrap(), want, max_relative = 1e-13);
        assert!(matches!(v.eval(0.0, None), Err(Error::Singularity(_))));
        assert_eq!(v.eval(0.2, None).unwrap(), 0.0);

        let w = PotentialProfile::w_sigma(2.0).unwrap();
        let want = (-6.0f64).exp() / 9.0 / 3.0f64.ln().sqrt();
        assert_relative_eq!(w.eval(3.0f64.exp(), None).unwrap(), want, max_relative = 1e-13);
        assert_eq!(w.eval(7.0, None).unwrap(), 0.0);

        assert_eq!(PotentialProfile::indicator_disk(1.0).unwrap().eval(2.0, None).unwrap(), 0.0);
    }

    #[test]
    fn angular_reductions() {
        let base = PotentialProfile::indicator_disk(2.0).unwrap();
        let half = base.clone().with_angular(AngularFactor { sectors: vec![(0.0, PI, 1.0)] }).unwrap();
        assert_relative_eq!(half.angular_average(1.0).unwrap(), 0.5);
        assert_relative_eq!(half.sup_angular(1.0).unwrap(), 1.0);
        assert_eq!(half.eval(1.0, Some(4.0)).unwrap(), 0.0);
        assert_eq!(base.angular_average(1.0).unwrap(), base.eval(1.0, None).unwrap());
        assert_eq!(PotentialProfile::zero().sup_angular(1.0).unwrap(), 0.0);
    }

    #[test]
    fn u_beta_family() {
        let u = make_u_beta(1.0).unwrap();
        assert_relative_eq!(u.eval(2.0, None).unwrap(), 0.25);
        assert_relative_eq!(u.eval(0.5, None).unwrap(), 1.0);
        let u0 = make_u_beta(0.0).unwrap();
        assert_eq!(u0.eval(2.0, None).unwrap(), 0.0);
        assert!(u0.eval(0.5, None).unwrap() > 0.0);
        assert!(make_u_beta(-1.0).is_err());
    }

    #[test]
    fn log_space_agrees_with_direct_values() {
        let cases = vec![
            PotentialProfile::v_sigma(2.0).unwrap(),
            PotentialProfile::w_sigma(1.5).unwrap(),
            PotentialProfile::indicator_disk(1.3).unwrap(),
            make_u_beta(2.0).unwrap(),
            make_u_beta(0.0).unwrap(),
            PotentialProfile::radial(RadialKind::Gaussian { amplitude: 2.0, width: 0.7 }).unwrap(),
            PotentialProfile::steps(vec![0.5, 2.0], vec![3.0, 1.0]).unwrap(),
        ];
        for v in &cases {
            for &r in &[1e-4, 0.01, 0.1, 0.4, 0.9, 1.7, 3.0, 20.0, 1e3] {
                let direct = r * r * v.eval(r, None).unwrap();
                let logv = v.r2v_hat(LogPoint::from_r(r));
                assert_relative_eq!(direct, logv, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn sup_of_r2v() {
        let v = PotentialProfile::v_sigma(2.0).unwrap();
        let s = v.sup_r2v_hat();
        for i in 0..2000 {
            let t = -2.0 - i as f64 * 0.01;
            assert!(v.r2v_hat(LogPoint::from_t(t)) <= s * (1.0 + 1e-12));
        }
        let g = PotentialProfile::radial(RadialKind::Gaussian { amplitude: 1.0, width: 2.0 }).unwrap();
        assert_relative_eq!(g.sup_r2v_hat(), g.r2v_hat(LogPoint::from_r(2.0)), max_relative = 1e-12);
    }
}
