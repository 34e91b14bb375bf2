use serde::{Deserialize, Serialize};

use super::LogPoint;

/// Positive weights used as Hardy right-hand sides and as operator shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// Indicator of the unit disc.
    Chi1,
    /// `min{1, r⁻²}`.
    U1,
    /// `r⁻²`.
    InvSq,
    /// `(1 + r² log² r)⁻¹`.
    LogWeight,
    /// `(1 + r)⁻²`.
    InvSqSmooth,
    /// `(1 + r²)⁻¹`.
    InvOnePlusSq,
}

impl Weight {
    pub const ALL: [Weight; 6] = [
        Weight::Chi1,
        Weight::U1,
        Weight::InvSq,
        Weight::LogWeight,
        Weight::InvSqSmooth,
        Weight::InvOnePlusSq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Weight::Chi1 => "chi1",
            Weight::U1 => "U1",
            Weight::InvSq => "inv_sq",
            Weight::LogWeight => "log_weight",
            Weight::InvSqSmooth => "inv_sq_smooth",
            Weight::InvOnePlusSq => "inv_one_plus_sq",
        }
    }

    pub fn value(self, r: f64) -> f64 {
        match self {
            Weight::Chi1 => (r < 1.0) as u8 as f64,
            Weight::U1 => 1.0f64.min(1.0 / (r * r)),
            Weight::InvSq => 1.0 / (r * r),
            Weight::LogWeight => 1.0 / (1.0 + (r * r.ln()).powi(2)),
            Weight::InvSqSmooth => 1.0 / (1.0 + r).powi(2),
            Weight::InvOnePlusSq => 1.0 / (1.0 + r * r),
        }
    }

    /// `ln(r² ρ(r))` at a log point.
    pub fn ln_r2w(self, p: LogPoint) -> f64 {
        let t = p.t;
        match self {
            Weight::Chi1 => {
                if t < 0.0 {
                    2.0 * t
                } else {
                    f64::NEG_INFINITY
                }
            }
            Weight::U1 => 2.0 * t.min(0.0),
            Weight::InvSq => 0.0,
            Weight::LogWeight => {
                if t > 0.0 {
                    let x = (-2.0 * t - 2.0 * p.ln_abs_t).exp();
                    -2.0 * p.ln_abs_t - x.ln_1p()
                } else {
                    2.0 * t - ((2.0 * t).exp() * t * t).ln_1p()
                }
            }
            Weight::InvSqSmooth => {
                if t > 0.0 {
                    -2.0 * (-t).exp().ln_1p()
                } else {
                    2.0 * t - 2.0 * t.exp().ln_1p()
                }
            }
            Weight::InvOnePlusSq => {
                if t > 0.0 {
                    -(-2.0 * t).exp().ln_1p()
                } else {
                    2.0 * t - (2.0 * t).exp().ln_1p()
                }
            }
        }
    }

    pub fn r2w(self, p: LogPoint) -> f64 {
        self.ln_r2w(p).exp()
    }

    /// `sup_r r² ρ(r)`; the tail floor of a Hardy constant is `m²/(2·sup)`.
    pub fn sup_r2w(self) -> f64 {
        match self {
            Weight::LogWeight => {
                // maximum of 1/(e^{-2t} + t²) sits at the root of t = e^{-2t}
                let mut t = 0.4f64;
                for _ in 0..50 {
                    let g = t - (-2.0 * t).exp();
                    let dg = 1.0 + 2.0 * (-2.0 * t).exp();
                    t -= g / dg;
                }
                1.0 / ((-2.0 * t).exp() + t * t)
            }
            _ => 1.0,
        }
    }

    /// Whether `∫ ρ dx` over the plane is finite.
    pub fn integrable(self) -> bool {
        matches!(self, Weight::Chi1 | Weight::LogWeight)
    }

    /// t-values where the weight kinks.
    pub fn breakpoints_t(self) -> Vec<f64> {
        match self {
            Weight::Chi1 | Weight::U1 => vec![0.0],
            _ => vec![],
        }
    }
}
