use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{LogPoint, PotentialProfile, RadialKind};
use crate::error::Result;
use crate::quadrature::integrate_log_line;

/// Relative accuracy target for norms.
pub const TAU_QUAD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", deny_unknown_fields)]
pub enum WeightId {
    /// `∫ V dx`
    #[serde(rename = "L1_R2")]
    L1R2,
    /// `∫₀^∞ Ṽ(r) r dr`
    #[serde(rename = "L1_halfline_Linf")]
    L1HalflineLinf,
    /// `∫_{|x|<1} V |log|x|| dx`
    #[serde(rename = "L1_log_B1")]
    L1LogB1,
    /// `∫ V |log|x|| dx`
    #[serde(rename = "L1_log_R2")]
    L1LogR2,
    /// `∫ V (1 + |log|x||)^{1+a} dx`
    #[serde(rename = "clr1_log_weight")]
    Clr1LogWeight { a: f64 },
    /// `∫ V log(1 + V) dx`
    #[serde(rename = "clr1_entropy")]
    Clr1Entropy,
    /// `∫ V^{1+a} (1 + |x|)^{2a} dx`
    #[serde(rename = "clr2")]
    Clr2 { a: f64 },
    /// `(4π)⁻¹ ∫ V dx`
    #[serde(rename = "weyl")]
    Weyl,
}

impl WeightId {
    pub fn name(&self) -> &'static str {
        match self {
            WeightId::L1R2 => "L1_R2",
            WeightId::L1HalflineLinf => "L1_halfline_Linf",
            WeightId::L1LogB1 => "L1_log_B1",
            WeightId::L1LogR2 => "L1_log_R2",
            WeightId::Clr1LogWeight { .. } => "clr1_log_weight",
            WeightId::Clr1Entropy => "clr1_entropy",
            WeightId::Clr2 { .. } => "clr2",
            WeightId::Weyl => "weyl",
        }
    }
}

fn t_breaks(v: &PotentialProfile) -> Vec<f64> {
    v.breakpoints().iter().map(|r| r.ln()).collect()
}

// ln(1 + e^x) without overflow
fn ln_1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Weighted norm of `V` by adaptive quadrature in `t = log r`.
pub fn weighted_norm(v: &PotentialProfile, id: WeightId) -> Result<f64> {
    let breaks = t_breaks(v);
    let line = |f: &dyn Fn(LogPoint) -> f64, hi: f64| integrate_log_line(&f, f64::NEG_INFINITY, hi, &breaks, TAU_QUAD);
    let ln2pi = (2.0 * PI).ln();
    if matches!(v.radial, RadialKind::Zero) || v.strength == 0.0 {
        return Ok(0.0);
    }
    match id {
        WeightId::L1R2 => line(&|p| v.ln_r2v_hat(p) + ln2pi, f64::INFINITY),
        WeightId::Weyl => line(&|p| v.ln_r2v_hat(p) - 2.0f64.ln(), f64::INFINITY),
        WeightId::L1HalflineLinf => line(&|p| v.ln_r2v_tilde(p), f64::INFINITY),
        WeightId::L1LogB1 => line(&|p| v.ln_r2v_hat(p) + ln2pi + p.ln_abs_t, 0.0),
        WeightId::L1LogR2 => line(&|p| v.ln_r2v_hat(p) + ln2pi + p.ln_abs_t, f64::INFINITY),
        WeightId::Clr1LogWeight { a } => line(
            &|p| v.ln_r2v_hat(p) + ln2pi + (1.0 + a) * ln_1p_exp(p.ln_abs_t),
            f64::INFINITY,
        ),
        WeightId::Clr1Entropy => sectorwise(v, |g, p| {
            // r² (gV) ln(1 + gV) with ln V = ln(r²V) − 2t
            let ln_r2 = v.ln_r2_radial(p) + (g * v.strength).ln();
            let ln_v = ln_r2 - 2.0 * p.t;
            ln_r2 + ln_1p_exp(ln_v).ln()
        }, &breaks),
        WeightId::Clr2 { a } => sectorwise(v, |g, p| {
            let ln_r2 = v.ln_r2_radial(p) + (g * v.strength).ln();
            let ln_v = ln_r2 - 2.0 * p.t;
            ln_r2 + a * ln_v + 2.0 * a * ln_1p_exp(p.t)
        }, &breaks),
    }
}

// ∫ over the circle of a nonlinear functional: sum over constant sectors.
fn sectorwise<F>(v: &PotentialProfile, f: F, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64, LogPoint) -> f64,
{
    let sectors: Vec<(f64, f64)> = match &v.angular {
        None => vec![(2.0 * PI, 1.0)],
        Some(a) => a.sectors.iter().map(|s| (s.1 - s.0, s.2)).filter(|s| s.1 > 0.0 && s.0 > 0.0).collect(),
    };
    let mut total = 0.0;
    for (len, g) in sectors {
        let ln_len = len.ln();
        total += integrate_log_line(&|p: LogPoint| f(g, p) + ln_len, f64::NEG_INFINITY, f64::INFINITY, breaks, TAU_QUAD)?;
    }
    Ok(total)
}
