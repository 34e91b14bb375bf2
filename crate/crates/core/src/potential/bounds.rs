use serde::{Deserialize, Serialize};

use super::norms::{weighted_norm, WeightId};
use super::PotentialProfile;
use crate::error::{Error, Result};

/// The eigenvalue bounds whose right-hand sides can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", deny_unknown_fields)]
pub enum TheoremId {
    /// `∫ V (1+|log|x||)^{1+a} + ∫ V log(1+V)`, any non-zero field.
    #[serde(rename = "clr-mag-1")]
    ClrMag1 { a: f64 },
    /// `∫ V^{1+a} (1+|x|)^{2a}`, fields with non-stabilizing flux.
    #[serde(rename = "clr-mag-2")]
    ClrMag2 { a: f64 },
    /// `‖V log|x|‖_{L¹(B₁)} + ‖V‖_{L¹(R₊,L^∞)}`, radial field with non-integer flux.
    #[serde(rename = "clr-radial")]
    ClrRadial,
    /// `‖V log|x|‖_{L¹(R²)} + ‖V‖_{L¹(R₊,L^∞)}`, radial field with integer flux.
    #[serde(rename = "clr-radial-integer")]
    ClrRadialInteger,
    /// `‖V‖_{L¹(R₊,L^∞)}`, Aharonov–Bohm field.
    #[serde(rename = "eq:bel")]
    Bel,
    /// `(4π)⁻¹ ∫ V`, the semiclassical slope.
    #[serde(rename = "weyl")]
    Weyl,
}

impl TheoremId {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::ClrMag1 { .. } => "clr-mag-1",
            TheoremId::ClrMag2 { .. } => "clr-mag-2",
            TheoremId::ClrRadial => "clr-radial",
            TheoremId::ClrRadialInteger => "clr-radial-integer",
            TheoremId::Bel => "eq:bel",
            TheoremId::Weyl => "weyl",
        }
    }

    pub fn components(&self) -> Vec<WeightId> {
        match *self {
            TheoremId::ClrMag1 { a } => vec![WeightId::Clr1LogWeight { a }, WeightId::Clr1Entropy],
            TheoremId::ClrMag2 { a } => vec![WeightId::Clr2 { a }],
            TheoremId::ClrRadial => vec![WeightId::L1LogB1, WeightId::L1HalflineLinf],
            TheoremId::ClrRadialInteger => vec![WeightId::L1LogR2, WeightId::L1HalflineLinf],
            TheoremId::Bel => vec![WeightId::L1HalflineLinf],
            TheoremId::Weyl => vec![WeightId::Weyl],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: String,
    pub theorem: TheoremId,
    /// Component norms in the order they enter the bound.
    pub components: Vec<(String, f64)>,
    /// The bracketed sum; the theorem's constant is left out.
    pub rhs_value: f64,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|c| c.0 == name).map(|c| c.1)
    }
}

/// Evaluates the right-hand side of `theorem` for `potential`, modulo its constant.
pub fn bound_rhs(theorem: TheoremId, potential: &PotentialProfile) -> Result<BoundReport> {
    if let TheoremId::ClrMag1 { a } | TheoremId::ClrMag2 { a } = theorem {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Precondition(format!("exponent a must be positive, got {a}")));
        }
    }
    let mut components = Vec::new();
    for id in theorem.components() {
        let value = weighted_norm(potential, id).map_err(|e| match e {
            Error::Divergence(why) => Error::Admissibility { norm: id.name().to_string(), reason: format!("infinite ({why})") },
            other => other,
        })?;
        components.push((id.name().to_string(), value));
    }
    let rhs_value = components.iter().map(|c| c.1).sum();
    let mut notes = vec!["constant factor omitted; rhs is the bracketed sum of norms".to_string()];
    if let TheoremId::ClrMag1 { a } | TheoremId::ClrMag2 { a } = theorem {
        notes.push(format!("evaluated at caller-supplied a = {a}"));
    }
    Ok(BoundReport { theorem_id: theorem.name().to_string(), theorem, components, rhs_value, notes })
}
