//! Birman–Schwinger bounds for the radial channels.
//!
//! `T_δ^{a,b} = −d²/dr² + (δ² − 1/4)/r²` on `(a, b)` with the conditions
//! `u′ = u/(2r)` at finite ends (Neumann for `f = u/√r`). Its resolvent
//! diagonal at `−κ²` is built from `√r I_δ(κr)` and `√r K_δ(κr)`, and
//! `N(T − W, 0) ≤ lim_{κ→0} ∫ G_δ(r, r, κ) W(r) dr`.

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_ik_scaled;
use crate::channel::channel_cutoff;
use crate::error::{Error, Result};
use crate::field::{classify, FieldProfile, FluxClass};
use crate::potential::{weighted_norm, DecayTag, LogPoint, PotentialProfile, WeightId};
use crate::quadrature::integrate_log_line;

const TAU: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsKernelSpec {
    pub delta: f64,
    pub a: f64,
    /// `f64::INFINITY` for the half-line.
    pub b: f64,
    pub kappa: f64,
}

impl BsKernelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("order δ must be finite and nonnegative, got {}", self.delta)));
        }
        if !(self.a >= 0.0 && self.a.is_finite() && self.a < self.b) || self.b.is_nan() {
            return Err(Error::Domain(format!("need 0 ≤ a < b ≤ ∞, got ({}, {})", self.a, self.b)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("κ must be positive; use the limit form for κ = 0 (got {})", self.kappa)));
        }
        Ok(())
    }
}

// −I′(κx)/K′(κx) with both factors scaled: the true ω is this times e^{2κx}
fn omega_scaled(delta: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let s = bessel_ik_scaled(delta, z)?;
    Ok(-s.ip / s.kp)
}

/// `G_δ^{a,b}(r, r, κ) = r f_a(r) f_b(r) / (ω(b) − ω(a))`, where
/// `f_x = I_δ(κ·) + ω(x) K_δ(κ·)` and `ω(x) = −I′_δ(κx)/K′_δ(κx)`.
pub fn bessel_green_diag(spec: &BsKernelSpec, r: f64) -> Result<f64> {
    spec.validate()?;
    let BsKernelSpec { delta, a, b, kappa } = *spec;
    if !(r > a && r < b) {
        return Err(Error::Domain(format!("r = {r} outside ({a}, {b})")));
    }
    let z = kappa * r;
    let s = bessel_ik_scaled(delta, z)?;
    let wa = omega_scaled(delta, kappa * a)?;
    let left = s.i + wa * s.k * (-2.0 * kappa * (r - a)).exp();
    if b.is_infinite() {
        return Ok(r * left * s.k);
    }
    let wb = omega_scaled(delta, kappa * b)?;
    let right = s.i * (-2.0 * kappa * (b - r)).exp() + wb * s.k;
    let den = wb - wa * (-2.0 * kappa * (b - a)).exp();
    Ok(r * left * right / den)
}

fn ln_green_limit_over_r(delta: f64, ln_a: f64, ln_b: f64, t: f64) -> f64 {
    let two_d = 2.0 * delta;
    let ca = if ln_a == f64::NEG_INFINITY { 0.0 } else { (two_d * (ln_a - t)).exp() };
    let cb = if ln_b == f64::INFINITY { 0.0 } else { (two_d * (t - ln_b)).exp() };
    let ab = if ln_a == f64::NEG_INFINITY || ln_b == f64::INFINITY { 0.0 } else { (two_d * (ln_a - ln_b)).exp() };
    ca.ln_1p() + cb.ln_1p() - two_d.ln() - (-ab).ln_1p()
}

/// `lim_{κ→0} G_δ^{a,b}(r, r, κ) = r (1 + (a/r)^{2δ})(1 + (r/b)^{2δ}) / (2δ (1 − (a/b)^{2δ}))`.
pub fn bessel_green_diag_limit(delta: f64, a: f64, b: f64, r: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("the κ → 0 limit needs δ > 0, got {delta}")));
    }
    if !(a >= 0.0 && a < b) || !(r > a && r < b) {
        return Err(Error::Domain(format!("need 0 ≤ a < r < b ≤ ∞, got a = {a}, r = {r}, b = {b}")));
    }
    Ok(r * ln_green_limit_over_r(delta, a.ln(), b.ln(), r.ln()).exp())
}

/// `∫_a^b lim_{κ→0} G_δ(r, r, κ) W(r) dr`, an upper bound for `N(T_δ^{a,b} − W, 0)`.
/// `W` is the angular mean of `w` (including its strength).
pub fn bs_channel_bound(delta: f64, w: &PotentialProfile, a: f64, b: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("channel bound needs δ > 0, got {delta}")));
    }
    if !(a >= 0.0 && a < b) {
        return Err(Error::Domain(format!("need 0 ≤ a < b ≤ ∞, got ({a}, {b})")));
    }
    w.validate()?;
    let (ln_a, ln_b) = (a.ln(), b.ln());
    let breaks: Vec<f64> = w.breakpoints().iter().map(|r| r.ln()).collect();
    // ∫ G W dr = ∫ (G/r) · r²W dt
    let f = |p: LogPoint| ln_green_limit_over_r(delta, ln_a, ln_b, p.t) + w.ln_r2v_hat(p);
    integrate_log_line(&f, ln_a, ln_b, &breaks, TAU)
}

/// `ω₀(1) = −I′₀(1)/K′₀(1) = I₁(1)/K₁(1)`.
pub fn omega0() -> f64 {
    let s = bessel_ik_scaled(0.0, 1.0).unwrap();
    -s.ip / s.kp * 2f64.exp()
}

/// `G₀(r, r, 1) = r I₀(r)(K₀(r) + I₀(r)/ω₀(1))` on `(0, 1)`: the resolvent
/// diagonal at `κ = 1` of the order-zero operator with the Neumann-type end at `r = 1`.
pub fn g0_kernel_diag(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("G₀ lives on (0, 1), got r = {r}")));
    }
    Ok(r * g0_over_r(r.ln()))
}

fn g0_over_r(t: f64) -> f64 {
    let w0 = omega0();
    if t < -30.0 {
        // I₀ = 1 + O(r²), K₀ = −ln(r/2) − γ + O(r² ln r)
        return -t + std::f64::consts::LN_2 - 0.5772156649015329 + 1.0 / w0;
    }
    let r = t.exp();
    let s = bessel_ik_scaled(0.0, r).unwrap();
    let i0 = s.i * r.exp();
    let k0 = s.k * (-r).exp();
    i0 * (k0 + i0 / w0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G0LogFit {
    /// Smallest `c` with `G₀(r,r,1) ≤ c·r(1 + |log r|)` on the grid.
    pub c_hat: f64,
    pub grid_points: usize,
    pub r_min: f64,
}

/// Fits the constant in `G₀(r, r, 1) ≤ c r (1 + |log r|)` on a log-uniform
/// grid of `points + 1` radii in `[r_min, 1]`.
pub fn g0_log_constant(points: usize, r_min: f64) -> Result<G0LogFit> {
    if points < 2 || !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::Domain("need at least two points and 0 < r_min < 1".into()));
    }
    let t0 = r_min.ln();
    let mut c_hat = 0.0f64;
    // the grid closes at r = 1, where the kernel stays finite
    for i in 0..=points {
        let t = t0 * (1.0 - i as f64 / points as f64);
        c_hat = c_hat.max(g0_over_r(t) / (1.0 + t.abs()));
    }
    Ok(G0LogFit { c_hat, grid_points: points, r_min })
}

// ln(G₀/r), finite even where `t` itself overflows
fn ln_g0_over_r(p: LogPoint) -> f64 {
    if p.t < -30.0 {
        let c = std::f64::consts::LN_2 - 0.5772156649015329 + 1.0 / omega0();
        return p.ln_abs_t + (c * (-p.ln_abs_t).exp()).ln_1p();
    }
    g0_over_r(p.t).ln()
}

/// `∫_0^1 G₀(r, r, 1)(W + 1) dr ≥ N(T₀^{0,1} − W, 0)`, by the Birman–Schwinger
/// principle for `(T₀ + 1) − (W + 1)`.
pub fn g0_block(w: &PotentialProfile) -> Result<f64> {
    let breaks: Vec<f64> = w.breakpoints().iter().map(|r| r.ln()).filter(|t| *t < 0.0).collect();
    let fw = |p: LogPoint| ln_g0_over_r(p) + w.ln_r2v_hat(p);
    let f1 = |p: LogPoint| ln_g0_over_r(p) + 2.0 * p.t;
    Ok(integrate_log_line(&fw, f64::NEG_INFINITY, 0.0, &breaks, TAU)? + integrate_log_line(&f1, f64::NEG_INFINITY, 0.0, &[], TAU)?)
}

/// `inf |Φ(r) + m|` over `r ∈ [r_from, ∞)`; zero when the sign changes.
pub fn effective_order(field: &FieldProfile, m: i64, r_from: f64) -> f64 {
    let mut nodes: Vec<f64> = vec![r_from];
    let mut bps: Vec<f64> = field.breakpoints().into_iter().filter(|&r| r > r_from).collect();
    bps.push(f64::INFINITY);
    let mut lo = r_from;
    for hi in bps {
        // 64 points inside each piece, geometric when it is unbounded
        for j in 1..=64 {
            let f = j as f64 / 65.0;
            let r = if hi.is_infinite() {
                lo.max(1e-3) * (1e12f64).powf(f)
            } else {
                lo + (hi - lo) * f
            };
            nodes.push(r);
        }
        nodes.push(hi);
        lo = hi;
    }
    let vals: Vec<f64> = nodes.iter().map(|&r| field.flux_unchecked(r) + m as f64).collect();
    if vals.windows(2).any(|w| w[0] * w[1] <= 0.0) {
        return 0.0;
    }
    vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    #[default]
    NonInteger,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialBoundOptions {
    pub mode: BoundMode,
    /// Outer radius where a non-admissible potential is cut off.
    pub truncation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundBlock {
    pub channel: i64,
    pub kind: String,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialBoundReport {
    pub mode: BoundMode,
    pub lambda: f64,
    pub cutoff: u64,
    pub blocks: Vec<BoundBlock>,
    pub total: f64,
    /// Every block is a rigorous Birman–Schwinger bound.
    pub certified: bool,
    pub flags: Vec<String>,
}

/// Neumann-split Birman–Schwinger sum over the channels `|m| ≤ M`.
///
/// Non-integer mode: channels whose flux offset stays away from zero get the
/// half-line block `∫ rW/(2δ_m)`; a channel whose offset reaches zero is split
/// at `r = 1` into the `G₀` block and the `(1, ∞)` block with
/// `δ = inf_{r≥1}|Φ+m|`. Integer mode treats the channel `m = −Φ` on `(1, R)`
/// with unit Neumann intervals of order `δ_n = 1/log(n+1)`, whose constant is
/// not certified and reported as 1.
pub fn assemble_radial_bound(field: &FieldProfile, v: &PotentialProfile, lambda: f64, opts: &RadialBoundOptions) -> Result<RadialBoundReport> {
    if v.angular.is_some() {
        return Err(Error::Precondition("radial bound assembly needs a radial potential".into()));
    }
    let w = v.scaled(lambda);
    let cutoff = channel_cutoff(field, v, lambda)?;
    let (total_flux, class) = field.total_flux()?;
    let mut flags = vec![];
    let mut blocks = vec![];
    let mut certified = true;
    if lambda == 0.0 || w.sup_r2v_hat() == 0.0 {
        return Ok(RadialBoundReport { mode: opts.mode, lambda, cutoff, blocks, total: 0.0, certified, flags });
    }
    let special = match opts.mode {
        BoundMode::NonInteger => None,
        BoundMode::Integer => {
            if class == FluxClass::NonInteger {
                return Err(Error::Precondition(format!("integer mode needs integer total flux, got {total_flux}")));
            }
            Some(-(total_flux.round() as i64))
        }
    };
    let r_out = match opts.mode {
        BoundMode::Integer => {
            let admissible = weighted_norm(&w, WeightId::L1LogR2).is_ok();
            match (admissible, opts.truncation, v.decay_tag()) {
                (_, Some(r), _) => {
                    if !admissible {
                        flags.push(format!("‖V log|x|‖_L¹(R²) diverges; potential cut off at r = {r}"));
                    }
                    r
                }
                (_, None, DecayTag::Compact) => v.breakpoints().into_iter().fold(1.0, f64::max),
                (true, None, _) => {
                    return Err(Error::Precondition("integer mode on a non-compact potential needs an explicit truncation radius".into()));
                }
                (false, None, _) => {
                    return Err(Error::Admissibility { norm: "L1_log_R2".into(), reason: "infinite; supply a truncation radius".into() });
                }
            }
        }
        BoundMode::NonInteger => f64::INFINITY,
    };
    for m in -(cutoff as i64)..=(cutoff as i64) {
        let whole = effective_order(field, m, 0.0);
        if whole > TAU {
            let value = bs_channel_bound(whole, &w, 0.0, r_out)?;
            blocks.push(BoundBlock { channel: m, kind: "half-line".into(), a: 0.0, b: r_out, delta: whole, value });
            continue;
        }
        let value = g0_block(&w)?;
        blocks.push(BoundBlock { channel: m, kind: "G0".into(), a: 0.0, b: 1.0, delta: 0.0, value });
        let outer = effective_order(field, m, 1.0);
        if outer > TAU {
            let value = bs_channel_bound(outer, &w, 1.0, r_out)?;
            blocks.push(BoundBlock { channel: m, kind: "outer".into(), a: 1.0, b: r_out, delta: outer, value });
        } else if special == Some(m) {
            certified = false;
            let n_max = r_out.ceil() as i64;
            for n in 1..n_max {
                let (a, b) = (n as f64, ((n + 1) as f64).min(r_out));
                if b <= a {
                    break;
                }
                let delta = 1.0 / ((n + 1) as f64).ln();
                let value = bs_channel_bound(delta, &w, a, b)?;
                blocks.push(BoundBlock { channel: m, kind: "unit-neumann".into(), a, b, delta, value });
            }
            flags.push(format!("channel {m}: unit-interval blocks use δ_n = 1/log(n+1); their constant is not certified and set to 1"));
        } else {
            return Err(Error::Admissibility {
                norm: "flux offset".into(),
                reason: format!("channel {m} has inf_(r≥1) |Φ(r)+m| = 0 (total flux {total_flux}); use integer mode"),
            });
        }
    }
    if classify(total_flux) != FluxClass::NonInteger && opts.mode == BoundMode::NonInteger {
        flags.push("total flux is integer-valued".into());
    }
    let total = blocks.iter().map(|b| b.value).sum();
    Ok(RadialBoundReport { mode: opts.mode, lambda, cutoff, blocks, total, certified, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn limit_closed_form() {
        // (1/2)(1+1)(1+1/4)/(1−1/4)
        assert_relative_eq!(bessel_green_diag_limit(1.0, 1.0, 2.0, 1.0 + 1e-15).unwrap(), 5.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(bessel_green_diag_limit(0.7, 0.0, f64::INFINITY, 3.0).unwrap(), 3.0 / 1.4, max_relative = 1e-14);
        let v = bessel_green_diag_limit(1.3, 0.5, 4.0, 1.7).unwrap();
        assert_relative_eq!(bessel_green_diag_limit(1.3, 1.5, 12.0, 5.1).unwrap(), 3.0 * v, max_relative = 1e-13);
        assert!(bessel_green_diag_limit(0.0, 1.0, 2.0, 1.5).is_err());
    }

    #[test]
    fn small_kappa_matches_limit() {
        let s = BsKernelSpec { delta: 1.0, a: 1.0, b: 2.0, kappa: 1e-4 };
        let g = bessel_green_diag(&s, 1.5).unwrap();
        assert_relative_eq!(g, bessel_green_diag_limit(1.0, 1.0, 2.0, 1.5).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn green_is_positive_and_b_infinity_is_a_limit() {
        for &d in &[0.0, 0.3, 1.0, 4.5] {
            for &k in &[0.01, 1.0, 30.0] {
                let s = BsKernelSpec { delta: d, a: 0.5, b: 3.0, kappa: k };
                assert!(bessel_green_diag(&s, 1.1).unwrap() > 0.0);
            }
            let far = BsKernelSpec { delta: d, a: 0.5, b: 400.0, kappa: 1.0 };
            let inf = BsKernelSpec { b: f64::INFINITY, ..far };
            assert_relative_eq!(bessel_green_diag(&far, 2.0).unwrap(), bessel_green_diag(&inf, 2.0).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn g0_is_the_order_zero_kernel() {
        let s = BsKernelSpec { delta: 0.0, a: 0.0, b: 1.0, kappa: 1.0 };
        for &r in &[1e-6, 0.01, 0.4, 0.99] {
            assert_relative_eq!(g0_kernel_diag(r).unwrap(), bessel_green_diag(&s, r).unwrap(), max_relative = 1e-12);
            assert!(g0_kernel_diag(r).unwrap() > 0.0);
        }
        assert!(g0_kernel_diag(1.0).is_err());
        // G₀/(r|log r|) → 1 as r → 0
        let r = 1e-200f64;
        assert_relative_eq!(g0_over_r(r.ln()) / r.ln().abs(), 1.0, max_relative = 1e-2);
        let a = g0_log_constant(200, 1e-12).unwrap().c_hat;
        let b = g0_log_constant(1600, 1e-12).unwrap().c_hat;
        assert_relative_eq!(a, b, max_relative = 1e-3);
    }

    #[test]
    fn channel_bound_examples() {
        let ind = PotentialProfile::indicator_disk(1.0).unwrap();
        assert_eq!(bs_channel_bound(1.0, &PotentialProfile::zero(), 0.0, f64::INFINITY).unwrap(), 0.0);
        // ∫₀¹ r/2 dr
        assert_relative_eq!(bs_channel_bound(1.0, &ind, 0.0, f64::INFINITY).unwrap(), 0.25, max_relative = 1e-8);
        // ∫ rV dr is finite for every V_σ, but the G₀ block weighs V by r|log r|
        assert!(bs_channel_bound(1.0, &PotentialProfile::v_sigma(0.5).unwrap(), 0.0, 1.0).unwrap().is_finite());
        assert!(g0_block(&PotentialProfile::v_sigma(0.5).unwrap()).unwrap().is_finite());
        assert!(matches!(g0_block(&PotentialProfile::v_sigma(2.0).unwrap()), Err(Error::Divergence(_))));
    }

    #[test]
    fn effective_orders() {
        let ab = FieldProfile::aharonov_bohm(0.5).unwrap();
        assert_relative_eq!(effective_order(&ab, 0, 0.0), 0.5);
        assert_relative_eq!(effective_order(&ab, -2, 0.0), 1.5);
        let step = FieldProfile::step(1.0, 1.0).unwrap();
        assert_eq!(effective_order(&step, 0, 0.0), 0.0);
        assert_relative_eq!(effective_order(&step, 0, 1.0), 0.5, max_relative = 1e-12);
        assert_relative_eq!(effective_order(&step, -1, 0.0), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn assembly_examples() {
        let f = FieldProfile::step(1.0, 1.0).unwrap();
        let ind = PotentialProfile::indicator_disk(1.0).unwrap();
        let z = assemble_radial_bound(&f, &PotentialProfile::zero(), 1.0, &RadialBoundOptions::default()).unwrap();
        assert_eq!(z.total, 0.0);
        let r = assemble_radial_bound(&f, &ind, 1.0, &RadialBoundOptions::default()).unwrap();
        assert!(r.certified && r.total.is_finite() && r.total > 0.0);
        assert!(r.blocks.iter().any(|b| b.kind == "G0" && b.channel == 0));

        let one = FieldProfile::step(2.0, 1.0).unwrap();
        let w2 = PotentialProfile::w_sigma(2.0).unwrap();
        assert!(matches!(
            assemble_radial_bound(&one, &w2, 20.0, &RadialBoundOptions { mode: BoundMode::Integer, truncation: None }),
            Err(Error::Admissibility { .. })
        ));
        let opts = RadialBoundOptions { mode: BoundMode::Integer, truncation: Some(1e3) };
        let r = assemble_radial_bound(&one, &w2, 20.0, &opts).unwrap();
        assert!(r.total.is_finite() && !r.certified);
        assert!(matches!(assemble_radial_bound(&one, &w2, 20.0, &RadialBoundOptions::default()), Err(Error::Admissibility { .. })));
    }
}
