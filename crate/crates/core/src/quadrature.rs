//! Adaptive Gauss–Kronrod quadrature and a log-radius line integrator.
//!
//! Radial integrals `∫ F(r) r dr` are computed in `t = log r`, where every
//! model potential becomes a polynomial-times-log profile. Integrands are
//! passed as `ln` values so that huge or tiny magnitudes at the far ends of
//! the line never overflow.

use crate::error::{Error, Result};
use crate::potential::LogPoint;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive GK15 on `[a, b]` to absolute tolerance `abs_tol` or relative `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, _) = gk15(f, a, b);
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut scale = whole.abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(f, lo, hi);
        if !v.is_finite() {
            return Err(Error::Divergence(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        let width_share = (hi - lo) / (b - a);
        let tol = abs_tol.max(rel_tol * scale) * width_share.max(1e-3);
        // below this the error estimate is rounding noise
        let floor = 64.0 * f64::EPSILON * (v.abs() + scale * width_share);
        if e <= tol.max(floor) || depth >= 48 || hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            total += v;
            scale = scale.max(total.abs());
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// Which end of the t-line a tail runs toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// `∫ exp(ln_f(p)) dt` over `t ∈ (lo, hi)`; infinite ends get tail handling.
///
/// `breaks` are t-values where the integrand may kink; they are split on
/// together with `t = −2, 0, 2`.
pub fn integrate_log_line<F>(ln_f: &F, lo: f64, hi: f64, breaks: &[f64], rel_tol: f64) -> Result<f64>
where
    F: Fn(LogPoint) -> f64,
{
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .chain([-2.0, 0.0, 2.0])
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    if lo.is_finite() {
        pts.push(lo);
    }
    if hi.is_finite() {
        pts.push(hi);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let f = |t: f64| ln_f(LogPoint::from_t(t)).exp();
    let inner_tol = rel_tol * 1e-3;
    let mut core = 0.0;
    for w in pts.windows(2) {
        core += integrate(&f, w[0], w[1], 0.0, inner_tol)?;
    }
    // magnitude seed for relative tests in the tails
    let seed = core.abs();
    let mut total = core;
    if lo == f64::NEG_INFINITY {
        total += tail(ln_f, Side::Left, pts[0], seed, rel_tol)?;
    }
    if hi == f64::INFINITY {
        total += tail(ln_f, Side::Right, *pts.last().unwrap(), seed + total.abs(), rel_tol)?;
    }
    Ok(total)
}

// Tail from `start` outward. Segments double in length in t; when the
// contributions stop shrinking geometrically the sum switches to doubling
// in u = log|t|, where borderline log decay becomes power decay.
fn tail<F>(ln_f: &F, side: Side, start: f64, seed: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(LogPoint) -> f64,
{
    let sign = if side == Side::Right { 1.0 } else { -1.0 };
    let inner_tol = rel_tol * 1e-3;
    let f = |t: f64| ln_f(LogPoint::from_t(t)).exp();
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let mut zeros = 0;
    let mut edge = start;
    let mut len = 1.0f64.max(start.abs());
    let mut slow = 0;
    for _ in 0..60 {
        let next = edge + sign * len;
        let (a, b) = if sign > 0.0 { (edge, next) } else { (next, edge) };
        let c = integrate(&f, a, b, 1e-3 * rel_tol * (seed + sum), inner_tol)?.abs();
        sum += c;
        edge = next;
        len *= 2.0;
        let scale = (seed + sum).max(f64::MIN_POSITIVE);
        if c == 0.0 {
            zeros += 1;
            if zeros >= 2 {
                return Ok(sum);
            }
            prev = Some(c);
            continue;
        }
        zeros = 0;
        if let Some(p) = prev {
            if p > 0.0 {
                let rho = c / p;
                if rho < 0.9 {
                    slow = 0;
                    if c * rho / (1.0 - rho) <= 0.1 * rel_tol * scale {
                        return Ok(sum);
                    }
                } else {
                    slow += 1;
                }
            }
        }
        if slow >= 6 {
            return loglog_tail(ln_f, side, edge.abs().ln(), seed, sum, rel_tol);
        }
        prev = Some(c);
    }
    Err(Error::Divergence("tail did not settle after 60 doublings".into()))
}

fn loglog_tail<F>(ln_f: &F, side: Side, u_start: f64, seed: f64, mut sum: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(LogPoint) -> f64,
{
    let inner_tol = rel_tol * 1e-3;
    // dt = |t| du
    let g = |u: f64| {
        let p = match side {
            Side::Right => LogPoint::from_outer(u),
            Side::Left => LogPoint::from_inner(-u),
        };
        (ln_f(p) + u).exp()
    };
    let mut edge = u_start;
    let mut len = u_start.max(1.0);
    let mut prev: Option<f64> = None;
    for _ in 0..400 {
        let c = integrate(&g, edge, edge + len, 1e-3 * rel_tol * (seed + sum), inner_tol)?.abs();
        sum += c;
        edge += len;
        len *= 2.0;
        if !sum.is_finite() {
            break;
        }
        if let Some(p) = prev {
            if c == 0.0 {
                return Ok(sum);
            }
            let rho = c / p;
            if rho >= 1.0 - 1e-9 {
                return Err(Error::Divergence(format!(
                    "tail contributions do not decay (ratio {rho:.4} per doubling of log|t|)"
                )));
            }
            if c * rho / (1.0 - rho) <= 0.1 * rel_tol * (seed + sum) {
                return Ok(sum);
            }
        }
        prev = Some(c);
    }
    Err(Error::Divergence("log-log tail did not settle".into()))
}
