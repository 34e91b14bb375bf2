//! Modified Bessel functions `I_ν`, `K_ν` of real order `ν ≥ 0`.
//!
//! Temme's series below `x = 2`, Steed's continued fraction above, the
//! ratio `I'_ν/I_ν` from its continued fraction and `I_ν` from the Wronskian.
//! Large arguments use the Hankel expansions. Values come exponentially
//! scaled (`e^{−x}I`, `e^{x}K`) so products `I·K` never overflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAXIT: usize = 100_000;
const XMIN: f64 = 2.0;

/// Values and derivatives; scaled ones carry `e^{−x}` on `I` and `e^{x}` on `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselIK {
    pub i: f64,
    pub ip: f64,
    pub k: f64,
    pub kp: f64,
}

// 1/Γ(z) = Σ C[k-1] z^k
const C: [f64; 26] = [
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
];

/// (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2.
fn gammas(mu: f64) -> (f64, f64, f64, f64) {
    let (mut g1, mut g2, mut gp, mut gm) = (0.0, 0.0, 0.0, 0.0);
    let mut pw = 1.0; // μ^{k−1}
    for (idx, &c) in C.iter().enumerate() {
        let k = idx + 1;
        gp += c * pw;
        gm += c * if k % 2 == 1 { pw } else { -pw };
        if k % 2 == 1 {
            g2 += c * pw;
        } else {
            // μ^{k−2}
            g1 -= c * pw / if mu == 0.0 { 1.0 } else { mu };
        }
        pw *= mu;
    }
    if mu == 0.0 {
        g1 = -C[1];
    }
    (g1, g2, gp, gm)
}

fn hankel_sums(nu: f64, x: f64) -> (f64, f64) {
    // Σ a_k/x^k and Σ (−1)^k a_k/x^k
    let mu4 = 4.0 * nu * nu;
    let (mut sk, mut si) = (1.0, 1.0);
    let mut term = 1.0f64;
    for k in 1..60 {
        let kk = k as f64;
        let next = term * (mu4 - (2.0 * kk - 1.0).powi(2)) / (kk * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sk += term;
        si += if k % 2 == 1 { -term } else { term };
        if term.abs() < EPS * sk.abs().min(si.abs()) {
            break;
        }
    }
    (sk, si)
}

fn asymptotic_scaled(nu: f64, x: f64) -> BesselIK {
    let kf = (PI / (2.0 * x)).sqrt();
    let iff = 1.0 / (2.0 * PI * x).sqrt();
    let (k0, i0) = hankel_sums(nu, x);
    let (km, im) = hankel_sums(nu - 1.0, x);
    let (kpl, ipl) = hankel_sums(nu + 1.0, x);
    BesselIK {
        i: iff * i0,
        ip: 0.5 * iff * (im + ipl),
        k: kf * k0,
        kp: -0.5 * kf * (km + kpl),
    }
}

/// Exponentially scaled `I_ν(x), I'_ν(x), K_ν(x), K'_ν(x)` for `x > 0`, `ν ≥ 0`.
pub fn bessel_ik_scaled(nu: f64, x: f64) -> Result<BesselIK> {
    if !(x > 0.0 && x.is_finite()) || !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("Bessel I/K need x > 0 and ν ≥ 0, got x = {x}, ν = {nu}")));
    }
    if x >= 30f64.max(nu * nu) {
        return Ok(asymptotic_scaled(nu, x));
    }
    let nl = (nu + 0.5) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    // CF1 for I'_ν/I_ν
    let fpmin = 1e-300;
    let mut h = (nu * xi).max(fpmin);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut ok = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::NotConverged(format!("continued fraction for I'/I at x = {x}")));
    }
    // downward recurrence to order μ, rescaling to avoid overflow
    let mut ril = 1.0;
    let mut ripl = h * ril;
    let mut ril1 = ril;
    let mut rip1 = ripl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
        if ril.abs() > 1e250 {
            ril *= 1e-250;
            ripl *= 1e-250;
            ril1 *= 1e-250;
            rip1 *= 1e-250;
        }
    }
    let f = ripl / ril;

    // K_μ, K_{μ+1}, scaled by e^{x}
    let (rkmu, rk1) = if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fct = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let dd = -x2.ln();
        let e = xmu * dd;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = gammas(xmu);
        let mut ff = fct * (gam1 * e.cosh() + gam2 * fact2 * dd);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut cc = 1.0;
        let dsq = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= dsq / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * ff;
            sum += del;
            sum1 += cc * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let s = x.exp();
        (sum * s, sum1 * xi2 * s)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NotConverged(format!("continued fraction for K at x = {x}")));
        }
        let h = a1 * h;
        let rkmu = (PI / (2.0 * x)).sqrt() / s;
        (rkmu, rkmu * (xmu + x + 0.5 - h) * xi)
    };
    let rkmup = xmu * xi * rkmu - rk1;
    // Wronskian I_μ K'_μ − I'_μ K_μ = −1/x, scale-invariant
    let rimu = xi / (f * rkmu - rkmup);
    let i = rimu * ril1 / ril;
    let ip = rimu * rip1 / ril;
    let (mut km, mut k1) = (rkmu, rk1);
    for j in 1..=nl {
        let kt = (xmu + j as f64) * xi2 * k1 + km;
        km = k1;
        k1 = kt;
    }
    Ok(BesselIK { i, ip, k: km, kp: nu * xi * km - k1 })
}

/// Unscaled values; `I` overflows to infinity and `K` underflows for large `x`.
pub fn bessel_ik(nu: f64, x: f64) -> Result<BesselIK> {
    let s = bessel_ik_scaled(nu, x)?;
    let (ep, em) = (x.exp(), (-x).exp());
    Ok(BesselIK { i: s.i * ep, ip: s.ip * ep, k: s.k * em, kp: s.kp * em })
}

pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_ik(nu, x)?.i)
}

pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_ik(nu, x)?.k)
}
