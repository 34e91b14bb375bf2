//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities, then asserts.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use magcount::bessel::bessel_ik_scaled;
use magcount::bs::{bessel_green_diag, bessel_green_diag_limit, bs_channel_bound, BsKernelSpec};
use magcount::counting::oracle::oracle_sweep;
use magcount::counting::{count_halfline, count_total, fit_exponent, scan_coupling, weak_coupling_threshold, CountMethod, CountOptions, ThresholdOptions};
use magcount::halfline::{Boundary, Coordinate, HalfLineProblem};
use magcount::hardy::{hardy_constant, test_family_quotient, HardyOptions};
use magcount::potential::{bound_rhs, weighted_norm, TheoremId, WeightId};
use magcount::{FieldProfile, LogPoint, PotentialProfile, Weight};

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {n} ({name}): {} | {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = std::time::Instant::now();
    let s = oracle_sweep(20240601, 100, 8).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = s.agreements == 100 && secs < 60.0;
    verdict(1, "oracle equivalence", pass, &format!("{}/100 agree in {secs:.1}s", s.agreements));
    assert!(pass, "{:?}", s.mismatches());
}

#[test]
fn criterion_2_weyl_anchor() {
    let f = FieldProfile::step(1.0, 1.0).unwrap();
    let v = PotentialProfile::indicator_disk(1.0).unwrap();
    let ls = [100.0, 200.0, 400.0];
    let s = scan_coupling(&f, &v, &ls, &CountOptions::default()).unwrap();
    let ratios: Vec<f64> = s.totals().iter().zip(ls).map(|(n, l)| *n as f64 / l).collect();
    let dev: Vec<f64> = ratios.iter().map(|r| (r - 0.25).abs()).collect();
    let monotone = dev.windows(2).all(|w| w[1] <= w[0]);
    let close = dev[2] <= 0.15 * 0.25;
    let pass = s.converged && monotone && close;
    verdict(2, "Weyl anchor", pass, &format!("N = {:?}, N/λ = {ratios:?}, |N/λ − 1/4| nonincreasing: {monotone}, within 15% at 400: {close}", s.totals()));
    assert!(pass);
}

const BL_LADDER: [f64; 7] = [20.0, 28.284271247461902, 40.0, 56.568542494923804, 80.0, 113.13708498984761, 160.0];

#[test]
fn criterion_3_superlinear_dichotomy() {
    let w = PotentialProfile::w_sigma(2.0).unwrap();
    let o = CountOptions::default();
    let integer = scan_coupling(&FieldProfile::step(2.0, 1.0).unwrap(), &w, &BL_LADDER, &o).unwrap();
    let fit = fit_exponent(&BL_LADDER, &integer.totals(), None, 1).unwrap();
    let half = scan_coupling(&FieldProfile::step(1.0, 1.0).unwrap(), &w, &BL_LADDER, &o).unwrap();
    let fit_half = fit_exponent(&BL_LADDER, &half.totals(), None, 1).unwrap();
    let variable_ok = integer.reports.iter().all(|r| r.variable.contains('s'));
    let pass = variable_ok
        && integer.converged
        && half.converged
        && (1.7..=2.3).contains(&fit.exponent)
        && (1.0..=4.0).contains(&fit.prefactor)
        && fit_half.exponent <= 1.2;
    verdict(
        3,
        "super-linear dichotomy",
        pass,
        &format!(
            "Φ=1: N = {:?}, σ̂ = {:.4}, prefactor = {:.4} (reference 2); Φ=1/2: N = {:?}, σ̂ = {:.4}",
            integer.totals(),
            fit.exponent,
            fit.prefactor,
            half.totals(),
            fit_half.exponent
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_local_singularity_growth() {
    let v = PotentialProfile::v_sigma(2.0).unwrap();
    let ladder = [20.0, 40.0, 80.0, 160.0];
    let o = CountOptions::default();
    let regular = scan_coupling(&FieldProfile::step(1.0, 1.0).unwrap(), &v, &ladder, &o).unwrap();
    let ab = scan_coupling(&FieldProfile::aharonov_bohm(0.5).unwrap(), &v, &ladder, &o).unwrap();
    let fr = fit_exponent(&ladder, &regular.totals(), None, 1).unwrap();
    let fa = fit_exponent(&ladder, &ab.totals(), None, 1).unwrap();
    let smaller = regular.totals().iter().zip(ab.totals()).all(|(r, a)| a < *r);
    let near_origin = regular.reports.iter().all(|r| r.variable.starts_with("s_inner"));
    let pass = regular.converged && ab.converged && near_origin && fr.exponent >= 1.7 && smaller && fa.exponent < fr.exponent;
    verdict(
        4,
        "local-singularity growth",
        pass,
        &format!("regular: N = {:?}, σ̂ = {:.4}; AB 1/2: N = {:?}, σ̂ = {:.4}", regular.totals(), fr.exponent, ab.totals(), fa.exponent),
    );
    assert!(pass);
}

#[test]
fn criterion_5_weak_coupling_dichotomy() {
    let v = PotentialProfile::indicator_disk(1.0).unwrap();
    let free: Vec<u64> = [0.5, 0.25, 0.125].iter().map(|&l| count_total(&FieldProfile::zero(), &v, l, &CountOptions::default()).unwrap().total).collect();
    let t = weak_coupling_threshold(&FieldProfile::aharonov_bohm(0.5).unwrap(), &v, &ThresholdOptions::default()).unwrap();
    let tail: Vec<f64> = t.trail.iter().rev().take(3).map(|s| s.lambda_star).collect();
    let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / tail.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let pass = free.iter().all(|n| *n >= 1) && !t.vanishing && t.lambda_star > 0.0 && tail.len() == 3 && spread < 0.05;
    verdict(5, "weak-coupling dichotomy", pass, &format!("B=0: N = {free:?}; AB 1/2: λ* = {:.5}, last three levels spread {:.2}%", t.lambda_star, 100.0 * spread));
    assert!(pass);
}

/// Negative eigenvalues of `−Δ_δ − W` on `(a, b)` with Neumann ends, in `t = log r`.
fn channel_count(delta: f64, w: &PotentialProfile, a: f64, b: f64) -> u64 {
    let lo = if a == 0.0 { (1e-8f64).ln() } else { a.ln() };
    let hi = if b.is_infinite() { (w.breakpoints().last().copied().unwrap_or(1.0) * 1e3).ln() } else { b.ln() };
    let w2 = w.clone();
    let q = Arc::new(move |t: f64| delta * delta - w2.r2v_hat(LogPoint::from_t(t)));
    let left = if a == 0.0 { Boundary::Dirichlet } else { Boundary::Neumann };
    let right = if b.is_infinite() { Boundary::Dirichlet } else { Boundary::Neumann };
    let mut p = HalfLineProblem::single(Coordinate::Log, lo, hi, q).with_boundaries(left, right);
    let breaks = w.breakpoints().iter().map(|r| r.ln()).collect();
    p.segments[0] = p.segments[0].clone().with_breakpoints(breaks);
    let c = count_halfline(&p, CountMethod::Shooting, 10).unwrap();
    assert!(c.converged);
    c.count
}

#[test]
fn criterion_6_bs_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = Vec::new();
    let mut max_count = 0;
    for i in 0..50 {
        let delta = rng.gen_range(0.75..3.0);
        let n = rng.gen_range(1..=3);
        let mut radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..4.0)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        let values = radii.iter().map(|_| rng.gen_range(0.0..150.0)).collect();
        let w = PotentialProfile::steps(radii, values).unwrap();
        let (a, b) = if rng.gen_bool(0.5) { (0.0, rng.gen_range(0.5..6.0)) } else { (rng.gen_range(0.1..2.0), f64::INFINITY) };
        let bound = bs_channel_bound(delta, &w, a, b).unwrap();
        let count = channel_count(delta, &w, a, b);
        max_count = max_count.max(count);
        if (count as f64) > bound {
            violations.push((i, delta, a, b, count, bound));
        }
    }
    let mut worst_limit: f64 = 0.0;
    for delta in [0.75, 1.0, 2.0, 3.5] {
        for (a, b) in [(0.0, 2.0), (0.5, f64::INFINITY), (0.5, 3.0), (0.0, f64::INFINITY)] {
            for r in [0.7, 1.0, 1.9] {
                let g = bessel_green_diag(&BsKernelSpec { delta, a, b, kappa: 1e-6 }, r).unwrap();
                let l = bessel_green_diag_limit(delta, a, b, r).unwrap();
                worst_limit = worst_limit.max((g / l - 1.0).abs());
            }
        }
    }
    let mut worst_wronskian: f64 = 0.0;
    for i in 0..=48 {
        let nu = 60.0 * (i as f64 / 48.0).powi(2);
        for j in 0..=40 {
            let x = 10f64.powf(-3.0 + 8.0 * j as f64 / 40.0);
            let s = bessel_ik_scaled(nu, x).unwrap();
            worst_wronskian = worst_wronskian.max(((s.i * s.kp - s.ip * s.k) * x + 1.0).abs());
        }
    }
    let pass = violations.is_empty() && worst_limit < 1e-5 && worst_wronskian < 1e-10;
    verdict(
        6,
        "BS dominance",
        pass,
        &format!("{} violations in 50 (largest count {max_count}); κ-limit rel err {worst_limit:.2e}; Wronskian rel err {worst_wronskian:.2e}", violations.len()),
    );
    assert!(pass, "{violations:?}");
}

#[test]
fn criterion_7_hardy_dichotomy() {
    let half = FieldProfile::step(1.0, 1.0).unwrap();
    let one = FieldProfile::step(2.0, 1.0).unwrap();
    // the trail starts at domain level 2, where the Dirichlet box term (π/L)² is below 1%
    let refinements = [(2, 3), (3, 4), (4, 5)];
    let at = |f: &FieldProfile, w: Weight, d: u32, g: u32| hardy_constant(f, w, f.n0(), &HardyOptions { domain_level: d, grid_level: g, ..Default::default() }).unwrap().value;
    let half_vals: Vec<f64> = refinements.iter().map(|&(d, g)| at(&half, Weight::InvOnePlusSq, d, g)).collect();
    let hmin = half_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hmax = half_vals.iter().cloned().fold(0.0, f64::max);
    let half_ok = hmin > 0.05 && hmax / hmin - 1.0 < 0.05;

    let one_vals: Vec<f64> = refinements.iter().map(|&(d, g)| at(&one, Weight::InvOnePlusSq, d, g)).collect();
    let log_vals: Vec<f64> = refinements.iter().map(|&(d, g)| at(&one, Weight::LogWeight, d, g)).collect();
    let one_ok = one_vals[0] >= 10.0 * one_vals[2] && log_vals.iter().all(|c| *c > 0.05);

    let ns = [10u64, 20, 50, 100, 200];
    let samples: Vec<_> = ns.iter().map(|&n| test_family_quotient(&one, n, Weight::InvSqSmooth).unwrap()).collect();
    let num_max = samples.iter().map(|s| s.numerator).fold(0.0, f64::max);
    let num_ok = num_max <= 2.0 * samples[0].numerator;
    let den_growth = samples[4].denominator / samples[0].denominator;
    let den_ok = den_growth >= 10.0;

    let pass = half_ok && one_ok && num_ok && den_ok;
    verdict(
        7,
        "Hardy dichotomy",
        pass,
        &format!(
            "Φ=1/2 (1+r²)⁻¹: {half_vals:.4?}; Φ=1 (1+r²)⁻¹: {one_vals:.4?} (drop {:.1}×); log weight: {log_vals:.4?}; numerator max/n=10: {:.3}; denominator n=200/n=10: {den_growth:.2}×",
            one_vals[0] / one_vals[2],
            num_max / samples[0].numerator
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_bound_norm_exactness() {
    let v = PotentialProfile::indicator_disk(1.0).unwrap();
    let checks = [
        ("L1_R2", weighted_norm(&v, WeightId::L1R2).unwrap(), PI),
        ("L1_log_B1", weighted_norm(&v, WeightId::L1LogB1).unwrap(), PI / 2.0),
        ("L1_halfline_Linf", weighted_norm(&v, WeightId::L1HalflineLinf).unwrap(), 0.5),
        ("weyl", weighted_norm(&v, WeightId::Weyl).unwrap(), 0.25),
        ("clr-mag-2 a=1", bound_rhs(TheoremId::ClrMag2 { a: 1.0 }, &v).unwrap().rhs_value, 17.0 * PI / 6.0),
    ];
    let worst = checks.iter().map(|(_, got, want)| (got / want - 1.0).abs()).fold(0.0, f64::max);
    let pass = worst <= 1e-6;
    let detail: Vec<String> = checks.iter().map(|(n, got, _)| format!("{n}={got:.10}")).collect();
    verdict(8, "bound-norm exactness", pass, &format!("{} (worst rel err {worst:.1e})", detail.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_9_variational_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    for i in 0..20 {
        let field = match rng.gen_range(0..3) {
            0 => FieldProfile::zero(),
            1 => FieldProfile::step(rng.gen_range(0.2..3.0), rng.gen_range(0.5..2.0)).unwrap(),
            _ => FieldProfile::aharonov_bohm(rng.gen_range(0.1..0.9)).unwrap(),
        };
        let n = rng.gen_range(1..=3);
        let mut radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        let values = radii.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
        let v = PotentialProfile::steps(radii, values).unwrap();
        let lambda = rng.gen_range(2.0..40.0);
        let o = CountOptions::default();
        let lo = count_total(&field, &v, lambda, &o).unwrap();
        let hi = count_total(&field, &v, 2.0 * lambda, &o).unwrap();
        let zero = hi.per_channel.get(&0).copied().unwrap_or(0);
        let rest: u64 = hi.per_channel.iter().filter(|(m, _)| **m != 0).map(|(_, c)| c).sum();
        if lo.total > zero + rest {
            failures.push((i, lambda, lo.total, zero, rest));
        }
    }
    let pass = failures.is_empty();
    verdict(9, "variational split", pass, &format!("{} of 20 configurations violate N(λ) ≤ N₀(2λ) + N_Q(2λ)", failures.len()));
    assert!(pass, "{failures:?}");
}
