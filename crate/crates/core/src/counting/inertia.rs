//! Finite-element / finite-difference inertia oracle.
//!
//! The quadratic form is discretized with P1 elements on the same nodes the
//! shooting uses. With lumped mass this is the familiar 3-point Laplacian.
//! Sylvester's law turns the count of negative `LDLᵀ` pivots into the number
//! of negative eigenvalues of the discrete operator.

use crate::halfline::HalfLineProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassKind {
    Lumped,
    Consistent,
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, Default)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `self − mu·other`.
    pub fn pencil(&self, other: &Tridiagonal, mu: f64) -> Tridiagonal {
        Tridiagonal {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a - mu * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a - mu * b).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: u64,
    /// A zero pivot forced a restart with a tiny positive shift.
    pub shifted: bool,
}

/// Number of negative eigenvalues of a symmetric tridiagonal matrix.
pub fn negative_eigenvalues(m: &Tridiagonal) -> Inertia {
    if let Some(n) = ldl_negative(m, 0.0) {
        return Inertia { negative: n, shifted: false };
    }
    let scale = m.diag.iter().fold(0.0f64, |a, d| a.max(d.abs())).max(f64::MIN_POSITIVE);
    let mut eps = 1e-14 * scale;
    loop {
        if let Some(n) = ldl_negative(m, eps) {
            return Inertia { negative: n, shifted: true };
        }
        eps *= 10.0;
    }
}

// counts negative pivots of m + shift·I; None on an exact zero pivot
fn ldl_negative(m: &Tridiagonal, shift: f64) -> Option<u64> {
    let mut count = 0;
    let mut d = 0.0f64;
    for i in 0..m.diag.len() {
        let a = m.diag[i] + shift;
        d = if i == 0 { a } else { a - m.off[i - 1] * m.off[i - 1] / d };
        if d == 0.0 || !d.is_finite() {
            if d.is_infinite() && d > 0.0 {
                continue;
            }
            return None;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    Some(count)
}

/// Assembles the form `∫ (stiff·u'² + c u²)` over the chain on the given
/// nodes, in unknowns shared through the `t`-frame value at junctions.
///
/// With `boundary_terms` the junction corrections and the Robin end terms are
/// included; Dirichlet ends are always removed from the unknowns.
pub fn assemble<C>(problem: &HalfLineProblem, nodes: &[Vec<f64>], stiffness: bool, coeff: C, mass: MassKind, boundary_terms: bool) -> Tridiagonal
where
    C: Fn(usize, f64) -> f64,
{
    let total: usize = nodes.iter().map(|n| n.len()).sum::<usize>() - (nodes.len() - 1);
    let mut diag = vec![0.0; total];
    let mut off = vec![0.0; total.saturating_sub(1)];
    let nseg = problem.segments.len();
    let mut base = 0;
    for (i, (seg, xs)) in problem.segments.iter().zip(nodes).enumerate() {
        let last = xs.len() - 1;
        let scale = |j: usize| -> f64 {
            if (j == 0 && i > 0) || (j == last && i + 1 < nseg) {
                1.0 / seg.coordinate.scale(xs[j])
            } else {
                1.0
            }
        };
        for j in 0..last {
            let h = xs[j + 1] - xs[j];
            let c = coeff(i, 0.5 * (xs[j] + xs[j + 1])).clamp(-1e200, 1e200);
            let (sa, sb) = (scale(j), scale(j + 1));
            let (ga, gb) = (base + j, base + j + 1);
            let (mut d, mut o) = if stiffness { (1.0 / h, -1.0 / h) } else { (0.0, 0.0) };
            let (md, mo) = match mass {
                MassKind::Lumped => (0.5 * h * c, 0.0),
                MassKind::Consistent => (h * c / 3.0, h * c / 6.0),
            };
            d += md;
            o += mo;
            diag[ga] += d * sa * sa;
            diag[gb] += d * sb * sb;
            off[ga] += o * sa * sb;
        }
        if boundary_terms && i + 1 < nseg {
            // [c u²] from this segment's upper end minus the next one's lower end
            let next = &problem.segments[i + 1];
            let xa = seg.hi;
            let xb = next.lo;
            let ua = 1.0 / seg.coordinate.scale(xa);
            let ub = 1.0 / next.coordinate.scale(xb);
            diag[base + last] += seg.coordinate.boundary_coefficient(xa) * ua * ua - next.coordinate.boundary_coefficient(xb) * ub * ub;
        }
        base += last;
    }
    let first = &problem.segments[0];
    let end = problem.segments.last().unwrap();
    if boundary_terms {
        if let Some(h) = problem.left.robin_h(first.lo) {
            diag[0] += h;
        }
        if let Some(h) = problem.right.robin_h(end.hi) {
            diag[total - 1] -= h;
        }
    }
    let lo = problem.left.robin_h(first.lo).is_none() as usize;
    let hi = total - problem.right.robin_h(end.hi).is_none() as usize;
    if hi <= lo {
        return Tridiagonal::default();
    }
    Tridiagonal { diag: diag[lo..hi].to_vec(), off: off[lo..hi - 1].to_vec() }
}

/// The discrete operator of `problem` at refinement `level`.
pub fn operator_matrix(problem: &HalfLineProblem, nodes: &[Vec<f64>], mass: MassKind) -> Tridiagonal {
    assemble(problem, nodes, true, |i, x| (problem.segments[i].q)(x), mass, true)
}

/// Sylvester count of the discretized problem.
pub fn inertia_count(problem: &HalfLineProblem, level: u32) -> Inertia {
    let nodes = problem.nodes(level);
    negative_eigenvalues(&operator_matrix(problem, &nodes, MassKind::Lumped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfline::{Boundary, Coordinate, HalfLineProblem};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn free_and_well() {
        let p = HalfLineProblem::single(Coordinate::Log, 0.0, 3.0, Arc::new(|_| 0.0));
        assert_eq!(inertia_count(&p, 0).negative, 0);
        let l = 2.0f64;
        let p = HalfLineProblem::single(Coordinate::Log, 0.0, l, Arc::new(move |_| -1.5 * (PI / l).powi(2)));
        assert_eq!(inertia_count(&p, 2).negative, 1);
    }

    #[test]
    fn neumann_constant_mode() {
        let p = HalfLineProblem::single(Coordinate::Log, 0.0, 1.0, Arc::new(|_| -0.01)).with_boundaries(Boundary::Neumann, Boundary::Neumann);
        assert_eq!(inertia_count(&p, 0).negative, 1);
    }

    #[test]
    fn zero_pivot_restarts() {
        // [[0, 1], [1, 0]] has one negative eigenvalue and a zero first pivot
        let m = Tridiagonal { diag: vec![0.0, 0.0], off: vec![1.0] };
        let r = negative_eigenvalues(&m);
        assert_eq!(r.negative, 1);
        assert!(r.shifted);
    }

    #[test]
    fn dense_check_of_sylvester() {
        // eigenvalues of tridiag(-1, 2, -1) − 3.9 I: 2 − 2cos(kπ/(n+1)) − 3.9, only the top one stays above
        let n = 12;
        let m = Tridiagonal { diag: vec![2.0 - 3.9; n], off: vec![-1.0; n - 1] };
        let expect = (1..=n).filter(|k| 2.0 - 2.0 * (*k as f64 * PI / (n as f64 + 1.0)).cos() - 3.9 < 0.0).count();
        assert_eq!(negative_eigenvalues(&m).negative as usize, expect);
    }
}
