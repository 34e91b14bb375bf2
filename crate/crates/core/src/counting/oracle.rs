//! Seeded cross-checks of the two counters on random half-line problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{count_halfline, CountMethod};
use crate::channel::{build_channel, DomainSpec, VariableChoice};
use crate::error::Result;
use crate::field::{FieldKind, FieldProfile};
use crate::halfline::{GridSpec, HalfLineProblem};
use crate::potential::PotentialProfile;

/// One random channel problem drawn from step fields and step potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub index: usize,
    pub field: FieldProfile,
    pub potential: PotentialProfile,
    pub m: i64,
    pub lambda: f64,
    pub variable: VariableChoice,
}

impl OracleCase {
    pub fn problem(&self) -> Result<HalfLineProblem> {
        let ch = build_channel(&self.field, &self.potential, self.m, self.lambda, None);
        let domain = DomainSpec { r_min: 1e-3, r_max: 20.0, variable: self.variable };
        domain.problem(&ch, 0, GridSpec { base_cells: 64, ..GridSpec::default() })
    }
}

fn sorted_radii(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    r.sort_by(f64::total_cmp);
    r.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    r
}

/// The `index`-th case of the stream seeded by `seed`.
pub fn random_case(seed: u64, index: usize) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let field = match rng.gen_range(0..4) {
        0 => FieldProfile::zero(),
        1 => FieldProfile::step(rng.gen_range(0.1..4.0), rng.gen_range(0.3..2.0)).expect("valid step field"),
        2 => {
            let radii = sorted_radii(&mut rng, 2, 0.2, 2.5);
            let values = radii.iter().map(|_| rng.gen_range(-1.0..3.0)).collect();
            FieldProfile::new(FieldKind::PiecewiseConstant { radii, values }).expect("valid piecewise field")
        }
        _ => FieldProfile::aharonov_bohm(rng.gen_range(0.05..1.5)).expect("valid flux"),
    };
    let n = rng.gen_range(1..=3);
    let radii = sorted_radii(&mut rng, n, 0.2, 3.0);
    let values = radii.iter().map(|_| rng.gen_range(0.0..3.0)).collect();
    let potential = PotentialProfile::steps(radii, values).expect("valid step potential");
    let m = rng.gen_range(-3..=3);
    let lambda = rng.gen_range(1.0..60.0);
    let variable = [VariableChoice::R, VariableChoice::Log, VariableChoice::Loglog][rng.gen_range(0..3)];
    OracleCase { index, field, potential, m, lambda, variable }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub case: OracleCase,
    pub shooting: u64,
    pub inertia: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSweep {
    pub seed: u64,
    pub outcomes: Vec<OracleOutcome>,
    pub agreements: usize,
}

impl OracleSweep {
    pub fn mismatches(&self) -> Vec<&OracleOutcome> {
        self.outcomes.iter().filter(|o| o.shooting != o.inertia).collect()
    }
}

/// Converged shooting and inertia counts on `samples` seeded cases.
pub fn oracle_sweep(seed: u64, samples: usize, max_levels: u32) -> Result<OracleSweep> {
    let outcomes: Vec<OracleOutcome> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let case = random_case(seed, i);
            let p = case.problem()?;
            let s = count_halfline(&p, CountMethod::Shooting, max_levels)?;
            let t = count_halfline(&p, CountMethod::Inertia, max_levels)?;
            Ok(OracleOutcome { case, shooting: s.count, inertia: t.count, converged: s.converged && t.converged })
        })
        .collect::<Result<_>>()?;
    let agreements = outcomes.iter().filter(|o| o.shooting == o.inertia).count();
    Ok(OracleSweep { seed, outcomes, agreements })
}
