//! Counting negative eigenvalues channel by channel.
//!
//! Two independent counters are available: Prüfer shooting and a Sylvester
//! inertia count of a finite-element matrix. The drivers refine the grid
//! until a count repeats over two doublings, then grow the domain until the
//! total repeats over two more doublings.

pub mod inertia;
pub mod oracle;
mod scan;
pub mod shooting;

pub use scan::{fit_exponent, scan_coupling, weak_coupling_threshold, ExponentFit, ScanResult, ThresholdOptions, ThresholdReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::channel::{channel_cutoff, describe_domain, ChannelProblem, DomainSpec, Shift};
use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::halfline::{GridSpec, HalfLineProblem};
use crate::potential::PotentialProfile;
use inertia::{inertia_count, negative_eigenvalues, operator_matrix, MassKind};
use shooting::{shoot_on_nodes, ShootOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    #[default]
    Shooting,
    Inertia,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountOptions {
    pub method: CountMethod,
    pub domain: DomainSpec,
    pub grid: GridSpec,
    pub max_grid_levels: u32,
    pub max_domain_levels: u32,
    /// Count on this domain level only, without growth.
    pub fixed_domain: Option<u32>,
    /// Overrides the certified channel cutoff.
    pub channels: Option<u64>,
    pub shift: Option<Shift>,
    /// Wall-clock budget in seconds; exhausting it yields an unconverged report.
    pub time_budget_s: Option<f64>,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            method: CountMethod::Shooting,
            domain: DomainSpec::default(),
            grid: GridSpec::default(),
            max_grid_levels: 8,
            max_domain_levels: 24,
            fixed_domain: None,
            channels: None,
            shift: None,
            time_budget_s: None,
        }
    }
}

impl CountOptions {
    fn deadline(&self, start: Instant) -> Option<Instant> {
        self.time_budget_s.map(|s| start + Duration::from_secs_f64(s.max(0.0)))
    }
}

/// Outcome of grid refinement on one half-line problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalflineCount {
    pub count: u64,
    /// Finest level used.
    pub level: u32,
    pub converged: bool,
    /// Count per level; `None` marks a tie that was skipped.
    pub history: Vec<Option<u64>>,
}

/// One count at a fixed grid level.
pub fn count_at_level(problem: &HalfLineProblem, method: CountMethod, level: u32) -> Result<Option<u64>> {
    let nodes = problem.nodes(level);
    match method {
        CountMethod::Shooting => match shoot_on_nodes(problem, &nodes) {
            ShootOutcome::Count(n) => Ok(Some(n)),
            ShootOutcome::Tie => Ok(None),
            ShootOutcome::BadCoefficient => Err(Error::Singularity(format!("non-finite coefficient on {}", describe_domain(problem)))),
        },
        CountMethod::Inertia => Ok(Some(negative_eigenvalues(&operator_matrix(problem, &nodes, MassKind::Lumped)).negative)),
    }
}

/// Refines the grid until three consecutive levels agree.
pub fn count_halfline(problem: &HalfLineProblem, method: CountMethod, max_levels: u32) -> Result<HalflineCount> {
    count_halfline_until(problem, method, max_levels, None)
}

fn count_halfline_until(problem: &HalfLineProblem, method: CountMethod, max_levels: u32, deadline: Option<Instant>) -> Result<HalflineCount> {
    problem.validate()?;
    let mut history = Vec::new();
    let mut valid: Vec<u64> = Vec::new();
    for level in 0..=max_levels {
        let c = count_at_level(problem, method, level)?;
        history.push(c);
        if let Some(c) = c {
            valid.push(c);
            let n = valid.len();
            if n >= 3 && valid[n - 1] == valid[n - 2] && valid[n - 2] == valid[n - 3] {
                return Ok(HalflineCount { count: c, level, converged: true, history });
            }
        }
        if deadline.is_some_and(|d| Instant::now() > d) {
            break;
        }
    }
    let level = history.len() as u32 - 1;
    match valid.last() {
        Some(&c) => Ok(HalflineCount { count: c, level, converged: false, history }),
        None => Err(Error::Resolution {
            message: "every refinement level ended on an eigenvalue at zero".into(),
            suggested: problem.cell_count(level) * 2,
        }),
    }
}

/// Both counters on the same problem at the same level, used for cross-checks.
pub fn count_both(problem: &HalfLineProblem, level: u32) -> (ShootOutcome, u64) {
    (shooting::shoot(problem, level), inertia_count(problem, level).negative)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    /// Finest grid level any channel needed.
    pub grid_level: u32,
    pub domain_level: u32,
    /// Domain of the channel problems, e.g. `t[-13.8,6.9]`.
    pub domain: String,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub lambda: f64,
    pub total: u64,
    pub per_channel: BTreeMap<i64, u64>,
    pub cutoff: u64,
    pub method: CountMethod,
    pub variable: String,
    pub trail: Vec<RefinementStep>,
    pub grid_converged: bool,
    pub domain_converged: bool,
    pub converged: bool,
}

struct LevelResult {
    per_channel: BTreeMap<i64, u64>,
    total: u64,
    grid_level: u32,
    grid_converged: bool,
    domain: String,
    variable: String,
}

fn count_domain_level(
    field: &Arc<FieldProfile>,
    potential: &Arc<PotentialProfile>,
    lambda: f64,
    cutoff: u64,
    level: u32,
    opts: &CountOptions,
    deadline: Option<Instant>,
) -> Result<LevelResult> {
    let m_max = cutoff as i64;
    let results: Vec<(i64, HalflineCount, String, String)> = (-m_max..=m_max)
        .into_par_iter()
        .map(|m| {
            let ch = ChannelProblem::with_shared(field.clone(), potential.clone(), m, lambda, opts.shift);
            let p = opts.domain.problem(&ch, level, opts.grid)?;
            let c = count_halfline_until(&p, opts.method, opts.max_grid_levels, deadline)?;
            Ok((m, c, describe_domain(&p), p.variable()))
        })
        .collect::<Result<_>>()?;
    let mut per_channel = BTreeMap::new();
    let mut total = 0;
    let mut grid_level = 0;
    let mut grid_converged = true;
    for (m, c, _, _) in &results {
        per_channel.insert(*m, c.count);
        total += c.count;
        grid_level = grid_level.max(c.level);
        grid_converged &= c.converged;
    }
    let (_, _, domain, variable) = results.into_iter().find(|r| r.0 == 0).unwrap();
    Ok(LevelResult { per_channel, total, grid_level, grid_converged, domain, variable })
}

/// `N(H_B − λV, 0)` summed over channels `|m| ≤ M`.
pub fn count_total(field: &FieldProfile, potential: &PotentialProfile, lambda: f64, opts: &CountOptions) -> Result<CountReport> {
    field.total_flux()?;
    potential.validate()?;
    opts.domain.validate()?;
    if let Some(s) = opts.shift {
        if !(s.coefficient >= 0.0) {
            return Err(Error::Domain(format!("shift coefficient must be nonnegative, got {}", s.coefficient)));
        }
    }
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let cutoff = match opts.channels {
        Some(c) => c,
        None => channel_cutoff(field, potential, lambda)?,
    };
    let field = Arc::new(field.clone());
    let potential = Arc::new(potential.clone());
    let (first, last) = match opts.fixed_domain {
        Some(d) => (d, d),
        None => (0, opts.max_domain_levels),
    };
    let mut trail: Vec<RefinementStep> = Vec::new();
    let mut latest: Option<LevelResult> = None;
    let mut domain_converged = false;
    for level in first..=last {
        let r = count_domain_level(&field, &potential, lambda, cutoff, level, opts, deadline)?;
        trail.push(RefinementStep { grid_level: r.grid_level, domain_level: level, domain: r.domain.clone(), total: r.total });
        latest = Some(r);
        if opts.fixed_domain.is_some() {
            domain_converged = true;
            break;
        }
        let n = trail.len();
        if n >= 3 && trail[n - 1].total == trail[n - 2].total && trail[n - 2].total == trail[n - 3].total {
            domain_converged = true;
            break;
        }
        if deadline.is_some_and(|d| Instant::now() > d) {
            break;
        }
    }
    let r = latest.expect("at least one domain level");
    Ok(CountReport {
        lambda,
        total: r.total,
        per_channel: r.per_channel,
        cutoff,
        method: opts.method,
        variable: r.variable,
        trail,
        grid_converged: r.grid_converged,
        domain_converged,
        converged: r.grid_converged && domain_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::VariableChoice;

    fn fixed(method: CountMethod) -> CountOptions {
        CountOptions { method, fixed_domain: Some(0), ..Default::default() }
    }

    #[test]
    fn no_potential_no_states() {
        let r = count_total(&FieldProfile::step(1.0, 1.0).unwrap(), &PotentialProfile::zero(), 0.0, &CountOptions::default()).unwrap();
        assert_eq!(r.total, 0);
        assert!(r.converged);
        assert_eq!(r.trail.len(), 3);
    }

    #[test]
    fn methods_agree_on_disk_well() {
        let v = PotentialProfile::indicator_disk(1.0).unwrap();
        let f = FieldProfile::step(1.0, 1.0).unwrap();
        let a = count_total(&f, &v, 40.0, &fixed(CountMethod::Shooting)).unwrap();
        let b = count_total(&f, &v, 40.0, &fixed(CountMethod::Inertia)).unwrap();
        assert!(a.converged && b.converged);
        assert_eq!(a.per_channel, b.per_channel);
        assert!(a.total > 3);
    }

    #[test]
    fn variables_agree() {
        let v = PotentialProfile::indicator_disk(1.0).unwrap();
        let f = FieldProfile::aharonov_bohm(0.3).unwrap();
        let mut totals = Vec::new();
        for variable in [VariableChoice::R, VariableChoice::Log, VariableChoice::Loglog] {
            let mut o = fixed(CountMethod::Shooting);
            o.domain.variable = variable;
            o.domain.r_min = 1e-3;
            o.domain.r_max = 30.0;
            totals.push(count_total(&f, &v, 25.0, &o).unwrap().total);
        }
        assert_eq!(totals[0], totals[1]);
        assert_eq!(totals[1], totals[2]);
    }

    #[test]
    fn budget_exhaustion_reports_unconverged() {
        let v = PotentialProfile::indicator_disk(1.0).unwrap();
        let o = CountOptions { time_budget_s: Some(0.0), ..Default::default() };
        let r = count_total(&FieldProfile::zero(), &v, 3.0, &o).unwrap();
        assert!(!r.converged);
    }
}
