//! Exhaustive reference solver.
//!
//! Enumerates all `n^m` owner vectors as a mixed-radix counter (item 0 is the
//! least significant digit) and filters them with [`is_fair`]. It has no
//! pruning and no symmetry reduction; it exists to be obviously right.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fairness::{is_fair, Criterion};
use crate::model::{Allocation, Instance};
use crate::solve::{elapsed_ns, Limits, SolveOutcome, SolveStats};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Maximum number of allocations the enumeration may visit.
    pub budget: u64,
    pub limits: Limits,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            budget: DEFAULT_BUDGET,
            limits: Limits::unlimited(),
        }
    }
}

/// Number of complete allocations, `n^m`, saturating at `u128::MAX`.
pub fn allocation_count(inst: &Instance) -> u128 {
    let n = inst.num_agents() as u128;
    (0..inst.num_items()).fold(1u128, |acc, _| acc.saturating_mul(n))
}

struct Sweep {
    /// Best unconstrained welfare.
    best_any: u64,
    /// Best fair welfare and its owner vector.
    best_fair: Option<(u64, Vec<usize>)>,
    visited: u64,
}

fn sweep(inst: &Instance, crit: Criterion, cfg: &OracleConfig) -> Result<Sweep> {
    let needed = allocation_count(inst);
    if needed > cfg.budget as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: cfg.budget,
        });
    }
    let n = inst.num_agents();
    let m = inst.num_items();
    let mut owner = vec![0usize; m];
    let mut result = Sweep {
        best_any: 0,
        best_fair: None,
        visited: 0,
    };
    loop {
        result.visited += 1;
        if result.visited.is_multiple_of(4096) && cfg.limits.expired() {
            return Err(Error::Timeout);
        }
        let welfare: u64 = owner.iter().enumerate().map(|(j, &a)| inst.value(a, j)).sum();
        result.best_any = result.best_any.max(welfare);

        let improves = match &result.best_fair {
            None => true,
            Some((w, best)) => welfare > *w || (welfare == *w && owner < *best),
        };
        if improves {
            let alloc = Allocation::new(owner.clone());
            let fair = crit == Criterion::None || is_fair(inst, &alloc, crit)?;
            if fair {
                result.best_fair = Some((welfare, owner.clone()));
            }
        }

        // Mixed-radix increment, item 0 least significant.
        let mut digit = 0;
        loop {
            if digit == m {
                return Ok(result);
            }
            owner[digit] += 1;
            if owner[digit] < n {
                break;
            }
            owner[digit] = 0;
            digit += 1;
        }
    }
}

/// Maximum welfare over all allocations satisfying `crit` (`None` admits all).
/// Ties go to the lexicographically smallest owner vector.
pub fn brute_force_um_within(inst: &Instance, crit: Criterion) -> Result<SolveOutcome> {
    brute_force_um_within_with(inst, crit, &OracleConfig::default())
}

pub fn brute_force_um_within_with(
    inst: &Instance,
    crit: Criterion,
    cfg: &OracleConfig,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let sweep = sweep(inst, crit, cfg)?;
    let stats = SolveStats {
        states_explored: sweep.visited,
        states_per_level: Vec::new(),
        elapsed_ns: elapsed_ns(start),
    };
    Ok(match sweep.best_fair {
        Some((welfare, owner)) => SolveOutcome::found(Allocation::new(owner), welfare, stats),
        None => SolveOutcome::infeasible(stats),
    })
}

/// Whether some utilitarian-maximal allocation satisfies `crit`.
pub fn brute_force_decide(inst: &Instance, crit: Criterion) -> Result<bool> {
    brute_force_decide_with(inst, crit, &OracleConfig::default())
}

pub fn brute_force_decide_with(inst: &Instance, crit: Criterion, cfg: &OracleConfig) -> Result<bool> {
    let sweep = sweep(inst, crit, cfg)?;
    Ok(sweep.best_fair.is_some_and(|(w, _)| w == sweep.best_any))
}
