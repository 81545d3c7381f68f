//! Pseudopolynomial dynamic programs for utilitarian welfare maximization
//! under a fairness constraint.
//!
//! Items are allocated one at a time; each level of the DP is the set of
//! distinct summaries ("states") of the partial allocations of the first `k`
//! items. The summary keeps exactly what the final fairness test needs:
//!
//! * proportionality and equitability use per-agent utilities `t_i`
//!   ([`solve_um_within_peragent`]);
//! * envy-freeness uses pairwise differences `t_{i,j} = u_i(p(i)) - u_i(p(j))`
//!   ([`solve_um_within_pairwise`]). Since `sum_{j != i} t_{i,j}` equals
//!   `n * u_i(p(i)) - u_i(O)`, maximizing the sum of all differences
//!   maximizes welfare.
//!
//! The "up to one item" variants additionally carry one tracked item per
//! agent (or per ordered pair). The number of states per level is bounded by
//! [`state_bound_per_level`].

mod pairwise;
mod per_agent;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::Criterion;
use crate::model::{um_welfare, Instance};
use crate::solve::{Limits, SolveOutcome, SolveStats};
use crate::two_agent::{exists_um_and_fair_2, Answer};

use pairwise::Pairwise;
use per_agent::PerAgent;

#[derive(Debug, Clone, Copy)]
pub struct DpConfig {
    pub limits: Limits,
    /// Collapse the pairwise tracked items to one per agent when all agents
    /// rank the items identically.
    pub common_ranking_fast_path: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            limits: Limits::unlimited(),
            common_ranking_fast_path: true,
        }
    }
}

/// Which state family a criterion is solved with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    PerAgent,
    Pairwise,
}

pub fn family(crit: Criterion) -> Option<Family> {
    match crit {
        Criterion::Prop
        | Criterion::Prop1
        | Criterion::Propx
        | Criterion::Eq
        | Criterion::Eq1
        | Criterion::Eqx => Some(Family::PerAgent),
        Criterion::Ef | Criterion::Ef1 | Criterion::Efx => Some(Family::Pairwise),
        Criterion::None => None,
    }
}

fn check_magnitude(inst: &Instance) -> Result<()> {
    // Pairwise keys store t + V in [0, 2V].
    if inst.value_cap() > (u32::MAX / 2) as u64 {
        return Err(Error::InvalidInstance(format!(
            "value cap {} is too large for the DP state encoding",
            inst.value_cap()
        )));
    }
    if inst.num_items() >= u32::MAX as usize {
        return Err(Error::InvalidInstance("too many items for the DP".into()));
    }
    Ok(())
}

pub fn solve_um_within_peragent(inst: &Instance, crit: Criterion) -> Result<SolveOutcome> {
    solve_um_within_peragent_with(inst, crit, &DpConfig::default())
}

pub fn solve_um_within_peragent_with(
    inst: &Instance,
    crit: Criterion,
    cfg: &DpConfig,
) -> Result<SolveOutcome> {
    if family(crit) != Some(Family::PerAgent) {
        return Err(Error::Usage(format!("{crit} is not a proportionality/equitability criterion")));
    }
    check_magnitude(inst)?;
    let out = table::solve(&PerAgent::new(inst, crit), inst, &cfg.limits)?;
    debug_assert!(within_bounds(inst, crit, &out.stats));
    Ok(out)
}

pub fn solve_um_within_pairwise(inst: &Instance, crit: Criterion) -> Result<SolveOutcome> {
    solve_um_within_pairwise_with(inst, crit, &DpConfig::default())
}

pub fn solve_um_within_pairwise_with(
    inst: &Instance,
    crit: Criterion,
    cfg: &DpConfig,
) -> Result<SolveOutcome> {
    if family(crit) != Some(Family::Pairwise) {
        return Err(Error::Usage(format!("{crit} is not an envy-freeness criterion")));
    }
    check_magnitude(inst)?;
    let scheme = Pairwise::new(inst, crit, cfg.common_ranking_fast_path);
    let out = table::solve(&scheme, inst, &cfg.limits)?;
    if let Some(alloc) = &out.allocation {
        // The objective identity that makes the difference sum a welfare proxy.
        let key = table::replay(&scheme, alloc);
        let own = crate::model::agent_utilities(inst, alloc);
        let n = inst.num_agents() as i64;
        for (i, &u) in own.iter().enumerate() {
            let row: i64 = (0..inst.num_agents())
                .filter(|&j| j != i)
                .map(|j| scheme.diff(&key, i, j))
                .sum();
            assert_eq!(row, n * u as i64 - inst.total_value(i) as i64);
        }
    }
    debug_assert!(within_bounds(inst, crit, &out.stats));
    Ok(out)
}

/// Dispatches to the matching engine. `None` yields the greedy UM allocation.
pub fn solve_um_within(inst: &Instance, crit: Criterion) -> Result<SolveOutcome> {
    solve_um_within_with(inst, crit, &DpConfig::default())
}

pub fn solve_um_within_with(inst: &Instance, crit: Criterion, cfg: &DpConfig) -> Result<SolveOutcome> {
    match family(crit) {
        Some(Family::PerAgent) => solve_um_within_peragent_with(inst, crit, cfg),
        Some(Family::Pairwise) => solve_um_within_pairwise_with(inst, crit, cfg),
        None => {
            let (w, alloc) = um_welfare(inst);
            Ok(SolveOutcome::found(alloc, w, SolveStats::default()))
        }
    }
}

/// Whether the instance is solved with the common-ranking fast path for `crit`.
pub fn uses_common_ranking(inst: &Instance, crit: Criterion, cfg: &DpConfig) -> bool {
    family(crit) == Some(Family::Pairwise)
        && Pairwise::new(inst, crit, cfg.common_ranking_fast_path).uses_common_ranking()
}

fn sat_pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Upper bound on the distinct states at any one DP level for `crit`,
/// saturating at `u128::MAX`.
///
/// * PROP, EQ: `(V+1)^n`
/// * PROP1, PROPx, EQ1, EQx: `(V+1)^n (m+1)^n`
/// * EF: `(2V+1)^{n(n-1)}`
/// * EF1, EFx: `(2V+1)^{n(n-1)} (m+1)^{n(n-1)}`
pub fn state_bound_per_level(inst: &Instance, crit: Criterion) -> u128 {
    let n = inst.num_agents();
    let v = inst.value_cap() as u128;
    let m1 = inst.num_items() as u128 + 1;
    let pairs = n * (n - 1);
    match crit {
        Criterion::Prop | Criterion::Eq => sat_pow(v + 1, n),
        Criterion::Prop1 | Criterion::Propx | Criterion::Eq1 | Criterion::Eqx => {
            sat_pow(v + 1, n).saturating_mul(sat_pow(m1, n))
        }
        Criterion::Ef => sat_pow(2 * v + 1, pairs),
        Criterion::Ef1 | Criterion::Efx => sat_pow(2 * v + 1, pairs).saturating_mul(sat_pow(m1, pairs)),
        Criterion::None => 1,
    }
}

/// Checks recorded state counts against [`state_bound_per_level`] for every
/// level, the `n^k` reachability bound, and `m` times the per-level bound
/// for the total.
pub fn within_bounds(inst: &Instance, crit: Criterion, stats: &SolveStats) -> bool {
    let per_level = state_bound_per_level(inst, crit);
    let n = inst.num_agents() as u128;
    let levels_ok = stats
        .states_per_level
        .iter()
        .enumerate()
        .all(|(k, &s)| (s as u128) <= per_level && (s as u128) <= sat_pow(n, k + 1));
    let total_ok = (stats.states_explored as u128) <= per_level.saturating_mul(inst.num_items() as u128);
    levels_ok && total_ok && stats.states_per_level.len() == inst.num_items()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    /// True iff some UM allocation satisfies the criterion.
    pub answer: bool,
    /// Unconstrained maximum welfare.
    pub w0: u64,
    /// Maximum welfare under the criterion; `None` if no fair allocation exists.
    pub w1: Option<u64>,
}

/// Decides whether a UM allocation satisfying `crit` exists by comparing the
/// unconstrained optimum with the constrained one.
///
/// With two agents and EF1/PROP1/EQ1 the answer comes from the
/// polynomial-time algorithm; the DP then runs only when `w1` is still
/// unknown (a "no" answer), and in debug builds it always runs to
/// cross-check.
pub fn decide_exists_um_and_fair(inst: &Instance, crit: Criterion) -> Result<Decision> {
    decide_exists_um_and_fair_with(inst, crit, &DpConfig::default())
}

pub fn decide_exists_um_and_fair_with(inst: &Instance, crit: Criterion, cfg: &DpConfig) -> Result<Decision> {
    if crit == Criterion::None {
        return Err(Error::Usage("decide needs a fairness criterion, not none".into()));
    }
    let (w0, _) = um_welfare(inst);
    let fast = inst.num_agents() == 2 && matches!(crit, Criterion::Ef1 | Criterion::Prop1 | Criterion::Eq1);
    if fast {
        let quick = exists_um_and_fair_2(inst, crit)?;
        let yes = quick.answer == Answer::Yes;
        if yes && !cfg!(debug_assertions) {
            return Ok(Decision {
                answer: true,
                w0,
                w1: Some(w0),
            });
        }
        let w1 = solve_um_within_with(inst, crit, cfg)?.optimum();
        debug_assert_eq!(yes, w1 == Some(w0), "two-agent algorithm disagrees with the DP");
        return Ok(Decision { answer: yes, w0, w1 });
    }
    let w1 = solve_um_within_with(inst, crit, cfg)?.optimum();
    Ok(Decision {
        answer: w1 == Some(w0),
        w0,
        w1,
    })
}
