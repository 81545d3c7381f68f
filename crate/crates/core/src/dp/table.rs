//! Level-by-level state expansion shared by the DP engines.
//!
//! A state is a fixed-width `u32` key. Level `k` holds every distinct key
//! reachable by allocating items `0..k`; each entry remembers its parent at
//! level `k - 1` and the agent that received item `k - 1`. Keys are only
//! needed while the next level is being built, so older levels keep just
//! their `(parent, agent)` columns for backtracking.

use std::hash::BuildHasher;
use std::time::Instant;

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::solve::{elapsed_ns, Limits, SolveOutcome, SolveStats};

/// The criterion-specific part of a DP: key layout, transition, and the
/// feasibility test and objective on final states.
pub(crate) trait Scheme {
    fn width(&self) -> usize;

    /// Writes the key of the empty allocation.
    fn initial(&self, out: &mut [u32]);

    /// Writes the successor of `from` when `item` goes to `agent`.
    fn step(&self, from: &[u32], item: usize, agent: usize, out: &mut [u32]);

    fn feasible(&self, key: &[u32]) -> bool;

    /// Quantity maximized over feasible final states; a strictly increasing
    /// function of utilitarian welfare.
    fn objective(&self, key: &[u32]) -> i128;
}

/// One level's backtracking columns.
#[derive(Debug, Default)]
pub(crate) struct Level {
    parent: Vec<u32>,
    agent: Vec<u16>,
}

/// The retained per-level tables plus the final level's keys.
#[derive(Debug)]
pub(crate) struct StateTable {
    width: usize,
    levels: Vec<Level>,
    final_keys: Vec<u32>,
}

impl StateTable {
    pub(crate) fn final_len(&self) -> usize {
        self.final_keys.len() / self.width.max(1)
    }

    pub(crate) fn final_key(&self, idx: usize) -> &[u32] {
        &self.final_keys[idx * self.width..(idx + 1) * self.width]
    }

    pub(crate) fn states_per_level(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.parent.len() as u64).collect()
    }

    /// Follows parent links from final state `idx` back to the root.
    pub(crate) fn backtrack(&self, idx: usize) -> Allocation {
        let mut owner = vec![0usize; self.levels.len()];
        let mut cur = idx;
        for (item, level) in self.levels.iter().enumerate().rev() {
            owner[item] = level.agent[cur] as usize;
            cur = level.parent[cur] as usize;
        }
        debug_assert_eq!(cur, 0);
        Allocation::new(owner)
    }
}

fn key_hash(key: &[u32]) -> u64 {
    FxBuildHasher.hash_one(key)
}

/// Builds all `m + 1` levels. Fails with [`Error::Timeout`] once the
/// deadline passes.
pub(crate) fn expand<S: Scheme>(scheme: &S, inst: &Instance, limits: &Limits) -> Result<StateTable> {
    if inst.num_agents() > u16::MAX as usize + 1 {
        return Err(Error::InvalidInstance("too many agents for the DP".into()));
    }
    let w = scheme.width();
    let mut current = vec![0u32; w];
    scheme.initial(&mut current);
    let mut levels = Vec::with_capacity(inst.num_items());
    let mut scratch = vec![0u32; w];
    let mut work = 0u64;

    for item in 0..inst.num_items() {
        let parents = current.len() / w.max(1);
        let parents = if w == 0 { 1 } else { parents };
        let mut next: Vec<u32> = Vec::with_capacity(current.len());
        let mut table: HashTable<u32> = HashTable::with_capacity(parents);
        let mut level = Level::default();
        for p in 0..parents {
            let from = &current[p * w..(p + 1) * w];
            for agent in 0..inst.num_agents() {
                work += 1;
                if work.is_multiple_of(1024) && limits.expired() {
                    return Err(Error::Timeout);
                }
                scheme.step(from, item, agent, &mut scratch);
                let hash = key_hash(&scratch);
                let exists = table
                    .find(hash, |&i| &next[i as usize * w..(i as usize + 1) * w] == scratch.as_slice())
                    .is_some();
                if exists {
                    continue;
                }
                let idx = u32::try_from(level.parent.len())
                    .map_err(|_| Error::InvalidInstance("DP level exceeds 2^32 states".into()))?;
                next.extend_from_slice(&scratch);
                level.parent.push(p as u32);
                level.agent.push(agent as u16);
                table.insert_unique(hash, idx, |&i| {
                    key_hash(&next[i as usize * w..(i as usize + 1) * w])
                });
                if w == 0 {
                    // A zero-width key has exactly one state per level.
                    break;
                }
            }
        }
        levels.push(level);
        current = next;
    }
    Ok(StateTable {
        width: w,
        levels,
        final_keys: current,
    })
}

/// Runs the whole DP: expansion, selection of the best feasible final state
/// (ties to the lexicographically smallest key), backtracking, and a replay
/// check that the recovered allocation reproduces the selected key.
pub(crate) fn solve<S: Scheme>(scheme: &S, inst: &Instance, limits: &Limits) -> Result<SolveOutcome> {
    let start = Instant::now();
    let table = expand(scheme, inst, limits)?;
    let states_per_level = table.states_per_level();
    let mut stats = SolveStats {
        states_explored: states_per_level.iter().sum(),
        states_per_level,
        elapsed_ns: 0,
    };

    let mut best: Option<(i128, usize)> = None;
    let finals = if scheme.width() == 0 { 1 } else { table.final_len() };
    for idx in 0..finals {
        let key = table.final_key(idx);
        if !scheme.feasible(key) {
            continue;
        }
        let value = scheme.objective(key);
        let better = match best {
            None => true,
            Some((bv, bi)) => value > bv || (value == bv && key < table.final_key(bi)),
        };
        if better {
            best = Some((value, idx));
        }
    }

    let Some((_, idx)) = best else {
        stats.elapsed_ns = elapsed_ns(start);
        return Ok(SolveOutcome::infeasible(stats));
    };
    let alloc = table.backtrack(idx);
    let replayed = replay(scheme, &alloc);
    assert_eq!(
        replayed.as_slice(),
        table.final_key(idx),
        "backtracked allocation does not reproduce its final state"
    );
    let welfare = crate::model::welfare(inst, &alloc)?;
    stats.elapsed_ns = elapsed_ns(start);
    Ok(SolveOutcome::found(alloc, welfare, stats))
}

/// Applies the scheme's transitions along `alloc` from the initial state.
pub(crate) fn replay<S: Scheme>(scheme: &S, alloc: &Allocation) -> Vec<u32> {
    let w = scheme.width();
    let mut key = vec![0u32; w];
    scheme.initial(&mut key);
    let mut next = vec![0u32; w];
    for (item, &agent) in alloc.owner().iter().enumerate() {
        scheme.step(&key, item, agent, &mut next);
        std::mem::swap(&mut key, &mut next);
    }
    key
}
