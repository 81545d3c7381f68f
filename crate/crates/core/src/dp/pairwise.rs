//! DP over pairwise envy differences, for EF, EF1 and EFx.
//!
//! Key layout: `[t_{i,j} + V for each ordered pair i != j, b ...]`, pairs in
//! row-major order. `t_{i,j} = u_i(p(i)) - u_i(p(j))` is stored with offset
//! `V` so it stays unsigned. The `b` section is one item per ordered pair
//! (the item of `p(j)` that `i` values most for EF1, least for EFx), or, on
//! instances whose agents share a common ranking, one item per agent: the
//! top- (EF1) or bottom-ranked (EFx) item of `p(j)`, which is extreme for
//! every viewer at once. `m` encodes "none". EF carries no `b` section.

use crate::fairness::Criterion;
use crate::model::Instance;

use super::table::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tracking {
    Nothing,
    /// EF1: item maximizing `u_i` in `p(j)`.
    Max,
    /// EFx: item minimizing `u_i` in `p(j)`.
    Min,
}

pub(crate) struct Pairwise<'a> {
    inst: &'a Instance,
    tracking: Tracking,
    n: usize,
    offset: i64,
    none: u32,
    /// Position of each item in the common ranking, when the fast path is on.
    rank: Option<Vec<usize>>,
}

impl<'a> Pairwise<'a> {
    pub(crate) fn new(inst: &'a Instance, crit: Criterion, use_common_ranking: bool) -> Self {
        let tracking = match crit {
            Criterion::Ef => Tracking::Nothing,
            Criterion::Ef1 => Tracking::Max,
            Criterion::Efx => Tracking::Min,
            other => unreachable!("{other} is not a pairwise criterion"),
        };
        let rank = (use_common_ranking && tracking != Tracking::Nothing)
            .then(|| inst.common_ranking())
            .flatten()
            .map(|order| {
                let mut rank = vec![0; order.len()];
                for (pos, &item) in order.iter().enumerate() {
                    rank[item] = pos;
                }
                rank
            });
        Pairwise {
            inst,
            tracking,
            n: inst.num_agents(),
            offset: inst.value_cap() as i64,
            none: inst.num_items() as u32,
            rank,
        }
    }

    pub(crate) fn uses_common_ranking(&self) -> bool {
        self.rank.is_some()
    }

    fn pairs(&self) -> usize {
        self.n * (self.n - 1)
    }

    /// Slot of ordered pair `(i, j)`, `i != j`.
    #[inline]
    fn pair(&self, i: usize, j: usize) -> usize {
        i * (self.n - 1) + if j > i { j - 1 } else { j }
    }

    /// Decodes `t_{i,j}` from its offset form.
    pub(crate) fn diff(&self, key: &[u32], i: usize, j: usize) -> i64 {
        key[self.pair(i, j)] as i64 - self.offset
    }

    fn b_slot(&self, i: usize, j: usize) -> usize {
        self.pairs() + if self.rank.is_some() { j } else { self.pair(i, j) }
    }

    /// `u_i(b_{i,j})` with `u_i(none) = 0`.
    fn bonus(&self, key: &[u32], i: usize, j: usize) -> i64 {
        match self.tracking {
            Tracking::Nothing => 0,
            _ => {
                let b = key[self.b_slot(i, j)];
                if b == self.none {
                    0
                } else {
                    self.inst.value(i, b as usize) as i64
                }
            }
        }
    }
}

impl Scheme for Pairwise<'_> {
    fn width(&self) -> usize {
        let refs = match (self.tracking, &self.rank) {
            (Tracking::Nothing, _) => 0,
            (_, Some(_)) => self.n,
            (_, None) => self.pairs(),
        };
        self.pairs() + refs
    }

    fn initial(&self, out: &mut [u32]) {
        let pairs = self.pairs();
        out[..pairs].fill(self.offset as u32);
        out[pairs..].fill(self.none);
    }

    fn step(&self, from: &[u32], item: usize, agent: usize, out: &mut [u32]) {
        out.copy_from_slice(from);
        let inst = self.inst;
        for j in (0..self.n).filter(|&j| j != agent) {
            // The receiver gains relative to everyone else.
            let slot = self.pair(agent, j);
            out[slot] += inst.value(agent, item) as u32;
            // Everyone else sees the receiver's bundle grow by their own value of it.
            let slot = self.pair(j, agent);
            out[slot] -= inst.value(j, item) as u32;
        }
        if self.tracking == Tracking::Nothing {
            return;
        }
        if let Some(rank) = &self.rank {
            let slot = self.pairs() + agent;
            let cur = out[slot];
            let replace = cur == self.none
                || match self.tracking {
                    Tracking::Max => rank[item] < rank[cur as usize],
                    _ => rank[item] > rank[cur as usize],
                };
            if replace {
                out[slot] = item as u32;
            }
            return;
        }
        for i in (0..self.n).filter(|&i| i != agent) {
            let slot = self.b_slot(i, agent);
            let cur = out[slot];
            let replace = cur == self.none || {
                let new = inst.value(i, item);
                let old = inst.value(i, cur as usize);
                match self.tracking {
                    Tracking::Max => new > old,
                    _ => new < old,
                }
            };
            if replace {
                out[slot] = item as u32;
            }
        }
    }

    fn feasible(&self, key: &[u32]) -> bool {
        (0..self.n).all(|i| {
            (0..self.n)
                .filter(|&j| j != i)
                .all(|j| self.diff(key, i, j) + self.bonus(key, i, j) >= 0)
        })
    }

    fn objective(&self, key: &[u32]) -> i128 {
        key[..self.pairs()]
            .iter()
            .map(|&t| t as i128 - self.offset as i128)
            .sum()
    }
}
