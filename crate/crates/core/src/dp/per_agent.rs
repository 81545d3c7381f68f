//! DP over per-agent utilities, for the proportionality and equitability
//! families.
//!
//! Key layout: `[t_0 .. t_{n-1}, b_0 .. b_{n-1}]` where `t_i = u_i(p(i))`
//! and `b_i` is a tracked item (`m` encodes "none"). The `b` half is absent
//! for PROP and EQ.

use crate::fairness::Criterion;
use crate::model::Instance;

use super::table::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tracking {
    /// PROP, EQ.
    Nothing,
    /// PROP1: most valuable item given to agents other than `i`.
    MaxOutside,
    /// PROPx: least valuable item given to agents other than `i`.
    MinOutside,
    /// EQ1: most valuable item in `p(i)`.
    MaxOwn,
    /// EQx: least valuable item in `p(i)`.
    MinOwn,
}

pub(crate) struct PerAgent<'a> {
    inst: &'a Instance,
    crit: Criterion,
    tracking: Tracking,
    n: usize,
    none: u32,
}

impl<'a> PerAgent<'a> {
    pub(crate) fn new(inst: &'a Instance, crit: Criterion) -> Self {
        let tracking = match crit {
            Criterion::Prop | Criterion::Eq => Tracking::Nothing,
            Criterion::Prop1 => Tracking::MaxOutside,
            Criterion::Propx => Tracking::MinOutside,
            Criterion::Eq1 => Tracking::MaxOwn,
            Criterion::Eqx => Tracking::MinOwn,
            other => unreachable!("{other} is not a per-agent criterion"),
        };
        PerAgent {
            inst,
            crit,
            tracking,
            n: inst.num_agents(),
            none: inst.num_items() as u32,
        }
    }

    /// `u_i(b)` with `u_i(none) = 0`.
    fn tracked_value(&self, agent: usize, b: u32) -> u64 {
        if b == self.none {
            0
        } else {
            self.inst.value(agent, b as usize)
        }
    }
}

impl Scheme for PerAgent<'_> {
    fn width(&self) -> usize {
        match self.tracking {
            Tracking::Nothing => self.n,
            _ => 2 * self.n,
        }
    }

    fn initial(&self, out: &mut [u32]) {
        out[..self.n].fill(0);
        out[self.n..].fill(self.none);
    }

    fn step(&self, from: &[u32], item: usize, agent: usize, out: &mut [u32]) {
        out.copy_from_slice(from);
        out[agent] += self.inst.value(agent, item) as u32;
        if self.tracking == Tracking::Nothing {
            return;
        }
        for (i, slot) in out[self.n..].iter_mut().enumerate() {
            let relevant = match self.tracking {
                Tracking::MaxOutside | Tracking::MinOutside => i != agent,
                _ => i == agent,
            };
            if !relevant {
                continue;
            }
            let replace = *slot == self.none || {
                let new = self.inst.value(i, item);
                let old = self.inst.value(i, *slot as usize);
                match self.tracking {
                    Tracking::MaxOutside | Tracking::MaxOwn => new > old,
                    _ => new < old,
                }
            };
            if replace {
                *slot = item as u32;
            }
        }
    }

    fn feasible(&self, key: &[u32]) -> bool {
        let n = self.n as u128;
        let t = |i: usize| key[i] as u128;
        let bonus = |i: usize| -> u128 {
            match self.tracking {
                Tracking::Nothing => 0,
                _ => self.tracked_value(i, key[self.n + i]) as u128,
            }
        };
        match self.crit {
            Criterion::Prop | Criterion::Prop1 | Criterion::Propx => {
                (0..self.n).all(|i| n * (t(i) + bonus(i)) >= self.inst.total_value(i) as u128)
            }
            Criterion::Eq => (1..self.n).all(|i| t(i) == t(0)),
            // t_j >= t_i - u_i(b_i) for all i, j: the binding j is the poorest agent.
            _ => {
                let poorest = (0..self.n).map(t).min().unwrap_or(0);
                (0..self.n).all(|i| poorest + bonus(i) >= t(i))
            }
        }
    }

    fn objective(&self, key: &[u32]) -> i128 {
        key[..self.n].iter().map(|&t| t as i128).sum()
    }
}
