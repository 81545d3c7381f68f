//! Valuation tables from the hardness reductions.
//!
//! Each construction maps a number-problem instance (Partition, 3-Partition
//! or Knapsack) to an allocation instance whose UM-and-fair status encodes
//! the answer. Number items come first, extra items after them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    /// Partition -> three agents, EF1 (4 extra items).
    PartitionEf1,
    /// Partition -> three agents, PROP1 (6 extra items).
    PartitionProp1,
    /// Partition -> two agents, EFx (2 extra items).
    PartitionEfx,
    /// 3-Partition -> `k+1` agents, EF1 (`3k+2` items).
    ThreePartitionEf1,
    /// 3-Partition -> `k+1` agents, PROP1 (`4k+2` items).
    ThreePartitionProp1,
    /// Knapsack -> two agents, UM within PROP1.
    KnapsackProp1,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 6] = [
        ReductionKind::PartitionEf1,
        ReductionKind::PartitionProp1,
        ReductionKind::PartitionEfx,
        ReductionKind::ThreePartitionEf1,
        ReductionKind::ThreePartitionProp1,
        ReductionKind::KnapsackProp1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionKind::PartitionEf1 => "partition-ef1",
            ReductionKind::PartitionProp1 => "partition-prop1",
            ReductionKind::PartitionEfx => "partition-efx",
            ReductionKind::ThreePartitionEf1 => "3partition-ef1",
            ReductionKind::ThreePartitionProp1 => "3partition-prop1",
            ReductionKind::KnapsackProp1 => "knapsack-prop1",
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReductionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        ReductionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| Error::Usage(format!("unknown reduction kind '{s}'")))
    }
}

/// A reduction together with its number-problem payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    PartitionEf1 { numbers: Vec<u64> },
    PartitionProp1 { numbers: Vec<u64> },
    PartitionEfx { numbers: Vec<u64> },
    ThreePartitionEf1 { numbers: Vec<u64>, target: u64 },
    ThreePartitionProp1 { numbers: Vec<u64>, target: u64 },
    /// `items` are `(value, weight)` pairs; `capacity` is the weight limit.
    KnapsackProp1 { items: Vec<(u64, u64)>, capacity: u64 },
}

impl Reduction {
    /// Builds a reduction from a flat payload. Knapsack payloads are
    /// `v1,w1,v2,w2,...`; the 3-Partition and Knapsack kinds need `target`.
    pub fn from_payload(kind: ReductionKind, payload: &[u64], target: Option<u64>) -> Result<Self> {
        let need_target = || {
            target.ok_or_else(|| Error::InvalidPayload(format!("{kind} needs a target value")))
        };
        let numbers = payload.to_vec();
        Ok(match kind {
            ReductionKind::PartitionEf1 => Reduction::PartitionEf1 { numbers },
            ReductionKind::PartitionProp1 => Reduction::PartitionProp1 { numbers },
            ReductionKind::PartitionEfx => Reduction::PartitionEfx { numbers },
            ReductionKind::ThreePartitionEf1 => Reduction::ThreePartitionEf1 {
                numbers,
                target: need_target()?,
            },
            ReductionKind::ThreePartitionProp1 => Reduction::ThreePartitionProp1 {
                numbers,
                target: need_target()?,
            },
            ReductionKind::KnapsackProp1 => {
                if !payload.len().is_multiple_of(2) {
                    return Err(Error::InvalidPayload(
                        "knapsack payload must be value,weight pairs".into(),
                    ));
                }
                Reduction::KnapsackProp1 {
                    items: payload.chunks(2).map(|c| (c[0], c[1])).collect(),
                    capacity: need_target()?,
                }
            }
        })
    }
}

fn checked_sum(xs: impl IntoIterator<Item = u64>) -> Result<u64> {
    xs.into_iter()
        .try_fold(0u64, |acc, x| acc.checked_add(x))
        .ok_or_else(|| Error::InvalidPayload("payload sum overflows".into()))
}

/// Half the sum of a Partition payload; the sum must be even.
fn half_sum(numbers: &[u64]) -> Result<u64> {
    let total = checked_sum(numbers.iter().copied())?;
    if total % 2 != 0 {
        return Err(Error::InvalidPayload(format!(
            "Partition payload must sum to an even 2W, got {total}"
        )));
    }
    Ok(total / 2)
}

/// Checks `|numbers| = 3k`, `T/4 < a_j < T/2` and `sum = kT`; returns `k`.
fn three_partition_groups(numbers: &[u64], target: u64) -> Result<u64> {
    if numbers.is_empty() || !numbers.len().is_multiple_of(3) {
        return Err(Error::InvalidPayload(format!(
            "3-Partition needs 3k numbers with k >= 1, got {}",
            numbers.len()
        )));
    }
    for &a in numbers {
        let t = target as u128;
        let a = a as u128;
        if 4 * a <= t {
            return Err(Error::InvalidPayload(format!("a_j = {a} violates T/4 < a_j (T = {target})")));
        }
        if 2 * a >= t {
            return Err(Error::InvalidPayload(format!("a_j = {a} violates a_j < T/2 (T = {target})")));
        }
    }
    let k = (numbers.len() / 3) as u64;
    let total = checked_sum(numbers.iter().copied())?;
    if total as u128 != k as u128 * target as u128 {
        return Err(Error::InvalidPayload(format!(
            "3-Partition numbers sum to {total}, expected k*T = {}",
            k as u128 * target as u128
        )));
    }
    Ok(k)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn scaled(rows: Vec<Vec<u128>>) -> Result<Instance> {
    let rows = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| u64::try_from(v).map_err(|_| Error::InvalidPayload("valuation overflows".into())))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(rows).map_err(|e| Error::InvalidPayload(e.to_string()))
}

/// Emits the valuation table of the given reduction.
///
/// Where a table entry is fractional (the agent-`k+1` values of the
/// 3-Partition constructions), every valuation is multiplied by the
/// smallest factor making all entries integral; a common positive scale
/// changes neither which allocations are UM nor which are fair.
pub fn gen_reduction(spec: &Reduction) -> Result<Instance> {
    match spec {
        Reduction::PartitionEf1 { numbers } => {
            let w = half_sum(numbers)? as u128;
            let alice = numbers.iter().map(|_| 0).chain([w, 2 * w, 6 * w, 7 * w]).collect();
            let other: Vec<u128> = numbers
                .iter()
                .map(|&a| a as u128)
                .chain([3 * w, 3 * w, 4 * w, 4 * w])
                .collect();
            scaled(vec![alice, other.clone(), other])
        }
        Reduction::PartitionProp1 { numbers } => {
            let w = half_sum(numbers)? as u128;
            let alice = numbers
                .iter()
                .map(|_| 0)
                .chain([2 * w, 2 * w, 5 * w, 5 * w, 5 * w, 5 * w])
                .collect();
            let other: Vec<u128> = numbers
                .iter()
                .map(|&a| a as u128)
                .chain([3 * w, 3 * w, 4 * w, 4 * w, 4 * w, 4 * w])
                .collect();
            scaled(vec![alice, other.clone(), other])
        }
        Reduction::PartitionEfx { numbers } => {
            half_sum(numbers)?;
            let tens: Vec<u128> = numbers.iter().map(|&a| 10 * a as u128).collect();
            let alice = tens.iter().copied().chain([2, 1]).collect();
            let bob = tens.iter().copied().chain([1, 2]).collect();
            scaled(vec![alice, bob])
        }
        Reduction::ThreePartitionEf1 { numbers, target } => {
            let k = three_partition_groups(numbers, *target)? as u128;
            let t = *target as u128;
            // Agent k+1 values each extra item at (k/2 + 1) T = (k + 2) T / 2.
            let scale = if ((k + 2) * t).is_multiple_of(2) { 1 } else { 2 };
            let big = (k + 2) * t * scale / 2;
            let mut rows: Vec<Vec<u128>> = (0..k)
                .map(|_| {
                    numbers
                        .iter()
                        .map(|&a| a as u128 * scale)
                        .chain([t * scale, t * scale])
                        .collect()
                })
                .collect();
            rows.push(numbers.iter().map(|_| 0).chain([big, big]).collect());
            scaled(rows)
        }
        Reduction::ThreePartitionProp1 { numbers, target } => {
            let k = three_partition_groups(numbers, *target)? as u128;
            let t = *target as u128;
            // Agent k+1 values each of the k+2 extra items at (1 + k/(k+2)) T.
            let num = (2 * k + 2) * t;
            let scale = (k + 2) / gcd(num, k + 2);
            let big = num * scale / (k + 2);
            let extras = (k + 2) as usize;
            let mut rows: Vec<Vec<u128>> = (0..k)
                .map(|_| {
                    numbers
                        .iter()
                        .map(|&a| a as u128 * scale)
                        .chain(std::iter::repeat_n(t * scale, extras))
                        .collect()
                })
                .collect();
            rows.push(
                numbers
                    .iter()
                    .map(|_| 0)
                    .chain(std::iter::repeat_n(big, extras))
                    .collect(),
            );
            scaled(rows)
        }
        Reduction::KnapsackProp1 { items, capacity } => {
            if items.is_empty() {
                return Err(Error::InvalidPayload("knapsack needs at least one element".into()));
            }
            let cap = *capacity as u128;
            let total_w: u128 = items.iter().map(|&(_, w)| w as u128).sum();
            let total_v: u128 = items.iter().map(|&(v, _)| v as u128).sum();
            let w_star = items.iter().map(|&(_, w)| w as u128).max().unwrap_or(0);
            let alice_usual = items.iter().map(|&(_, w)| w as u128);
            let bob_usual = items.iter().map(|&(v, w)| (v + w) as u128);
            let (alice_big, bob_big): (Vec<u128>, Vec<u128>) = if 2 * cap >= total_w {
                (
                    vec![2 * cap - total_w + w_star, w_star],
                    vec![2 * cap + total_v + w_star, total_w + total_v + w_star],
                )
            } else {
                let base = total_w - 2 * cap;
                let alice = vec![base + 2 * w_star, base + w_star, base + w_star];
                let bob = alice.iter().map(|&x| x + total_v).collect();
                (alice, bob)
            };
            scaled(vec![
                alice_usual.chain(alice_big).collect(),
                bob_usual.chain(bob_big).collect(),
            ])
        }
    }
}
