//! The nine fairness predicates.
//!
//! Proportionality thresholds are compared by cross-multiplication
//! (`n * value >= u_i(O)`), so every check is exact integer arithmetic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{agent_utilities, Allocation, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Ef,
    Ef1,
    Efx,
    Prop,
    Prop1,
    Propx,
    Eq,
    Eq1,
    Eqx,
    /// No fairness constraint: plain utilitarian maximization.
    None,
}

impl Criterion {
    /// Every real fairness notion, i.e. everything except `None`.
    pub const FAIR: [Criterion; 9] = [
        Criterion::Ef,
        Criterion::Ef1,
        Criterion::Efx,
        Criterion::Prop,
        Criterion::Prop1,
        Criterion::Propx,
        Criterion::Eq,
        Criterion::Eq1,
        Criterion::Eqx,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Ef => "ef",
            Criterion::Ef1 => "ef1",
            Criterion::Efx => "efx",
            Criterion::Prop => "prop",
            Criterion::Prop1 => "prop1",
            Criterion::Propx => "propx",
            Criterion::Eq => "eq",
            Criterion::Eq1 => "eq1",
            Criterion::Eqx => "eqx",
            Criterion::None => "none",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Criterion::FAIR
            .into_iter()
            .chain([Criterion::None])
            .find(|c| c.as_str() == lower)
            .ok_or_else(|| Error::Usage(format!("unknown fairness criterion '{s}'")))
    }
}

/// Exact evaluation of `crit` on `alloc`.
///
/// Quantifiers over an empty set hold vacuously, and the optional
/// "up to one item" bonus is 0 when there is no candidate item.
pub fn is_fair(inst: &Instance, alloc: &Allocation, crit: Criterion) -> Result<bool> {
    alloc.validate(inst)?;
    let own = agent_utilities(inst, alloc);
    Ok(match crit {
        Criterion::None => {
            return Err(Error::Usage("NONE is not a fairness criterion".into()));
        }
        Criterion::Ef | Criterion::Ef1 | Criterion::Efx => envy_check(inst, alloc, &own, crit),
        Criterion::Prop | Criterion::Prop1 | Criterion::Propx => {
            proportionality_check(inst, alloc, &own, crit)
        }
        Criterion::Eq | Criterion::Eq1 | Criterion::Eqx => equitability_check(inst, alloc, &own, crit),
    })
}

struct BundleView {
    value: u64,
    max_item: Option<u64>,
    min_item: Option<u64>,
}

/// `viewer`'s valuation of every bundle, plus the extreme single items in each.
fn bundles_seen_by(inst: &Instance, alloc: &Allocation, viewer: usize) -> Vec<BundleView> {
    let mut views: Vec<BundleView> = (0..inst.num_agents())
        .map(|_| BundleView {
            value: 0,
            max_item: None,
            min_item: None,
        })
        .collect();
    for (j, &owner) in alloc.owner().iter().enumerate() {
        let v = inst.value(viewer, j);
        let view = &mut views[owner];
        view.value += v;
        view.max_item = Some(view.max_item.map_or(v, |m| m.max(v)));
        view.min_item = Some(view.min_item.map_or(v, |m| m.min(v)));
    }
    views
}

fn envy_check(inst: &Instance, alloc: &Allocation, own: &[u64], crit: Criterion) -> bool {
    (0..inst.num_agents()).all(|i| {
        let views = bundles_seen_by(inst, alloc, i);
        views.iter().enumerate().all(|(j, other)| {
            if i == j {
                return true;
            }
            let mine = own[i] as u128;
            let theirs = other.value as u128;
            match crit {
                Criterion::Ef => mine >= theirs,
                Criterion::Ef1 => mine + other.max_item.unwrap_or(0) as u128 >= theirs,
                // Every single-item removal must clear the envy; the binding one is the cheapest.
                _ => other.min_item.is_none_or(|lo| mine + lo as u128 >= theirs),
            }
        })
    })
}

fn proportionality_check(inst: &Instance, alloc: &Allocation, own: &[u64], crit: Criterion) -> bool {
    let n = inst.num_agents() as u128;
    (0..inst.num_agents()).all(|i| {
        let total = inst.total_value(i) as u128;
        let unowned = alloc
            .owner()
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a != i)
            .map(|(j, _)| inst.value(i, j));
        let mine = own[i] as u128;
        match crit {
            Criterion::Prop => n * mine >= total,
            Criterion::Prop1 => {
                let bonus = unowned.max().unwrap_or(0) as u128;
                n * (mine + bonus) >= total
            }
            _ => unowned.min().is_none_or(|lo| n * (mine + lo as u128) >= total),
        }
    })
}

fn equitability_check(inst: &Instance, alloc: &Allocation, own: &[u64], crit: Criterion) -> bool {
    let n = inst.num_agents();
    let mut max_own: Vec<Option<u64>> = vec![None; n];
    let mut min_own: Vec<Option<u64>> = vec![None; n];
    for (j, &a) in alloc.owner().iter().enumerate() {
        let v = inst.value(a, j);
        max_own[a] = Some(max_own[a].map_or(v, |m| m.max(v)));
        min_own[a] = Some(min_own[a].map_or(v, |m| m.min(v)));
    }
    (0..n).all(|i| {
        (0..n).all(|j| {
            let mine = own[i] as u128;
            let theirs = own[j] as u128;
            match crit {
                Criterion::Eq => mine == theirs,
                Criterion::Eq1 => mine + max_own[j].unwrap_or(0) as u128 >= theirs,
                _ => min_own[j].is_none_or(|lo| mine + lo as u128 >= theirs),
            }
        })
    })
}
