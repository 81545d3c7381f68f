//! Instances, allocations and valuation arithmetic.
//!
//! An [`Instance`] is an `n x m` matrix of non-negative integer valuations.
//! All arithmetic is exact: per-agent totals are bounded at construction so
//! that `n * u_i(O)` fits in an `i64`, which is the widest intermediate any
//! fairness check or DP transition produces.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag written into every JSON document the crate emits.
pub const FORMAT_VERSION: u32 = 1;

/// Agent index.
pub type Agent = usize;
/// Item index.
pub type Item = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: Option<String>,
    valuations: Vec<Vec<u64>>,
    num_items: usize,
    totals: Vec<u64>,
    value_cap: u64,
}

impl Instance {
    pub fn new(valuations: Vec<Vec<u64>>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidInstance("at least one agent is required".into()));
        }
        let num_items = valuations[0].len();
        if let Some((i, row)) = valuations
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != num_items)
        {
            return Err(Error::InvalidInstance(format!(
                "agent {i} values {} items, agent 0 values {num_items}",
                row.len()
            )));
        }
        let n = valuations.len() as u128;
        let mut totals = Vec::with_capacity(valuations.len());
        for (i, row) in valuations.iter().enumerate() {
            let total: u128 = row.iter().map(|&v| v as u128).sum();
            if total * n > i64::MAX as u128 {
                return Err(Error::InvalidInstance(format!(
                    "agent {i}: n * total value = {} overflows 64-bit arithmetic",
                    total * n
                )));
            }
            totals.push(total as u64);
        }
        let value_cap = totals.iter().copied().max().unwrap_or(0);
        Ok(Instance {
            name: None,
            valuations,
            num_items,
            totals,
            value_cap,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// `V`: the largest row sum.
    pub fn value_cap(&self) -> u64 {
        self.value_cap
    }

    pub fn valuations(&self) -> &[Vec<u64>] {
        &self.valuations
    }

    /// `u_agent(item)`. Panics on out-of-range indices; use [`bundle_value`]
    /// for checked access.
    #[inline]
    pub fn value(&self, agent: Agent, item: Item) -> u64 {
        self.valuations[agent][item]
    }

    /// `u_agent(O)`.
    #[inline]
    pub fn total_value(&self, agent: Agent) -> u64 {
        self.totals[agent]
    }

    /// True when every agent weakly ranks the items in one common order.
    pub fn is_ordered(&self) -> bool {
        self.common_ranking().is_some()
    }

    /// A permutation of the items along which every agent's valuation is
    /// non-increasing, if one exists.
    pub fn common_ranking(&self) -> Option<Vec<Item>> {
        let mut order: Vec<Item> = (0..self.num_items).collect();
        let sum = |j: Item| -> u128 { self.valuations.iter().map(|row| row[j] as u128).sum() };
        order.sort_by(|&a, &b| sum(b).cmp(&sum(a)).then(a.cmp(&b)));
        let consistent = self
            .valuations
            .iter()
            .all(|row| order.windows(2).all(|w| row[w[0]] >= row[w[1]]));
        consistent.then_some(order)
    }

    fn check_agent(&self, agent: Agent) -> Result<()> {
        if agent >= self.num_agents() {
            return Err(Error::IndexOutOfRange {
                kind: "agent",
                index: agent,
                limit: self.num_agents(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            format: u32,
            #[serde(skip_serializing_if = "Option::is_none")]
            name: Option<&'a str>,
            valuations: &'a [Vec<u64>],
        }
        serde_json::to_string(&Doc {
            format: FORMAT_VERSION,
            name: self.name.as_deref(),
            valuations: &self.valuations,
        })
        .expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn read_from(mut reader: impl Read) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn write_to(&self, mut writer: impl Write) -> Result<()> {
        writeln!(writer, "{}", self.to_json())?;
        Ok(())
    }
}

#[derive(Deserialize)]
struct InstanceDoc {
    #[serde(default)]
    format: Option<u32>,
    #[serde(default)]
    name: Option<String>,
    valuations: Vec<Vec<u64>>,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        if let Some(v) = doc.format {
            if v != FORMAT_VERSION {
                return Err(Error::InvalidInstance(format!("unsupported format version {v}")));
            }
        }
        let inst = Instance::new(doc.valuations)?;
        Ok(match doc.name {
            Some(name) => inst.with_name(name),
            None => inst,
        })
    }
}

/// A complete allocation: `owner[j]` is the agent holding item `j`.
///
/// Completeness and disjointness hold by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation {
    owner: Vec<Agent>,
}

impl Allocation {
    pub fn new(owner: Vec<Agent>) -> Self {
        Allocation { owner }
    }

    /// Builds an allocation from explicit bundles, one per agent.
    pub fn from_bundles(num_items: usize, bundles: &[Vec<Item>]) -> Result<Self> {
        let mut owner = vec![usize::MAX; num_items];
        for (agent, bundle) in bundles.iter().enumerate() {
            for &item in bundle {
                let slot = owner.get_mut(item).ok_or(Error::IndexOutOfRange {
                    kind: "item",
                    index: item,
                    limit: num_items,
                })?;
                if *slot != usize::MAX {
                    return Err(Error::InvalidAllocation(format!(
                        "item {item} given to agents {} and {agent}",
                        *slot
                    )));
                }
                *slot = agent;
            }
        }
        if let Some(item) = owner.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidAllocation(format!("item {item} is unallocated")));
        }
        Ok(Allocation { owner })
    }

    pub fn owner(&self) -> &[Agent] {
        &self.owner
    }

    pub fn owner_of(&self, item: Item) -> Agent {
        self.owner[item]
    }

    pub fn num_items(&self) -> usize {
        self.owner.len()
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.owner.len() != inst.num_items() {
            return Err(Error::InvalidAllocation(format!(
                "allocation covers {} items, instance has {}",
                self.owner.len(),
                inst.num_items()
            )));
        }
        if let Some(&a) = self.owner.iter().find(|&&a| a >= inst.num_agents()) {
            return Err(Error::IndexOutOfRange {
                kind: "agent",
                index: a,
                limit: inst.num_agents(),
            });
        }
        Ok(())
    }

    pub fn bundle(&self, agent: Agent) -> Vec<Item> {
        self.owner
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == agent)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn bundles(&self, num_agents: usize) -> Vec<Vec<Item>> {
        let mut out = vec![Vec::new(); num_agents];
        for (j, &a) in self.owner.iter().enumerate() {
            out[a].push(j);
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            format: u32,
            owner: &'a [Agent],
        }
        serde_json::to_string(&Doc {
            format: FORMAT_VERSION,
            owner: &self.owner,
        })
        .expect("allocation serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            #[serde(default)]
            format: Option<u32>,
            owner: Vec<Agent>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        if let Some(v) = doc.format {
            if v != FORMAT_VERSION {
                return Err(Error::InvalidAllocation(format!("unsupported format version {v}")));
            }
        }
        Ok(Allocation { owner: doc.owner })
    }
}

/// `u_agent(bundle)`, additive over the items of `bundle`.
pub fn bundle_value(inst: &Instance, agent: Agent, bundle: &[Item]) -> Result<u64> {
    inst.check_agent(agent)?;
    let mut seen = vec![false; inst.num_items()];
    let mut total = 0u64;
    for &item in bundle {
        let flag = seen.get_mut(item).ok_or(Error::IndexOutOfRange {
            kind: "item",
            index: item,
            limit: inst.num_items(),
        })?;
        if *flag {
            return Err(Error::InvalidAllocation(format!("item {item} repeated in bundle")));
        }
        *flag = true;
        total += inst.value(agent, item);
    }
    Ok(total)
}

/// Per-agent utilities `u_i(p(i))`. The allocation must already be valid.
pub(crate) fn agent_utilities(inst: &Instance, alloc: &Allocation) -> Vec<u64> {
    let mut util = vec![0u64; inst.num_agents()];
    for (j, &a) in alloc.owner().iter().enumerate() {
        util[a] += inst.value(a, j);
    }
    util
}

/// Utilitarian welfare `sum_i u_i(p(i))`.
pub fn welfare(inst: &Instance, alloc: &Allocation) -> Result<u64> {
    alloc.validate(inst)?;
    Ok(agent_utilities(inst, alloc).iter().sum())
}

/// Maximum utilitarian welfare and a witness: every item goes to an agent
/// valuing it most, lowest index on ties.
pub fn um_welfare(inst: &Instance) -> (u64, Allocation) {
    let mut owner = Vec::with_capacity(inst.num_items());
    let mut total = 0;
    for j in 0..inst.num_items() {
        let mut best = 0;
        for a in 1..inst.num_agents() {
            if inst.value(a, j) > inst.value(best, j) {
                best = a;
            }
        }
        total += inst.value(best, j);
        owner.push(best);
    }
    (total, Allocation::new(owner))
}
