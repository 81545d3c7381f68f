//! Polynomial-time decision for two agents: does some utilitarian-maximal
//! allocation satisfy EF1, PROP1 or EQ1?
//!
//! Items with a strict preference go to the agent valuing them more; that
//! step alone decides whether an allocation is UM. The tied items are then
//! handed out one at a time, always to the agent currently behind (envious
//! for EF1/PROP1, lower utility for EQ1), and the final allocation is
//! checked against the criterion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{is_fair, Criterion};
use crate::model::{Allocation, Instance, Item};

const ALICE: usize = 0;
const BOB: usize = 1;

/// Per-item preference gap between the two agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoAgentView {
    /// `u_B(o) - u_A(o)` per item.
    pub delta: Vec<i128>,
    /// Items valued equally by both agents, ascending.
    pub eq_items: Vec<Item>,
}

impl TwoAgentView {
    pub fn new(inst: &Instance) -> Result<Self> {
        require_two(inst)?;
        let delta: Vec<i128> = (0..inst.num_items())
            .map(|j| inst.value(BOB, j) as i128 - inst.value(ALICE, j) as i128)
            .collect();
        let eq_items = (0..inst.num_items()).filter(|&j| delta[j] == 0).collect();
        Ok(TwoAgentView { delta, eq_items })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoAgentResult {
    pub answer: Answer,
    /// UM and fair witness, present iff `answer == Yes`.
    pub allocation: Option<Allocation>,
}

fn require_two(inst: &Instance) -> Result<()> {
    if inst.num_agents() != 2 {
        return Err(Error::Usage(format!(
            "two-agent algorithm needs exactly 2 agents, got {}",
            inst.num_agents()
        )));
    }
    Ok(())
}

/// Decides whether a UM allocation satisfying `crit` exists, for
/// `crit` in {EF1, PROP1, EQ1}.
pub fn exists_um_and_fair_2(inst: &Instance, crit: Criterion) -> Result<TwoAgentResult> {
    run(inst, crit, |_| {})
}

/// Tracks the agents' partial bundles while tied items are handed out.
struct Partial {
    /// `values[i][k]`: agent `i`'s valuation of agent `k`'s current bundle.
    values: [[u64; 2]; 2],
}

impl Partial {
    fn give(&mut self, inst: &Instance, agent: usize, item: Item) {
        self.values[ALICE][agent] += inst.value(ALICE, item);
        self.values[BOB][agent] += inst.value(BOB, item);
    }

    fn envious(&self, agent: usize) -> bool {
        self.values[agent][agent] < self.values[agent][1 - agent]
    }

    fn own(&self, agent: usize) -> u64 {
        self.values[agent][agent]
    }
}

/// Core of [`exists_um_and_fair_2`]; `observe` sees the envy status
/// `(alice_envious, bob_envious)` before each tied item is placed.
fn run(
    inst: &Instance,
    crit: Criterion,
    mut observe: impl FnMut((bool, bool)),
) -> Result<TwoAgentResult> {
    if !matches!(crit, Criterion::Ef1 | Criterion::Prop1 | Criterion::Eq1) {
        return Err(Error::Usage(format!(
            "two-agent algorithm supports ef1, prop1, eq1; got {crit}"
        )));
    }
    let view = TwoAgentView::new(inst)?;
    let mut owner = vec![ALICE; inst.num_items()];
    let mut partial = Partial {
        values: [[0; 2]; 2],
    };
    for (j, &d) in view.delta.iter().enumerate() {
        if d != 0 {
            let agent = if d > 0 { BOB } else { ALICE };
            owner[j] = agent;
            partial.give(inst, agent, j);
        }
    }
    for &item in &view.eq_items {
        observe((partial.envious(ALICE), partial.envious(BOB)));
        let behind = match crit {
            Criterion::Eq1 => {
                if partial.own(BOB) < partial.own(ALICE) {
                    BOB
                } else {
                    ALICE
                }
            }
            _ => {
                if partial.envious(BOB) {
                    BOB
                } else {
                    ALICE
                }
            }
        };
        owner[item] = behind;
        partial.give(inst, behind, item);
    }
    let alloc = Allocation::new(owner);
    Ok(if is_fair(inst, &alloc, crit)? {
        TwoAgentResult {
            answer: Answer::Yes,
            allocation: Some(alloc),
        }
    } else {
        TwoAgentResult {
            answer: Answer::No,
            allocation: None,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{um_welfare, welfare};

    fn inst(a: &[u64], b: &[u64]) -> Instance {
        Instance::new(vec![a.to_vec(), b.to_vec()]).unwrap()
    }

    #[test]
    fn view_lists_tied_items() {
        let view = TwoAgentView::new(&inst(&[5, 2, 3, 3], &[3, 4, 3, 3])).unwrap();
        assert_eq!(view.delta, vec![-2, 2, 0, 0]);
        assert_eq!(view.eq_items, vec![2, 3]);
    }

    #[test]
    fn ef1_yes_with_split_ties() {
        let instance = inst(&[5, 2, 3, 3], &[3, 4, 3, 3]);
        let res = exists_um_and_fair_2(&instance, Criterion::Ef1).unwrap();
        assert_eq!(res.answer, Answer::Yes);
        let alloc = res.allocation.unwrap();
        assert_eq!(alloc.owner(), &[0, 1, 0, 1]);
        assert_eq!(welfare(&instance, &alloc).unwrap(), 15);
        assert_eq!(welfare(&instance, &alloc).unwrap(), um_welfare(&instance).0);
    }

    #[test]
    fn dominant_agent() {
        let instance = inst(&[5, 5], &[1, 1]);
        let res = exists_um_and_fair_2(&instance, Criterion::Ef1).unwrap();
        assert_eq!(res.answer, Answer::No);
        assert!(res.allocation.is_none());
        // PROP1 holds: Bob's share is 1, exactly one of Alice's items.
        let res = exists_um_and_fair_2(&instance, Criterion::Prop1).unwrap();
        assert_eq!(res.answer, Answer::Yes);
        assert_eq!(res.allocation.unwrap().owner(), &[0, 0]);
    }

    #[test]
    fn single_item_goes_to_higher_value() {
        let res = exists_um_and_fair_2(&inst(&[1], &[2]), Criterion::Ef1).unwrap();
        assert_eq!(res.answer, Answer::Yes);
        assert_eq!(res.allocation.unwrap().owner(), &[1]);
    }

    #[test]
    fn rejects_wrong_shape() {
        let three = Instance::new(vec![vec![1], vec![1], vec![1]]).unwrap();
        assert!(matches!(
            exists_um_and_fair_2(&three, Criterion::Ef1),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            exists_um_and_fair_2(&inst(&[1], &[1]), Criterion::Efx),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn eq1_ties_favour_lower_utility() {
        // All items tied: EQ1 alternates toward whoever is behind.
        let instance = inst(&[2, 2, 2], &[2, 2, 2]);
        let res = exists_um_and_fair_2(&instance, Criterion::Eq1).unwrap();
        assert_eq!(res.allocation.unwrap().owner(), &[0, 1, 0]);
    }

    #[test]
    fn at_most_one_agent_envious_during_tie_loop() {
        let instances = [
            inst(&[5, 2, 3, 3, 1, 1], &[3, 4, 3, 3, 1, 1]),
            inst(&[4, 1, 1, 1, 1, 1, 1], &[4, 1, 1, 1, 1, 1, 1]),
            inst(&[0, 9, 2, 2, 2], &[7, 0, 2, 2, 2]),
        ];
        for instance in &instances {
            for crit in [Criterion::Ef1, Criterion::Prop1, Criterion::Eq1] {
                run(instance, crit, |(a, b)| assert!(!(a && b))).unwrap();
            }
        }
    }
}
