//! Mixed-integer formulations of UM within PROP, EF, PROP1 and EF1, for
//! export to external solvers.
//!
//! Variables:
//!
//! * `assigned_{a}_{o}` (binary): item `o` goes to agent `a`;
//! * `utility_{a}` (continuous, `>= 0`): agent `a`'s bundle value;
//! * PROP1: `nab_{a}_{o}` (binary) marks the best item not assigned to `a`,
//!   `vnab_{a}` (continuous, `>= 0`) its value;
//! * EF1: `nab_{i}_{j}_{o}` (binary) marks the best item of `j`'s bundle as
//!   seen by `i`, `vnab_{i}_{j}` (continuous, `>= 0`) its value, for each
//!   ordered pair `i != j`.
//!
//! Proportional shares are written multiplied through by `n`, so every
//! coefficient is an integer.

mod lp;

pub use lp::{to_lp_string, write_lp};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fairness::Criterion;
use crate::model::{Allocation, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// A sum of integer-weighted variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: Vec<(i64, String)>,
}

impl LinExpr {
    fn new() -> Self {
        LinExpr::default()
    }

    /// Adds `coeff * var`, dropping zero coefficients.
    fn add(&mut self, coeff: i64, var: impl Into<String>) -> &mut Self {
        if coeff != 0 {
            self.terms.push((coeff, var.into()));
        }
        self
    }

    fn eval(&self, point: &BTreeMap<String, i64>) -> Option<i128> {
        self.terms
            .iter()
            .map(|(c, v)| point.get(v).map(|&x| *c as i128 * x as i128))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    fn holds(&self, point: &BTreeMap<String, i64>) -> bool {
        let Some(lhs) = self.expr.eval(point) else {
            return false;
        };
        let rhs = self.rhs as i128;
        match self.sense {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }
}

/// A continuous variable with lower bound 0 and no upper bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Continuous {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpModel {
    pub name: String,
    /// Maximized.
    pub objective: LinExpr,
    pub constraints: Vec<Constraint>,
    pub binaries: Vec<String>,
    pub continuous: Vec<Continuous>,
}

impl MilpModel {
    pub fn num_variables(&self) -> usize {
        self.binaries.len() + self.continuous.len()
    }

    /// True iff `point` assigns every variable, respects bounds and
    /// integrality, and satisfies every constraint.
    pub fn is_satisfied_by(&self, point: &BTreeMap<String, i64>) -> bool {
        self.binaries
            .iter()
            .all(|b| matches!(point.get(b), Some(0 | 1)))
            && self.continuous.iter().all(|c| point.get(&c.name).is_some_and(|&x| x >= 0))
            && self.constraints.iter().all(|c| c.holds(point))
    }

    /// Whether the variables in `fixed` extend to a feasible point.
    ///
    /// Unfixed binaries are enumerated exhaustively. Each unfixed continuous
    /// variable is then pinned by an equality in which it is the only
    /// unknown, or else raised to the tightest upper bound implied by the
    /// constraints in which it is the only unknown (0 if none). This
    /// completion is exact for the models built here, where the auxiliary
    /// values only ever help the fairness rows. Intended for small models.
    pub fn extends_to_feasible(&self, fixed: &BTreeMap<String, i64>) -> bool {
        let free: Vec<&String> = self.binaries.iter().filter(|b| !fixed.contains_key(*b)).collect();
        assert!(free.len() < 24, "too many free binaries to enumerate");
        (0u32..1 << free.len()).any(|mask| {
            let mut point = fixed.clone();
            for (bit, name) in free.iter().enumerate() {
                point.insert((*name).clone(), ((mask >> bit) & 1) as i64);
            }
            self.complete_continuous(&mut point);
            self.is_satisfied_by(&point)
        })
    }

    fn complete_continuous(&self, point: &mut BTreeMap<String, i64>) {
        let sole_unknown = |c: &Constraint, point: &BTreeMap<String, i64>| -> Option<(i64, String, i128)> {
            let mut unknown = None;
            let mut known = 0i128;
            for (coeff, var) in &c.expr.terms {
                match point.get(var) {
                    Some(&x) => known += *coeff as i128 * x as i128,
                    None if unknown.is_none() => unknown = Some((*coeff, var.clone())),
                    None => return None,
                }
            }
            unknown.map(|(coeff, var)| (coeff, var, c.rhs as i128 - known))
        };
        for c in self.constraints.iter().filter(|c| c.sense == Sense::Eq) {
            if let Some((coeff, var, rest)) = sole_unknown(c, point) {
                if rest % coeff as i128 == 0 {
                    point.insert(var, (rest / coeff as i128) as i64);
                }
            }
        }
        for var in &self.continuous {
            if point.contains_key(&var.name) {
                continue;
            }
            let mut upper: Option<i128> = None;
            for c in &self.constraints {
                let Some((coeff, v, rest)) = sole_unknown(c, point) else {
                    continue;
                };
                if v != var.name {
                    continue;
                }
                let bound = match (c.sense, coeff > 0) {
                    (Sense::Le, true) => Some(rest.div_euclid(coeff as i128)),
                    (Sense::Ge, false) => Some((-rest).div_euclid(-coeff as i128)),
                    _ => None,
                };
                if let Some(b) = bound {
                    upper = Some(upper.map_or(b, |u| u.min(b)));
                }
            }
            let value = upper.unwrap_or(0).clamp(0, i64::MAX as i128) as i64;
            point.insert(var.name.clone(), value);
        }
    }
}

pub fn assigned(a: usize, o: usize) -> String {
    format!("assigned_{a}_{o}")
}

pub fn utility(a: usize) -> String {
    format!("utility_{a}")
}

/// The `assigned_*` indicator point of an allocation.
pub fn indicator_point(inst: &Instance, alloc: &Allocation) -> BTreeMap<String, i64> {
    let mut point = BTreeMap::new();
    for a in 0..inst.num_agents() {
        for o in 0..inst.num_items() {
            point.insert(assigned(a, o), (alloc.owner_of(o) == a) as i64);
        }
    }
    point
}

fn value(inst: &Instance, a: usize, o: usize) -> i64 {
    inst.value(a, o) as i64
}

/// Builds the UM-within-`crit` model for `crit` in {PROP, EF, PROP1, EF1}.
pub fn build_milp(inst: &Instance, crit: Criterion) -> Result<MilpModel> {
    if !matches!(crit, Criterion::Prop | Criterion::Ef | Criterion::Prop1 | Criterion::Ef1) {
        return Err(Error::Usage(format!(
            "no MILP formulation for {crit}; supported: prop, ef, prop1, ef1"
        )));
    }
    let n = inst.num_agents();
    let m = inst.num_items();
    let ni = n as i64;
    let mut constraints = Vec::new();
    let mut push = |name: String, expr: LinExpr, sense: Sense, rhs: i64| {
        constraints.push(Constraint { name, expr, sense, rhs });
    };

    let mut binaries: Vec<String> = (0..n).flat_map(|a| (0..m).map(move |o| assigned(a, o))).collect();
    let mut continuous: Vec<Continuous> = (0..n).map(|a| Continuous { name: utility(a) }).collect();

    let mut objective = LinExpr::new();
    for a in 0..n {
        objective.add(1, utility(a));
    }

    // (1) utility definition.
    for a in 0..n {
        let mut e = LinExpr::new();
        e.add(1, utility(a));
        for o in 0..m {
            e.add(-value(inst, a, o), assigned(a, o));
        }
        push(format!("util_{a}"), e, Sense::Eq, 0);
    }

    match crit {
        Criterion::Prop => {
            for a in 0..n {
                let mut e = LinExpr::new();
                e.add(ni, utility(a));
                push(format!("prop_{a}"), e, Sense::Ge, inst.total_value(a) as i64);
            }
        }
        Criterion::Ef => {
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    let mut e = LinExpr::new();
                    e.add(1, utility(i));
                    for o in 0..m {
                        e.add(-value(inst, i, o), assigned(j, o));
                    }
                    push(format!("envy_{i}_{j}"), e, Sense::Ge, 0);
                }
            }
        }
        Criterion::Prop1 => {
            let nab = |a: usize, o: usize| format!("nab_{a}_{o}");
            let vnab = |a: usize| format!("vnab_{a}");
            binaries.extend((0..n).flat_map(|a| (0..m).map(move |o| nab(a, o))));
            continuous.extend((0..n).map(|a| Continuous { name: vnab(a) }));
            for a in 0..n {
                for o in 0..m {
                    let mut e = LinExpr::new();
                    e.add(1, nab(a, o)).add(1, assigned(a, o));
                    push(format!("nab_free_{a}_{o}"), e, Sense::Le, 1);
                }
                let mut e = LinExpr::new();
                for o in 0..m {
                    e.add(1, nab(a, o));
                }
                push(format!("nab_one_{a}"), e, Sense::Le, 1);
                let mut e = LinExpr::new();
                e.add(1, vnab(a));
                for o in 0..m {
                    e.add(-value(inst, a, o), nab(a, o));
                }
                push(format!("vnab_cap_{a}"), e, Sense::Le, 0);
                let mut e = LinExpr::new();
                e.add(ni, utility(a)).add(ni, vnab(a));
                push(format!("prop1_{a}"), e, Sense::Ge, inst.total_value(a) as i64);
            }
        }
        Criterion::Ef1 => {
            let nab = |i: usize, j: usize, o: usize| format!("nab_{i}_{j}_{o}");
            let vnab = |i: usize, j: usize| format!("vnab_{i}_{j}");
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .collect();
            binaries.extend(pairs.iter().flat_map(|&(i, j)| (0..m).map(move |o| nab(i, j, o))));
            continuous.extend(pairs.iter().map(|&(i, j)| Continuous { name: vnab(i, j) }));
            for &(i, j) in &pairs {
                for o in 0..m {
                    let mut e = LinExpr::new();
                    e.add(1, nab(i, j, o)).add(1, assigned(i, o));
                    push(format!("nab_free_{i}_{j}_{o}"), e, Sense::Le, 1);
                    let mut e = LinExpr::new();
                    e.add(1, nab(i, j, o)).add(-1, assigned(j, o));
                    push(format!("nab_in_{i}_{j}_{o}"), e, Sense::Le, 0);
                }
                let mut e = LinExpr::new();
                for o in 0..m {
                    e.add(1, nab(i, j, o));
                }
                push(format!("nab_one_{i}_{j}"), e, Sense::Le, 1);
                let mut e = LinExpr::new();
                e.add(1, vnab(i, j));
                for o in 0..m {
                    e.add(-value(inst, i, o), nab(i, j, o));
                }
                push(format!("vnab_cap_{i}_{j}"), e, Sense::Le, 0);
                let mut e = LinExpr::new();
                e.add(1, utility(i)).add(1, vnab(i, j));
                for o in 0..m {
                    e.add(-value(inst, i, o), assigned(j, o));
                }
                push(format!("ef1_{i}_{j}"), e, Sense::Ge, 0);
            }
        }
        _ => unreachable!(),
    }

    // Every item goes to exactly one agent.
    for o in 0..m {
        let mut e = LinExpr::new();
        for a in 0..n {
            e.add(1, assigned(a, o));
        }
        push(format!("assign_{o}"), e, Sense::Eq, 1);
    }

    Ok(MilpModel {
        name: format!("um_within_{crit}"),
        objective,
        constraints,
        binaries,
        continuous,
    })
}

/// Closed-form `(variables, constraints)` of [`build_milp`] for `n` agents
/// and `m` items.
pub fn model_size(crit: Criterion, n: usize, m: usize) -> Option<(usize, usize)> {
    let pairs = n * (n - 1);
    let base_vars = n * m + n;
    let base_cons = n + m;
    Some(match crit {
        Criterion::Prop => (base_vars, base_cons + n),
        Criterion::Ef => (base_vars, base_cons + pairs),
        Criterion::Prop1 => (base_vars + n * m + n, base_cons + n * m + 3 * n),
        Criterion::Ef1 => (base_vars + pairs * m + pairs, base_cons + 2 * pairs * m + 3 * pairs),
        _ => return None,
    })
}
