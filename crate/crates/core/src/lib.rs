//! Utilitarian-maximal allocation of indivisible goods under fairness
//! constraints.
//!
//! The crate decides whether some welfare-maximizing allocation is also
//! fair, and finds the best fair allocation when none is, for envy-freeness,
//! proportionality and equitability and their "up to one item" / "up to any
//! item" relaxations.

pub mod bench;
pub mod dp;
pub mod error;
pub mod fairness;
pub mod gen;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod solve;
pub mod two_agent;

pub use dp::{decide_exists_um_and_fair, solve_um_within, Decision, DpConfig};
pub use error::{Error, Result};
pub use fairness::{is_fair, Criterion};
pub use model::{bundle_value, um_welfare, welfare, Allocation, Instance};
pub use oracle::{brute_force_decide, brute_force_um_within};
pub use solve::{Limits, SolveOutcome, SolveStats, Status};
pub use two_agent::exists_um_and_fair_2;
