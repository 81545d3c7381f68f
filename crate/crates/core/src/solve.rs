use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::model::Allocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Found,
    Infeasible,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// States (DP) or allocations (brute force) examined.
    pub states_explored: u64,
    /// Distinct states per DP level `1..=m`; empty for other engines.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states_per_level: Vec<u64>,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: Status,
    /// Present iff `status == Found`.
    pub allocation: Option<Allocation>,
    pub welfare: u64,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn found(allocation: Allocation, welfare: u64, stats: SolveStats) -> Self {
        SolveOutcome {
            status: Status::Found,
            allocation: Some(allocation),
            welfare,
            stats,
        }
    }

    pub fn infeasible(stats: SolveStats) -> Self {
        SolveOutcome {
            status: Status::Infeasible,
            allocation: None,
            welfare: 0,
            stats,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == Status::Found
    }

    /// Welfare when found, `None` when infeasible.
    pub fn optimum(&self) -> Option<u64> {
        self.is_found().then_some(self.welfare)
    }
}

/// Resource limits shared by every engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits::default()
    }

    pub fn with_timeout(timeout: Duration) -> Self {
        Limits {
            deadline: Instant::now().checked_add(timeout),
        }
    }

    pub(crate) fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

pub(crate) fn elapsed_ns(start: Instant) -> u64 {
    start.elapsed().as_nanos().min(u64::MAX as u128) as u64
}
