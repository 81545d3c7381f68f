//! Instance generators: Mallows rankings with Borda utilities, i.i.d.
//! uniform valuations, and the hardness-reduction constructions.

mod reduction;
mod rng;

pub use reduction::{gen_reduction, Reduction, ReductionKind};
pub use rng::{derive_seed, mix, SplitMix64};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MallowsConfig {
    pub n: usize,
    pub m: usize,
    /// Dispersion in `[0, 1]`: 0 pins every ranking to the reference,
    /// 1 is uniform over permutations.
    pub phi: f64,
    pub seed: u64,
}

/// Samples one ranking of `0..m` from the Mallows model centred on the
/// identity, by repeated insertion: item `i` is inserted `d` places from the
/// bottom of the current list with probability proportional to `phi^d`,
/// which adds exactly `d` inversions.
///
/// The result lists items from most to least preferred.
pub fn sample_mallows_ranking(m: usize, phi: f64, rng: &mut SplitMix64) -> Vec<usize> {
    let mut ranking: Vec<usize> = Vec::with_capacity(m);
    let mut weights: Vec<f64> = Vec::with_capacity(m);
    for item in 0..m {
        // weights[d] = phi^d for d in 0..=item; 0^0 = 1.
        weights.push(if item == 0 { 1.0 } else { weights[item - 1] * phi });
        let total: f64 = weights.iter().sum();
        let mut u = rng.unit_f64() * total;
        let mut depth = 0;
        while depth < item && u >= weights[depth] {
            u -= weights[depth];
            depth += 1;
        }
        ranking.insert(item - depth, item);
    }
    ranking
}

/// Kendall-tau distance of `ranking` from the identity (number of inversions).
pub fn kendall_tau_from_identity(ranking: &[usize]) -> usize {
    let mut count = 0;
    for a in 0..ranking.len() {
        for b in a + 1..ranking.len() {
            if ranking[a] > ranking[b] {
                count += 1;
            }
        }
    }
    count
}

/// Mallows rankings with Borda utilities `m-1, m-2, ..., 0` along each
/// agent's ranking. Agents draw from one stream seeded with `cfg.seed`,
/// agent 0 first.
pub fn gen_mallows_borda(cfg: &MallowsConfig) -> Result<Instance> {
    if !(0.0..=1.0).contains(&cfg.phi) {
        return Err(Error::Usage(format!("phi must lie in [0, 1], got {}", cfg.phi)));
    }
    if cfg.n == 0 {
        return Err(Error::Usage("at least one agent is required".into()));
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let rows = (0..cfg.n)
        .map(|_| {
            let ranking = sample_mallows_ranking(cfg.m, cfg.phi, &mut rng);
            let mut row = vec![0u64; cfg.m];
            for (pos, &item) in ranking.iter().enumerate() {
                row[item] = (cfg.m - 1 - pos) as u64;
            }
            row
        })
        .collect();
    Instance::new(rows)
}

/// I.i.d. valuations uniform on `[0, vmax]`, drawn row by row.
pub fn gen_uniform(n: usize, m: usize, vmax: u64, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Usage("at least one agent is required".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| if vmax == u64::MAX { rng.next_u64() } else { rng.below(vmax + 1) })
                .collect()
        })
        .collect();
    Instance::new(rows)
}
