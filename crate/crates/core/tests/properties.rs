use fairdiv::dp::{solve_um_within_with, DpConfig};
use fairdiv::gen::{
    gen_reduction, kendall_tau_from_identity, sample_mallows_ranking, Reduction, ReductionKind, SplitMix64,
};
use fairdiv::{
    brute_force_decide, brute_force_um_within, decide_exists_um_and_fair, exists_um_and_fair_2, is_fair,
    um_welfare, welfare, Allocation, Criterion, Instance, Status,
};
use proptest::prelude::*;

fn instance(max_n: usize, max_m: usize, vmax: u64) -> impl Strategy<Value = Instance> {
    (1..=max_n, 0..=max_m).prop_flat_map(move |(n, m)| {
        prop::collection::vec(prop::collection::vec(0..=vmax, m), n).prop_map(|rows| Instance::new(rows).unwrap())
    })
}

fn with_allocation(max_n: usize, max_m: usize, vmax: u64) -> impl Strategy<Value = (Instance, Allocation)> {
    instance(max_n, max_m, vmax).prop_flat_map(|inst| {
        let (n, m) = (inst.num_agents(), inst.num_items());
        (Just(inst), prop::collection::vec(0..n, m).prop_map(Allocation::new))
    })
}

/// Ordered instances: every row non-increasing.
fn ordered_instance() -> impl Strategy<Value = Instance> {
    instance(3, 5, 6).prop_map(|inst| {
        let rows = inst
            .valuations()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.sort_unstable_by(|a, b| b.cmp(a));
                r
            })
            .collect();
        Instance::new(rows).unwrap()
    })
}

/// Fairness read straight off the definitions, with explicit bundles and
/// item removals/additions.
mod literal {
    use super::*;

    fn value(inst: &Instance, agent: usize, items: &[usize]) -> u64 {
        items.iter().map(|&o| inst.value(agent, o)).sum()
    }

    fn without(items: &[usize], g: usize) -> Vec<usize> {
        items.iter().copied().filter(|&o| o != g).collect()
    }

    fn with(items: &[usize], g: usize) -> Vec<usize> {
        let mut v = items.to_vec();
        v.push(g);
        v
    }

    pub fn fair(inst: &Instance, alloc: &Allocation, crit: Criterion) -> bool {
        let n = inst.num_agents();
        let m = inst.num_items();
        let bundles = alloc.bundles(n);
        let all: Vec<usize> = (0..m).collect();
        let pairs = || (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
        // Proportionality: n * value >= u_i(O) is the exact form of value >= u_i(O) / n.
        let share_ok = |i: usize, items: &[usize]| n as u64 * value(inst, i, items) >= value(inst, i, &all);
        let outside = |i: usize| all.iter().copied().filter(|o| !bundles[i].contains(o)).collect::<Vec<_>>();
        match crit {
            Criterion::Ef => pairs().all(|(i, j)| value(inst, i, &bundles[i]) >= value(inst, i, &bundles[j])),
            Criterion::Ef1 => pairs().all(|(i, j)| {
                value(inst, i, &bundles[i]) >= value(inst, i, &bundles[j])
                    || bundles[j]
                        .iter()
                        .any(|&g| value(inst, i, &bundles[i]) >= value(inst, i, &without(&bundles[j], g)))
            }),
            Criterion::Efx => pairs().all(|(i, j)| {
                bundles[j]
                    .iter()
                    .all(|&g| value(inst, i, &bundles[i]) >= value(inst, i, &without(&bundles[j], g)))
            }),
            Criterion::Prop => (0..n).all(|i| share_ok(i, &bundles[i])),
            Criterion::Prop1 => (0..n).all(|i| {
                share_ok(i, &bundles[i]) || outside(i).into_iter().any(|g| share_ok(i, &with(&bundles[i], g)))
            }),
            Criterion::Propx => (0..n).all(|i| outside(i).into_iter().all(|g| share_ok(i, &with(&bundles[i], g)))),
            Criterion::Eq => pairs().all(|(i, j)| value(inst, i, &bundles[i]) == value(inst, j, &bundles[j])),
            Criterion::Eq1 => pairs().all(|(i, j)| {
                value(inst, i, &bundles[i]) >= value(inst, j, &bundles[j])
                    || bundles[j]
                        .iter()
                        .any(|&g| value(inst, i, &bundles[i]) >= value(inst, j, &without(&bundles[j], g)))
            }),
            Criterion::Eqx => pairs().all(|(i, j)| {
                bundles[j]
                    .iter()
                    .all(|&g| value(inst, i, &bundles[i]) >= value(inst, j, &without(&bundles[j], g)))
            }),
            Criterion::None => true,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn predicates_match_literal_definitions((inst, alloc) in with_allocation(4, 6, 5)) {
        for crit in Criterion::FAIR {
            prop_assert_eq!(is_fair(&inst, &alloc, crit).unwrap(), literal::fair(&inst, &alloc, crit), "{}", crit);
        }
    }

    #[test]
    fn implications_hold((inst, alloc) in with_allocation(4, 7, 10)) {
        let f = |c| is_fair(&inst, &alloc, c).unwrap();
        prop_assert!(!f(Criterion::Ef) || f(Criterion::Efx));
        prop_assert!(!f(Criterion::Efx) || f(Criterion::Ef1));
        prop_assert!(!f(Criterion::Ef1) || f(Criterion::Prop1));
        prop_assert!(!f(Criterion::Prop) || f(Criterion::Propx));
        prop_assert!(!f(Criterion::Propx) || f(Criterion::Prop1));
        prop_assert!(!f(Criterion::Eq) || f(Criterion::Eqx));
        prop_assert!(!f(Criterion::Eqx) || f(Criterion::Eq1));
    }

    #[test]
    fn welfare_never_exceeds_um((inst, alloc) in with_allocation(4, 7, 20)) {
        prop_assert!(welfare(&inst, &alloc).unwrap() <= um_welfare(&inst).0);
    }

    #[test]
    fn dp_matches_oracle(inst in instance(3, 5, 8)) {
        for crit in Criterion::FAIR.into_iter().chain([Criterion::None]) {
            let dp = solve_um_within_with(&inst, crit, &DpConfig::default()).unwrap();
            let bf = brute_force_um_within(&inst, crit).unwrap();
            prop_assert_eq!(dp.status, bf.status, "{}", crit);
            prop_assert_eq!(dp.optimum(), bf.optimum(), "{}", crit);
            if let Some(alloc) = &dp.allocation {
                prop_assert!(crit == Criterion::None || is_fair(&inst, alloc, crit).unwrap());
                prop_assert_eq!(welfare(&inst, alloc).unwrap(), dp.welfare);
            }
        }
    }

    #[test]
    fn optima_respect_the_implication_order(inst in instance(3, 5, 8)) {
        let opt = |c| solve_um_within_with(&inst, c, &DpConfig::default()).unwrap().optimum();
        let w0 = Some(um_welfare(&inst).0);
        // None sorts below every Some, matching "infeasible is worst".
        prop_assert!(opt(Criterion::Ef) <= opt(Criterion::Efx));
        prop_assert!(opt(Criterion::Efx) <= opt(Criterion::Ef1));
        prop_assert!(opt(Criterion::Ef1) <= opt(Criterion::Prop1));
        prop_assert!(opt(Criterion::Prop) <= opt(Criterion::Propx));
        prop_assert!(opt(Criterion::Propx) <= opt(Criterion::Prop1));
        prop_assert!(opt(Criterion::Eq) <= opt(Criterion::Eqx));
        prop_assert!(opt(Criterion::Eqx) <= opt(Criterion::Eq1));
        prop_assert!(opt(Criterion::Prop1) <= w0 && opt(Criterion::Eq1) <= w0);
    }

    #[test]
    fn ef1_and_prop1_are_always_feasible(inst in instance(4, 6, 10)) {
        for crit in [Criterion::Ef1, Criterion::Prop1] {
            let out = solve_um_within_with(&inst, crit, &DpConfig::default()).unwrap();
            prop_assert_eq!(out.status, Status::Found, "{}", crit);
        }
    }

    #[test]
    fn common_ranking_shortcut_is_exact(inst in ordered_instance()) {
        let off = DpConfig { common_ranking_fast_path: false, ..DpConfig::default() };
        for crit in [Criterion::Ef1, Criterion::Efx] {
            let fast = solve_um_within_with(&inst, crit, &DpConfig::default()).unwrap();
            let slow = solve_um_within_with(&inst, crit, &off).unwrap();
            prop_assert_eq!(fast.optimum(), slow.optimum(), "{}", crit);
        }
    }

    #[test]
    fn two_agent_algorithm_matches_oracle(
        rows in (0usize..=9).prop_flat_map(|m| prop::collection::vec(prop::collection::vec(0u64..=4, m), 2))
    ) {
        let inst = Instance::new(rows).unwrap();
        for crit in [Criterion::Ef1, Criterion::Prop1, Criterion::Eq1] {
            let fast = exists_um_and_fair_2(&inst, crit).unwrap();
            let yes = fast.answer == fairdiv::two_agent::Answer::Yes;
            prop_assert_eq!(yes, brute_force_decide(&inst, crit).unwrap(), "{}", crit);
            if let Some(alloc) = fast.allocation {
                prop_assert!(is_fair(&inst, &alloc, crit).unwrap());
                prop_assert_eq!(welfare(&inst, &alloc).unwrap(), um_welfare(&inst).0);
            }
        }
    }

    #[test]
    fn partition_reductions_decide_subset_sum(numbers in prop::collection::vec(1u64..=12, 1..=7)) {
        let total: u64 = numbers.iter().sum();
        prop_assume!(total.is_multiple_of(2));
        let split = (0u32..1 << numbers.len()).any(|mask| {
            2 * (0..numbers.len()).filter(|&i| mask >> i & 1 == 1).map(|i| numbers[i]).sum::<u64>() == total
        });
        for (kind, crit) in [(ReductionKind::PartitionEf1, Criterion::Ef1), (ReductionKind::PartitionProp1, Criterion::Prop1)] {
            let inst = gen_reduction(&Reduction::from_payload(kind, &numbers, None).unwrap()).unwrap();
            prop_assert_eq!(decide_exists_um_and_fair(&inst, crit).unwrap().answer, split, "{}", kind);
        }
    }

    #[test]
    fn json_round_trips((inst, alloc) in with_allocation(4, 6, 1000)) {
        prop_assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
        prop_assert_eq!(Allocation::from_json(&alloc.to_json()).unwrap(), alloc);
    }
}

/// Pearson statistic of `observed` against probabilities `expected`.
fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn mallows_distance_distribution_fits() {
    // m = 3: inversion counts 0..=3 occur for 1, 2, 2, 1 permutations, so
    // P(d) is proportional to that count times phi^d. Critical value of
    // chi-square with 3 degrees of freedom at 1e-3 is 16.27.
    for phi in [0.3, 0.5, 0.8] {
        let weights: Vec<f64> = [1.0, 2.0, 2.0, 1.0]
            .iter()
            .enumerate()
            .map(|(d, c)| c * f64::powi(phi, d as i32))
            .collect();
        let z: f64 = weights.iter().sum();
        let expected: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let mut rng = SplitMix64::new(2024);
        let mut observed = [0u64; 4];
        for _ in 0..100_000 {
            observed[kendall_tau_from_identity(&sample_mallows_ranking(3, phi, &mut rng))] += 1;
        }
        let stat = chi_square(&observed, &expected);
        assert!(stat < 16.27, "phi={phi}: chi-square {stat:.2}, counts {observed:?}");
    }
}

#[test]
fn uniform_dispersion_fits_all_permutations() {
    // Six permutations of three items; 5 degrees of freedom, 1e-3 critical value 20.52.
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut rng = SplitMix64::new(77);
    let mut observed = [0u64; 6];
    for _ in 0..100_000 {
        let r = sample_mallows_ranking(3, 1.0, &mut rng);
        observed[perms.iter().position(|p| p[..] == r[..]).unwrap()] += 1;
    }
    let stat = chi_square(&observed, &[1.0 / 6.0; 6]);
    assert!(stat < 20.52, "chi-square {stat:.2}, counts {observed:?}");
}

#[test]
fn zero_dispersion_is_deterministic() {
    let mut rng = SplitMix64::new(5);
    for m in 0..10 {
        assert_eq!(sample_mallows_ranking(m, 0.0, &mut rng), (0..m).collect::<Vec<_>>());
    }
}
