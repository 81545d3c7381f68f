//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p fairdiv-cli --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fairdiv::bench::BenchConfig;
use fairdiv::dp::{solve_um_within_with, DpConfig};
use fairdiv::gen::{
    derive_seed, gen_mallows_borda, gen_reduction, gen_uniform, MallowsConfig, Reduction, ReductionKind, SplitMix64,
};
use fairdiv::milp::{build_milp, indicator_point};
use fairdiv::two_agent::Answer;
use fairdiv::{
    brute_force_decide, brute_force_um_within, decide_exists_um_and_fair, exists_um_and_fair_2, is_fair, welfare,
    Allocation, Criterion, Instance, Limits, SolveStats,
};

const SEED: u64 = 0x5eed_2018;

type Outcome = Result<String, String>;
type Check = Box<dyn FnOnce(&mut Vec<Solve>) -> Outcome>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mallows(n: usize, m: usize, phi: f64, seed: u64) -> Instance {
    gen_mallows_borda(&MallowsConfig { n, m, phi, seed }).unwrap()
}

/// Worst-case state bound for one solve: `m` levels times the per-level
/// count of distinct keys.
fn worst_case_bound(inst: &Instance, crit: Criterion) -> u128 {
    let n = inst.num_agents() as u32;
    let m = inst.num_items() as u128;
    let v = inst.value_cap() as u128;
    let pairs = n * n.saturating_sub(1);
    let per_level = match crit {
        Criterion::Prop | Criterion::Eq => (v + 1).saturating_pow(n),
        Criterion::Prop1 | Criterion::Propx | Criterion::Eq1 | Criterion::Eqx => {
            (v + 1).saturating_pow(n).saturating_mul((m + 1).saturating_pow(n))
        }
        Criterion::Ef => (2 * v + 1).saturating_pow(pairs),
        Criterion::Ef1 | Criterion::Efx => {
            (2 * v + 1).saturating_pow(pairs).saturating_mul((m + 1).saturating_pow(pairs))
        }
        Criterion::None => 0,
    };
    m.saturating_mul(per_level)
}

struct Solve {
    inst: Instance,
    crit: Criterion,
    stats: SolveStats,
}

fn oracle_equivalence(solves: &mut Vec<Solve>) -> Outcome {
    let start = Instant::now();
    let phis = [0.5, 0.75, 1.0];
    let mut found = 0;
    for k in 0..500u64 {
        let seed = derive_seed(SEED, &[1, k]);
        let n = 2 + (k % 2) as usize;
        let m = 3 + ((k / 2) % 4) as usize;
        let inst = if (k / 8) % 2 == 0 {
            gen_uniform(n, m, 10, seed).unwrap()
        } else {
            mallows(n, m, phis[(k % 3) as usize], seed)
        };
        for crit in Criterion::FAIR {
            let dp = solve_um_within_with(&inst, crit, &DpConfig::default()).map_err(|e| e.to_string())?;
            let bf = brute_force_um_within(&inst, crit).map_err(|e| e.to_string())?;
            ensure(dp.status == bf.status && dp.optimum() == bf.optimum(), || {
                format!(
                    "{crit} on {:?}: dp {:?} vs brute {:?}",
                    inst.valuations(),
                    dp.optimum(),
                    bf.optimum()
                )
            })?;
            if let Some(alloc) = &dp.allocation {
                found += 1;
                ensure(is_fair(&inst, alloc, crit).unwrap(), || {
                    format!("{crit}: DP allocation {:?} is not fair", alloc.owner())
                })?;
                ensure(welfare(&inst, alloc).unwrap() == dp.welfare, || "reported welfare mismatch".into())?;
            }
            solves.push(Solve {
                inst: inst.clone(),
                crit,
                stats: dp.stats,
            });
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("4500 solves agree, {found} allocations fair, {elapsed:.1?}"))
}

fn state_bounds(solves: &[Solve]) -> Outcome {
    let mut worst = 0.0f64;
    for s in solves {
        let bound = worst_case_bound(&s.inst, s.crit);
        let explored = s.stats.states_explored as u128;
        ensure(explored <= bound, || {
            format!("{}: {} states > bound {} on {:?}", s.crit, explored, bound, s.inst.valuations())
        })?;
        ensure(s.stats.states_per_level.iter().sum::<u64>() == s.stats.states_explored, || {
            "per-level counts do not sum to the total".into()
        })?;
        if bound > 0 {
            worst = worst.max(explored as f64 / bound as f64);
        }
    }
    Ok(format!("{} solves within bound, max ratio {worst:.3}", solves.len()))
}

fn two_agent_agreement() -> Outcome {
    let start = Instant::now();
    let mut yes = [0usize; 3];
    let crits = [Criterion::Ef1, Criterion::Prop1, Criterion::Eq1];
    for k in 0..1000u64 {
        let seed = derive_seed(SEED, &[2, k]);
        let m = (k % 11) as usize;
        let inst = match k % 4 {
            0 => gen_uniform(2, m, 2, seed).unwrap(),
            1 => gen_uniform(2, m, 5, seed).unwrap(),
            2 => gen_uniform(2, m, 10, seed).unwrap(),
            _ => mallows(2, m, 0.75, seed),
        };
        for (c, crit) in crits.into_iter().enumerate() {
            let fast = exists_um_and_fair_2(&inst, crit).map_err(|e| e.to_string())?;
            let brute = brute_force_decide(&inst, crit).map_err(|e| e.to_string())?;
            ensure((fast.answer == Answer::Yes) == brute, || {
                format!("{crit} on {:?}: fast {:?}, brute {brute}", inst.valuations(), fast.answer)
            })?;
            yes[c] += brute as usize;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "3000 decisions agree (yes: ef1 {}, prop1 {}, eq1 {}), {elapsed:.1?}",
        yes[0], yes[1], yes[2]
    ))
}

fn has_equal_split(numbers: &[u64]) -> bool {
    let total: u64 = numbers.iter().sum();
    (0u32..1 << numbers.len()).any(|mask| {
        let s: u64 = (0..numbers.len()).filter(|&i| mask >> i & 1 == 1).map(|i| numbers[i]).sum();
        2 * s == total
    })
}

fn reduction_fixtures() -> Outcome {
    let mut payloads: Vec<Vec<u64>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..6 {
        frontier = frontier
            .iter()
            .flat_map(|p: &Vec<u64>| (1..=3).map(move |x| [p.clone(), vec![x]].concat()))
            .collect();
        payloads.extend(frontier.iter().cloned());
    }
    let (mut checked, mut rejected, mut yes) = (0, 0, 0);
    for numbers in payloads.iter().filter(|p| !p.is_empty()) {
        let odd = numbers.iter().sum::<u64>() % 2 == 1;
        let expected = has_equal_split(numbers);
        for (kind, crit) in [
            (ReductionKind::PartitionEf1, Criterion::Ef1),
            (ReductionKind::PartitionProp1, Criterion::Prop1),
        ] {
            let inst = Reduction::from_payload(kind, numbers, None).and_then(|r| gen_reduction(&r));
            if odd {
                ensure(inst.is_err(), || format!("{kind} accepted odd payload {numbers:?}"))?;
                rejected += 1;
                continue;
            }
            let inst = inst.map_err(|e| format!("{kind} {numbers:?}: {e}"))?;
            ensure(inst.num_agents() == 3, || "expected three agents".into())?;
            let d = decide_exists_um_and_fair(&inst, crit).map_err(|e| e.to_string())?;
            ensure(d.answer == expected, || {
                format!("{kind} {numbers:?}: decide {} but equal split {expected}", d.answer)
            })?;
            checked += 1;
            yes += d.answer as usize;
        }
    }
    Ok(format!("{checked} decisions match subset-sum ({yes} yes), {rejected} odd payloads rejected"))
}

fn seven_item_fixture_and_implications() -> Outcome {
    let row = vec![4, 1, 1, 1, 1, 1, 1];
    let inst = Instance::new(vec![row.clone(), row]).unwrap();
    let alloc = Allocation::new(vec![0, 1, 1, 1, 1, 1, 1]);
    ensure(is_fair(&inst, &alloc, Criterion::Prop1).unwrap(), || "seven-item allocation not PROP1".into())?;
    ensure(!is_fair(&inst, &alloc, Criterion::Ef1).unwrap(), || "seven-item allocation is EF1".into())?;

    let implications = [
        (Criterion::Ef, Criterion::Ef1),
        (Criterion::Ef1, Criterion::Prop1),
        (Criterion::Efx, Criterion::Ef1),
        (Criterion::Propx, Criterion::Prop1),
        (Criterion::Eqx, Criterion::Eq1),
    ];
    let mut premises = [0usize; 5];
    let mut rng = SplitMix64::new(derive_seed(SEED, &[4]));
    for _ in 0..10_000 {
        let n = 2 + rng.below(3) as usize;
        let m = rng.below(8) as usize;
        let vmax = [1, 3, 10][rng.below(3) as usize];
        let inst = gen_uniform(n, m, vmax, rng.next_u64()).unwrap();
        let alloc = Allocation::new((0..m).map(|_| rng.below(n as u64) as usize).collect());
        for (k, (a, b)) in implications.into_iter().enumerate() {
            if is_fair(&inst, &alloc, a).unwrap() {
                premises[k] += 1;
                ensure(is_fair(&inst, &alloc, b).unwrap(), || {
                    format!("{a} but not {b}: {:?} with {:?}", inst.valuations(), alloc.owner())
                })?;
            }
        }
    }
    Ok(format!("10000 pairs, 0 violations (premise counts {premises:?})"))
}

fn feasibility_rates() -> Outcome {
    let cfg = BenchConfig::default();
    // Limits hold an absolute deadline, so each solve gets its own.
    let dp = || DpConfig {
        limits: Limits::with_timeout(cfg.timeout.unwrap()),
        ..DpConfig::default()
    };
    let specs = cfg.instance_specs();
    let (mut counted, mut ef, mut prop) = (0usize, 0usize, 0usize);
    let start = Instant::now();
    for spec in &specs {
        let inst = spec.instance().unwrap();
        let ef_ok = solve_um_within_with(&inst, Criterion::Ef, &dp()).map(|o| o.is_found()).ok();
        let prop_ok = solve_um_within_with(&inst, Criterion::Prop, &dp()).map(|o| o.is_found()).ok();
        if ef_ok.is_none() && prop_ok.is_none() {
            continue;
        }
        counted += 1;
        ef += (ef_ok == Some(true)) as usize;
        prop += (prop_ok == Some(true)) as usize;
    }
    let ef_rate = ef as f64 / counted as f64;
    let prop_rate = prop as f64 / counted as f64;
    let detail = format!(
        "{} instances, {counted} counted: EF {:.1}%, PROP {:.1}%, {:.0?}",
        specs.len(),
        100.0 * ef_rate,
        100.0 * prop_rate,
        start.elapsed()
    );
    ensure(specs.len() == 900, || format!("{} instances generated", specs.len()))?;
    ensure((0.05..=0.20).contains(&ef_rate) && (0.60..=0.82).contains(&prop_rate), || detail.clone())?;
    Ok(detail)
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

fn relative_difficulty() -> Outcome {
    let cfg = BenchConfig {
        n_min: 6,
        n_max: 6,
        criteria: vec![Criterion::Prop, Criterion::Ef, Criterion::Prop1, Criterion::Ef1],
        ..BenchConfig::default()
    };
    let rows = fairdiv::bench::run_bench(&cfg).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for &phi in &cfg.phis {
        let med = |crit: Criterion| {
            median(
                rows.iter()
                    .filter(|r| r.phi == phi && r.criterion == crit)
                    .map(|r| r.elapsed_ns)
                    .collect(),
            )
        };
        let [prop, ef, prop1, ef1] = [Criterion::Prop, Criterion::Ef, Criterion::Prop1, Criterion::Ef1].map(med);
        let line = format!("phi {phi}: PROP {prop} < EF {ef}, PROP1 {prop1} < EF1 {ef1} (median ns)");
        ensure(prop < ef && prop1 < ef1, || line.clone())?;
        parts.push(line);
    }
    Ok(parts.join("; "))
}

fn milp_fidelity() -> Outcome {
    let crits = [Criterion::Prop, Criterion::Ef, Criterion::Prop1, Criterion::Ef1];
    let mut instances = Vec::new();
    // Every table with entries in {0, 1, 2} up to 2 x 3, and 1 x 4.
    for n in 1..=2usize {
        for m in 0..=(if n == 1 { 4 } else { 3 }) {
            let cells = (n * m) as u32;
            for code in 0..3u64.pow(cells) {
                let mut c = code;
                let rows = (0..n)
                    .map(|_| {
                        (0..m)
                            .map(|_| {
                                let v = c % 3;
                                c /= 3;
                                v
                            })
                            .collect()
                    })
                    .collect();
                instances.push(Instance::new(rows).unwrap());
            }
        }
    }
    for k in 0..150u64 {
        let seed = derive_seed(SEED, &[8, k]);
        instances.push(if k % 2 == 0 {
            gen_uniform(2, 4, 10, seed).unwrap()
        } else {
            mallows(2, 4, 1.0, seed)
        });
    }
    let mut points = 0usize;
    for inst in &instances {
        let (n, m) = (inst.num_agents(), inst.num_items());
        let models: Vec<_> = crits.iter().map(|&c| build_milp(inst, c).unwrap()).collect();
        for code in 0..n.pow(m as u32) {
            let owner = (0..m).map(|j| code / n.pow(j as u32) % n).collect();
            let alloc = Allocation::new(owner);
            let point = indicator_point(inst, &alloc);
            for (model, &crit) in models.iter().zip(&crits) {
                let milp = model.extends_to_feasible(&point);
                let direct = is_fair(inst, &alloc, crit).unwrap();
                ensure(milp == direct, || {
                    format!("{crit} on {:?} at {:?}: MILP {milp}, is_fair {direct}", inst.valuations(), alloc.owner())
                })?;
                points += 1;
            }
        }
    }
    Ok(format!("{} instances, {points} indicator checks agree", instances.len()))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fairdiv"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code().is_some_and(|c| c <= 1), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).display().to_string();
    let inst = path("inst.json");
    let seven_items = path("seven.json");
    std::fs::write(&seven_items, "{\"valuations\":[[4,1,1,1,1,1,1],[4,1,1,1,1,1,1]]}").map_err(|e| e.to_string())?;
    let commands: Vec<Vec<String>> = [
        vec!["gen", "--model", "mallows", "-n", "5", "-m", "6", "--phi", "0.75", "--seed", "42"],
        vec!["gen", "--model", "uniform", "-n", "3", "-m", "5", "--vmax", "9", "--seed", "7"],
        vec!["gen", "--model", "reduction", "--kind", "3partition-prop1", "--payload", "2,2,3", "--target", "7"],
        vec!["solve", &inst, "--criterion", "ef1"],
        vec!["solve", &inst, "--criterion", "prop", "--stats"],
        vec!["solve", &seven_items, "--criterion", "eqx", "--engine", "brute"],
        vec!["decide", &inst, "--criterion", "prop1"],
        vec!["decide", &seven_items, "--criterion", "ef"],
        vec!["export-milp", &inst, "--criterion", "ef1"],
        vec!["export-milp", &seven_items, "--criterion", "prop1"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect();
    let first = run_cli(&["gen", "--model", "mallows", "-n", "4", "-m", "5", "--seed", "3", "-o", &inst])?;
    ensure(first.is_empty() && Path::new(&inst).exists(), || "gen -o wrote to stdout".into())?;
    let library = mallows(4, 5, 1.0, 3).to_json() + "\n";
    ensure(std::fs::read_to_string(&inst).unwrap() == library, || "CLI gen differs from library".into())?;
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let a = run_cli(&args)?;
        let b = run_cli(&args)?;
        ensure(!a.is_empty() && a == b, || format!("{args:?} output differs between runs"))?;
    }
    Ok(format!("{} commands byte-identical across two runs", commands.len() + 1))
}

fn main() {
    let mut solves = Vec::new();
    let criteria: Vec<(&str, Check)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("state-count bounds", Box::new(|s: &mut Vec<Solve>| state_bounds(s))),
        ("two-agent fast path", Box::new(|_: &mut Vec<Solve>| two_agent_agreement())),
        ("reduction fixtures", Box::new(|_: &mut Vec<Solve>| reduction_fixtures())),
        ("seven-item fixture and implications", Box::new(|_: &mut Vec<Solve>| seven_item_fixture_and_implications())),
        ("feasibility rates", Box::new(|_: &mut Vec<Solve>| feasibility_rates())),
        ("relative difficulty", Box::new(|_: &mut Vec<Solve>| relative_difficulty())),
        ("MILP transcription fidelity", Box::new(|_: &mut Vec<Solve>| milp_fidelity())),
        ("determinism", Box::new(|_: &mut Vec<Solve>| determinism())),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(|| check(&mut solves)))
            .unwrap_or_else(|p| Err(format!("panicked: {p:?}")));
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.1?}]", start.elapsed());
            }
        }
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
