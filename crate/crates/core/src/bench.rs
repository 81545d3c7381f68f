//! Runtime and feasibility sweep over Mallows-Borda instances with `n = m`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::process::Command;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dp::{solve_um_within_with, DpConfig};
use crate::error::{Error, Result};
use crate::fairness::Criterion;
use crate::gen::{derive_seed, gen_mallows_borda, MallowsConfig};
use crate::milp::{build_milp, write_lp};
use crate::model::Instance;
use crate::oracle::{brute_force_um_within_with, OracleConfig};
use crate::solve::{Limits, SolveOutcome};

pub const CSV_HEADER: &str =
    "n,m,phi,sample,seed,engine,criterion,status,welfare,elapsed_ns,states,ef_feasible,prop_feasible";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Dp,
    Brute,
    /// External solver on the exported LP file.
    Milp,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Dp => "dp",
            Engine::Brute => "brute",
            Engine::Milp => "milp",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(Engine::Dp),
            "brute" => Ok(Engine::Brute),
            "milp" => Ok(Engine::Milp),
            _ => Err(Error::Usage(format!("unknown engine '{s}'; expected dp, brute or milp"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Timeout,
    Infeasible,
    /// The engine failed for a reason other than time (budget, solver exit code).
    Error,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub phis: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub engines: Vec<Engine>,
    pub criteria: Vec<Criterion>,
    /// Per-solve wall-clock limit; `None` is unlimited.
    pub timeout: Option<Duration>,
    /// Shell command run on each exported LP file; `{lp}` is replaced by its
    /// path. MILP rows are skipped when absent.
    pub milp_cmd: Option<String>,
    /// Worker threads.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_min: 2,
            n_max: 7,
            phis: vec![0.5, 0.75, 1.0],
            samples: 50,
            seed: 0,
            engines: vec![Engine::Dp],
            criteria: vec![Criterion::Ef, Criterion::Ef1, Criterion::Prop, Criterion::Prop1],
            timeout: Some(Duration::from_secs(60)),
            milp_cmd: None,
            jobs: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_max < self.n_min {
            return Err(Error::Usage(format!(
                "need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.samples < 1 {
            return Err(Error::Usage("samples must be at least 1".into()));
        }
        if let Some(phi) = self.phis.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Usage(format!("phi must lie in [0, 1], got {phi}")));
        }
        if self.jobs < 1 {
            return Err(Error::Usage("jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Every instance of the sweep, in output order: `n` outer, then `phi`,
    /// then sample.
    pub fn instance_specs(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::new();
        for n in self.n_min..=self.n_max {
            for &phi in &self.phis {
                for sample in 0..self.samples {
                    out.push(InstanceSpec {
                        n,
                        phi,
                        sample,
                        seed: derive_seed(self.seed, &[n as u64, phi.to_bits(), sample as u64]),
                    });
                }
            }
        }
        out
    }
}

/// One instance of the sweep: `n` agents and `n` items.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    pub phi: f64,
    pub sample: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn instance(&self) -> Result<Instance> {
        let inst = gen_mallows_borda(&MallowsConfig {
            n: self.n,
            m: self.n,
            phi: self.phi,
            seed: self.seed,
        })?;
        Ok(inst.with_name(format!("mallows_n{}_phi{}_s{}", self.n, self.phi, self.sample)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub phi: f64,
    pub sample: usize,
    pub seed: u64,
    pub engine: Engine,
    pub criterion: Criterion,
    pub status: RowStatus,
    /// Present iff `status` is `ok` and the engine reports a value.
    pub welfare: Option<u64>,
    pub elapsed_ns: u64,
    pub states: Option<u64>,
    /// Empty when the feasibility solve timed out.
    pub ef_feasible: Option<bool>,
    pub prop_feasible: Option<bool>,
}

/// Runs the sweep, passing rows to `sink` in the deterministic order of
/// [`BenchConfig::instance_specs`] whatever the worker count.
pub fn run_bench_with(cfg: &BenchConfig, mut sink: impl FnMut(BenchRecord) -> Result<()>) -> Result<()> {
    cfg.validate()?;
    let specs = cfg.instance_specs();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| -> Result<()> {
        let (tx, rx) = mpsc::channel::<(usize, Result<Vec<BenchRecord>>)>();
        for _ in 0..cfg.jobs.min(specs.len().max(1)) {
            let tx = tx.clone();
            let (specs, next) = (&specs, &next);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= specs.len() {
                    break;
                }
                if tx.send((k, bench_instance(cfg, &specs[k]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut emitted = 0;
        for (k, rows) in rx {
            pending.insert(k, rows);
            while let Some(rows) = pending.remove(&emitted) {
                let rows = rows.inspect_err(|_| next.store(specs.len(), Ordering::Relaxed))?;
                for row in rows {
                    sink(row).inspect_err(|_| next.store(specs.len(), Ordering::Relaxed))?;
                }
                emitted += 1;
            }
        }
        Ok(())
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let mut rows = Vec::new();
    run_bench_with(cfg, |r| {
        rows.push(r);
        Ok(())
    })?;
    Ok(rows)
}

fn limits(cfg: &BenchConfig) -> Limits {
    cfg.timeout.map_or(Limits::unlimited(), Limits::with_timeout)
}

fn feasibility(inst: &Instance, crit: Criterion, cfg: &BenchConfig) -> Result<Option<bool>> {
    let dp = DpConfig {
        limits: limits(cfg),
        ..DpConfig::default()
    };
    match solve_um_within_with(inst, crit, &dp) {
        Ok(out) => Ok(Some(out.is_found())),
        Err(Error::Timeout) => Ok(None),
        Err(e) => Err(e),
    }
}

fn bench_instance(cfg: &BenchConfig, spec: &InstanceSpec) -> Result<Vec<BenchRecord>> {
    let inst = spec.instance()?;
    let ef_feasible = feasibility(&inst, Criterion::Ef, cfg)?;
    let prop_feasible = feasibility(&inst, Criterion::Prop, cfg)?;
    let mut rows = Vec::new();
    for &engine in &cfg.engines {
        for &criterion in &cfg.criteria {
            let Some((status, welfare, elapsed_ns, states)) = run_engine(cfg, engine, &inst, criterion)?
            else {
                continue;
            };
            rows.push(BenchRecord {
                n: spec.n,
                m: spec.n,
                phi: spec.phi,
                sample: spec.sample,
                seed: spec.seed,
                engine,
                criterion,
                status,
                welfare,
                elapsed_ns,
                states,
                ef_feasible,
                prop_feasible,
            });
        }
    }
    Ok(rows)
}

type EngineRow = (RowStatus, Option<u64>, u64, Option<u64>);

fn outcome_row(result: Result<SolveOutcome>, start: Instant) -> Result<EngineRow> {
    let wall = start.elapsed().as_nanos() as u64;
    match result {
        Ok(out) if out.is_found() => Ok((
            RowStatus::Ok,
            Some(out.welfare),
            out.stats.elapsed_ns,
            Some(out.stats.states_explored),
        )),
        Ok(out) => Ok((
            RowStatus::Infeasible,
            None,
            out.stats.elapsed_ns,
            Some(out.stats.states_explored),
        )),
        Err(Error::Timeout) => Ok((RowStatus::Timeout, None, wall, None)),
        Err(Error::BudgetExceeded { .. }) => Ok((RowStatus::Error, None, wall, None)),
        Err(e) => Err(e),
    }
}

/// One timed solve, or `None` when the row is skipped.
fn run_engine(cfg: &BenchConfig, engine: Engine, inst: &Instance, crit: Criterion) -> Result<Option<EngineRow>> {
    let start = Instant::now();
    match engine {
        Engine::Dp => {
            let dp = DpConfig {
                limits: limits(cfg),
                ..DpConfig::default()
            };
            outcome_row(solve_um_within_with(inst, crit, &dp), start).map(Some)
        }
        Engine::Brute => {
            let oracle = OracleConfig {
                limits: limits(cfg),
                ..OracleConfig::default()
            };
            outcome_row(brute_force_um_within_with(inst, crit, &oracle), start).map(Some)
        }
        Engine::Milp => {
            let Some(template) = &cfg.milp_cmd else {
                return Ok(None);
            };
            let Ok(model) = build_milp(inst, crit) else {
                return Ok(None);
            };
            run_external(template, &model, cfg.timeout).map(Some)
        }
    }
}

/// Writes the LP file, then times the solver command on it. Only the wall
/// time and exit status are recorded.
fn run_external(template: &str, model: &crate::milp::MilpModel, timeout: Option<Duration>) -> Result<EngineRow> {
    let file = tempfile::Builder::new().prefix("fairdiv-").suffix(".lp").tempfile()?;
    write_lp(model, file.as_file())?;
    let path = file.path().display().to_string();
    let command = if template.contains("{lp}") {
        template.replace("{lp}", &path)
    } else {
        format!("{template} {path}")
    };
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn()?;
    loop {
        if let Some(status) = child.try_wait()? {
            let wall = start.elapsed().as_nanos() as u64;
            let row = if status.success() { RowStatus::Ok } else { RowStatus::Error };
            return Ok((row, None, wall, None));
        }
        if timeout.is_some_and(|t| start.elapsed() >= t) {
            let _ = child.kill();
            let _ = child.wait();
            return Ok((RowStatus::Timeout, None, start.elapsed().as_nanos() as u64, None));
        }
        thread::sleep(Duration::from_millis(1));
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

/// Writes the header and `records`; an empty slice gives a header-only file.
pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(CSV_HEADER.split(','))?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_path(records: &[BenchRecord], path: &Path) -> Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidPayload(format!("unexpected CSV header: {}", header.join(","))));
    }
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// EF and PROP feasibility counts, one vote per instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeasibilitySummary {
    pub instances: usize,
    /// Instances whose EF (resp. PROP) flag is known.
    pub ef_known: usize,
    pub ef_feasible: usize,
    pub prop_known: usize,
    pub prop_feasible: usize,
}

impl FeasibilitySummary {
    pub fn ef_rate(&self) -> f64 {
        self.ef_feasible as f64 / self.ef_known.max(1) as f64
    }

    pub fn prop_rate(&self) -> f64 {
        self.prop_feasible as f64 / self.prop_known.max(1) as f64
    }
}

/// Counts flags once per `(n, phi, sample)`. An instance whose flags both
/// timed out drops out of both rates; otherwise each rate is over the
/// instances where that flag is known.
pub fn feasibility_summary(records: &[BenchRecord]) -> FeasibilitySummary {
    let mut seen = BTreeMap::new();
    for r in records {
        seen.entry((r.n, r.phi.to_bits(), r.sample))
            .or_insert((r.ef_feasible, r.prop_feasible));
    }
    let mut s = FeasibilitySummary::default();
    for (ef, prop) in seen.into_values() {
        s.instances += 1;
        if let Some(f) = ef {
            s.ef_known += 1;
            s.ef_feasible += f as usize;
        }
        if let Some(f) = prop {
            s.prop_known += 1;
            s.prop_feasible += f as usize;
        }
    }
    s
}
