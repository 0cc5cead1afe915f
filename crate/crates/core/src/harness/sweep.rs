use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{with_workers, ExperimentConfig};
use super::write_pretty_json;
use crate::error::{Error, Result};
use crate::qlinalg::{LpNorm, QVector};
use crate::random::{
    sample_gaussian_matrix_mode, sample_sparse_signal_mode, sample_sphere, trial_stream_id, RngStream, StreamKind,
};
use crate::solver::{solve, RecoveryProblem, SolveStatus, SolverParams};

pub const TRIALS_FILE: &str = "trials.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const GRID_FILE: &str = "grid.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const SWEEP_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialStatus {
    Converged,
    MaxIters,
    Infeasible,
    /// The solver returned an error; errors are measured against `x# = 0`.
    Failed,
}

impl From<SolveStatus> for TrialStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => TrialStatus::Converged,
            SolveStatus::MaxIters => TrialStatus::MaxIters,
            SolveStatus::Infeasible => TrialStatus::Infeasible,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub m: usize,
    pub s: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub stream: u64,
    pub err_l1: f64,
    pub err_l2: f64,
    pub perfect: bool,
    pub status: TrialStatus,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl TrialRecord {
    fn key(&self) -> (usize, usize, usize) {
        (self.m, self.s, self.trial_index)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub m: usize,
    pub s: usize,
    pub trials: usize,
    pub perfect: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub cells: Vec<CellSummary>,
}

impl PhaseDiagram {
    /// Aggregates the records that belong to `config`'s cells and trial range.
    pub fn from_records(config: &ExperimentConfig, records: &[TrialRecord]) -> Self {
        let mut counts: BTreeMap<(usize, usize), (usize, usize)> =
            config.cells().into_iter().map(|c| (c, (0, 0))).collect();
        for r in records.iter().filter(|r| r.trial_index < config.trials) {
            if let Some(entry) = counts.get_mut(&(r.m, r.s)) {
                entry.0 += 1;
                entry.1 += r.perfect as usize;
            }
        }
        let cells = counts
            .into_iter()
            .map(|((m, s), (trials, perfect))| CellSummary {
                m,
                s,
                trials,
                perfect,
                rate: if trials == 0 { 0.0 } else { perfect as f64 / trials as f64 },
            })
            .collect();
        PhaseDiagram { schema_version: SWEEP_SCHEMA_VERSION, config: config.clone(), cells }
    }

    pub fn rate(&self, m: usize, s: usize) -> Option<f64> {
        self.cells.iter().find(|c| c.m == m && c.s == s).map(|c| c.rate)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,s,trials,perfect,rate\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{},{},{}\n", c.m, c.s, c.trials, c.perfect, c.rate));
        }
        out
    }
}

/// One recovery trial of the sweep protocol: `Φ` with `σ² = 1/m`, an
/// `s`-sparse `x`, `y = Φx + e`, `ℓ1` recovery and its errors. Solver errors
/// are recorded in the trial; only sampling errors are returned.
pub fn run_trial(config: &ExperimentConfig, m: usize, s: usize, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let stream = trial_stream_id(StreamKind::Sweep, m, s, trial);
    let mut rng = RngStream::new(config.base_seed, stream);
    let mode = config.scalar_mode;
    let phi = sample_gaussian_matrix_mode(&mut rng, m, config.n, 1.0 / m as f64, mode)?;
    let (x, _) = sample_sparse_signal_mode(&mut rng, config.n, s, mode)?;
    let noise = sample_sphere(&mut rng, m, config.eta, mode)?;
    let y = phi.matvec(&x)?.try_add(&noise)?;

    let solved = RecoveryProblem::new(phi, y, config.eta).and_then(|p| solve(&p, &config.solver));
    let (x_hat, status, iterations, error) = match solved {
        Ok(r) => (r.x_hat, r.status.into(), r.iterations, None),
        Err(e) => (QVector::zeros(config.n), TrialStatus::Failed, 0, Some(format!("{}: {e}", e.kind()))),
    };
    let diff = x_hat.try_sub(&x)?;
    let err_l2 = diff.lp_norm(LpNorm::Two);
    Ok(TrialRecord {
        m,
        s,
        trial_index: trial,
        seed: config.base_seed,
        stream,
        err_l1: diff.lp_norm(LpNorm::One),
        err_l2,
        perfect: status != TrialStatus::Failed && err_l2 <= config.perfect_threshold,
        status,
        iterations,
        error,
        wall_time_s: config.record_timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Fields that must agree for stored trials to be reused.
#[derive(Serialize, Deserialize, PartialEq)]
struct TrialIdentity {
    n: usize,
    base_seed: u64,
    scalar_mode: crate::random::ScalarMode,
    perfect_threshold: f64,
    eta: f64,
    solver: SolverParams,
}

impl TrialIdentity {
    fn of(c: &ExperimentConfig) -> Self {
        TrialIdentity {
            n: c.n,
            base_seed: c.base_seed,
            scalar_mode: c.scalar_mode,
            perfect_threshold: c.perfect_threshold,
            eta: c.eta,
            solver: c.solver.clone(),
        }
    }
}

/// Reads a trials file, tolerating one truncated final line.
pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<std::io::Result<_>>()?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TrialRecord>(line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == lines.len() => log::warn!("ignoring truncated last line of {}", path.display()),
            Err(e) => return Err(Error::InvalidInput(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

fn check_identity(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    let path = dir.join(CONFIG_FILE);
    if path.exists() {
        let stored: ExperimentConfig = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if TrialIdentity::of(&stored) != TrialIdentity::of(config) {
            return Err(Error::InvalidConfig(format!(
                "{} holds trials of a different experiment (n, seed, mode, eta or solver differ)",
                dir.display()
            )));
        }
    }
    write_pretty_json(&path, config)
}

/// Sorts, deduplicates and atomically rewrites the trials file.
fn canonicalize(path: &Path, mut records: Vec<TrialRecord>) -> Result<Vec<TrialRecord>> {
    records.sort_by_key(TrialRecord::key);
    records.dedup_by_key(|r| r.key());
    let tmp: PathBuf = path.with_extension("jsonl.tmp");
    {
        let mut f = std::io::BufWriter::new(File::create(&tmp)?);
        for r in &records {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(records)
}

/// Runs every missing trial of the configured grid, appending each record to
/// `trials.jsonl` as it finishes, then writes `summary.json` and `grid.csv`.
/// Trials already on disk are reused, so an interrupted sweep resumes where it stopped.
pub fn run_sweep(config: &ExperimentConfig) -> Result<PhaseDiagram> {
    config.validate()?;
    let dir = &config.output;
    fs::create_dir_all(dir)?;
    check_identity(dir, config)?;
    let trials_path = dir.join(TRIALS_FILE);
    let existing = read_trials(&trials_path)?;
    // drop a truncated tail before appending
    let existing = canonicalize(&trials_path, existing)?;
    let done: HashSet<(usize, usize, usize)> = existing.iter().map(TrialRecord::key).collect();
    let tasks: Vec<(usize, usize, usize)> = config
        .cells()
        .into_iter()
        .flat_map(|(m, s)| (0..config.trials).map(move |t| (m, s, t)))
        .filter(|k| !done.contains(k))
        .collect();
    log::info!("sweep: {} trials to run, {} reused", tasks.len(), done.len());

    let sink = Mutex::new(OpenOptions::new().append(true).create(true).open(&trials_path)?);
    let fresh: Vec<TrialRecord> = with_workers(|| {
        tasks
            .par_iter()
            .map(|&(m, s, t)| {
                let rec = run_trial(config, m, s, t)?;
                let mut line = serde_json::to_vec(&rec)?;
                line.push(b'\n');
                let mut f = sink.lock().map_err(|_| Error::InvalidInput("trial sink poisoned".into()))?;
                f.write_all(&line)?;
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    drop(sink);

    let mut all = existing;
    all.extend(fresh);
    let all = canonicalize(&trials_path, all)?;
    let diagram = PhaseDiagram::from_records(config, &all);
    write_pretty_json(&dir.join(SUMMARY_FILE), &diagram)?;
    fs::write(dir.join(GRID_FILE), diagram.to_csv())?;
    Ok(diagram)
}
