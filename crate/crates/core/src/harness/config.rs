use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::random::ScalarMode;
use crate::solver::SolverParams;

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "QUATCS_WORKERS";

/// Sparsity levels visited for each `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SRule {
    /// `s = 1, …, ⌊m/2⌋`, written `"1..m/2"`.
    UpToHalfM,
    List(Vec<usize>),
}

impl SRule {
    pub fn values(&self, m: usize) -> Vec<usize> {
        match self {
            SRule::UpToHalfM => (1..=m / 2).collect(),
            SRule::List(v) => v.iter().copied().filter(|&s| s <= m / 2).collect(),
        }
    }
}

impl fmt::Display for SRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SRule::UpToHalfM => f.write_str("1..m/2"),
            SRule::List(v) => {
                let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl Serialize for SRule {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SRule::UpToHalfM => ser.serialize_str("1..m/2"),
            SRule::List(v) => v.serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for SRule {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<usize>),
        }
        match Raw::deserialize(de)? {
            Raw::Text(t) if t.replace(' ', "") == "1..m/2" => Ok(SRule::UpToHalfM),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unknown s_rule {t:?}, expected \"1..m/2\" or a list"))),
            Raw::List(v) => Ok(SRule::List(v)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m_values: Vec<usize>,
    pub s_rule: SRule,
    pub trials: usize,
    pub base_seed: u64,
    pub scalar_mode: ScalarMode,
    /// A trial is a perfect reconstruction when `‖x# − x‖₂` is at most this.
    pub perfect_threshold: f64,
    pub eta: f64,
    pub solver: SolverParams,
    pub output: PathBuf,
    /// Store per-trial wall time. Off by default so that reruns are byte identical.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 256,
            m_values: vec![32],
            s_rule: SRule::UpToHalfM,
            trials: 1000,
            base_seed: 0,
            scalar_mode: ScalarMode::Quaternion,
            perfect_threshold: 1e-7,
            eta: 0.0,
            solver: SolverParams::default(),
            output: PathBuf::from("quatcs-out"),
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    /// The complete phase-transition grid: `m = 2, …, 64`, every `s ≤ m/2`, 1000 trials per cell.
    pub fn full() -> Self {
        ExperimentConfig { m_values: (2..=64).collect(), ..Default::default() }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.m_values.is_empty() {
            return bad("m_values is empty".into());
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m < 2) {
            return bad(format!("m = {m} leaves no sparsity level s <= m/2"));
        }
        if let SRule::List(list) = &self.s_rule {
            if list.is_empty() || list.contains(&0) {
                return bad("s_rule lists must be non-empty with s >= 1".into());
            }
            let max_half = self.m_values.iter().max().copied().unwrap_or(0) / 2;
            if let Some(&s) = list.iter().find(|&&s| s > max_half) {
                return bad(format!("s = {s} exceeds m/2 for every m in m_values"));
            }
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| self.s_rule.values(m).is_empty()) {
            return bad(format!("no sparsity level of s_rule {} satisfies s <= m/2 for m = {m}", self.s_rule));
        }
        if self.cells().iter().any(|&(_, s)| s > self.n) {
            return bad(format!("sparsity exceeds n = {}", self.n));
        }
        if !(self.perfect_threshold > 0.0 && self.perfect_threshold.is_finite()) {
            return bad(format!("perfect_threshold must be positive, got {}", self.perfect_threshold));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be finite and non-negative, got {}", self.eta));
        }
        self.solver.validate()
    }

    /// `(m, s)` cells in sweep order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut ms = self.m_values.clone();
        ms.sort_unstable();
        ms.dedup();
        ms.into_iter().flat_map(|m| self.s_rule.values(m).into_iter().map(move |s| (m, s))).collect()
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(Error::InvalidConfig(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs `f` on a thread pool sized by [`WORKERS_ENV`] (rayon's default otherwise).
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers_from_env()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
