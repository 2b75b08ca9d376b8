use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use surprisal_core::anomaly::{DetectionMode, DEFAULT_THRESHOLD};

use crate::error::{CliError, CliResult};

/// Seeds given on the command line: a count `N` (seeds `0..N`), a range
/// `a..b`, or a comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let bad = |part: &str| format!("invalid seed '{part}'");
        let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(a))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(b))?;
            (a..b).collect()
        } else if s.contains(',') {
            s.split(',').map(|p| p.trim().parse().map_err(|_| bad(p))).collect::<Result<_, _>>()?
        } else {
            let n: u64 = s.parse().map_err(|_| bad(s))?;
            (0..n).collect()
        };
        if seeds.is_empty() {
            return Err(format!("seed list '{s}' is empty"));
        }
        Ok(SeedList(seeds))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub schema: PathBuf,
    /// Neighbor count; `None` picks the default from the training size.
    pub k: Option<usize>,
    pub p: f64,
    pub threshold: f64,
    pub iters: usize,
    pub tol: f64,
    pub seeds: Vec<u64>,
    /// Training fraction of the evaluate split.
    pub split: f64,
    pub mode: DetectionMode,
    pub sample: Option<usize>,
    /// Seed of the residual-fit sample for `fit`, `predict`, `detect` and
    /// `explain`.
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub truth: Option<String>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(data: impl Into<PathBuf>, schema: impl Into<PathBuf>) -> Self {
        RunConfig {
            data: data.into(),
            schema: schema.into(),
            k: None,
            p: 0.0,
            threshold: DEFAULT_THRESHOLD,
            iters: 10,
            tol: 0.01,
            seeds: (0..30).collect(),
            split: 0.75,
            mode: DetectionMode::Similarity,
            sample: None,
            seed: 0,
            out: None,
            queries: None,
            truth: None,
            csv: None,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if !(self.split > 0.0 && self.split < 1.0) {
            return fail(format!("split fraction must lie in (0, 1), got {}", self.split));
        }
        if self.seeds.is_empty() {
            return fail("seed list must not be empty".into());
        }
        if self.k == Some(0) {
            return fail("k must be at least 1".into());
        }
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return fail(format!("p must be finite and >= 0, got {}", self.p));
        }
        if self.iters == 0 {
            return fail("iters must be at least 1".into());
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if !self.threshold.is_finite() {
            return fail(format!("threshold must be finite, got {}", self.threshold));
        }
        if self.sample == Some(0) {
            return fail("sample must be at least 1".into());
        }
        Ok(())
    }

    pub fn require_queries(&self) -> CliResult<&PathBuf> {
        self.queries.as_ref().ok_or_else(|| CliError::Config("this command needs --queries".into()))
    }
}
