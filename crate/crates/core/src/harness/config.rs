use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hard::Variant;
use crate::oracle::SmokePlanner;
use crate::tensorplan::TpConfig;

/// Which generated or hand-built MDP a planner run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureChoice {
    /// The hand-built toy fixture matching the run kind (`d = 2`, `H = 3`, `A = 2`).
    Toy,
    /// A layered random fixture with the requested `d`, `H`, `A`.
    Random,
}

/// Every knob of a check, run or dump, fully resolved.
///
/// Loaded from an optional JSON file and then overridden by command-line flags.
/// Each output embeds the resolved value so a run can be replayed exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub target: String,
    pub seed: u64,

    pub p: usize,
    pub k: usize,
    /// Hard-MDP variant; `None` means all variants where that makes sense.
    pub variant: Option<Variant>,
    pub tol: f64,
    /// Treat parameter warnings as failures.
    pub strict: bool,
    pub secret_index: usize,
    /// Sample count of the randomized lemma checks.
    pub lemma_samples: u64,
    /// Largest tuple length of the exhaustive product-bound check.
    pub lemma_l_max: usize,

    pub d: usize,
    pub h: usize,
    pub a: usize,
    pub delta: f64,
    pub b: f64,
    pub episodes: u64,
    pub scale_n1: f64,
    pub scale_n2: f64,
    pub scale_n3: f64,
    pub ed_cap: Option<u64>,
    pub fixture: FixtureChoice,
    pub smoke_planner: SmokePlanner,
    /// Estimated simulator queries per consistency iteration above which a run is refused.
    pub query_budget: f64,

    /// Output file for `check` (JSON) and `dump` (CSV).
    pub out: Option<PathBuf>,
    /// Output directory for `run`.
    pub out_dir: PathBuf,
    /// Record wall-clock time per episode (breaks byte-identical reruns).
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            target: String::new(),
            seed: 0,
            p: 2,
            k: 3,
            variant: None,
            tol: 1e-9,
            strict: false,
            secret_index: 0,
            lemma_samples: 100_000,
            lemma_l_max: 4,
            d: 2,
            h: 3,
            a: 2,
            delta: 0.3,
            b: 2.0,
            episodes: 200,
            scale_n1: 1.0,
            scale_n2: 1.0,
            scale_n3: 1.0,
            ed_cap: None,
            fixture: FixtureChoice::Toy,
            smoke_planner: SmokePlanner::FixedOutput,
            query_budget: 1e10,
            out: None,
            out_dir: PathBuf::from("out"),
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidParams(format!("config {}: {e}", path.display())))
    }

    /// TensorPlan configuration of the base problem.
    pub fn tp_config(&self) -> TpConfig {
        let cfg = TpConfig::new(self.d, self.a, self.h, self.delta, self.b).with_scales(
            self.scale_n1,
            self.scale_n2,
            self.scale_n3,
        );
        match self.ed_cap {
            Some(cap) => cfg.with_ed_cap(cap),
            None => cfg,
        }
    }
}
