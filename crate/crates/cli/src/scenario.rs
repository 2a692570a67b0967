//! Scenario files.

use std::path::PathBuf;

use satlab::conformal::max_supported_k;
use satlab::grid::{build_box_manifold, ManifoldSpec};
use satlab::sequences::{SequenceSpec, SEQUENCE_FORMULA};
use satlab::spectral::{Problem, SolverOptions};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Identity,
    Bounds,
    Harnack,
    FlatzoomerSweep,
    QuasiFlatzoomer,
    ExtensionRoundtrip,
    SequenceDiagnostics,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Identity => "identity",
            Check::Bounds => "bounds",
            Check::Harnack => "harnack",
            Check::FlatzoomerSweep => "flatzoomer-sweep",
            Check::QuasiFlatzoomer => "quasi-flatzoomer",
            Check::ExtensionRoundtrip => "extension-roundtrip",
            Check::SequenceDiagnostics => "sequence-diagnostics",
        }
    }

    fn needs_solver(self) -> bool {
        matches!(self, Check::Identity | Check::Bounds | Check::Harnack)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; `--out-dir` wins, the default is `satlab-out/<name>`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub checks: Vec<Check>,
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub identity: IdentityConfig,
    #[serde(default)]
    pub harnack: HarnackConfig,
    #[serde(default)]
    pub flatzoomer: FlatzoomerConfig,
    #[serde(default)]
    pub quasi: QuasiConfig,
    #[serde(default)]
    pub extension: ExtensionConfig,
    #[serde(default)]
    pub sequence: SequenceConfig,
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `closed`, `s0`, `s1`; empty means `closed` without boundary and
    /// both `s0` and `s1` with boundary.
    pub problems: Vec<String>,
    pub tol: f64,
    pub max_iter: usize,
    pub shift: Option<f64>,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self { problems: Vec::new(), tol: d.tol, max_iter: d.max_iter, shift: d.shift, cg_max_iter: d.cg_max_iter }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iter: self.max_iter, shift: self.shift, cg_max_iter: self.cg_max_iter }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    /// Also solve at half the grid spacing and require order >= 1.
    pub refine: bool,
    /// Optional bound on the residuals at the finest resolution.
    pub max_residual: Option<f64>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self { refine: true, max_residual: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackConfig {
    pub radius: f64,
    /// `C^2` size of the metric perturbation.
    pub eps: f64,
    pub max_drift: f64,
}

impl Default for HarnackConfig {
    fn default() -> Self {
        Self { radius: 0.3, eps: 0.01, max_drift: 0.1 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatzoomerConfig {
    pub shifts: Vec<f64>,
    pub orders: Vec<usize>,
    pub tol: f64,
}

impl Default for FlatzoomerConfig {
    fn default() -> Self {
        Self { shifts: vec![0.0, 0.5, 1.0, 1.5, 2.0], orders: vec![0, 1], tol: 1e-6 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiConfig {
    pub centers: usize,
    pub sources: usize,
    pub slack: f64,
}

impl Default for QuasiConfig {
    fn default() -> Self {
        Self { centers: 4, sources: 8, slack: 0.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionConfig {
    pub order: usize,
    pub depth: f64,
    pub r2: f64,
    pub c: f64,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self { order: 2, depth: 0.25, r2: 0.8, c: 4.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceConfig {
    pub count: usize,
    pub problem: String,
    pub ball_radius: f64,
    pub samples: usize,
    pub k: usize,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self { count: 8, problem: "s1".into(), ball_radius: 0.35, samples: 8, k: 2 }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    /// Parses and validates a scenario. Parse errors carry the line and
    /// column reported by the TOML reader.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| config(format!("scenario parse error: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn is_sequence(&self) -> bool {
        self.manifold.metric == SEQUENCE_FORMULA
    }

    /// Sets every axis to `nodes` nodes.
    pub fn with_resolution(mut self, nodes: usize) -> Result<Self, CliError> {
        self.manifold = self.manifold.with_resolution(nodes);
        self.validate()?;
        Ok(self)
    }

    pub fn problems(&self) -> Result<Vec<Problem>, CliError> {
        let boundary = self.manifold.axes.iter().any(|a| !a.periodic);
        let problems: Vec<Problem> = if self.solver.problems.is_empty() {
            if boundary {
                vec![Problem::S0, Problem::S1]
            } else {
                vec![Problem::Closed]
            }
        } else {
            self.solver
                .problems
                .iter()
                .map(|p| p.parse::<Problem>().map_err(|e| config(format!("solver.problems: {e}"))))
                .collect::<Result<_, _>>()?
        };
        for p in &problems {
            if (*p == Problem::Closed) == boundary {
                return Err(config(format!(
                    "solver.problems: `{}` does not apply to a manifold {} boundary",
                    p.name(),
                    if boundary { "with" } else { "without" }
                )));
            }
        }
        Ok(problems)
    }

    pub fn sequence_spec(&self) -> Result<SequenceSpec, CliError> {
        let c = &self.sequence;
        let mut spec = SequenceSpec::new(self.manifold.clone(), c.count);
        spec.problem = c.problem.parse().map_err(|e| config(format!("sequence.problem: {e}")))?;
        spec.ball_radius = c.ball_radius;
        spec.samples = c.samples;
        spec.seed = self.seed;
        spec.k = c.k;
        spec.validate().map_err(|e| config(format!("sequence: {e}")))?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() {
            return Err(config("name: must not be empty"));
        }
        if self.checks.is_empty() {
            return Err(config("checks: at least one check is required"));
        }
        let probe = if self.is_sequence() {
            if self.checks.iter().any(|c| *c != Check::SequenceDiagnostics && *c != Check::QuasiFlatzoomer) {
                return Err(config(format!(
                    "checks: a `{SEQUENCE_FORMULA}` manifold supports only sequence-diagnostics and quasi-flatzoomer"
                )));
            }
            self.sequence_spec()?.limit_spec()
        } else {
            if self.checks.contains(&Check::SequenceDiagnostics) {
                return Err(config(format!("checks: sequence-diagnostics needs manifold.metric = \"{SEQUENCE_FORMULA}\"")));
            }
            self.manifold.clone()
        };
        let m = build_box_manifold::<f64>(&probe).map_err(|e| config(format!("manifold: {e}")))?;
        if self.checks.iter().any(|c| c.needs_solver()) {
            self.problems()?;
        }
        let o = &self.solver;
        if !(o.tol > 0.0) || o.max_iter == 0 || o.cg_max_iter == 0 {
            return Err(config("solver: tol, max_iter and cg_max_iter must be positive"));
        }
        if self.checks.contains(&Check::Harnack) {
            let h = &self.harnack;
            if !(h.radius > 0.0 && h.eps > 0.0 && h.max_drift > 0.0) {
                return Err(config("harnack: radius, eps and max_drift must be positive"));
            }
        }
        if self.checks.contains(&Check::FlatzoomerSweep) {
            let f = &self.flatzoomer;
            if f.shifts.len() < 2 || f.orders.is_empty() {
                return Err(config("flatzoomer: need at least two shifts and one order"));
            }
            let max = max_supported_k(&m);
            if let Some(k) = f.orders.iter().find(|k| **k > max) {
                return Err(config(format!("flatzoomer.orders: k = {k} exceeds the grid limit {max}")));
            }
        }
        if self.checks.contains(&Check::ExtensionRoundtrip) {
            if !m.has_boundary() {
                return Err(config("extension: the manifold has no boundary to extend across"));
            }
            let e = &self.extension;
            if e.order > satlab::extension::MAX_ORDER {
                return Err(config(format!("extension.order: at most {}", satlab::extension::MAX_ORDER)));
            }
            if !(e.depth > 0.0 && e.c > 0.0) {
                return Err(config("extension: depth and c must be positive"));
            }
        }
        Ok(())
    }
}
