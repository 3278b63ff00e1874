//! Reproducible experiments driven by JSON scenario files.
//!
//! A [`Scenario`] names an operation, the spaces and rays it runs on, its
//! parameters, a seed and tolerances. Running it produces a [`Report`] with
//! one row per evaluation and a summary of named checks; the report is
//! written as JSON next to a CSV of its rows. The seed determines every
//! random draw, and parallel work is collected in index order, so the same
//! scenario always produces the same bytes.

mod ops;
mod templates;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::boundary_metrics::{BoundaryConfig, GeodesicRay};
use crate::error::{Error, Result};
use crate::rescaling::ScheduleSpec;
use crate::sampling::random_tree;
use crate::space_models::{MetricTree, SpaceModel, TreeDescription, VertexLabel};

pub use templates::{list_scenarios, template, TemplateInfo};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    MetricAudit,
    SineFormula,
    SeaweedTits,
    ConeConverge,
    ThetaCommute,
    CollapseSchedule,
    ScaleLattice,
    SpiralSweep,
    SeaweedPushforward,
    MorseProbe,
    HausdorffBound,
    CutPoint,
    SeaweedOracle,
}

impl Operation {
    pub const ALL: [Operation; 13] = [
        Operation::MetricAudit,
        Operation::SineFormula,
        Operation::SeaweedTits,
        Operation::ConeConverge,
        Operation::ThetaCommute,
        Operation::CollapseSchedule,
        Operation::ScaleLattice,
        Operation::SpiralSweep,
        Operation::SeaweedPushforward,
        Operation::MorseProbe,
        Operation::HausdorffBound,
        Operation::CutPoint,
        Operation::SeaweedOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::MetricAudit => "metric-audit",
            Operation::SineFormula => "sine-formula",
            Operation::SeaweedTits => "seaweed-tits",
            Operation::ConeConverge => "cone-converge",
            Operation::ThetaCommute => "theta-commute",
            Operation::CollapseSchedule => "collapse-schedule",
            Operation::ScaleLattice => "scale-lattice",
            Operation::SpiralSweep => "spiral-sweep",
            Operation::SeaweedPushforward => "seaweed-pushforward",
            Operation::MorseProbe => "morse-probe",
            Operation::HausdorffBound => "hausdorff-bound",
            Operation::CutPoint => "cut-point",
            Operation::SeaweedOracle => "seaweed-oracle",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operation::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::param("operation", format!("unknown operation `{s}`")))
    }
}

/// Space description inside a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean {
        dimension: usize,
    },
    Tree {
        tree: TreeDescription,
    },
    /// A fresh random tree per instance, drawn from the scenario seed.
    RandomTree {
        #[serde(default = "default_max_vertices")]
        max_vertices: usize,
    },
    /// Unit path `0 - 1 - … - teeth` with a unit branch at every vertex and
    /// a second one at the far end.
    Comb {
        teeth: usize,
    },
    Seaweed,
    Product {
        left: Box<SpaceSpec>,
        right: Box<SpaceSpec>,
    },
}

fn default_max_vertices() -> usize {
    64
}

/// Coarse model family of a space, used to choose per-model behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ModelKind {
    Euclidean,
    Tree,
    Seaweed,
    Product,
}

impl SpaceSpec {
    pub(crate) fn kind(&self) -> ModelKind {
        match self {
            SpaceSpec::Euclidean { .. } => ModelKind::Euclidean,
            SpaceSpec::Tree { .. } | SpaceSpec::RandomTree { .. } | SpaceSpec::Comb { .. } => ModelKind::Tree,
            SpaceSpec::Seaweed => ModelKind::Seaweed,
            SpaceSpec::Product { .. } => ModelKind::Product,
        }
    }

    pub(crate) fn label(&self) -> String {
        match self {
            SpaceSpec::Euclidean { dimension } => format!("euclidean{dimension}"),
            SpaceSpec::Tree { .. } => "tree".into(),
            SpaceSpec::RandomTree { .. } => "random_tree".into(),
            SpaceSpec::Comb { teeth } => format!("comb{teeth}"),
            SpaceSpec::Seaweed => "seaweed".into(),
            SpaceSpec::Product { left, right } => format!("product({},{})", left.label(), right.label()),
        }
    }

    /// Whether instantiating the space consumes randomness.
    pub(crate) fn is_random(&self) -> bool {
        match self {
            SpaceSpec::RandomTree { .. } => true,
            SpaceSpec::Product { left, right } => left.is_random() || right.is_random(),
            _ => false,
        }
    }

    pub fn instantiate(&self, rng: &mut ChaCha8Rng) -> Result<SpaceModel> {
        match self {
            SpaceSpec::Euclidean { dimension } => {
                if *dimension == 0 {
                    return Err(Error::param("dimension", "must be at least 1"));
                }
                Ok(SpaceModel::euclidean(*dimension))
            }
            SpaceSpec::Tree { tree } => Ok(SpaceModel::tree(MetricTree::from_description(tree)?)),
            SpaceSpec::RandomTree { max_vertices } => Ok(SpaceModel::tree(random_tree(rng, *max_vertices)?)),
            SpaceSpec::Comb { teeth } => Ok(SpaceModel::tree(comb(*teeth, 1.0)?)),
            SpaceSpec::Seaweed => Ok(SpaceModel::seaweed()),
            SpaceSpec::Product { left, right } => {
                Ok(SpaceModel::product(left.instantiate(rng)?, right.instantiate(rng)?))
            }
        }
    }
}

/// Path `0 - 1 - … - n` with edges of length `step`, a unit branch at every
/// vertex and a second branch at `n`. Branch `k < n + 1` leaves at vertex
/// `k`; branches `n` and `n + 1` share the whole path.
pub(crate) fn comb(n: usize, step: f64) -> Result<MetricTree> {
    if n == 0 {
        return Err(Error::param("teeth", "must be at least 1"));
    }
    let mut branches: Vec<(usize, Vec<f64>)> = (0..=n).map(|k| (k, vec![1.0])).collect();
    branches.push((n, vec![1.0]));
    MetricTree::new(
        (0..=n as i64).map(VertexLabel::Int).collect(),
        (0..n).map(|k| (k, k + 1, step)).collect(),
        0,
        Some(branches),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spaces: Vec<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rays: Vec<GeodesicRay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::param(
                "schema_version",
                format!("unsupported scenario schema {} (expected {SCHEMA_VERSION})", s.schema_version),
            ));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Options that do not belong to the scenario file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Convergence tolerance used when the scenario does not set
    /// `tolerances.convergence`.
    pub default_tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub index: usize,
    pub label: String,
    pub x: f64,
    pub value: f64,
    pub aux: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub cat0_core: String,
    pub report_schema: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub versions: Versions,
    pub scenario: Scenario,
    pub status: Status,
    pub summary: Vec<Check>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.summary.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn rows_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `report.json` and `rows.csv` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("rows.csv"), self.rows_csv()?)?;
        Ok(())
    }
}

/// Accumulates rows and checks while an operation runs.
#[derive(Default)]
pub(crate) struct Outcome {
    rows: Vec<Row>,
    checks: Vec<Check>,
}

impl Outcome {
    pub(crate) fn row(&mut self, label: impl Into<String>, x: f64, value: f64, aux: f64, pass: bool) {
        let index = self.rows.len();
        self.rows.push(Row { index, label: label.into(), x, value, aux, pass });
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }
}

/// Everything an operation needs besides its own parameters.
pub(crate) struct Context<'a> {
    pub scenario: &'a Scenario,
    pub rng: ChaCha8Rng,
    pub cfg: BoundaryConfig,
}

impl Context<'_> {
    /// Operation parameters, with unknown keys rejected.
    pub(crate) fn params<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(serde_json::Value::Object(self.scenario.params.clone()))
            .map_err(|e| Error::Parse(format!("params: {e}")))
    }

    pub(crate) fn tol(&self, name: &str, default: f64) -> f64 {
        self.scenario.tolerances.get(name).copied().unwrap_or(default)
    }

    pub(crate) fn spaces(&self) -> Result<&[SpaceSpec]> {
        if self.scenario.spaces.is_empty() {
            return Err(Error::param("spaces", format!("{} needs at least one space", self.scenario.operation)));
        }
        Ok(&self.scenario.spaces)
    }
}

fn context(scenario: &Scenario, opts: RunOptions) -> Result<Context<'_>> {
    let mut cfg = BoundaryConfig::default();
    if let Some(t) = scenario.tolerances.get("convergence").copied().or(opts.default_tolerance) {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("tolerance", format!("{t} must be positive")));
        }
        cfg.tolerance = t;
    }
    for (name, value) in &scenario.tolerances {
        if !(*value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tolerances",
                reason: format!("`{name}` = {value} must be a non-negative number"),
            });
        }
    }
    Ok(Context { scenario, rng: ChaCha8Rng::seed_from_u64(scenario.seed), cfg })
}

/// Runs a scenario and assembles its report. Invalid scenarios and
/// operations that cannot run are errors; failed properties are recorded
/// in the report.
pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> Result<Report> {
    let mut ctx = context(scenario, opts)?;
    ops::validate_params(&ctx)?;
    let mut outcome = ops::run(&mut ctx)?;
    let failing = outcome.rows.iter().filter(|r| !r.pass).count();
    outcome.check(
        "row assertions",
        failing == 0,
        format!("{} of {} rows hold", outcome.rows.len() - failing, outcome.rows.len()),
    );
    Ok(assemble(scenario, outcome))
}

/// Report for a run that stopped on a numerical failure.
pub fn failure_report(scenario: &Scenario, err: &Error) -> Report {
    let mut outcome = Outcome::default();
    outcome.check("run", false, err.to_string());
    assemble(scenario, outcome)
}

fn assemble(scenario: &Scenario, outcome: Outcome) -> Report {
    let pass = outcome.checks.iter().all(|c| c.pass);
    Report {
        schema_version: SCHEMA_VERSION,
        versions: Versions { cat0_core: env!("CARGO_PKG_VERSION").into(), report_schema: SCHEMA_VERSION },
        scenario: scenario.clone(),
        status: if pass { Status::Pass } else { Status::Fail },
        summary: outcome.checks,
        rows: outcome.rows,
    }
}

/// Checks a scenario against the schema without running it: the operation
/// parameters parse, the tolerances are valid, and every space, ray and
/// schedule is well formed.
pub fn validate_scenario(scenario: &Scenario, opts: RunOptions) -> Result<()> {
    let mut ctx = context(scenario, opts)?;
    ops::validate_params(&ctx)?;
    for spec in &scenario.spaces {
        spec.instantiate(&mut ctx.rng)?;
    }
    if let Some(s) = &scenario.schedule {
        s.values()?;
    }
    Ok(())
}
