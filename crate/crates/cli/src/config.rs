//! Campaign files.
//!
//! ```toml
//! [problem]
//! objective = "eggholder"            # ackley | eggholder | table
//! # table = "costs.csv"              # table objective only, relative to this file
//! variables = [{ lower = -512.0, upper = 512.0, count = 6, repeat = 16 }]
//!
//! [campaign]
//! runs = 20
//! budget = 140
//! master_seed = 7
//!
//! [method]                           # used by `run`
//! method = "bbo"
//! pop_size = 50
//! alpha = 0.9
//! mut_prob = 0.3
//! mut_step_size = 0.05
//! mut_step_size_damp = 0.99
//!
//! [grid]                             # used by `tune`
//! method = "pso"
//! preset = "desk"                    # table2 | desk
//! values = { swarm_size = [50, 100] }
//! ```
//!
//! Unknown keys anywhere are errors.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::Deserialize;
use tunelab_core::metrics::{DEFAULT_INTERVALS, DEFAULT_Z_L};
use tunelab_core::objectives::{load_table, ObjectiveSpec, PenaltyRule, DEFAULT_ORACLE_LIMIT};
use tunelab_core::optimizers::{Method, OptimizerConfig, DEFAULT_BUDGET};
use tunelab_core::space::{DiscreteSpace, IndexVector, ValueGrid};
use tunelab_core::tuner::{ParamValue, ParameterGrid, TuningSettings};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub problem: ProblemSection,
    #[serde(default)]
    pub campaign: CampaignSection,
    pub method: Option<OptimizerConfig>,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Ackley,
    Eggholder,
    Table,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub objective: ObjectiveKind,
    pub table: Option<PathBuf>,
    pub variables: Vec<VariableSpec>,
    pub penalty: Option<PenaltySection>,
}

/// One entry of `variables`: either `lower`/`upper`/`count`, explicit
/// `values`, or a bare `count` of indices. `repeat` copies the entry.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
    pub repeat: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub magnitude: f64,
    pub infeasible: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignSection {
    pub runs: usize,
    pub budget: usize,
    pub intervals: usize,
    pub z_l: f64,
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub strategy: u8,
    pub validation_runs: usize,
    pub oracle_limit: u64,
    pub drop_fraction: f64,
    pub fix_count: usize,
    pub success_tolerance: f64,
}

impl Default for CampaignSection {
    fn default() -> Self {
        let t = TuningSettings::default();
        Self {
            runs: t.runs,
            budget: DEFAULT_BUDGET,
            intervals: DEFAULT_INTERVALS,
            z_l: DEFAULT_Z_L,
            master_seed: 0,
            workers: None,
            out: None,
            strategy: 2,
            validation_runs: t.validation_runs,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            drop_fraction: t.drop_fraction,
            fix_count: t.fix_count,
            success_tolerance: t.success_tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Table2,
    Desk,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub method: Method,
    #[serde(default = "default_preset")]
    pub preset: Preset,
    #[serde(default)]
    pub values: BTreeMap<String, Vec<ParamValue>>,
}

fn default_preset() -> Preset {
    Preset::Table2
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub strategy: Option<u8>,
}

/// A fully validated campaign.
pub struct Campaign {
    pub spec: ObjectiveSpec,
    pub settings: TuningSettings,
    pub method: Option<OptimizerConfig>,
    pub grid: Option<ParameterGrid>,
    pub out: PathBuf,
    pub strategy: u8,
    pub oracle_limit: u64,
}

impl VariableSpec {
    fn grid(&self, k: usize) -> Result<ValueGrid> {
        let grid = match (self.lower, self.upper, self.count, &self.values) {
            (Some(lo), Some(hi), Some(count), None) => ValueGrid::linear(lo, hi, count)?,
            (None, None, None, Some(values)) => ValueGrid::explicit(values.clone())?,
            (None, None, Some(count), None) => ValueGrid::indices(count)?,
            _ => bail!("variables[{k}] needs either lower/upper/count, values, or count alone"),
        };
        Ok(grid)
    }
}

fn build_space(vars: &[VariableSpec]) -> Result<DiscreteSpace> {
    let mut grids = Vec::new();
    for (k, v) in vars.iter().enumerate() {
        let repeat = v.repeat.unwrap_or(1);
        ensure!(repeat >= 1, "variables[{k}].repeat must be >= 1");
        let grid = v.grid(k)?;
        grids.extend(std::iter::repeat_n(grid, repeat));
    }
    Ok(DiscreteSpace::new(grids)?)
}

fn build_objective(problem: &ProblemSection, base: &Path) -> Result<ObjectiveSpec> {
    let space = build_space(&problem.variables)?;
    let spec = match (problem.objective, &problem.table) {
        (ObjectiveKind::Ackley, None) => ObjectiveSpec::ackley(space),
        (ObjectiveKind::Eggholder, None) => ObjectiveSpec::eggholder(space)?,
        (ObjectiveKind::Table, Some(path)) => {
            let path = base.join(path);
            ensure!(
                path.is_file(),
                "table file {} does not exist",
                path.display()
            );
            load_table(&path, space)?
        }
        (ObjectiveKind::Table, None) => bail!("the table objective needs problem.table"),
        (_, Some(_)) => bail!("problem.table is only valid with objective = \"table\""),
    };
    match &problem.penalty {
        None => Ok(spec),
        Some(p) => {
            let infeasible: BTreeSet<IndexVector> = p
                .infeasible
                .iter()
                .cloned()
                .map(IndexVector::from)
                .collect();
            Ok(spec.with_penalty(PenaltyRule {
                magnitude: p.magnitude,
                infeasible,
            })?)
        }
    }
}

fn build_grid(section: &GridSection) -> Result<ParameterGrid> {
    let mut grid = match section.preset {
        Preset::Table2 => ParameterGrid::table2(section.method),
        Preset::Desk => ParameterGrid::desk(section.method),
    };
    for (name, values) in &section.values {
        grid = grid
            .with_values(name, values.clone())
            .with_context(|| format!("grid.values.{name}"))?;
    }
    Ok(grid)
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Campaign> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let file: CampaignFile =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));

    let spec = build_objective(&file.problem, base).context("[problem]")?;
    let c = &file.campaign;
    let settings = TuningSettings {
        runs: c.runs,
        budget: c.budget,
        intervals: c.intervals,
        z_l: c.z_l,
        master_seed: overrides.seed.unwrap_or(c.master_seed),
        workers: overrides
            .workers
            .or(c.workers)
            .unwrap_or(TuningSettings::default().workers),
        drop_fraction: c.drop_fraction,
        fix_count: c.fix_count,
        validation_runs: c.validation_runs,
        success_tolerance: c.success_tolerance,
    };
    settings.validate().context("[campaign]")?;
    let strategy = overrides.strategy.unwrap_or(c.strategy);
    ensure!(
        strategy == 1 || strategy == 2,
        "strategy must be 1 or 2, got {strategy}"
    );

    if let Some(m) = &file.method {
        m.validate().context("[method]")?;
    }
    let grid = file
        .grid
        .as_ref()
        .map(build_grid)
        .transpose()
        .context("[grid]")?;
    let out = overrides
        .out
        .clone()
        .or_else(|| c.out.as_ref().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from("results"));
    Ok(Campaign {
        spec,
        settings,
        method: file.method,
        grid,
        out,
        strategy,
        oracle_limit: c.oracle_limit,
    })
}
