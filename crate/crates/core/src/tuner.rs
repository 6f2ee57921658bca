//! Parameter grids, N-run assessments and the two tuning strategies.
//!
//! Strategy 1 assesses every configuration of a grid once and keeps the
//! lowest F_C. Strategy 2 runs three assessment phases:
//!
//! 0. the full grid;
//! 1. the grid with the most influential non-population parameters fixed at
//!    their best value;
//! 2. the phase-1 grid minus values whose group mean is clearly poor.
//!
//! Every phase draws fresh seeds, `derive(master, phase, config_index, run)`.
//! Validation uses the reserved phase [`VALIDATION_PHASE`].

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    five_number, interval_length, utility_fc, Apc, FiveNumber, UtilityReport, DEFAULT_INTERVALS,
    DEFAULT_Z_L,
};
use crate::objectives::ObjectiveSpec;
use crate::optimizers::{run, Method, OptimizerConfig, RunTrace, DEFAULT_BUDGET};
use crate::seed::{derive, VALIDATION_PHASE};

/// A candidate value of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(u64),
    Real(f64),
    Tag(String),
}

impl ParamValue {
    fn to_json(&self) -> serde_json::Value {
        match self {
            ParamValue::Int(v) => (*v).into(),
            ParamValue::Real(v) => (*v).into(),
            ParamValue::Tag(v) => v.clone().into(),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v:?}"),
            ParamValue::Tag(v) => f.write_str(v),
        }
    }
}

impl From<u64> for ParamValue {
    fn from(v: u64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Tag(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub values: Vec<ParamValue>,
}

/// Tunable parameters of a method, in table order.
pub fn parameter_names(method: Method) -> &'static [&'static str] {
    match method {
        Method::GaElitist => &[
            "pop_size",
            "ecount_fract",
            "cross_fract",
            "sel_fn",
            "cross_fn",
        ],
        Method::GaYpea => &[
            "pop_size",
            "cross_prob",
            "cross_infl",
            "mut_rate",
            "mut_step_size",
            "sel_press",
        ],
        Method::Pso => &["swarm_size", "min_fract_neigh", "self_adj", "social_adj"],
        Method::Bbo => &[
            "pop_size",
            "alpha",
            "mut_prob",
            "mut_step_size",
            "mut_step_size_damp",
        ],
    }
}

/// The parameter strategy 2 never fixes.
pub fn population_parameter(method: Method) -> &'static str {
    parameter_names(method)[0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    method: Method,
    params: Vec<Parameter>,
}

/// Ordered candidate lists for every parameter of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct ParameterGrid {
    method: Method,
    params: Vec<Parameter>,
}

impl TryFrom<RawGrid> for ParameterGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        ParameterGrid::new(raw.method, raw.params)
    }
}

fn ints(values: &[u64]) -> Vec<ParamValue> {
    values.iter().map(|&v| ParamValue::Int(v)).collect()
}

fn reals(values: &[f64]) -> Vec<ParamValue> {
    values.iter().map(|&v| ParamValue::Real(v)).collect()
}

fn tags(values: &[&str]) -> Vec<ParamValue> {
    values.iter().map(|&v| ParamValue::from(v)).collect()
}

impl ParameterGrid {
    pub fn new(method: Method, params: Vec<Parameter>) -> Result<Self> {
        let names = parameter_names(method);
        let got: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
        if got != names {
            return Err(Error::InvalidGrid(format!(
                "{method} grid needs parameters {names:?} in that order, got {got:?}"
            )));
        }
        for p in &params {
            if p.values.is_empty() {
                return Err(Error::InvalidGrid(format!("{} has no values", p.name)));
            }
            for (i, v) in p.values.iter().enumerate() {
                if p.values[..i].contains(v) {
                    return Err(Error::InvalidGrid(format!("{} lists {v} twice", p.name)));
                }
            }
        }
        let grid = Self { method, params };
        // every single value must produce a valid configuration
        let base = vec![0; grid.params.len()];
        for (k, p) in grid.params.iter().enumerate() {
            for i in 0..p.values.len() {
                let mut assignment = base.clone();
                assignment[k] = i;
                grid.build(&assignment).map_err(|e| {
                    Error::InvalidGrid(format!("{} = {}: {e}", p.name, p.values[i]))
                })?;
            }
        }
        Ok(grid)
    }

    /// The full default grid for a method.
    pub fn table2(method: Method) -> Self {
        let lists = match method {
            Method::GaElitist => vec![
                ints(&[50, 100, 150, 200]),
                reals(&[0.05, 0.10, 0.15, 0.20]),
                reals(&[0.70, 0.80, 0.90, 1.00]),
                tags(&[
                    "stochunif",
                    "remainder",
                    "uniform",
                    "roulette",
                    "tournament",
                ]),
                tags(&[
                    "scattered",
                    "intermediate",
                    "heuristic",
                    "singlepoint",
                    "twopoints",
                    "arithmetic",
                ]),
            ],
            Method::GaYpea => vec![
                ints(&[50, 100, 150, 200]),
                reals(&[0.60, 0.70, 0.80, 0.90]),
                reals(&[0.10, 0.20, 0.30, 0.40]),
                reals(&[0.10, 0.20, 0.30, 0.40]),
                reals(&[0.05, 0.10, 0.15, 0.20]),
                ints(&[1, 3, 5]),
            ],
            Method::Pso => vec![
                ints(&[50, 100, 150, 200]),
                reals(&[0.10, 0.20, 0.30, 0.40]),
                reals(&[0.50, 1.00, 1.49, 1.99]),
                reals(&[0.50, 1.00, 1.49, 1.99]),
            ],
            Method::Bbo => vec![
                ints(&[50, 80, 100, 120, 140]),
                reals(&[0.90, 0.95, 0.99]),
                reals(&[0.30, 0.40, 0.50]),
                reals(&[0.025, 0.050, 0.075, 0.100]),
                reals(&[0.99, 1.00, 1.01, 1.02]),
            ],
        };
        let params = parameter_names(method)
            .iter()
            .zip(lists)
            .map(|(name, values)| Parameter {
                name: name.to_string(),
                values,
            })
            .collect();
        Self::new(method, params).expect("default grid is valid")
    }

    /// Every other value of the default grid, starting with the first.
    pub fn desk(method: Method) -> Self {
        let mut grid = Self::table2(method);
        for p in &mut grid.params {
            p.values = p.values.iter().step_by(2).cloned().collect();
        }
        grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn parameter(&self, name: &str) -> Result<(usize, &Parameter)> {
        self.params
            .iter()
            .enumerate()
            .find(|(_, p)| p.name == name)
            .ok_or_else(|| Error::InvalidGrid(format!("{} has no parameter {name}", self.method)))
    }

    /// Copy with the candidate list of `name` replaced.
    pub fn with_values(&self, name: &str, values: Vec<ParamValue>) -> Result<Self> {
        let (k, _) = self.parameter(name)?;
        let mut params = self.params.clone();
        params[k].values = values;
        Self::new(self.method, params)
    }

    pub fn cardinality(&self) -> usize {
        self.params.iter().map(|p| p.values.len()).product()
    }

    /// Value positions of configuration `index`; the last parameter varies fastest.
    pub fn assignment(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        let mut out = vec![0; self.params.len()];
        for (k, p) in self.params.iter().enumerate().rev() {
            out[k] = rest % p.values.len();
            rest /= p.values.len();
        }
        out
    }

    pub fn config_at(&self, index: usize) -> Result<OptimizerConfig> {
        if index >= self.cardinality() {
            return Err(Error::InvalidGrid(format!(
                "config index {index} out of range for {} configs",
                self.cardinality()
            )));
        }
        self.build(&self.assignment(index))
    }

    fn build(&self, assignment: &[usize]) -> Result<OptimizerConfig> {
        let mut map = serde_json::Map::new();
        map.insert("method".into(), self.method.name().into());
        for (p, &i) in self.params.iter().zip(assignment) {
            map.insert(p.name.clone(), p.values[i].to_json());
        }
        let config: OptimizerConfig =
            serde_json::from_value(map.into()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

/// Cartesian product of the grid, last parameter fastest.
pub fn enumerate_grid(grid: &ParameterGrid) -> Result<Vec<OptimizerConfig>> {
    (0..grid.cardinality()).map(|i| grid.config_at(i)).collect()
}

/// Campaign constants shared by every assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSettings {
    pub runs: usize,
    pub budget: usize,
    pub intervals: usize,
    pub z_l: f64,
    pub master_seed: u64,
    /// Worker threads; never part of a report.
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
    pub drop_fraction: f64,
    pub fix_count: usize,
    pub validation_runs: usize,
    pub success_tolerance: f64,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for TuningSettings {
    fn default() -> Self {
        Self {
            runs: 20,
            budget: DEFAULT_BUDGET,
            intervals: DEFAULT_INTERVALS,
            z_l: DEFAULT_Z_L,
            master_seed: 0,
            workers: default_workers(),
            drop_fraction: 0.25,
            fix_count: 2,
            validation_runs: 50,
            success_tolerance: 1e-9,
        }
    }
}

impl TuningSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if self.validation_runs == 0 {
            return bad("validation_runs must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        interval_length(self.budget, self.intervals)?;
        if !(self.z_l >= 1.0 && self.z_l.is_finite()) {
            return bad(format!("Z_l must be >= 1, got {}", self.z_l));
        }
        if !(0.0..=1.0).contains(&self.drop_fraction) {
            return bad(format!(
                "drop_fraction must lie in [0, 1], got {}",
                self.drop_fraction
            ));
        }
        if self.success_tolerance.is_nan() || self.success_tolerance < 0.0 {
            return bad(format!(
                "success_tolerance must be >= 0, got {}",
                self.success_tolerance
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config_index: usize,
    pub config: OptimizerConfig,
    pub utility: UtilityReport,
    pub apc: Apc,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterInfluence {
    pub parameter: String,
    /// Mean F_C per candidate value, in grid order.
    pub group_means: Vec<f64>,
    pub influence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixDecision {
    pub parameter: String,
    pub value: ParamValue,
    pub influence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropDecision {
    pub parameter: String,
    pub value: ParamValue,
    pub group_mean: f64,
    pub threshold: f64,
}

/// One assessment phase. `fixed` and `dropped` are the decisions taken from
/// this phase's results and applied to the next phase's grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub phase: u64,
    pub grid: ParameterGrid,
    pub results: Vec<ConfigResult>,
    pub fc_summary: FiveNumber,
    pub influence: Vec<ParameterInfluence>,
    pub fixed: Vec<FixDecision>,
    pub dropped: Vec<DropDecision>,
    pub best_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub runs: usize,
    pub final_fitness: FiveNumber,
    pub mean_final_fitness: f64,
    pub utility: UtilityReport,
    pub optimum: Option<f64>,
    pub tolerance: f64,
    pub success_rate: Option<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub strategy: u8,
    pub method: Method,
    pub objective: String,
    pub settings: TuningSettings,
    pub phases: Vec<PhaseResult>,
    pub best: ConfigResult,
    pub validation: Option<ValidationSummary>,
    /// Optimizer runs executed for this report, validation included.
    pub total_runs: u64,
}

impl TuningReport {
    /// `sum over phases of |grid| * N`, plus the validation runs.
    pub fn expected_runs(&self) -> u64 {
        let phases: usize = self
            .phases
            .iter()
            .map(|p| p.grid.cardinality() * self.settings.runs)
            .sum();
        (phases + self.validation.as_ref().map_or(0, |v| v.runs)) as u64
    }

    pub fn final_phase(&self) -> &PhaseResult {
        self.phases.last().expect("a report has at least one phase")
    }

    /// Errors if two runs anywhere in the report shared a seed.
    pub fn check_seeds(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let phase_seeds = self
            .phases
            .iter()
            .flat_map(|p| p.results.iter())
            .flat_map(|r| &r.seeds);
        let validation_seeds = self.validation.iter().flat_map(|v| &v.seeds);
        for &s in phase_seeds.chain(validation_seeds) {
            if !seen.insert(s) {
                return Err(Error::SeedCollision(s));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.into()))
    }

    /// One row per configuration per phase.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let names = parameter_names(self.method);
        writeln!(out, "phase,config_index,{},F_C,F_A,F_B", names.join(","))?;
        for phase in &self.phases {
            for r in &phase.results {
                let values: Vec<String> = phase
                    .grid
                    .assignment(r.config_index)
                    .iter()
                    .zip(phase.grid.params())
                    .map(|(&i, p)| p.values[i].to_string())
                    .collect();
                writeln!(
                    out,
                    "{},{},{},{:?},{:?},{:?}",
                    phase.phase,
                    r.config_index,
                    values.join(","),
                    r.utility.f_c,
                    r.utility.f_a,
                    r.utility.f_b
                )?;
            }
        }
        Ok(())
    }
}

/// Lowest F_C, ties to the lowest position.
pub fn argmin_fc(results: &[ConfigResult]) -> Option<usize> {
    results
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.utility
                .f_c
                .total_cmp(&b.1.utility.f_c)
                .then(a.0.cmp(&b.0))
        })
        .map(|(i, _)| i)
}

/// Mean F_C of the results sharing each value of `parameter`.
pub fn group_means(
    grid: &ParameterGrid,
    results: &[ConfigResult],
    parameter: &str,
) -> Result<Vec<f64>> {
    let (k, p) = grid.parameter(parameter)?;
    if results.len() != grid.cardinality() {
        return Err(Error::InvalidGrid(format!(
            "{} results do not cover the {} configs of the grid",
            results.len(),
            grid.cardinality()
        )));
    }
    let mut sums = vec![0.0; p.values.len()];
    let mut counts = vec![0usize; p.values.len()];
    for r in results {
        let i = grid.assignment(r.config_index)[k];
        sums[i] += r.utility.f_c;
        counts[i] += 1;
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect())
}

/// Range of the group means of `parameter`.
pub fn influence(grid: &ParameterGrid, results: &[ConfigResult], parameter: &str) -> Result<f64> {
    Ok(spread(&group_means(grid, results, parameter)?))
}

fn spread(means: &[f64]) -> f64 {
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn argmin(values: &[f64]) -> usize {
    (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("non-empty")
}

/// The `fix_count` most influential parameters other than the population
/// size, each fixed at its best group mean. Single-valued parameters are
/// never candidates.
pub fn choose_fixes(
    grid: &ParameterGrid,
    influence: &[ParameterInfluence],
    fix_count: usize,
) -> Vec<FixDecision> {
    let pop = population_parameter(grid.method());
    let mut candidates: Vec<(&ParameterInfluence, &Parameter)> = influence
        .iter()
        .zip(grid.params())
        .filter(|(_, p)| p.name != pop && p.values.len() >= 2)
        .collect();
    // stable: equal influence keeps table order
    candidates.sort_by(|a, b| b.0.influence.total_cmp(&a.0.influence));
    candidates
        .into_iter()
        .take(fix_count)
        .map(|(inf, p)| FixDecision {
            parameter: p.name.clone(),
            value: p.values[argmin(&inf.group_means)].clone(),
            influence: inf.influence,
        })
        .collect()
}

pub fn apply_fixes(grid: &ParameterGrid, fixes: &[FixDecision]) -> Result<ParameterGrid> {
    fixes.iter().try_fold(grid.clone(), |g, f| {
        g.with_values(&f.parameter, vec![f.value.clone()])
    })
}

/// Values whose group mean exceeds `best + drop_fraction * (worst - best)`.
/// The two best values of every parameter are always kept.
pub fn choose_drops(
    grid: &ParameterGrid,
    influence: &[ParameterInfluence],
    drop_fraction: f64,
) -> Vec<DropDecision> {
    let mut dropped = Vec::new();
    for (inf, p) in influence.iter().zip(grid.params()) {
        let means = &inf.group_means;
        if means.len() <= 2 {
            continue;
        }
        let mut order: Vec<usize> = (0..means.len()).collect();
        order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
        let best = means[order[0]];
        let worst = means[order[order.len() - 1]];
        let threshold = best + drop_fraction * (worst - best);
        for (i, &m) in means.iter().enumerate() {
            if m > threshold && !order[..2].contains(&i) {
                dropped.push(DropDecision {
                    parameter: p.name.clone(),
                    value: p.values[i].clone(),
                    group_mean: m,
                    threshold,
                });
            }
        }
    }
    dropped
}

pub fn apply_drops(grid: &ParameterGrid, drops: &[DropDecision]) -> Result<ParameterGrid> {
    let mut out = grid.clone();
    for p in grid.params() {
        let kept: Vec<ParamValue> = p
            .values
            .iter()
            .filter(|v| {
                !drops
                    .iter()
                    .any(|d| d.parameter == p.name && &d.value == *v)
            })
            .cloned()
            .collect();
        if kept.len() != p.values.len() {
            out = out.with_values(&p.name, kept)?;
        }
    }
    Ok(out)
}

/// Runs assessments on a bounded worker pool and counts every run it executes.
pub struct Tuner<'a> {
    spec: &'a ObjectiveSpec,
    settings: TuningSettings,
    pool: rayon::ThreadPool,
    runs_executed: AtomicU64,
}

impl<'a> Tuner<'a> {
    pub fn new(spec: &'a ObjectiveSpec, settings: TuningSettings) -> Result<Self> {
        settings.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            spec,
            settings,
            pool,
            runs_executed: AtomicU64::new(0),
        })
    }

    pub fn settings(&self) -> &TuningSettings {
        &self.settings
    }

    pub fn runs_executed(&self) -> u64 {
        self.runs_executed.load(Ordering::Relaxed)
    }

    fn seed(&self, phase: u64, config_index: usize, run_index: usize) -> u64 {
        derive(
            self.settings.master_seed,
            phase,
            config_index as u64,
            run_index as u64,
        )
    }

    /// Runs every `(job, run)` pair, returning traces grouped per job in order.
    /// `indices` are the config indices reported in run errors.
    fn run_jobs(
        &self,
        configs: &[OptimizerConfig],
        indices: &[usize],
        seeds: &[Vec<u64>],
    ) -> Result<Vec<Vec<RunTrace>>> {
        let jobs: Vec<(usize, usize)> = seeds
            .iter()
            .enumerate()
            .flat_map(|(c, s)| (0..s.len()).map(move |r| (c, r)))
            .collect();
        let traces: Vec<Result<RunTrace>> = self.pool.install(|| {
            jobs.par_iter()
                .map(|&(c, r)| {
                    self.runs_executed.fetch_add(1, Ordering::Relaxed);
                    run(&configs[c], self.spec, self.settings.budget, seeds[c][r]).map_err(|e| {
                        Error::Run {
                            config_index: indices[c],
                            run_index: r,
                            source: Box::new(e),
                        }
                    })
                })
                .collect()
        });
        let mut grouped: Vec<Vec<RunTrace>> =
            seeds.iter().map(|s| Vec::with_capacity(s.len())).collect();
        for ((c, _), t) in jobs.into_iter().zip(traces) {
            grouped[c].push(t?);
        }
        Ok(grouped)
    }

    fn summarize(
        &self,
        config_index: usize,
        config: OptimizerConfig,
        traces: &[RunTrace],
        seeds: Vec<u64>,
    ) -> Result<ConfigResult> {
        let apc = Apc::from_traces(traces)?;
        let utility = utility_fc(&apc, self.settings.intervals, self.settings.z_l)?;
        Ok(ConfigResult {
            config_index,
            config,
            utility,
            apc,
            seeds,
        })
    }

    /// N-run assessment of one configuration.
    pub fn assess(
        &self,
        config: &OptimizerConfig,
        config_index: usize,
        phase: u64,
    ) -> Result<ConfigResult> {
        Ok(self.assess_with_traces(config, config_index, phase)?.0)
    }

    /// Like [`Tuner::assess`], also returning the individual run traces.
    pub fn assess_with_traces(
        &self,
        config: &OptimizerConfig,
        config_index: usize,
        phase: u64,
    ) -> Result<(ConfigResult, Vec<RunTrace>)> {
        config.validate()?;
        let seeds: Vec<u64> = (0..self.settings.runs)
            .map(|r| self.seed(phase, config_index, r))
            .collect();
        let traces = self
            .run_jobs(
                std::slice::from_ref(config),
                &[config_index],
                std::slice::from_ref(&seeds),
            )?
            .pop()
            .unwrap_or_default();
        let result = self.summarize(config_index, config.clone(), &traces, seeds)?;
        Ok((result, traces))
    }

    /// Assesses every configuration of `grid` with the seeds of `phase`.
    pub fn assess_grid(&self, grid: &ParameterGrid, phase: u64) -> Result<Vec<ConfigResult>> {
        let configs = enumerate_grid(grid)?;
        let seeds: Vec<Vec<u64>> = (0..configs.len())
            .map(|c| {
                (0..self.settings.runs)
                    .map(|r| self.seed(phase, c, r))
                    .collect()
            })
            .collect();
        let indices: Vec<usize> = (0..configs.len()).collect();
        let traces = self.run_jobs(&configs, &indices, &seeds)?;
        configs
            .into_iter()
            .zip(traces)
            .zip(seeds)
            .enumerate()
            .map(|(c, ((config, traces), seeds))| self.summarize(c, config, &traces, seeds))
            .collect()
    }

    fn phase(&self, grid: &ParameterGrid, phase: u64) -> Result<PhaseResult> {
        let results = self.assess_grid(grid, phase)?;
        let fcs: Vec<f64> = results.iter().map(|r| r.utility.f_c).collect();
        let influence = grid
            .params()
            .iter()
            .map(|p| {
                let group_means = group_means(grid, &results, &p.name)?;
                Ok(ParameterInfluence {
                    parameter: p.name.clone(),
                    influence: spread(&group_means),
                    group_means,
                })
            })
            .collect::<Result<_>>()?;
        Ok(PhaseResult {
            phase,
            grid: grid.clone(),
            fc_summary: five_number(&fcs)?,
            best_index: argmin_fc(&results).expect("grids are non-empty"),
            results,
            influence,
            fixed: Vec::new(),
            dropped: Vec::new(),
        })
    }

    fn report(
        &self,
        strategy: u8,
        grid: &ParameterGrid,
        phases: Vec<PhaseResult>,
        start: u64,
    ) -> Result<TuningReport> {
        let last = phases.last().expect("at least one phase");
        let report = TuningReport {
            strategy,
            method: grid.method(),
            objective: self.spec.label(),
            settings: self.settings.clone(),
            best: last.results[last.best_index].clone(),
            phases,
            validation: None,
            total_runs: self.runs_executed() - start,
        };
        report.check_seeds()?;
        Ok(report)
    }

    /// Strategy 1: the best F_C of a single full-grid assessment.
    pub fn strategy1(&self, grid: &ParameterGrid) -> Result<TuningReport> {
        let start = self.runs_executed();
        let phase = self.phase(grid, 0)?;
        self.report(1, grid, vec![phase], start)
    }

    /// Strategy 2: full grid, then fix the most influential parameters, then
    /// drop clearly poor values, re-assessing with fresh seeds each time.
    pub fn strategy2(&self, grid: &ParameterGrid) -> Result<TuningReport> {
        let start = self.runs_executed();

        let mut phase0 = self.phase(grid, 0)?;
        phase0.fixed = choose_fixes(grid, &phase0.influence, self.settings.fix_count);
        let grid1 = apply_fixes(grid, &phase0.fixed)?;

        let mut phase1 = self.phase(&grid1, 1)?;
        phase1.dropped = choose_drops(&grid1, &phase1.influence, self.settings.drop_fraction);
        let grid2 = apply_drops(&grid1, &phase1.dropped)?;

        let phase2 = self.phase(&grid2, 2)?;
        self.report(2, grid, vec![phase0, phase1, phase2], start)
    }

    /// Fresh-seed validation of one configuration.
    pub fn validate(
        &self,
        config: &OptimizerConfig,
        optimum: Option<f64>,
    ) -> Result<ValidationSummary> {
        config.validate()?;
        let runs = self.settings.validation_runs;
        let seeds: Vec<u64> = (0..runs)
            .map(|r| self.seed(VALIDATION_PHASE, 0, r))
            .collect();
        let traces = self
            .run_jobs(
                std::slice::from_ref(config),
                &[0],
                std::slice::from_ref(&seeds),
            )?
            .pop()
            .unwrap_or_default();
        let finals: Vec<f64> = traces
            .iter()
            .map(|t| t.best[self.settings.budget])
            .collect();
        let apc = Apc::from_traces(&traces)?;
        let tolerance = self.settings.success_tolerance;
        let success_rate = optimum.map(|opt| {
            finals
                .iter()
                .filter(|&&f| (f - opt).abs() <= tolerance)
                .count() as f64
                / runs as f64
        });
        Ok(ValidationSummary {
            runs,
            final_fitness: five_number(&finals)?,
            mean_final_fitness: finals.iter().sum::<f64>() / runs as f64,
            utility: utility_fc(&apc, self.settings.intervals, self.settings.z_l)?,
            optimum,
            tolerance,
            success_rate,
            seeds,
        })
    }

    /// Validates the report's best configuration and records it in the report.
    pub fn attach_validation(&self, report: &mut TuningReport, optimum: Option<f64>) -> Result<()> {
        let start = self.runs_executed();
        report.validation = Some(self.validate(&report.best.config, optimum)?);
        report.total_runs += self.runs_executed() - start;
        report.check_seeds()
    }
}

pub fn tune_strategy1(
    grid: &ParameterGrid,
    spec: &ObjectiveSpec,
    settings: TuningSettings,
) -> Result<TuningReport> {
    Tuner::new(spec, settings)?.strategy1(grid)
}

pub fn tune_strategy2(
    grid: &ParameterGrid,
    spec: &ObjectiveSpec,
    settings: TuningSettings,
) -> Result<TuningReport> {
    Tuner::new(spec, settings)?.strategy2(grid)
}

pub fn validate(
    config: &OptimizerConfig,
    spec: &ObjectiveSpec,
    settings: TuningSettings,
    optimum: Option<f64>,
) -> Result<ValidationSummary> {
    Tuner::new(spec, settings)?.validate(config, optimum)
}
