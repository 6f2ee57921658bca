//! Population-based optimizers over a discrete space.
//!
//! All four methods share the index-space [`Genotype`] encoding, evaluate the
//! snapped solution of every genotype they create and report a best-so-far
//! [`RunTrace`] with one entry per iteration (entry 0 is the initial population).

mod bbo;
mod ga_elitist;
mod ga_ypea;
mod pso;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::ObjectiveSpec;
use crate::seed::rng_from_seed;
use crate::space::{Genotype, IndexVector};

pub use bbo::{bbo_sigma, bbo_step, migrate, rates, BboState};
pub use ga_elitist::{
    crossover_elitist, ga_elitist_counts, ga_elitist_step, mutation_scale, rank_expectations,
    select, SelectionParams,
};
pub use ga_ypea::{blend, blend_alpha, ga_ypea_counts, ga_ypea_step, selection_probabilities};
pub use pso::{initial_neighborhood, pso_step, velocity_update, PsoState, INERTIA_RANGE};

pub const DEFAULT_BUDGET: usize = 140;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelFn {
    Stochunif,
    Remainder,
    Uniform,
    Roulette,
    Tournament,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossFn {
    Scattered,
    Intermediate,
    Heuristic,
    #[serde(alias = "sinpoint")]
    Singlepoint,
    Twopoints,
    Arithmetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaElitistParams {
    pub pop_size: usize,
    pub ecount_fract: f64,
    pub cross_fract: f64,
    pub sel_fn: SelFn,
    pub cross_fn: CrossFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaYpeaParams {
    pub pop_size: usize,
    pub cross_prob: f64,
    pub cross_infl: f64,
    pub mut_rate: f64,
    pub mut_step_size: f64,
    pub sel_press: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub min_fract_neigh: f64,
    pub self_adj: f64,
    pub social_adj: f64,
}

/// Fraction of the previous habitats that survive each BBO iteration.
pub const BBO_KEEP_RATE: f64 = 0.2;

fn default_keep_rate() -> f64 {
    BBO_KEEP_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BboParams {
    pub pop_size: usize,
    pub alpha: f64,
    pub mut_prob: f64,
    pub mut_step_size: f64,
    pub mut_step_size_damp: f64,
    #[serde(default = "default_keep_rate")]
    pub keep_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GaElitist,
    GaYpea,
    Pso,
    Bbo,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::GaElitist, Method::GaYpea, Method::Pso, Method::Bbo];

    pub fn name(self) -> &'static str {
        match self {
            Method::GaElitist => "ga_elitist",
            Method::GaYpea => "ga_ypea",
            Method::Pso => "pso",
            Method::Bbo => "bbo",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OptimizerConfig {
    GaElitist(GaElitistParams),
    GaYpea(GaYpeaParams),
    Pso(PsoParams),
    Bbo(BboParams),
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(what()))
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    check((0.0..=1.0).contains(&v), || {
        format!("{name} must lie in [0, 1], got {v}")
    })
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v >= 0.0, || {
        format!("{name} must be >= 0, got {v}")
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v > 0.0, || {
        format!("{name} must be > 0, got {v}")
    })
}

fn population(name: &str, v: usize) -> Result<()> {
    check(v >= 2, || format!("{name} must be >= 2, got {v}"))
}

impl OptimizerConfig {
    pub fn method(&self) -> Method {
        match self {
            OptimizerConfig::GaElitist(_) => Method::GaElitist,
            OptimizerConfig::GaYpea(_) => Method::GaYpea,
            OptimizerConfig::Pso(_) => Method::Pso,
            OptimizerConfig::Bbo(_) => Method::Bbo,
        }
    }

    pub fn population_size(&self) -> usize {
        match self {
            OptimizerConfig::GaElitist(p) => p.pop_size,
            OptimizerConfig::GaYpea(p) => p.pop_size,
            OptimizerConfig::Pso(p) => p.swarm_size,
            OptimizerConfig::Bbo(p) => p.pop_size,
        }
    }

    /// First value of every default tuning list.
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::GaElitist => OptimizerConfig::GaElitist(GaElitistParams {
                pop_size: 50,
                ecount_fract: 0.05,
                cross_fract: 0.7,
                sel_fn: SelFn::Stochunif,
                cross_fn: CrossFn::Scattered,
            }),
            Method::GaYpea => OptimizerConfig::GaYpea(GaYpeaParams {
                pop_size: 50,
                cross_prob: 0.6,
                cross_infl: 0.1,
                mut_rate: 0.1,
                mut_step_size: 0.05,
                sel_press: 1.0,
            }),
            Method::Pso => OptimizerConfig::Pso(PsoParams {
                swarm_size: 50,
                min_fract_neigh: 0.1,
                self_adj: 0.5,
                social_adj: 0.5,
            }),
            Method::Bbo => OptimizerConfig::Bbo(BboParams {
                pop_size: 50,
                alpha: 0.9,
                mut_prob: 0.3,
                mut_step_size: 0.025,
                mut_step_size_damp: 0.99,
                keep_rate: BBO_KEEP_RATE,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerConfig::GaElitist(p) => {
                population("pop_size", p.pop_size)?;
                unit("ecount_fract", p.ecount_fract)?;
                unit("cross_fract", p.cross_fract)
            }
            OptimizerConfig::GaYpea(p) => {
                population("pop_size", p.pop_size)?;
                unit("cross_prob", p.cross_prob)?;
                non_negative("cross_infl", p.cross_infl)?;
                unit("mut_rate", p.mut_rate)?;
                positive("mut_step_size", p.mut_step_size)?;
                non_negative("sel_press", p.sel_press)
            }
            OptimizerConfig::Pso(p) => {
                population("swarm_size", p.swarm_size)?;
                check(p.min_fract_neigh > 0.0 && p.min_fract_neigh <= 1.0, || {
                    format!(
                        "min_fract_neigh must lie in (0, 1], got {}",
                        p.min_fract_neigh
                    )
                })?;
                non_negative("self_adj", p.self_adj)?;
                non_negative("social_adj", p.social_adj)
            }
            OptimizerConfig::Bbo(p) => {
                population("pop_size", p.pop_size)?;
                unit("alpha", p.alpha)?;
                unit("mut_prob", p.mut_prob)?;
                positive("mut_step_size", p.mut_step_size)?;
                positive("mut_step_size_damp", p.mut_step_size_damp)?;
                unit("keep_rate", p.keep_rate)
            }
        }
    }

    /// Exact number of objective evaluations a run of `budget` iterations makes.
    ///
    /// Elite GA children are copied with their cached fitness; every other
    /// individual produced by an iteration is evaluated once.
    pub fn expected_evaluations(&self, budget: usize) -> u64 {
        let budget = budget as u64;
        match self {
            OptimizerConfig::GaElitist(p) => {
                let (elite, _, _) = ga_elitist_counts(p);
                let pop = p.pop_size as u64;
                pop + budget * (pop - elite as u64)
            }
            other => other.population_size() as u64 * (budget + 1),
        }
    }
}

/// Best-so-far fitness per iteration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub best: Vec<f64>,
    pub best_solution: IndexVector,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub fitness: f64,
}

/// Snaps and evaluates genotypes, counting evaluations and tracking the
/// incumbent across the whole run.
pub struct Evaluator<'a> {
    spec: &'a ObjectiveSpec,
    evaluations: u64,
    best: Option<(f64, IndexVector)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a ObjectiveSpec) -> Self {
        Self {
            spec,
            evaluations: 0,
            best: None,
        }
    }

    pub fn spec(&self) -> &'a ObjectiveSpec {
        self.spec
    }

    pub fn fitness(&mut self, g: &Genotype) -> Result<f64> {
        let iv = self.spec.space().snap(g);
        let fitness = self.spec.evaluate(&iv)?.fitness;
        self.evaluations += 1;
        if self.best.as_ref().is_none_or(|(b, _)| fitness < *b) {
            self.best = Some((fitness, iv));
        }
        Ok(fitness)
    }

    pub fn individual(&mut self, genotype: Genotype) -> Result<Individual> {
        let fitness = self.fitness(&genotype)?;
        Ok(Individual { genotype, fitness })
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn best_fitness(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.0)
    }

    fn into_best_solution(self) -> IndexVector {
        self.best.map(|b| b.1).unwrap_or_default()
    }
}

pub(crate) fn sort_by_fitness(pop: &mut [Individual]) {
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

pub(crate) fn random_population<R: rand::Rng + ?Sized>(
    size: usize,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let space = eval.spec().space();
    let genotypes: Vec<Genotype> = (0..size).map(|_| space.random_genotype(rng)).collect();
    genotypes.into_iter().map(|g| eval.individual(g)).collect()
}

/// One seeded run of `budget` iterations.
pub fn run(
    config: &OptimizerConfig,
    spec: &ObjectiveSpec,
    budget: usize,
    seed: u64,
) -> Result<RunTrace> {
    config.validate()?;
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut eval = Evaluator::new(spec);
    let mut best = Vec::with_capacity(budget + 1);
    match config {
        OptimizerConfig::GaElitist(p) => {
            let mut pop = random_population(p.pop_size, &mut eval, &mut rng)?;
            best.push(eval.best_fitness());
            for t in 1..=budget {
                pop = ga_elitist_step(&pop, p, t, budget, &mut eval, &mut rng)?;
                best.push(eval.best_fitness());
            }
        }
        OptimizerConfig::GaYpea(p) => {
            let mut pop = random_population(p.pop_size, &mut eval, &mut rng)?;
            best.push(eval.best_fitness());
            for _ in 1..=budget {
                pop = ga_ypea_step(&pop, p, &mut eval, &mut rng)?;
                best.push(eval.best_fitness());
            }
        }
        OptimizerConfig::Pso(p) => {
            let mut state = PsoState::init(p, &mut eval, &mut rng)?;
            best.push(eval.best_fitness());
            for _ in 1..=budget {
                pso_step(&mut state, p, &mut eval, &mut rng)?;
                best.push(eval.best_fitness());
            }
        }
        OptimizerConfig::Bbo(p) => {
            let mut state = BboState::init(p, &mut eval, &mut rng)?;
            best.push(eval.best_fitness());
            for _ in 1..=budget {
                bbo_step(&mut state, p, &mut eval, &mut rng)?;
                best.push(eval.best_fitness());
            }
        }
    }
    let evaluations = eval.evaluations();
    Ok(RunTrace {
        best,
        best_solution: eval.into_best_solution(),
        evaluations,
    })
}
