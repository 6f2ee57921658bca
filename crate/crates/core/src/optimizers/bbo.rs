//! Biogeography-based optimisation.
//!
//! Habitats are ranked best-first. Rank `i` (1-based) of `P` gets immigration
//! rate `lambda_i = i / (P + 1)` and emigration rate `mu_i = 1 - lambda_i`, so
//! good habitats export species and poor ones import them.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{sort_by_fitness, BboParams, Evaluator, Individual};
use crate::error::Result;
use crate::space::Genotype;

/// `(lambda, mu)` per rank, best habitat first.
pub fn rates(pop_size: usize) -> (Vec<f64>, Vec<f64>) {
    (1..=pop_size)
        .map(|i| {
            let lambda = i as f64 / (pop_size + 1) as f64;
            (lambda, 1.0 - lambda)
        })
        .unzip()
}

/// Immigration: `species + alpha (immigrant - species)`.
pub fn migrate(species: f64, immigrant: f64, alpha: f64) -> f64 {
    species + alpha * (immigrant - species)
}

/// Mutation step for a gene with index range `range` at iteration `t`
/// (0-based): `mut_step_size * range * damp^t`.
pub fn bbo_sigma(mut_step_size: f64, range: f64, damp: f64, t: usize) -> f64 {
    mut_step_size * range * damp.powi(t as i32)
}

#[derive(Debug, Clone)]
pub struct BboState {
    /// Sorted best-first.
    pub habitats: Vec<Individual>,
    /// Completed iterations.
    pub iteration: usize,
}

impl BboState {
    pub fn init<R: Rng + ?Sized>(
        p: &BboParams,
        eval: &mut Evaluator<'_>,
        rng: &mut R,
    ) -> Result<Self> {
        let mut habitats = super::random_population(p.pop_size, eval, rng)?;
        sort_by_fitness(&mut habitats);
        Ok(Self {
            habitats,
            iteration: 0,
        })
    }
}

/// Roulette over `mu`, never returning `exclude`.
fn pick_source<R: Rng + ?Sized>(mu: &[f64], exclude: usize, rng: &mut R) -> usize {
    let total: f64 = mu.iter().sum::<f64>() - mu[exclude];
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = exclude;
    for (j, &m) in mu.iter().enumerate() {
        if j == exclude {
            continue;
        }
        acc += m;
        last = j;
        if target < acc {
            return j;
        }
    }
    last
}

pub fn bbo_step<R: Rng + ?Sized>(
    state: &mut BboState,
    p: &BboParams,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<()> {
    let pop = &mut state.habitats;
    sort_by_fitness(pop);
    let size = pop.len();
    let (lambda, mu) = rates(size);
    let grids = eval.spec().space().grids();
    let sigma: Vec<f64> = grids
        .iter()
        .map(|g| {
            bbo_sigma(
                p.mut_step_size,
                g.index_range(),
                p.mut_step_size_damp,
                state.iteration,
            )
        })
        .collect();

    let mut transformed = Vec::with_capacity(size);
    for i in 0..size {
        let mut x = pop[i].genotype.0.clone();
        for k in 0..x.len() {
            if rng.random::<f64>() < lambda[i] {
                let j = pick_source(&mu, i, rng);
                x[k] = migrate(x[k], pop[j].genotype.0[k], p.alpha);
            }
            if rng.random::<f64>() < p.mut_prob {
                let z: f64 = rng.sample(StandardNormal);
                x[k] += sigma[k] * z;
            }
        }
        transformed.push(eval.individual(Genotype(x))?);
    }
    sort_by_fitness(&mut transformed);

    let keep = ((p.keep_rate * size as f64).round() as usize).min(size);
    let mut next: Vec<Individual> = pop[..keep].to_vec();
    next.extend(transformed.into_iter().take(size - keep));
    sort_by_fitness(&mut next);
    *pop = next;
    state.iteration += 1;
    Ok(())
}
