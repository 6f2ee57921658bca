//! Non-elitist GA in the style of the YPEA toolbox: exponential roulette
//! selection, blend crossover with extrapolation and partial Gaussian mutation.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Evaluator, GaYpeaParams, Individual};
use crate::error::Result;
use crate::space::Genotype;

/// `(crossover, mutation)` child counts; crossover children come in pairs.
pub fn ga_ypea_counts(p: &GaYpeaParams) -> (usize, usize) {
    let pairs = (p.cross_prob * p.pop_size as f64 / 2.0).round() as usize;
    let xover = (2 * pairs).min(p.pop_size);
    (xover, p.pop_size - xover)
}

/// Parent selection probabilities `exp(-sel_press * c_hat)` with min-max
/// normalised cost, summing to 1.
pub fn selection_probabilities(costs: &[f64], sel_press: f64) -> Vec<f64> {
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = worst - best;
    let weights: Vec<f64> = costs
        .iter()
        .map(|&c| {
            let normalised = if span > 0.0 { (c - best) / span } else { 0.0 };
            (-sel_press * normalised).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn roulette<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let target = rng.random::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Blend factor drawn uniformly from `[-cross_infl, 1 + cross_infl]`.
pub fn blend_alpha<R: Rng + ?Sized>(cross_infl: f64, rng: &mut R) -> f64 {
    -cross_infl + (1.0 + 2.0 * cross_infl) * rng.random::<f64>()
}

/// Two children `alpha x1 + (1 - alpha) x2` and `alpha x2 + (1 - alpha) x1`,
/// with one `alpha` per gene.
pub fn blend(x1: &[f64], x2: &[f64], alpha: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x1.iter()
        .zip(x2)
        .zip(alpha)
        .map(|((&a, &b), &w)| (w * a + (1.0 - w) * b, w * b + (1.0 - w) * a))
        .unzip()
}

pub fn ga_ypea_step<R: Rng + ?Sized>(
    pop: &[Individual],
    p: &GaYpeaParams,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let costs: Vec<f64> = pop.iter().map(|i| i.fitness).collect();
    let probs = selection_probabilities(&costs, p.sel_press);
    let (xover, mutants) = ga_ypea_counts(p);
    let nvars = eval.spec().space().nvars();

    let mut children: Vec<Genotype> = Vec::with_capacity(p.pop_size);
    while children.len() < xover {
        let i1 = roulette(&probs, rng);
        let i2 = roulette(&probs, rng);
        let alpha: Vec<f64> = (0..nvars).map(|_| blend_alpha(p.cross_infl, rng)).collect();
        let (y1, y2) = blend(&pop[i1].genotype.0, &pop[i2].genotype.0, &alpha);
        children.push(Genotype(y1));
        children.push(Genotype(y2));
    }
    children.truncate(xover);

    let genes = ((p.mut_rate * nvars as f64).ceil() as usize).min(nvars);
    let grids = eval.spec().space().grids();
    for _ in 0..mutants {
        let mut child = pop[rng.random_range(0..pop.len())].genotype.clone();
        let mut chosen = index::sample(rng, nvars, genes).into_vec();
        chosen.sort_unstable();
        for j in chosen {
            let z: f64 = rng.sample(StandardNormal);
            child.0[j] += p.mut_step_size * grids[j].index_range() * z;
        }
        children.push(child);
    }

    children.into_iter().map(|g| eval.individual(g)).collect()
}
