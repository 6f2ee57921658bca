//! Elitist genetic algorithm with rank scaling, five selection schemes and six
//! crossover operators.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{sort_by_fitness, CrossFn, Evaluator, GaElitistParams, Individual, SelFn};
use crate::error::Result;
use crate::space::Genotype;

/// Knobs of the selection schemes that are not tuned.
#[derive(Debug, Clone, Copy)]
pub struct SelectionParams {
    pub tournament_size: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self { tournament_size: 4 }
    }
}

const HEURISTIC_RATIO: f64 = 1.2;
const MUTATION_SCALE_START: f64 = 0.1;
const MUTATION_SCALE_END: f64 = 0.01;

/// `(elite, crossover, mutation)` child counts.
pub fn ga_elitist_counts(p: &GaElitistParams) -> (usize, usize, usize) {
    let pop = p.pop_size;
    let elite = ((p.ecount_fract * pop as f64).round() as usize).min(pop);
    let xover = ((p.cross_fract * (pop - elite) as f64).round() as usize).min(pop - elite);
    (elite, xover, pop - elite - xover)
}

/// Gaussian mutation scale at iteration `t` of `budget`: 0.1 at the first
/// iteration, shrinking linearly to 0.01 at the last.
pub fn mutation_scale(t: usize, budget: usize) -> f64 {
    if budget <= 1 {
        return MUTATION_SCALE_START;
    }
    let frac = (t.saturating_sub(1)) as f64 / (budget - 1) as f64;
    MUTATION_SCALE_START + (MUTATION_SCALE_END - MUTATION_SCALE_START) * frac.min(1.0)
}

/// Rank-scaled expectations `1/sqrt(rank)` normalised to sum to `count`.
/// Tied fitness values share the mean expectation of their ranks.
pub fn rank_expectations(fitness: &[f64], count: usize) -> Vec<f64> {
    let n = fitness.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    let mut raw = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && fitness[order[j + 1]] == fitness[order[i]] {
            j += 1;
        }
        let mean = (i..=j).map(|r| 1.0 / ((r + 1) as f64).sqrt()).sum::<f64>() / (j - i + 1) as f64;
        for &k in &order[i..=j] {
            raw[k] = mean;
        }
        i = j + 1;
    }
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r * count as f64 / total).collect()
}

fn roulette<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // rounding left the target past the last bucket
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(weights.len() - 1)
}

/// Draw `count` parent indices from a population with the given fitness.
pub fn select<R: Rng + ?Sized>(
    fitness: &[f64],
    sel_fn: SelFn,
    count: usize,
    params: SelectionParams,
    rng: &mut R,
) -> Vec<usize> {
    let n = fitness.len();
    if count == 0 || n == 0 {
        return Vec::new();
    }
    match sel_fn {
        SelFn::Uniform => (0..count).map(|_| rng.random_range(0..n)).collect(),
        SelFn::Roulette => {
            let e = rank_expectations(fitness, count);
            let total: f64 = e.iter().sum();
            (0..count).map(|_| roulette(&e, total, rng)).collect()
        }
        SelFn::Stochunif => {
            let e = rank_expectations(fitness, count);
            let total: f64 = e.iter().sum();
            let step = total / count as f64;
            let mut pointer = rng.random::<f64>() * step;
            let mut out = Vec::with_capacity(count);
            let mut acc = 0.0;
            let mut i = 0;
            while out.len() < count {
                // last pointer may sit on the total through rounding
                while i < n - 1 && pointer >= acc + e[i] {
                    acc += e[i];
                    i += 1;
                }
                out.push(i);
                pointer += step;
            }
            out
        }
        SelFn::Remainder => {
            let e = rank_expectations(fitness, count);
            let mut out = Vec::with_capacity(count);
            for (i, &ei) in e.iter().enumerate() {
                for _ in 0..(ei.floor() as usize) {
                    if out.len() < count {
                        out.push(i);
                    }
                }
            }
            let frac: Vec<f64> = e.iter().map(|ei| ei - ei.floor()).collect();
            let frac_total: f64 = frac.iter().sum();
            let e_total: f64 = e.iter().sum();
            while out.len() < count {
                out.push(if frac_total > 0.0 {
                    roulette(&frac, frac_total, rng)
                } else {
                    roulette(&e, e_total, rng)
                });
            }
            out
        }
        SelFn::Tournament => {
            let size = params.tournament_size.clamp(1, n);
            (0..count)
                .map(|_| {
                    index::sample(rng, n, size)
                        .into_iter()
                        .min_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)))
                        .expect("tournament has at least one entrant")
                })
                .collect()
        }
    }
}

/// One child from two parents.
pub fn crossover_elitist<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    cross_fn: CrossFn,
    rng: &mut R,
) -> Genotype {
    let (a, b) = (&p1.genotype.0, &p2.genotype.0);
    let n = a.len();
    let child = match cross_fn {
        CrossFn::Scattered => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| if rng.random::<bool>() { x } else { y })
            .collect(),
        CrossFn::Singlepoint => {
            let cut = if n > 1 { rng.random_range(1..n) } else { n };
            a[..cut].iter().chain(&b[cut..]).copied().collect()
        }
        CrossFn::Twopoints => {
            let mut lo = rng.random_range(0..=n);
            let mut hi = rng.random_range(0..=n);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            (0..n)
                .map(|j| if (lo..hi).contains(&j) { b[j] } else { a[j] })
                .collect()
        }
        CrossFn::Intermediate => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| x + rng.random::<f64>() * (y - x))
            .collect(),
        CrossFn::Heuristic => {
            let (better, worse) = if p2.fitness < p1.fitness {
                (b, a)
            } else {
                (a, b)
            };
            worse
                .iter()
                .zip(better)
                .map(|(&w, &g)| w + HEURISTIC_RATIO * (g - w))
                .collect()
        }
        CrossFn::Arithmetic => {
            let w = rng.random::<f64>();
            a.iter()
                .zip(b)
                .map(|(&x, &y)| w * x + (1.0 - w) * y)
                .collect()
        }
    };
    Genotype(child)
}

/// Next generation: elite copies, crossover children, then Gaussian mutants.
pub fn ga_elitist_step<R: Rng + ?Sized>(
    pop: &[Individual],
    p: &GaElitistParams,
    t: usize,
    budget: usize,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let mut sorted = pop.to_vec();
    sort_by_fitness(&mut sorted);
    let (elite, xover, mutants) = ga_elitist_counts(p);
    let mut next: Vec<Individual> = sorted[..elite].to_vec();
    if xover + mutants == 0 {
        return Ok(next);
    }

    let fitness: Vec<f64> = sorted.iter().map(|i| i.fitness).collect();
    let mut parents = select(
        &fitness,
        p.sel_fn,
        2 * xover + mutants,
        SelectionParams::default(),
        rng,
    );
    parents.shuffle(rng);

    for pair in parents[..2 * xover].chunks_exact(2) {
        let child = crossover_elitist(&sorted[pair[0]], &sorted[pair[1]], p.cross_fn, rng);
        next.push(eval.individual(child)?);
    }

    let grids = eval.spec().space().grids();
    let scale = mutation_scale(t, budget);
    for &parent in &parents[2 * xover..] {
        let child: Vec<f64> = sorted[parent]
            .genotype
            .0
            .iter()
            .zip(grids)
            .map(|(&x, g)| {
                let z: f64 = rng.sample(StandardNormal);
                x + scale * g.index_range() * z
            })
            .collect();
        next.push(eval.individual(Genotype(child))?);
    }
    Ok(next)
}
