//! Particle swarm with an adaptive random neighbourhood and adaptive inertia.

use rand::seq::index;
use rand::Rng;

use super::{Evaluator, Individual, PsoParams};
use crate::error::Result;
use crate::space::Genotype;

/// Bounds of the adaptive inertia; `W` starts at the upper bound.
pub const INERTIA_RANGE: (f64, f64) = (0.1, 1.1);

/// `max(1, floor(swarm_size * min_fract_neigh))`.
pub fn initial_neighborhood(swarm_size: usize, min_fract_neigh: f64) -> usize {
    ((swarm_size as f64 * min_fract_neigh).floor() as usize).max(1)
}

/// `W v + y1 u1 (p - x) + y2 u2 (g - x)`, gene by gene.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    inertia: f64,
    velocity: &[f64],
    position: &[f64],
    personal_best: &[f64],
    neighborhood_best: &[f64],
    self_adj: f64,
    social_adj: f64,
    u1: &[f64],
    u2: &[f64],
) -> Vec<f64> {
    (0..velocity.len())
        .map(|j| {
            inertia * velocity[j]
                + self_adj * u1[j] * (personal_best[j] - position[j])
                + social_adj * u2[j] * (neighborhood_best[j] - position[j])
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PsoState {
    pub particles: Vec<Individual>,
    pub velocities: Vec<Vec<f64>>,
    pub personal_best: Vec<Individual>,
    pub min_neighborhood: usize,
    pub neighborhood: usize,
    pub inertia: f64,
    pub stall: usize,
    pub global_best: f64,
}

impl PsoState {
    pub fn init<R: Rng + ?Sized>(
        p: &PsoParams,
        eval: &mut Evaluator<'_>,
        rng: &mut R,
    ) -> Result<Self> {
        let space = eval.spec().space();
        let mut positions = Vec::with_capacity(p.swarm_size);
        let mut velocities = Vec::with_capacity(p.swarm_size);
        for _ in 0..p.swarm_size {
            positions.push(space.random_genotype(rng));
            velocities.push(
                space
                    .grids()
                    .iter()
                    .map(|g| {
                        let r = g.index_range();
                        rng.random_range(-r..=r)
                    })
                    .collect(),
            );
        }
        let particles: Vec<Individual> = positions
            .into_iter()
            .map(|g| eval.individual(g))
            .collect::<Result<_>>()?;
        let min_neighborhood = initial_neighborhood(p.swarm_size, p.min_fract_neigh);
        let global_best = particles
            .iter()
            .map(|i| i.fitness)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            personal_best: particles.clone(),
            particles,
            velocities,
            min_neighborhood,
            neighborhood: min_neighborhood,
            inertia: INERTIA_RANGE.1,
            stall: 0,
            global_best,
        })
    }

    /// Particle itself plus `neighborhood - 1` distinct random others.
    fn neighbors<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Vec<usize> {
        let n = self.particles.len();
        let others = (self.neighborhood.min(n) - 1).min(n - 1);
        let mut out = vec![i];
        out.extend(index::sample(rng, n - 1, others).into_iter().map(|k| {
            if k < i {
                k
            } else {
                k + 1
            }
        }));
        out
    }

    fn adapt(&mut self, improved: bool, swarm_size: usize) {
        if improved {
            self.stall = self.stall.saturating_sub(1);
            self.neighborhood = self.min_neighborhood;
            if self.stall < 2 {
                self.inertia *= 2.0;
            } else if self.stall > 5 {
                self.inertia /= 2.0;
            }
            self.inertia = self.inertia.clamp(INERTIA_RANGE.0, INERTIA_RANGE.1);
        } else {
            self.stall += 1;
            self.neighborhood = (self.neighborhood + self.min_neighborhood).min(swarm_size);
        }
    }
}

pub fn pso_step<R: Rng + ?Sized>(
    state: &mut PsoState,
    p: &PsoParams,
    eval: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<()> {
    let grids = eval.spec().space().grids();
    let nvars = grids.len();
    let mut moved = Vec::with_capacity(state.particles.len());
    for i in 0..state.particles.len() {
        let g = state
            .neighbors(i, rng)
            .into_iter()
            .min_by(|&a, &b| {
                state.personal_best[a]
                    .fitness
                    .total_cmp(&state.personal_best[b].fitness)
                    .then(a.cmp(&b))
            })
            .expect("neighbourhood contains the particle itself");
        let mut u1 = Vec::with_capacity(nvars);
        let mut u2 = Vec::with_capacity(nvars);
        for _ in 0..nvars {
            u1.push(rng.random::<f64>());
            u2.push(rng.random::<f64>());
        }
        let x = &state.particles[i].genotype.0;
        let mut v = velocity_update(
            state.inertia,
            &state.velocities[i],
            x,
            &state.personal_best[i].genotype.0,
            &state.personal_best[g].genotype.0,
            p.self_adj,
            p.social_adj,
            &u1,
            &u2,
        );
        for (vj, grid) in v.iter_mut().zip(grids) {
            let r = grid.index_range();
            *vj = vj.clamp(-r, r);
        }
        let position: Vec<f64> = x.iter().zip(&v).map(|(x, v)| x + v).collect();
        state.velocities[i] = v;
        moved.push(Genotype(position));
    }

    for (i, g) in moved.into_iter().enumerate() {
        let ind = eval.individual(g)?;
        if ind.fitness < state.personal_best[i].fitness {
            state.personal_best[i] = ind.clone();
        }
        state.particles[i] = ind;
    }

    let best = state
        .personal_best
        .iter()
        .map(|i| i.fitness)
        .fold(f64::INFINITY, f64::min);
    let improved = best < state.global_best;
    state.global_best = state.global_best.min(best);
    state.adapt(improved, p.swarm_size);
    Ok(())
}
