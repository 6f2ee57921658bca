//! Discrete search spaces and the real-coded genotype bridge.
//!
//! Every optimizer works on a [`Genotype`] expressed in index coordinates:
//! coordinate `j` nominally ranges over `[0, m_j - 1]`, where `m_j` is the
//! number of values of variable `j`. Operators never clamp; [`snap`] rounds
//! half-up and clamps to produce the [`IndexVector`] that is evaluated.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered candidate values of one design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct ValueGrid {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    values: Vec<f64>,
}

impl TryFrom<GridRepr> for ValueGrid {
    type Error = Error;
    fn try_from(repr: GridRepr) -> Result<Self> {
        ValueGrid::explicit(repr.values)
    }
}

impl From<ValueGrid> for GridRepr {
    fn from(grid: ValueGrid) -> Self {
        GridRepr {
            values: grid.values,
        }
    }
}

impl ValueGrid {
    /// `count` equally spaced values from `lower` to `upper`, both included.
    pub fn linear(lower: f64, upper: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidSpace(format!(
                "a grid needs at least 2 values, got {count}"
            )));
        }
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(Error::InvalidSpace(format!(
                "linear grid needs finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        let step = (upper - lower) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|k| lower + k as f64 * step).collect();
        values[count - 1] = upper;
        Self::explicit(values)
    }

    /// Index grid `0, 1, ..., count - 1`, used by table surrogates.
    pub fn indices(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidSpace(format!(
                "a grid needs at least 2 values, got {count}"
            )));
        }
        Self::linear(0.0, (count - 1) as f64, count)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSpace(format!(
                "a grid needs at least 2 values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace("grid values must be finite".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(
                "grid values must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn lower(&self) -> f64 {
        self.values[0]
    }

    pub fn upper(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Width of the index range, `m - 1`. All operator scales multiply by it.
    pub fn index_range(&self) -> f64 {
        (self.values.len() - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct DiscreteSpace {
    grids: Vec<ValueGrid>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    grids: Vec<ValueGrid>,
}

impl TryFrom<SpaceRepr> for DiscreteSpace {
    type Error = Error;
    fn try_from(repr: SpaceRepr) -> Result<Self> {
        DiscreteSpace::new(repr.grids)
    }
}

impl From<DiscreteSpace> for SpaceRepr {
    fn from(space: DiscreteSpace) -> Self {
        SpaceRepr { grids: space.grids }
    }
}

impl DiscreteSpace {
    pub fn new(grids: Vec<ValueGrid>) -> Result<Self> {
        if grids.is_empty() {
            return Err(Error::InvalidSpace(
                "a space needs at least one variable".into(),
            ));
        }
        Ok(Self { grids })
    }

    /// `n` copies of the same grid.
    pub fn uniform(grid: ValueGrid, n: usize) -> Result<Self> {
        Self::new(vec![grid; n])
    }

    /// Pure index space with the given per-variable counts.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        Self::new(
            counts
                .iter()
                .map(|&c| ValueGrid::indices(c))
                .collect::<Result<_>>()?,
        )
    }

    pub fn nvars(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[ValueGrid] {
        &self.grids
    }

    pub fn counts(&self) -> Vec<usize> {
        self.grids.iter().map(ValueGrid::count).collect()
    }

    /// Number of distinct solutions, `prod m_j`.
    pub fn cardinality(&self) -> Result<u64> {
        self.grids.iter().try_fold(1u64, |acc, g| {
            acc.checked_mul(g.count() as u64)
                .ok_or(Error::CardinalityOverflow)
        })
    }

    pub fn check(&self, iv: &IndexVector) -> Result<()> {
        if iv.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                got: iv.len(),
            });
        }
        for (var, (&index, grid)) in iv.0.iter().zip(&self.grids).enumerate() {
            if index >= grid.count() {
                return Err(Error::IndexOutOfRange {
                    var,
                    index,
                    count: grid.count(),
                });
            }
        }
        Ok(())
    }

    /// Physical values `values[idx_j]` of a discrete solution.
    pub fn decode(&self, iv: &IndexVector) -> Result<Vec<f64>> {
        self.check(iv)?;
        Ok(iv
            .0
            .iter()
            .zip(&self.grids)
            .map(|(&i, g)| g.values[i])
            .collect())
    }

    /// Round each coordinate half-up, then clamp into `[0, m_j - 1]`.
    pub fn snap(&self, g: &Genotype) -> IndexVector {
        IndexVector(
            g.0.iter()
                .zip(&self.grids)
                .map(|(&x, grid)| snap_coord(x, grid.count()))
                .collect(),
        )
    }

    pub fn random_genotype<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype(
            self.grids
                .iter()
                .map(|g| rng.random_range(0.0..=g.index_range()))
                .collect(),
        )
    }

    /// The `k`-th solution in lexicographic order (last variable fastest).
    pub fn unrank(&self, mut k: u64) -> IndexVector {
        let mut idx = vec![0usize; self.nvars()];
        for (slot, grid) in idx.iter_mut().zip(&self.grids).rev() {
            let m = grid.count() as u64;
            *slot = (k % m) as usize;
            k /= m;
        }
        IndexVector(idx)
    }

    /// Inverse of [`unrank`](Self::unrank).
    pub fn rank(&self, iv: &IndexVector) -> u64 {
        iv.0.iter()
            .zip(&self.grids)
            .fold(0u64, |acc, (&i, g)| acc * g.count() as u64 + i as u64)
    }

    /// All solutions in lexicographic order.
    pub fn iter_solutions(&self) -> SolutionIter<'_> {
        SolutionIter {
            space: self,
            next: Some(IndexVector(vec![0; self.nvars()])),
        }
    }
}

fn snap_coord(x: f64, count: usize) -> usize {
    let floor = x.floor();
    let rounded = if x - floor >= 0.5 { floor + 1.0 } else { floor };
    rounded.clamp(0.0, (count - 1) as f64) as usize
}

pub struct SolutionIter<'a> {
    space: &'a DiscreteSpace,
    next: Option<IndexVector>,
}

impl Iterator for SolutionIter<'_> {
    type Item = IndexVector;

    fn next(&mut self) -> Option<IndexVector> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for (slot, grid) in succ.0.iter_mut().zip(&self.space.grids).rev() {
            *slot += 1;
            if *slot < grid.count() {
                carried = false;
                break;
            }
            *slot = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Real-coded individual in index coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genotype(pub Vec<f64>);

impl Genotype {
    /// Genotype sitting exactly on a discrete solution.
    pub fn embed(iv: &IndexVector) -> Self {
        Genotype(iv.0.iter().map(|&i| i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A concrete discrete solution, one 0-based index per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexVector(pub Vec<usize>);

impl IndexVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for IndexVector {
    fn from(v: Vec<usize>) -> Self {
        IndexVector(v)
    }
}
