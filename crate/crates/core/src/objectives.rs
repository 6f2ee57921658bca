//! Discrete surrogate objectives.
//!
//! Two surrogate families are supported: benchmark functions evaluated on a
//! discretised sub-space (Ackley, Eggholder) and stored tables holding one
//! fitness per solution. Everything is minimised.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{E, PI};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{DiscreteSpace, IndexVector};

/// Enumeration limit used when none is configured.
pub const DEFAULT_ORACLE_LIMIT: u64 = 10_000_000;

/// Ackley function, global minimum 0 at the origin.
pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sum_sq: f64 = x.iter().map(|v| v * v).sum();
    let sum_cos: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum();
    20.0 * (1.0 - (-0.2 * (sum_sq / n).sqrt()).exp()) + (E - (sum_cos / n).exp())
}

/// Two-dimensional Eggholder function.
pub fn eggholder2(x: f64, y: f64) -> f64 {
    let y47 = y + 47.0;
    -y47 * (x / 2.0 + y47).abs().sqrt().sin() - x * (x - y47).abs().sqrt().sin()
}

/// Eggholder summed over consecutive coordinate pairs.
pub fn eggholder_nd(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidObjective(format!(
            "eggholder needs at least 2 variables, got {}",
            x.len()
        )));
    }
    Ok(x.windows(2).map(|w| eggholder2(w[0], w[1])).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    Ackley,
    Eggholder,
    Table,
}

/// Stored fitness per solution, keyed by lexicographic rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    entries: HashMap<u64, f64>,
}

impl Table {
    pub fn from_entries(
        space: &DiscreteSpace,
        entries: impl IntoIterator<Item = (IndexVector, f64)>,
    ) -> Result<Self> {
        space.cardinality()?;
        let mut map = HashMap::new();
        for (iv, fitness) in entries {
            space.check(&iv)?;
            if !fitness.is_finite() {
                return Err(Error::InvalidObjective(format!(
                    "non-finite fitness for {iv:?}"
                )));
            }
            if map.insert(space.rank(&iv), fitness).is_some() {
                return Err(Error::InvalidObjective(format!("duplicate entry {iv:?}")));
            }
        }
        Ok(Self { entries: map })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn range(&self) -> f64 {
        let (lo, hi) = self
            .entries
            .values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if self.entries.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// Additive penalty applied to an explicit set of infeasible solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRule {
    pub magnitude: f64,
    pub infeasible: BTreeSet<IndexVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
enum Surrogate {
    Ackley,
    Eggholder,
    Table(Table),
}

#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    surrogate: Surrogate,
    space: DiscreteSpace,
    penalty: Option<PenaltyRule>,
}

impl ObjectiveSpec {
    pub fn ackley(space: DiscreteSpace) -> Self {
        Self {
            surrogate: Surrogate::Ackley,
            space,
            penalty: None,
        }
    }

    pub fn eggholder(space: DiscreteSpace) -> Result<Self> {
        if space.nvars() < 2 {
            return Err(Error::InvalidObjective(format!(
                "eggholder needs at least 2 variables, got {}",
                space.nvars()
            )));
        }
        Ok(Self {
            surrogate: Surrogate::Eggholder,
            space,
            penalty: None,
        })
    }

    pub fn table(space: DiscreteSpace, table: Table) -> Self {
        Self {
            surrogate: Surrogate::Table(table),
            space,
            penalty: None,
        }
    }

    /// Attach a penalty. The magnitude must exceed the fitness range of the
    /// surrogate so that every penalised value is worse than every feasible one.
    pub fn with_penalty(mut self, rule: PenaltyRule) -> Result<Self> {
        if !(rule.magnitude.is_finite() && rule.magnitude > 0.0) {
            return Err(Error::InvalidObjective(
                "penalty magnitude must be positive and finite".into(),
            ));
        }
        for iv in &rule.infeasible {
            self.space.check(iv)?;
        }
        let bound = self.fitness_range_bound();
        if rule.magnitude <= bound {
            return Err(Error::InvalidObjective(format!(
                "penalty magnitude {} does not exceed the fitness range bound {bound}",
                rule.magnitude
            )));
        }
        self.penalty = Some(rule);
        Ok(self)
    }

    pub fn kind(&self) -> SurrogateKind {
        match self.surrogate {
            Surrogate::Ackley => SurrogateKind::Ackley,
            Surrogate::Eggholder => SurrogateKind::Eggholder,
            Surrogate::Table(_) => SurrogateKind::Table,
        }
    }

    pub fn space(&self) -> &DiscreteSpace {
        &self.space
    }

    pub fn penalty(&self) -> Option<&PenaltyRule> {
        self.penalty.as_ref()
    }

    /// Short description such as `eggholder/16`.
    pub fn label(&self) -> String {
        let kind = match self.kind() {
            SurrogateKind::Ackley => "ackley",
            SurrogateKind::Eggholder => "eggholder",
            SurrogateKind::Table => "table",
        };
        format!("{kind}/{}", self.space.nvars())
    }

    /// Upper bound on `max f - min f` over the whole space.
    fn fitness_range_bound(&self) -> f64 {
        match &self.surrogate {
            // 0 <= ackley < 20 + e
            Surrogate::Ackley => 20.0 + E,
            // |eggholder2(x, y)| <= |x| + |y + 47|
            Surrogate::Eggholder => {
                let grids = self.space.grids();
                let max_abs = |vals: &[f64], shift: f64| {
                    vals.iter().map(|v| (v + shift).abs()).fold(0.0, f64::max)
                };
                2.0 * grids
                    .windows(2)
                    .map(|w| max_abs(w[0].values(), 0.0) + max_abs(w[1].values(), 47.0))
                    .sum::<f64>()
            }
            Surrogate::Table(t) => t.range(),
        }
    }

    /// Unpenalised surrogate value of a solution.
    pub fn raw_fitness(&self, iv: &IndexVector) -> Result<f64> {
        match &self.surrogate {
            Surrogate::Ackley => Ok(ackley(&self.space.decode(iv)?)),
            Surrogate::Eggholder => eggholder_nd(&self.space.decode(iv)?),
            Surrogate::Table(t) => {
                self.space.check(iv)?;
                t.entries
                    .get(&self.space.rank(iv))
                    .copied()
                    .ok_or_else(|| Error::MissingTableEntry(iv.clone()))
            }
        }
    }

    pub fn evaluate(&self, iv: &IndexVector) -> Result<Evaluation> {
        let fitness = self.raw_fitness(iv)?;
        match &self.penalty {
            Some(rule) if rule.infeasible.contains(iv) => Ok(Evaluation {
                fitness: fitness + rule.magnitude,
                feasible: false,
            }),
            _ => Ok(Evaluation {
                fitness,
                feasible: true,
            }),
        }
    }
}

/// Load a table surrogate from CSV (`i1,...,ik,fitness`, 0-based indices).
pub fn load_table(path: &Path, space: DiscreteSpace) -> Result<ObjectiveSpec> {
    let file = std::fs::File::open(path)?;
    parse_table(file, path, space)
}

pub fn parse_table<R: Read>(reader: R, path: &Path, space: DiscreteSpace) -> Result<ObjectiveSpec> {
    let err = |line: usize, message: String| Error::TableFormat {
        path: path.to_path_buf(),
        line,
        message,
    };
    let k = space.nvars();
    let card = space.cardinality()?;
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(err(1, "empty file, expected a header".into())),
    };
    let expected: Vec<String> = (1..=k)
        .map(|j| format!("i{j}"))
        .chain(std::iter::once("fitness".to_string()))
        .collect();
    let got: Vec<&str> = header
        .trim_end_matches('\r')
        .split(',')
        .map(str::trim)
        .collect();
    if got != expected {
        return Err(err(
            1,
            format!("header must be `{}`, got `{header}`", expected.join(",")),
        ));
    }
    let mut entries: HashMap<u64, f64> = HashMap::new();
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != k + 1 {
            return Err(err(
                line_no,
                format!("expected {} fields, got {}", k + 1, fields.len()),
            ));
        }
        let mut idx = Vec::with_capacity(k);
        for (j, f) in fields[..k].iter().enumerate() {
            let i: usize = f
                .parse()
                .map_err(|_| err(line_no, format!("column i{}: `{f}` is not an index", j + 1)))?;
            idx.push(i);
        }
        let iv = IndexVector(idx);
        space.check(&iv).map_err(|e| err(line_no, e.to_string()))?;
        let fitness: f64 = fields[k]
            .parse()
            .map_err(|_| err(line_no, format!("fitness `{}` is not a number", fields[k])))?;
        if !fitness.is_finite() {
            return Err(err(line_no, "fitness must be finite".into()));
        }
        if entries.insert(space.rank(&iv), fitness).is_some() {
            return Err(err(line_no, format!("duplicate index vector {:?}", iv.0)));
        }
    }
    debug_assert!(entries.len() as u64 <= card);
    Ok(ObjectiveSpec::table(space, Table { entries }))
}

/// Write a table surrogate as CSV, rows in lexicographic order.
pub fn save_table<W: Write>(spec: &ObjectiveSpec, mut out: W) -> Result<()> {
    let Surrogate::Table(table) = &spec.surrogate else {
        return Err(Error::InvalidObjective(
            "only table surrogates can be saved".into(),
        ));
    };
    let k = spec.space.nvars();
    let header: Vec<String> = (1..=k).map(|j| format!("i{j}")).collect();
    writeln!(out, "{},fitness", header.join(","))?;
    let mut ranks: Vec<u64> = table.entries.keys().copied().collect();
    ranks.sort_unstable();
    for r in ranks {
        let iv = spec.space.unrank(r);
        let idx: Vec<String> = iv.0.iter().map(usize::to_string).collect();
        writeln!(out, "{},{:?}", idx.join(","), table.entries[&r])?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub indices: IndexVector,
    pub fitness: f64,
    pub cardinality: u64,
}

/// Exhaustive minimum; ties go to the lexicographically smallest solution.
pub fn brute_force_optimum(spec: &ObjectiveSpec, limit: u64) -> Result<Optimum> {
    let space = spec.space();
    let cardinality = space.cardinality()?;
    if cardinality > limit {
        return Err(Error::EnumerationLimit { cardinality, limit });
    }
    // Ok((fitness, rank)) or Err(rank of a failing solution); the reduction
    // keeps the smallest fitness, then the smallest rank, so the result does
    // not depend on how rayon splits the range.
    let best = (0..cardinality)
        .into_par_iter()
        .map(|k| match spec.evaluate(&space.unrank(k)) {
            Ok(e) => Ok((e.fitness, k)),
            Err(_) => Err(k),
        })
        .reduce_with(|a, b| match (a, b) {
            (Err(x), Err(y)) => Err(x.min(y)),
            (Err(x), Ok(_)) | (Ok(_), Err(x)) => Err(x),
            (Ok(x), Ok(y)) => Ok(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
        })
        .expect("a valid space has at least one solution");
    match best {
        Ok((fitness, k)) => Ok(Optimum {
            indices: space.unrank(k),
            fitness,
            cardinality,
        }),
        Err(k) => Err(spec
            .evaluate(&space.unrank(k))
            .expect_err("solution failed during enumeration")),
    }
}
