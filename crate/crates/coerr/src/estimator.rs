//! Context-space partitioning and per-(SBS, hypercube) demand estimation.
//!
//! The context space `[0,1]^D` is split into `h^D` identical hypercubes.
//! Each SBS keeps one counter and one running demand summary per *visited*
//! cell — cells are materialized lazily, so memory tracks the number of
//! distinct (SBS, cell) visits rather than the full grid. Estimates are
//! sample means maintained recursively from sufficient statistics; no raw
//! observation list is retained.

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("context out of range: coordinate {index} is {value}, expected [0, 1]")]
    ContextOutOfRange { index: usize, value: f64 },

    #[error("context has {actual} coordinates, partition expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no experience: cell has no recorded observations")]
    NoExperience,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Uniform hypercube partition of `[0,1]^D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    /// Cells per dimension (`h`).
    pub cells_per_dim: u32,
    /// Context dimension (`D`).
    pub dim: usize,
}

impl Partition {
    pub fn new(cells_per_dim: u32, dim: usize) -> Result<Self, EstimatorError> {
        if cells_per_dim < 1 || dim < 1 {
            return Err(EstimatorError::InvalidPartition(format!(
                "cells_per_dim = {cells_per_dim}, dim = {dim}; both must be >= 1"
            )));
        }
        Ok(Self { cells_per_dim, dim })
    }

    /// Total cells per SBS, `h^D`.
    pub fn total_cells(&self) -> u64 {
        u64::from(self.cells_per_dim).pow(self.dim as u32)
    }

    pub fn locate(&self, x: &[f64]) -> Result<CellIndex, EstimatorError> {
        partition_point(x, self)
    }
}

/// Coordinates of one hypercube, each in `[0, h-1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex(pub Vec<u32>);

impl std::fmt::Display for CellIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Map a context to its hypercube: `coord_d = floor(x_d · h)`, with the
/// closed upper boundary `x_d = 1` belonging to the last cell.
pub fn partition_point(x: &[f64], partition: &Partition) -> Result<CellIndex, EstimatorError> {
    if x.len() != partition.dim {
        return Err(EstimatorError::DimensionMismatch {
            expected: partition.dim,
            actual: x.len(),
        });
    }
    let h = partition.cells_per_dim;
    let mut coords = Vec::with_capacity(x.len());
    for (index, &value) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(EstimatorError::ContextOutOfRange { index, value });
        }
        let c = ((value * f64::from(h)).floor() as u32).min(h - 1);
        coords.push(c);
    }
    Ok(CellIndex(coords))
}

/// Running sufficient statistics for one (SBS, cell).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellStats {
    /// Visit counter `C`.
    pub count: u64,
    /// Running sum of observed demands.
    pub sum: f64,
    /// Running sum of squares (diagnostics only).
    pub sum_sq: f64,
}

impl CellStats {
    /// Recursive update: no raw observations are kept.
    pub fn record(&mut self, demand: f64) {
        debug_assert!(demand >= 0.0, "observed demand must be non-negative");
        self.count += 1;
        self.sum += demand;
        self.sum_sq += demand * demand;
    }

    /// Sample-mean demand estimate.
    pub fn estimate(&self) -> Result<f64, EstimatorError> {
        mle_estimate(self)
    }

    /// Unbiased sample variance, when at least two observations exist.
    pub fn sample_variance(&self) -> Option<f64> {
        if self.count < 2 {
            return None;
        }
        let n = self.count as f64;
        Some(((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0))
    }
}

/// Sample mean over a cell's experience. Errs on an empty cell; callers must
/// treat such cells as under-explored rather than substitute a default.
pub fn mle_estimate(cell: &CellStats) -> Result<f64, EstimatorError> {
    if cell.count == 0 {
        return Err(EstimatorError::NoExperience);
    }
    Ok(cell.sum / cell.count as f64)
}

/// Two-sided-capable Hoeffding tail for a sample mean of `count` demands
/// bounded in `[0, demand_range]`: `exp(-2·C·ε² / range²)` (one side).
pub fn hoeffding_tail(epsilon: f64, count: u64, demand_range: f64) -> f64 {
    debug_assert!(epsilon > 0.0 && count >= 1 && demand_range > 0.0);
    (-2.0 * count as f64 * epsilon * epsilon / (demand_range * demand_range)).exp()
}

/// Lazily-allocated per-SBS map from cells to statistics.
#[derive(Debug, Clone)]
pub struct EstimatorBank {
    cells: Vec<BTreeMap<CellIndex, CellStats>>,
}

impl EstimatorBank {
    pub fn new(n_sbs: usize) -> Self {
        Self {
            cells: vec![BTreeMap::new(); n_sbs],
        }
    }

    pub fn n_sbs(&self) -> usize {
        self.cells.len()
    }

    /// Record one observed demand for `(sbs, cell)`.
    pub fn record(&mut self, sbs: usize, cell: &CellIndex, demand: f64) {
        self.cells[sbs].entry(cell.clone()).or_default().record(demand);
    }

    /// Visit counter; zero for never-materialized cells.
    pub fn count(&self, sbs: usize, cell: &CellIndex) -> u64 {
        self.cells[sbs].get(cell).map_or(0, |s| s.count)
    }

    pub fn estimate(&self, sbs: usize, cell: &CellIndex) -> Result<f64, EstimatorError> {
        self.cells[sbs]
            .get(cell)
            .ok_or(EstimatorError::NoExperience)?
            .estimate()
    }

    pub fn stats(&self, sbs: usize, cell: &CellIndex) -> Option<&CellStats> {
        self.cells[sbs].get(cell)
    }

    /// Number of materialized (SBS, cell) entries.
    pub fn materialized_cells(&self) -> usize {
        self.cells.iter().map(BTreeMap::len).sum()
    }

    pub fn iter_sbs(
        &self,
        sbs: usize,
    ) -> impl Iterator<Item = (&CellIndex, &CellStats)> {
        self.cells[sbs].iter()
    }

    /// CSV snapshot: `sbs,cell_0,...,cell_{D-1},count,estimate`, rows in
    /// (sbs, cell) order.
    pub fn snapshot_csv<W: Write>(&self, dim: usize, out: &mut W) -> io::Result<()> {
        write!(out, "sbs")?;
        for d in 0..dim {
            write!(out, ",cell_{d}")?;
        }
        writeln!(out, ",count,estimate")?;
        for (sbs, cells) in self.cells.iter().enumerate() {
            for (cell, stats) in cells {
                write!(out, "{sbs}")?;
                for c in &cell.0 {
                    write!(out, ",{c}")?;
                }
                let est = stats.estimate().unwrap_or(f64::NAN);
                writeln!(out, ",{},{}", stats.count, est)?;
            }
        }
        Ok(())
    }
}
