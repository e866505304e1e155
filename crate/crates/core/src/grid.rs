//! Axis-aligned tensor grids.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of points of any single grid.
pub const DEFAULT_BUDGET: usize = 1_000_000;

static BUDGET: AtomicUsize = AtomicUsize::new(DEFAULT_BUDGET);

/// Set the process-wide grid budget.
pub fn set_budget(points: usize) {
    BUDGET.store(points.max(1), Ordering::Relaxed);
}

pub fn budget() -> usize {
    BUDGET.load(Ordering::Relaxed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        Self::with_budget(lower, upper, points, budget())
    }

    pub fn with_budget(
        lower: Vec<f64>,
        upper: Vec<f64>,
        points: Vec<usize>,
        budget: usize,
    ) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        if lower.len() != upper.len() || lower.len() != points.len() {
            return Err(Error::InvalidGrid("lower, upper and points differ in length".into()));
        }
        for (axis, ((lo, hi), n)) in lower.iter().zip(&upper).zip(&points).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidGrid(format!("axis {axis}: need finite lower < upper")));
            }
            if *n < 2 {
                return Err(Error::InvalidGrid(format!("axis {axis}: need at least 2 points")));
            }
        }
        let total = points
            .iter()
            .try_fold(1usize, |acc, n| acc.checked_mul(*n))
            .unwrap_or(usize::MAX);
        if total > budget {
            return Err(Error::BudgetExceeded { points: total, budget });
        }
        Ok(Self { lower, upper, points })
    }

    /// The cube [lo, hi]^dim with n points per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![n; dim])
    }

    /// Parse `lo:hi:n` per axis, axes separated by commas.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut points = Vec::new();
        for part in text.split(',') {
            let fields: Vec<&str> = part.trim().split(':').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("grid axis `{part}` is not lo:hi:n")));
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")))
            };
            lower.push(num(fields[0])?);
            upper.push(num(fields[1])?);
            points.push(
                fields[2]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad point count `{}`", fields[2])))?,
            );
        }
        Self::new(lower, upper, points)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.points[axis] - 1) as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(0.0, f64::max)
    }

    /// Euclidean length of a cell diagonal.
    pub fn cell_diameter(&self) -> f64 {
        self.spacings().iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    pub fn axis_value(&self, axis: usize, k: usize) -> f64 {
        if k + 1 == self.points[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + k as f64 * self.spacing(axis)
        }
    }

    pub fn axis_values(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|k| self.axis_value(axis, k)).collect()
    }

    /// Multi-index of a flat index; the last axis varies fastest.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.points[axis];
            flat /= self.points[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.points).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, k)| self.axis_value(axis, *k))
            .collect()
    }

    /// All grid points, row-major, `dim` coordinates each.
    pub fn coords(&self) -> Vec<f64> {
        let d = self.dim();
        let axes: Vec<Vec<f64>> = (0..d).map(|a| self.axis_values(a)).collect();
        let mut out = Vec::with_capacity(self.len() * d);
        let mut idx = vec![0usize; d];
        for _ in 0..self.len() {
            for axis in 0..d {
                out.push(axes[axis][idx[axis]]);
            }
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if idx[axis] < self.points[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        out
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(a, v)| {
            let slack = 1e-9 * self.spacing(a);
            *v >= self.lower[a] - slack && *v <= self.upper[a] + slack
        })
    }

    /// Flat index of the grid point at `x`, if `x` sits on the lattice.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim());
        for (a, v) in x.iter().enumerate() {
            let t = (v - self.lower[a]) / self.spacing(a);
            let k = t.round();
            if (t - k).abs() > 1e-7 || k < 0.0 || k > (self.points[a] - 1) as f64 {
                return None;
            }
            idx.push(k as usize);
        }
        Some(self.flat_index(&idx))
    }

    /// Whether a grid point touches the boundary of the box.
    pub fn on_boundary(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .iter()
            .zip(&self.points)
            .any(|(k, n)| *k == 0 || *k + 1 == *n)
    }

    /// Flat indices of the axis neighbours of a grid point.
    pub fn neighbours(&self, flat: usize) -> Vec<(usize, f64)> {
        let idx = self.multi_index(flat);
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            let h = self.spacing(axis);
            if idx[axis] > 0 {
                let mut j = idx.clone();
                j[axis] -= 1;
                out.push((self.flat_index(&j), h));
            }
            if idx[axis] + 1 < self.points[axis] {
                let mut j = idx.clone();
                j[axis] += 1;
                out.push((self.flat_index(&j), h));
            }
        }
        out
    }

    /// Same box, every axis refined to `factor * (n - 1) + 1` points.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.lower.clone(),
            self.upper.clone(),
            self.points.iter().map(|n| factor * (n - 1) + 1).collect(),
        )
    }

    /// Every `stride`-th point of each axis, starting from the lower corner.
    pub fn coarsened(&self, stride: usize) -> Result<Self> {
        let mut upper = Vec::new();
        let mut points = Vec::new();
        for a in 0..self.dim() {
            let n = (self.points[a] - 1) / stride + 1;
            upper.push(self.lower[a] + ((n - 1) * stride) as f64 * self.spacing(a));
            points.push(n);
        }
        Self::new(self.lower.clone(), upper, points)
    }

    pub fn describe(&self) -> String {
        (0..self.dim())
            .map(|a| format!("{}:{}:{}", self.lower[a], self.upper[a], self.points[a]))
            .collect::<Vec<_>>()
            .join(",")
    }
}
