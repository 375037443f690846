//! Structured grids, discretized Hamiltonians, spectra and time evolution.

mod banded;
mod evolve;
mod operator;
mod spectrum;

pub use banded::BandLdl;
pub use evolve::{evolve, inner, norm, Evolver, WaveFunction};
pub use operator::{hamiltonian_matrix, GridOperator, OperatorKind, Potential};
pub use spectrum::{eigen_pairs, eigen_spectrum, EigenPairs};

use crate::dsl::MetricSpec;
use crate::error::{Error, Result};
use crate::geometry::metric_at;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// ψ = 0 on the wall (half a cell outside the last node).
    Dirichlet,
    /// Zero normal flux through the wall.
    Neumann,
}

/// One grid dimension. Bounds default to the metric's coordinate range.
#[derive(Clone, Copy, Debug)]
pub struct Axis {
    pub points: usize,
    pub bounds: Option<(f64, f64)>,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(points: usize, boundary: Boundary) -> Axis {
        Axis {
            points,
            bounds: None,
            boundary,
        }
    }

    pub fn bounded(points: usize, lo: f64, hi: f64, boundary: Boundary) -> Axis {
        Axis {
            points,
            bounds: Some((lo, hi)),
            boundary,
        }
    }

    pub fn periodic(points: usize) -> Axis {
        Axis::new(points, Boundary::Periodic)
    }
}

/// Uniform tensor-product grid. Nodes are flattened row-major, the last
/// dimension fastest. Periodic dimensions exclude the duplicate endpoint;
/// other dimensions are cell-centred with walls at the interval ends.
#[derive(Clone, Debug)]
pub struct Grid {
    spec: MetricSpec,
    shape: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    spacing: Vec<f64>,
    boundary: Vec<Boundary>,
    nodes: Vec<f64>,
    sqrt_det: Vec<f64>,
    cell_volume: f64,
}

pub fn build_grid(spec: &MetricSpec, axes: &[Axis]) -> Result<Grid> {
    let n = spec.dim();
    if axes.len() != n {
        return Err(Error::Grid(format!("{} axes given for a {n}-dimensional metric", axes.len())));
    }
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut spacing = Vec::with_capacity(n);
    for (d, ax) in axes.iter().enumerate() {
        if ax.points < 8 {
            return Err(Error::Grid(format!("axis {} has {} points; at least 8 required", d + 1, ax.points)));
        }
        let range = spec.ranges()[d];
        let (a, b) = ax.bounds.unwrap_or((range.lo, range.hi));
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Grid(format!(
                "axis {} has an infinite range; truncate it with explicit bounds",
                d + 1
            )));
        }
        if a >= b {
            return Err(Error::Grid(format!("axis {} has empty interval [{a}, {b}]", d + 1)));
        }
        if !range.periodic && (a < range.lo || b > range.hi) {
            return Err(Error::Grid(format!(
                "axis {} interval [{a}, {b}] exceeds the chart range [{}, {}]",
                d + 1,
                range.lo,
                range.hi
            )));
        }
        lo.push(a);
        hi.push(b);
        spacing.push((b - a) / ax.points as f64);
    }
    let shape: Vec<usize> = axes.iter().map(|a| a.points).collect();
    let boundary: Vec<Boundary> = axes.iter().map(|a| a.boundary).collect();
    let total: usize = shape.iter().product();
    let mut nodes = Vec::with_capacity(total * n);
    let mut sqrt_det = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let start = nodes.len();
        for d in 0..n {
            let off = if boundary[d] == Boundary::Periodic { 0.0 } else { 0.5 };
            nodes.push(lo[d] + (idx[d] as f64 + off) * spacing[d]);
        }
        let p = nodes[start..].to_vec();
        let mv = metric_at(spec, &p)?;
        sqrt_det.push(mv.sqrt_det);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    // Dirichlet walls need a valid metric where the flux is evaluated.
    let grid = Grid {
        spec: spec.clone(),
        cell_volume: spacing.iter().product(),
        shape,
        lo,
        hi,
        spacing,
        boundary,
        nodes,
        sqrt_det,
    };
    grid.check_walls()?;
    Ok(grid)
}

impl Grid {
    fn check_walls(&self) -> Result<()> {
        let n = self.dim();
        for d in 0..n {
            if self.boundary[d] != Boundary::Dirichlet {
                continue;
            }
            for k in 0..self.len() {
                let mi = self.multi_index(k);
                if mi[d] != 0 && mi[d] != self.shape[d] - 1 {
                    continue;
                }
                let mut p = self.node(k).to_vec();
                p[d] = if mi[d] == 0 { self.lo[d] } else { self.hi[d] };
                metric_at(&self.spec, &p)?;
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.sqrt_det.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sqrt_det.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn bounds(&self, d: usize) -> (f64, f64) {
        (self.lo[d], self.hi[d])
    }

    pub fn boundary(&self) -> &[Boundary] {
        &self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary.iter().all(|b| *b == Boundary::Periodic)
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn node(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.nodes[k * n..(k + 1) * n]
    }

    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    /// Quadrature weight √ω·cell volume at node `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.sqrt_det[k] * self.cell_volume
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.weight(k)).collect()
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let n = self.dim();
        let mut mi = vec![0; n];
        for d in (0..n).rev() {
            mi[d] = k % self.shape[d];
            k /= self.shape[d];
        }
        mi
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        mi.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    /// Samples a function at every node.
    pub fn sample<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        (0..self.len()).map(|k| f(self.node(k))).collect()
    }
}
