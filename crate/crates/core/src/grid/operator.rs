use faer::Mat;
use num_complex::Complex64 as C64;

use super::{Boundary, Grid};
use crate::dsl::MetricSpec;
use crate::error::{Error, Result};
use crate::geometry::{metric_at, scalar_curvature};
use crate::ordering::{quantum_potential, OrderingRule};
use crate::units::Units;

/// Multiplicative potential added to −(ħ²/2m)Δ.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// Quantum potential of an ordering rule.
    Ordering(OrderingRule),
    /// −(ħ²/2m)·R/6.
    DeWitt,
}

impl Potential {
    pub fn label(&self) -> String {
        match self {
            Potential::Zero => "none".into(),
            Potential::Constant(c) => format!("const({c})"),
            Potential::Ordering(r) => r.label.clone(),
            Potential::DeWitt => "dewitt".into(),
        }
    }

    pub fn value(&self, spec: &MetricSpec, p: &[f64], units: Units) -> Result<f64> {
        Ok(match self {
            Potential::Zero => 0.0,
            Potential::Constant(c) => *c,
            Potential::Ordering(rule) => quantum_potential(spec, rule, p, units)?.v_q,
            Potential::DeWitt => -units.kinetic() * scalar_curvature(spec, p)? / 6.0,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    Hamiltonian,
    Quantized,
    Kernel,
    Other,
}

#[derive(Clone, Debug)]
enum Storage {
    /// Real rows of the operator: (column, value), sorted by column.
    Sparse(Vec<Vec<(usize, f64)>>),
    Dense(Mat<C64>),
}

/// Operator on grid samples, Hermitian (when it is a Hamiltonian) with
/// respect to ⟨ψ,φ⟩ = Σ w·conj(ψ)·φ.
#[derive(Clone, Debug)]
pub struct GridOperator {
    storage: Storage,
    weights: Vec<f64>,
    pub kind: OperatorKind,
    pub label: String,
    /// A value no larger than the smallest eigenvalue, when known.
    pub lower_bound: Option<f64>,
}

impl GridOperator {
    pub fn from_dense(matrix: Mat<C64>, weights: Vec<f64>, kind: OperatorKind, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != weights.len() || matrix.ncols() != weights.len() {
            return Err(Error::Invalid("operator and weight sizes differ".into()));
        }
        Ok(GridOperator {
            storage: Storage::Dense(matrix),
            weights,
            kind,
            label: label.into(),
            lower_bound: None,
        })
    }

    pub(crate) fn from_rows(rows: Vec<Vec<(usize, f64)>>, weights: Vec<f64>, kind: OperatorKind, label: String) -> Self {
        GridOperator {
            storage: Storage::Sparse(rows),
            weights,
            kind,
            label,
            lower_bound: None,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(rows) => rows[i]
                .binary_search_by_key(&j, |e| e.0)
                .map(|k| C64::new(rows[i][k].1, 0.0))
                .unwrap_or_default(),
        }
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        match &self.storage {
            Storage::Sparse(rows) => rows
                .iter()
                .map(|r| r.iter().fold(C64::default(), |acc, &(j, v)| acc + psi[j] * v))
                .collect(),
            Storage::Dense(m) => {
                let n = self.len();
                (0..n)
                    .map(|i| (0..n).fold(C64::default(), |acc, j| acc + m[(i, j)] * psi[j]))
                    .collect()
            }
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(rows) => {
                let n = self.len();
                let mut m = Mat::<C64>::zeros(n, n);
                for (i, r) in rows.iter().enumerate() {
                    for &(j, v) in r {
                        m[(i, j)] = C64::new(v, 0.0);
                    }
                }
                m
            }
        }
    }

    /// max |w_i H_ij − conj(w_j H_ji)| relative to max |w_i H_ij|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.len();
        let w = &self.weights;
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        match &self.storage {
            Storage::Sparse(rows) => {
                for (i, r) in rows.iter().enumerate() {
                    for &(j, v) in r {
                        let t = self.entry(j, i).re;
                        worst = worst.max((w[i] * v - w[j] * t).abs());
                        scale = scale.max((w[i] * v).abs());
                    }
                }
            }
            Storage::Dense(m) => {
                for i in 0..n {
                    for j in 0..n {
                        let a = m[(i, j)] * w[i];
                        let b = (m[(j, i)] * w[j]).conj();
                        worst = worst.max((a - b).norm());
                        scale = scale.max(a.norm());
                    }
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// The operator plus c·I.
    pub fn shifted(&self, c: f64) -> GridOperator {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(m) => {
                for i in 0..m.nrows() {
                    m[(i, i)] += C64::new(c, 0.0);
                }
            }
            Storage::Sparse(rows) => {
                for (i, r) in rows.iter_mut().enumerate() {
                    match r.binary_search_by_key(&i, |e| e.0) {
                        Ok(k) => r[k].1 += c,
                        Err(k) => r.insert(k, (i, c)),
                    }
                }
            }
        }
        out.lower_bound = self.lower_bound.map(|b| b + c);
        out
    }

    /// Real rows of W^{1/2} H W^{−1/2}, exactly symmetrized; `None` for dense operators.
    pub fn symmetrized_rows(&self) -> Option<Vec<Vec<(usize, f64)>>> {
        let Storage::Sparse(rows) = &self.storage else {
            return None;
        };
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let out = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .map(|&(j, v)| {
                        let t = self.entry(j, i).re;
                        (j, 0.5 * (s[i] * v / s[j] + s[j] * t / s[i]))
                    })
                    .collect()
            })
            .collect();
        Some(out)
    }

    /// Dense W^{1/2} H W^{−1/2}, exactly Hermitian.
    pub fn symmetrized_dense(&self) -> Mat<C64> {
        let n = self.len();
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let m = self.to_dense();
        Mat::from_fn(n, n, |i, j| {
            let a = m[(i, j)] * (s[i] / s[j]);
            let b = (m[(j, i)] * (s[j] / s[i])).conj();
            (a + b) * 0.5
        })
    }

    /// Largest |i − j| over stored entries (n − 1 for dense operators).
    pub fn bandwidth(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows().saturating_sub(1),
            Storage::Sparse(rows) => rows
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().map(move |&(j, _)| i.abs_diff(j)))
                .max()
                .unwrap_or(0),
        }
    }
}

fn push(row: &mut Vec<(usize, f64)>, j: usize, v: f64) {
    row.push((j, v));
}

fn merge(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (j, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out
}

/// Neighbour of node `mi` one step along `d` (sign ±1): `Some(index)` or
/// `None` when the step crosses a wall.
fn neighbour(grid: &Grid, mi: &[usize], d: usize, up: bool) -> Option<usize> {
    let s = grid.shape()[d];
    let mut m = mi.to_vec();
    if up {
        if m[d] + 1 < s {
            m[d] += 1;
        } else if grid.boundary()[d] == Boundary::Periodic {
            m[d] = 0;
        } else {
            return None;
        }
    } else if m[d] > 0 {
        m[d] -= 1;
    } else if grid.boundary()[d] == Boundary::Periodic {
        m[d] = s - 1;
    } else {
        return None;
    }
    Some(grid.flat_index(&m))
}

/// Discretizes −(ħ²/2m)Δ + V in divergence form,
/// Δψ = (1/√ω) D_i(√ω ω^ij D_j ψ), with half-node metric evaluation on the
/// diagonal terms and central differences for mixed terms.
pub fn hamiltonian_matrix(spec: &MetricSpec, potential: &Potential, grid: &Grid, units: Units) -> Result<GridOperator> {
    let n = grid.dim();
    let total = grid.len();
    let h = grid.spacing().to_vec();
    let sqrt_det = grid.sqrt_det();
    let off_diagonal: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !spec.component(i, j).is_zero())
        .collect();
    // S is the symmetric "flux" matrix: Δ = diag(1/√ω)·S.
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
    let a_at = |p: &[f64], d: usize, e: usize| -> Result<f64> {
        let mv = metric_at(spec, p)?;
        Ok(mv.sqrt_det * mv.upper[(d, e)])
    };
    for k in 0..total {
        let mi = grid.multi_index(k);
        let x = grid.node(k).to_vec();
        for d in 0..n {
            for up in [true, false] {
                let mut half = x.clone();
                half[d] += if up { 0.5 } else { -0.5 } * h[d];
                let c = match (neighbour(grid, &mi, d, up), grid.boundary()[d]) {
                    (Some(nb), _) => {
                        let c = a_at(&half, d, d)? / (h[d] * h[d]);
                        push(&mut rows[k], nb, c);
                        c
                    }
                    (None, Boundary::Dirichlet) => {
                        // the wall itself, not lo + (½ − ½)h with its rounding
                        let (lo, hi) = grid.bounds(d);
                        half[d] = if up { hi } else { lo };
                        2.0 * a_at(&half, d, d)? / (h[d] * h[d])
                    }
                    (None, _) => 0.0,
                };
                push(&mut rows[k], k, -c);
            }
        }
    }
    if !off_diagonal.is_empty() {
        // −Σ_{i≠j} C_iᵀ diag(A^ij) C_j with ghost values per boundary type
        let central = |k: usize, d: usize| -> Vec<(usize, f64)> {
            let mi = grid.multi_index(k);
            let mut out = Vec::with_capacity(2);
            let inv = 1.0 / (2.0 * h[d]);
            for (up, sgn) in [(true, 1.0), (false, -1.0)] {
                match neighbour(grid, &mi, d, up) {
                    Some(nb) => out.push((nb, sgn * inv)),
                    None => {
                        let ghost = if grid.boundary()[d] == Boundary::Dirichlet { -1.0 } else { 1.0 };
                        out.push((k, sgn * inv * ghost));
                    }
                }
            }
            out
        };
        for x in 0..total {
            let p = grid.node(x).to_vec();
            for &(i, j) in &off_diagonal {
                let a = a_at(&p, i, j)?;
                let ci = central(x, i);
                let cj = central(x, j);
                for &(r, vi) in &ci {
                    for &(c, vj) in &cj {
                        push(&mut rows[r], c, -vi * a * vj);
                    }
                }
            }
        }
    }
    let kin = units.kinetic();
    let mut vmin = f64::INFINITY;
    let mut out_rows = Vec::with_capacity(total);
    for (k, row) in rows.into_iter().enumerate() {
        let v = potential.value(spec, grid.node(k), units)?;
        vmin = vmin.min(v);
        let mut r: Vec<(usize, f64)> = row.into_iter().map(|(j, s)| (j, -kin * s / sqrt_det[k])).collect();
        if v != 0.0 {
            r.push((k, v));
        }
        out_rows.push(merge(r));
    }
    let mut op = GridOperator::from_rows(out_rows, grid.weights(), OperatorKind::Hamiltonian, potential.label());
    if off_diagonal.is_empty() {
        op.lower_bound = Some(vmin);
    }
    Ok(op)
}
