use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::banded::BandLdl;
use super::GridOperator;
use crate::error::{Error, Result};

/// Above this size, sparse real operators use the banded shift-invert solver.
const DENSE_LIMIT: usize = 2048;

/// Lowest eigenpairs; vectors are grid wavefunctions normalized in the
/// weighted inner product.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

fn check_hermitian(op: &GridOperator) -> Result<()> {
    let defect = op.hermiticity_defect();
    if defect > 1e-8 {
        return Err(Error::Linalg(format!(
            "operator is not Hermitian in the weighted product (defect {defect:e})"
        )));
    }
    Ok(())
}

/// The `k` smallest eigenvalues in ascending order.
pub fn eigen_spectrum(op: &GridOperator, k: usize) -> Result<Vec<f64>> {
    Ok(solve(op, k, false)?.values)
}

pub fn eigen_pairs(op: &GridOperator, k: usize) -> Result<EigenPairs> {
    solve(op, k, true)
}

fn solve(op: &GridOperator, k: usize, vectors: bool) -> Result<EigenPairs> {
    check_hermitian(op)?;
    let n = op.len();
    let k = k.min(n);
    let inv_sqrt_w: Vec<f64> = op.weights().iter().map(|w| 1.0 / w.sqrt()).collect();
    if let Some(rows) = op.symmetrized_rows() {
        if n > DENSE_LIMIT && op.bandwidth() <= n / 4 {
            let (values, x) = shift_invert(&rows, op.bandwidth(), op.lower_bound, k)?;
            let vectors = if vectors {
                x.iter()
                    .map(|v| v.iter().zip(&inv_sqrt_w).map(|(a, s)| C64::new(a * s, 0.0)).collect())
                    .collect()
            } else {
                Vec::new()
            };
            return Ok(EigenPairs { values, vectors });
        }
    }
    let s = op.symmetrized_dense();
    let real = (0..n).all(|i| (0..n).all(|j| s[(i, j)].im == 0.0));
    if real {
        let sr = Mat::<f64>::from_fn(n, n, |i, j| s[(i, j)].re);
        if !vectors {
            let ev = sr
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Linalg(format!("eigen solver failed: {e:?}")))?;
            return Ok(EigenPairs {
                values: ev[..k].to_vec(),
                vectors: Vec::new(),
            });
        }
        let evd = sr
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("eigen solver failed: {e:?}")))?;
        let values = (0..k).map(|i| evd.S()[i]).collect();
        let u = evd.U();
        let vectors = (0..k)
            .map(|c| (0..n).map(|r| C64::new(u[(r, c)] * inv_sqrt_w[r], 0.0)).collect())
            .collect();
        return Ok(EigenPairs { values, vectors });
    }
    let evd = s
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigen solver failed: {e:?}")))?;
    let values = (0..k).map(|i| evd.S()[i].re).collect();
    let vectors = if vectors {
        let u = evd.U();
        (0..k)
            .map(|c| (0..n).map(|r| u[(r, c)] * inv_sqrt_w[r]).collect())
            .collect()
    } else {
        Vec::new()
    };
    Ok(EigenPairs { values, vectors })
}

fn sparse_mul(rows: &[Vec<(usize, f64)>], x: &[f64], out: &mut [f64]) {
    for (i, r) in rows.iter().enumerate() {
        out[i] = r.iter().map(|&(j, v)| v * x[j]).sum();
    }
}

fn orthonormalize(block: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for i in 0..block.len() {
            for j in 0..i {
                let d: f64 = block[i].iter().zip(&block[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = block.split_at_mut(i);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a -= d * b;
                }
            }
            let nrm: f64 = block[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            if nrm > 0.0 {
                block[i].iter_mut().for_each(|a| *a /= nrm);
            }
        }
    }
}

/// Shift-invert block subspace iteration on a sparse symmetric matrix.
fn shift_invert(
    rows: &[Vec<(usize, f64)>],
    bw: usize,
    lower_bound: Option<f64>,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = rows.len();
    let diag: Vec<f64> = (0..n)
        .map(|i| rows[i].iter().find(|e| e.0 == i).map(|e| e.1).unwrap_or(0.0))
        .collect();
    let gersh = (0..n)
        .map(|i| diag[i] - rows[i].iter().filter(|e| e.0 != i).map(|e| e.1.abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let base = lower_bound.unwrap_or(gersh);
    let min_diag = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let delta = (1e-3 * (min_diag - base)).max(1e-6);
    let sigma = base - delta;
    let lookup = |i: usize, j: usize| -> f64 {
        let v = rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map(|p| rows[i][p].1)
            .unwrap_or(0.0);
        if i == j {
            v - sigma
        } else {
            v
        }
    };
    let fact = BandLdl::<f64>::factor(n, bw, lookup)
        .map_err(|e| Error::Linalg(format!("shifted operator not positive definite: {e}")))?;
    let p = (2 * k).max(k + 8).min(n);
    // deterministic start block
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|c| {
            (0..n)
                .map(|i| ((i as f64 + 1.0) * (c as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5)
                .collect()
        })
        .collect();
    orthonormalize(&mut x);
    let mut sx = vec![vec![0.0; n]; p];
    let mut theta = vec![0.0; p];
    for _iter in 0..1000 {
        for v in x.iter_mut() {
            fact.solve_in_place(v);
        }
        orthonormalize(&mut x);
        for (v, out) in x.iter().zip(sx.iter_mut()) {
            sparse_mul(rows, v, out);
        }
        let t = DMatrix::from_fn(p, p, |a, b| {
            let ab: f64 = x[a].iter().zip(&sx[b]).map(|(u, v)| u * v).sum();
            let ba: f64 = x[b].iter().zip(&sx[a]).map(|(u, v)| u * v).sum();
            0.5 * (ab + ba)
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut nx = vec![vec![0.0; n]; p];
        let mut nsx = vec![vec![0.0; n]; p];
        for (slot, &c) in order.iter().enumerate() {
            theta[slot] = eig.eigenvalues[c];
            for a in 0..p {
                let coef = eig.eigenvectors[(a, c)];
                if coef == 0.0 {
                    continue;
                }
                for i in 0..n {
                    nx[slot][i] += coef * x[a][i];
                    nsx[slot][i] += coef * sx[a][i];
                }
            }
        }
        x = nx;
        sx = nsx;
        let converged = (0..k).all(|c| {
            let r: f64 = sx[c]
                .iter()
                .zip(&x[c])
                .map(|(a, b)| (a - theta[c] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            r <= 1e-9 * theta[c].abs().max(1.0)
        });
        if converged {
            x.truncate(k);
            return Ok((theta[..k].to_vec(), x));
        }
    }
    Err(Error::Linalg("subspace iteration did not converge".into()))
}
