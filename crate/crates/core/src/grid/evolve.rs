use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;

use super::banded::BandLdl;
use super::GridOperator;
use crate::error::{Error, Result};

pub type WaveFunction = Vec<C64>;

/// ⟨a, b⟩ = Σ w·conj(a)·b.
pub fn inner(weights: &[f64], a: &[C64], b: &[C64]) -> C64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .fold(C64::default(), |acc, (w, (x, y))| acc + x.conj() * y * *w)
}

pub fn norm(weights: &[f64], a: &[C64]) -> f64 {
    inner(weights, a, a).re.sqrt()
}

enum Solver {
    Banded {
        rows: Vec<Vec<(usize, f64)>>,
        ldl: BandLdl<C64>,
    },
    /// One full step, (I + iaS)⁻¹(I − iaS).
    Dense { step: Mat<C64> },
}

/// Crank–Nicolson stepper for iħ∂ψ/∂t = Hψ, acting in the symmetrized basis
/// φ = W^{1/2}ψ so each step is exactly unitary up to round-off.
pub struct Evolver {
    sqrt_w: Vec<f64>,
    a: f64,
    solver: Solver,
}

impl Evolver {
    pub fn new(op: &GridOperator, dt: f64, hbar: f64) -> Result<Evolver> {
        if !(dt.is_finite() && dt > 0.0 && hbar > 0.0) {
            return Err(Error::Invalid("time step and ħ must be positive".into()));
        }
        let n = op.len();
        let a = 0.5 * dt / hbar;
        let sqrt_w = op.weights().iter().map(|w| w.sqrt()).collect();
        let bw = op.bandwidth();
        let solver = match op.symmetrized_rows() {
            Some(rows) if bw <= n / 4 => {
                let lookup = |i: usize, j: usize| {
                    let v = rows[i]
                        .binary_search_by_key(&j, |e| e.0)
                        .map(|p| rows[i][p].1)
                        .unwrap_or(0.0);
                    C64::new(if i == j { 1.0 } else { 0.0 }, a * v)
                };
                let ldl = BandLdl::factor(n, bw, lookup)?;
                Solver::Banded { rows, ldl }
            }
            _ => {
                let s = op.symmetrized_dense();
                let lhs = Mat::from_fn(n, n, |i, j| {
                    let id = if i == j { C64::new(1.0, 0.0) } else { C64::default() };
                    id + C64::new(0.0, a) * s[(i, j)]
                });
                let rhs = Mat::from_fn(n, n, |i, j| {
                    let id = if i == j { C64::new(1.0, 0.0) } else { C64::default() };
                    id - C64::new(0.0, a) * s[(i, j)]
                });
                let lu: PartialPivLu<C64> = lhs.partial_piv_lu();
                Solver::Dense { step: lu.solve(&rhs) }
            }
        };
        Ok(Evolver { sqrt_w, a, solver })
    }

    fn step_sym(&self, phi: &mut Vec<C64>) {
        let ia = C64::new(0.0, self.a);
        match &self.solver {
            Solver::Banded { rows, ldl } => {
                let mut rhs: Vec<C64> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| phi[i] - ia * r.iter().fold(C64::default(), |acc, &(j, v)| acc + phi[j] * v))
                    .collect();
                ldl.solve_in_place(&mut rhs);
                *phi = rhs;
            }
            Solver::Dense { step } => {
                let n = phi.len();
                let next: Vec<C64> = (0..n)
                    .map(|i| (0..n).fold(C64::default(), |acc, j| acc + step[(i, j)] * phi[j]))
                    .collect();
                *phi = next;
            }
        }
    }

    /// Advances ψ by `steps` time steps.
    pub fn run(&self, psi: &[C64], steps: usize) -> WaveFunction {
        let mut phi: Vec<C64> = psi.iter().zip(&self.sqrt_w).map(|(p, s)| p * *s).collect();
        for _ in 0..steps {
            self.step_sym(&mut phi);
        }
        phi.iter().zip(&self.sqrt_w).map(|(p, s)| p / *s).collect()
    }
}

/// Evolves `psi0` to time `t` with `steps` Crank–Nicolson steps.
pub fn evolve(op: &GridOperator, psi0: &[C64], t: f64, steps: usize, hbar: f64) -> Result<WaveFunction> {
    if steps == 0 {
        return Err(Error::Invalid("evolve needs at least one step".into()));
    }
    if psi0.len() != op.len() {
        return Err(Error::Invalid("wavefunction size does not match the operator".into()));
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    if t < 0.0 {
        return Err(Error::Invalid("negative evolution time".into()));
    }
    Ok(Evolver::new(op, t / steps as f64, hbar)?.run(psi0, steps))
}
