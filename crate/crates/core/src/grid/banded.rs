//! Banded symmetric LDLᵀ factorization (no pivoting).
//!
//! Used for real symmetric positive definite shifts and for complex symmetric
//! matrices of the form I + i·a·S (S real symmetric), whose Hermitian part is
//! positive definite so every leading minor is nonsingular.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait BandScalar:
    Copy + Default + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn magnitude(self) -> f64;
    fn admissible_pivot(self) -> bool;
}

impl BandScalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn admissible_pivot(self) -> bool {
        self > 0.0
    }
}

impl BandScalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn admissible_pivot(self) -> bool {
        self.norm() > 0.0 && self.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct BandLdl<T> {
    n: usize,
    bw: usize,
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: BandScalar> BandLdl<T> {
    /// Factors the symmetric matrix whose lower band (half-bandwidth `bw`) is
    /// given by `entry(i, j)` for `i − bw ≤ j ≤ i`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> T) -> Result<BandLdl<T>> {
        let w = bw + 1;
        let mut l = vec![T::default(); n * w];
        let mut d = vec![T::default(); n];
        let mut ld = vec![T::default(); w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                let k0 = j.saturating_sub(bw).max(j0);
                let mut s = entry(i, j);
                for k in k0..j {
                    s = s - ld[k - j0] * l[j * w + k + bw - j];
                }
                let lij = s / d[j];
                l[i * w + j + bw - i] = lij;
                ld[j - j0] = lij * d[j];
            }
            let mut di = entry(i, i);
            for j in j0..i {
                di = di - ld[j - j0] * l[i * w + j + bw - i];
            }
            if !di.admissible_pivot() {
                return Err(Error::Linalg(format!("pivot {i} of banded LDLᵀ is not admissible")));
            }
            d[i] = di;
            l[i * w + bw] = T::default();
        }
        Ok(BandLdl { n, bw, l, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut s = x[i];
            for j in j0..i {
                s = s - self.l[i * w + j + bw - i] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] = x[i] / self.d[i];
        }
        for i in (0..n).rev() {
            let xi = x[i];
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                x[j] = x[j] - self.l[i * w + j + bw - i] * xi;
            }
        }
    }

    pub fn min_pivot_magnitude(&self) -> f64 {
        self.d.iter().map(|v| v.magnitude()).fold(f64::INFINITY, f64::min)
    }
}
