//! Separable FFTs over row-major tensor-product grids.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub(crate) fn new(shape: &[usize]) -> NdFft {
        let mut planner = FftPlanner::new();
        NdFft {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&m| planner.plan_fft_forward(m)).collect(),
            inverse: shape.iter().map(|&m| planner.plan_fft_inverse(m)).collect(),
        }
    }

    fn run(&self, data: &mut [C64], plans: &[Arc<dyn Fft<f64>>]) {
        let total = data.len();
        let mut stride = total;
        let mut line = Vec::new();
        for (d, &m) in self.shape.iter().enumerate() {
            stride /= m;
            line.resize(m, C64::default());
            let block = m * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + k * stride];
                    }
                    plans[d].process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalized forward transform, kernel exp(−2πi k·j/M).
    pub(crate) fn forward(&self, data: &mut [C64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the 1/N normalization.
    pub(crate) fn inverse(&self, data: &mut [C64]) {
        self.run(data, &self.inverse);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Signed wavenumber of FFT bin `k` out of `m`; the Nyquist bin maps to 0.
pub(crate) fn wavenumber(k: usize, m: usize) -> f64 {
    if 2 * k < m {
        k as f64
    } else if 2 * k == m {
        0.0
    } else {
        k as f64 - m as f64
    }
}
