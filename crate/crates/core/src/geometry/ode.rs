//! Adaptive Dormand–Prince 5(4) integration for autonomous systems.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 100_000,
        }
    }
}

/// Integrates `y' = f(y)` from 0 to `t_end` (may be negative) and returns `y(t_end)`.
/// Only the components in `0..control` enter the error norm.
pub fn integrate<F>(mut f: F, y0: &[f64], t_end: f64, tol: Tolerance, control: usize) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let dim = y0.len();
    let control = control.min(dim);
    let mut y = y0.to_vec();
    if t_end == 0.0 {
        return Ok(y);
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    f(&y, &mut k[0])?;
    let mut t = 0.0;
    let mut h = (0.05 * span).min(0.1);
    let mut steps = 0;
    while span - t > 1e-14 * span {
        if steps >= tol.max_steps {
            return Err(Error::Geodesic(format!("step limit reached at t = {t}")));
        }
        steps += 1;
        if t + h > span {
            h = span - t;
        }
        for s in 1..7 {
            for d in 0..dim {
                let mut acc = y[d];
                for (r, a) in A[s][..s].iter().enumerate() {
                    acc += dir * h * a * k[r][d];
                }
                tmp[d] = acc;
            }
            f(&tmp, &mut k[s])?;
        }
        // stage 7 is evaluated at the 5th-order solution (FSAL)
        let mut err = 0.0f64;
        for d in 0..control {
            let mut e = 0.0;
            let mut y5 = y[d];
            for s in 0..7 {
                y5 += dir * h * B5[s] * k[s][d];
                e += dir * h * (B5[s] - B4[s]) * k[s][d];
            }
            let sc = tol.atol + tol.rtol * y[d].abs().max(y5.abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < 1e-14 * span {
                return Err(Error::Geodesic("non-finite derivative".into()));
            }
            f(&y, &mut k[0])?;
            continue;
        }
        if err <= 1.0 {
            t += h;
            for d in 0..dim {
                let mut acc = y[d];
                for s in 0..7 {
                    acc += dir * h * B5[s] * k[s][d];
                }
                y[d] = acc;
            }
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * span.max(1e-300) {
            return Err(Error::Geodesic("step size underflow".into()));
        }
    }
    Ok(y)
}
