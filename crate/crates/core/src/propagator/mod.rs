//! Short-time kernels, their composition into time-sliced propagators, and
//! the semiclassical (Van Vleck) kernel.
//!
//! Conventions: kernels carry exp(+iS/ħ) and the normalization
//! (m/(2πiħε))^{n/2}, so that on flat space they are the exact free-particle
//! propagator; all kernels act on scalar densities of weight zero, i.e. they
//! are integrated against √ω dⁿξ.

mod compose;
mod wkb;

pub use compose::{compose_propagator, convergence_study, ConvergenceReport, PropagatorKernel};
pub use wkb::{wkb_apply, wkb_propagator, WkbQuadrature};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::dsl::MetricSpec;
use crate::error::{Error, Result};
use crate::ordering::OrderingRule;
use crate::units::Units;

/// Where the kernel came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Wkb,
    Sliced,
}

/// Ordering-dependent evaluation of f on the segment [a, b]:
/// w_weyl·f((a+b)/2) + w_rivier·(f(a) + f(b))/2.
pub fn midpoint_eval<F>(rule: &OrderingRule, mut f: F, a: &[f64], b: &[f64]) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if a.len() != b.len() {
        return Err(Error::Invalid("segment endpoints differ in dimension".into()));
    }
    let mut acc = 0.0;
    if rule.w_weyl != 0.0 {
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        acc += rule.w_weyl * f(&mid)?;
    }
    if rule.w_rivier != 0.0 {
        acc += rule.w_rivier * 0.5 * (f(a)? + f(b)?);
    }
    Ok(acc)
}

pub(crate) fn inverse_metric(spec: &MetricSpec, p: &[f64]) -> Result<DMatrix<f64>> {
    let p = spec.normalize_point(p)?;
    let n = spec.dim();
    let g = DMatrix::from_row_slice(n, n, &spec.lower_values(&p));
    let chol = g.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        point: p.clone(),
        detail: "metric has a non-positive eigenvalue".into(),
    })?;
    Ok(chol.inverse())
}

/// (m/(2πiħε))^{n/2}
pub(crate) fn free_prefactor(n: usize, eps: f64, units: Units) -> C64 {
    let half = 0.5 * n as f64;
    let modulus = (units.mass / (2.0 * PI * units.hbar * eps)).powf(half);
    C64::from_polar(modulus, -0.5 * PI * half)
}

/// Single time slice from `a` to `b`:
/// (m/(2πiħε))^{n/2}·√det ω̃ / [ω(b)ω(a)]^{1/4}·exp((i/ħ)·(m/2ε)·ω̃_ij Δξ^i Δξ^j).
///
/// The ordering rule acts on the inverse metric (the coefficient of the
/// kinetic symbol); ω̃ is the inverse of the rule's midpoint value. Points
/// may be given on the covering space of periodic coordinates; Δξ = b − a is
/// taken literally.
pub fn short_time_kernel(
    spec: &MetricSpec,
    rule: &OrderingRule,
    b: &[f64],
    a: &[f64],
    eps: f64,
    units: Units,
) -> Result<C64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Invalid("slice duration must be positive".into()));
    }
    let n = spec.dim();
    if a.len() != n || b.len() != n {
        return Err(Error::Invalid("point dimension does not match the metric".into()));
    }
    let inv_a = inverse_metric(spec, a)?;
    let inv_b = inverse_metric(spec, b)?;
    let inv_mid = if rule.w_weyl != 0.0 {
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        Some(inverse_metric(spec, &mid)?)
    } else {
        None
    };
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // same arithmetic as midpoint_eval, sharing the metric solves
            let mut v = rule.w_rivier * 0.5 * (inv_a[(i, j)] + inv_b[(i, j)]);
            if let Some(m) = &inv_mid {
                v += rule.w_weyl * m[(i, j)];
            }
            w[(i, j)] = v;
        }
    }
    let chol = w.cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        point: b.to_vec(),
        detail: format!("ordered inverse metric between {a:?} and {b:?} is not positive definite"),
    })?;
    let g_tilde = chol.inverse();
    let det_a = 1.0 / inv_a.determinant();
    let det_b = 1.0 / inv_b.determinant();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += g_tilde[(i, j)] * (b[i] - a[i]) * (b[j] - a[j]);
        }
    }
    let amp = g_tilde.determinant().sqrt() / (det_a * det_b).powf(0.25);
    let phase = units.mass * quad / (2.0 * units.hbar * eps);
    Ok(free_prefactor(n, eps, units) * amp * C64::from_polar(1.0, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_metric_config, preset};

    #[test]
    fn midpoint_rules_on_quadratic() {
        let f = |x: &[f64]| Ok(x[0] * x[0]);
        let w = midpoint_eval(&OrderingRule::weyl(), f, &[0.0], &[2.0]).unwrap();
        let n = midpoint_eval(&OrderingRule::new_rule(), f, &[0.0], &[2.0]).unwrap();
        let r = midpoint_eval(&OrderingRule::rivier(), f, &[0.0], &[2.0]).unwrap();
        assert_eq!((w, n, r), (1.0, 0.0, 2.0));
    }

    #[test]
    fn flat_slice_is_free_kernel() {
        let m = preset("flat-cartesian-1").unwrap();
        let u = Units::default();
        let k = short_time_kernel(&m, &OrderingRule::new_rule(), &[0.3], &[0.1], 0.01, u).unwrap();
        let want = (1.0 / (2.0 * PI * 0.01)).sqrt() * C64::from_polar(1.0, -PI / 4.0 + 0.04 / 0.02);
        assert!((k - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn coincident_points_give_prefactor() {
        let m = preset("sphere-2(1)").unwrap();
        let u = Units::new(1.0, 2.0);
        let k = short_time_kernel(&m, &OrderingRule::weyl(), &[1.0, 0.4], &[1.0, 0.4], 0.05, u).unwrap();
        assert!((k - free_prefactor(2, 0.05, u)).norm() < 1e-12);
    }

    #[test]
    fn rules_agree_when_inverse_metric_is_affine() {
        let m = parse_metric_config("dimension = 1\ncomponent.1.1 = \"1/(2 + 0.5*x1)\"\nrange.1 = [0, 3]\n").unwrap();
        let u = Units::default();
        let a = short_time_kernel(&m, &OrderingRule::weyl(), &[1.3], &[1.0], 0.02, u).unwrap();
        let b = short_time_kernel(&m, &OrderingRule::new_rule(), &[1.3], &[1.0], 0.02, u).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }
}
