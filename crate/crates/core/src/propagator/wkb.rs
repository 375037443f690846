use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::free_prefactor;
use crate::dsl::{Expr, MetricSpec};
use crate::error::{Error, Result};
use crate::geometry::{metric_at, normal_coordinates};
use crate::units::Units;

/// Semiclassical kernel
/// ω(p2)^{−1/4}·D(p2|p1)^{1/2}·ω(p1)^{−1/4}·(2πiħ)^{−n/2}·exp(iS/ħ), S = m d²/(2 dt),
/// with the Van Vleck determinant taken from the Jacobian of the exponential
/// map at p1.
pub fn wkb_propagator(spec: &MetricSpec, p2: &[f64], p1: &[f64], dt: f64, units: Units) -> Result<C64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Invalid("dt must be positive".into()));
    }
    let chart = normal_coordinates(spec, p1)?;
    let y = chart.backward(p2)?;
    let (x, jac) = chart.forward_with_jacobian(&y)?;
    let det_j = jac.determinant().abs();
    if !(det_j > 0.0) {
        return Err(Error::Shooting(format!("{p2:?} is conjugate to {p1:?}")));
    }
    let w1 = metric_at(spec, chart.origin())?.det;
    let w2 = metric_at(spec, &spec.normalize_point(&x)?)?.det;
    // ω2^{-1/4} D^{1/2} ω1^{-1/4} without the (m/dt)^{n/2} carried by the prefactor
    let amp = (w1.sqrt() / det_j).sqrt() / (w1 * w2).powf(0.25);
    let d2: f64 = y.iter().map(|c| c * c).sum();
    let phase = units.mass * d2 / (2.0 * units.hbar * dt);
    Ok(free_prefactor(spec.dim(), dt, units) * C64::from_polar(amp, phase))
}

/// Quadrature for applying the semiclassical kernel on a two-dimensional chart.
#[derive(Clone, Copy, Debug)]
pub struct WkbQuadrature {
    /// Geodesic radius of the explicitly integrated disc.
    pub radius: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for WkbQuadrature {
    fn default() -> Self {
        WkbQuadrature {
            radius: 1.0,
            radial_nodes: 160,
            angular_nodes: 24,
        }
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let step = pn / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// (K_dt ψ)(p2) for each dt, on a two-dimensional chart.
///
/// In normal coordinates y about p2 the integrand is
/// (m/(2πiħdt))·exp(iβ|y|²)·j(y)^{1/2}·ψ(y), β = m/(2ħdt), j the volume
/// Jacobian. With u = |y|² the angular average F(u) is smooth; the disc
/// u ≤ radius² is integrated by Gauss–Legendre and the rest by the
/// asymptotic boundary series of ∫_U^∞ exp(iβu)F(u) du. The geometry is
/// shared between all dt.
pub fn wkb_apply(
    spec: &MetricSpec,
    psi: &Expr,
    p2: &[f64],
    dts: &[f64],
    units: Units,
    quad: WkbQuadrature,
) -> Result<Vec<C64>> {
    if spec.dim() != 2 {
        return Err(Error::Invalid("the semiclassical kernel is applied on two-dimensional charts only".into()));
    }
    if dts.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
        return Err(Error::Invalid("dt must be positive".into()));
    }
    let chart = normal_coordinates(spec, p2)?;
    let g = |y: &[f64]| -> Result<f64> {
        if y.iter().all(|&c| c == 0.0) {
            return Ok(psi.eval(chart.origin()));
        }
        let (x, jac) = chart.forward_with_jacobian(y)?;
        let x = spec.normalize_point(&x)?;
        let j = metric_at(spec, &x)?.sqrt_det * jac.determinant().abs();
        let v = psi.eval(&x);
        if !v.is_finite() {
            return Err(Error::Domain {
                node: psi.to_string(),
                reason: "wavefunction not finite",
            });
        }
        Ok(j.sqrt() * v)
    };
    let m = quad.angular_nodes.max(4);
    let angular = |u: f64| -> Result<f64> {
        let r = u.max(0.0).sqrt();
        let mut acc = 0.0;
        for k in 0..m {
            let phi = (k as f64 + 0.5) * 2.0 * PI / m as f64;
            acc += g(&[r * phi.cos(), r * phi.sin()])?;
        }
        Ok(acc * 2.0 * PI / m as f64)
    };
    let big_u = quad.radius * quad.radius;
    let (xs, ws) = gauss_legendre(quad.radial_nodes.max(8));
    let f_nodes: Vec<f64> = xs.iter().map(|&x| angular(x * big_u)).collect::<Result<_>>()?;
    let du = 0.02 * big_u;
    let fu: Vec<f64> = (-2..=2).map(|k| angular(big_u + k as f64 * du)).collect::<Result<_>>()?;
    let d0 = fu[2];
    let d1 = (fu[0] - 8.0 * fu[1] + 8.0 * fu[3] - fu[4]) / (12.0 * du);
    let d2 = (-fu[0] + 16.0 * fu[1] - 30.0 * fu[2] + 16.0 * fu[3] - fu[4]) / (12.0 * du * du);
    let d3 = (-fu[0] + 2.0 * fu[1] - 2.0 * fu[3] + fu[4]) / (2.0 * du * du * du);
    Ok(dts
        .iter()
        .map(|&dt| {
            let beta = units.mass / (2.0 * units.hbar * dt);
            let mut disc = C64::default();
            for ((x, w), f) in xs.iter().zip(&ws).zip(&f_nodes) {
                disc += C64::from_polar(w * f * big_u, beta * x * big_u);
            }
            let ib = C64::new(0.0, beta);
            let tail = -C64::from_polar(1.0, beta * big_u) * (d0 / ib - d1 / (ib * ib) + d2 / (ib * ib * ib) - d3 / (ib * ib * ib * ib));
            free_prefactor(2, dt, units) * 0.5 * (disc + tail)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_expression, preset};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-14);
    }

    #[test]
    fn flat_kernel_is_free_propagator() {
        let m = preset("flat-cartesian-2").unwrap();
        let u = Units::default();
        let k = wkb_propagator(&m, &[0.3, 0.1], &[0.0, 0.0], 0.1, u).unwrap();
        let want = C64::from_polar(1.0 / (2.0 * PI * 0.1), -PI / 2.0 + 0.1 / 0.2);
        assert!((k - want).norm() < 1e-9 * want.norm());
    }

    #[test]
    fn sphere_amplitude_follows_sine() {
        let m = preset("sphere-2(1)").unwrap();
        let u = Units::default();
        let (p1, p2) = ([1.2, 0.3], [1.2, 1.1]);
        let k = wkb_propagator(&m, &p2, &p1, 0.05, u).unwrap();
        let d = crate::geometry::geodesic_distance(&m, &p1, &p2).unwrap();
        let want = (d / d.sin()).sqrt() / (2.0 * PI * 0.05);
        assert!((k.norm() - want).abs() < 1e-7 * want);
    }

    #[test]
    fn flat_application_is_exact_for_quadratics() {
        let m = preset("flat-cartesian-2").unwrap();
        let psi = parse_expression("x1*x1 + 3*x2", 2).unwrap();
        let u = Units::default();
        let dt = 0.03;
        let out = wkb_apply(&m, &psi, &[0.4, 0.2], &[dt], u, WkbQuadrature::default()).unwrap();
        // Hψ = −1 and H²ψ = 0, so e^{−iHt}ψ = ψ + it
        let want = C64::new(0.16 + 0.6, dt);
        assert!((out[0] - want).norm() < 1e-9, "{} vs {want}", out[0]);
    }
}
