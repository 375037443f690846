//! Geodesics, Riemann normal charts and the Van Vleck determinant.

use nalgebra::{DMatrix, DVector};

use super::ode::{integrate, Tolerance};
use super::{metric_at, norm_at, MetricJet};
use crate::dsl::MetricSpec;
use crate::error::{Error, Result};

/// End state of a geodesic shot for unit parameter time.
#[derive(Clone, Debug)]
pub struct GeodesicEnd {
    /// Position, not reduced modulo periods.
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// ∂x(1)/∂v(0), present when requested.
    pub jacobian: Option<DMatrix<f64>>,
}

fn exits(e: Error) -> Error {
    match e {
        Error::OutOfChart { .. } | Error::NotPositiveDefinite { .. } | Error::Domain { .. } => {
            Error::Geodesic(format!("geodesic exits chart: {e}"))
        }
        other => other,
    }
}

/// Integrates the geodesic with initial velocity `v0` over parameter time `t`.
pub fn shoot(spec: &MetricSpec, x0: &[f64], v0: &[f64], t: f64, jacobian: bool, tol: Tolerance) -> Result<GeodesicEnd> {
    let n = spec.dim();
    let mut y0 = vec![0.0; if jacobian { 2 * n + 2 * n * n } else { 2 * n }];
    y0[..n].copy_from_slice(x0);
    y0[n..2 * n].copy_from_slice(v0);
    if jacobian {
        // J(0) = 0, J'(0) = I
        for i in 0..n {
            y0[2 * n + n * n + i * n + i] = 1.0;
        }
    }
    let rhs = |y: &[f64], dy: &mut [f64]| -> Result<()> {
        let x = &y[..n];
        let v = &y[n..2 * n];
        let order = if jacobian { 2 } else { 1 };
        let mj = MetricJet::at(spec, x, order).map_err(exits)?;
        let gam = mj.christoffel_jets();
        dy[..n].copy_from_slice(v);
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc -= gam[(k * n + i) * n + j].value() * v[i] * v[j];
                }
            }
            dy[n + k] = acc;
        }
        if jacobian {
            let jm = &y[2 * n..2 * n + n * n];
            let km = &y[2 * n + n * n..];
            dy[2 * n..2 * n + n * n].copy_from_slice(km);
            for k in 0..n {
                for m in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let g = &gam[(k * n + i) * n + j];
                            let mut dg = 0.0;
                            for l in 0..n {
                                dg += g.grad(l) * jm[l * n + m];
                            }
                            acc -= dg * v[i] * v[j] + 2.0 * g.value() * v[i] * km[j * n + m];
                        }
                    }
                    dy[2 * n + n * n + k * n + m] = acc;
                }
            }
        }
        Ok(())
    };
    let control = y0.len();
    let y = integrate(rhs, &y0, t, tol, control)?;
    let jac = jacobian.then(|| DMatrix::from_row_slice(n, n, &y[2 * n..2 * n + n * n]));
    Ok(GeodesicEnd {
        x: y[..n].to_vec(),
        v: y[n..2 * n].to_vec(),
        jacobian: jac,
    })
}

/// Point at arclength `s` along the geodesic from `p` with unit tangent `h`.
pub fn exponential_map(spec: &MetricSpec, p: &[f64], h: &[f64], s: f64) -> Result<Vec<f64>> {
    let p = spec.normalize_point(p)?;
    if h.len() != p.len() {
        return Err(Error::Invalid("tangent dimension mismatch".into()));
    }
    let norm = norm_at(&metric_at(spec, &p)?, h);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Invalid(format!("tangent has norm {norm}, expected 1")));
    }
    if s == 0.0 {
        return Ok(p);
    }
    let end = shoot(spec, &p, h, s, false, Tolerance::default())?;
    spec.normalize_point(&end.x).map_err(exits)
}

/// Difference `a − b` with periodic coordinates wrapped to the nearest image.
pub(crate) fn chart_difference(spec: &MetricSpec, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .zip(spec.ranges())
        .map(|((x, y), r)| {
            let d = x - y;
            match r.period() {
                Some(p) => d - p * (d / p).round(),
                None => d,
            }
        })
        .collect()
}

/// Riemann normal chart y ↦ exp_origin(frame·y).
#[derive(Clone, Debug)]
pub struct NormalChart {
    spec: MetricSpec,
    origin: Vec<f64>,
    frame: DMatrix<f64>,
    frame_inv: DMatrix<f64>,
    tol: Tolerance,
}

/// Builds the normal chart with a Gram–Schmidt frame of the coordinate basis.
pub fn normal_coordinates(spec: &MetricSpec, origin: &[f64]) -> Result<NormalChart> {
    let origin = spec.normalize_point(origin)?;
    let g = metric_at(spec, &origin)?.lower;
    let n = spec.dim();
    let mut frame = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[a] = 1.0;
        for b in 0..a {
            let f = frame.column(b).clone_owned();
            let proj = (f.transpose() * &g * &e)[0];
            e -= f * proj;
        }
        let norm = (e.transpose() * &g * &e)[0].sqrt();
        frame.set_column(a, &(e / norm));
    }
    let frame_inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Shooting("singular frame".into()))?;
    Ok(NormalChart {
        spec: spec.clone(),
        origin,
        frame,
        frame_inv,
        tol: Tolerance::default(),
    })
}

impl NormalChart {
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Columns are the orthonormal frame vectors in coordinate components.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> NormalChart {
        self.tol = tol;
        self
    }

    fn velocity(&self, y: &[f64]) -> Vec<f64> {
        (&self.frame * DVector::from_column_slice(y)).as_slice().to_vec()
    }

    /// exp_origin(frame·y), periodic coordinates not reduced.
    pub fn forward_raw(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.iter().all(|&c| c == 0.0) {
            return Ok(self.origin.clone());
        }
        Ok(shoot(&self.spec, &self.origin, &self.velocity(y), 1.0, false, self.tol)?.x)
    }

    pub fn forward(&self, y: &[f64]) -> Result<Vec<f64>> {
        let x = self.forward_raw(y)?;
        self.spec.normalize_point(&x).map_err(exits)
    }

    /// Forward map and its Jacobian ∂ξ/∂y.
    pub fn forward_with_jacobian(&self, y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let end = shoot(&self.spec, &self.origin, &self.velocity(y), 1.0, true, self.tol)?;
        let j = end.jacobian.expect("jacobian requested") * &self.frame;
        Ok((end.x, j))
    }

    /// Inverse of `forward` by Newton shooting; tolerance 1e−10 in coordinates.
    pub fn backward(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let xi = self.spec.normalize_point(xi)?;
        let n = self.spec.dim();
        let d0 = chart_difference(&self.spec, &xi, &self.origin);
        let mut y = (&self.frame_inv * DVector::from_column_slice(&d0)).as_slice().to_vec();
        if d0.iter().all(|&c| c == 0.0) {
            return Ok(vec![0.0; n]);
        }
        let resid_of = |x: &[f64]| chart_difference(&self.spec, x, &xi);
        let norm = |r: &[f64]| r.iter().map(|c| c * c).sum::<f64>().sqrt();
        for _ in 0..60 {
            let (x, j) = self
                .forward_with_jacobian(&y)
                .map_err(|e| Error::Shooting(format!("backward map failed: {e}")))?;
            let r = resid_of(&x);
            let rn = norm(&r);
            if rn < 1e-13 * (1.0 + norm(&xi)) {
                return Ok(y);
            }
            let step = j
                .lu()
                .solve(&DVector::from_column_slice(&r))
                .ok_or_else(|| Error::Shooting("conjugate point: singular exponential map".into()))?;
            // damped update
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a - lambda * b).collect();
                let ok = self.forward_raw(&trial).map(|x| norm(&resid_of(&x)));
                match ok {
                    Ok(tn) if tn < rn || lambda < 1e-3 => {
                        y = trial;
                        break;
                    }
                    _ if lambda < 1e-3 => {
                        return Err(Error::Shooting("point outside injectivity neighborhood".into()));
                    }
                    _ => lambda *= 0.5,
                }
            }
            let sn = norm(step.as_slice()) * lambda;
            if sn < 1e-14 * (1.0 + norm(&y)) {
                let x = self.forward_raw(&y)?;
                if norm(&resid_of(&x)) < 1e-10 {
                    return Ok(y);
                }
            }
        }
        Err(Error::Shooting("Newton iteration did not converge".into()))
    }

    /// Pulled-back metric J^T ω J at chart point `y`, row-major.
    pub fn pulled_back_metric(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (x, j) = self.forward_with_jacobian(y)?;
        let g = metric_at(&self.spec, &x).map_err(exits)?.lower;
        let h = j.transpose() * g * &j;
        Ok(h.as_slice().iter().copied().collect::<Vec<_>>())
    }
}

/// Geodesic distance from the normal chart at `p1`.
pub fn geodesic_distance(spec: &MetricSpec, p1: &[f64], p2: &[f64]) -> Result<f64> {
    let chart = normal_coordinates(spec, p1)?;
    let y = chart.backward(p2)?;
    Ok(y.iter().map(|c| c * c).sum::<f64>().sqrt())
}

fn fd_van_vleck(spec: &MetricSpec, p1: &[f64], p2: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = spec.dim();
    let d2 = |a: &[f64], b: &[f64]| -> Result<f64> {
        let chart = normal_coordinates(spec, a)?;
        let y = chart.backward(b)?;
        Ok(y.iter().map(|c| c * c).sum())
    };
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut a = p1.to_vec();
                let mut b = p2.to_vec();
                a[i] += si * h;
                b[j] += sj * h;
                acc += w * d2(&a, &b)?;
            }
            // ∂²(d²/2)/∂a_i∂b_j
            m[(i, j)] = 0.5 * acc / (4.0 * h * h);
        }
    }
    Ok(m)
}

/// |det(−∂²S/∂ξ′∂ξ)| with S = m·d²/(2 dt), by central differences of the
/// action with step 1e−4·d (floor 1e−6). The result at half the step must
/// agree to 1e−3 relative, otherwise an error is returned.
pub fn van_vleck(spec: &MetricSpec, p1: &[f64], p2: &[f64], dt: f64, mass: f64) -> Result<f64> {
    if dt <= 0.0 {
        return Err(Error::Invalid("dt must be positive".into()));
    }
    let p1 = spec.normalize_point(p1)?;
    let p2 = spec.normalize_point(p2)?;
    let d = geodesic_distance(spec, &p1, &p2)?;
    let h = (1e-4 * d).max(1e-6);
    let n = spec.dim() as i32;
    let scale = (mass / dt).powi(n);
    let full = scale * fd_van_vleck(spec, &p1, &p2, h)?.determinant().abs();
    let half = scale * fd_van_vleck(spec, &p1, &p2, 0.5 * h)?.determinant().abs();
    if (full - half).abs() > 1e-3 * full.abs().max(half.abs()) {
        return Err(Error::Shooting(format!(
            "finite-difference Van Vleck determinant unstable ({full} vs {half})"
        )));
    }
    Ok(full)
}

/// Van Vleck determinant from the Jacobian of the exponential map at `p1`:
/// D = (m/dt)^n det ω(p1) / |det ∂ξ₂/∂v|.
pub fn van_vleck_jacobi(spec: &MetricSpec, p1: &[f64], p2: &[f64], dt: f64, mass: f64) -> Result<f64> {
    let chart = normal_coordinates(spec, p1)?;
    let y = chart.backward(p2)?;
    let (_, jy) = chart.forward_with_jacobian(&y)?;
    // ∂ξ/∂v = (∂ξ/∂y)·frame⁻¹
    let jv = jy * &chart.frame_inv;
    let det_g = metric_at(spec, chart.origin())?.det;
    let n = spec.dim() as i32;
    Ok((mass / dt).powi(n) * det_g / jv.determinant().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::preset;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn great_circle_quarter_turn() {
        let m = preset("sphere-2(1)").unwrap();
        let p = exponential_map(&m, &[FRAC_PI_2, 0.0], &[0.0, 1.0], FRAC_PI_2).unwrap();
        assert!((p[0] - FRAC_PI_2).abs() < 1e-9);
        assert!((p[1] - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn normal_chart_round_trip_on_sphere() {
        let m = preset("sphere-2(1)").unwrap();
        let c = normal_coordinates(&m, &[1.0, 0.5]).unwrap();
        let y = [0.3, -0.2];
        let x = c.forward(&y).unwrap();
        let back = c.backward(&x).unwrap();
        assert!((back[0] - y[0]).abs() < 1e-10 && (back[1] - y[1]).abs() < 1e-10);
        let g = c.pulled_back_metric(&[0.0, 0.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12 && (g[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_sphere_closed_form() {
        let m = preset("sphere-2(1)").unwrap();
        let p1 = [1.2, 0.1];
        let p2 = exponential_map(&m, &p1, &[0.6, 0.8 / 1.2f64.sin()], 1.0).unwrap();
        let d = van_vleck_jacobi(&m, &p1, &p2, 1.0, 1.0).unwrap();
        // D = √(ω₁ω₂)·d/sin d at distance d = 1
        let scalar = d / (p1[0].sin() * p2[0].sin());
        assert!((scalar - 1.0 / 1.0f64.sin()).abs() < 1e-8, "{scalar}");
    }
}
