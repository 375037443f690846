use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use statrs::function::erf::erfc;

use super::{free_prefactor, Construction};
use crate::dsl::MetricSpec;
use crate::error::{Error, Result};
use crate::grid::{evolve, norm, Grid, GridOperator, OperatorKind};
use crate::ordering::{quantize_symbol, OrderingRule, PhaseSpaceSymbol};
use crate::units::Units;

/// Propagator on grid samples: `values` maps nodal values of ψ(t′) to nodal
/// values of ψ(t″), the intermediate √ω quadrature already applied.
#[derive(Clone, Debug)]
pub struct PropagatorKernel {
    pub grid: Grid,
    pub dt_total: f64,
    pub slices: usize,
    pub values: Mat<C64>,
    pub rule: OrderingRule,
    pub construction: Construction,
    /// ‖K·1‖/‖1‖ in the weighted norm.
    pub constant_norm: f64,
}

impl PropagatorKernel {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).fold(C64::default(), |acc, j| acc + self.values[(i, j)] * psi[j]))
            .collect()
    }

    pub fn as_operator(&self) -> GridOperator {
        GridOperator::from_dense(self.values.clone(), self.grid.weights(), OperatorKind::Kernel, "kernel")
            .expect("kernel matches its grid")
    }
}

/// Trigonometric cardinal functions of an M-point periodic grid at `x`.
fn cardinal(x: f64, lo: f64, period: f64, m: usize, out: &mut [f64]) {
    let h = period / m as f64;
    let theta = PI * (x - lo) / period;
    let num = (m as f64 * theta).sin();
    for (j, o) in out.iter_mut().enumerate() {
        let d = PI * (x - lo - j as f64 * h) / period;
        let s = d.sin();
        if s.abs() < 1e-12 {
            *o = 1.0;
            continue;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *o = if m % 2 == 0 {
            sign * num * d.cos() / (m as f64 * s)
        } else {
            sign * num / (m as f64 * s)
        };
    }
}

struct Line<'a> {
    spec: &'a MetricSpec,
    lo: f64,
    period: f64,
}

impl Line<'_> {
    fn reduce(&self, x: f64) -> f64 {
        self.lo + (x - self.lo).rem_euclid(self.period)
    }

    fn metric(&self, x: f64) -> Result<f64> {
        let p = self.spec.normalize_point(&[self.reduce(x)])?;
        let g = self.spec.lower_values(&p)[0];
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                point: p,
                detail: format!("ω = {g}"),
            });
        }
        Ok(g)
    }
}

/// One slice as a matrix on nodal values.
///
/// Row b integrates the short-time kernel K(x_b, a) against the trigonometric
/// interpolant of ψ over a ∈ x_b + [−Δ, Δ] on the covering line, with a
/// smooth erfc taper; the Fresnel factor is resolved by the trapezoid rule.
fn slice_matrix(spec: &MetricSpec, rule: &OrderingRule, grid: &Grid, eps: f64, units: Units) -> Result<Mat<C64>> {
    let m = grid.len();
    let (lo, hi) = grid.bounds(0);
    let line = Line {
        spec,
        lo,
        period: hi - lo,
    };
    let nodes: Vec<f64> = (0..m).map(|k| grid.node(k)[0]).collect();
    let g_nodes: Vec<f64> = nodes.iter().map(|&x| line.metric(x)).collect::<Result<_>>()?;
    let g_min = g_nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let g_max = g_nodes.iter().cloned().fold(0.0, f64::max);
    let scale = units.mass / (2.0 * units.hbar * eps);
    // bounds on the ordered inverse metric over the window
    let part = |w: f64, small: bool| if (w > 0.0) == small { w / g_min } else { w / g_max };
    let w_hi = part(rule.w_weyl, true) + part(rule.w_rivier, true);
    let (a_min, a_max) = (scale / w_hi, 3.0 * scale * g_max);
    // The taper's error behaves like exp(−X²/c²/(1 + X²/c⁴)) with X = αΔ0²
    // and c = Δ0/s; X = 64, c = 7 puts it near 1e−13.
    let delta0 = (64.0 / a_min).sqrt();
    let s = delta0 / 7.0;
    let reach = delta0 + 6.0 * s;
    let f_max = 2.0 * a_max * reach + PI * m as f64 / line.period;
    let count = ((2.0 * reach * 1.5 * f_max / PI).ceil() as usize).max(64);
    let h = 2.0 * reach / count as f64;
    let pref = free_prefactor(1, eps, units);

    let offsets: Vec<f64> = (0..=count).map(|q| -reach + q as f64 * h).collect();
    let taper: Vec<f64> = offsets.iter().map(|d| 0.5 * erfc((d.abs() - delta0) / s)).collect();
    let mut out = Mat::<C64>::zeros(m, m);
    let mut t = vec![0.0; m];
    for b in 0..m {
        let xb = nodes[b];
        let inv_b = 1.0 / g_nodes[b];
        for (q, &d) in offsets.iter().enumerate() {
            if taper[q] < 1e-16 {
                continue;
            }
            let a = xb + d;
            let ga = line.metric(a)?;
            let mut w = rule.w_rivier * 0.5 * (1.0 / ga + inv_b);
            if rule.w_weyl != 0.0 {
                w += rule.w_weyl / line.metric(xb + 0.5 * d)?;
            }
            if w <= 0.0 {
                if taper[q] < 1e-12 {
                    continue;
                }
                return Err(Error::NotPositiveDefinite {
                    point: vec![a, xb],
                    detail: "ordered inverse metric is not positive inside the slice window".into(),
                });
            }
            let g_tilde = 1.0 / w;
            let amp = g_tilde.sqrt() / (ga * g_nodes[b]).powf(0.25);
            let phase = units.mass * g_tilde * d * d / (2.0 * units.hbar * eps);
            let k = pref * C64::from_polar(amp * ga.sqrt() * h * taper[q], phase);
            cardinal(a, lo, line.period, m, &mut t);
            for (j, tj) in t.iter().enumerate() {
                out[(b, j)] += k * *tj;
            }
        }
    }
    Ok(out)
}

/// Time-sliced propagator for t_total split into `slices` equal steps,
/// on a one-dimensional periodic grid.
pub fn compose_propagator(
    spec: &MetricSpec,
    rule: &OrderingRule,
    grid: &Grid,
    t_total: f64,
    slices: usize,
    units: Units,
) -> Result<PropagatorKernel> {
    if slices == 0 {
        return Err(Error::Invalid("at least one time slice is required".into()));
    }
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(Error::Invalid("propagation time must be positive".into()));
    }
    if grid.dim() != 1 || !grid.is_periodic() {
        return Err(Error::Grid("time-sliced composition needs a one-dimensional periodic grid".into()));
    }
    if spec.dim() != 1 {
        return Err(Error::Invalid("metric and grid dimensions differ".into()));
    }
    let eps = t_total / slices as f64;
    let s = slice_matrix(spec, rule, grid, eps, units)?;
    let mut k = s.clone();
    for _ in 1..slices {
        k = &s * &k;
    }
    let w = grid.weights();
    let ones = vec![C64::new(1.0, 0.0); grid.len()];
    let mut kernel = PropagatorKernel {
        grid: grid.clone(),
        dt_total: t_total,
        slices,
        values: k,
        rule: rule.clone(),
        construction: Construction::Sliced,
        constant_norm: 0.0,
    };
    kernel.constant_norm = norm(&w, &kernel.apply(&ones)) / norm(&w, &ones);
    Ok(kernel)
}

/// Distances between composed-kernel evolution and direct evolution under
/// the kernel-quantized kinetic operator of the same rule.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub slices: Vec<usize>,
    pub distances: Vec<f64>,
    /// Least-squares slope of −ln d against ln N.
    pub order: f64,
    pub monotone: bool,
    pub reference: Vec<C64>,
}

pub fn convergence_study(
    spec: &MetricSpec,
    rule: &OrderingRule,
    grid: &Grid,
    t_total: f64,
    slices: &[usize],
    psi0: &[C64],
    oracle_steps: usize,
    units: Units,
) -> Result<ConvergenceReport> {
    if psi0.len() != grid.len() {
        return Err(Error::Invalid("initial state does not match the grid".into()));
    }
    let h = quantize_symbol(&PhaseSpaceSymbol::kinetic(1, units.mass), rule, grid, units)?;
    let reference = evolve(&h, psi0, t_total, oracle_steps, units.hbar)?;
    let w = grid.weights();
    let mut distances = Vec::with_capacity(slices.len());
    for &n in slices {
        let k = compose_propagator(spec, rule, grid, t_total, n, units)?;
        let diff: Vec<C64> = k.apply(psi0).iter().zip(&reference).map(|(a, b)| a - b).collect();
        distances.push(norm(&w, &diff));
    }
    let monotone = distances.windows(2).all(|p| p[1] < p[0]);
    Ok(ConvergenceReport {
        slices: slices.to_vec(),
        order: fitted_order(slices, &distances),
        distances,
        monotone,
        reference,
    })
}

pub(crate) fn fitted_order(ns: &[usize], d: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::preset;
    use crate::grid::{build_grid, Axis, Boundary};
    use crate::propagator::short_time_kernel;

    #[test]
    fn cardinal_functions_interpolate() {
        let mut t = vec![0.0; 16];
        let l = 2.0 * PI;
        cardinal(3.0 * l / 16.0, 0.0, l, 16, &mut t);
        for (j, v) in t.iter().enumerate() {
            assert!((v - if j == 3 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        // reproduces a band-limited function between nodes
        let x = 0.77;
        cardinal(x, 0.0, l, 16, &mut t);
        let f: f64 = (0..16).map(|j| (3.0 * j as f64 * l / 16.0).cos() * t[j]).sum();
        assert!((f - (3.0 * x).cos()).abs() < 1e-12);
    }

    #[test]
    fn single_flat_slice_is_exact_on_modes() {
        let m = preset("flat-cartesian-1").unwrap();
        let g = build_grid(&m, &[Axis::bounded(32, 0.0, 2.0 * PI, Boundary::Periodic)]).unwrap();
        let u = Units::default();
        let k = compose_propagator(&m, &OrderingRule::new_rule(), &g, 0.05, 1, u).unwrap();
        let psi: Vec<C64> = g.sample(|x| C64::from_polar(1.0, 4.0 * x[0]));
        let out = k.apply(&psi);
        let phase = C64::from_polar(1.0, -0.5 * 16.0 * 0.05);
        for (a, b) in out.iter().zip(&psi) {
            assert!((a - b * phase).norm() < 1e-9, "{a} vs {}", b * phase);
        }
    }

    #[test]
    fn one_slice_matches_brute_force_quadrature() {
        let spec = crate::dsl::parse_metric_config(
            "dimension = 1\ncomponent.1.1 = \"(1 + 0.2*sin(x1))^2\"\nrange.1 = [0, \"2*pi\", true]\n",
        )
        .unwrap();
        let g = build_grid(&spec, &[Axis::periodic(24)]).unwrap();
        let u = Units::default();
        let eps = 0.04;
        let rule = OrderingRule::weyl();
        let k = compose_propagator(&spec, &rule, &g, eps, 1, u).unwrap();
        let psi = |x: f64| (x.sin()).exp();
        let nodal: Vec<C64> = g.sample(|x| C64::new(psi(x[0]), 0.0));
        let out = k.apply(&nodal);
        // direct midpoint quadrature of K(x_b, a)ψ(a)√ω(a) with a Gaussian taper
        let xb = g.node(5)[0];
        let (n, reach) = (40000, 2.5);
        let mut acc = C64::default();
        for q in 0..=n {
            let d = -reach + 2.0 * reach * q as f64 / n as f64;
            let a = xb + d;
            let taper = 0.5 * erfc((d.abs() - 1.6) / 0.25);
            let kv = short_time_kernel(&spec, &rule, &[xb], &[a], eps, u).unwrap();
            let sw = 1.0 + 0.2 * a.sin();
            acc += kv * psi(a) * sw * taper * (2.0 * reach / n as f64);
        }
        assert!((out[5] - acc).norm() < 1e-3 * acc.norm(), "{} vs {acc}", out[5]);
    }
}
