//! Curvature coefficients of the quantum potential in normal coordinates.

use nalgebra::DVector;

use super::{breakdown_from_jet, OrderingRule, QuantumPotentialBreakdown};
use crate::dsl::{Jet, MetricSpec};
use crate::error::{Error, Result};
use crate::geometry::ode::Tolerance;
use crate::geometry::{normal_coordinates, scalar_curvature, MetricJet, NormalChart};
use crate::units::Units;

/// Below this |R| the coefficient is reported as flagged.
pub const R_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CoefficientResult {
    pub rule: OrderingRule,
    /// bracket / R, or NaN when flagged.
    pub value: f64,
    pub bracket: f64,
    pub scalar_curvature: f64,
    /// |R| below `R_THRESHOLD`; `value` is then meaningless.
    pub flagged: bool,
    pub breakdown: QuantumPotentialBreakdown,
}

fn chart_tolerance() -> Tolerance {
    Tolerance {
        rtol: 1e-13,
        atol: 1e-15,
        max_steps: 200_000,
    }
}

/// Metric jet (order 2) of the pulled-back metric at chart point `y0`, by
/// Richardson-extrapolated central differences with base step `h`.
fn pulled_back_jet(chart: &NormalChart, y0: &[f64], h: f64) -> Result<MetricJet> {
    let n = y0.len();
    let nn = n * n;
    let eval = |dy: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut y = y0.to_vec();
        for &(a, s) in dy {
            y[a] += s;
        }
        chart.pulled_back_metric(&y)
    };
    let g0 = eval(&[])?;
    // first and second differences at steps h and h/2
    let mut grad = vec![vec![0.0; n]; nn];
    let mut hess = vec![vec![0.0; n * n]; nn];
    let diffs = |step: f64| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let mut gr = vec![vec![0.0; n]; nn];
        let mut he = vec![vec![0.0; n * n]; nn];
        for a in 0..n {
            let gp = eval(&[(a, step)])?;
            let gm = eval(&[(a, -step)])?;
            for c in 0..nn {
                gr[c][a] = (gp[c] - gm[c]) / (2.0 * step);
                he[c][a * n + a] = (gp[c] - 2.0 * g0[c] + gm[c]) / (step * step);
            }
            for b in a + 1..n {
                let pp = eval(&[(a, step), (b, step)])?;
                let pm = eval(&[(a, step), (b, -step)])?;
                let mp = eval(&[(a, -step), (b, step)])?;
                let mm = eval(&[(a, -step), (b, -step)])?;
                for c in 0..nn {
                    let v = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * step * step);
                    he[c][a * n + b] = v;
                    he[c][b * n + a] = v;
                }
            }
        }
        Ok((gr, he))
    };
    let (g1, h1) = diffs(h)?;
    let (g2, h2) = diffs(0.5 * h)?;
    for c in 0..nn {
        for a in 0..n {
            grad[c][a] = (4.0 * g2[c][a] - g1[c][a]) / 3.0;
        }
        for ab in 0..n * n {
            hess[c][ab] = (4.0 * h2[c][ab] - h1[c][ab]) / 3.0;
        }
    }
    let lower: Vec<Jet> = (0..nn)
        .map(|c| {
            // symmetrize over the component pair
            let (i, j) = (c / n, c % n);
            let t = j * n + i;
            let gr: Vec<f64> = (0..n).map(|a| 0.5 * (grad[c][a] + grad[t][a])).collect();
            let he: Vec<f64> = (0..n * n).map(|ab| 0.5 * (hess[c][ab] + hess[t][ab])).collect();
            Jet::from_parts(0.5 * (g0[c] + g0[t]), &gr, Some(&he), None)
        })
        .collect();
    MetricJet::from_lower(lower, y0)
}

/// Evaluates the rule's bracket at the origin of the normal chart and divides
/// by the scalar curvature there. `fd_step` defaults to 2e−3.
pub fn curvature_coefficient(
    spec: &MetricSpec,
    origin: &[f64],
    rule: &OrderingRule,
    fd_step: Option<f64>,
) -> Result<CoefficientResult> {
    let chart = normal_coordinates(spec, origin)
        .map_err(|e| Error::Shooting(format!("normal chart construction failed: {e}")))?
        .with_tolerance(chart_tolerance());
    let h = fd_step.unwrap_or(2e-3);
    let n = spec.dim();
    let mj = pulled_back_jet(&chart, &vec![0.0; n], h)?;
    let breakdown = breakdown_from_jet(&mj, rule, Units::default());
    let r = scalar_curvature(spec, chart.origin())?;
    let flagged = r.abs() < R_THRESHOLD;
    Ok(CoefficientResult {
        rule: rule.clone(),
        value: if flagged { f64::NAN } else { breakdown.bracket / r },
        bracket: breakdown.bracket,
        scalar_curvature: r,
        flagged,
        breakdown,
    })
}

/// Observed linear behaviour of the chart bracket around the origin.
#[derive(Clone, Debug)]
pub struct SlopeReport {
    /// ∂_a bracket at y = 0 in chart coordinates.
    pub bracket_slope: Vec<f64>,
    /// ∂_a R at the origin in chart coordinates.
    pub curvature_slope: Vec<f64>,
}

/// Measures the chart-coordinate gradient of the bracket at the origin and
/// the gradient of R for comparison. Reported, not asserted.
pub fn curvature_slope(spec: &MetricSpec, origin: &[f64], rule: &OrderingRule, delta: f64) -> Result<SlopeReport> {
    let chart = normal_coordinates(spec, origin)?.with_tolerance(chart_tolerance());
    let n = spec.dim();
    let mut bracket_slope = vec![0.0; n];
    for a in 0..n {
        let mut yp = vec![0.0; n];
        let mut ym = vec![0.0; n];
        yp[a] = delta;
        ym[a] = -delta;
        let bp = breakdown_from_jet(&pulled_back_jet(&chart, &yp, 2e-3)?, rule, Units::default()).bracket;
        let bm = breakdown_from_jet(&pulled_back_jet(&chart, &ym, 2e-3)?, rule, Units::default()).bracket;
        bracket_slope[a] = (bp - bm) / (2.0 * delta);
    }
    // ∂R in coordinates, then pushed into the orthonormal frame
    let o = chart.origin().to_vec();
    let hr = 1e-4;
    let mut grad = DVector::zeros(n);
    for i in 0..n {
        let mut p = o.clone();
        let mut m = o.clone();
        p[i] += hr;
        m[i] -= hr;
        grad[i] = (scalar_curvature(spec, &p)? - scalar_curvature(spec, &m)?) / (2.0 * hr);
    }
    let cs = chart.frame().transpose() * grad;
    Ok(SlopeReport {
        bracket_slope,
        curvature_slope: cs.as_slice().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::preset;

    #[test]
    fn flat_metric_is_flagged() {
        let m = preset("flat-cartesian-2").unwrap();
        let r = curvature_coefficient(&m, &[0.1, 0.2], &OrderingRule::weyl(), None).unwrap();
        assert!(r.flagged);
        assert!(r.bracket.abs() < 1e-8);
    }

    #[test]
    fn sphere_weyl_quarter() {
        let m = preset("sphere-2(1)").unwrap();
        let r = curvature_coefficient(&m, &[1.0, 0.4], &OrderingRule::weyl(), None).unwrap();
        assert!((r.value - 0.25).abs() < 1e-4, "{}", r.value);
    }
}
