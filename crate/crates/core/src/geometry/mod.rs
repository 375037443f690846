//! Pointwise differential geometry of a metric chart.

mod geodesic;
pub(crate) mod ode;

pub use geodesic::{
    exponential_map, geodesic_distance, normal_coordinates, van_vleck, van_vleck_jacobi, GeodesicEnd, NormalChart,
};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dsl::{eval_jet, Expr, Jet, MetricSpec};
use crate::error::{Error, Result};

/// Metric tensor, inverse and determinant at one point.
#[derive(Clone, Debug)]
pub struct MetricValue {
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub det: f64,
    pub sqrt_det: f64,
}

/// Christoffel symbols `gamma[k][i][j]` = γ^k_ij and contractions γ_i = γ^k_ki.
#[derive(Clone, Debug)]
pub struct ChristoffelData {
    pub n: usize,
    pub gamma: Vec<f64>,
    pub contracted: Vec<f64>,
}

impl ChristoffelData {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.n + i) * self.n + j]
    }
}

/// Riemann tensor R^a_bcd (flattened a,b,c,d), Ricci tensor and scalar.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub n: usize,
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl CurvatureData {
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    pub fn ricci(&self, b: usize, d: usize) -> f64 {
        self.ricci[b * self.n + d]
    }
}

fn check_spd(values: &[f64], n: usize, point: &[f64]) -> Result<()> {
    let m = DMatrix::from_row_slice(n, n, values);
    if values.iter().all(|v| v.is_finite()) && m.clone().cholesky().is_some() {
        return Ok(());
    }
    let detail = if values.iter().all(|v| v.is_finite()) {
        let eig = SymmetricEigen::new(m).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        format!("smallest eigenvalue {min:e} (sign {})", if min < 0.0 { "negative" } else { "zero" })
    } else {
        "non-finite component".to_string()
    };
    Err(Error::NotPositiveDefinite {
        point: point.to_vec(),
        detail,
    })
}

/// Metric components as jets together with the inverse and determinant jets.
#[derive(Clone, Debug)]
pub struct MetricJet {
    n: usize,
    order: u8,
    lower: Vec<Jet>,
    upper: Vec<Jet>,
    det: Jet,
}

impl MetricJet {
    /// Evaluates the metric jet of `spec` at `p` (periodic coordinates reduced).
    pub fn at(spec: &MetricSpec, p: &[f64], order: u8) -> Result<MetricJet> {
        let p = spec.normalize_point(p)?;
        let lower = spec.lower_jets(&p, order)?;
        MetricJet::from_lower(lower, &p)
    }

    /// Builds from n×n row-major jets of ω_ij; `point` is used for error reports.
    pub fn from_lower(lower: Vec<Jet>, point: &[f64]) -> Result<MetricJet> {
        let n = (lower.len() as f64).sqrt().round() as usize;
        assert_eq!(n * n, lower.len(), "lower jets must be n×n");
        let values: Vec<f64> = lower.iter().map(Jet::value).collect();
        check_spd(&values, n, point)?;
        let order = lower.iter().map(Jet::order).min().unwrap_or(0);
        let dim = lower[0].dim();
        // Gauss-Jordan without pivoting; safe for SPD input.
        let mut a = lower.clone();
        let mut b: Vec<Jet> = (0..n * n)
            .map(|k| Jet::constant(dim, order, if k / n == k % n { 1.0 } else { 0.0 }))
            .collect();
        let mut det = Jet::constant(dim, order, 1.0);
        for c in 0..n {
            let piv = a[c * n + c].clone();
            det = &det * &piv;
            let inv = piv.recip();
            for j in 0..n {
                a[c * n + j] = &a[c * n + j] * &inv;
                b[c * n + j] = &b[c * n + j] * &inv;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a[r * n + c].clone();
                for j in 0..n {
                    a[r * n + j] = &a[r * n + j] - &(&f * &a[c * n + j]);
                    b[r * n + j] = &b[r * n + j] - &(&f * &b[c * n + j]);
                }
            }
        }
        // symmetrize the inverse exactly
        for i in 0..n {
            for j in i + 1..n {
                let s = (&b[i * n + j] + &b[j * n + i]).scale(0.5);
                b[i * n + j] = s.clone();
                b[j * n + i] = s;
            }
        }
        Ok(MetricJet {
            n,
            order,
            lower,
            upper: b,
            det,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn lower(&self, i: usize, j: usize) -> &Jet {
        &self.lower[i * self.n + j]
    }

    pub fn upper(&self, i: usize, j: usize) -> &Jet {
        &self.upper[i * self.n + j]
    }

    pub fn det(&self) -> &Jet {
        &self.det
    }

    pub fn value(&self) -> MetricValue {
        let n = self.n;
        let det = self.det.value();
        MetricValue {
            lower: DMatrix::from_fn(n, n, |i, j| self.lower(i, j).value()),
            upper: DMatrix::from_fn(n, n, |i, j| self.upper(i, j).value()),
            det,
            sqrt_det: det.sqrt(),
        }
    }

    /// Christoffel jets γ^k_ij, flattened (k,i,j), one order below the metric.
    pub fn christoffel_jets(&self) -> Vec<Jet> {
        let n = self.n;
        let d: Vec<Vec<Jet>> = self.lower.iter().map(|g| (0..n).map(|i| g.partial(i)).collect()).collect();
        // first kind: Γ_lij = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
        let mut first = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s = &(&d[l * n + j][i] + &d[l * n + i][j]) - &d[i * n + j][l];
                    first.push(s.scale(0.5));
                }
            }
        }
        let mut out: Vec<Jet> = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if j < i {
                        let v: Jet = out[(k * n + j) * n + i].clone();
                        out.push(v);
                        continue;
                    }
                    let mut acc = &self.upper[k * n] * &first[i * n + j];
                    for l in 1..n {
                        acc = &acc + &(&self.upper[k * n + l] * &first[(l * n + i) * n + j]);
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    /// γ_i = ∂_i ln √ω as jets, one order below the metric.
    pub fn contracted_jets(&self) -> Vec<Jet> {
        let half_log = self.det.ln().scale(0.5);
        (0..self.n).map(|i| half_log.partial(i)).collect()
    }

    pub fn christoffel(&self) -> ChristoffelData {
        let n = self.n;
        let g = self.christoffel_jets();
        let gamma: Vec<f64> = g.iter().map(Jet::value).collect();
        let contracted = (0..n)
            .map(|i| (0..n).map(|k| gamma[(k * n + k) * n + i]).sum())
            .collect();
        ChristoffelData { n, gamma, contracted }
    }

    /// Needs a metric jet of order ≥ 2.
    pub fn curvature(&self) -> CurvatureData {
        let n = self.n;
        assert!(self.order >= 2, "curvature needs second derivatives");
        let gj = self.christoffel_jets();
        let g = |a: usize, b: usize, c: usize| gj[(a * n + b) * n + c].value();
        let dg = |a: usize, b: usize, c: usize, d: usize| gj[(a * n + b) * n + c].grad(d);
        let mut riemann = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = dg(a, b, c, d) - dg(a, b, d, c);
                        for e in 0..n {
                            v += g(a, d, e) * g(e, b, c) - g(a, c, e) * g(e, b, d);
                        }
                        riemann[((a * n + b) * n + c) * n + d] = v;
                    }
                }
            }
        }
        let mut ricci = vec![0.0; n * n];
        for b in 0..n {
            for d in 0..n {
                ricci[b * n + d] = (0..n).map(|a| riemann[((a * n + b) * n + a) * n + d]).sum();
            }
        }
        let scalar = (0..n)
            .flat_map(|b| (0..n).map(move |d| (b, d)))
            .map(|(b, d)| self.upper(b, d).value() * ricci[b * n + d])
            .sum();
        CurvatureData {
            n,
            riemann,
            ricci,
            scalar,
        }
    }

    /// Δf at the jet's point from an order-2 jet of f (metric order ≥ 1).
    pub fn laplace_beltrami(&self, f: &Jet) -> f64 {
        let n = self.n;
        let gam = self.contracted_jets();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let up = self.upper(i, j);
                acc += up.value() * f.hess(i, j);
                acc += (up.grad(i) + up.value() * gam[i].value()) * f.grad(j);
            }
        }
        acc
    }
}

/// Metric, inverse and determinant at `p`.
pub fn metric_at(spec: &MetricSpec, p: &[f64]) -> Result<MetricValue> {
    Ok(MetricJet::at(spec, p, 0)?.value())
}

pub fn christoffel(spec: &MetricSpec, p: &[f64]) -> Result<ChristoffelData> {
    Ok(MetricJet::at(spec, p, 1)?.christoffel())
}

pub fn curvature(spec: &MetricSpec, p: &[f64]) -> Result<CurvatureData> {
    Ok(MetricJet::at(spec, p, 2)?.curvature())
}

pub fn scalar_curvature(spec: &MetricSpec, p: &[f64]) -> Result<f64> {
    Ok(curvature(spec, p)?.scalar)
}

/// (1/√ω)∂_i(√ω ω^ij ∂_j f) at `p`.
pub fn laplace_beltrami_apply(spec: &MetricSpec, f: &Expr, p: &[f64]) -> Result<f64> {
    let q = spec.normalize_point(p)?;
    let mj = MetricJet::at(spec, &q, 1)?;
    let fj = eval_jet(f, &q, 2)?;
    Ok(mj.laplace_beltrami(&fj))
}

/// ω-norm of a coordinate vector at `p`.
pub fn norm_at(mv: &MetricValue, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += mv.lower[(i, j)] * v[i] * v[j];
        }
    }
    s.sqrt()
}
