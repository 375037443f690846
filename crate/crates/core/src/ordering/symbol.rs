use std::f64::consts::PI;
use std::fmt;

use faer::Mat;
use num_complex::Complex64 as C64;

use super::OrderingRule;
use crate::dsl::{BinOp, Expr};
use crate::error::{Error, Result};
use crate::fourier::{wavenumber, NdFft};
use crate::geometry::metric_at;
use crate::grid::{Grid, GridOperator, OperatorKind};
use crate::units::Units;

/// Largest grid accepted by the dense kernel assembly.
pub const MAX_SYMBOL_NODES: usize = 4096;

/// Position-dependent factor of a symbol term.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Expr(Expr),
    /// ω^{ij}(ξ) of the grid's metric (0-based indices).
    InverseMetric(usize, usize),
}

impl Coefficient {
    fn eval(&self, grid: &Grid, x: &[f64]) -> Result<f64> {
        let v = match self {
            Coefficient::Expr(e) => e.eval(x),
            Coefficient::InverseMetric(i, j) => metric_at(grid.spec(), x)?.upper[(*i, *j)],
        };
        if !v.is_finite() {
            return Err(Error::Domain {
                node: self.to_string(),
                reason: "symbol coefficient is not finite on the grid",
            });
        }
        Ok(v)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Expr(e) => write!(f, "{e}"),
            Coefficient::InverseMetric(i, j) => write!(f, "w^{}{}", i + 1, j + 1),
        }
    }
}

/// scale · c(ξ) · p_{j1} ⋯ p_{jl}
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTerm {
    pub coeff: Coefficient,
    pub scale: f64,
    pub momenta: Vec<usize>,
}

/// Real phase-space function, polynomial in the momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceSymbol {
    pub n: usize,
    pub terms: Vec<SymbolTerm>,
}

impl PhaseSpaceSymbol {
    pub fn new(n: usize) -> PhaseSpaceSymbol {
        PhaseSpaceSymbol { n, terms: Vec::new() }
    }

    pub fn with_term(mut self, coeff: Coefficient, scale: f64, momenta: &[usize]) -> PhaseSpaceSymbol {
        self.terms.push(SymbolTerm {
            coeff,
            scale,
            momenta: momenta.to_vec(),
        });
        self
    }

    /// ω^{ij} p_i p_j / 2m
    pub fn kinetic(n: usize, mass: f64) -> PhaseSpaceSymbol {
        let mut s = PhaseSpaceSymbol::new(n);
        for i in 0..n {
            for j in 0..n {
                s = s.with_term(Coefficient::InverseMetric(i, j), 0.5 / mass, &[i, j]);
            }
        }
        s
    }

    /// ξ^i
    pub fn coordinate(n: usize, i: usize) -> PhaseSpaceSymbol {
        PhaseSpaceSymbol::new(n).with_term(Coefficient::Expr(Expr::Var(i)), 1.0, &[])
    }

    /// p_j
    pub fn momentum(n: usize, j: usize) -> PhaseSpaceSymbol {
        PhaseSpaceSymbol::new(n).with_term(Coefficient::Expr(Expr::Const(1.0)), 1.0, &[j])
    }

    /// Π (ξ^i)^{powers[i]} · Π p_j over `momenta`.
    pub fn monomial(powers: &[u32], momenta: &[usize]) -> PhaseSpaceSymbol {
        let mut e = Expr::Const(1.0);
        for (i, &k) in powers.iter().enumerate() {
            if k > 0 {
                let f = Expr::Pow(Box::new(Expr::Var(i)), k as f64);
                e = Expr::Binary(BinOp::Mul, Box::new(e), Box::new(f));
            }
        }
        PhaseSpaceSymbol::new(powers.len()).with_term(Coefficient::Expr(e), 1.0, momenta)
    }

    pub fn momentum_degree(&self) -> usize {
        self.terms.iter().map(|t| t.momenta.len()).max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        for t in &self.terms {
            let bad_p = t.momenta.iter().any(|&j| j >= self.n);
            let bad_c = match &t.coeff {
                Coefficient::InverseMetric(i, j) => *i >= self.n || *j >= self.n,
                Coefficient::Expr(e) => e.max_var().is_some_and(|v| v >= self.n),
            };
            if bad_p || bad_c || !t.scale.is_finite() {
                return Err(Error::Invalid(format!("symbol term {t:?} does not fit dimension {}", self.n)));
            }
        }
        Ok(())
    }
}

/// One ordered product weight · P^a c P^b (P^a = Π_d p̂_d^{a_d}).
struct Ordered {
    weight: f64,
    a: Vec<u32>,
    b: Vec<u32>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn orderings(alpha: &[u32], rule: &OrderingRule) -> Vec<Ordered> {
    let mut out = Vec::new();
    if rule.w_weyl != 0.0 {
        // ((p″ + p′)/2)^α expanded binomially in each direction
        let mut a = vec![0u32; alpha.len()];
        loop {
            let w = alpha
                .iter()
                .zip(&a)
                .fold(rule.w_weyl, |acc, (&n, &k)| acc * binomial(n, k) / 2f64.powi(n as i32));
            let b = alpha.iter().zip(&a).map(|(n, k)| n - k).collect();
            out.push(Ordered { weight: w, a: a.clone(), b });
            let mut d = 0;
            while d < a.len() && a[d] == alpha[d] {
                a[d] = 0;
                d += 1;
            }
            if d == a.len() {
                break;
            }
            a[d] += 1;
        }
    }
    if rule.w_rivier != 0.0 {
        let zero = vec![0u32; alpha.len()];
        out.push(Ordered {
            weight: 0.5 * rule.w_rivier,
            a: zero.clone(),
            b: alpha.to_vec(),
        });
        out.push(Ordered {
            weight: 0.5 * rule.w_rivier,
            a: alpha.to_vec(),
            b: zero,
        });
    }
    out
}

/// Kernel quantization of `f` on a fully periodic grid.
///
/// The phase-space integral is evaluated on the momentum lattice conjugate to
/// the grid, so for band-limited ψ the result is exact: a Weyl-ordered term
/// c·p^α becomes the symmetrized sum of P^a c P^{α−a}, a Rivier-ordered one
/// ½(c P^α + P^α c), with p̂ = ω^{−1/4}(−iħ∂)ω^{1/4}.
pub fn quantize_symbol(f: &PhaseSpaceSymbol, rule: &OrderingRule, grid: &Grid, units: Units) -> Result<GridOperator> {
    if !grid.is_periodic() {
        return Err(Error::Grid("kernel quantization needs a grid periodic in every coordinate".into()));
    }
    if f.n != grid.dim() {
        return Err(Error::Invalid(format!(
            "symbol of dimension {} on a {}-dimensional grid",
            f.n,
            grid.dim()
        )));
    }
    f.validate()?;
    let size = grid.len();
    if size > MAX_SYMBOL_NODES {
        return Err(Error::Grid(format!(
            "kernel quantization assembles a dense matrix; {size} nodes exceeds {MAX_SYMBOL_NODES}"
        )));
    }
    let shape = grid.shape().to_vec();
    let n = shape.len();
    // p_d at every Fourier bin
    let mut momenta = vec![vec![0.0; size]; n];
    for k in 0..size {
        let mi = grid.multi_index(k);
        for d in 0..n {
            let (lo, hi) = grid.bounds(d);
            momenta[d][k] = units.hbar * 2.0 * PI * wavenumber(mi[d], shape[d]) / (hi - lo);
        }
    }
    let power = |e: &[u32], k: usize| -> f64 { (0..n).map(|d| momenta[d][k].powi(e[d] as i32)).product() };

    let mut products: Vec<(Vec<f64>, Ordered)> = Vec::new();
    for t in &f.terms {
        let mut c = Vec::with_capacity(size);
        for k in 0..size {
            c.push(t.scale * t.coeff.eval(grid, grid.node(k))?);
        }
        let mut alpha = vec![0u32; n];
        for &j in &t.momenta {
            alpha[j] += 1;
        }
        for o in orderings(&alpha, rule) {
            products.push((c.clone(), o));
        }
    }

    let fft = NdFft::new(&shape);
    let quarter: Vec<f64> = grid.sqrt_det().iter().map(|s| s.sqrt()).collect();
    let mut m = Mat::<C64>::zeros(size, size);
    let mut col = vec![C64::default(); size];
    let mut acc = vec![C64::default(); size];
    for src in 0..size {
        acc.iter_mut().for_each(|v| *v = C64::default());
        for (c, o) in &products {
            col.iter_mut().for_each(|v| *v = C64::default());
            col[src] = C64::new(quarter[src], 0.0);
            if o.b.iter().any(|&e| e > 0) {
                fft.forward(&mut col);
                for (k, v) in col.iter_mut().enumerate() {
                    *v *= power(&o.b, k);
                }
                fft.inverse(&mut col);
            }
            for (v, ck) in col.iter_mut().zip(c) {
                *v *= *ck;
            }
            if o.a.iter().any(|&e| e > 0) {
                fft.forward(&mut col);
                for (k, v) in col.iter_mut().enumerate() {
                    *v *= power(&o.a, k);
                }
                fft.inverse(&mut col);
            }
            for (a, v) in acc.iter_mut().zip(&col) {
                *a += *v * o.weight;
            }
        }
        for (dst, v) in acc.iter().enumerate() {
            m[(dst, src)] = *v / quarter[dst];
        }
    }
    GridOperator::from_dense(m, grid.weights(), OperatorKind::Quantized, format!("symbol/{}", rule.label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::preset;
    use crate::grid::{build_grid, Axis, Boundary};

    fn ring(m: usize) -> Grid {
        let spec = preset("flat-cartesian-1").unwrap();
        build_grid(&spec, &[Axis::bounded(m, 0.0, 2.0 * PI, Boundary::Periodic)]).unwrap()
    }

    #[test]
    fn coordinate_symbol_is_diagonal() {
        let g = ring(16);
        let op = quantize_symbol(&PhaseSpaceSymbol::coordinate(1, 0), &OrderingRule::weyl(), &g, Units::default())
            .unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { g.node(i)[0] } else { 0.0 };
                assert!((op.entry(i, j) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn momentum_differentiates_plane_waves() {
        let g = ring(32);
        let op = quantize_symbol(&PhaseSpaceSymbol::momentum(1, 0), &OrderingRule::rivier(), &g, Units::default())
            .unwrap();
        let psi: Vec<C64> = g.sample(|x| C64::from_polar(1.0, 3.0 * x[0]));
        let out = op.apply(&psi);
        for (a, b) in out.iter().zip(&psi) {
            assert!((a - b * 3.0).norm() < 1e-10);
        }
    }

    #[test]
    fn weyl_split_counts() {
        let o = orderings(&[2], &OrderingRule::weyl());
        let w: Vec<f64> = o.iter().map(|o| o.weight).collect();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
    }
}
