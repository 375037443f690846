//! Operator orderings, quantum potentials and the quantization maps.

mod coefficient;
mod symbol;

pub use coefficient::{curvature_coefficient, curvature_slope, CoefficientResult, SlopeReport, R_THRESHOLD};
pub use symbol::{quantize_symbol, Coefficient, PhaseSpaceSymbol, SymbolTerm, MAX_SYMBOL_NODES};

use std::fmt;

use num_complex::Complex64;

use crate::dsl::{eval_jet, Expr, Jet, MetricSpec};
use crate::error::{Error, Result};
use crate::geometry::MetricJet;
use crate::units::Units;

/// Weighted combination of the Weyl and Rivier orderings.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingRule {
    pub w_weyl: f64,
    pub w_rivier: f64,
    pub label: String,
}

impl OrderingRule {
    pub fn weyl() -> OrderingRule {
        OrderingRule {
            w_weyl: 1.0,
            w_rivier: 0.0,
            label: "weyl".into(),
        }
    }

    pub fn rivier() -> OrderingRule {
        OrderingRule {
            w_weyl: 0.0,
            w_rivier: 1.0,
            label: "rivier".into(),
        }
    }

    /// 2·Weyl − Rivier.
    pub fn new_rule() -> OrderingRule {
        OrderingRule {
            w_weyl: 2.0,
            w_rivier: -1.0,
            label: "new".into(),
        }
    }

    pub fn presets() -> [OrderingRule; 3] {
        [OrderingRule::weyl(), OrderingRule::rivier(), OrderingRule::new_rule()]
    }

    /// Explicit weights; they must sum to 1.
    pub fn weighted(w_weyl: f64, w_rivier: f64) -> Result<OrderingRule> {
        if !(w_weyl.is_finite() && w_rivier.is_finite()) || (w_weyl + w_rivier - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "ordering weights ({w_weyl}, {w_rivier}) must be finite and sum to 1"
            )));
        }
        let label = match (w_weyl, w_rivier) {
            (1.0, 0.0) => "weyl".to_string(),
            (0.0, 1.0) => "rivier".to_string(),
            (2.0, -1.0) => "new".to_string(),
            _ => format!("{w_weyl},{w_rivier}"),
        };
        Ok(OrderingRule {
            w_weyl,
            w_rivier,
            label,
        })
    }

    /// Accepts `weyl`, `rivier`, `new` or an explicit pair `wW,wR`.
    pub fn parse(text: &str) -> Result<OrderingRule> {
        match text.trim().to_ascii_lowercase().as_str() {
            "weyl" => Ok(OrderingRule::weyl()),
            "rivier" => Ok(OrderingRule::rivier()),
            "new" | "2w-r" => Ok(OrderingRule::new_rule()),
            other => {
                let parts: Vec<&str> = other.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Invalid(format!("unknown ordering rule '{text}'")));
                }
                let w: Vec<f64> = parts
                    .iter()
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Invalid(format!("bad ordering weights '{text}'")))?;
                OrderingRule::weighted(w[0], w[1])
            }
        }
    }
}

impl fmt::Display for OrderingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// The three noncovariant pieces and the rule-weighted bracket.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumPotentialBreakdown {
    /// ½∂_j(ω^ij γ_i)
    pub term_div: f64,
    /// ¼∂_i∂_j ω^ij
    pub term_dd: f64,
    /// ¼ω^ij γ_i γ_j
    pub term_gg: f64,
    pub bracket: f64,
    pub v_q: f64,
}

impl QuantumPotentialBreakdown {
    pub fn bracket_weyl(&self) -> f64 {
        self.term_div + self.term_dd + self.term_gg
    }

    pub fn bracket_rivier(&self) -> f64 {
        self.term_div + 2.0 * self.term_dd + self.term_gg
    }
}

/// Bracket terms from a metric jet of order ≥ 2.
pub fn breakdown_from_jet(mj: &MetricJet, rule: &OrderingRule, units: Units) -> QuantumPotentialBreakdown {
    let n = mj.dim();
    let gam = mj.contracted_jets();
    let (mut div, mut dd, mut gg) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let up = mj.upper(i, j);
            div += up.grad(j) * gam[i].value() + up.value() * gam[i].grad(j);
            dd += up.hess(i, j);
            gg += up.value() * gam[i].value() * gam[j].value();
        }
    }
    let (term_div, term_dd, term_gg) = (0.5 * div, 0.25 * dd, 0.25 * gg);
    let bw = term_div + term_dd + term_gg;
    let br = term_div + 2.0 * term_dd + term_gg;
    let bracket = rule.w_weyl * bw + rule.w_rivier * br;
    QuantumPotentialBreakdown {
        term_div,
        term_dd,
        term_gg,
        bracket,
        v_q: -units.kinetic() * bracket,
    }
}

/// Ordering-dependent quantum potential at `p`.
pub fn quantum_potential(
    spec: &MetricSpec,
    rule: &OrderingRule,
    p: &[f64],
    units: Units,
) -> Result<QuantumPotentialBreakdown> {
    let mj = MetricJet::at(spec, p, 2)?;
    Ok(breakdown_from_jet(&mj, rule, units))
}

/// p̂_j ψ = −iħ(∂_j ψ + ¼(∂_j ln ω)ψ) at `p`.
pub fn momentum_operator_apply(spec: &MetricSpec, j: usize, psi: &Expr, p: &[f64], units: Units) -> Result<Complex64> {
    if j >= spec.dim() {
        return Err(Error::Invalid(format!("momentum index {} out of range", j + 1)));
    }
    let q = spec.normalize_point(p)?;
    let mj = MetricJet::at(spec, &q, 1)?;
    let f = eval_jet(psi, &q, 1)?;
    let quarter_log = 0.25 * mj.det().grad(j) / mj.det().value();
    Ok(Complex64::new(0.0, -units.hbar) * (f.grad(j) + quarter_log * f.value()))
}

/// (1/2m) p̂_i ω^ij p̂_j ψ at `p`, evaluated with jets. Real for real ψ.
pub fn kinetic_pwp_apply(spec: &MetricSpec, psi: &Expr, p: &[f64], units: Units) -> Result<f64> {
    let q = spec.normalize_point(p)?;
    let n = spec.dim();
    let mj = MetricJet::at(spec, &q, 2)?;
    let f = eval_jet(psi, &q, 2)?;
    let gam = mj.contracted_jets();
    // φ_j = ∂_j ψ + ½γ_j ψ (p̂_j without −iħ), as order-1 jets
    let f1 = f.truncate(1);
    let phi: Vec<Jet> = (0..n).map(|j| &f.partial(j) + &(&gam[j] * &f1).scale(0.5)).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let mut vi = Jet::constant(n, 1, 0.0);
        for j in 0..n {
            vi = &vi + &(&mj.upper(i, j).truncate(1) * &phi[j]);
        }
        acc += vi.grad(i) + 0.5 * gam[i].value() * vi.value();
    }
    // (−iħ)² = −ħ²
    Ok(-units.hbar * units.hbar / (2.0 * units.mass) * acc)
}

/// Ĥ = −(ħ²/2m)Δ + V_q(rule): the canonical target of the grid discretization.
#[derive(Clone, Debug)]
pub struct HamiltonianDescriptor {
    pub spec: MetricSpec,
    pub rule: OrderingRule,
    pub units: Units,
    /// True when the quantum potential vanishes identically (constant metric).
    pub pure_laplacian: bool,
}

impl HamiltonianDescriptor {
    pub fn potential_at(&self, p: &[f64]) -> Result<f64> {
        if self.pure_laplacian {
            return Ok(0.0);
        }
        Ok(quantum_potential(&self.spec, &self.rule, p, self.units)?.v_q)
    }

    /// Ĥψ at `p` for a scalar field ψ.
    pub fn apply(&self, psi: &Expr, p: &[f64]) -> Result<f64> {
        let lap = crate::geometry::laplace_beltrami_apply(&self.spec, psi, p)?;
        let q = self.spec.normalize_point(p)?;
        Ok(-self.units.kinetic() * lap + self.potential_at(&q)? * psi.eval(&q))
    }
}

pub fn hamiltonian_symbolic(spec: &MetricSpec, rule: &OrderingRule, units: Units) -> HamiltonianDescriptor {
    HamiltonianDescriptor {
        spec: spec.clone(),
        rule: rule.clone(),
        units,
        pure_laplacian: spec.is_constant(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_expression, preset};

    #[test]
    fn rule_parsing() {
        assert_eq!(OrderingRule::parse("2,-1").unwrap(), OrderingRule::new_rule());
        assert_eq!(OrderingRule::parse("Weyl").unwrap(), OrderingRule::weyl());
        assert!(OrderingRule::parse("0.5,0.6").is_err());
        assert!(OrderingRule::parse("banana").is_err());
    }

    #[test]
    fn polar_new_potential() {
        let m = preset("flat-polar-2").unwrap();
        for r in [0.5, 2.0] {
            let b = quantum_potential(&m, &OrderingRule::new_rule(), &[r, 0.1], Units::default()).unwrap();
            assert!((b.v_q - 1.0 / (8.0 * r * r)).abs() < 1e-14);
            assert_eq!(b.term_dd, 0.0);
        }
    }

    #[test]
    fn polar_momentum() {
        let m = preset("flat-polar-2").unwrap();
        let one = parse_expression("1", 2).unwrap();
        let v = momentum_operator_apply(&m, 0, &one, &[2.0, 0.3], Units::default()).unwrap();
        assert!(v.re.abs() < 1e-15 && (v.im + 0.25).abs() < 1e-15);
    }

    #[test]
    fn pwp_equals_laplacian_plus_new_bracket() {
        let m = preset("sphere-2(1)").unwrap();
        let psi = parse_expression("exp(0.3*cos(x1))*sin(x2 + 0.2)", 2).unwrap();
        let p = [0.9, 1.3];
        let u = Units::default();
        let lhs = kinetic_pwp_apply(&m, &psi, &p, u).unwrap();
        let h = hamiltonian_symbolic(&m, &OrderingRule::new_rule(), u);
        let rhs = h.apply(&psi, &p).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }
}
