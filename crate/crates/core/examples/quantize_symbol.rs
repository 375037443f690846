//! Kernel quantization of phase-space symbols on a periodic line.

use geoquant::dsl::parse_metric_config;
use geoquant::grid::{build_grid, Axis};
use geoquant::ordering::{quantize_symbol, quantum_potential, OrderingRule, PhaseSpaceSymbol};
use geoquant::Units;
use num_complex::Complex64;

fn main() -> geoquant::Result<()> {
    let ring = parse_metric_config(
        "dimension = 1\ncomponent.1.1 = \"(1 + 0.2*sin(x1))^2\"\nrange.1 = [0, \"2*pi\", true]\n",
    )?;
    let grid = build_grid(&ring, &[Axis::periodic(64)])?;
    let units = Units::default();
    let h0 = PhaseSpaceSymbol::kinetic(1, units.mass);
    let ops: Vec<_> = OrderingRule::presets()
        .iter()
        .map(|r| quantize_symbol(&h0, r, &grid, units))
        .collect::<geoquant::Result<_>>()?;
    let psi: Vec<Complex64> = grid.sample(|x| Complex64::new(x[0].sin().exp(), 0.0));
    let w = grid.weights();
    for (rule, op) in OrderingRule::presets().iter().zip(&ops) {
        let e: Complex64 = (0..psi.len()).map(|k| w[k] * psi[k].conj() * op.apply(&psi)[k]).sum();
        println!("{:7} ⟨ψ,Ĥψ⟩ = {:.10}  Hermiticity defect {:.1e}", rule.to_string(), e.re, op.hermiticity_defect());
    }
    // on smooth states the rules differ by the multiplication V_weyl − V_new
    let (hw, hn) = (ops[0].apply(&psi), ops[2].apply(&psi));
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        let x = grid.node(k);
        let dv = quantum_potential(&ring, &OrderingRule::weyl(), x, units)?.v_q
            - quantum_potential(&ring, &OrderingRule::new_rule(), x, units)?.v_q;
        worst = worst.max(((hw[k] - hn[k]) / psi[k] - dv).norm());
    }
    println!("max |(Ĥ_weyl − Ĥ_new)ψ/ψ − (V_weyl − V_new)| = {worst:.1e}");

    let xp = PhaseSpaceSymbol::monomial(&[1], &[0]);
    for rule in [OrderingRule::weyl(), OrderingRule::rivier()] {
        let op = quantize_symbol(&xp, &rule, &grid, units)?;
        println!("ξp under {rule}: defect {:.1e}", op.hermiticity_defect());
    }
    Ok(())
}
