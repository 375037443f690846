//! Quantum potentials of the three ordering rules in a few charts.

use geoquant::dsl::preset;
use geoquant::ordering::{quantum_potential, OrderingRule};
use geoquant::Units;

fn main() -> geoquant::Result<()> {
    let units = Units::default();
    for (name, p) in [
        ("flat-cartesian-2", [0.3, -1.0]),
        ("flat-polar-2", [2.0, 0.1]),
        ("sphere-2(1)", [1.0, 0.0]),
        ("conformal-2:0.3*sin(x1)*sin(x2)", [0.7, 1.1]),
    ] {
        let m = preset(name)?;
        println!("{name} at {p:?}");
        for rule in OrderingRule::presets() {
            let q = quantum_potential(&m, &rule, &p, units)?;
            println!(
                "  {:7} div {:+.6} dd {:+.6} gg {:+.6} -> V_q {:+.8}",
                rule.to_string(),
                q.term_div,
                q.term_dd,
                q.term_gg,
                q.v_q
            );
        }
    }
    // flat space, two charts: the rules disagree although nothing is curved
    let polar = preset("flat-polar-2")?;
    for r in [0.5, 1.0, 2.0, 5.0] {
        let v = quantum_potential(&polar, &OrderingRule::new_rule(), &[r, 0.0], units)?.v_q;
        println!("polar r = {r}: V_q(new) = {v:.10}, 1/(8r²) = {:.10}", 1.0 / (8.0 * r * r));
    }
    Ok(())
}
