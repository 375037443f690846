//! bracket/R at the origin of normal coordinates: 1/4, 1/3 and 1/6.

use geoquant::dsl::preset;
use geoquant::ordering::{curvature_coefficient, curvature_slope, OrderingRule};

fn main() -> geoquant::Result<()> {
    for (name, points) in [
        ("sphere-2(1)", vec![[1.0, 0.3], [0.6, 2.0], [2.2, 4.0]]),
        ("sphere-2(2.5)", vec![[1.3, 0.0]]),
        ("conformal-2:0.3*sin(x1)*sin(x2)", vec![[1.2, 1.0], [-1.4, 0.9]]),
    ] {
        let m = preset(name)?;
        for p in points {
            print!("{name:32} {p:?}");
            for rule in OrderingRule::presets() {
                let c = curvature_coefficient(&m, &p, &rule, None)?;
                print!("  {rule} {:.8}", c.value);
            }
            println!();
        }
    }
    let flat = preset("flat-cartesian-2")?;
    let c = curvature_coefficient(&flat, &[0.0, 0.0], &OrderingRule::weyl(), None)?;
    println!("flat space: flagged = {}, value = {}", c.flagged, c.value);

    let conf = preset("conformal-2:0.3*sin(x1)*sin(x2)")?;
    let s = curvature_slope(&conf, &[1.2, 1.0], &OrderingRule::weyl(), 0.05)?;
    println!("linear terms around (1.2, 1.0): bracket {:?}, R {:?}", s.bracket_slope, s.curvature_slope);
    Ok(())
}
