//! Parsing expressions and metric files; jets and error reporting.

use geoquant::dsl::{eval_jet, parse_expression, parse_metric_config, preset};

fn main() -> geoquant::Result<()> {
    let e = parse_expression("exp(-x1^2/2)*cos(3*x2) + sqrt(1 + x1*x2)", 2)?;
    println!("parsed: {e}");
    let j = eval_jet(&e, &[0.4, 0.2], 2)?;
    println!("value {:.6}, grad ({:.6}, {:.6}), d²/dx1dx2 {:.6}", j.value(), j.grad(0), j.grad(1), j.hess(0, 1));

    for bad in ["sin(x1", "x3 + 1", "2 ** x1", "log(x1) +"] {
        match parse_expression(bad, 2) {
            Ok(_) => println!("{bad:12} unexpectedly parsed"),
            Err(err) => println!("{bad:12} -> {err}"),
        }
    }

    let file = r#"
name = "torus"
dimension = 2
component.1.1 = "1"
component.2.2 = "(2 + cos(x1))^2"
range.1 = [0, "2*pi", true]
range.2 = [0, "2*pi", true]
"#;
    let torus = parse_metric_config(file)?;
    println!("{} in {} dimensions, ω22 = {}", torus.name(), torus.dim(), torus.component(1, 1));
    for name in ["sphere-2:2", "flat-polar-2", "conformal-2:0.3*sin(x1)*sin(x2)"] {
        let m = preset(name)?;
        println!("preset {name}: ω11 = {}, ω22 = {}", m.component(0, 0), m.component(1, 1));
    }
    Ok(())
}
