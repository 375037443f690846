//! Christoffel symbols, scalar curvature, geodesics and normal coordinates.

use geoquant::dsl::{parse_metric_config, preset};
use geoquant::geometry::{christoffel, exponential_map, geodesic_distance, normal_coordinates, scalar_curvature};

fn main() -> geoquant::Result<()> {
    let torus = parse_metric_config(
        "name = \"torus\"\ndimension = 2\ncomponent.1.1 = \"1\"\ncomponent.2.2 = \"(2 + cos(x1))^2\"\n\
         range.1 = [0, \"2*pi\", true]\nrange.2 = [0, \"2*pi\", true]\n",
    )?;
    for name in ["sphere-2(1)", "sphere-2(3)", "flat-polar-2", "conformal-2:0.3*sin(x1)*sin(x2)"] {
        let m = preset(name)?;
        println!("{name:34} R(1.0, 0.5) = {:+.8}", scalar_curvature(&m, &[1.0, 0.5])?);
    }
    for x1 in [0.0f64, 1.0, 2.0, 3.0] {
        // Gaussian curvature cos θ/(2 + cos θ); R is −2K in this sign convention
        let want = -2.0 * x1.cos() / (2.0 + x1.cos());
        println!("torus x1 = {x1}: R = {:+.10} (−2K = {want:+.10})", scalar_curvature(&torus, &[x1, 0.0])?);
    }

    let sphere = preset("sphere-2(1)")?;
    let g = christoffel(&sphere, &[1.0, 0.0])?;
    println!("sphere Γ^1_22 = {:.6}, Γ^2_12 = {:.6}", g.get(0, 1, 1), g.get(1, 0, 1));
    let end = exponential_map(&sphere, &[std::f64::consts::FRAC_PI_2, 0.0], &[0.0, 1.0], std::f64::consts::FRAC_PI_2)?;
    println!("quarter turn along the equator ends at ({:.10}, {:.10})", end[0], end[1]);
    let d = geodesic_distance(&sphere, &[1.0, 0.2], &[1.5, 1.0])?;
    println!("distance (1.0, 0.2) -> (1.5, 1.0): {d:.10}");
    let chart = normal_coordinates(&sphere, &[1.0, 0.2])?;
    let y = chart.backward(&[1.5, 1.0])?;
    println!("normal coordinates of that point: ({:.6}, {:.6}), |y| = {:.10}", y[0], y[1], y[0].hypot(y[1]));
    Ok(())
}
