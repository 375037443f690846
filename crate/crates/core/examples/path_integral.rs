//! Time-sliced propagators on a periodic line compared with direct evolution.

use geoquant::dsl::{parse_metric_config, preset};
use geoquant::grid::{build_grid, norm, Axis, Boundary};
use geoquant::ordering::OrderingRule;
use geoquant::propagator::convergence_study;
use geoquant::Units;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() -> geoquant::Result<()> {
    let curved = parse_metric_config(
        "name = \"ring\"\ndimension = 1\ncomponent.1.1 = \"(1 + 0.2*sin(x1))^2\"\nrange.1 = [0, \"2*pi\", true]\n",
    )?;
    let flat = preset("flat-cartesian-1")?;
    let units = Units::default();
    let slices = [4, 8, 16, 32];
    for (spec, label) in [(&flat, "flat"), (&curved, "curved")] {
        let grid = build_grid(spec, &[Axis::bounded(64, 0.0, 2.0 * PI, Boundary::Periodic)])?;
        let mut psi0: Vec<Complex64> = grid.sample(|x| Complex64::new((x[0] - 1.0).cos().exp(), 0.0));
        let n0 = norm(&grid.weights(), &psi0);
        psi0.iter_mut().for_each(|v| *v /= n0);
        for rule in [OrderingRule::new_rule(), OrderingRule::weyl()] {
            let t0 = std::time::Instant::now();
            let report = convergence_study(spec, &rule, &grid, 0.1, &slices, &psi0, 20000, units)?;
            println!("{label} {rule}: order {:.3} monotone {} ({:.1?})", report.order, report.monotone, t0.elapsed());
            for (n, d) in report.slices.iter().zip(&report.distances) {
                println!("  N = {n:3}  distance = {d:.3e}");
            }
        }
    }
    Ok(())
}
