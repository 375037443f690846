//! Sphere spectra with and without a curvature potential.

use geoquant::dsl::preset;
use geoquant::grid::{build_grid, eigen_spectrum, hamiltonian_matrix, Axis, Boundary, Potential};
use geoquant::ordering::OrderingRule;
use geoquant::Units;
use std::f64::consts::PI;

fn main() -> geoquant::Result<()> {
    let sphere = preset("sphere-2(1)")?;
    let units = Units::default();
    let grid = build_grid(&sphere, &[Axis::new(32, Boundary::Neumann), Axis::periodic(64)])?;
    for pot in [Potential::Zero, Potential::DeWitt, Potential::Ordering(OrderingRule::weyl())] {
        let t0 = std::time::Instant::now();
        let ev = eigen_spectrum(&hamiltonian_matrix(&sphere, &pot, &grid, units)?, 9)?;
        let shown: Vec<String> = ev.iter().map(|e| format!("{e:.4}")).collect();
        println!("{:7} {} ({:.1?})", pot.label(), shown.join(" "), t0.elapsed());
    }
    // truncated chart with Dirichlet walls near the poles
    let cut = build_grid(&sphere, &[Axis::bounded(32, 0.15, PI - 0.15, Boundary::Dirichlet), Axis::periodic(64)])?;
    let ev = eigen_spectrum(&hamiltonian_matrix(&sphere, &Potential::Zero, &cut, units)?, 4)?;
    println!("truncated: {ev:.4?}");
    Ok(())
}
