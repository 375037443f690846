//! Crank–Nicolson evolution of a packet on the sphere.

use geoquant::dsl::preset;
use geoquant::grid::{build_grid, hamiltonian_matrix, inner, norm, Axis, Boundary, Evolver, Potential};
use geoquant::Units;
use num_complex::Complex64;

fn main() -> geoquant::Result<()> {
    let sphere = preset("sphere-2(1)")?;
    let units = Units::default();
    let grid = build_grid(&sphere, &[Axis::new(24, Boundary::Neumann), Axis::periodic(48)])?;
    let h = hamiltonian_matrix(&sphere, &Potential::DeWitt, &grid, units)?;
    let w = grid.weights();
    let psi0: Vec<Complex64> = grid.sample(|x| {
        let a = (x[0] - 1.2).powi(2) + (x[1] - 2.0).powi(2);
        Complex64::from_polar((-a / 0.1).exp(), 3.0 * x[1])
    });
    let n0 = norm(&w, &psi0);
    let energy = |p: &[Complex64]| inner(&w, p, &h.apply(p)).re / inner(&w, p, p).re;
    let e0 = energy(&psi0);
    let ev = Evolver::new(&h, 0.002, units.hbar)?;
    let mut psi = psi0.clone();
    for block in 1..=5 {
        psi = ev.run(&psi, 100);
        let fidelity = inner(&w, &psi0, &psi).norm() / (n0 * norm(&w, &psi));
        println!(
            "t = {:.2}  norm drift {:+.1e}  energy drift {:+.1e}  |⟨ψ0,ψ⟩| {:.6}",
            block as f64 * 0.2,
            norm(&w, &psi) / n0 - 1.0,
            energy(&psi) - e0,
            fidelity
        );
    }
    Ok(())
}
