use std::f64::consts::PI;

use geoquant::dsl::{parse_metric_config, preset};
use geoquant::geometry::{geodesic_distance, scalar_curvature, van_vleck, van_vleck_jacobi};
use geoquant::grid::{build_grid, eigen_spectrum, evolve, hamiltonian_matrix, inner, norm, Axis, Boundary, Potential};
use geoquant::ordering::OrderingRule;
use geoquant::propagator::{short_time_kernel, wkb_propagator};
use geoquant::Units;
use num_complex::Complex64 as C64;

#[test]
fn free_packet_spreads_like_the_closed_form() {
    let spec = preset("flat-cartesian-1").unwrap();
    let grid = build_grid(&spec, &[Axis::bounded(600, -30.0, 30.0, Boundary::Dirichlet)]).unwrap();
    let u = Units::default();
    let h = hamiltonian_matrix(&spec, &Potential::Zero, &grid, u).unwrap();
    let s0: f64 = 1.0;
    let psi0: Vec<C64> = grid.sample(|x| C64::new((-x[0] * x[0] / (4.0 * s0 * s0)).exp(), 0.0));
    let t = 2.0;
    let psi = evolve(&h, &psi0, t, 400, u.hbar).unwrap();
    let w = grid.weights();
    let total = norm(&w, &psi).powi(2);
    let var: f64 = (0..grid.len()).map(|k| w[k] * grid.node(k)[0].powi(2) * psi[k].norm_sqr()).sum::<f64>() / total;
    let want = s0 * s0 * (1.0 + (u.hbar * t / (2.0 * u.mass * s0 * s0)).powi(2));
    assert!((var - want).abs() < 0.01 * want, "variance {var} vs {want}");
}

#[test]
fn zero_time_leaves_state_alone() {
    let spec = preset("sphere-2(1)").unwrap();
    let grid = build_grid(&spec, &[Axis::new(8, Boundary::Neumann), Axis::periodic(8)]).unwrap();
    let h = hamiltonian_matrix(&spec, &Potential::DeWitt, &grid, Units::default()).unwrap();
    let psi0: Vec<C64> = grid.sample(|x| C64::new(x[0].cos(), x[1].sin()));
    assert_eq!(evolve(&h, &psi0, 0.0, 3, 1.0).unwrap(), psi0);
}

#[test]
fn sphere_triplet_converges_at_second_order() {
    let spec = preset("sphere-2(1)").unwrap();
    let u = Units::default();
    let err = |n: usize| {
        let grid = build_grid(&spec, &[Axis::new(n, Boundary::Neumann), Axis::periodic(2 * n)]).unwrap();
        let ev = eigen_spectrum(&hamiltonian_matrix(&spec, &Potential::Zero, &grid, u).unwrap(), 4).unwrap();
        ev[1..4].iter().map(|e| (e - 1.0).abs()).fold(0.0f64, f64::max)
    };
    let (coarse, fine) = (err(12), err(24));
    assert!(coarse / fine >= 3.0, "{coarse} -> {fine}");
}

#[test]
fn dewitt_shift_on_a_sphere_of_radius_two() {
    let spec = preset("sphere-2(2)").unwrap();
    let u = Units::default();
    let grid = build_grid(&spec, &[Axis::new(16, Boundary::Neumann), Axis::periodic(32)]).unwrap();
    let bare = eigen_spectrum(&hamiltonian_matrix(&spec, &Potential::Zero, &grid, u).unwrap(), 5).unwrap();
    let dw = eigen_spectrum(&hamiltonian_matrix(&spec, &Potential::DeWitt, &grid, u).unwrap(), 5).unwrap();
    let r = scalar_curvature(&spec, &[1.0, 0.0]).unwrap();
    assert!((r + 0.5).abs() < 1e-12);
    for (a, b) in bare.iter().zip(&dw) {
        assert!((b - a - (-0.5 * r / 6.0)).abs() < 1e-10);
    }
}

#[test]
fn ordering_potentials_shift_polar_spectra_differently() {
    let spec = preset("flat-polar-2").unwrap();
    let u = Units::default();
    let grid = build_grid(&spec, &[Axis::bounded(24, 0.5, 3.0, Boundary::Dirichlet), Axis::periodic(16)]).unwrap();
    let mut lowest = Vec::new();
    for rule in OrderingRule::presets() {
        let h = hamiltonian_matrix(&spec, &Potential::Ordering(rule), &grid, u).unwrap();
        lowest.push(eigen_spectrum(&h, 1).unwrap()[0]);
    }
    let bare = eigen_spectrum(&hamiltonian_matrix(&spec, &Potential::Zero, &grid, u).unwrap(), 1).unwrap()[0];
    // every rule adds a positive multiple of 1/r² here
    for e in &lowest {
        assert!(*e > bare);
    }
}

#[test]
fn van_vleck_routes_agree_on_the_sphere() {
    let spec = preset("sphere-2(1)").unwrap();
    let (p1, p2) = ([1.0, 0.2], [1.4, 0.9]);
    let fd = van_vleck(&spec, &p1, &p2, 0.1, 1.0).unwrap();
    let jac = van_vleck_jacobi(&spec, &p1, &p2, 0.1, 1.0).unwrap();
    assert!((fd - jac).abs() < 1e-4 * jac, "{fd} vs {jac}");
    // closed form: (m/dt)² √ω1 √ω2 · d / sin d
    let d = geodesic_distance(&spec, &p1, &p2).unwrap();
    let want = 100.0 * p1[0].sin() * p2[0].sin() * d / d.sin();
    assert!((jac - want).abs() < 1e-6 * want);
}

#[test]
fn semiclassical_and_sliced_kernels_coincide_on_flat_space() {
    let spec = preset("flat-cartesian-2").unwrap();
    let u = Units::new(0.8, 1.7);
    let (a, b) = ([0.1, -0.3], [0.4, 0.2]);
    let k1 = wkb_propagator(&spec, &b, &a, 0.05, u).unwrap();
    let k2 = short_time_kernel(&spec, &OrderingRule::weyl(), &b, &a, 0.05, u).unwrap();
    assert!((k1 - k2).norm() < 1e-9 * k2.norm());
}

#[test]
fn metric_files_drive_the_whole_pipeline() {
    let text = "name = \"cone\"\ndimension = 2\ncomponent.1.1 = \"1\"\ncomponent.2.2 = \"0.25*x1^2\"\n\
                range.1 = [0.2, 4]\nrange.2 = [0, \"2*pi\", true]\n";
    let spec = parse_metric_config(text).unwrap();
    assert!(scalar_curvature(&spec, &[1.0, 0.3]).unwrap().abs() < 1e-12);
    let grid = build_grid(&spec, &[Axis::new(16, Boundary::Dirichlet), Axis::periodic(16)]).unwrap();
    let u = Units::default();
    let h = hamiltonian_matrix(&spec, &Potential::Ordering(OrderingRule::new_rule()), &grid, u).unwrap();
    assert!(h.hermiticity_defect() < 1e-12);
    let psi: Vec<C64> = grid.sample(|x| C64::new((-(x[0] - 2.0).powi(2)).exp(), 0.0));
    let e = inner(&grid.weights(), &psi, &h.apply(&psi));
    assert!(e.re > 0.0 && e.im.abs() < 1e-10 * e.re);
    assert!((grid.bounds(1).1 - 2.0 * PI).abs() < 1e-15);
}
