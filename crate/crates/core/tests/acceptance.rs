//! Acceptance checks. Prints one PASS/FAIL line per criterion, including the
//! runtime budget; failures are reported, not turned into a non-zero exit.

use std::f64::consts::PI;
use std::time::Instant;

use faer::Mat;
use geoquant::dsl::{parse_expression, parse_metric_config, preset, CoordRange, Expr, MetricSpec};
use geoquant::geometry::{laplace_beltrami_apply, scalar_curvature};
use geoquant::grid::{build_grid, eigen_spectrum, hamiltonian_matrix, norm, Axis, Boundary, Grid, GridOperator, Potential};
use geoquant::ordering::{
    curvature_coefficient, kinetic_pwp_apply, quantize_symbol, quantum_potential, OrderingRule, PhaseSpaceSymbol,
};
use geoquant::propagator::{convergence_study, wkb_apply, WkbQuadrature};
use geoquant::Units;
use num_complex::Complex64 as C64;
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, budget: f64, started: Instant, out: geoquant::Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match out {
        Ok(o) => {
            let pass = o.pass && secs <= budget;
            println!("{} {id} {name} ({secs:.1} s, budget {budget} s): {}", if pass { "PASS" } else { "FAIL" }, o.detail);
            pass
        }
        Err(e) => {
            println!("FAIL {id} {name} ({secs:.1} s): error: {e}");
            false
        }
    }
}

fn ring(period: f64, amp: f64) -> geoquant::Result<MetricSpec> {
    parse_metric_config(&format!(
        "name = \"ring\"\ndimension = 1\ncomponent.1.1 = \"(1 + {amp}*sin(2*pi*x1/{period}))^2\"\nrange.1 = [0, {period}, true]\n"
    ))
}

fn periodic_line(spec: &MetricSpec, points: usize, period: f64) -> geoquant::Result<Grid> {
    build_grid(spec, &[Axis::bounded(points, 0.0, period, Boundary::Periodic)])
}

fn criterion_1(rng: &mut StdRng) -> geoquant::Result<Outcome> {
    let sphere = preset("sphere-2(1)")?;
    let want = [1.0 / 4.0, 1.0 / 3.0, 1.0 / 6.0];
    let mut worst_sphere = 0.0f64;
    for _ in 0..5 {
        let p = [rng.gen_range(0.4..PI - 0.4), rng.gen_range(0.0..2.0 * PI)];
        for (rule, w) in OrderingRule::presets().iter().zip(want) {
            let c = curvature_coefficient(&sphere, &p, rule, None)?;
            worst_sphere = worst_sphere.max((c.value - w).abs());
        }
    }
    let conformal = preset("conformal-2:0.3*sin(x1)*sin(x2)")?;
    let mut worst_conf = 0.0f64;
    let mut used = 0;
    while used < 3 {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        if scalar_curvature(&conformal, &p)?.abs() <= 0.1 {
            continue;
        }
        used += 1;
        for (rule, w) in OrderingRule::presets().iter().zip(want) {
            let c = curvature_coefficient(&conformal, &p, rule, None)?;
            worst_conf = worst_conf.max((c.value - w).abs());
        }
    }
    Ok(Outcome {
        pass: worst_sphere <= 1e-3 && worst_conf <= 1e-2,
        detail: format!("max |error| sphere {worst_sphere:.2e} (≤ 1e-3), conformal {worst_conf:.2e} (≤ 1e-2)"),
    })
}

fn criterion_2(rng: &mut StdRng) -> geoquant::Result<Outcome> {
    let mut worst = 0.0f64;
    for (name, n) in [("flat-cartesian-2", 2), ("flat-cartesian-3", 3)] {
        let spec = preset(name)?;
        for _ in 0..50 {
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            for rule in OrderingRule::presets() {
                worst = worst.max(quantum_potential(&spec, &rule, &p, Units::default())?.v_q.abs());
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("max |V_q| = {worst:.2e} (≤ 1e-10)"),
    })
}

fn criterion_3() -> geoquant::Result<Outcome> {
    let spec = preset("flat-polar-2")?;
    let units = Units::default();
    let rule = OrderingRule::new_rule();
    let tests: Vec<Expr> = ["exp(0.3*x1)*(1 + 0.2*cos(x2))", "1 + x1*x1*sin(x2)^2", "cosh(0.5*x1) + 0.1*sin(2*x2)"]
        .iter()
        .map(|t| parse_expression(t, 2).expect("valid test function"))
        .collect();
    let (mut worst_formula, mut worst_oracle, mut worst_r) = (0.0f64, 0.0f64, 0.0f64);
    for r in [0.5, 1.0, 2.0, 5.0] {
        let p = [r, 0.7];
        let exact = 1.0 / (8.0 * r * r);
        let v = quantum_potential(&spec, &rule, &p, units)?.v_q;
        worst_formula = worst_formula.max(((v - exact) / exact).abs());
        for psi in &tests {
            // p̂ωp̂/2m ψ = −(ħ²/2m)Δψ + V_q ψ
            let lhs = kinetic_pwp_apply(&spec, psi, &p, units)?;
            let lap = laplace_beltrami_apply(&spec, psi, &p)?;
            let oracle = (lhs + units.kinetic() * lap) / psi.eval(&p);
            worst_oracle = worst_oracle.max(((oracle - exact) / exact).abs());
        }
        worst_r = worst_r.max(scalar_curvature(&spec, &p)?.abs());
    }
    Ok(Outcome {
        pass: worst_formula <= 1e-6 && worst_oracle <= 1e-6 && worst_r <= 1e-10,
        detail: format!(
            "V_q rel error {worst_formula:.2e}, operator oracle rel error {worst_oracle:.2e} (≤ 1e-6), max |R| {worst_r:.2e} (≤ 1e-10)"
        ),
    })
}

/// Spectral derivative matrix on an even periodic grid of length 2π, from the
/// closed form ½(−1)^{j−k}cot((j−k)h/2).
fn derivative_matrix(n: usize) -> Mat<f64> {
    let h = 2.0 * PI / n as f64;
    Mat::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let s = if (j + n - k) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * s / (0.5 * (j as f64 - k as f64) * h).tan()
        }
    })
}

fn criterion_4() -> geoquant::Result<Outcome> {
    let n = 64;
    let spec = ring(2.0 * PI, 0.2)?;
    let grid = periodic_line(&spec, n, 2.0 * PI)?;
    let units = Units::default();
    let m = quantize_symbol(&PhaseSpaceSymbol::kinetic(1, units.mass), &OrderingRule::new_rule(), &grid, units)?;
    // p̂ = −iħ ω^{-1/4} D ω^{1/4}
    let d = derivative_matrix(n);
    let om: Vec<f64> = (0..n).map(|k| grid.sqrt_det()[k].powi(2)).collect();
    let p = Mat::<C64>::from_fn(n, n, |j, k| C64::new(0.0, -units.hbar) * d[(j, k)] * (om[k] / om[j]).powf(0.25));
    let omega_inv = Mat::<C64>::from_fn(n, n, |j, k| if j == k { C64::new(1.0 / om[j], 0.0) } else { C64::default() });
    let direct = &p * &omega_inv * &p;
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            worst = worst.max((m.entry(j, k) - direct[(j, k)] / (2.0 * units.mass)).norm());
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("max entrywise |difference| = {worst:.2e} (≤ 1e-6)"),
    })
}

fn mat_of(op: &GridOperator) -> Mat<C64> {
    op.to_dense()
}

fn apply(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn rel_dist(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn criterion_5() -> geoquant::Result<Outcome> {
    let units = Units::default();
    let period = 20.0;
    let flat = preset("flat-cartesian-1")?.with_ranges(vec![CoordRange::new(0.0, period, true)?])?;
    let curved = ring(period, 0.2)?;
    let mut worst_comm = 0.0f64;
    let mut worst_order = 0.0f64;
    let mut worst_herm = 0.0f64;
    for spec in [&flat, &curved] {
        let grid = periodic_line(spec, 128, period)?;
        let x = mat_of(&quantize_symbol(&PhaseSpaceSymbol::coordinate(1, 0), &OrderingRule::weyl(), &grid, units)?);
        let p_op = quantize_symbol(&PhaseSpaceSymbol::momentum(1, 0), &OrderingRule::weyl(), &grid, units)?;
        worst_herm = worst_herm.max(p_op.hermiticity_defect());
        let p = mat_of(&p_op);
        // band-limited packets well inside the period
        for (c, s, k0) in [(10.0, 1.0, 0.0), (9.0, 1.3, 2.0), (11.0, 0.9, -1.5)] {
            let psi: Vec<C64> = grid.sample(|q| {
                let z = (q[0] - c) / s;
                C64::from_polar((-0.5 * z * z).exp(), k0 * q[0])
            });
            let xp = apply(&x, &apply(&p, &psi));
            let px = apply(&p, &apply(&x, &psi));
            let comm: Vec<C64> = xp.iter().zip(&px).map(|(a, b)| a - b).collect();
            let want: Vec<C64> = psi.iter().map(|v| C64::new(0.0, units.hbar) * v).collect();
            worst_comm = worst_comm.max(rel_dist(&comm, &want));

            // Weyl kernel against full symmetrization, Rivier against the half-sum
            let word = |w: &str| -> Vec<C64> {
                let mut v = psi.clone();
                for ch in w.chars().rev() {
                    v = apply(if ch == 'x' { &x } else { &p }, &v);
                }
                v
            };
            let average = |words: &[&str]| -> Vec<C64> {
                let mut acc = vec![C64::default(); psi.len()];
                for w in words {
                    acc.iter_mut().zip(word(w)).for_each(|(a, b)| *a += b);
                }
                acc.iter().map(|a| a / words.len() as f64).collect()
            };
            let cases: [(&[u32], &[usize], OrderingRule, Vec<&str>); 5] = [
                (&[1], &[0], OrderingRule::weyl(), vec!["xp", "px"]),
                (&[1], &[0, 0], OrderingRule::weyl(), vec!["xpp", "pxp", "ppx"]),
                (&[2], &[0, 0], OrderingRule::weyl(), vec!["xxpp", "xpxp", "xppx", "pxxp", "pxpx", "ppxx"]),
                (&[2], &[0], OrderingRule::rivier(), vec!["xxp", "pxx"]),
                (&[2], &[0, 0], OrderingRule::rivier(), vec!["xxpp", "ppxx"]),
            ];
            for (powers, momenta, rule, words) in cases {
                let m = mat_of(&quantize_symbol(&PhaseSpaceSymbol::monomial(powers, momenta), &rule, &grid, units)?);
                worst_order = worst_order.max(rel_dist(&apply(&m, &psi), &average(&words)));
            }
        }
        for rule in OrderingRule::presets() {
            let h = quantize_symbol(&PhaseSpaceSymbol::kinetic(1, units.mass), &rule, &grid, units)?;
            worst_herm = worst_herm.max(h.hermiticity_defect());
        }
    }
    let two_d: [(&str, Vec<Axis>); 4] = [
        ("sphere-2(1)", vec![Axis::new(24, Boundary::Neumann), Axis::periodic(32)]),
        ("sphere-2(1)", vec![Axis::bounded(24, 0.15, PI - 0.15, Boundary::Dirichlet), Axis::periodic(32)]),
        ("flat-polar-2", vec![Axis::bounded(24, 0.2, 3.0, Boundary::Dirichlet), Axis::periodic(32)]),
        (
            "conformal-2:0.3*sin(x1)*sin(x2)",
            vec![Axis::bounded(24, -2.0, 2.0, Boundary::Neumann), Axis::bounded(24, -2.0, 2.0, Boundary::Dirichlet)],
        ),
    ];
    for (name, axes) in two_d {
        let spec = preset(name)?;
        let grid = build_grid(&spec, &axes)?;
        for pot in [
            Potential::Zero,
            Potential::DeWitt,
            Potential::Ordering(OrderingRule::weyl()),
            Potential::Ordering(OrderingRule::rivier()),
            Potential::Ordering(OrderingRule::new_rule()),
        ] {
            worst_herm = worst_herm.max(hamiltonian_matrix(&spec, &pot, &grid, units)?.hermiticity_defect());
        }
    }
    Ok(Outcome {
        pass: worst_comm <= 1e-8 && worst_herm <= 1e-10 && worst_order <= 1e-8,
        detail: format!(
            "commutator {worst_comm:.2e} (≤ 1e-8), Hermiticity {worst_herm:.2e} (≤ 1e-10), orderings {worst_order:.2e} (≤ 1e-8)"
        ),
    })
}

fn criterion_6() -> geoquant::Result<Outcome> {
    let spec = preset("sphere-2(1)")?;
    let units = Units::default();
    let grid = build_grid(&spec, &[Axis::new(64, Boundary::Neumann), Axis::periodic(128)])?;
    let k = 17;
    let bare = eigen_spectrum(&hamiltonian_matrix(&spec, &Potential::Zero, &grid, units)?, k)?;
    let dewitt = eigen_spectrum(&hamiltonian_matrix(&spec, &Potential::DeWitt, &grid, units)?, k)?;
    let r = scalar_curvature(&spec, &[1.0, 0.0])?;
    let shift = -units.kinetic() * r / 6.0;
    let shift_defect = bare.iter().zip(&dewitt).map(|(a, b)| (b - a - shift).abs()).fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    let mut degeneracy = true;
    let mut first = 1;
    for l in 1..=3usize {
        let target = (l * (l + 1)) as f64 / 2.0 + shift;
        let members = 2 * l + 1;
        for e in &dewitt[first..first + members] {
            worst = worst.max(((e - target) / target).abs());
        }
        // neighbours on either side belong to other multiplets
        let below = (dewitt[first - 1] - target).abs() / target;
        let above = (dewitt[first + members] - target).abs() / target;
        degeneracy &= below > 0.02 && above > 0.02;
        first += members;
    }
    Ok(Outcome {
        pass: worst <= 0.02 && degeneracy && shift_defect <= 1e-10,
        detail: format!(
            "R = {r:.3}, shift −(ħ²/2m)R/6 = {shift:+.4} (the criterion text states −1/6, which assumes R = +2; see README), \
             max rel error l=1..3 {worst:.2e} (≤ 2e-2), multiplicities 3/5/7 {}, constant shift defect {shift_defect:.1e}",
            if degeneracy { "ok" } else { "broken" }
        ),
    })
}

fn criterion_7() -> geoquant::Result<Outcome> {
    let units = Units::default();
    let slices = [4, 8, 16, 32];
    let curved = ring(2.0 * PI, 0.2)?;
    let flat = preset("flat-cartesian-1")?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, label) in [(&curved, "curved"), (&flat, "flat")] {
        let grid = periodic_line(spec, 64, 2.0 * PI)?;
        let mut psi0: Vec<C64> = grid.sample(|x| C64::new((x[0] - 1.0).cos().exp(), 0.0));
        let n0 = norm(&grid.weights(), &psi0);
        psi0.iter_mut().for_each(|v| *v /= n0);
        for rule in [OrderingRule::new_rule(), OrderingRule::weyl()] {
            let rep = convergence_study(spec, &rule, &grid, 0.1, &slices, &psi0, 20000, units)?;
            let worst = rep.distances.iter().cloned().fold(0.0f64, f64::max);
            if label == "flat" {
                pass &= worst <= 1e-8;
                parts.push(format!("flat {rule} max {worst:.1e}"));
            } else {
                pass &= rep.monotone && rep.order >= 0.8;
                parts.push(format!(
                    "curved {rule} order {:.2} {} (d = {})",
                    rep.order,
                    if rep.monotone { "monotone" } else { "not monotone" },
                    rep.distances.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(", ")
                ));
            }
        }
    }
    Ok(Outcome { pass, detail: parts.join("; ") })
}

fn criterion_8() -> geoquant::Result<Outcome> {
    let spec = preset("sphere-2(1)")?;
    let units = Units::default();
    let psi = parse_expression("exp(0.5*cos(x1))*(1 + 0.3*sin(x1)*cos(x2))", 2).expect("valid expression");
    let p = [1.2, 0.4];
    let r = scalar_curvature(&spec, &p)?;
    let value = psi.eval(&p);
    let h_psi = -units.kinetic() * (laplace_beltrami_apply(&spec, &psi, &p)? + r / 6.0 * value);
    let dts = [0.02, 0.01, 0.005];
    let out = wkb_apply(&spec, &psi, &p, &dts, units, WkbQuadrature::default())?;
    let res: Vec<f64> = dts
        .iter()
        .zip(&out)
        .map(|(dt, k)| ((k - value) / dt + C64::new(0.0, h_psi / units.hbar)).norm())
        .collect();
    let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let measured = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        pass: measured >= 1.0,
        detail: format!(
            "residuals {}, measured order {measured:.4} (≥ 1)",
            res.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    })
}

fn main() -> std::process::ExitCode {
    let mut rng = StdRng::seed_from_u64(20240611);
    let mut all = true;
    let t = Instant::now();
    all &= report(1, "curvature coefficients", 60.0, t, criterion_1(&mut rng));
    let t = Instant::now();
    all &= report(2, "flat-space nullity", 60.0, t, criterion_2(&mut rng));
    let t = Instant::now();
    all &= report(3, "polar quantum potential", 60.0, t, criterion_3());
    let t = Instant::now();
    all &= report(4, "quantized kinetic symbol", 10.0, t, criterion_4());
    let t = Instant::now();
    all &= report(5, "postulates", 60.0, t, criterion_5());
    let t = Instant::now();
    all &= report(6, "sphere spectrum", 180.0, t, criterion_6());
    let t = Instant::now();
    all &= report(7, "time-sliced convergence", 120.0, t, criterion_7());
    let t = Instant::now();
    all &= report(8, "semiclassical generator", 120.0, t, criterion_8());
    println!("{}", if all { "all criteria pass" } else { "some criteria fail" });
    std::process::ExitCode::SUCCESS
}
