//! The semiclassical kernel on the unit sphere generates −(ħ²/2m)(Δ + R/6).

use geoquant::dsl::{parse_expression, preset};
use geoquant::geometry::{laplace_beltrami_apply, scalar_curvature};
use geoquant::propagator::{wkb_apply, WkbQuadrature};
use geoquant::Units;
use num_complex::Complex64;

fn main() -> geoquant::Result<()> {
    let spec = preset("sphere-2(1)")?;
    let units = Units::default();
    let psi = parse_expression("exp(0.5*cos(x1))*(1 + 0.3*sin(x1)*cos(x2))", 2).expect("valid expression");
    let p = [1.2, 0.4];
    let r = scalar_curvature(&spec, &p)?;
    let lap = laplace_beltrami_apply(&spec, &psi, &p)?;
    let value = psi.eval(&p);
    let h_psi = -units.kinetic() * (lap + r / 6.0 * value);
    let dts = [0.02, 0.01, 0.005];
    let t0 = std::time::Instant::now();
    let out = wkb_apply(&spec, &psi, &p, &dts, units, WkbQuadrature::default())?;
    println!("R = {r:.6}, Hψ = {h_psi:.10} ({:.1?})", t0.elapsed());
    let mut prev: Option<f64> = None;
    for (dt, k) in dts.iter().zip(&out) {
        let deriv = (k - value) / dt;
        let res = (deriv + Complex64::new(0.0, h_psi / units.hbar)).norm();
        let order = prev.map(|p| (p / res).log2());
        println!("dt = {dt:<6} (Kψ − ψ)/dt = {deriv:.8}  residual = {res:.3e}  order = {order:?}");
        prev = Some(res);
    }
    Ok(())
}
