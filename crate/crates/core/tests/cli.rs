use std::collections::HashMap;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_geoquant")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn records(stdout: &str) -> Vec<HashMap<String, String>> {
    stdout
        .lines()
        .map(|l| {
            l.split_whitespace()
                .filter_map(|kv| kv.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(r: &HashMap<String, String>, key: &str) -> f64 {
    r[key].parse().unwrap()
}

#[test]
fn geometry_reports_sphere_curvature() {
    let (code, out, _) = run(&["--format", "records", "geometry", "--metric", "sphere-2:1", "--points", "1,0.3;2,1"]);
    assert_eq!(code, 0);
    let rs = records(&out);
    assert_eq!(rs.len(), 2);
    for r in &rs {
        assert!((num(r, "R") + 2.0).abs() < 1e-12);
    }
    assert!((num(&rs[0], "det") - 1.0f64.sin().powi(2)).abs() < 1e-15);
}

#[test]
fn potential_in_polar_coordinates() {
    let (code, out, _) = run(&["--format", "records", "potential", "--metric", "flat-polar-2", "--points", "2,0.1"]);
    assert_eq!(code, 0);
    let rs = records(&out);
    assert_eq!(rs.len(), 3);
    for r in &rs {
        assert!((num(r, "V_q") - 1.0 / 32.0).abs() < 1e-15, "{r:?}");
    }
}

#[test]
fn coefficients_on_random_sphere_points() {
    let (code, out, _) =
        run(&["--format", "records", "--seed", "7", "coefficient", "--metric", "sphere-2:1", "--samples", "2"]);
    assert_eq!(code, 0);
    let rs = records(&out);
    assert_eq!(rs.len(), 6);
    for r in &rs {
        assert!(num(r, "deviation").abs() < 1e-6);
    }
}

#[test]
fn spectrum_and_evolution_run() {
    let (code, out, _) = run(&[
        "--format", "records", "spectrum", "--metric", "sphere-2:1", "--grid", "12x24", "--count", "4", "--potential",
        "dewitt",
    ]);
    assert_eq!(code, 0);
    let rs = records(&out);
    assert!((num(&rs[0], "eigenvalue") - 1.0 / 6.0).abs() < 1e-10);

    let (code, out, _) = run(&[
        "--format", "records", "--time", "0.5", "evolve", "--metric", "flat-polar-2", "--grid", "16x16", "--range",
        "0.5:3,0:2*pi", "--steps", "50", "--reports", "2",
    ]);
    assert_eq!(code, 0, "{out}");
    for r in records(&out) {
        assert!((num(&r, "norm") - 1.0).abs() < 1e-10);
    }
}

#[test]
fn table_output_is_the_default() {
    let (code, out, _) = run(&["potential", "--metric", "flat-cartesian-2", "--points", "0,0"]);
    assert_eq!(code, 0);
    assert!(out.lines().next().unwrap().contains("V_q"));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["geometry", "--metric", "no-such-metric"],
        vec!["geometry", "--metric", "/no/such/file.toml"],
        vec!["potential", "--metric", "sphere-2:1", "--rule", "0.3,0.3"],
        vec!["spectrum", "--metric", "sphere-2:1", "--grid", "4x"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(err.starts_with("error:"), "{err}");
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let (code, _, err) = run(&["geometry", "--metric", "conformal-2:log(x1)", "--points", "-1,0"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("log"));
}

#[test]
fn metric_file_is_accepted() {
    let dir = std::env::temp_dir().join(format!("geoquant-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ring.toml");
    std::fs::write(&path, "dimension = 1\ncomponent.1.1 = \"(1 + 0.2*sin(x1))^2\"\nrange.1 = [0, \"2*pi\", true]\n")
        .unwrap();
    let (code, out, err) =
        run(&["--format", "records", "potential", "--metric", path.to_str().unwrap(), "--points", "0.4", "--rule", "new"]);
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(code, 0, "{err}");
    assert_eq!(records(&out).len(), 1);
}
