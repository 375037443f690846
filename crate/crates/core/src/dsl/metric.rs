use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use super::expr::{parse_expression, Expr};
use super::{eval_jet, Jet};
use crate::error::{Error, Result};

/// Extent of one coordinate. Infinite bounds are allowed for open charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordRange {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl CoordRange {
    pub const UNBOUNDED: CoordRange = CoordRange {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        periodic: false,
    };

    pub fn new(lo: f64, hi: f64, periodic: bool) -> Result<CoordRange> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::config(format!("malformed range [{lo}, {hi}]")));
        }
        if periodic && !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::config(format!("periodic range [{lo}, {hi}] must be finite")));
        }
        Ok(CoordRange { lo, hi, periodic })
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.hi - self.lo)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Maps `x` into `[lo, hi)` for periodic coordinates; identity otherwise.
    pub fn reduce(&self, x: f64) -> f64 {
        match self.period() {
            Some(p) => {
                let r = self.lo + (x - self.lo).rem_euclid(p);
                if r >= self.hi { self.lo } else { r }
            }
            None => x,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.periodic || (x >= self.lo && x <= self.hi)
    }
}

/// Symbolic metric ω_ij(x) on an n-dimensional chart.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    name: String,
    n: usize,
    // upper triangle, row-major over i ≤ j
    components: Vec<Expr>,
    ranges: Vec<CoordRange>,
}

fn tri(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricSpec {
    /// `components[i][j]` is read for `i ≤ j` only.
    pub fn new(name: impl Into<String>, components: Vec<Vec<Expr>>, ranges: Vec<CoordRange>) -> Result<MetricSpec> {
        let n = components.len();
        if n == 0 {
            return Err(Error::config("metric dimension must be at least 1"));
        }
        if ranges.len() != n {
            return Err(Error::config(format!("{} ranges given for dimension {n}", ranges.len())));
        }
        let mut tri_comp = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in components.iter().enumerate() {
            if row.len() != n {
                return Err(Error::config(format!("component row {} has {} entries", i + 1, row.len())));
            }
            for e in &row[i..] {
                if let Some(m) = e.max_var() {
                    if m >= n {
                        return Err(Error::config(format!("component uses x{} in dimension {n}", m + 1)));
                    }
                }
                tri_comp.push(e.clone());
            }
        }
        Ok(MetricSpec {
            name: name.into(),
            n,
            components: tri_comp,
            ranges,
        })
    }

    pub fn diagonal(name: impl Into<String>, diag: Vec<Expr>, ranges: Vec<CoordRange>) -> Result<MetricSpec> {
        let n = diag.len();
        let comps = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i].clone() } else { Expr::Const(0.0) })
                    .collect()
            })
            .collect();
        MetricSpec::new(name, comps, ranges)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[tri(self.n, i, j)]
    }

    pub fn ranges(&self) -> &[CoordRange] {
        &self.ranges
    }

    pub fn with_ranges(mut self, ranges: Vec<CoordRange>) -> Result<MetricSpec> {
        if ranges.len() != self.n {
            return Err(Error::config("range count does not match dimension"));
        }
        self.ranges = ranges;
        Ok(self)
    }

    /// Reduces periodic coordinates; errors if a coordinate leaves its range.
    pub fn normalize_point(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.n {
            return Err(Error::Invalid(format!("point has {} coordinates, metric has {}", p.len(), self.n)));
        }
        p.iter()
            .zip(&self.ranges)
            .map(|(&x, r)| {
                if !x.is_finite() || !r.contains(x) {
                    Err(Error::OutOfChart {
                        point: p.to_vec(),
                        detail: format!("coordinate {x} not in [{}, {}]", r.lo, r.hi),
                    })
                } else {
                    Ok(r.reduce(x))
                }
            })
            .collect()
    }

    /// Jets of all n×n lower components (row-major, symmetric copies shared).
    pub fn lower_jets(&self, p: &[f64], order: u8) -> Result<Vec<Jet>> {
        let n = self.n;
        let tri_jets: Vec<Jet> = self
            .components
            .iter()
            .map(|e| eval_jet(e, p, order))
            .collect::<Result<_>>()?;
        Ok((0..n * n).map(|k| tri_jets[tri(n, k / n, k % n)].clone()).collect())
    }

    /// Plain values of ω_ij, row-major.
    pub fn lower_values(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        let tri_vals: Vec<f64> = self.components.iter().map(|e| e.eval(p)).collect();
        (0..n * n).map(|k| tri_vals[tri(n, k / n, k % n)]).collect()
    }

    /// True when every component is a constant expression.
    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|e| e.constant_value().is_some())
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (n = {})", self.name, self.n)?;
        for i in 0..self.n {
            for j in i..self.n {
                let e = self.component(i, j);
                if !e.is_zero() || i == j {
                    writeln!(f, "  w[{}][{}] = {}", i + 1, j + 1, e)?;
                }
            }
        }
        Ok(())
    }
}

fn parse_arg(arg: &str) -> Result<f64> {
    let e = parse_expression(arg, 0)?;
    e.constant_value()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::config(format!("'{arg}' is not a real constant")))
}

fn split_preset(name: &str) -> (&str, Option<&str>) {
    if let Some((head, rest)) = name.split_once(':') {
        return (head, Some(rest));
    }
    if let Some(open) = name.find('(') {
        if name.ends_with(')') {
            return (&name[..open], Some(&name[open + 1..name.len() - 1]));
        }
    }
    (name, None)
}

/// Resolves a named preset. Parameters go in parentheses or after a colon:
/// `sphere-2(2)`, `sphere-2:2`, `conformal-2:0.3*sin(x1)*sin(x2)`.
pub fn preset(name: &str) -> Result<MetricSpec> {
    let name = name.trim();
    let (head, arg) = split_preset(name);
    let angle = CoordRange {
        lo: 0.0,
        hi: 2.0 * PI,
        periodic: true,
    };
    let half_line = CoordRange {
        lo: 0.0,
        hi: f64::INFINITY,
        periodic: false,
    };
    let c = |v: f64| Expr::Const(v);
    let x = |i: usize| Expr::Var(i);
    if let Some(nstr) = head.strip_prefix("flat-cartesian-") {
        let n: usize = nstr
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::config(format!("bad dimension in preset '{name}'")))?;
        return MetricSpec::diagonal(name, vec![c(1.0); n], vec![CoordRange::UNBOUNDED; n]);
    }
    match head {
        "flat-polar-2" => MetricSpec::diagonal(
            name,
            vec![c(1.0), Expr::Pow(Box::new(x(0)), 2.0)],
            vec![half_line, angle],
        ),
        "sphere-2" | "hyperbolic-2" => {
            let a = arg.map(parse_arg).transpose()?.unwrap_or(1.0);
            if a <= 0.0 {
                return Err(Error::config(format!("radius must be positive in '{name}'")));
            }
            let trig = if head == "sphere-2" {
                super::Func::Sin
            } else {
                super::Func::Sinh
            };
            let a2 = a * a;
            let g22 = Expr::Binary(
                super::BinOp::Mul,
                Box::new(c(a2)),
                Box::new(Expr::Pow(Box::new(Expr::Call(trig, Box::new(x(0)))), 2.0)),
            );
            let theta = if head == "sphere-2" {
                CoordRange {
                    lo: 0.0,
                    hi: PI,
                    periodic: false,
                }
            } else {
                half_line
            };
            MetricSpec::diagonal(name, vec![c(a2), g22], vec![theta, angle])
        }
        "conformal-2" => {
            let phi_text = arg.ok_or_else(|| Error::config("conformal-2 needs a potential expression"))?;
            let phi = parse_expression(phi_text, 2)?;
            let g = Expr::Call(
                super::Func::Exp,
                Box::new(Expr::Binary(super::BinOp::Mul, Box::new(c(2.0)), Box::new(phi))),
            );
            MetricSpec::diagonal(name, vec![g.clone(), g], vec![CoordRange::UNBOUNDED; 2])
        }
        _ => Err(Error::config(format!("unknown metric preset '{name}'"))),
    }
}

fn value_as_expr(v: &toml::Value, key: &str, n: usize) -> Result<Expr> {
    match v {
        toml::Value::String(s) => Ok(parse_expression(s, n)?),
        toml::Value::Integer(i) => Ok(Expr::Const(*i as f64)),
        toml::Value::Float(f) if f.is_finite() => Ok(Expr::Const(*f)),
        _ => Err(Error::config(format!("{key} must be an expression string or a real number"))),
    }
}

fn bound(v: &toml::Value, key: &str) -> Result<f64> {
    match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) if !f.is_nan() => Ok(*f),
        toml::Value::String(s) => match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => parse_arg(other),
        },
        _ => Err(Error::config(format!("{key}: bounds must be numbers, 'inf' or constant expressions"))),
    }
}

fn index_key(k: &str, n: usize, what: &str) -> Result<usize> {
    k.parse::<usize>()
        .ok()
        .filter(|&i| i >= 1 && i <= n)
        .ok_or_else(|| Error::config(format!("{what} index '{k}' not in 1..={n}")))
}

/// Parses a TOML metric document:
///
/// ```toml
/// name = "warped"
/// dimension = 2
/// component.1.1 = "1"
/// component.2.2 = "(1 + 0.5*x1)^2"
/// range.1 = [0, "inf", false]
/// range.2 = [0, "2*pi", true]
/// ```
///
/// Off-diagonal components default to 0, diagonal ones are mandatory, and
/// missing ranges default to the whole real line.
pub fn parse_metric_config(text: &str) -> Result<MetricSpec> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config(format!("invalid metric document: {}", e.message())))?;
    for key in doc.keys() {
        if !matches!(key.as_str(), "name" | "dimension" | "component" | "range") {
            return Err(Error::config(format!("unknown key '{key}'")));
        }
    }
    let n = match doc.get("dimension") {
        Some(toml::Value::Integer(d)) if *d >= 1 && *d <= 16 => *d as usize,
        Some(_) => return Err(Error::config("dimension must be an integer in 1..=16")),
        None => return Err(Error::config("missing 'dimension'")),
    };
    let name = match doc.get("name") {
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::config("name must be a string")),
        None => "custom".to_string(),
    };
    let mut comps: BTreeMap<(usize, usize), Expr> = BTreeMap::new();
    if let Some(v) = doc.get("component") {
        let rows = v.as_table().ok_or_else(|| Error::config("'component' must be a table"))?;
        for (ik, row) in rows {
            let i = index_key(ik, n, "component")?;
            let row = row
                .as_table()
                .ok_or_else(|| Error::config(format!("component.{ik} must be written component.{ik}.j")))?;
            for (jk, val) in row {
                let j = index_key(jk, n, "component")?;
                let key = format!("component.{i}.{j}");
                let e = value_as_expr(val, &key, n)?;
                let slot = (i.min(j), i.max(j));
                if comps.insert(slot, e).is_some() {
                    return Err(Error::config(format!(
                        "component.{}.{} given twice (the metric is symmetric)",
                        slot.0, slot.1
                    )));
                }
            }
        }
    }
    let mut matrix = vec![vec![Expr::Const(0.0); n]; n];
    for i in 1..=n {
        if !comps.contains_key(&(i, i)) {
            return Err(Error::config(format!("missing diagonal component component.{i}.{i}")));
        }
    }
    for ((i, j), e) in comps {
        matrix[i - 1][j - 1] = e;
    }
    let mut ranges = vec![CoordRange::UNBOUNDED; n];
    if let Some(v) = doc.get("range") {
        let t = v.as_table().ok_or_else(|| Error::config("'range' must be a table"))?;
        for (ik, val) in t {
            let i = index_key(ik, n, "range")?;
            let key = format!("range.{i}");
            let arr = val
                .as_array()
                .filter(|a| a.len() == 2 || a.len() == 3)
                .ok_or_else(|| Error::config(format!("{key} must be [low, high] or [low, high, periodic]")))?;
            let lo = bound(&arr[0], &key)?;
            let hi = bound(&arr[1], &key)?;
            let periodic = match arr.get(2) {
                None => false,
                Some(toml::Value::Boolean(b)) => *b,
                Some(_) => return Err(Error::config(format!("{key}: periodic flag must be true or false"))),
            };
            ranges[i - 1] = CoordRange::new(lo, hi, periodic).map_err(|e| Error::config(format!("{key}: {e}")))?;
        }
    }
    MetricSpec::new(name, matrix, ranges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_preset() {
        let m = preset("flat-polar-2").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.component(1, 1).eval(&[3.0, 0.0]), 9.0);
        assert_eq!(m.ranges()[0].lo, 0.0);
        assert!(m.ranges()[1].periodic);
        assert!((m.ranges()[1].hi - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn sphere_preset_forms() {
        for name in ["sphere-2(1)", "sphere-2:1", "sphere-2"] {
            let m = preset(name).unwrap();
            assert_eq!(m.component(0, 0).eval(&[0.4, 0.0]), 1.0);
            assert!((m.component(1, 1).eval(&[0.4, 0.0]) - 0.4f64.sin().powi(2)).abs() < 1e-15);
        }
        let m = preset("sphere-2(2)").unwrap();
        assert_eq!(m.component(0, 0).eval(&[0.4, 0.0]), 4.0);
        assert!(preset("sphere-2(-1)").is_err());
        assert!(preset("nonsense").is_err());
    }

    #[test]
    fn config_round_trip() {
        let doc = r#"
            name = "warped"
            dimension = 2
            component.1.1 = "1"
            component.1.2 = 0.1
            component.2.2 = "(1 + 0.5*x1)^2"
            range.1 = [0, "inf", false]
            range.2 = [0, "2*pi", true]
        "#;
        let m = parse_metric_config(doc).unwrap();
        assert_eq!(m.name(), "warped");
        assert_eq!(m.component(1, 0).eval(&[1.0, 0.0]), 0.1);
        assert_eq!(m.component(1, 1).eval(&[2.0, 0.0]), 4.0);
        assert!(m.ranges()[1].periodic);
        assert_eq!(m.ranges()[0].hi, f64::INFINITY);
    }

    #[test]
    fn missing_diagonal_is_named() {
        let doc = "dimension = 2\ncomponent.2.2 = \"1\"\n";
        let err = parse_metric_config(doc).unwrap_err().to_string();
        assert!(err.contains("component.1.1"), "{err}");
    }

    #[test]
    fn bad_ranges_rejected() {
        for r in ["[1, 0]", "[0, \"inf\", true]", "[0]", "[0, 1, 3]"] {
            let doc = format!("dimension = 1\ncomponent.1.1 = 1\nrange.1 = {r}\n");
            assert!(parse_metric_config(&doc).is_err(), "{r}");
        }
        let doc = "dimension = 1\ncomponent.1.1 = true\n";
        assert!(parse_metric_config(doc).is_err());
    }

    #[test]
    fn periodic_reduction() {
        let r = CoordRange::new(0.0, 2.0 * PI, true).unwrap();
        assert!((r.reduce(-0.5) - (2.0 * PI - 0.5)).abs() < 1e-14);
        assert!((r.reduce(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-14);
    }
}
