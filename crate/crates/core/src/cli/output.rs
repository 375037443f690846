use std::io::{self, Write};

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned columns for reading.
    Table,
    /// One `key=value` record per line, floats with 17 significant digits.
    Records,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

/// One flat result line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    pub fields: Vec<(String, Field)>,
}

impl Record {
    pub fn new() -> Record {
        Record::default()
    }

    pub fn num(mut self, key: &str, v: f64) -> Record {
        self.fields.push((key.into(), Field::Num(v)));
        self
    }

    pub fn int(mut self, key: &str, v: i64) -> Record {
        self.fields.push((key.into(), Field::Int(v)));
        self
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Record {
        self.fields.push((key.into(), Field::Text(v.into())));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Record {
        self.fields.push((key.into(), Field::Flag(v)));
        self
    }

    pub fn point(mut self, p: &[f64]) -> Record {
        for (i, x) in p.iter().enumerate() {
            self.fields.push((format!("x{}", i + 1), Field::Num(*x)));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

fn exact(f: &Field) -> String {
    match f {
        Field::Num(v) => format!("{v:.16e}"),
        Field::Int(v) => v.to_string(),
        Field::Flag(v) => v.to_string(),
        Field::Text(s) if s.is_empty() || s.contains(char::is_whitespace) || s.contains('"') => {
            format!("{s:?}")
        }
        Field::Text(s) => s.clone(),
    }
}

fn readable(f: &Field) -> String {
    match f {
        Field::Num(v) if *v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e6) => format!("{v:.10}"),
        Field::Num(v) => format!("{v:.6e}"),
        other => exact(other),
    }
}

pub fn write_records(out: &mut dyn Write, records: &[Record], format: Format) -> io::Result<()> {
    match format {
        Format::Records => {
            for r in records {
                let line: Vec<String> = r.fields.iter().map(|(k, v)| format!("{k}={}", exact(v))).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
        Format::Table => {
            // consecutive records with the same keys share one header
            let mut start = 0;
            while start < records.len() {
                let keys: Vec<&str> = records[start].fields.iter().map(|(k, _)| k.as_str()).collect();
                let mut end = start + 1;
                while end < records.len()
                    && records[end].fields.iter().map(|(k, _)| k.as_str()).eq(keys.iter().copied())
                {
                    end += 1;
                }
                let cells: Vec<Vec<String>> = records[start..end]
                    .iter()
                    .map(|r| r.fields.iter().map(|(_, v)| readable(v)).collect())
                    .collect();
                let widths: Vec<usize> = keys
                    .iter()
                    .enumerate()
                    .map(|(c, k)| cells.iter().map(|row| row[c].len()).max().unwrap_or(0).max(k.len()))
                    .collect();
                if start > 0 {
                    writeln!(out)?;
                }
                let head: Vec<String> = keys.iter().zip(&widths).map(|(k, w)| format!("{k:>w$}")).collect();
                writeln!(out, "{}", head.join("  "))?;
                for row in &cells {
                    let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                    writeln!(out, "{}", line.join("  "))?;
                }
                start = end;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_line_keeps_full_precision() {
        let r = Record::new().text("rule", "new").num("V_q", 1.0 / 32.0).int("n", 3);
        let mut buf = Vec::new();
        write_records(&mut buf, &[r], Format::Records).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(line, "rule=new V_q=3.1250000000000000e-2 n=3\n");
        let v: f64 = line.split_whitespace().nth(1).unwrap()[4..].parse().unwrap();
        assert_eq!(v, 1.0 / 32.0);
    }

    #[test]
    fn table_regroups_on_new_keys() {
        let a = Record::new().int("N", 4).num("d", 0.5);
        let b = Record::new().num("order", 1.0);
        let mut buf = Vec::new();
        write_records(&mut buf, &[a.clone(), a, b], Format::Table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with('N')).count(), 1);
        assert!(text.contains("order"));
    }
}
