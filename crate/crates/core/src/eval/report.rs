use std::fmt::Write as _;

use crate::{Error, Result};

/// A named curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// A labeled numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Scalars, curves and an optional table produced by one experiment.
///
/// Text form, one item per line:
///
/// ```text
/// report <title>
/// scalar <name> <value>
/// series <label> <points>
/// <x> <y>
/// table <column> <column> ...
/// row <label> <value> <value> ...
/// ```
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub title: String,
    pub scalars: Vec<(String, f64)>,
    pub series: Vec<Series>,
    pub table: Option<Table>,
}

fn token(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("_")
}

impl ExperimentReport {
    pub fn new(title: &str) -> Self {
        ExperimentReport {
            title: token(title),
            ..Default::default()
        }
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn push_scalar(&mut self, name: &str, v: f64) {
        self.scalars.push((token(name), v));
    }

    pub fn push_series(&mut self, label: &str, x: Vec<f64>, y: Vec<f64>) -> Result<()> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "series `{label}` has {} x values and {} y values",
                x.len(),
                y.len()
            )));
        }
        self.series.push(Series {
            label: token(label),
            x,
            y,
        });
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("report {}\n", self.title);
        for (n, v) in &self.scalars {
            let _ = writeln!(s, "scalar {n} {v}");
        }
        for se in &self.series {
            let _ = writeln!(s, "series {} {}", se.label, se.x.len());
            for (x, y) in se.x.iter().zip(&se.y) {
                let _ = writeln!(s, "{x} {y}");
            }
        }
        if let Some(t) = &self.table {
            let _ = writeln!(s, "table {}", t.columns.join(" "));
            for (label, vals) in &t.rows {
                let v: Vec<String> = vals.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "row {label} {}", v.join(" "));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |l: &str| Error::Format(format!("report line `{l}`"));
        let num = |t: &str, l: &str| t.parse::<f64>().map_err(|_| bad(l));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| bad(""))?;
        let title = head.strip_prefix("report ").ok_or_else(|| bad(head))?;
        let mut r = ExperimentReport::new(title);
        while let Some(line) = lines.next() {
            let t: Vec<&str> = line.split_whitespace().collect();
            match t.first().copied() {
                Some("scalar") if t.len() == 3 => r.scalars.push((t[1].to_string(), num(t[2], line)?)),
                Some("series") if t.len() == 3 => {
                    let n: usize = t[2].parse().map_err(|_| bad(line))?;
                    let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
                    for _ in 0..n {
                        let p = lines.next().ok_or_else(|| bad(line))?;
                        let (a, b) = p.split_once(' ').ok_or_else(|| bad(p))?;
                        x.push(num(a, p)?);
                        y.push(num(b.trim(), p)?);
                    }
                    r.series.push(Series {
                        label: t[1].to_string(),
                        x,
                        y,
                    });
                }
                Some("table") => {
                    r.table = Some(Table {
                        columns: t[1..].iter().map(|c| c.to_string()).collect(),
                        rows: Vec::new(),
                    })
                }
                Some("row") if t.len() >= 2 => {
                    let table = r.table.as_mut().ok_or_else(|| bad(line))?;
                    let vals = t[2..].iter().map(|v| num(v, line)).collect::<Result<Vec<_>>>()?;
                    if vals.len() != table.columns.len() {
                        return Err(bad(line));
                    }
                    table.rows.push((t[1].to_string(), vals));
                }
                _ => return Err(bad(line)),
            }
        }
        Ok(r)
    }

    /// Comma-separated sections (scalars, series points, table), separated
    /// by blank lines; empty sections are left out.
    pub fn to_csv(&self) -> String {
        let mut parts = Vec::new();
        if !self.scalars.is_empty() {
            let mut s = String::from("metric,value\n");
            for (n, v) in &self.scalars {
                let _ = writeln!(s, "{n},{v}");
            }
            parts.push(s);
        }
        if !self.series.is_empty() {
            let mut s = String::from("series,x,y\n");
            for se in &self.series {
                for (x, y) in se.x.iter().zip(&se.y) {
                    let _ = writeln!(s, "{},{x},{y}", se.label);
                }
            }
            parts.push(s);
        }
        if let Some(t) = &self.table {
            let mut s = format!("label,{}\n", t.columns.join(","));
            for (label, vals) in &t.rows {
                let v: Vec<String> = vals.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "{label},{}", v.join(","));
            }
            parts.push(s);
        }
        parts.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut r = ExperimentReport::new("rounds curve");
        r.push_scalar("accuracy", 0.875);
        r.push_series("train", vec![1.0, 2.0], vec![0.25, 0.125]).unwrap();
        r.table = Some(Table {
            columns: vec!["train_error".into(), "test_error".into()],
            rows: vec![("0.03".into(), vec![0.1, 0.2])],
        });
        let back = ExperimentReport::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.title, "rounds_curve");
        assert!(r.push_series("bad", vec![1.0], vec![]).is_err());
        let csv = r.to_csv();
        assert!(csv.contains("metric,value\naccuracy,0.875"));
        assert!(csv.contains("train,2,0.125"));
        assert!(csv.contains("label,train_error,test_error\n0.03,0.1,0.2"));
    }
}
