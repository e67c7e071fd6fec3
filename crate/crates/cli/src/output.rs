//! Result files: CSV tables, plot data and atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `ln(r/R)  ln(value)  stderr/value`.
    LogLog,
    /// `x  value  stderr`.
    Curve,
}

/// One result for plotting. For [`PlotKind::LogLog`], `x` is the ratio `r/R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyResults;

impl std::fmt::Display for EmptyResults {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("no results to plot")
    }
}

impl std::error::Error for EmptyResults {}

/// Whitespace-separated plot data. Lines starting with `#` are comments;
/// log-log output replaces non-positive values by a warning comment.
pub fn emit_plot_data(points: &[PlotPoint], kind: PlotKind) -> Result<String, EmptyResults> {
    if points.is_empty() {
        return Err(EmptyResults);
    }
    let mut s = String::new();
    match kind {
        PlotKind::LogLog => {
            s.push_str("# ln(r/R) ln(value) rel_stderr\n");
            for p in points {
                if p.value > 0.0 {
                    let _ = writeln!(s, "{} {} {}", num(p.x.ln()), num(p.value.ln()), num(p.stderr / p.value));
                } else {
                    let _ = writeln!(s, "# warning: r/R = {} excluded, value {} is not positive", num(p.x), num(p.value));
                }
            }
        }
        PlotKind::Curve => {
            s.push_str("# x value stderr\n");
            for p in points {
                let _ = writeln!(s, "{} {} {}", num(p.x), num(p.value), num(p.stderr));
            }
        }
    }
    Ok(s)
}

/// Data rows of a `.dat` file as numeric triples; comments and blank lines
/// are skipped.
pub fn parse_plot_data(text: &str) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let v: Vec<f64> =
            l.split_whitespace().map(|t| t.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("line {}: {e}", i + 1))?;
        if v.len() != 3 {
            return Err(format!("line {}: expected 3 columns, got {}", i + 1, v.len()));
        }
        out.push((v[0], v[1], v[2]));
    }
    Ok(out)
}

/// Write through a temporary file in the same directory, then rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_skips_zeros_with_warning() {
        let pts = [PlotPoint { x: 0.5, value: 0.25, stderr: 0.01 }, PlotPoint { x: 0.25, value: 0.0, stderr: 0.0 }];
        let s = emit_plot_data(&pts, PlotKind::LogLog).unwrap();
        assert!(s.contains("# warning"));
        let rows = parse_plot_data(&s).unwrap();
        assert_eq!(rows, vec![(0.5f64.ln(), 0.25f64.ln(), 0.04)]);
        assert_eq!(emit_plot_data(&[], PlotKind::Curve), Err(EmptyResults));
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(0.1), opt(None)]);
        assert_eq!(t.to_csv(), "a,b\n0.1,\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}
