//! Minimal SVG line plots of sweep tables.
//!
//! Output depends only on the input table and the plot options, so the same CSV
//! always renders to byte-identical SVG.

use std::fmt::Write as _;

use crate::{Result, RwaError};

/// Columns written by sweeps that are diagnostics, not curves.
const DIAGNOSTIC_COLUMNS: [&str; 3] = ["bethe_residual", "truncation_ratio", "status"];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// Plain comma-separated text with a header line; no quoting.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim_end).filter(|l| !l.is_empty());
        let headers: Vec<String> = lines
            .next()
            .ok_or_else(|| RwaError::EmptyDomain("table has no header".into()))?
            .split(',')
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if row.len() != headers.len() {
                return Err(RwaError::invalid(format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    row.len(),
                    headers.len()
                )));
            }
            rows.push(row);
        }
        Ok(CsvTable { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RwaError::MissingColumn(name.to_string()))
    }

    /// Cells that do not parse as numbers come back as `None`.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].parse::<f64>().ok()).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotSpec {
    /// Defaults to the first column.
    pub x: Option<String>,
    /// Defaults to every non-diagnostic column other than `x`.
    pub y: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: Option<String>,
}

impl PlotSpec {
    /// Accepts `x`, `y`, `xy` or `none`.
    pub fn set_log_axes(&mut self, axes: &str) -> Result<()> {
        (self.log_x, self.log_y) = match axes {
            "x" => (true, false),
            "y" => (false, true),
            "xy" | "yx" | "both" => (true, true),
            "none" | "" => (false, false),
            other => {
                return Err(RwaError::invalid(format!(
                    "--log takes x, y, xy or none, got `{other}`"
                )))
            }
        };
        Ok(())
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Scale> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        if hi - lo < 1e-300_f64.max(1e-12 * hi.abs()) {
            let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
            (lo, hi) = if log {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo - pad, hi + pad)
            };
        }
        Some(Scale { lo, hi, log })
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 8).max(1);
            return (a..=b)
                .step_by(step as usize)
                .map(|k| (10f64.powi(k), format!("1e{k}")))
                .collect();
        }
        (0..=4)
            .map(|i| {
                let v = self.lo + (self.hi - self.lo) * f64::from(i) / 4.0;
                (v, format_tick(v))
            })
            .collect()
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the table as an SVG document.
///
/// Rows whose x or y value is missing, or non-positive on a log axis, are
/// skipped and split the polyline. Fewer than two plottable x values is an
/// `EmptyDomain` error.
pub fn emit_plot(table: &CsvTable, spec: &PlotSpec) -> Result<String> {
    if table.rows.len() < 2 {
        return Err(RwaError::EmptyDomain(format!(
            "{} data rows, need at least 2",
            table.rows.len()
        )));
    }
    let x_name = match &spec.x {
        Some(x) => x.clone(),
        None => table.headers[0].clone(),
    };
    let xs = table.column(&x_name)?;
    let y_names: Vec<String> = if spec.y.is_empty() {
        table
            .headers
            .iter()
            .filter(|h| **h != x_name && !DIAGNOSTIC_COLUMNS.contains(&h.as_str()))
            .cloned()
            .collect()
    } else {
        spec.y.clone()
    };
    if y_names.is_empty() {
        return Err(RwaError::EmptyDomain("no y columns to plot".into()));
    }
    let ys = y_names.iter().map(|n| table.column(n)).collect::<Result<Vec<_>>>()?;

    let usable = |v: Option<f64>, log: bool| v.filter(|v| v.is_finite() && (!log || *v > 0.0));
    let valid_x: Vec<f64> = xs.iter().filter_map(|&v| usable(v, spec.log_x)).collect();
    if valid_x.len() < 2 {
        return Err(RwaError::EmptyDomain(format!(
            "column `{x_name}` has fewer than 2 plottable values"
        )));
    }
    let sx = Scale::fit(valid_x.into_iter(), spec.log_x)
        .ok_or_else(|| RwaError::EmptyDomain(format!("column `{x_name}` has no finite range")))?;
    let all_y = ys.iter().flat_map(|col| {
        col.iter()
            .zip(&xs)
            .filter(|(_, x)| usable(**x, spec.log_x).is_some())
            .filter_map(|(y, _)| usable(*y, spec.log_y))
    });
    let sy = Scale::fit(all_y, spec.log_y).ok_or_else(|| RwaError::EmptyDomain("no plottable y values".into()))?;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + sx.frac(v) * pw;
    let py = |v: f64| TOP + (1.0 - sy.frac(v)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(title) = &spec.title {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="18" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            escape(title)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, label) in sx.ticks() {
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0
        );
    }
    for (v, label) in sy.ticks() {
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&x_name)
    );

    for (k, (name, col)) in y_names.iter().zip(&ys).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        let mut pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(col)
            .map(|(x, y)| match (usable(*x, spec.log_x), usable(*y, spec.log_y)) {
                (Some(x), Some(y)) => (x, y),
                _ => (f64::NAN, f64::NAN),
            })
            .collect();
        // Keep NaN gaps in place while ordering by x.
        if pts.iter().all(|p| p.0.is_finite()) {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        for (x, y) in pts {
            if x.is_nan() {
                segments.push(Vec::new());
            } else {
                segments.last_mut().expect("nonempty").push((px(x), py(y)));
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let coords: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "t,exact_error,general,bethe_residual,truncation_ratio,status\n\
                       0,0e0,0e0,1e-15,,ok\n\
                       0.5,1e-3,2e-3,1e-15,,ok\n\
                       1,2e-3,3e-3,,,NonConvergence\n";

    #[test]
    fn parses_and_reads_columns() {
        let t = CsvTable::parse(CSV).unwrap();
        assert_eq!(t.headers.len(), 6);
        assert_eq!(t.column("general").unwrap()[2], Some(3e-3));
        assert_eq!(t.column("bethe_residual").unwrap()[2], None);
        assert!(matches!(t.column("nope"), Err(RwaError::MissingColumn(_))));
        assert!(CsvTable::parse("a,b\n1\n").is_err());
    }

    #[test]
    fn default_columns_skip_diagnostics() {
        let svg = emit_plot(&CsvTable::parse(CSV).unwrap(), &PlotSpec::default()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">exact_error<") && svg.contains(">general<"));
        assert!(!svg.contains(">status<"));
    }

    #[test]
    fn deterministic() {
        let t = CsvTable::parse(CSV).unwrap();
        let mut spec = PlotSpec::default();
        spec.set_log_axes("y").unwrap();
        assert_eq!(emit_plot(&t, &spec).unwrap(), emit_plot(&t, &spec).unwrap());
    }

    #[test]
    fn log_axis_drops_nonpositive_points() {
        let t = CsvTable::parse(CSV).unwrap();
        let spec = PlotSpec {
            y: vec!["general".into()],
            log_y: true,
            ..PlotSpec::default()
        };
        let svg = emit_plot(&t, &spec).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.matches(',').count(), 2);
    }

    #[test]
    fn domain_errors() {
        let one = CsvTable::parse("x,y\n1,2\n").unwrap();
        assert!(matches!(
            emit_plot(&one, &PlotSpec::default()),
            Err(RwaError::EmptyDomain(_))
        ));
        let t = CsvTable::parse(CSV).unwrap();
        let spec = PlotSpec {
            y: vec!["missing".into()],
            ..PlotSpec::default()
        };
        assert!(matches!(emit_plot(&t, &spec), Err(RwaError::MissingColumn(_))));
        let zero_x = CsvTable::parse("x,y\n0,1\n-1,2\n").unwrap();
        let spec = PlotSpec {
            log_x: true,
            ..PlotSpec::default()
        };
        assert!(matches!(emit_plot(&zero_x, &spec), Err(RwaError::EmptyDomain(_))));
        assert!(PlotSpec::default().set_log_axes("z").is_err());
    }
}
