//! CSV, JSON and SVG writers. Numbers are written with 17 significant
//! digits so that files round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

pub fn num(v: f64) -> String {
    if v == 0.0 {
        // avoid "-0" so that symmetric data prints identically
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// A table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| num(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Array of row objects.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                self.header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| (h.clone(), serde_json::json!(v)))
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("finite rows serialize") + "\n"
    }
}

/// Parses a CSV produced by [`Table::to_csv`].
pub fn parse_csv(text: &str) -> Option<Table> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next()?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for l in lines {
        let r: Option<Vec<f64>> = l.split(',').map(|c| c.parse().ok()).collect();
        rows.push(r?);
    }
    Some(Table { header, rows })
}

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub pts: &'a [[f64; 2]],
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const PAD: f64 = 40.0;

/// Overlay of polylines in a fixed 800×600 viewBox, scaled to the joint
/// bounding box with equal aspect ratio.
pub fn svg(title: &str, series: &[Series<'_>]) -> String {
    let all = series.iter().flat_map(|s| s.pts.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = ((WIDTH - 2.0 * PAD) / span).min((HEIGHT - 2.0 * PAD) / span);
    let map = |p: &[f64; 2]| (PAD + (p[0] - x0) * scale, HEIGHT - PAD - (p[1] - y0) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(s, "  <title>{}</title>", escape(title));
    let _ = writeln!(s, r#"  <rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for (k, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .pts
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"  <polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            ser.color,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"  <text x="{}" y="{}" font-size="14" fill="{}">{}</text>"#,
            PAD + 10.0,
            PAD + 18.0 * (k as f64 + 1.0),
            ser.color,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}
