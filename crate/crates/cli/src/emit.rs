//! Artifact text: CSV, canonical JSON and SVG plots.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, Result};

pub const GENERATOR: &str = concat!("branchlab ", env!("CARGO_PKG_VERSION"));

/// Comma-separated table with a mandatory header row and `\n` line endings.
///
/// Cells never contain commas, quotes or newlines; lists inside a cell are
/// joined with `;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        debug_assert!(row.iter().all(|c| !c.contains([',', '"', '\n', '\r'])));
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Pretty JSON with sorted keys (serde_json's default map is ordered).
pub fn canonical_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    text
}

/// Fixed-precision float text, so plots do not depend on formatting quirks.
pub fn float_cell(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.12e}")
    }
}

pub enum PlotKind {
    Line,
    Scatter,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub kind: PlotKind,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

impl Plot<'_> {
    pub fn to_svg(&self) -> String {
        let (x0, x1) = range(self.points.iter().map(|p| p.0));
        let (y0, y1) = range(self.points.iter().map(|p| p.1).chain([0.0]));
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        s.push_str(&format!("<!-- generator: {GENERATOR} -->\n"));
        s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            escape(self.title)
        ));
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        s.push_str(&format!(
            "<path d=\"M{left:.1},{top:.1} L{left:.1},{bottom:.1} L{right:.1},{bottom:.1}\" stroke=\"black\" fill=\"none\"/>\n"
        ));
        for (val, anchor_x, anchor_y, align) in [
            (x0, left, bottom + 18.0, "start"),
            (x1, right, bottom + 18.0, "end"),
        ] {
            s.push_str(&tick(val, anchor_x, anchor_y, align));
        }
        for (val, y) in [(y0, bottom), (y1, top)] {
            s.push_str(&tick(val, left - 6.0, y + 4.0, "end"));
        }
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            WIDTH / 2.0,
            HEIGHT - 15.0,
            escape(self.x_label)
        ));
        s.push_str(&format!(
            "<text x=\"15\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 15 {:.1})\">{}</text>\n",
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(self.y_label)
        ));
        match self.kind {
            PlotKind::Line => {
                let pts: Vec<String> = self
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                s.push_str(&format!(
                    "<polyline points=\"{}\" stroke=\"steelblue\" stroke-width=\"2\" fill=\"none\"/>\n",
                    pts.join(" ")
                ));
                for &(x, y) in &self.points {
                    s.push_str(&circle(sx(x), sy(y), 3.0));
                }
            }
            PlotKind::Scatter => {
                for &(x, y) in &self.points {
                    s.push_str(&circle(sx(x), sy(y), 4.0));
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn tick(value: f64, x: f64, y: f64, anchor: &str) -> String {
    format!(
        "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
        format_tick(value)
    )
}

fn format_tick(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        format!("{v:.4}")
    }
}

fn circle(x: f64, y: f64, r: f64) -> String {
    format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"steelblue\"/>\n")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}
