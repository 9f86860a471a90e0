//! Standalone SVG plots of CDF and histogram CSV files.
//!
//! Output depends only on the input text and the style, so identical input
//! gives byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

pub const CDF_HEADER: &str = "x,empirical,reference";
pub const HISTOGRAM_HEADER: &str = "bin_left,bin_right,count,density";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Columns `x,empirical,reference`.
    Cdf,
    /// Columns `bin_left,bin_right,count,density`.
    Histogram,
}

impl PlotKind {
    pub fn from_name(s: &str) -> Option<PlotKind> {
        match s {
            "cdf" => Some(PlotKind::Cdf),
            "histogram" => Some(PlotKind::Histogram),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub kind: PlotKind,
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl Style {
    pub fn cdf(title: &str) -> Style {
        Style { kind: PlotKind::Cdf, title: title.to_string(), width: 640, height: 420 }
    }

    pub fn histogram(title: &str) -> Style {
        Style { kind: PlotKind::Histogram, title: title.to_string(), width: 640, height: 420 }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RenderError {
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("no data rows")]
    Empty,
    #[error("io error: {0}")]
    Io(String),
}

/// Rows of a CDF table: `(x, empirical, reference)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CdfTable {
    pub rows: Vec<[f64; 3]>,
}

impl CdfTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CDF_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{}", r[0], r[1], r[2]);
        }
        s
    }
}

fn parse_rows(csv: &str, header: &str) -> Result<Vec<Vec<f64>>, RenderError> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or(RenderError::Empty)?;
    if first.trim() != header {
        return Err(RenderError::Schema(format!("expected header `{header}`, found `{}`", first.trim())));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let cells: Vec<&str> = l.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(RenderError::Schema(format!("row {} has {} columns, expected {width}", i + 2, cells.len())));
        }
        let row = cells
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| RenderError::Schema(format!("row {} has a non-numeric cell", i + 2)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(RenderError::Empty);
    }
    Ok(rows)
}

/// Axis-aligned frame mapping data to pixels.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(style: &Style, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> Frame {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Frame {
            x0,
            x1,
            y0,
            y1,
            left: 60.0,
            right: style.width as f64 - 20.0,
            top: 40.0,
            bottom: style.height as f64 - 40.0,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

fn tick_label(v: f64) -> String {
    let s = if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) { format!("{v:.2e}") } else { format!("{v:.3}") };
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') { s[1..].to_string() } else { s }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn axes(out: &mut String, f: &Frame, style: &Style, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        num(f.left), num(f.bottom), num(f.right), num(f.bottom)
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        num(f.left), num(f.bottom), num(f.left), num(f.top)
    );
    for k in 0..=4 {
        let xv = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let x = f.px(xv);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            num(x), num(f.bottom), num(x), num(f.bottom + 5.0), num(x), num(f.bottom + 18.0), tick_label(xv)
        );
        let yv = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let y = f.py(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            num(f.left - 5.0), num(y), num(f.left), num(y), num(f.left - 8.0), num(y + 4.0), tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
        num(style.width as f64 / 2.0),
        escape(&style.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" font-size="11" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        num((f.top + f.bottom) / 2.0),
        num((f.top + f.bottom) / 2.0),
        ylabel
    );
}

fn header(style: &Style) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    s
}

fn render_cdf(rows: &[Vec<f64>], style: &Style) -> String {
    let xmin = rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    let xmax = rows.iter().map(|r| r[0]).fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::new(style, (xmin, xmax), (0.0, 1.0));
    let mut out = header(style);
    axes(&mut out, &f, style, "F(x)");

    let mut sorted: Vec<&Vec<f64>> = rows.iter().collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    // Right-continuous step: flat at the previous level up to each jump.
    let mut d = format!("M{},{}", num(f.left), num(f.py(0.0)));
    for r in &sorted {
        let _ = write!(d, " H{} V{}", num(f.px(r[0])), num(f.py(r[1].clamp(0.0, 1.0))));
    }
    let _ = write!(d, " H{}", num(f.right));
    let _ = writeln!(out, r##"<path class="empirical" d="{d}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##);

    let mut d = String::new();
    for (i, r) in sorted.iter().enumerate() {
        let _ = write!(d, "{}{},{}", if i == 0 { "M" } else { " L" }, num(f.px(r[0])), num(f.py(r[2].clamp(0.0, 1.0))));
    }
    let _ = writeln!(out, r##"<path class="reference" d="{d}" fill="none" stroke="#d62728" stroke-width="1.5" stroke-dasharray="5,3"/>"##);
    legend(&mut out, &f);
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, f: &Frame) {
    let x = f.right - 130.0;
    let y = f.top + 12.0;
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="1.5"/><text x="{}" y="{}" font-size="11">empirical</text>"##,
        num(x), num(y), num(x + 20.0), num(y), num(x + 26.0), num(y + 4.0)
    );
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="1.5" stroke-dasharray="5,3"/><text x="{}" y="{}" font-size="11">reference</text>"##,
        num(x), num(y + 16.0), num(x + 20.0), num(y + 16.0), num(x + 26.0), num(y + 20.0)
    );
}

fn render_histogram(rows: &[Vec<f64>], style: &Style) -> Result<String, RenderError> {
    if rows.iter().any(|r| !(r[1] > r[0])) {
        return Err(RenderError::Schema("bin_right must exceed bin_left".into()));
    }
    let xmin = rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    let xmax = rows.iter().map(|r| r[1]).fold(f64::NEG_INFINITY, f64::max);
    let ymax = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let f = Frame::new(style, (xmin, xmax), (0.0, if ymax > 0.0 { 1.05 * ymax } else { 1.0 }));
    let mut out = header(style);
    axes(&mut out, &f, style, "density");
    let mut d = format!("M{},{}", num(f.px(rows[0][0])), num(f.py(0.0)));
    for r in rows {
        let _ = write!(d, " L{},{} L{},{}", num(f.px(r[0])), num(f.py(r[3])), num(f.px(r[1])), num(f.py(r[3])));
    }
    let _ = write!(d, " L{},{}", num(f.px(rows[rows.len() - 1][1])), num(f.py(0.0)));
    let _ = writeln!(out, r##"<path class="empirical" d="{d}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Render CSV text as SVG.
pub fn render(csv: &str, style: &Style) -> Result<String, RenderError> {
    match style.kind {
        PlotKind::Cdf => Ok(render_cdf(&parse_rows(csv, CDF_HEADER)?, style)),
        PlotKind::Histogram => render_histogram(&parse_rows(csv, HISTOGRAM_HEADER)?, style),
    }
}

/// Render `csv_path` into `svg_path`; nothing is written on error.
pub fn render_file(csv_path: &Path, svg_path: &Path, style: &Style) -> Result<(), RenderError> {
    let csv = std::fs::read_to_string(csv_path).map_err(|e| RenderError::Io(format!("{}: {e}", csv_path.display())))?;
    let svg = render(&csv, style)?;
    std::fs::write(svg_path, svg).map_err(|e| RenderError::Io(format!("{}: {e}", svg_path.display())))
}
