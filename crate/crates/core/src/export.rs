//! Plain-text artifacts: CSV tables, schema-tagged JSON and SVG 1.1 polylines.

use std::fmt::Write as _;

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "slowfast/1";

/// CSV with a declared header; floats use shortest round-trip formatting
/// so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        CsvTable { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.iter().map(|v| format!("{v:?}")).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Renders the table; `provenance` lines become leading `#` comments.
    pub fn render(&self, provenance: &[(&str, &str)]) -> String {
        let mut out = String::new();
        for (k, v) in provenance {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'a str,
    kind: &'a str,
    config_hash: &'a str,
    data: &'a T,
}

/// Wraps `data` in `{schema, kind, config_hash, data}` and pretty-prints it.
pub fn json_document<T: Serialize>(kind: &str, config_hash: &str, data: &T) -> serde_json::Result<String> {
    let env = Envelope { schema: SCHEMA_VERSION, kind, config_hash, data };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// Minimal SVG 1.1 canvas mapping a world box onto a pixel viewport (y up).
#[derive(Debug, Clone)]
pub struct Svg {
    width: f64,
    height: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> Self {
        Svg { width, height, x0, x1, y0, y1, body: String::new() }
    }

    /// Fits the world box to the given points, padded by 5%.
    pub fn fit(width: f64, height: f64, pts: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut a, mut b, mut c, mut d) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts {
            if x.is_finite() && y.is_finite() {
                a = a.min(x);
                b = b.max(x);
                c = c.min(y);
                d = d.max(y);
            }
        }
        if !a.is_finite() {
            (a, b, c, d) = (-1.0, 1.0, -1.0, 1.0);
        }
        let px = ((b - a) * 0.05).max(1e-9);
        let py = ((d - c) * 0.05).max(1e-9);
        Svg::new(width, height, (a - px, b + px), (c - py, d + py))
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let u = (x - self.x0) / (self.x1 - self.x0) * self.width;
        let v = (self.y1 - y) / (self.y1 - self.y0) * self.height;
        (u, v)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for p in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let (u, v) = self.map(*p);
            let _ = write!(d, "{u:.2},{v:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="{width}" points="{}"/>"#,
            d.trim_end()
        );
    }

    pub fn marker(&mut self, p: (f64, f64), r: f64, fill: &str) {
        let (u, v) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{u:.2}" cy="{v:.2}" r="{r}" fill="{fill}"/>"#);
    }

    pub fn text(&mut self, p: (f64, f64), s: &str) {
        let (u, v) = self.map(p);
        let esc = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(self.body, r#"<text x="{u:.2}" y="{v:.2}" font-size="12" font-family="sans-serif">{esc}</text>"#);
    }

    /// Horizontal and vertical axes through the origin, when visible.
    pub fn axes(&mut self) {
        if self.y0 < 0.0 && self.y1 > 0.0 {
            self.polyline(&[(self.x0, 0.0), (self.x1, 0.0)], "#999", 0.5);
        }
        if self.x0 < 0.0 && self.x1 > 0.0 {
            self.polyline(&[(0.0, self.y0), (0.0, self.y1)], "#999", 0.5);
        }
    }

    pub fn render(&self, comment: &str) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <!-- {c} -->\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{b}</svg>\n",
            w = self.width,
            h = self.height,
            c = comment.replace("--", "-"),
            b = self.body
        )
    }
}
