//! CSV reports, KFP1 snapshots and SVG line plots.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use kfp_core::mesh::{write_snapshot, Field};

/// Rows of string cells under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

/// Shortest representation that round-trips, with an exponent for very
/// large or small magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(path: &Path, table: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io::Error::other)?;
    w.write_record(&table.header).map_err(io::Error::other)?;
    for r in &table.rows {
        w.write_record(r).map_err(io::Error::other)?;
    }
    w.flush()
}

pub fn write_field(path: &Path, u: &Field) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(u, &mut w).map_err(|e| io::Error::other(e.to_string()))?;
    w.flush()
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

impl Plot {
    fn tx(&self, v: f64) -> Option<f64> {
        if self.log_x {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    fn ty(&self, v: f64) -> Option<f64> {
        if self.log_y {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    /// Polylines on linear or log axes; points that cannot be drawn on a log
    /// axis are skipped.
    pub fn to_svg(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| s.points.iter().filter_map(|&(x, y)| Some((self.tx(x)?, self.ty(y)?))).collect())
            .collect();
        let all: Vec<&(f64, f64)> = pts.iter().flatten().collect();
        let (mut x0, mut x1, mut y0, mut y1) =
            all.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |(a, b, c, d), p| {
                (a.min(p.0), b.max(p.0), c.min(p.1), d.max(p.1))
            });
        if all.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 <= 0.0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(&self.title));
        let (l, r, b, t) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
        let _ = writeln!(s, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" stroke="black" fill="none"/>"#);
        let tick = |v: f64, log: bool| if log { format!("1e{v:.2}") } else { format!("{v:.3e}") };
        for (v, px) in [(x0, l), (x1, r)] {
            let _ =
                writeln!(s, r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, tick(v, self.log_x));
        }
        for (v, py) in [(y0, b), (y1, t)] {
            let _ = writeln!(s, r#"<text x="{}" y="{py}" text-anchor="end">{}</text>"#, l - 4.0, tick(v, self.log_y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (k, (ser, p)) in self.series.iter().zip(&pts).enumerate() {
            let c = COLORS[k % COLORS.len()];
            if !p.is_empty() {
                let d: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                let _ =
                    writeln!(s, r#"<polyline points="{}" stroke="{c}" fill="none" stroke-width="1.5"/>"#, d.join(" "));
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
                r - 120.0,
                t + 14.0 * (k as f64 + 1.0),
                escape(&ser.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_plot(path: &Path, plot: &Plot) -> io::Result<()> {
    std::fs::write(path, plot.to_svg())
}
