//! Deterministic SVG line and polar plots.
//!
//! Canvas size, colours and number formatting are fixed, so identical
//! input always gives identical bytes.

use std::fmt::Write as _;

use anyhow::Result;

use crate::config::config_error;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e6).contains(&a) {
        format!("{v:.3e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    }
}

/// About five round-numbered ticks covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((a, b)) => Some((a.min(v), b.max(v))),
        })
}

fn padded(range: Option<(f64, f64)>) -> (f64, f64) {
    match range {
        None => (0.0, 1.0),
        Some((a, b)) if a == b => (a - 1.0, b + 1.0),
        Some(r) => r,
    }
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        esc(title)
    )
    .unwrap();
}

fn legend(out: &mut String, series: &[Series]) {
    let x = WIDTH - MARGIN_R + 20.0;
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_T + 16.0 + 20.0 * i as f64;
        let c = COLORS[i % COLORS.len()];
        writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{c}\" stroke-width=\"2\"/>",
            x + 24.0
        )
        .unwrap();
        writeln!(
            out,
            "<text class=\"legend\" x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            x + 30.0,
            y + 4.0,
            esc(&s.label)
        )
        .unwrap();
    }
}

/// Polyline path data, split wherever a point is not finite.
fn path_data(points: &[(f64, f64)], map: impl Fn(f64, f64) -> (f64, f64)) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            pen_down = false;
            continue;
        }
        let (px, py) = map(x, y);
        let cmd = if pen_down { 'L' } else { 'M' };
        if !d.is_empty() {
            d.push(' ');
        }
        write!(d, "{cmd}{px:.2},{py:.2}").unwrap();
        pen_down = true;
    }
    d
}

pub fn render_line_plot(plot: &LinePlot) -> String {
    let all = || plot.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = padded(finite_range(all().map(|p| p.0)));
    let (y0, y1) = padded(finite_range(all().map(|p| p.1)));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = move |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, &plot.title);
    writeln!(
        out,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    )
    .unwrap();
    for t in ticks(x0, x1) {
        let x = sx(t);
        writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_T,
            MARGIN_T + ph
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            MARGIN_T + ph + 18.0,
            label(t)
        )
        .unwrap();
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        writeln!(
            out,
            "<line x1=\"{MARGIN_L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_L + pw
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            MARGIN_L - 6.0,
            y + 4.0,
            label(t)
        )
        .unwrap();
    }
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        MARGIN_L + pw / 2.0,
        HEIGHT - 16.0,
        esc(&plot.x_label)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        esc(&plot.y_label)
    )
    .unwrap();
    for (i, s) in plot.series.iter().enumerate() {
        let d = path_data(&s.points, |x, y| (sx(x), sy(y)));
        if !d.is_empty() {
            writeln!(
                out,
                "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                COLORS[i % COLORS.len()]
            )
            .unwrap();
        }
    }
    legend(&mut out, &plot.series);
    out.push_str("</svg>\n");
    out
}

/// Polar plot of `(angle_deg, dB)` series; angle 0 points up and grows
/// clockwise. The radial axis spans the top `range_db` decibels.
pub fn render_polar_plot(title: &str, series: &[Series], range_db: f64) -> String {
    let top = finite_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)))
        .map(|r| (r.1 / 5.0).ceil() * 5.0)
        .unwrap_or(0.0);
    let bottom = top - range_db;
    let cx = MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0;
    let cy = MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0 + 10.0;
    let radius = (HEIGHT - MARGIN_T - MARGIN_B) / 2.0;
    let to_xy = move |ang: f64, db: f64| {
        let r = ((db - bottom) / range_db).clamp(0.0, 1.0) * radius;
        let a = ang.to_radians();
        (cx + r * a.sin(), cy - r * a.cos())
    };

    let mut out = String::new();
    header(&mut out, title);
    for k in 0..=4 {
        let r = radius * k as f64 / 4.0;
        writeln!(
            out,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"none\" stroke=\"#dddddd\"/>"
        )
        .unwrap();
        if k > 0 {
            writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{}</text>",
                cx + 3.0,
                cy - r + 11.0,
                label(bottom + range_db * k as f64 / 4.0)
            )
            .unwrap();
        }
    }
    for k in 0..12 {
        let ang = 30.0 * k as f64;
        let (x, y) = to_xy(ang, top);
        writeln!(
            out,
            "<line x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>"
        )
        .unwrap();
        let (lx, ly) = (cx + (radius + 14.0) * ang.to_radians().sin(), cy - (radius + 14.0) * ang.to_radians().cos());
        let shown = if ang > 180.0 { ang - 360.0 } else { ang };
        writeln!(
            out,
            "<text x=\"{lx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\">{}</text>",
            ly + 4.0,
            label(shown)
        )
        .unwrap();
    }
    for (i, s) in series.iter().enumerate() {
        let d = path_data(&s.points, to_xy);
        if !d.is_empty() {
            writeln!(
                out,
                "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                COLORS[i % COLORS.len()]
            )
            .unwrap();
        }
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// Reads a numeric CSV: a header row, then the first column as x and every
/// other column as one series. Errors name the offending line.
pub fn read_csv_series(text: &str) -> Result<(String, Vec<Series>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| config_error(format!("line 1: {e}")))?
        .clone();
    if headers.len() < 2 {
        return Err(config_error("line 1: need an x column and at least one series"));
    }
    let mut series: Vec<Series> = headers
        .iter()
        .skip(1)
        .map(|h| Series {
            label: h.to_string(),
            points: Vec::new(),
        })
        .collect();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            config_error(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<f64> {
            let field = rec[i].trim();
            field.parse::<f64>().map_err(|_| {
                config_error(format!("line {line}: `{field}` in column {} is not a number", i + 1))
            })
        };
        let x = parse(0)?;
        for (i, s) in series.iter_mut().enumerate() {
            s.points.push((x, parse(i + 1)?));
        }
    }
    Ok((headers[0].to_string(), series))
}
