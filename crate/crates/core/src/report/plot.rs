//! Line charts as standalone SVG documents.

use std::fmt::Write;

use crate::eval::OvergenCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

impl From<&OvergenCurve> for Series {
    fn from(c: &OvergenCurve) -> Self {
        Series {
            label: c.idiom.clone(),
            values: c.rates.clone(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn x_at(i: usize, n: usize) -> f64 {
    let w = WIDTH - LEFT - RIGHT;
    if n <= 1 {
        LEFT + w / 2.0
    } else {
        LEFT + w * i as f64 / (n - 1) as f64
    }
}

fn y_at(v: f64) -> f64 {
    TOP + (1.0 - v.clamp(0.0, 1.0)) * (HEIGHT - TOP - BOTTOM)
}

fn polyline(out: &mut String, values: &[f64], n: usize, color: &str, width: f64, label: &str, class: &str) {
    let points: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", x_at(i, n), y_at(*v)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="{width}" points="{}"><title>{}</title></polyline>"#,
        points.join(" "),
        escape(label)
    );
}

/// Pointwise mean over the series that have a value at each position.
fn mean_series(series: &[Series], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let vs: Vec<f64> = series.iter().filter_map(|s| s.values.get(i).copied()).collect();
            vs.iter().sum::<f64>() / vs.len() as f64
        })
        .collect()
}

/// Rates in [0, 1] against checkpoints. With two or more series a mean
/// line is drawn on top.
pub fn plot_series(series: &[Series], x_labels: &[String], title: &str, y_label: &str) -> String {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(x_labels.len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, y_at(0.0), y_at(1.0));
    let _ = writeln!(out, r##"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#000"/>"##);
    let _ = writeln!(out, r##"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#000"/>"##);
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = y_at(tick);
        let _ = writeln!(out, r##"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="#000"/>"##, x0 - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{tick}</text>"#, x0 - 6.0, y + 4.0);
    }
    for (i, l) in x_labels.iter().enumerate() {
        let x = x_at(i, n);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 16.0, escape(l));
    }
    let _ = writeln!(out, r#"<text class="x-label" x="{}" y="{}" text-anchor="middle">checkpoint</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        out,
        r#"<text class="y-label" x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        polyline(&mut out, &s.values, n, PALETTE[k % PALETTE.len()], 1.5, &s.label, "series");
    }
    if series.len() >= 2 {
        polyline(&mut out, &mean_series(series, n), n, "#000", 3.0, "mean", "mean");
    }
    out.push_str("</svg>\n");
    out
}

pub fn plot_curves(curves: &[OvergenCurve], title: &str) -> String {
    let labels = curves.iter().max_by_key(|c| c.checkpoints.len()).map(|c| c.checkpoints.clone()).unwrap_or_default();
    let series: Vec<Series> = curves.iter().map(Series::from).collect();
    plot_series(&series, &labels, title, "overgeneralisation rate")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_curve_is_horizontal_at_mid_height() {
        let s = Series { label: "x".into(), values: vec![0.5; 4] };
        let svg = plot_series(&[s], &[], "t", "rate");
        assert_eq!(svg.matches("<polyline").count(), 1);
        let mid = format!("{:.2}", (TOP + HEIGHT - BOTTOM) / 2.0);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(pts.split(' ').all(|p| p.ends_with(&format!(",{mid}"))));
    }

    #[test]
    fn five_series_and_mean() {
        let series: Vec<Series> = (0..5).map(|k| Series { label: format!("seed {k}"), values: vec![k as f64 / 5.0; 3] }).collect();
        assert_eq!(plot_series(&series, &[], "t & <u>", "rate").matches("<polyline").count(), 6);
    }
}
