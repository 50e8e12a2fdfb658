//! Static SVG plots: median points with whisker bars, plus an optional
//! theory polyline. Self-contained markup, no external assets.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Alpha,
    LogOnePlusOmega,
}

impl XAxis {
    fn label(self) -> &'static str {
        match self {
            XAxis::Alpha => "α = n/p",
            XAxis::LogOnePlusOmega => "log10(1 + Ω)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Lower and upper end of the whisker at the same `x`.
    pub whisker: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<Point>,
}

impl Series {
    /// Skips entries without a `y` value (e.g. no successful replication).
    pub fn from_records(
        label: impl Into<String>,
        records: impl IntoIterator<Item = (f64, Option<f64>, Option<(f64, f64)>)>,
    ) -> Self {
        let points = records
            .into_iter()
            .filter_map(|(x, y, whisker)| y.map(|y| Point { x, y, whisker }))
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .collect();
        Series { label: label.into(), points }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_axis: XAxis,
    pub y_label: String,
    pub series: Vec<Series>,
    pub theory: Option<Vec<(f64, f64)>>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

/// Roughly five round tick positions inside `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    (first..)
        .map(|k| k as f64 * step)
        .take_while(|t| *t <= hi + 1e-9 * step)
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl PlotSpec {
    pub fn render(&self) -> String {
        let theory = self.theory.as_deref().unwrap_or(&[]);
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.x)).chain(theory.iter().map(|t| t.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .flat_map(|p| [Some(p.y), p.whisker.map(|w| w.0), p.whisker.map(|w| w.1)])
            .flatten()
            .chain(theory.iter().map(|t| t.1));
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let f = Frame { x0, x1, y0, y1 };

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&self.title)
        );
        let (left, right, top, bottom) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            right - left,
            bottom - top
        );
        for t in ticks(x0, x1) {
            let x = f.px(t);
            let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{bottom}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, bottom + 5.0);
            let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_tick(t));
        }
        for t in ticks(y0, y1) {
            let y = f.py(t);
            let _ = writeln!(svg, r#"<line x1="{:.1}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="black"/>"#, left - 5.0);
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 8.0, y + 4.0, fmt_tick(t));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            HEIGHT - 15.0,
            self.x_axis.label()
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (top + bottom) / 2.0,
            escape(&self.y_label)
        );

        if theory.len() > 1 {
            let pts: Vec<String> = theory.iter().map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y))).collect();
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, pts.join(" "));
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            for p in &s.points {
                let (x, y) = (f.px(p.x), f.py(p.y));
                if let Some((lo, hi)) = p.whisker {
                    let (ylo, yhi) = (f.py(lo), f.py(hi));
                    let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{ylo:.2}" x2="{x:.2}" y2="{yhi:.2}" stroke="{color}"/>"#);
                    for yy in [ylo, yhi] {
                        let _ = writeln!(
                            svg,
                            r#"<line x1="{:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="{color}"/>"#,
                            x - 4.0,
                            x + 4.0
                        );
                    }
                }
                let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#);
            }
            let ly = top + 10.0 + 18.0 * i as f64;
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{ly:.1}" r="3.5" fill="{color}"/>"#, right + 15.0);
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, right + 25.0, ly + 4.0, escape(&s.label));
        }
        if theory.len() > 1 {
            let ly = top + 10.0 + 18.0 * self.series.len() as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="black" stroke-width="1.5"/>"#,
                right + 8.0,
                right + 22.0
            );
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">theory</text>"#, right + 25.0, ly + 4.0);
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> PlotSpec {
        PlotSpec {
            title: "a < b".into(),
            x_axis: XAxis::Alpha,
            y_label: "cosine".into(),
            series: vec![Series::from_records(
                "sim",
                [(1.0, Some(0.88), Some((0.85, 0.9))), (2.0, None, None), (4.0, Some(0.95), None)],
            )],
            theory: Some(vec![(1.0, 0.884), (4.0, 0.95)]),
        }
    }

    #[test]
    fn renders_primitives() {
        let svg = plot().render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3); // two points + legend marker
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn ticks_are_round() {
        let t = ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        assert_eq!(fmt_tick(t[3]), "0.6");
        assert!(ticks(0.83, 1.01).len() >= 3);
    }

    #[test]
    fn empty_plot_still_renders() {
        let svg = PlotSpec { series: vec![], theory: None, ..plot() }.render();
        assert!(svg.contains("</svg>"));
    }
}
