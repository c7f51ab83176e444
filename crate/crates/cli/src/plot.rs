//! Minimal SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    /// Markers with vertical error bars.
    ErrorBars,
    Dashed,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    /// `(x, y, y_err)`.
    pub points: Vec<(f64, f64, f64)>,
    pub style: Style,
    /// Index into the palette.
    pub color: usize,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * hi.abs().max(1.0) {
        let d = 0.5 * lo.abs().max(1e-3);
        return (lo - d, hi + d);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: &[(f64, String)]) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (v, label) in x_ticks {
        let x = f.px(*v);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            escape(label)
        );
    }
    for v in ticks(f.y.0, f.y.1) {
        let y = f.py(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, entries: &[(String, usize)]) {
    let x = WIDTH - MARGIN_RIGHT + 15.0;
    for (k, (name, color)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 20.0 * k as f64;
        let c = COLORS[color % COLORS.len()];
        let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="14" height="10" fill="{c}"/>"#, y - 9.0);
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 20.0, escape(name));
    }
}

/// Line/marker chart of several series sharing axes.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, e) in all {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y - e);
        yh = yh.max(y + e);
    }
    let f = Frame {
        x: padded(xl, xh),
        y: padded(yl, yh),
    };
    let mut out = String::new();
    header(&mut out, title);
    let x_ticks: Vec<(f64, String)> = ticks(f.x.0, f.x.1).into_iter().map(|v| (v, fmt_tick(v))).collect();
    axes(&mut out, &f, x_label, y_label, &x_ticks);
    for s in series {
        let c = COLORS[s.color % COLORS.len()];
        match s.style {
            Style::Line | Style::Dashed => {
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .map(|&(x, y, _)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                    .collect();
                let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"{dash}/>"#,
                    pts.join(" ")
                );
            }
            Style::ErrorBars => {
                for &(x, y, e) in &s.points {
                    let (cx, cy) = (f.px(x), f.py(y));
                    if e > 0.0 {
                        let _ = writeln!(
                            out,
                            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{c}"/>"#,
                            f.py(y - e),
                            f.py(y + e)
                        );
                    }
                    let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{c}"/>"#);
                }
            }
        }
    }
    let entries: Vec<(String, usize)> = series
        .iter()
        .filter(|s| !s.name.is_empty())
        .map(|s| (s.name.clone(), s.color))
        .collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Grouped bar chart: one group per label, one bar per series.
pub fn bar_chart(title: &str, y_label: &str, labels: &[String], series: &[(String, Vec<f64>)]) -> String {
    let n = labels.len().max(1) as f64;
    let yh = series.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0f64, f64::max);
    let f = Frame {
        x: (0.0, n),
        y: (0.0, if yh > 0.0 { yh * 1.05 } else { 1.0 }),
    };
    let mut out = String::new();
    header(&mut out, title);
    let x_ticks: Vec<(f64, String)> = labels
        .iter()
        .enumerate()
        .map(|(k, l)| (k as f64 + 0.5, l.clone()))
        .collect();
    axes(&mut out, &f, "outcome", y_label, &x_ticks);
    let group = 0.8 / series.len().max(1) as f64;
    for (s, (_, values)) in series.iter().enumerate() {
        let c = COLORS[s % COLORS.len()];
        for (k, &v) in values.iter().enumerate() {
            let left = k as f64 + 0.1 + group * s as f64;
            let (x0, x1) = (f.px(left), f.px(left + group));
            let (y0, y1) = (f.py(0.0), f.py(v.max(0.0)));
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="{c}"/>"#,
                x1 - x0,
                y0 - y1
            );
        }
    }
    let entries: Vec<(String, usize)> = series.iter().enumerate().map(|(k, (n, _))| (n.clone(), k)).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(fmt_tick(0.6000000000000001), "0.6");
        assert_eq!(fmt_tick(-0.0), "0");
    }

    #[test]
    fn charts_are_well_formed() {
        let s = Series {
            name: "a<b".into(),
            points: vec![(0.0, 1.0, 0.1), (1.0, 2.0, 0.0)],
            style: Style::ErrorBars,
            color: 0,
        };
        let svg = line_chart("t", "x", "y", &[s]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
        let bars = bar_chart("h", "p", &["0".into(), "1".into()], &[("raw".into(), vec![0.3, 0.7])]);
        assert_eq!(bars.matches("<rect").count(), 1 + 1 + 2 + 1);
    }

    #[test]
    fn flat_series_gets_a_range() {
        let s = Series {
            name: String::new(),
            points: vec![(0.0, 1.0, 0.0), (1.0, 1.0, 0.0)],
            style: Style::Line,
            color: 1,
        };
        assert!(!line_chart("t", "x", "y", &[s]).contains("NaN"));
    }
}
