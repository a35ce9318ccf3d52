//! Minimal static SVG line plots: axes, ticks, one or more series, and an
//! optional horizontal reference line.  No external renderer.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 4] = ["#1f6fb2", "#c44e52", "#55a868", "#8172b2"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// horizontal reference line: (y value, legend text)
    pub reference: Option<(f64, String)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if log && !(v > 0.0) {
                continue;
            }
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = if log { (0.1, 10.0) } else { (0.0, 1.0) };
        }
        if lo == hi {
            if log {
                lo /= 2.0;
                hi *= 2.0;
            } else {
                lo -= 0.5;
                hi += 0.5;
            }
        }
        // pad 5% on both ends in plot coordinates
        let (mut a, mut b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
        let pad = 0.05 * (b - a);
        a -= pad;
        b += pad;
        if log {
            Axis { lo: a.exp(), hi: b.exp(), log }
        } else {
            Axis { lo: a, hi: b, log }
        }
    }

    /// Fraction of the way along the axis, in [0, 1].
    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.max(1e-300).ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = 5;
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                if self.log {
                    (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 10_000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.1e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl PlotSpec {
    pub fn render(&self) -> String {
        let x_axis = Axis::from_values(
            self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
            self.log_x,
        );
        let y_values = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.reference.iter().map(|r| r.0));
        let y_axis = Axis::from_values(y_values, self.log_y);

        let px = |v: f64| MARGIN_LEFT + x_axis.frac(v) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
        let py = |v: f64| HEIGHT - MARGIN_BOTTOM - y_axis.frac(v) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            0.5 * WIDTH,
            escape(&self.title)
        );

        // frame
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            x1 - x0,
            y0 - y1
        );

        for tick in x_axis.ticks() {
            let x = px(tick);
            let _ = writeln!(svg, r##"<line x1="{x:.1}" y1="{y0}" x2="{x:.1}" y2="{:.1}" stroke="#444"/>"##, y0 + 5.0);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                fmt_tick(tick)
            );
        }
        for tick in y_axis.ticks() {
            let y = py(tick);
            let _ = writeln!(svg, r##"<line x1="{:.1}" y1="{y:.1}" x2="{x0}" y2="{y:.1}" stroke="#444"/>"##, x0 - 5.0);
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                y + 4.0,
                fmt_tick(tick)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            0.5 * (x0 + x1),
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1),
            escape(&self.y_label)
        );

        if let Some((value, label)) = &self.reference {
            let y = py(*value);
            let _ = writeln!(
                svg,
                r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#888" stroke-dasharray="6 4"/>"##
            );
            let _ = writeln!(
                svg,
                r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="#666" text-anchor="end">{}</text>"##,
                x1 - 6.0,
                y - 6.0,
                escape(label)
            );
        }

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter(|(x, y)| {
                    (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0) && x.is_finite() && y.is_finite()
                })
                .map(|&(x, y)| (px(x), py(y)))
                .collect();
            if pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    path.join(" ")
                );
            }
            for (x, y) in &pts {
                let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
            }
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
                x0 + 10.0,
                y1 + 16.0 + 15.0 * i as f64,
                escape(&series.label)
            );
        }

        svg.push_str("</svg>\n");
        svg
    }
}
