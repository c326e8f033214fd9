//! Minimal SVG line and scatter charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One plotted line; `band` holds the half-width of a shaded band per point.
pub struct Line {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub band: Option<Vec<f64>>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub lines: Vec<Line>,
    /// Draw markers only.
    pub scatter: bool,
    pub log_y: bool,
}

struct Scale {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
}

impl Scale {
    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, y: f64) -> f64 {
        let y = if self.log_y { y.max(f64::MIN_POSITIVE).log10() } else { y };
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    fn scale(&self) -> Scale {
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for line in &self.lines {
            for (k, &(x, y)) in line.points.iter().enumerate() {
                let b = line.band.as_ref().map_or(0.0, |b| b[k]);
                x0 = x0.min(x);
                x1 = x1.max(x);
                let (lo, hi) = (y - b, y + b);
                if self.log_y {
                    if y > 0.0 {
                        y0 = y0.min(if lo > 0.0 { lo.log10() } else { y.log10() });
                        y1 = y1.max(hi.log10());
                    }
                } else {
                    y0 = y0.min(lo);
                    y1 = y1.max(hi);
                }
            }
        }
        let (x0, x1) = span(x0, x1);
        let (y0, y1) = span(y0, y1);
        Scale {
            x0,
            x1,
            y0,
            y1,
            log_y: self.log_y,
        }
    }

    pub fn to_svg(&self) -> String {
        let s = self.scale();
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = s.x0 + f * (s.x1 - s.x0);
            let yv = s.y0 + f * (s.y1 - s.y0);
            let ylab = if s.log_y { format!("1e{yv:.1}") } else { format!("{yv:.3}") };
            let px = left + f * (right - left);
            let py = bottom - f * (bottom - top);
            let _ = writeln!(
                out,
                r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
                bottom + 16.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{ylab}</text>"#,
                left - 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            esc(&self.y_label)
        );

        for (i, line) in self.lines.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<(f64, f64)> = line
                .points
                .iter()
                .filter(|p| !s.log_y || p.1 > 0.0)
                .map(|&(x, y)| (s.x(x), s.y(y)))
                .collect();
            if let Some(band) = &line.band {
                let mut d = String::new();
                let mut lower = Vec::new();
                for (k, &(x, y)) in line.points.iter().enumerate() {
                    if s.log_y && y <= 0.0 {
                        continue;
                    }
                    let hi = y + band[k];
                    let lo = if s.log_y && y - band[k] <= 0.0 { y } else { y - band[k] };
                    let _ = write!(d, "{}{:.2} {:.2} ", if d.is_empty() { "M" } else { "L" }, s.x(x), s.y(hi));
                    lower.push((s.x(x), s.y(lo)));
                }
                for (x, y) in lower.iter().rev() {
                    let _ = write!(d, "L{x:.2} {y:.2} ");
                }
                if !d.is_empty() {
                    let _ = writeln!(
                        out,
                        r#"<path d="{}Z" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                        d
                    );
                }
            }
            if self.scatter {
                for (x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}"/>"#);
                }
            } else if !pts.is_empty() {
                let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    d.join(" ")
                );
            }
            let ly = top + 14.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{}</text>"#,
                right,
                esc(&line.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lines_and_bands() {
        let chart = Chart {
            title: "QRE <test>".into(),
            x_label: "t".into(),
            y_label: "err".into(),
            lines: vec![Line {
                label: "cs".into(),
                points: vec![(1.0, 0.5), (2.0, 0.25)],
                band: Some(vec![0.1, 0.05]),
            }],
            scatter: false,
            log_y: false,
        };
        let svg = chart.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("fill-opacity"));
        assert!(svg.contains("QRE &lt;test&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
