//! Minimal hand-written SVG: heatmaps and line/scatter plots. Output is a
//! pure function of the data, with no timestamps or random ids.

use std::fmt::Write as _;

use hinv::charfit::PhaseSpaceMap;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title)).unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0).unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            writeln!(out, r#"<line x1="{xp:.2}" y1="{y1}" x2="{xp:.2}" y2="{}" stroke="black"/>"#, y1 + 5.0).unwrap();
            writeln!(out, r#"<text x="{xp:.2}" y="{}" text-anchor="middle">{}</text>"#, y1 + 18.0, tick(xv)).unwrap();
            writeln!(out, r#"<line x1="{}" y1="{yp:.2}" x2="{x0}" y2="{yp:.2}" stroke="black"/>"#, x0 - 5.0).unwrap();
            writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, yp + 4.0, tick(yv)).unwrap();
        }
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 15.0, escape(xlabel)).unwrap();
        writeln!(
            out,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(ylabel)
        )
        .unwrap();
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Line and scatter series on shared axes, with a legend on the right.
pub fn plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let frame = Frame {
        x: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut out = String::new();
    header(&mut out, title);
    frame.axes(&mut out, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        match s.style {
            Style::Line => {
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                    .collect();
                writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" ")).unwrap();
            }
            Style::Points => {
                for &(x, y) in &s.points {
                    writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, frame.px(x), frame.py(y)).unwrap();
                }
            }
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        writeln!(out, r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{color}"/>"#, ly - 8.0).unwrap();
        writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 14.0, escape(&s.label)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Viridis-like ramp from dark blue (0) to yellow (1).
fn color(v: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let v = v.clamp(0.0, 1.0);
    let i = STOPS.iter().rposition(|s| s.0 <= v).unwrap_or(0).min(STOPS.len() - 2);
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let t = (v - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|k| (a.1[k] + t * (b.1[k] - a.1[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// |0⟩ population over the (Θ, Φ) grid, colour scale fixed to [0, 1].
pub fn heatmap(title: &str, map: &PhaseSpaceMap) -> String {
    let n = map.n_points.max(1);
    let thetas: Vec<f64> = map.records.iter().step_by(n).map(|r| r.theta).collect();
    let phis: Vec<f64> = map.records.iter().take(n).map(|r| r.phi).collect();
    let half = |v: &[f64]| if v.len() > 1 { (v[1] - v[0]).abs() / 2.0 } else { 0.5 };
    let (ht, hp) = (half(&thetas), half(&phis));
    let frame = Frame {
        x: (phis.first().copied().unwrap_or(0.0) - hp, phis.last().copied().unwrap_or(0.0) + hp),
        y: (thetas.first().copied().unwrap_or(0.0) - ht, thetas.last().copied().unwrap_or(0.0) + ht),
    };
    let mut out = String::new();
    header(&mut out, title);
    for r in &map.records {
        let (x0, x1) = (frame.px(r.phi - hp), frame.px(r.phi + hp));
        let (y0, y1) = (frame.py(r.theta + ht), frame.py(r.theta - ht));
        writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x1 - x0,
            y1 - y0,
            color(r.p0)
        )
        .unwrap();
    }
    frame.axes(&mut out, "phi (rad)", "theta (rad)");
    let bx = W - RIGHT + 20.0;
    let steps = 20;
    let bh = (H - TOP - BOTTOM) / steps as f64;
    for k in 0..steps {
        let v = 1.0 - (k as f64 + 0.5) / steps as f64;
        writeln!(out, r#"<rect x="{bx}" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#, TOP + k as f64 * bh, bh + 0.5, color(v)).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}">1</text>"#, bx + 26.0, TOP + 10.0).unwrap();
    writeln!(out, r#"<text x="{}" y="{}">0</text>"#, bx + 26.0, H - BOTTOM).unwrap();
    writeln!(out, r#"<text x="{bx}" y="{}">P(0)</text>"#, TOP - 6.0).unwrap();
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_deterministic_and_well_formed() {
        let s = vec![
            Series { label: "a<b".into(), points: vec![(0.0, 1.0), (1.0, 2.0)], style: Style::Line },
            Series { label: "pts".into(), points: vec![(0.5, 1.5)], style: Style::Points },
        ];
        let a = plot("t", "x", "y", &s);
        assert_eq!(a, plot("t", "x", "y", &s));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains("a&lt;b"));
        assert!(a.contains("<polyline") && a.contains("<circle"));
    }

    #[test]
    fn colour_ramp_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(2.0), color(1.0));
    }
}
