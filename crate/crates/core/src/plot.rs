//! Minimal SVG line charts for spectra and semivariograms.

use std::fmt::Write;

use crate::spectrum::SpectrumSeries;
use crate::variogram::Semivariogram;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub lines: Vec<Line>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            (a..=b)
                .map(|e| 10f64.powi(e))
                .filter(|&t| (self.lo - 1e-9..=self.hi + 1e-9).contains(&t.log10()))
                .collect()
        } else {
            (0..=5)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0)
                .collect()
        }
    }
}

fn usable(p: &(f64, f64), chart: &Chart) -> bool {
    p.0.is_finite() && p.1.is_finite() && (!chart.log_x || p.0 > 0.0) && (!chart.log_y || p.1 > 0.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

pub fn render_svg(chart: &Chart) -> String {
    let pts = || {
        chart
            .lines
            .iter()
            .flat_map(|l| l.points.iter())
            .filter(|p| usable(p, chart))
    };
    let xa = Axis::fit(pts().map(|p| p.0), chart.log_x);
    let ya = Axis::fit(pts().map(|p| p.1), chart.log_y);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + xa.frac(x) * pw;
    let sy = |y: f64| MARGIN_T + (1.0 - ya.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(&chart.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in xa.ticks() {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_T + ph,
            MARGIN_T + ph + 16.0,
            tick_label(t)
        );
    }
    for t in ya.ticks() {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_L + pw,
            MARGIN_L - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 16.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(&chart.y_label)
    );

    for (i, line) in chart.lines.iter().enumerate() {
        let color = if line.dashed {
            "#555"
        } else {
            PALETTE[i % PALETTE.len()]
        };
        let path: Vec<String> = line
            .points
            .iter()
            .filter(|p| usable(p, chart))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if path.is_empty() {
            continue;
        }
        let dash = if line.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN_T + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_L + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&line.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Log-log chart with a `k^(-5/3)` reference anchored to the first series
/// at its lowest positive wavenumber.
pub fn spectrum_chart(series: &[(String, SpectrumSeries)]) -> Chart {
    spectrum_chart_from_lines(
        series
            .iter()
            .map(|(name, s)| Line {
                label: name.clone(),
                points: s
                    .wavenumbers
                    .iter()
                    .zip(&s.energy)
                    .map(|(&k, &e)| (k as f64, e))
                    .collect(),
                dashed: false,
            })
            .collect(),
    )
}

/// Same as [`spectrum_chart`] for `(k, E)` point lists.
pub fn spectrum_chart_from_lines(mut lines: Vec<Line>) -> Chart {
    if let Some(anchor) = lines
        .first()
        .and_then(|l| l.points.iter().find(|p| p.0 > 0.0 && p.1 > 0.0).copied())
    {
        let kmax = lines
            .iter()
            .flat_map(|l| l.points.iter().map(|p| p.0))
            .fold(anchor.0, f64::max);
        let reference = [anchor.0, kmax]
            .iter()
            .map(|&k| (k, anchor.1 * (k / anchor.0).powf(-5.0 / 3.0)))
            .collect();
        lines.push(Line {
            label: "k^(-5/3)".into(),
            points: reference,
            dashed: true,
        });
    }
    Chart {
        title: "Kinetic energy spectrum".into(),
        x_label: "wavenumber k".into(),
        y_label: "E(k)".into(),
        log_x: true,
        log_y: true,
        lines,
    }
}

/// Linear chart of normalized γ against lag distance.
pub fn semivariogram_chart_from_lines(lines: Vec<Line>) -> Chart {
    Chart {
        title: "Normalized semivariogram".into(),
        x_label: "r (km)".into(),
        y_label: "gamma(r) / sill".into(),
        log_x: false,
        log_y: false,
        lines,
    }
}

pub fn semivariogram_chart(series: &[(String, Semivariogram)]) -> Chart {
    semivariogram_chart_from_lines(
        series
            .iter()
            .map(|(name, v)| Line {
                label: name.clone(),
                points: v
                    .radii_km
                    .iter()
                    .copied()
                    .zip(v.gamma.iter().copied())
                    .collect(),
                dashed: false,
            })
            .collect(),
    )
}
