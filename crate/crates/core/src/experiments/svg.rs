//! Minimal static SVG line and box plots.

use std::fmt::Write as _;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: usize,
    pub dashed: bool,
}

/// Five-number summary drawn at `x`: whiskers `lo..hi`, box `q1..q3`, median line.
#[derive(Clone, Debug)]
pub struct BoxGlyph {
    pub x: f64,
    pub lo: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub hi: f64,
    pub color: usize,
}

#[derive(Clone, Debug)]
pub struct HLine {
    pub y: f64,
    pub label: String,
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    pub series: Vec<Series>,
    pub boxes: Vec<BoxGlyph>,
    /// Box half-width in pixels.
    pub box_half_width: f64,
    pub hlines: Vec<HLine>,
    /// Legend entries for box plots: (label, color).
    pub legend: Vec<(String, usize)>,
    /// Category labels replacing numeric x ticks: (x, label).
    pub x_categories: Vec<(f64, String)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            let pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self {
            lo,
            hi,
            log,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> Option<f64> {
        let t = if self.log { v.log10() } else { v };
        t.is_finite()
            .then(|| self.px_lo + (t - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo) as i64;
            let step = ((span as f64 / 8.0).ceil() as i64).max(1);
            let start = self.lo as i64;
            (0..=span / step)
                .map(|i| {
                    let e = start + i * step;
                    (10f64.powi(e as i32), format!("1e{e}"))
                })
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let mut v = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while v <= self.hi + 1e-9 * step {
                let label = if step >= 1.0 { format!("{v:.0}") } else { format!("{v}") };
                out.push((v, trim_float(&label)));
                v += step;
            }
            out
        }
    }
}

fn trim_float(s: &str) -> String {
    let v: f64 = s.parse().unwrap_or(0.0);
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.boxes.iter().map(|b| b.x))
            .chain(self.x_categories.iter().map(|c| c.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.boxes.iter().flat_map(|b| [b.lo, b.hi]))
            .chain(self.hlines.iter().map(|h| h.y));
        let ys: Vec<f64> = ys.filter(|y| !self.y_log || *y > 0.0).collect();
        let xs: Vec<f64> = xs.filter(|x| !self.x_log || *x > 0.0).collect();
        let xa = Axis::new(xs.into_iter(), self.x_log, LEFT, WIDTH - RIGHT);
        let ya = Axis::new(ys.into_iter(), self.y_log, HEIGHT - BOTTOM, TOP);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&self.title)
        );
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );

        let x_ticks = if self.x_categories.is_empty() {
            xa.ticks()
        } else {
            self.x_categories.clone()
        };
        for (v, label) in x_ticks {
            if let Some(px) = xa.map(v).filter(|p| *p >= x0 - 0.5 && *p <= x1 + 0.5) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                    y0 + 5.0,
                    y0 + 18.0,
                    escape(&label)
                );
            }
        }
        for (v, label) in ya.ticks() {
            if let Some(py) = ya.map(v).filter(|p| *p <= y0 + 0.5 && *p >= y1 - 0.5) {
                let _ = writeln!(
                    s,
                    r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="black"/><line x1="{x0}" y1="{py:.1}" x2="{x1}" y2="{py:.1}" stroke="#e0e0e0"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                    x0 - 5.0,
                    x0 - 8.0,
                    py + 4.0,
                    escape(&label)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );

        for h in &self.hlines {
            if let Some(py) = ya.map(h.y) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x0}" y1="{py:.1}" x2="{x1}" y2="{py:.1}" stroke="black" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
                    x1 - 4.0,
                    py - 4.0,
                    escape(&h.label)
                );
            }
        }

        for series in &self.series {
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| (!self.x_log || *x > 0.0) && (!self.y_log || *y > 0.0))
                .filter_map(|(x, y)| Some(format!("{:.1},{:.1}", xa.map(*x)?, ya.map(*y)?)))
                .collect();
            if pts.is_empty() {
                continue;
            }
            let dash = if series.dashed {
                r#" stroke-dasharray="4 3""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                color(series.color),
                pts.join(" ")
            );
        }

        let w = self.box_half_width.max(2.0);
        for b in &self.boxes {
            let (Some(px), Some(lo), Some(q1), Some(md), Some(q3), Some(hi)) = (
                xa.map(b.x),
                ya.map(b.lo),
                ya.map(b.q1),
                ya.map(b.median),
                ya.map(b.q3),
                ya.map(b.hi),
            ) else {
                continue;
            };
            let c = color(b.color);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.1}" y1="{lo:.1}" x2="{px:.1}" y2="{hi:.1}" stroke="{c}"/><rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{c}" fill-opacity="0.25" stroke="{c}"/><line x1="{:.1}" y1="{md:.1}" x2="{:.1}" y2="{md:.1}" stroke="{c}" stroke-width="2.5"/>"#,
                px - w,
                q3.min(q1),
                2.0 * w,
                (q1 - q3).abs(),
                px - w,
                px + w
            );
        }

        let mut legend: Vec<(String, usize, bool)> = self
            .series
            .iter()
            .map(|s| (s.label.clone(), s.color, s.dashed))
            .collect();
        legend.extend(self.legend.iter().map(|(l, c)| (l.clone(), *c, false)));
        for (i, (label, c, dashed)) in legend.iter().enumerate() {
            let y = TOP + 10.0 + 16.0 * i as f64;
            let dash = if *dashed { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
                x1 + 12.0,
                x1 + 32.0,
                color(*c),
                x1 + 36.0,
                y + 4.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
