//! Minimal self-contained SVG charts: linear and log axes, line series,
//! confidence whiskers, and labeled vertical markers. Output is plain text.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const ML: f64 = 76.0;
const MR: f64 = 26.0;
const MT: f64 = 44.0;
const MB: f64 = 58.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.to_string(),
            points,
            dashed: false,
            markers: false,
        }
    }

    pub fn dashed(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series {
            dashed: true,
            ..Series::line(label, points)
        }
    }

    pub fn dots(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series {
            markers: true,
            ..Series::line(label, points)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Whisker {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub vlines: Vec<(f64, String)>,
    pub whiskers: Vec<Whisker>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.0e}");
    }
    let s = format!("{v:.4}");
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Tick positions for a linear axis: steps of 1, 2, or 5 times a power of ten.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + step * 1e-9 {
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

/// Decade ticks for a log axis; values are base-10 exponents.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let first = lo.ceil() as i64;
    let last = hi.floor() as i64;
    if last < first {
        return vec![lo, hi];
    }
    let stride = (((last - first) as usize / 8) + 1) as i64;
    (first..=last)
        .step_by(stride as usize)
        .map(|e| e as f64)
        .collect()
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn coord(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        Some((t - self.lo) / (self.hi - self.lo))
    }
}

fn build_axis(values: impl Iterator<Item = f64>, log: bool) -> Axis {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if !v.is_finite() || (log && v <= 0.0) {
            continue;
        }
        let t = if log { v.log10() } else { v };
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if lo > hi {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        let pad = if log { 0.5 } else { 0.5 * lo.abs().max(1.0) };
        lo -= pad;
        hi += pad;
    } else if !log {
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    } else {
        let pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    Axis { lo, hi, log }
}

impl Chart {
    /// Renders the chart, or `None` when no series has a drawable point.
    pub fn to_svg(&self) -> Option<String> {
        let drawable = |p: &(f64, f64)| {
            p.0.is_finite()
                && p.1.is_finite()
                && (!self.log_x || p.0 > 0.0)
                && (!self.log_y || p.1 > 0.0)
        };
        if !self.series.iter().any(|s| s.points.iter().any(drawable)) {
            return None;
        }

        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter(|p| drawable(p)).map(|p| p.0))
            .chain(self.vlines.iter().map(|v| v.0))
            .chain(self.whiskers.iter().map(|w| w.x));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter(|p| drawable(p)).map(|p| p.1))
            .chain(self.whiskers.iter().flat_map(|w| [w.lo, w.hi]));
        let ax = build_axis(xs, self.log_x);
        let ay = build_axis(ys, self.log_y);

        let pw = WIDTH - ML - MR;
        let ph = HEIGHT - MT - MB;
        let px = |v: f64| ax.coord(v).map(|t| ML + t * pw);
        let py = |v: f64| ay.coord(v).map(|t| MT + (1.0 - t) * ph);

        let mut out = String::with_capacity(8192);
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
        ));
        out.push_str(&format!(
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            esc(&self.title)
        ));

        // gridlines and ticks
        let xticks = if ax.log {
            log_ticks(ax.lo, ax.hi)
        } else {
            linear_ticks(ax.lo, ax.hi)
        };
        for t in &xticks {
            let v = if ax.log { 10f64.powf(*t) } else { *t };
            if let Some(x) = px(v) {
                out.push_str(&format!(
                    "<line x1=\"{x:.2}\" y1=\"{MT}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>\n",
                    MT + ph
                ));
                let lbl = if ax.log {
                    format!("1e{}", *t as i64)
                } else {
                    fmt_tick(v)
                };
                out.push_str(&format!(
                    "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
                    MT + ph + 18.0,
                    lbl
                ));
            }
        }
        let yticks = if ay.log {
            log_ticks(ay.lo, ay.hi)
        } else {
            linear_ticks(ay.lo, ay.hi)
        };
        for t in &yticks {
            let v = if ay.log { 10f64.powf(*t) } else { *t };
            if let Some(y) = py(v) {
                out.push_str(&format!(
                    "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n",
                    ML + pw
                ));
                let lbl = if ay.log {
                    format!("1e{}", *t as i64)
                } else {
                    fmt_tick(v)
                };
                out.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
                    ML - 8.0,
                    y + 4.0,
                    lbl
                ));
            }
        }
        out.push_str(&format!(
            "<rect x=\"{ML}\" y=\"{MT}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#444\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            ML + pw / 2.0,
            HEIGHT - 14.0,
            esc(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
            MT + ph / 2.0,
            MT + ph / 2.0,
            esc(&self.y_label)
        ));

        // vertical markers sit under the data
        for (v, label) in &self.vlines {
            if let Some(x) = px(*v) {
                out.push_str(&format!(
                    "<line x1=\"{x:.2}\" y1=\"{MT}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                     stroke=\"#555\" stroke-dasharray=\"2 3\"/>\n",
                    MT + ph
                ));
                out.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#555\">{}</text>\n",
                    x + 5.0,
                    MT + 14.0,
                    esc(label)
                ));
            }
        }

        for w in &self.whiskers {
            let (Some(x), Some(ylo), Some(yhi)) = (px(w.x), py(w.lo), py(w.hi)) else {
                continue;
            };
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{ylo:.2}\" x2=\"{x:.2}\" y2=\"{yhi:.2}\" stroke=\"#888\"/>\n"
            ));
            for y in [ylo, yhi] {
                out.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#888\"/>\n",
                    x - 4.0,
                    x + 4.0
                ));
            }
        }

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|p| drawable(p))
                .filter_map(|p| Some((px(p.0)?, py(p.1)?)))
                .collect();
            if pts.is_empty() {
                continue;
            }
            if pts.len() > 1 {
                let path: Vec<String> =
                    pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let dash = if s.dashed {
                    " stroke-dasharray=\"6 4\""
                } else {
                    ""
                };
                out.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
                    path.join(" ")
                ));
            }
            if s.markers || pts.len() == 1 {
                for (x, y) in &pts {
                    out.push_str(&format!(
                        "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>\n"
                    ));
                }
            }
        }

        // legend, top-right corner of the plot area
        let mut ly = MT + 16.0;
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let x0 = ML + pw - 190.0;
            let dash = if s.dashed {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            out.push_str(&format!(
                "<line x1=\"{x0:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
                x0 + 26.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
                x0 + 32.0,
                ly + 4.0,
                esc(&s.label)
            ));
            ly += 17.0;
        }

        out.push_str("</svg>\n");
        Some(out)
    }
}
