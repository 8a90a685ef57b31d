//! Minimal deterministic SVG charts.
//!
//! Coordinates are printed with a fixed number of decimals, so the same
//! data always renders to the same bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = if self.x1 > self.x0 { self.x1 - self.x0 } else { 1.0 };
        LEFT + (x - self.x0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let span = if self.y1 > self.y0 { self.y1 - self.y0 } else { 1.0 };
        HEIGHT - BOTTOM - (y - self.y0) / span * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        WIDTH / 2.0,
        escape(title),
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label),
    );
}

fn axes(out: &mut String, frame: &Frame, y_tick: impl Fn(f64) -> String) {
    let _ = writeln!(
        out,
        "<line x1=\"{LEFT}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{b:.1}\" stroke=\"black\"/>",
        b = HEIGHT - BOTTOM,
        r = WIDTH - RIGHT,
    );
    for i in 0..=4 {
        let y = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 4.0;
        let py = frame.py(y);
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{LEFT}\" y2=\"{py:.1}\" stroke=\"black\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 4.0,
            LEFT - 6.0,
            py + 4.0,
            y_tick(y),
        );
    }
}

fn x_ticks(out: &mut String, frame: &Frame) {
    for i in 0..=4 {
        let x = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 4.0;
        let px = frame.px(x);
        let _ = writeln!(
            out,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            HEIGHT - BOTTOM + 16.0,
            tick(x),
        );
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            WIDTH - RIGHT + 12.0,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            WIDTH - RIGHT + 30.0,
            y,
            escape(name),
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line chart; with `log_y` the values are plotted as `log10(y)` and
/// non-positive points are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let transform = |y: f64| if log_y { y.log10() } else { y };
    let keep = |y: f64| !log_y || y > 0.0;
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(
        series
            .iter()
            .flat_map(|s| s.points.iter().filter(|p| keep(p.1)).map(|p| transform(p.1))),
    );
    let frame = Frame { x0, x1, y0, y1 };
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    axes(&mut out, &frame, |y| if log_y { tick(10f64.powf(y)) } else { tick(y) });
    x_ticks(&mut out, &frame);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| keep(p.1) && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(transform(y))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            PALETTE[i % PALETTE.len()],
            pts.join(" "),
        );
    }
    legend(&mut out, &series.iter().map(|s| s.name).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One box (min, quartiles, max) per group; `color` indexes the palette.
pub struct BoxGroup<'a> {
    pub label: String,
    pub color: usize,
    pub values: &'a [f64],
}

pub fn box_chart(title: &str, y_label: &str, groups: &[BoxGroup], legend_names: &[&str]) -> String {
    let (y0, y1) = bounds(groups.iter().flat_map(|g| g.values.iter().copied()));
    let pad = (y1 - y0) * 0.05;
    let frame = Frame {
        x0: 0.0,
        x1: groups.len().max(1) as f64,
        y0: y0 - pad,
        y1: y1 + pad,
    };
    let mut out = String::new();
    header(&mut out, title, "", y_label);
    axes(&mut out, &frame, tick);
    let slot = frame.px(1.0) - frame.px(0.0);
    for (i, g) in groups.iter().enumerate() {
        if g.values.is_empty() {
            continue;
        }
        let mut v = g.values.to_vec();
        v.sort_by(f64::total_cmp);
        let [lo, q1, med, q3, hi] = [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| frame.py(quantile(&v, q)));
        let cx = frame.px(i as f64 + 0.5);
        let w = slot * 0.3;
        let color = PALETTE[g.color % PALETTE.len()];
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.2}\" y1=\"{lo:.2}\" x2=\"{cx:.2}\" y2=\"{hi:.2}\" stroke=\"{color}\"/>\n\
<rect x=\"{:.2}\" y=\"{q3:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\" fill-opacity=\"0.3\" stroke=\"{color}\"/>\n\
<line x1=\"{:.2}\" y1=\"{med:.2}\" x2=\"{:.2}\" y2=\"{med:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
<text x=\"{cx:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            cx - w,
            2.0 * w,
            (q1 - q3).max(0.5),
            cx - w,
            cx + w,
            HEIGHT - BOTTOM + 16.0,
            escape(&g.label),
        );
    }
    legend(&mut out, legend_names);
    out.push_str("</svg>\n");
    out
}

pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let top = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let frame = Frame {
        x0: 0.0,
        x1: bars.len().max(1) as f64,
        y0: 0.0,
        y1: if top > 0.0 { top * 1.1 } else { 1.0 },
    };
    let mut out = String::new();
    header(&mut out, title, "", y_label);
    axes(&mut out, &frame, tick);
    let slot = frame.px(1.0) - frame.px(0.0);
    for (i, (label, v)) in bars.iter().enumerate() {
        let cx = frame.px(i as f64 + 0.5);
        let y = frame.py(*v);
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n<text x=\"{cx:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n<text x=\"{cx:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            cx - slot * 0.3,
            slot * 0.6,
            (HEIGHT - BOTTOM - y).max(0.0),
            PALETTE[i % PALETTE.len()],
            HEIGHT - BOTTOM + 16.0,
            escape(label),
            y - 4.0,
            tick(*v),
        );
    }
    out.push_str("</svg>\n");
    out
}
