//! Minimal self-contained SVG charts.
//!
//! Charts only place the numbers they are handed. Every printed number is a
//! `<text class="value">` element carrying the exact value in `data-value`,
//! so the plots can be checked against the JSON they were drawn from.

use std::fmt::Write;

use tunelab_core::metrics::FiveNumber;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Printed form of a value label.
pub fn label(v: f64) -> String {
    format!("{v:.6}")
}

struct Canvas {
    body: String,
    lo: f64,
    hi: f64,
}

impl Canvas {
    fn new(title: &str, lo: f64, hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        };
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = writeln!(
            body,
            r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        Self { body, lo, hi }
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        TOP + h * (self.hi - v) / (self.hi - self.lo)
    }

    fn value(&mut self, x: f64, y: f64, anchor: &str, v: f64) {
        let _ = writeln!(
            self.body,
            r#"<text class="value" data-value="{v:?}" x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            label(v)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn bounds<'a>(values: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

pub struct Series<'a> {
    pub label: String,
    pub points: &'a [f64],
}

/// Curves over iterations `0 ..= len - 1`. Each curve is labelled with its
/// first and last value.
pub fn line_chart(title: &str, series: &[Series<'_>]) -> String {
    let (lo, hi) = bounds(series.iter().flat_map(|s| s.points.iter()));
    let mut c = Canvas::new(title, lo, hi);
    let plot_w = WIDTH - LEFT - RIGHT;
    let longest = series
        .iter()
        .map(|s| s.points.len())
        .max()
        .unwrap_or(1)
        .max(2);
    let x = |i: usize| LEFT + plot_w * i as f64 / (longest - 1) as f64;
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i), c.y(v)))
            .collect();
        let _ = writeln!(
            c.body,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        if let (Some(&first), Some(&last)) = (s.points.first(), s.points.last()) {
            let y0 = c.y(first) - 4.0;
            c.value(x(0) + 4.0, y0, "start", first);
            let y1 = c.y(last) - 4.0 - 12.0 * k as f64;
            c.value(x(s.points.len() - 1) - 4.0, y1, "end", last);
        }
        let ly = HEIGHT - BOTTOM + 38.0 + 14.0 * (k / 4) as f64;
        let lx = LEFT + 150.0 * (k % 4) as f64;
        let _ = writeln!(
            c.body,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="3"/>"#,
            ly - 4.0,
            lx + 16.0,
            ly - 4.0
        );
        c.text(lx + 20.0, ly, "start", &s.label);
    }
    c.text(LEFT, HEIGHT - BOTTOM + 16.0, "middle", "0");
    c.text(
        LEFT + plot_w,
        HEIGHT - BOTTOM + 16.0,
        "middle",
        &(longest - 1).to_string(),
    );
    c.text(
        LEFT + plot_w / 2.0,
        HEIGHT - BOTTOM + 16.0,
        "middle",
        "iteration",
    );
    c.finish()
}

/// One box per entry: whiskers at min/max, box from q25 to q75, median line.
pub fn box_plot(title: &str, boxes: &[(String, FiveNumber)]) -> String {
    let (lo, hi) = bounds(boxes.iter().flat_map(|(_, f)| [&f.min, &f.max]));
    let mut c = Canvas::new(title, lo, hi);
    let slot = (WIDTH - LEFT - RIGHT) / boxes.len().max(1) as f64;
    let half = (slot * 0.25).min(40.0);
    for (k, (name, f)) in boxes.iter().enumerate() {
        let cx = LEFT + slot * (k as f64 + 0.5);
        let colour = PALETTE[k % PALETTE.len()];
        let (ymin, y25, ymed, y75, ymax) = (
            c.y(f.min),
            c.y(f.q25),
            c.y(f.median),
            c.y(f.q75),
            c.y(f.max),
        );
        let _ = writeln!(
            c.body,
            r##"<line x1="{cx:.2}" y1="{ymax:.2}" x2="{cx:.2}" y2="{y75:.2}" stroke="#333"/>
<line x1="{cx:.2}" y1="{y25:.2}" x2="{cx:.2}" y2="{ymin:.2}" stroke="#333"/>
<line x1="{:.2}" y1="{ymax:.2}" x2="{:.2}" y2="{ymax:.2}" stroke="#333"/>
<line x1="{:.2}" y1="{ymin:.2}" x2="{:.2}" y2="{ymin:.2}" stroke="#333"/>
<rect x="{:.2}" y="{y75:.2}" width="{:.2}" height="{:.2}" fill="{colour}" fill-opacity="0.35" stroke="{colour}"/>
<line x1="{:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="{colour}" stroke-width="2"/>"##,
            cx - half / 2.0,
            cx + half / 2.0,
            cx - half / 2.0,
            cx + half / 2.0,
            cx - half,
            2.0 * half,
            (y25 - y75).max(0.0),
            cx - half,
            cx + half,
        );
        let lx = cx + half + 4.0;
        for (v, y) in [
            (f.max, ymax),
            (f.q75, y75),
            (f.median, ymed),
            (f.q25, y25),
            (f.min, ymin),
        ] {
            c.value(lx, y + 4.0, "start", v);
        }
        c.text(
            cx,
            HEIGHT - BOTTOM + 16.0 + 12.0 * (k % 2) as f64,
            "middle",
            name,
        );
    }
    c.finish()
}

/// Vertical bars from zero, each labelled with its value.
pub fn bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let (lo, hi) = bounds(bars.iter().map(|(_, v)| v));
    let mut c = Canvas::new(title, lo.min(0.0), hi.max(0.0));
    let slot = (WIDTH - LEFT - RIGHT) / bars.len().max(1) as f64;
    let zero = c.y(0.0);
    for (k, (name, v)) in bars.iter().enumerate() {
        let x = LEFT + slot * k as f64 + slot * 0.2;
        let y = c.y(*v);
        let _ = writeln!(
            c.body,
            r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            y.min(zero),
            slot * 0.6,
            (zero - y).abs(),
            PALETTE[k % PALETTE.len()]
        );
        c.value(x + slot * 0.3, y.min(zero) - 4.0, "middle", *v);
        c.text(
            x + slot * 0.3,
            HEIGHT - BOTTOM + 16.0 + 12.0 * (k % 2) as f64,
            "middle",
            name,
        );
    }
    c.finish()
}
