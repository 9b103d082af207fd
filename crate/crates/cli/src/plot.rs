//! Cumulative-P&L line charts as plain SVG. Output depends only on the data.

use std::fmt::Write;

use chrono::NaiveDate;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 15.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;

/// One titled chart of cumulative P&L in dollars against date.
pub struct Panel<'a> {
    pub title: String,
    pub dates: &'a [NaiveDate],
    pub pnl: &'a [f64],
}

fn cumulative(pnl: &[f64]) -> Vec<f64> {
    pnl.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Round step of roughly `span / 4`.
fn tick_step(span: f64) -> f64 {
    if span.is_nan() || span <= 0.0 {
        return 1.0;
    }
    let raw = span / 4.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    mag * if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn dollars(x: f64) -> String {
    let a = x.abs();
    if a >= 1e6 {
        format!("{:.1}M", x / 1e6)
    } else if a >= 1e3 {
        format!("{:.0}k", x / 1e3)
    } else {
        format!("{x:.0}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn draw_panel(svg: &mut String, x0: f64, y0: f64, panel: Option<&Panel>) {
    let (pw, ph) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
    let (left, top) = (x0 + MARGIN_L, y0 + MARGIN_T);
    let Some(panel) = panel else {
        return;
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        y0 + 18.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#444"/>"##
    );
    let cum = cumulative(panel.pnl);
    if cum.is_empty() {
        return;
    }
    let lo = cum.iter().copied().fold(0.0f64, f64::min);
    let hi = cum.iter().copied().fold(0.0f64, f64::max);
    let step = tick_step(hi - lo);
    let (lo, hi) = ((lo / step).floor() * step, (hi / step).ceil() * step);
    let hi = if hi > lo { hi } else { lo + step };
    let n = cum.len();
    let sx = |k: usize| {
        left + if n > 1 {
            pw * k as f64 / (n - 1) as f64
        } else {
            pw / 2.0
        }
    };
    let sy = |v: f64| top + ph * (hi - v) / (hi - lo);

    let mut v = lo;
    while v <= hi + step * 1e-9 {
        let y = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"##,
            left + pw,
            left - 4.0,
            y + 3.0,
            dollars(v)
        );
        v += step;
    }
    for k in [0, n / 2, n - 1] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            sx(k),
            top + ph + 14.0,
            panel.dates[k].format("%Y-%m-%d")
        );
    }
    let mut points = String::new();
    for (k, c) in cum.iter().enumerate() {
        let _ = write!(points, "{:.2},{:.2} ", sx(k), sy(*c));
    }
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.2" points="{}"/>"##,
        points.trim_end()
    );
}

/// A `rows × cols` grid filled left to right, then top to bottom. Missing
/// trailing panels stay blank.
pub fn render_grid(title: &str, panels: &[Option<Panel>], rows: usize, cols: usize) -> String {
    let head = if title.is_empty() { 0.0 } else { 30.0 };
    let (w, h) = (PANEL_W * cols as f64, PANEL_H * rows as f64 + head);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if head > 0.0 {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="16">{}</text>"#,
            w / 2.0,
            escape(title)
        );
    }
    for r in 0..rows {
        for c in 0..cols {
            let panel = panels.get(r * cols + c).and_then(Option::as_ref);
            draw_panel(
                &mut svg,
                PANEL_W * c as f64,
                head + PANEL_H * r as f64,
                panel,
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn render_single(panel: &Panel) -> String {
    render_grid(
        "",
        &[Some(Panel {
            title: panel.title.clone(),
            ..*panel
        })],
        1,
        1,
    )
}
