//! Minimal static SVG charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD_L: f64 = 60.0;
const PAD_R: f64 = 20.0;
const PAD_T: f64 = 40.0;
const PAD_B: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        escape(title)
    );
    let (x0, y0, x1) = (PAD_L, H - PAD_B, W - PAD_R);
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{PAD_T}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        (PAD_T + y0) / 2.0,
        (PAD_T + y0) / 2.0,
        escape(y_label)
    );
}

fn tick(out: &mut String, x: f64, label: &str) {
    let y0 = H - PAD_B;
    let _ = writeln!(
        out,
        "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>",
        y0 + 5.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
        y0 + 18.0,
        escape(label)
    );
}

fn y_ticks(out: &mut String, y_max: f64, fmt: impl Fn(f64) -> String) {
    let y0 = H - PAD_B;
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let y = y0 - (y0 - PAD_T) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{PAD_L}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            PAD_L - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            PAD_L - 8.0,
            y + 4.0,
            fmt(v)
        );
    }
}

/// Bar chart over contiguous bins given by `edges`, with labelled x ticks.
pub fn bar_chart(title: &str, x_label: &str, edges: &[f64], heights: &[f64], ticks: &[(f64, &str)]) -> String {
    let mut out = String::new();
    frame(&mut out, title, x_label, "mass");
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let y_max = heights.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let sx = |x: f64| PAD_L + (x - lo) / (hi - lo) * (W - PAD_L - PAD_R);
    let sy = |y: f64| (H - PAD_B) - y / y_max * (H - PAD_B - PAD_T);
    y_ticks(&mut out, y_max, |v| format!("{v:.3}"));
    for (w, h) in edges.windows(2).zip(heights) {
        if *h <= 0.0 {
            continue;
        }
        let (x, x2, y) = (sx(w[0]), sx(w[1]), sy(*h));
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"steelblue\"/>",
            (x2 - x).max(0.5),
            (H - PAD_B) - y
        );
    }
    for (x, label) in ticks {
        tick(&mut out, sx(*x), label);
    }
    out.push_str("</svg>\n");
    out
}

/// Polyline through `(x, y)` points with a logarithmic x axis.
pub fn log_x_line_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label);
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let (lo, hi) = lx
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let y_max = points.iter().map(|p| p.1).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let sx = |x: f64| PAD_L + (x - lo) / (hi - lo) * (W - PAD_L - PAD_R);
    let sy = |y: f64| (H - PAD_B) - y / y_max * (H - PAD_B - PAD_T);
    y_ticks(&mut out, y_max, |v| format!("{v:.3}"));
    let path: Vec<String> = lx
        .iter()
        .zip(points)
        .map(|(x, p)| format!("{:.2},{:.2}", sx(*x), sy(p.1)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"2\"/>",
        path.join(" ")
    );
    for (x, p) in lx.iter().zip(points) {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"firebrick\"/>",
            sx(*x),
            sy(p.1)
        );
        tick(&mut out, sx(*x), &format!("{:.0e}", p.0));
    }
    out.push_str("</svg>\n");
    out
}
