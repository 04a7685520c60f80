//! Minimal standalone SVG line and bar plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 120.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Evenly spaced tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count)
        .map(|i| lo + (hi - lo) * i as f64 / count as f64)
        .collect()
}

fn frame(s: &mut String, title: &str) {
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>
"#,
        (WIDTH - MARGIN_R + MARGIN_L) / 2.0,
        escape(title)
    );
}

fn axes(s: &mut String, x_ticks: &[(f64, String)], y_ticks: &[(f64, String)]) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" points="{x0},{y1} {x0},{y0} {x1},{y0}"/>"#
    );
    for (px, label) in x_ticks {
        let _ = writeln!(
            s,
            r#"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            y0 + 4.0,
            y0 + 16.0,
            escape(label)
        );
    }
    for (py, label) in y_ticks {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            py + 3.0,
            escape(label)
        );
    }
}

fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Line plot of equal-rate series against time in seconds.
pub fn line_plot(title: &str, fs: f64, series: &[(&str, &[f64])]) -> String {
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(2);
    let t_max = (n - 1) as f64 / fs;
    let (lo, hi) = y_range(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let px = |t: f64| MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) * t / t_max;
    let py = |v: f64| HEIGHT - MARGIN_B - (HEIGHT - MARGIN_T - MARGIN_B) * (v - lo) / (hi - lo);

    let mut s = String::new();
    frame(&mut s, title);
    let xt: Vec<(f64, String)> = ticks(0.0, t_max, 5)
        .into_iter()
        .map(|t| (px(t), format!("{t:.2} s")))
        .collect();
    let yt: Vec<(f64, String)> = ticks(lo, hi, 4)
        .into_iter()
        .map(|v| (py(v), format!("{v:.3}")))
        .collect();
    axes(&mut s, &xt, &yt);
    for (k, (name, values)) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i as f64 / fs), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_T + 16.0 * k as f64 + 10.0;
        let lx = WIDTH - MARGIN_R + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 16.0,
            lx + 20.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Vertical bar chart with a zero baseline.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(&str, f64)]) -> String {
    let (lo, hi) = y_range(bars.iter().map(|b| b.1).chain([0.0]));
    let py = |v: f64| HEIGHT - MARGIN_B - (HEIGHT - MARGIN_T - MARGIN_B) * (v - lo) / (hi - lo);
    let slot = (WIDTH - MARGIN_L - MARGIN_R) / bars.len().max(1) as f64;

    let mut s = String::new();
    frame(&mut s, title);
    let xt: Vec<(f64, String)> = bars
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (MARGIN_L + slot * (i as f64 + 0.5), name.to_string()))
        .collect();
    let yt: Vec<(f64, String)> = ticks(lo, hi, 4)
        .into_iter()
        .map(|v| (py(v), format!("{v:.1}")))
        .collect();
    axes(&mut s, &xt, &yt);
    let base = py(0.0);
    for (i, (_, v)) in bars.iter().enumerate() {
        let top = py(*v);
        let x = MARGIN_L + slot * (i as f64 + 0.2);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            top.min(base),
            slot * 0.6,
            (top - base).abs(),
            COLOURS[i % COLOURS.len()]
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_L}" y1="{base:.1}" x2="{}" y2="{base:.1}" stroke="grey" stroke-dasharray="4 2"/>"#,
        WIDTH - MARGIN_R
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {:.1})" text-anchor="middle">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    s.push_str("</svg>\n");
    s
}
