//! Minimal SVG line charts of information curves and analytic bounds.

use std::fmt::Write;

use scramblab::io::BoundsRow;
use scramblab::scrambling::MICurve;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// One Monte Carlo curve with its legend text.
pub struct Series<'a> {
    pub label: String,
    pub curve: &'a MICurve,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, l: f64) -> f64 {
        LEFT + l / self.x_max * (W - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        H - BOTTOM - v / self.y_max * (H - TOP - BOTTOM)
    }
}

/// Renders the chart; output depends only on the inputs.
pub fn render(title: &str, series: &[Series<'_>], bounds: &[BoundsRow]) -> String {
    let n_max = series
        .iter()
        .map(|s| s.curve.n)
        .chain(bounds.iter().map(|b| b.l as usize))
        .max()
        .unwrap_or(1)
        .max(1);
    let data_max = series
        .iter()
        .flat_map(|s| s.curve.rows.iter().map(|r| r.mean_i + r.std_error))
        .fold(2.0f64, f64::max);
    let f = Frame {
        x_max: n_max as f64,
        y_max: (data_max * 1.05 * 4.0).ceil() / 4.0,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    // Axes, grid and ticks.
    let (x0, y0) = (f.x(0.0), f.y(0.0));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.1} {:.1} L{x0:.1} {y0:.1} L{:.1} {y0:.1}" stroke="black" fill="none"/>"#,
        f.y(f.y_max),
        f.x(f.x_max)
    );
    let step = (n_max as f64 / 12.0).ceil().max(1.0) as usize;
    for l in (0..=n_max).step_by(step) {
        let x = f.x(l as f64);
        let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{l}</text>"#, y0 + 20.0);
    }
    let mut v = 0.0;
    while v <= f.y_max + 1e-9 {
        let y = f.y(v);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            f.x(f.x_max)
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, x0 - 8.0, y + 4.0);
        v += 0.25;
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">subsystem size ℓ</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">I(R : P) [bits]</text>"#,
        H / 2.0,
        H / 2.0
    );

    let mut legend: Vec<(String, String, bool)> = Vec::new();
    // Bounds first so the data sits on top.
    let mut s_values: Vec<u32> = bounds.iter().map(|b| b.s).collect();
    s_values.dedup();
    for (k, s) in s_values.iter().enumerate() {
        let rows: Vec<&BoundsRow> = bounds.iter().filter(|b| b.s == *s).collect();
        let color = PALETTE[(PALETTE.len() - 1 - k) % PALETTE.len()];
        let pts: Vec<String> = rows
            .iter()
            .filter_map(|r| r.mixed_clamped.map(|m| format!("{:.1},{:.1}", f.x(r.l as f64), f.y(m))))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
                pts.join(" ")
            );
            legend.push((format!("Rényi-2 bound, s = {s}"), color.into(), true));
        }
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .curve
            .rows
            .iter()
            .map(|r| format!("{:.1},{:.1}", f.x(r.l as f64), f.y(r.mean_i)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for r in &s.curve.rows {
            let (x, y) = (f.x(r.l as f64), f.y(r.mean_i));
            if r.std_error > 0.0 {
                let _ = writeln!(
                    out,
                    r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{color}"/>"#,
                    f.y(r.mean_i - r.std_error),
                    f.y(r.mean_i + r.std_error)
                );
            }
            let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
        }
        legend.push((s.label.clone(), color.into(), false));
    }
    for (k, (label, color, dashed)) in legend.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * k as f64;
        let x = LEFT + 14.0;
        let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
            x + 24.0
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x + 30.0, y + 4.0, escape(label));
    }
    out.push_str("</svg>\n");
    out
}
