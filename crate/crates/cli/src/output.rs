//! CSV and SVG writers for sampled curves.

use std::fmt::Write as _;

use dirent::CurveSample;

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // below this, values are rounding noise such as cos(π/2)
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = SIGNIFICANT_DIGITS as i64 - 1 - magnitude;
    let mut s = if decimals >= 0 {
        let decimals = decimals as usize;
        format!("{x:.decimals$}")
    } else {
        let unit = 10f64.powi(-decimals as i32);
        format!("{:.0}", (x / unit).round() * unit)
    };
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Header `theta,entropy`, one LF-terminated row per sample, sorted by θ.
pub fn emit_csv(samples: &[CurveSample]) -> String {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut out = String::from("theta,entropy\n");
    for p in sorted {
        let _ = writeln!(out, "{},{}", format_number(p.theta), format_number(p.value));
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// A static plot: one polyline, dashed vertical markers at `markers`.
pub fn emit_svg(samples: &[CurveSample], markers: &[f64], y_label: &str) -> Result<String, CliError> {
    if samples.len() < 2 {
        return Err(CliError::Usage(format!(
            "a plot needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let x0 = sorted[0].theta;
    let x1 = sorted[sorted.len() - 1].theta;
    let x_span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let y_max = sorted.iter().map(|p| p.value).fold(0.0, f64::max);
    let y_top = if y_max > 0.0 { 1.05 * y_max } else { 1.0 };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / x_span * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - y / y_top) * plot_h;
    let bottom = MARGIN_TOP + plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}"/></g>"#,
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        t = MARGIN_TOP,
        b = bottom,
    );
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
        MARGIN_LEFT - 6.0,
        sy(y_max) + 4.0,
        format_tick(y_max)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#,
        MARGIN_LEFT - 6.0,
        bottom + 4.0
    );
    for x in [x0, x1] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(x),
            bottom + 16.0,
            format_tick(x)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">θ</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g stroke="#888888" stroke-width="1" stroke-dasharray="4 4">"##);
    for &m in markers.iter().filter(|m| (x0..=x1).contains(*m)) {
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            MARGIN_TOP,
            bottom,
            x = sx(m)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g font-family="sans-serif" font-size="10" fill="#555555">"##);
    for &m in markers.iter().filter(|m| (x0..=x1).contains(*m)) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(m),
            bottom + 30.0,
            format_tick(m)
        );
    }
    let _ = writeln!(svg, "</g>");

    let points: Vec<String> = sorted
        .iter()
        .map(|p| format!("{:.2},{:.2}", sx(p.theta), sy(p.value)))
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(x: f64) -> String {
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(theta: f64, value: f64) -> CurveSample {
        CurveSample { theta, value }
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(std::f64::consts::FRAC_PI_2.cos()), "0");
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(2f64.ln()), "0.69314718056");
        assert_eq!(format_number(1.5), "1.5");
        assert_eq!(format_number(120.0), "120");
        assert_eq!(format_number(-0.25), "-0.25");
        assert_eq!(format_number(123456789012345.0), "123456789012000");
    }

    #[test]
    fn csv_shape() {
        let ln2 = 2f64.ln();
        let csv = emit_csv(&[sample(std::f64::consts::PI, ln2), sample(0.0, ln2)]);
        assert_eq!(csv, "theta,entropy\n0,0.69314718056\n3.14159265359,0.69314718056\n");
        assert_eq!(emit_csv(&[]), "theta,entropy\n");
    }

    #[test]
    fn svg_needs_two_points() {
        assert!(emit_svg(&[sample(0.0, 1.0)], &[], "h").is_err());
    }

    #[test]
    fn svg_constant_curve_is_flat() {
        let svg = emit_svg(&[sample(0.0, 1.0), sample(1.0, 1.0)], &[0.5], "h").unwrap();
        assert!(svg.contains(r#"viewBox="0 0 800 500""#));
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let ys: Vec<&str> = points.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    }
}
