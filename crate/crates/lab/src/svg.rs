//! Minimal log-log scatter plots written as SVG text.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 440.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 20.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 50.0;

pub struct LogLogPlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [(f64, f64)],
    /// Guide line `C·x^slope` with `C` the largest constant that keeps every
    /// point on or above it.
    pub reference_slope: f64,
}

fn decades(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.log10().floor();
    let mut b = hi.log10().ceil();
    if b <= a {
        b = a + 1.0;
    }
    (a, b)
}

impl LogLogPlot<'_> {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self.points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, self.title);
        if pts.is_empty() {
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no positive data</text>"#, W / 2.0, H / 2.0);
            s.push_str("</svg>\n");
            return s;
        }
        let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
        let (x0, x1) = decades(fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, 0.0, |p| p.0));
        let (y0, y1) = decades(fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, 0.0, |p| p.1));
        let (pw, ph) = (W - PAD_L - PAD_R, H - PAD_T - PAD_B);
        let px = |x: f64| PAD_L + (x.log10() - x0) / (x1 - x0) * pw;
        let py = |y: f64| PAD_T + (y1 - y.log10()) / (y1 - y0) * ph;

        let _ = writeln!(s, r##"<g stroke="#ddd">"##);
        for d in x0 as i64..=x1 as i64 {
            let x = px(10f64.powi(d as i32));
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{PAD_T}" x2="{x:.2}" y2="{:.2}"/>"#, H - PAD_B);
        }
        for d in y0 as i64..=y1 as i64 {
            let y = py(10f64.powi(d as i32));
            let _ = writeln!(s, r#"<line x1="{PAD_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, W - PAD_R);
        }
        s.push_str("</g>\n");
        for d in x0 as i64..=x1 as i64 {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, px(10f64.powi(d as i32)), H - PAD_B + 16.0);
        }
        for d in y0 as i64..=y1 as i64 {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, PAD_L - 6.0, py(10f64.powi(d as i32)) + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, PAD_L + pw / 2.0, H - 10.0, self.x_label);
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            PAD_T + ph / 2.0,
            PAD_T + ph / 2.0,
            self.y_label
        );

        let _ = writeln!(
            s,
            r#"<clipPath id="plot"><rect x="{PAD_L}" y="{PAD_T}" width="{pw:.2}" height="{ph:.2}"/></clipPath>"#
        );
        // reference line through the lowest point in the scaled sense
        let p = self.reference_slope;
        let c = pts.iter().map(|&(x, y)| y / x.powf(p)).fold(f64::INFINITY, f64::min);
        let (xa, xb) = (10f64.powf(x0), 10f64.powf(x1));
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c33" stroke-dasharray="6 4" clip-path="url(#plot)"/>"##,
            px(xa),
            py(c * xa.powf(p)),
            px(xb),
            py(c * xb.powf(p))
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#c33">slope {p}, C* = {c:.4e}</text>"##,
            W - PAD_R - 4.0,
            PAD_T + 14.0
        );
        let _ = writeln!(s, r##"<g fill="#1f5fa8" clip-path="url(#plot)">"##);
        for &(x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, px(x), py(y));
        }
        s.push_str("</g>\n");
        let _ = writeln!(
            s,
            r#"<rect x="{PAD_L}" y="{PAD_T}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_and_guide() {
        let pts: Vec<_> = (1..6).map(|i| (i as f64 * 10.0, 1.0 / (i as f64).powi(4))).collect();
        let svg = LogLogPlot { title: "t", x_label: "x", y_label: "y", points: &pts, reference_slope: -4.0 }.render();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 5);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_plot_is_valid() {
        let svg = LogLogPlot { title: "t", x_label: "x", y_label: "y", points: &[], reference_slope: 0.0 }.render();
        assert!(svg.contains("no positive data"));
    }
}
