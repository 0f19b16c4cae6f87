//! Minimal static SVG line plot on log-log axes: one data series with
//! markers and an optional fitted power law drawn as a dashed line.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Points with a nonpositive coordinate are dropped.
    pub points: Vec<(f64, f64)>,
    /// `(slope, intercept)` of `log y = intercept + slope·log x`.
    pub fit: Option<(f64, f64)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    /// Log10 range padded to whole decades, or half a decade if flat.
    fn new(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Axis {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let l = v.log10();
            (lo.min(l), hi.max(l))
        });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        lo = lo.floor();
        hi = hi.ceil();
        if hi - lo < 1.0 {
            hi = lo + 1.0;
        }
        Axis { lo, hi, px_lo, px_hi }
    }

    fn px(&self, log_value: f64) -> f64 {
        self.px_lo + (log_value - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    /// Tick exponents and whether each is a full decade.
    fn ticks(&self) -> Vec<(f64, bool)> {
        let decades = (self.hi - self.lo).round() as i64;
        let minor: &[f64] = if decades <= 2 { &[2.0, 5.0] } else { &[] };
        let mut out = Vec::new();
        for d in self.lo as i64..=self.hi as i64 {
            out.push((d as f64, true));
            if d < self.hi as i64 {
                out.extend(minor.iter().map(|m| (d as f64 + m.log10(), false)));
            }
        }
        out
    }
}

fn label(log_value: f64) -> String {
    let v = 10f64.powf(log_value);
    if (-3.0..=4.0).contains(&log_value) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("1e{}", log_value.round() as i64)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LogLogPlot {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .copied()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .collect();
        let xa = Axis::new(pts.iter().map(|p| p.0), LEFT, WIDTH - RIGHT);
        let ya = Axis::new(pts.iter().map(|p| p.1), HEIGHT - BOTTOM, TOP);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        for (t, major) in xa.ticks() {
            let x = xa.px(t);
            let stroke = if major { "#cccccc" } else { "#eeeeee" };
            let _ = writeln!(
                s,
                r#"<line x1="{x:.1}" y1="{TOP:.1}" x2="{x:.1}" y2="{:.1}" stroke="{stroke}"/>"#,
                HEIGHT - BOTTOM
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                HEIGHT - BOTTOM + 18.0,
                label(t)
            );
        }
        for (t, major) in ya.ticks() {
            let y = ya.px(t);
            let stroke = if major { "#cccccc" } else { "#eeeeee" };
            let _ = writeln!(
                s,
                r#"<line x1="{LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{stroke}"/>"#,
                WIDTH - RIGHT
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            escape(&self.y_label)
        );

        if let (Some((slope, intercept)), Some(first), Some(last)) = (self.fit, pts.first(), pts.last()) {
            let (l0, l1) = (first.0.log10(), last.0.log10());
            // fit is in natural logs
            let at = |l: f64| (intercept + slope * l * std::f64::consts::LN_10) / std::f64::consts::LN_10;
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
                xa.px(l0),
                ya.px(at(l0)),
                xa.px(l1),
                ya.px(at(l1))
            );
            let _ = writeln!(
                s,
                r##"<text x="{:.1}" y="{:.1}" text-anchor="end" fill="#d62728">slope {slope:.3}</text>"##,
                WIDTH - RIGHT - 8.0,
                TOP + 18.0
            );
        }
        if !pts.is_empty() {
            let path: Vec<String> = pts
                .iter()
                .map(|(x, y)| format!("{:.1},{:.1}", xa.px(x.log10()), ya.px(y.log10())))
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
                path.join(" ")
            );
            for p in &path {
                let (x, y) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(s, r##"<circle cx="{x}" cy="{y}" r="3.5" fill="#1f77b4"/>"##);
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(points: Vec<(f64, f64)>, fit: Option<(f64, f64)>) -> LogLogPlot {
        LogLogPlot {
            title: "decay <test>".into(),
            x_label: "s".into(),
            y_label: "value".into(),
            points,
            fit,
        }
    }

    #[test]
    fn renders_series_and_fit() {
        let svg = plot(vec![(4.0, 1e-3), (8.0, 1.25e-4), (16.0, 1.6e-5)], Some((-3.0, (1e-3f64 * 64.0).ln()))).render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("stroke-dasharray") && svg.contains("slope -3.000"));
        assert!(svg.contains("decay &lt;test&gt;"));
    }

    #[test]
    fn fit_passes_through_exact_power_law() {
        let svg = plot(vec![(1.0, 1.0), (10.0, 0.01)], Some((-2.0, 0.0))).render();
        let polyline = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let fit = svg.lines().find(|l| l.contains("stroke-dasharray")).unwrap();
        let ends: Vec<&str> = polyline.split('"').nth(1).unwrap().split(' ').collect();
        let (x0, y0) = ends[0].split_once(',').unwrap();
        assert!(fit.contains(&format!(r#"x1="{x0}" y1="{y0}""#)));
    }

    #[test]
    fn drops_unplottable_points() {
        let svg = plot(vec![(1.0, 0.0), (2.0, -1.0), (f64::NAN, 1.0)], None).render();
        assert!(!svg.contains("<circle") && !svg.contains("<polyline"));
    }
}
