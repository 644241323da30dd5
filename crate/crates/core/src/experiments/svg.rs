//! Minimal static SVG line plots: point markers per series, an optional
//! shaded ±std band, and one dashed reference curve.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    /// Half-width of the shaded band, if any.
    pub spread: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<SeriesPoint>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Dashed reference curve, drawn as a single path.
    pub trend: Option<Series>,
    /// Draw `y ± spread` as a translucent band.
    pub band: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn frame(series: &[Series], style: &PlotStyle) -> Result<Frame> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series.iter().chain(style.trend.iter()) {
        for p in &s.points {
            if p.x.is_finite() && p.y.is_finite() {
                xs.push(p.x);
                let spread = if style.band { p.spread.unwrap_or(0.0) } else { 0.0 };
                ys.push(p.y - spread);
                ys.push(p.y + spread);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::InvalidConfig("nothing finite to plot".into()));
    }
    let (mut x0, mut x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if x0 == x1 {
        if xs.len() > 1 {
            return Err(Error::DegenerateAxis);
        }
        // Lone point: centre it.
        x0 -= 0.5;
        x1 += 0.5;
    }
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    y0 = y0.min(0.0);
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let xpad = 0.03 * (x1 - x0);
    Ok(Frame { x0: x0 - xpad, x1: x1 + xpad, y0, y1: y1 + pad })
}

pub fn render_svg_string(series: &[Series], style: &PlotStyle) -> Result<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::InvalidConfig("render_svg needs a nonempty series".into()));
    }
    let f = frame(series, style)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&style.title));

    // Axes and ticks.
    let (ax0, ax1, ay0, ay1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(out, r#"<line x1="{ax0}" y1="{ay0}" x2="{ax1}" y2="{ay0}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{ax0}" y1="{ay0}" x2="{ax0}" y2="{ay1}" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{ay0}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, ay0 + 5.0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#, ay0 + 18.0);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{ax0}" y2="{py:.2}" stroke="black"/>"#, ax0 - 5.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#, ax0 - 8.0, py + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (ax0 + ax1) / 2.0, H - 12.0, escape(&style.x_label));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0,
        escape(&style.y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<&SeriesPoint> = s.points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()).collect();
        if style.band && pts.iter().any(|p| p.spread.is_some()) && pts.len() > 1 {
            let mut poly = String::new();
            for p in &pts {
                let _ = write!(poly, "{:.2},{:.2} ", f.px(p.x), f.py(p.y + p.spread.unwrap_or(0.0)));
            }
            for p in pts.iter().rev() {
                let _ = write!(poly, "{:.2},{:.2} ", f.px(p.x), f.py(p.y - p.spread.unwrap_or(0.0)));
            }
            let _ = writeln!(out, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, poly.trim_end());
        }
        if pts.len() > 1 {
            let line: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", f.px(p.x), f.py(p.y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        }
        for p in &pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, f.px(p.x), f.py(p.y));
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{ly:.2}" r="3.5" fill="{color}"/>"#, W - RIGHT + 15.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, W - RIGHT + 25.0, ly + 4.0, escape(&s.label));
    }

    if let Some(trend) = &style.trend {
        let pts: Vec<String> = trend
            .points
            .iter()
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .enumerate()
            .map(|(i, p)| format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, f.px(p.x), f.py(p.y)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="black" stroke-dasharray="6,4"/>"#, pts.join(" "));
            let ly = TOP + 10.0 + 18.0 * series.len() as f64;
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">- - {}</text>"#, W - RIGHT + 10.0, ly + 4.0, escape(&trend.label));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(series: &[Series], path: &Path, style: &PlotStyle) -> Result<()> {
    std::fs::write(path, render_svg_string(series, style)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> SeriesPoint {
        SeriesPoint { x, y, spread: Some(0.1) }
    }

    #[test]
    fn single_point_has_one_marker() {
        let s = vec![Series { label: "a".into(), points: vec![pt(1.0, 2.0)] }];
        let svg = render_svg_string(&s, &PlotStyle::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2); // marker + legend swatch
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn one_dashed_path_with_trend() {
        let s = vec![
            Series { label: "a<b".into(), points: vec![pt(1.0, 2.0), pt(2.0, 1.0)] },
            Series { label: "c".into(), points: vec![pt(1.0, 1.5), pt(2.0, 0.5)] },
        ];
        let style = PlotStyle {
            trend: Some(Series { label: "rate".into(), points: vec![pt(1.0, 1.0), pt(2.0, 0.5)] }),
            band: true,
            ..Default::default()
        };
        let svg = render_svg_string(&s, &style).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let dashed = doc.descendants().filter(|n| n.attribute("stroke-dasharray").is_some()).count();
        assert_eq!(dashed, 1);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polygon")).count(), 2);
    }

    #[test]
    fn equal_x_is_degenerate() {
        let s = vec![Series { label: "a".into(), points: vec![pt(1.0, 2.0), pt(1.0, 3.0)] }];
        assert!(matches!(render_svg_string(&s, &PlotStyle::default()), Err(Error::DegenerateAxis)));
        assert!(render_svg_string(&[], &PlotStyle::default()).is_err());
    }
}
