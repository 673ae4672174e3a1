//! Deterministic SVG rendering of a curve, its inscribed squares, the unit
//! circle and optionally the square-base locus.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write;

use squarepeg::{locus, Curve, Point, Square};

const CURVE_SAMPLES: usize = 2048;
const LOCUS_SAMPLES: usize = 401;
const PIXELS: f64 = 800.0;
const MARGIN: f64 = 0.15;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Scene<'a> {
    pub curve: &'a Curve,
    pub squares: &'a [Square],
    pub locus: bool,
}

/// Fixed-precision coordinate, with the y axis flipped for SVG.
fn coord(p: Point) -> String {
    format!("{:.6},{:.6}", p.x, -p.y)
}

/// Curve samples with every joint inserted, so corners stay sharp.
fn curve_points(curve: &Curve) -> Vec<Point> {
    let mut ts: Vec<f64> = (0..CURVE_SAMPLES)
        .map(|i| i as f64 / CURVE_SAMPLES as f64)
        .chain(curve.joints().iter().map(|j| j.t))
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ts.into_iter().map(|t| curve.eval(t)).collect()
}

fn locus_points() -> Vec<Point> {
    (0..LOCUS_SAMPLES)
        .map(|i| {
            let x = -FRAC_1_SQRT_2 + 2.0 * FRAC_1_SQRT_2 * i as f64 / (LOCUS_SAMPLES - 1) as f64;
            let x = x.clamp(-FRAC_1_SQRT_2, FRAC_1_SQRT_2);
            Point::new(x, locus(x).expect("x is inside the locus domain"))
        })
        .collect()
}

pub fn render(scene: &Scene) -> String {
    let curve_pts = curve_points(scene.curve);
    let locus_pts = if scene.locus { locus_points() } else { Vec::new() };

    let (mut lo, mut hi) = (Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
    let all = curve_pts
        .iter()
        .chain(&locus_pts)
        .chain(scene.squares.iter().flat_map(|s| s.vertices.iter()));
    for p in all {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = MARGIN * (hi.x - lo.x).max(hi.y - lo.y);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let stroke = 0.004 * w.max(h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="{:.0}" height="{:.0}">"#,
        lo.x - pad,
        -hi.y - pad,
        w,
        h,
        PIXELS,
        PIXELS * h / w
    );
    let _ = writeln!(out, "<title>{}</title>", escape(scene.curve.name()));
    let _ = writeln!(
        out,
        r##"<circle cx="0" cy="0" r="1" fill="none" stroke="#999999" stroke-opacity="0.35" stroke-dasharray="{:.6}" stroke-width="{:.6}"/>"##,
        4.0 * stroke,
        stroke
    );

    let mut d = String::new();
    for (i, p) in curve_pts.iter().enumerate() {
        let _ = write!(d, "{}{} ", if i == 0 { "M" } else { "L" }, coord(*p));
    }
    d.push('Z');
    let _ = writeln!(
        out,
        r##"<path d="{d}" fill="none" stroke="#000000" stroke-width="{:.6}" stroke-linejoin="round"/>"##,
        1.5 * stroke
    );

    if !locus_pts.is_empty() {
        let pts: Vec<String> = locus_pts.iter().map(|p| coord(*p)).collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#7f7f7f" stroke-dasharray="{:.6}" stroke-width="{:.6}"/>"##,
            pts.join(" "),
            2.0 * stroke,
            stroke
        );
    }

    for (i, sq) in scene.squares.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = sq.vertices.iter().map(|p| coord(*p)).collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.12" stroke="{color}" stroke-width="{:.6}"/>"#,
            pts.join(" "),
            stroke
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
