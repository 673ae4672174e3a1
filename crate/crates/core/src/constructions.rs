//! Factories for the circle-based curve families and the scalar searches
//! that parameterise them.
//!
//! * [`build_nonsmooth_two_square`]: the unit circle with its bottom quarter
//!   replaced by an upward semicircle, giving two corner joints.
//! * [`build_smooth_two_square`]: the same bottom quarter replaced by the
//!   graph of `-sqrt(1-x^2)` plus a flat bump of amplitude `c`.
//! * [`build_n_square`]: the right quarter `[-pi/4, pi/4]` rebuilt from
//!   outward polar bump arcs between consecutive anchor angles; each anchor
//!   (plus the quarter's endpoints, which share one square) carries exactly
//!   one inscribed square.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::curve::{Curve, CurveSpec, GraphBumpArc, PolarBumpArc, Segment, DEFAULT_SHARPNESS};
use crate::error::{Error, Result};

/// Grid size used to scan for sign changes of graph minus locus.
const LOCUS_SCAN_POINTS: usize = 100_000;
/// `|graph - locus|` below this with no sign change counts as a tangency.
const TANGENCY_THRESHOLD: f64 = 1e-9;
/// Curvature samples per arc in [`max_convex_c`].
const CONVEXITY_SAMPLES: usize = 100_000;
/// Bracket width at which both bisections stop.
const BISECTION_TOLERANCE: f64 = 1e-6;

pub fn unit_circle() -> CurveSpec {
    CurveSpec::new("unit-circle", vec![Segment::unit_arc(0.0, 2.0 * PI)])
        .with_construction(json!({ "kind": "circle" }))
}

/// Three quarters of the unit circle (from `-pi/4` counterclockwise to
/// `5pi/4`) closed by the semicircle `y = sqrt(1/2 - x^2) - 1/sqrt(2)`.
pub fn build_nonsmooth_two_square() -> CurveSpec {
    CurveSpec::new(
        "nonsmooth-two-square",
        vec![
            Segment::unit_arc(-FRAC_PI_4, 1.25 * PI),
            Segment::SemicircleArc,
        ],
    )
    .with_construction(json!({ "kind": "nonsmooth2" }))
}

/// Three quarters of the unit circle closed by the bump graph of amplitude
/// `c`.
pub fn build_smooth_two_square(c: f64) -> Result<CurveSpec> {
    build_smooth_two_square_with(c, DEFAULT_SHARPNESS)
}

pub fn build_smooth_two_square_with(c: f64, a: f64) -> Result<CurveSpec> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "bump amplitude must be finite and >= 0, got {c}"
        )));
    }
    let spec = CurveSpec::new(
        "smooth-two-square",
        vec![
            Segment::unit_arc(-FRAC_PI_4, 1.25 * PI),
            Segment::GraphBumpArc(GraphBumpArc { c, a }),
        ],
    )
    .with_construction(json!({ "kind": "smooth2", "c": c, "a": a }));
    Curve::new(spec.clone())?.check_simple()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructionParams {
    /// Strictly increasing angles inside `(-pi/4, pi/4)`.
    pub anchors: Vec<f64>,
    /// Bump amplitude shared by every arc; `None` picks half the largest
    /// amplitude that keeps every arc convex.
    pub c: Option<f64>,
    pub a: f64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        ConstructionParams {
            anchors: Vec::new(),
            c: None,
            a: DEFAULT_SHARPNESS,
        }
    }
}

impl ConstructionParams {
    /// `n - 1` anchors splitting `(-pi/4, pi/4)` into `n` equal arcs.
    pub fn evenly_spaced(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("need at least one square".into()));
        }
        let step = FRAC_PI_2 / n as f64;
        Ok(ConstructionParams {
            anchors: (1..n).map(|i| -FRAC_PI_4 + step * i as f64).collect(),
            ..Default::default()
        })
    }

    /// Number of inscribed squares the construction is built to have.
    pub fn target_count(&self) -> usize {
        self.anchors.len() + 1
    }

    /// Endpoints of the bump arcs: `-pi/4`, the anchors, `pi/4`.
    pub fn arc_bounds(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.anchors.len() + 2);
        b.push(-FRAC_PI_4);
        b.extend_from_slice(&self.anchors);
        b.push(FRAC_PI_4);
        b
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sharpness must be positive, got {}",
                self.a
            )));
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "bump amplitude must be positive, got {c}"
                )));
            }
        }
        for &p in &self.anchors {
            if !(p > -FRAC_PI_4 && p < FRAC_PI_4) {
                return Err(Error::InvalidParams(format!(
                    "anchor {p} outside (-pi/4, pi/4)"
                )));
            }
        }
        if self.anchors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "anchors must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// The amplitude actually used: the explicit one, or half the smallest
    /// per-arc convexity limit.
    pub fn resolved_c(&self) -> Result<f64> {
        if let Some(c) = self.c {
            return Ok(c);
        }
        let bounds = self.arc_bounds();
        let mut limit = f64::INFINITY;
        for w in bounds.windows(2) {
            limit = limit.min(max_convex_c(w[0], w[1], self.a)?);
        }
        Ok(0.5 * limit)
    }
}

/// Three quarters of the unit circle (from `pi/4` to `7pi/4`) followed by
/// polar bump arcs over consecutive pairs of `-pi/4, anchors.., pi/4`.
pub fn build_n_square(params: &ConstructionParams) -> Result<CurveSpec> {
    params.validate()?;
    let c = params.resolved_c()?;
    let mut segments = vec![Segment::unit_arc(FRAC_PI_4, 1.75 * PI)];
    for w in params.arc_bounds().windows(2) {
        segments.push(Segment::PolarBumpArc(PolarBumpArc {
            u: w[0],
            v: w[1],
            c,
            a: params.a,
        }));
    }
    let n = params.target_count();
    let spec = CurveSpec::new(format!("{n}-square"), segments).with_construction(json!({
        "kind": "nsquare",
        "anchors": params.anchors,
        "c": c,
        "a": params.a,
        "targetSquares": n,
    }));
    Curve::new(spec.clone())?.check_simple()?;
    Ok(spec)
}

/// `sqrt(1 - x^2) - 2|x|`: with `x >= 0`, `(x, locus(x))` is the lower-right
/// vertex of the square whose top side is the chord from `(-x, sqrt(1-x^2))`
/// to `(x, sqrt(1-x^2))`.
pub fn locus(x: f64) -> Result<f64> {
    if !(x.abs() <= FRAC_1_SQRT_2) {
        return Err(Error::Domain(format!("locus needs |x| <= 1/sqrt(2), got {x}")));
    }
    Ok((1.0 - x * x).sqrt() - 2.0 * x.abs())
}

/// Where the bump graph meets the right side of the locus, excluding the
/// shared endpoint at `x = 1/sqrt(2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocusIntersections {
    /// 0, 1 (tangency) or the number of transversal crossings.
    pub count: usize,
    pub abscissas: Vec<f64>,
    pub tangency: bool,
    /// Maximiser of `graph - locus` on `(0, 1/sqrt(2))` and the value there.
    pub peak_x: f64,
    pub peak_gap: f64,
}

/// `graph(x) - locus(x)` and its first two derivatives, for `x > 0`.
fn locus_gap(graph: &GraphBumpArc, x: f64) -> [f64; 3] {
    let w = 1.0 - x * x;
    let root = w.sqrt();
    let [b0, b1, b2, _] = graph.bump().jet(x);
    [
        -root + b0 - (root - 2.0 * x),
        x / root + b1 + x / root + 2.0,
        2.0 / (w * root) + b2,
    ]
}

pub fn graph_locus_intersections(c: f64) -> LocusIntersections {
    graph_locus_intersections_with(c, DEFAULT_SHARPNESS)
}

pub fn graph_locus_intersections_with(c: f64, a: f64) -> LocusIntersections {
    let graph = GraphBumpArc { c, a };
    let gap = |x: f64| locus_gap(&graph, x)[0];
    let n = LOCUS_SCAN_POINTS;
    let xs: Vec<f64> = (1..n)
        .map(|i| FRAC_1_SQRT_2 * i as f64 / n as f64)
        .collect();
    let gs: Vec<f64> = xs.iter().map(|&x| gap(x)).collect();

    let mut abscissas = Vec::new();
    for i in 0..xs.len() - 1 {
        if (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
            let (mut lo, mut hi) = (xs[i], xs[i + 1]);
            let lo_neg = gs[i] < 0.0;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if (gap(mid) < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            abscissas.push(0.5 * (lo + hi));
        }
    }

    let imax = (0..gs.len())
        .max_by(|&i, &j| gs[i].total_cmp(&gs[j]))
        .unwrap_or(0);
    let (peak_x, peak_gap) = refine_peak(&graph, xs[imax.saturating_sub(1)], xs[(imax + 1).min(xs.len() - 1)], xs[imax]);

    let mut tangency = false;
    if abscissas.is_empty() {
        let imin = (0..gs.len())
            .min_by(|&i, &j| gs[i].abs().total_cmp(&gs[j].abs()))
            .unwrap_or(0);
        if gs[imin].abs() < TANGENCY_THRESHOLD {
            tangency = true;
            abscissas.push(xs[imin]);
        } else if peak_gap.abs() < TANGENCY_THRESHOLD {
            tangency = true;
            abscissas.push(peak_x);
        }
    }
    LocusIntersections {
        count: abscissas.len(),
        abscissas,
        tangency,
        peak_x,
        peak_gap,
    }
}

/// Safeguarded Newton on the derivative of the gap inside `[lo, hi]`.
fn refine_peak(graph: &GraphBumpArc, mut lo: f64, mut hi: f64, start: f64) -> (f64, f64) {
    let mut x = start;
    for _ in 0..100 {
        let [_, d1, d2] = locus_gap(graph, x);
        if d1 > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - d1 / d2;
        let next = if d2 < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - x).abs() <= 1e-16 || hi - lo <= 1e-15;
        x = next;
        if done {
            break;
        }
    }
    (x, locus_gap(graph, x)[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalSearchResult {
    pub c_star: f64,
    pub bracket: (f64, f64),
    pub tangency_x: f64,
    pub iterations: usize,
}

/// Default bracket for [`critical_c`].
pub const CRITICAL_BRACKET: (f64, f64) = (1.0, 1.4);

/// Bump amplitude at which the graph becomes tangent to the locus.
///
/// Bisects on whether the graph reaches the locus until the bracket is
/// narrower than `1e-6`, then polishes with Newton on the peak gap, whose
/// derivative in `c` is the normalised bump height at the peak.
pub fn critical_c(bracket: (f64, f64)) -> Result<CriticalSearchResult> {
    let (low, high) = bracket;
    let invalid = |reason: &str| Error::InvalidBracket {
        low,
        high,
        reason: reason.into(),
    };
    if !(low < high && low > 0.0 && high.is_finite()) {
        return Err(invalid("need 0 < low < high"));
    }
    let at_low = graph_locus_intersections(low);
    let at_high = graph_locus_intersections(high);
    if at_low.count != 0 || at_low.peak_gap >= 0.0 {
        return Err(invalid("graph already meets the locus at the low end"));
    }
    if at_high.count != 2 {
        return Err(invalid("graph does not cross the locus twice at the high end"));
    }

    let (mut lo, mut hi) = (low, high);
    let mut iterations = 0;
    while hi - lo >= BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if graph_locus_intersections(mid).peak_gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut c = 0.5 * (lo + hi);
    let mut peak = graph_locus_intersections(c);
    for _ in 0..20 {
        let slope = GraphBumpArc { c: 1.0, a: DEFAULT_SHARPNESS }
            .bump()
            .value(peak.peak_x);
        let next = c - peak.peak_gap / slope;
        if !(next > lo && next < hi) {
            break;
        }
        let moved = (next - c).abs();
        c = next;
        peak = graph_locus_intersections(c);
        iterations += 1;
        if moved <= 1e-16 * c || peak.peak_gap == 0.0 {
            break;
        }
    }
    Ok(CriticalSearchResult {
        c_star: c,
        bracket: (lo, hi),
        tangency_x: peak.peak_x,
        iterations,
    })
}

/// Minimum of the polar curvature over interior samples of the arc.
pub fn min_arc_curvature(u: f64, v: f64, c: f64, a: f64) -> f64 {
    let arc = PolarBumpArc { u, v, c, a };
    let n = CONVEXITY_SAMPLES;
    (1..=n)
        .map(|i| arc.polar_curvature(u + (v - u) * i as f64 / (n + 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Largest amplitude in `(0, 1)` for which the polar bump arc over
/// `[u, v]` keeps positive curvature at every sample.
pub fn max_convex_c(u: f64, v: f64, a: f64) -> Result<f64> {
    if !(u < v) {
        return Err(Error::InvalidParams(format!("need u < v, got [{u}, {v}]")));
    }
    let convex = |c: f64| min_arc_curvature(u, v, c, a) > 0.0;
    if !convex(1e-12) {
        return Err(Error::Internal(
            "curvature not positive for a vanishing bump".into(),
        ));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if convex(hi) {
        return Ok(hi);
    }
    while hi - lo >= BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if convex(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn locus_values() {
        assert_eq!(locus(0.0).unwrap(), 1.0);
        assert!((locus(FRAC_1_SQRT_2).unwrap() + FRAC_1_SQRT_2).abs() <= 1e-15);
        assert!((locus(-FRAC_1_SQRT_2).unwrap() + FRAC_1_SQRT_2).abs() <= 1e-15);
        assert!(locus(0.8).is_err());
    }

    #[test]
    fn locus_builds_a_square() {
        let x = 0.4;
        let top = (1.0f64 - x * x).sqrt();
        let base = locus(x).unwrap();
        let v = [
            Point::new(x, top),
            Point::new(-x, top),
            Point::new(-x, base),
            Point::new(x, base),
        ];
        for i in 0..4 {
            let side = v[(i + 1) % 4] - v[i];
            let next = v[(i + 2) % 4] - v[(i + 1) % 4];
            assert!((side.norm() - 0.8).abs() < 1e-12);
            assert!(side.dot(next).abs() < 1e-12);
        }
    }

    #[test]
    fn anchors_are_validated() {
        let bad = ConstructionParams {
            anchors: vec![0.3, 0.1],
            c: Some(0.001),
            ..Default::default()
        };
        assert!(matches!(build_n_square(&bad), Err(Error::InvalidParams(_))));
        let out = ConstructionParams {
            anchors: vec![FRAC_PI_4],
            c: Some(0.001),
            ..Default::default()
        };
        assert!(build_n_square(&out).is_err());
        assert!(ConstructionParams::evenly_spaced(0).is_err());
    }

    #[test]
    fn evenly_spaced_anchors() {
        let p = ConstructionParams::evenly_spaced(3).unwrap();
        assert_eq!(p.anchors.len(), 2);
        assert!((p.anchors[0] + PI / 12.0).abs() < 1e-15);
        assert!((p.anchors[1] - PI / 12.0).abs() < 1e-15);
        assert_eq!(p.target_count(), 3);
    }

    #[test]
    fn nsquare_shape() {
        let params = ConstructionParams {
            anchors: vec![0.0],
            c: Some(0.05),
            ..Default::default()
        };
        let spec = build_n_square(&params).unwrap();
        assert_eq!(spec.segments.len(), 3);
        let Segment::PolarBumpArc(arc) = spec.segments[2] else {
            panic!("expected polar arc");
        };
        assert_eq!((arc.u, arc.v), (0.0, FRAC_PI_4));
        assert!((arc.radius_jet(PI / 8.0)[0] - 1.03858).abs() < 5e-6);
        assert_eq!(arc.radius_jet(0.0)[0], 1.0);
    }

    #[test]
    fn smooth_two_square_rejects_negative_amplitude() {
        assert!(build_smooth_two_square(-0.1).is_err());
        assert!(build_smooth_two_square(f64::NAN).is_err());
    }

    #[test]
    fn oversized_bump_is_not_simple() {
        // The graph apex rises above the unit circle's top for c this large.
        assert!(matches!(
            build_smooth_two_square(5.0),
            Err(Error::NonSimple(..))
        ));
    }

    #[test]
    fn intersection_counts_either_side_of_critical() {
        assert_eq!(graph_locus_intersections(1.0).count, 0);
        let high = graph_locus_intersections(1.3);
        assert_eq!(high.count, 2);
        assert!(!high.tangency);
    }

    #[test]
    fn critical_bracket_is_checked() {
        assert!(matches!(
            critical_c((1.2, 1.4)),
            Err(Error::InvalidBracket { .. })
        ));
        assert!(critical_c((1.0, 1.1)).is_err());
        assert!(critical_c((1.4, 1.0)).is_err());
    }

    #[test]
    fn max_convex_c_rejects_empty_arc() {
        assert!(max_convex_c(0.5, 0.5, 0.02).is_err());
    }
}
