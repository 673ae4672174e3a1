//! Curvature, convexity, simplicity and closest-point projection.

use serde::{Deserialize, Serialize};

use super::{cyclic_distance, wrap, Curve, JointKind, SIMPLICITY_SAMPLES};
use crate::error::{Error, Result};
use crate::geometry::{segments_intersect, Point};

/// Joints closer than this to a sample are skipped by convexity sampling.
const JOINT_SKIP: f64 = 1e-9;

/// Distances equal to within this are ties, resolved by smallest `t`.
const TIE_TOLERANCE: f64 = 1e-12;

/// Sample minima refined per closest-point query.
const MAX_REFINEMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosestPoint {
    pub t: f64,
    pub point: Point,
    pub distance: f64,
    /// False when refinement failed and the best dense sample was returned.
    pub refined: bool,
}

impl Curve {
    /// Signed curvature `(x'y'' - y'x'') / |p'|^3`; positive where a
    /// counterclockwise curve turns left.
    pub fn signed_curvature(&self, t: f64) -> Result<f64> {
        let jet = self.jet(t);
        let speed = jet.d1.norm();
        if speed < 1e-12 {
            return Err(Error::DegenerateParameterization(t));
        }
        Ok(jet.d1.cross(jet.d2) / (speed * speed * speed))
    }

    /// Samples the signed curvature at `samples` uniform parameters and
    /// reports whether it is positive everywhere, with the minimum found.
    pub fn is_convex(&self, samples: usize) -> Result<(bool, f64)> {
        if samples < 1000 {
            return Err(Error::InvalidConfig(format!(
                "convexity needs at least 1000 samples, got {samples}"
            )));
        }
        if self.has_corners() {
            return Err(Error::CornerCurve);
        }
        let mut min = f64::INFINITY;
        for i in 0..samples {
            let t = i as f64 / samples as f64;
            if self.joints.iter().any(|j| cyclic_distance(t, j.t) < JOINT_SKIP) {
                continue;
            }
            min = min.min(self.signed_curvature(t)?);
        }
        Ok((min > 0.0, min))
    }

    /// `n` points uniform in `t`.
    pub fn polyline(&self, n: usize) -> Vec<Point> {
        (0..n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }

    /// Checks that the `SIMPLICITY_SAMPLES`-point closed polyline has no
    /// intersections between non-adjacent edges.
    pub fn check_simple(&self) -> Result<()> {
        let pts = self.polyline(SIMPLICITY_SAMPLES);
        let n = pts.len();
        let edges: Vec<(Point, Point, [f64; 4])> = (0..n)
            .map(|i| {
                let a = pts[i];
                let b = pts[(i + 1) % n];
                (a, b, [a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y)])
            })
            .collect();
        for i in 0..n {
            let (a0, a1, ba) = edges[i];
            for (j, &(b0, b1, bb)) in edges.iter().enumerate().skip(i + 2) {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if ba[1] < bb[0] || bb[1] < ba[0] || ba[3] < bb[2] || bb[3] < ba[2] {
                    continue;
                }
                if segments_intersect(a0, a1, b0, b1) {
                    return Err(Error::NonSimple(i, j));
                }
            }
        }
        Ok(())
    }

    /// Global minimiser of `|eval(t) - q|`: dense sampling, then safeguarded
    /// Newton on `(p(t) - q) . p'(t) = 0` around each competitive sample
    /// minimum. Ties go to the smallest `t`.
    pub fn closest_point(&self, q: Point) -> ClosestPoint {
        let n = self.samples.len();
        let d2: Vec<f64> = self.samples.iter().map(|p| (*p - q).norm_sq()).collect();
        let (best_i, best) = d2
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &d)| if d < acc.1 { (i, d) } else { acc });
        let window = best.sqrt() + 0.5 * self.length / n as f64;
        let window = window * window;
        let eps = 1e-15 * (1.0 + best);
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&i| {
                d2[i] <= window
                    && d2[i] <= d2[(i + n - 1) % n] + eps
                    && d2[i] <= d2[(i + 1) % n] + eps
            })
            .take(MAX_REFINEMENTS)
            .collect();
        if !candidates.contains(&best_i) {
            candidates.push(best_i);
        }

        let fallback = ClosestPoint {
            t: best_i as f64 / n as f64,
            point: self.samples[best_i],
            distance: best.sqrt(),
            refined: false,
        };
        let mut result: Option<ClosestPoint> = None;
        let h = 1.0 / n as f64;
        for i in candidates {
            let center = i as f64 * h;
            let Some(found) = self.refine_bracket(q, center - h, center + h) else {
                continue;
            };
            result = Some(match result {
                None => found,
                Some(cur) => {
                    if found.distance < cur.distance - TIE_TOLERANCE
                        || (found.distance <= cur.distance + TIE_TOLERANCE && found.t < cur.t)
                    {
                        found
                    } else {
                        cur
                    }
                }
            });
        }
        match result {
            Some(r) if r.distance <= fallback.distance + TIE_TOLERANCE => r,
            _ => fallback,
        }
    }

    /// Minimises the distance to `q` over `[lo, hi]` (unwrapped), splitting
    /// the bracket at joints so each piece is handled with one segment's
    /// formula.
    fn refine_bracket(&self, q: Point, lo: f64, hi: f64) -> Option<ClosestPoint> {
        let mut cuts = vec![lo, hi];
        for j in &self.joints {
            for shift in [-1.0, 0.0, 1.0] {
                let jt = j.t + shift;
                if jt > lo && jt < hi {
                    cuts.push(jt);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut best: Option<ClosestPoint> = None;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let k = self.segment_index(0.5 * (a + b));
            let Some((t, p)) = self.minimise_on_piece(k, q, a, b) else {
                continue;
            };
            let cand = ClosestPoint {
                t: wrap(t),
                point: p,
                distance: p.distance(q),
                refined: true,
            };
            best = match best {
                Some(cur)
                    if cur.distance < cand.distance - TIE_TOLERANCE
                        || (cur.distance <= cand.distance + TIE_TOLERANCE && cur.t <= cand.t) =>
                {
                    Some(cur)
                }
                _ => Some(cand),
            };
        }
        best
    }

    fn minimise_on_piece(&self, k: usize, q: Point, a: f64, b: f64) -> Option<(f64, Point)> {
        let g = |t: f64| {
            let j = self.segment_jet_at(k, t);
            let r = j.p - q;
            (r.dot(j.d1), j.d1.norm_sq() + r.dot(j.d2), j.p)
        };
        let (ga, _, pa) = g(a);
        let (gb, _, pb) = g(b);
        let endpoint = if (pa - q).norm_sq() <= (pb - q).norm_sq() {
            (a, pa)
        } else {
            (b, pb)
        };
        if !(ga < 0.0 && gb > 0.0) {
            return Some(endpoint);
        }
        let (mut lo, mut hi) = (a, b);
        let mut t = 0.5 * (a + b);
        let mut converged = false;
        for _ in 0..100 {
            let (gt, dg, _) = g(t);
            if gt == 0.0 {
                converged = true;
                break;
            }
            if gt < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - gt / dg;
            let next = if dg > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 1e-17 * (1.0 + t.abs()) || hi - lo <= 1e-16 {
                t = next;
                converged = true;
                break;
            }
            t = next;
        }
        if !converged {
            return None;
        }
        let p = self.segment_jet_at(k, t).p;
        if (p - q).norm_sq() <= (endpoint.1 - q).norm_sq() {
            Some((t, p))
        } else {
            Some(endpoint)
        }
    }

    /// Distance to the curve, positive outside the bounded region.
    pub fn signed_distance(&self, q: Point) -> (f64, ClosestPoint) {
        let cp = self.closest_point(q);
        let tangent = self.tangent_direction(cp.t);
        let outward = -tangent.rot90();
        let side = (q - cp.point).dot(outward) * self.orientation;
        let d = if side < 0.0 { -cp.distance } else { cp.distance };
        (d, cp)
    }

    /// Unit tangent; at a corner, the bisector of the two one-sided tangents.
    fn tangent_direction(&self, t: f64) -> Point {
        let right = self.deriv1(t);
        let right = right * (1.0 / right.norm());
        match self.nearest_joint(t, &[JointKind::Corner]) {
            Some((joint, d)) if d < 1e-12 => {
                let n = self.segments().len();
                let k = self.segment_index(joint.t);
                let prev = (k + n - 1) % n;
                let end = if k == 0 { 1.0 } else { joint.t };
                let left = self.segment_jet_at(prev, end).d1;
                let left = left * (1.0 / left.norm());
                let right = self.segment_jet_at(k, joint.t).d1;
                let right = right * (1.0 / right.norm());
                left + right
            }
            _ => right,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CurveSpec, PolarBumpArc, Segment};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn circle() -> Curve {
        Curve::new(CurveSpec::new("circle", vec![Segment::unit_arc(0.0, 2.0 * PI)])).unwrap()
    }

    fn dent() -> Curve {
        Curve::new(CurveSpec::new(
            "dent",
            vec![Segment::unit_arc(-FRAC_PI_4, 1.25 * PI), Segment::SemicircleArc],
        ))
        .unwrap()
    }

    #[test]
    fn circle_curvature_is_one() {
        let c = circle();
        for i in 0..50 {
            let k = c.signed_curvature(i as f64 / 50.0).unwrap();
            assert!((k - 1.0).abs() < 1e-9);
        }
        let (convex, min) = c.is_convex(1000).unwrap();
        assert!(convex && (min - 1.0).abs() < 1e-9);
        assert!(c.is_convex(999).is_err());
    }

    #[test]
    fn semicircle_curvature_magnitude() {
        let c = dent();
        let (lo, hi) = c.segment_range(1);
        let k = c.signed_curvature(0.5 * (lo + hi)).unwrap();
        assert!((k.abs() - 2f64.sqrt()).abs() < 1e-9);
        // The dent is traversed clockwise.
        assert!(k < 0.0);
        assert!(matches!(c.is_convex(1000), Err(Error::CornerCurve)));
    }

    #[test]
    fn polar_curvature_matches_parametric() {
        let arc = PolarBumpArc::new(0.0, FRAC_PI_4, 0.05);
        let c = Curve::new(CurveSpec::new(
            "p",
            vec![Segment::unit_arc(FRAC_PI_4, 2.0 * PI), Segment::PolarBumpArc(arc)],
        ))
        .unwrap();
        let (lo, hi) = c.segment_range(1);
        // pi/8 is the midpoint of the arc's native range.
        let t = 0.5 * (lo + hi);
        let k = c.signed_curvature(t).unwrap();
        let expected = arc.polar_curvature(FRAC_PI_8);
        assert!(((k - expected) / expected).abs() < 1e-8, "{k} vs {expected}");
    }

    #[test]
    fn closest_point_on_circle() {
        let c = circle();
        let r = c.closest_point(Point::new(2.0, 0.0));
        assert!(r.t.min(1.0 - r.t) < 1e-12);
        assert!((r.distance - 1.0).abs() < 1e-12);
        assert!(r.refined);

        let r = c.closest_point(Point::ORIGIN);
        assert!((r.distance - 1.0).abs() < 1e-12);
        assert_eq!(r.t, 0.0);

        let r = c.closest_point(Point::new(0.0, -0.5));
        assert!((r.t - 0.75).abs() < 1e-12);
        assert!((r.distance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closest_point_at_corner() {
        let c = dent();
        let s = FRAC_1_SQRT_2;
        // Outside the convex corner at (s, -s), along its bisector-ish.
        let q = Point::new(s + 0.01, -s - 0.02);
        let r = c.closest_point(q);
        assert!((r.point - Point::new(s, -s)).norm() < 1e-12, "{r:?}");
        let (sd, _) = c.signed_distance(q);
        assert!(sd > 0.0);
        let (sd, _) = c.signed_distance(Point::new(0.0, 0.5));
        assert!(sd < 0.0);
    }

    #[test]
    fn simplicity() {
        circle().check_simple().unwrap();
        dent().check_simple().unwrap();
        // A figure-eight-like overlap: two full turns.
        let twice = Curve::new(CurveSpec::new(
            "twice",
            vec![Segment::unit_arc(0.0, 2.0 * PI), Segment::unit_arc(0.0, 2.0 * PI)],
        ))
        .unwrap();
        assert!(twice.check_simple().is_err());
    }
}
