//! Closed curves assembled from analytic arcs.
//!
//! A [`CurveSpec`] is the declarative, serialisable description; a
//! [`Curve`] is the evaluatable form with a global parameter `t` in
//! `[0, 1)`. Each segment receives a parameter share proportional to the
//! arclength of the unperturbed arc it is built on, and the native
//! parameter is an affine function of `t` inside the share.

mod analysis;
pub mod segment;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use analysis::ClosestPoint;
pub use segment::{
    Bump, CircleArc, GraphBumpArc, Jet, PolarBumpArc, Segment, DEFAULT_SHARPNESS, SEMICIRCLE,
};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Maximum gap between consecutive segment endpoints.
pub const JOINT_TOLERANCE: f64 = 1e-12;

/// Polyline resolution used for the simplicity check.
pub const SIMPLICITY_SAMPLES: usize = 4096;

/// Dense sampling used to seed closest-point projection.
pub const CLOSEST_POINT_SAMPLES: usize = 4096;

/// Tangent-direction jump (radians) above which a joint is a corner.
const CORNER_ANGLE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub name: String,
    /// Free-form record of the parameters a factory used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<serde_json::Value>,
    pub segments: Vec<Segment>,
}

impl CurveSpec {
    pub fn new(name: impl Into<String>, segments: Vec<Segment>) -> Self {
        CurveSpec {
            name: name.into(),
            construction: None,
            segments,
        }
    }

    pub fn with_construction(mut self, construction: serde_json::Value) -> Self {
        self.construction = Some(construction);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JointKind {
    /// Tangent-continuous joint between ordinary arcs.
    Smooth,
    /// Tangent-continuous joint where a bump term vanishes to all orders.
    Flat,
    /// Tangent direction jumps.
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    /// Global parameter of the joint (start of the segment it precedes).
    pub t: f64,
    pub point: Point,
    pub kind: JointKind,
}

#[derive(Debug, Clone)]
pub struct Curve {
    spec: CurveSpec,
    starts: Vec<f64>,
    rates: Vec<f64>,
    joints: Vec<Joint>,
    samples: Vec<Point>,
    length: f64,
    orientation: f64,
}

/// Wrap a parameter into `[0, 1)`.
pub fn wrap(t: f64) -> f64 {
    let w = t.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Distance between two parameters on the circle `R/Z`.
pub fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        if spec.segments.is_empty() {
            return Err(Error::EmptySpec);
        }
        for (index, seg) in spec.segments.iter().enumerate() {
            seg.validate()
                .map_err(|reason| Error::InvalidSegment { index, reason })?;
        }
        let n = spec.segments.len();
        for k in 0..n {
            let seg = &spec.segments[k];
            let next = &spec.segments[(k + 1) % n];
            let end = seg.point(seg.param_range().1);
            let start = next.point(next.param_range().0);
            let gap = end.distance(start);
            if !(gap <= JOINT_TOLERANCE) {
                return Err(Error::OpenJoint {
                    from: k,
                    to: (k + 1) % n,
                    gap,
                });
            }
        }

        let lengths: Vec<f64> = spec.segments.iter().map(Segment::base_length).collect();
        let total: f64 = lengths.iter().sum();
        let mut starts = Vec::with_capacity(n);
        let mut rates = Vec::with_capacity(n);
        let mut acc = 0.0;
        for (seg, len) in spec.segments.iter().zip(&lengths) {
            starts.push(acc / total);
            let (s0, s1) = seg.param_range();
            rates.push((s1 - s0) * total / len);
            acc += len;
        }

        let mut curve = Curve {
            spec,
            starts,
            rates,
            joints: Vec::new(),
            samples: Vec::new(),
            length: 0.0,
            orientation: 1.0,
        };
        curve.joints = (0..n).map(|k| curve.classify_joint(k)).collect();
        curve.samples = (0..CLOSEST_POINT_SAMPLES)
            .map(|i| curve.eval(i as f64 / CLOSEST_POINT_SAMPLES as f64))
            .collect();
        let m = curve.samples.len();
        let mut area = 0.0;
        for i in 0..m {
            let a = curve.samples[i];
            let b = curve.samples[(i + 1) % m];
            curve.length += a.distance(b);
            area += a.cross(b);
        }
        curve.orientation = if area < 0.0 { -1.0 } else { 1.0 };
        if let Some(p) = curve.samples.iter().find(|p| !p.is_finite()) {
            return Err(Error::Internal(format!("non-finite curve point {p:?}")));
        }
        Ok(curve)
    }

    fn classify_joint(&self, k: usize) -> Joint {
        let n = self.spec.segments.len();
        let prev = (k + n - 1) % n;
        let before = self.segment_jet_at(prev, self.segment_end(prev));
        let after = self.segment_jet_at(k, self.starts[k]);
        let (u, v) = (before.d1, after.d1);
        let angle = u.cross(v).atan2(u.dot(v)).abs();
        let kind = if angle > CORNER_ANGLE {
            JointKind::Corner
        } else if self.spec.segments[k].has_flat_ends() || self.spec.segments[prev].has_flat_ends()
        {
            JointKind::Flat
        } else {
            JointKind::Smooth
        };
        Joint {
            t: self.starts[k],
            point: after.p,
            kind,
        }
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn segments(&self) -> &[Segment] {
        &self.spec.segments
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn has_corners(&self) -> bool {
        self.joints.iter().any(|j| j.kind == JointKind::Corner)
    }

    /// Polyline length of the closest-point samples.
    pub fn approximate_length(&self) -> f64 {
        self.length
    }

    /// `+1` for counterclockwise traversal, `-1` for clockwise.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Parameter interval `[start, end)` of segment `k`.
    pub fn segment_range(&self, k: usize) -> (f64, f64) {
        (self.starts[k], self.segment_end(k))
    }

    fn segment_end(&self, k: usize) -> f64 {
        self.starts.get(k + 1).copied().unwrap_or(1.0)
    }

    /// Index of the segment owning `t` (wrapped).
    pub fn segment_index(&self, t: f64) -> usize {
        let t = wrap(t);
        self.starts.partition_point(|&s| s <= t) - 1
    }

    /// Evaluates segment `k`'s formula at global parameter `t`, which may lie
    /// outside (or on the boundary of) the segment's share.
    pub(crate) fn segment_jet_at(&self, k: usize, t: f64) -> Jet {
        let seg = &self.spec.segments[k];
        let rate = self.rates[k];
        let s = seg.param_range().0 + (t - self.starts[k]) * rate;
        let j = seg.jet(s);
        Jet {
            p: j.p,
            d1: j.d1 * rate,
            d2: j.d2 * (rate * rate),
        }
    }

    /// Position and first two derivatives with respect to `t`.
    ///
    /// At a joint the owning segment is the one that starts there, so
    /// derivatives at a corner are right-sided.
    pub fn jet(&self, t: f64) -> Jet {
        let t = wrap(t);
        self.segment_jet_at(self.segment_index(t), t)
    }

    pub fn eval(&self, t: f64) -> Point {
        self.jet(t).p
    }

    pub fn deriv1(&self, t: f64) -> Point {
        self.jet(t).d1
    }

    pub fn deriv2(&self, t: f64) -> Point {
        self.jet(t).d2
    }

    /// Derivative of the given order (1 or 2).
    pub fn deriv(&self, t: f64, order: u8) -> Result<Point> {
        match order {
            1 => Ok(self.deriv1(t)),
            2 => Ok(self.deriv2(t)),
            _ => Err(Error::Domain(format!(
                "derivative order must be 1 or 2, got {order}"
            ))),
        }
    }

    /// Closest-point seeds: `CLOSEST_POINT_SAMPLES` points uniform in `t`.
    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    /// Distance from `t` to the nearest joint of the given kinds.
    pub fn nearest_joint(&self, t: f64, kinds: &[JointKind]) -> Option<(Joint, f64)> {
        self.joints
            .iter()
            .filter(|j| kinds.contains(&j.kind))
            .map(|j| (*j, cyclic_distance(t, j.t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}
