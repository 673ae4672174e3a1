//! The four analytic arc kinds a closed curve is assembled from.
//!
//! Every segment is evaluated in terms of its own *native* parameter: the
//! central angle for circle and polar arcs, and the polar angle of the
//! underlying unit-circle point for the graph arc. All four kinds have unit
//! native speed at their endpoints when they join the unit circle, which is
//! what makes bump joints C-infinity in the global parameter.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Default bump sharpness.
pub const DEFAULT_SHARPNESS: f64 = 0.02;

/// Exponents below this make the bump underflow to exactly zero; the
/// derivative factors are not evaluated there to avoid `0 * inf`.
const EXP_FLOOR: f64 = -700.0;

fn default_sharpness() -> f64 {
    DEFAULT_SHARPNESS
}

/// Position and first two derivatives with respect to some parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub p: Point,
    pub d1: Point,
    pub d2: Point,
}

/// `c * exp(-(a/(s-lo)^2 + a/(hi-s)^2))` on `(lo, hi)`, extended by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub amplitude: f64,
    pub sharpness: f64,
}

impl Bump {
    /// Value and first three derivatives at `s`.
    pub fn jet(&self, s: f64) -> [f64; 4] {
        if self.amplitude == 0.0 || s <= self.lo || s >= self.hi {
            return [0.0; 4];
        }
        let a = self.sharpness;
        let l = s - self.lo;
        let r = self.hi - s;
        let e = -(a / (l * l) + a / (r * r));
        if e < EXP_FLOOR {
            return [0.0; 4];
        }
        let e1 = 2.0 * a / (l * l * l) - 2.0 * a / (r * r * r);
        let e2 = -6.0 * a / l.powi(4) - 6.0 * a / r.powi(4);
        let e3 = 24.0 * a / l.powi(5) - 24.0 * a / r.powi(5);
        let b = self.amplitude * e.exp();
        [
            b,
            b * e1,
            b * (e2 + e1 * e1),
            b * (e3 + 3.0 * e1 * e2 + e1 * e1 * e1),
        ]
    }

    pub fn value(&self, s: f64) -> f64 {
        self.jet(s)[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CircleArc {
    pub center: Point,
    pub radius: f64,
    /// Traversal runs from `start_angle` to `end_angle`; a decreasing pair
    /// is traversed clockwise.
    pub start_angle: f64,
    pub end_angle: f64,
}

impl CircleArc {
    pub fn jet(&self, theta: f64) -> Jet {
        let (s, c) = theta.sin_cos();
        let r = self.radius;
        Jet {
            p: Point::new(self.center.x + r * c, self.center.y + r * s),
            d1: Point::new(-r * s, r * c),
            d2: Point::new(-r * c, -r * s),
        }
    }
}

/// The dent `y = sqrt(1/2 - x^2) - 1/sqrt(2)`, traversed left to right over
/// its apex at the origin.
pub const SEMICIRCLE: CircleArc = CircleArc {
    center: Point::new(0.0, -FRAC_1_SQRT_2),
    radius: FRAC_1_SQRT_2,
    start_angle: PI,
    end_angle: 0.0,
};

/// The graph `y = -sqrt(1 - x^2) + c * bump(x)` over `[-1/sqrt2, 1/sqrt2]`.
///
/// Natively parameterised by `phi` in `[5pi/4, 7pi/4]` with `x = cos(phi)`,
/// so that with `c = 0` the arc is exactly the unit circle it replaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphBumpArc {
    pub c: f64,
    #[serde(default = "default_sharpness")]
    pub a: f64,
}

impl GraphBumpArc {
    pub const START: f64 = 1.25 * PI;
    pub const END: f64 = 1.75 * PI;

    pub fn new(c: f64) -> Self {
        GraphBumpArc {
            c,
            a: DEFAULT_SHARPNESS,
        }
    }

    pub fn bump(&self) -> Bump {
        Bump {
            lo: -FRAC_1_SQRT_2,
            hi: FRAC_1_SQRT_2,
            amplitude: self.c,
            sharpness: self.a,
        }
    }

    /// Height of the graph at abscissa `x`.
    pub fn height(&self, x: f64) -> f64 {
        -(1.0 - x * x).sqrt() + self.bump().value(x)
    }

    /// `dy/dx` of the graph.
    pub fn slope(&self, x: f64) -> f64 {
        x / (1.0 - x * x).sqrt() + self.bump().jet(x)[1]
    }

    pub fn jet(&self, phi: f64) -> Jet {
        let (s, c) = phi.sin_cos();
        let [b0, b1, b2, _] = self.bump().jet(c);
        // x = cos(phi): x' = -sin(phi), x'' = -cos(phi)
        Jet {
            p: Point::new(c, s + b0),
            d1: Point::new(-s, c - b1 * s),
            d2: Point::new(-c, -s + b2 * s * s - b1 * c),
        }
    }
}

/// `r(theta) = 1 + c * bump(theta)` on `[u, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarBumpArc {
    pub u: f64,
    pub v: f64,
    pub c: f64,
    #[serde(default = "default_sharpness")]
    pub a: f64,
}

impl PolarBumpArc {
    pub fn new(u: f64, v: f64, c: f64) -> Self {
        PolarBumpArc {
            u,
            v,
            c,
            a: DEFAULT_SHARPNESS,
        }
    }

    pub fn bump(&self) -> Bump {
        Bump {
            lo: self.u,
            hi: self.v,
            amplitude: self.c,
            sharpness: self.a,
        }
    }

    /// `[r, r', r'']` at `theta`.
    pub fn radius_jet(&self, theta: f64) -> [f64; 3] {
        let [b0, b1, b2, _] = self.bump().jet(theta);
        [1.0 + b0, b1, b2]
    }

    /// Curvature from the polar formula `(r^2 + 2r'^2 - r r'') / (r^2 + r'^2)^{3/2}`.
    pub fn polar_curvature(&self, theta: f64) -> f64 {
        let [r, r1, r2] = self.radius_jet(theta);
        (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(1.5)
    }

    pub fn jet(&self, theta: f64) -> Jet {
        let [r, r1, r2] = self.radius_jet(theta);
        let (s, c) = theta.sin_cos();
        let radial = Point::new(c, s);
        let tangential = Point::new(-s, c);
        Jet {
            p: radial * r,
            d1: radial * r1 + tangential * r,
            d2: radial * (r2 - r) + tangential * (2.0 * r1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Segment {
    CircleArc(CircleArc),
    SemicircleArc,
    GraphBumpArc(GraphBumpArc),
    PolarBumpArc(PolarBumpArc),
}

impl Segment {
    pub fn unit_arc(start_angle: f64, end_angle: f64) -> Self {
        Segment::CircleArc(CircleArc {
            center: Point::ORIGIN,
            radius: 1.0,
            start_angle,
            end_angle,
        })
    }

    /// Native parameter at the start and end of the segment.
    pub fn param_range(&self) -> (f64, f64) {
        match self {
            Segment::CircleArc(arc) => (arc.start_angle, arc.end_angle),
            Segment::SemicircleArc => (SEMICIRCLE.start_angle, SEMICIRCLE.end_angle),
            Segment::GraphBumpArc(_) => (GraphBumpArc::START, GraphBumpArc::END),
            Segment::PolarBumpArc(arc) => (arc.u, arc.v),
        }
    }

    /// Arclength of the unperturbed arc; used to allot parameter shares.
    pub fn base_length(&self) -> f64 {
        let (s0, s1) = self.param_range();
        let radius = match self {
            Segment::CircleArc(arc) => arc.radius,
            Segment::SemicircleArc => SEMICIRCLE.radius,
            Segment::GraphBumpArc(_) | Segment::PolarBumpArc(_) => 1.0,
        };
        radius * (s1 - s0).abs()
    }

    pub fn jet(&self, s: f64) -> Jet {
        match self {
            Segment::CircleArc(arc) => arc.jet(s),
            Segment::SemicircleArc => SEMICIRCLE.jet(s),
            Segment::GraphBumpArc(arc) => arc.jet(s),
            Segment::PolarBumpArc(arc) => arc.jet(s),
        }
    }

    pub fn point(&self, s: f64) -> Point {
        self.jet(s).p
    }

    /// The bump term this segment adds to its base arc, if any.
    pub fn bump(&self) -> Option<Bump> {
        match self {
            Segment::GraphBumpArc(arc) => Some(arc.bump()),
            Segment::PolarBumpArc(arc) => Some(arc.bump()),
            _ => None,
        }
    }

    /// Whether the segment is glued to its neighbours through a bump that
    /// vanishes to all orders at its ends.
    pub fn has_flat_ends(&self) -> bool {
        self.bump().is_some_and(|b| b.amplitude > 0.0)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Segment::CircleArc(_) => "CircleArc",
            Segment::SemicircleArc => "SemicircleArc",
            Segment::GraphBumpArc(_) => "GraphBumpArc",
            Segment::PolarBumpArc(_) => "PolarBumpArc",
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} is not finite"))
            }
        };
        match self {
            Segment::CircleArc(arc) => {
                finite(arc.center.x, "center.x")?;
                finite(arc.center.y, "center.y")?;
                finite(arc.start_angle, "startAngle")?;
                finite(arc.end_angle, "endAngle")?;
                if !(arc.radius > 0.0 && arc.radius.is_finite()) {
                    return Err(format!("radius must be positive, got {}", arc.radius));
                }
                if arc.start_angle == arc.end_angle {
                    return Err("arc has zero sweep".into());
                }
            }
            Segment::SemicircleArc => {}
            Segment::GraphBumpArc(arc) => {
                finite(arc.c, "c")?;
                if arc.c < 0.0 {
                    return Err(format!("bump amplitude must be >= 0, got {}", arc.c));
                }
                if !(arc.a > 0.0 && arc.a.is_finite()) {
                    return Err(format!("sharpness must be positive, got {}", arc.a));
                }
            }
            Segment::PolarBumpArc(arc) => {
                finite(arc.u, "u")?;
                finite(arc.v, "v")?;
                finite(arc.c, "c")?;
                if arc.u >= arc.v {
                    return Err(format!("need u < v, got u = {}, v = {}", arc.u, arc.v));
                }
                if arc.c < 0.0 {
                    return Err(format!("bump amplitude must be >= 0, got {}", arc.c));
                }
                if !(arc.a > 0.0 && arc.a.is_finite()) {
                    return Err(format!("sharpness must be positive, got {}", arc.a));
                }
            }
        }
        Ok(())
    }
}
