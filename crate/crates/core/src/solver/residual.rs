//! The square residual `F(t1, t2, t3, t4)` and its analytic Jacobian.
//!
//! With `p_i = curve(t_i)`, the quadrilateral `p1 p2 p3 p4` is a square
//! exactly when its diagonals share a midpoint, have equal length and are
//! perpendicular:
//!
//! ```text
//! F1 = x1 + x3 - x2 - x4
//! F2 = y1 + y3 - y2 - y4
//! F3 = |p1 - p3|^2 - |p2 - p4|^2
//! F4 = (p1 - p3) . (p2 - p4)
//! ```
//!
//! The system also vanishes on the degenerate manifold `p1 = p2 = p3 = p4`,
//! which callers filter by side length.

use nalgebra::Matrix4;

use crate::curve::{Curve, JointKind};
use crate::geometry::Point;

pub type Params = [f64; 4];

pub fn residual_from_points(p: &[Point; 4]) -> [f64; 4] {
    let d13 = p[0] - p[2];
    let d24 = p[1] - p[3];
    [
        p[0].x + p[2].x - p[1].x - p[3].x,
        p[0].y + p[2].y - p[1].y - p[3].y,
        d13.norm_sq() - d24.norm_sq(),
        d13.dot(d24),
    ]
}

pub fn square_residual(curve: &Curve, t: &Params) -> [f64; 4] {
    residual_from_points(&t.map(|ti| curve.eval(ti)))
}

pub fn norm4(f: &[f64; 4]) -> f64 {
    f.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualJacobian {
    pub matrix: Matrix4<f64>,
    /// Some parameter sits on a corner joint, so its column uses the
    /// right-sided derivative.
    pub one_sided: bool,
}

/// `dF/dt` by the chain rule through the curve's first derivative.
pub fn residual_jacobian(curve: &Curve, t: &Params) -> ResidualJacobian {
    let jets = t.map(|ti| curve.jet(ti));
    let p = jets.map(|j| j.p);
    let d13 = p[0] - p[2];
    let d24 = p[1] - p[3];
    // Gradient of each equation with respect to each vertex position.
    let grads: [[Point; 4]; 4] = [
        [
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.0),
        ],
        [
            Point::new(0.0, 1.0),
            Point::new(0.0, -1.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, -1.0),
        ],
        [d13 * 2.0, d24 * -2.0, d13 * -2.0, d24 * 2.0],
        [d24, d13, -d24, -d13],
    ];
    let mut m = Matrix4::zeros();
    for (row, g) in grads.iter().enumerate() {
        for col in 0..4 {
            m[(row, col)] = g[col].dot(jets[col].d1);
        }
    }
    let one_sided = t.iter().any(|&ti| {
        curve
            .nearest_joint(ti, &[JointKind::Corner])
            .is_some_and(|(_, d)| d == 0.0)
    });
    ResidualJacobian {
        matrix: m,
        one_sided,
    }
}
