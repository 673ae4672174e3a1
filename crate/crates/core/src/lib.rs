//! Construction of simple closed plane curves with a controlled number of
//! inscribed squares, and numerical enumeration of those squares.
//!
//! The crate is organised in four layers:
//!
//! * [`curve`]: piecewise-analytic closed curves (circle arcs, the dent
//!   semicircle, graph and polar bump arcs) with exact first and second
//!   derivatives, signed curvature, convexity sampling and closest-point
//!   projection.
//! * [`constructions`]: factories for the two-square and n-square curve
//!   families, the square-base locus, and the two scalar searches (critical
//!   bump amplitude and largest convex amplitude).
//! * [`solver`]: the square residual system, grid-seeded Newton enumeration
//!   with deduplication and family detection, and an independent
//!   diagonal-pair oracle.
//! * [`reproduce`]: the end-to-end checks behind `squarepeg verify`.

pub mod constructions;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod reproduce;
pub mod solver;

pub use constructions::{
    build_n_square, build_nonsmooth_two_square, build_smooth_two_square, critical_c,
    graph_locus_intersections, locus, max_convex_c, unit_circle, ConstructionParams,
    CriticalSearchResult, LocusIntersections,
};
pub use curve::{ClosestPoint, Curve, CurveSpec, JointKind, Segment};
pub use error::{Error, Result};
pub use geometry::Point;
pub use solver::{
    canonical_key, enumerate_squares, newton_refine, oracle_enumerate, residual_jacobian,
    square_residual, NewtonFailure, SolveConfig, SolveReport, Square,
};
