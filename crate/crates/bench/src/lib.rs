//! Benchmark fixtures: the curves the benchmarks in `benches/` run on.

use squarepeg::{
    build_n_square, build_nonsmooth_two_square, build_smooth_two_square, ConstructionParams,
    Curve,
};

/// Smooth two-square curve a little above the critical amplitude.
pub const SMOOTH_AMPLITUDE: f64 = 1.19;

pub fn fixtures() -> Vec<(&'static str, Curve)> {
    let n3 = ConstructionParams::evenly_spaced(3).expect("three squares");
    vec![
        ("nonsmooth2", Curve::new(build_nonsmooth_two_square()).expect("valid")),
        (
            "smooth2",
            Curve::new(build_smooth_two_square(SMOOTH_AMPLITUDE).expect("simple")).expect("valid"),
        ),
        ("nsquare3", Curve::new(build_n_square(&n3).expect("simple")).expect("valid")),
    ]
}
