#![allow(dead_code)]

use std::sync::OnceLock;

use squarepeg::{
    build_n_square, build_nonsmooth_two_square, build_smooth_two_square, unit_circle,
    ConstructionParams, Curve,
};

/// c* from an independent scipy run (brentq on the peak of graph - locus).
pub const C_STAR: f64 = 1.1826297174544405;

pub fn n_square(n: usize) -> Curve {
    let params = ConstructionParams::evenly_spaced(n).unwrap();
    Curve::new(build_n_square(&params).unwrap()).unwrap()
}

pub fn smooth2(c: f64) -> Curve {
    Curve::new(build_smooth_two_square(c).unwrap()).unwrap()
}

/// Every construction the tests sweep over, built once.
pub fn corpus() -> &'static [Curve] {
    static CORPUS: OnceLock<Vec<Curve>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut curves = vec![
            Curve::new(unit_circle()).unwrap(),
            Curve::new(build_nonsmooth_two_square()).unwrap(),
            smooth2(0.5),
            smooth2(C_STAR),
            smooth2(1.3),
        ];
        curves.extend((1..=5).map(n_square));
        curves
    })
}

/// Curves without corners.
pub fn smooth_corpus() -> Vec<&'static Curve> {
    corpus().iter().filter(|c| !c.has_corners()).collect()
}

/// Five-point central difference.
pub fn central(f: impl Fn(f64) -> [f64; 2], t: f64, h: f64) -> [f64; 2] {
    let (a, b, c, d) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
    [0, 1].map(|i| (a[i] - d[i] + 8.0 * (c[i] - b[i])) / (12.0 * h))
}

pub fn away_from_joints(curve: &Curve, t: f64, margin: f64) -> bool {
    curve
        .joints()
        .iter()
        .all(|j| squarepeg::curve::cyclic_distance(j.t, t) > margin)
}
