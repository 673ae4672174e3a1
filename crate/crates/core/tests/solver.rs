mod common;

use std::sync::OnceLock;

use common::{away_from_joints, corpus, smooth2, C_STAR};
use proptest::prelude::*;
use squarepeg::solver::{
    deduplicate, diagonal_residual, match_square_sets, norm4, verify_square,
};
use squarepeg::{
    build_nonsmooth_two_square, canonical_key, enumerate_squares, newton_refine, oracle_enumerate,
    residual_jacobian, square_residual, unit_circle, Curve, Point, SolveConfig, SolveReport,
    Square,
};

const FD_STEP: f64 = 1e-5;

fn nonsmooth() -> &'static Curve {
    static CURVE: OnceLock<Curve> = OnceLock::new();
    CURVE.get_or_init(|| Curve::new(build_nonsmooth_two_square()).unwrap())
}

fn nonsmooth_report() -> &'static SolveReport {
    static REPORT: OnceLock<SolveReport> = OnceLock::new();
    REPORT.get_or_init(|| enumerate_squares(nonsmooth(), &SolveConfig::default()).unwrap())
}

fn strip_timing(mut r: SolveReport) -> SolveReport {
    r.stats.wall_time = 0.0;
    r
}

fn mirrored(sq: &Square) -> Square {
    let v = sq.vertices.map(|p| Point::new(-p.x, p.y));
    Square::from_vertices(sq.params, v, sq.residual_norm)
}

fn circle_square(theta: f64) -> (Curve, [f64; 4]) {
    let curve = Curve::new(unit_circle()).unwrap();
    (curve, [theta, theta + 0.25, theta + 0.5, theta + 0.75])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jacobian_matches_finite_differences(idx in 0usize..10, t in proptest::array::uniform4(0.0f64..1.0)) {
        let curve = &corpus()[idx];
        prop_assume!(t.iter().all(|&s| away_from_joints(curve, s, 3.0 * FD_STEP)));
        let jac = residual_jacobian(curve, &t).matrix;
        for col in 0..4 {
            let f = |h: f64| {
                let mut p = t;
                p[col] += h;
                square_residual(curve, &p)
            };
            let (a, b, c, d) = (f(-2.0 * FD_STEP), f(-FD_STEP), f(FD_STEP), f(2.0 * FD_STEP));
            for row in 0..4 {
                let fd = (a[row] - d[row] + 8.0 * (c[row] - b[row])) / (12.0 * FD_STEP);
                let exact = jac[(row, col)];
                prop_assert!((exact - fd).abs() < 1e-5 * exact.abs().max(1.0),
                    "J[{row},{col}] = {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn canonical_key_ignores_labelling(theta in 0.0f64..1.0, shift in 0usize..4, reverse: bool) {
        let (curve, t) = circle_square(theta);
        let base = Square::from_params(&curve, t, 0.0);
        let mut relabelled: [f64; 4] = std::array::from_fn(|i| t[(i + shift) % 4]);
        if reverse {
            relabelled.reverse();
        }
        let other = Square::from_params(&curve, relabelled, 0.0);
        prop_assert_eq!(base.params, other.params);
        prop_assert_eq!(canonical_key(&base, 1e-6), canonical_key(&other, 1e-6));
    }

    #[test]
    fn circle_squares_are_roots(theta in -3.0f64..3.0) {
        let (curve, t) = circle_square(theta);
        prop_assert!(norm4(&square_residual(&curve, &t)) < 1e-12);
        let probe = diagonal_residual(&curve, theta, theta + 0.5);
        prop_assert!(probe.norm() < 1e-12);
    }
}

#[test]
fn nonsmooth_curve_has_two_distinct_squares() {
    let report = nonsmooth_report();
    assert_eq!(report.squares.len(), 2);
    assert!(!report.family_suspected);
    let keys: Vec<_> = report
        .squares
        .iter()
        .map(|s| canonical_key(s, 1e-6))
        .collect();
    assert_ne!(keys[0], keys[1]);
    let mut sides: Vec<f64> = report.squares.iter().map(|s| s.side_length).collect();
    sides.sort_by(f64::total_cmp);
    // The corner square spans the chord between the two corners.
    assert!((sides[1] - 2f64.sqrt()).abs() < 1e-9);
    assert!(sides[0] > 1.0 && sides[0] < 1.2);
}

#[test]
fn reported_squares_pass_the_independent_check() {
    let report = nonsmooth_report();
    for sq in &report.squares {
        verify_square(nonsmooth(), sq, 1e-9).unwrap();
        assert!(sq.side_length >= report.config.min_side_length);
        assert!(sq.residual_norm < report.config.newton_tolerance);
    }
}

#[test]
fn min_side_filter_drops_small_squares() {
    let config = SolveConfig {
        min_side_length: 1.2,
        ..Default::default()
    };
    let report = enumerate_squares(nonsmooth(), &config).unwrap();
    assert_eq!(report.squares.len(), 1);
    assert!(report.squares[0].side_length > 1.4);
}

#[test]
fn enumeration_is_deterministic_across_thread_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| enumerate_squares(nonsmooth(), &SolveConfig::default()).unwrap())
    };
    let one = strip_timing(run(1));
    let three = strip_timing(run(3));
    assert_eq!(one, three);
    assert_eq!(one.to_json().unwrap(), strip_timing(nonsmooth_report().clone()).to_json().unwrap());
}

#[test]
fn deduplication_is_idempotent() {
    let squares = &nonsmooth_report().squares;
    let doubled: Vec<Square> = squares.iter().chain(squares.iter()).copied().collect();
    assert_eq!(&deduplicate(&doubled, 1e-6), squares);
    assert_eq!(&deduplicate(squares, 1e-6), squares);
}

#[test]
fn square_sets_are_mirror_symmetric() {
    let above = smooth2(C_STAR + 0.01);
    let report = enumerate_squares(&above, &SolveConfig::default()).unwrap();
    assert_eq!(report.squares.len(), 3);
    for rep in [&report, nonsmooth_report()] {
        let mirror: Vec<Square> = rep.squares.iter().map(mirrored).collect();
        let d = match_square_sets(&rep.squares, &mirror).unwrap();
        assert!(d < 1e-8, "{d}");
    }
}

#[test]
fn oracle_matches_on_nonsmooth_curve() {
    let oracle = oracle_enumerate(nonsmooth(), 512, &SolveConfig::default()).unwrap();
    let d = match_square_sets(&nonsmooth_report().squares, &oracle).unwrap();
    assert!(d < 1e-6);
    assert!(oracle_enumerate(nonsmooth(), 128, &SolveConfig::default()).is_err());
}

#[test]
fn circle_is_flagged_as_family() {
    let curve = Curve::new(unit_circle()).unwrap();
    let report = enumerate_squares(&curve, &SolveConfig::default()).unwrap();
    assert!(report.family_suspected);
    assert!(report.squares.len() > 4 * report.config.grid_resolution);
    for sq in report.squares.iter().step_by(97) {
        assert!((sq.side_length - 2f64.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn newton_recovers_a_perturbed_square() {
    let sq = nonsmooth_report()
        .squares
        .iter()
        .find(|s| s.side_length < 1.2)
        .unwrap();
    let seed = sq.params.map(|t| t + 2e-3);
    let sol = newton_refine(nonsmooth(), &seed, &SolveConfig::default()).unwrap();
    assert!(sol.residual_norm < 1e-12);
    let back = Square::from_params(nonsmooth(), sol.params, sol.residual_norm);
    assert!(back.hausdorff(sq) < 1e-9);
}

#[test]
fn degenerate_quadruple_is_a_root_but_never_reported() {
    let t = [0.3; 4];
    assert_eq!(norm4(&square_residual(nonsmooth(), &t)), 0.0);
    for sq in &nonsmooth_report().squares {
        assert!(sq.side_length > 1e-2);
    }
}

#[test]
fn report_round_trips_through_json_and_csv() {
    let report = nonsmooth_report();
    let back = SolveReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(&back, report);
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("t1,t2,t3,t4"));
}
