//! End-to-end reproduction checks for the constructions.
//!
//! Each criterion returns a [`CriterionRow`] with the expected and observed
//! values. A [`Workbench`] caches enumerations and oracle runs so criteria
//! that share a curve do not solve it twice.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    build_n_square, build_nonsmooth_two_square, build_smooth_two_square, critical_c,
    graph_locus_intersections, locus, max_convex_c, min_arc_curvature, unit_circle,
    ConstructionParams, CriticalSearchResult, CRITICAL_BRACKET,
};
use crate::curve::{cyclic_distance, Curve, CurveSpec, Segment};
use crate::error::Result;
use crate::geometry::Point;
use crate::solver::{
    enumerate_squares, match_square_sets, norm4, oracle_enumerate, residual_from_points,
    residual_jacobian, square_residual, Params, SolveConfig, SolveReport, Square,
    DEFAULT_ORACLE_RESOLUTION,
};

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

const SEED: u64 = 0x5eed_5a9e;
const MATCH_TOLERANCE: f64 = 1e-6;
const ANCHOR_TOLERANCE: f64 = 1e-6;
const CRITICAL_TARGET: f64 = 1.18264;
const CRITICAL_WINDOW: f64 = 1e-3;
const CRITICAL_OFFSET: f64 = 0.01;
const CONVEXITY_SAMPLES: usize = 100_000;
const DERIV_POINTS: usize = 1000;
const JACOBIAN_POINTS: usize = 100;
const DERIV_REL: f64 = 1e-6;
const JACOBIAN_REL: f64 = 1e-5;
const FLATNESS: f64 = 1e-12;
/// Native-parameter distances from a bump endpoint at which flatness is
/// checked.
const FLAT_OFFSETS: [f64; 3] = [1e-3, 5e-3, 1e-2];
/// Global-parameter step for the finite-difference checks.
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub id: u8,
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{}] {}: expected {}; observed {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.expected,
            self.observed,
            self.seconds
        )
    }
}

/// Shared state for a suite run: solver settings plus cached results.
pub struct Workbench {
    pub config: SolveConfig,
    pub oracle_resolution: usize,
    critical: Mutex<Option<CriticalSearchResult>>,
    reports: Mutex<HashMap<String, SolveReport>>,
    oracles: Mutex<HashMap<String, Vec<Square>>>,
}

impl Default for Workbench {
    fn default() -> Self {
        Workbench::new(SolveConfig::default())
    }
}

impl Workbench {
    pub fn new(config: SolveConfig) -> Self {
        Workbench {
            config,
            oracle_resolution: DEFAULT_ORACLE_RESOLUTION,
            critical: Mutex::new(None),
            reports: Mutex::new(HashMap::new()),
            oracles: Mutex::new(HashMap::new()),
        }
    }

    pub fn critical(&self) -> Result<CriticalSearchResult> {
        let mut slot = self.critical.lock().unwrap();
        if let Some(found) = *slot {
            return Ok(found);
        }
        let found = critical_c(CRITICAL_BRACKET)?;
        *slot = Some(found);
        Ok(found)
    }

    pub fn enumerate(&self, key: &str, curve: &Curve) -> Result<SolveReport> {
        // Held while solving so concurrent callers wait instead of
        // repeating the work.
        let mut cache = self.reports.lock().unwrap();
        if let Some(r) = cache.get(key) {
            return Ok(r.clone());
        }
        let report = enumerate_squares(curve, &self.config)?;
        cache.insert(key.to_string(), report.clone());
        Ok(report)
    }

    pub fn oracle(&self, key: &str, curve: &Curve) -> Result<Vec<Square>> {
        let mut cache = self.oracles.lock().unwrap();
        if let Some(r) = cache.get(key) {
            return Ok(r.clone());
        }
        let squares = oracle_enumerate(curve, self.oracle_resolution, &self.config)?;
        cache.insert(key.to_string(), squares.clone());
        Ok(squares)
    }

    /// The curves enumerated by criteria 1 to 3, keyed by a short label.
    pub fn constructions(&self) -> Result<Vec<(String, Curve)>> {
        let mut out = Vec::new();
        for n in 1..=5 {
            out.push((format!("nsquare-{n}"), n_square_curve(n)?));
        }
        out.push((
            "nonsmooth2".to_string(),
            Curve::new(build_nonsmooth_two_square())?,
        ));
        let c_star = self.critical()?.c_star;
        for (label, c) in smooth_amplitudes(c_star) {
            out.push((label, Curve::new(build_smooth_two_square(c)?)?));
        }
        Ok(out)
    }
}

fn n_square_curve(n: usize) -> Result<Curve> {
    Curve::new(build_n_square(&ConstructionParams::evenly_spaced(n)?)?)
}

fn smooth_amplitudes(c_star: f64) -> [(String, f64); 3] {
    [
        ("smooth2-below".to_string(), c_star - CRITICAL_OFFSET),
        ("smooth2-critical".to_string(), c_star),
        ("smooth2-above".to_string(), c_star + CRITICAL_OFFSET),
    ]
}

/// Runs one criterion. Errors inside a criterion become a failing row.
pub fn run_criterion(id: u8, bench: &Workbench) -> CriterionRow {
    let start = Instant::now();
    let (name, expected, outcome) = match id {
        1 => ("exactly-n reproduction", "n squares for n = 1..5, one per anchor", exactly_n(bench)),
        2 => ("critical amplitude", "c* in [1.18164, 1.18364]; 0 and 2 crossings at c* -/+ 0.01", critical_amplitude(bench)),
        3 => ("two-square curves", "nonsmooth 2; smooth at c* 2; at c* -/+ 0.01 equal to oracle", two_square(bench)),
        4 => ("convexity", "every n-square curve convex; 2 * c_max arc concave", convexity()),
        5 => ("circle degeneracy", "residual < 1e-12 on 1000 rotated squares; family flagged", circle(bench)),
        6 => ("oracle equivalence", "same square sets, Hausdorff < 1e-6", oracle_equivalence(bench)),
        7 => ("numerical hygiene", "deriv rel err < 1e-6, Jacobian rel err < 1e-5, bumps flat < 1e-12", hygiene(bench)),
        8 => ("locus identities", "exact endpoints to 1e-15; 100 squares to 1e-12", locus_identities()),
        _ => ("unknown", "", Err(crate::Error::InvalidConfig(format!("no criterion {id}")))),
    };
    let (passed, observed) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionRow {
        id,
        name: name.to_string(),
        expected: expected.to_string(),
        observed,
        passed,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(bench: &Workbench) -> Vec<CriterionRow> {
    CRITERIA.iter().map(|&id| run_criterion(id, bench)).collect()
}

type Outcome = Result<(bool, String)>;

/// Angles at which the n-square curve is meant to carry a square vertex.
fn target_angles(curve: &Curve) -> Vec<f64> {
    let mut angles = vec![-FRAC_PI_4];
    for seg in curve.segments() {
        if let Segment::PolarBumpArc(arc) = seg {
            if arc.u > -FRAC_PI_4 {
                angles.push(arc.u);
            }
        }
    }
    angles
}

fn exactly_n(bench: &Workbench) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=5 {
        let curve = n_square_curve(n)?;
        let start = Instant::now();
        let report = bench.enumerate(&format!("nsquare-{n}"), &curve)?;
        let secs = start.elapsed().as_secs_f64();
        let targets = target_angles(&curve);
        let mut hits = vec![0usize; targets.len()];
        let mut anchored = report.squares.len() == n;
        for sq in &report.squares {
            let mut found = false;
            for (k, &target) in targets.iter().enumerate() {
                let on_target = |p: &Point| p.distance(Point::on_unit_circle(target)) < ANCHOR_TOLERANCE;
                if let Some(i) = sq.vertices.iter().position(on_target) {
                    let rest_on_circle = sq
                        .vertices
                        .iter()
                        .enumerate()
                        .all(|(j, v)| j == i || (v.norm() - 1.0).abs() < ANCHOR_TOLERANCE);
                    if rest_on_circle {
                        hits[k] += 1;
                        found = true;
                        break;
                    }
                }
            }
            anchored &= found;
        }
        anchored &= hits.iter().all(|&h| h == 1);
        ok &= anchored && secs < 60.0;
        parts.push(format!("n={n}: {} ({:.1} s)", report.squares.len(), secs));
    }
    Ok((ok, parts.join(", ")))
}

fn critical_amplitude(bench: &Workbench) -> Outcome {
    let start = Instant::now();
    let found = bench.critical()?;
    let secs = start.elapsed().as_secs_f64();
    let below = graph_locus_intersections(found.c_star - CRITICAL_OFFSET).count;
    let above = graph_locus_intersections(found.c_star + CRITICAL_OFFSET).count;
    let ok = (found.c_star - CRITICAL_TARGET).abs() <= CRITICAL_WINDOW
        && below == 0
        && above == 2
        && secs < 5.0;
    Ok((
        ok,
        format!(
            "c* = {:.10}, tangency at x = {:.8}, crossings {below} and {above}",
            found.c_star, found.tangency_x
        ),
    ))
}

fn two_square(bench: &Workbench) -> Outcome {
    let nonsmooth = Curve::new(build_nonsmooth_two_square())?;
    let n0 = bench.enumerate("nonsmooth2", &nonsmooth)?.squares.len();
    let c_star = bench.critical()?.c_star;
    let mut ok = n0 == 2;
    let mut parts = vec![format!("nonsmooth {n0}")];
    for (label, c) in smooth_amplitudes(c_star) {
        let curve = Curve::new(build_smooth_two_square(c)?)?;
        let count = bench.enumerate(&label, &curve)?.squares.len();
        if label == "smooth2-critical" {
            ok &= count == 2;
            parts.push(format!("c* {count}"));
        } else {
            let oracle = bench.oracle(&label, &curve)?.len();
            ok &= count == oracle;
            parts.push(format!("c = {c:.5}: {count} (oracle {oracle})"));
        }
    }
    Ok((ok, parts.join(", ")))
}

fn convexity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=5 {
        let params = ConstructionParams::evenly_spaced(n)?;
        let curve = Curve::new(build_n_square(&params)?)?;
        let (convex, min_k) = curve.is_convex(CONVEXITY_SAMPLES)?;
        let bounds = params.arc_bounds();
        let (u, v) = (bounds[0], bounds[1]);
        let doubled = 2.0 * max_convex_c(u, v, params.a)?;
        let concave_k = min_arc_curvature(u, v, doubled, params.a);
        ok &= convex && min_k > 0.0 && concave_k < 0.0;
        parts.push(format!("n={n}: min k {min_k:.4}, doubled {concave_k:.3}"));
    }
    Ok((ok, parts.join("; ")))
}

fn circle(bench: &Workbench) -> Outcome {
    let curve = Curve::new(unit_circle())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let theta: f64 = rng.random();
        let t = [theta, theta + 0.25, theta + 0.5, theta + 0.75];
        worst = worst.max(norm4(&square_residual(&curve, &t)));
    }
    let report = bench.enumerate("circle", &curve)?;
    Ok((
        worst < 1e-12 && report.family_suspected,
        format!(
            "worst residual {worst:.2e}, {} squares, family {}",
            report.squares.len(),
            report.family_suspected
        ),
    ))
}

fn oracle_equivalence(bench: &Workbench) -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (label, curve) in bench.constructions()? {
        let newton = bench.enumerate(&label, &curve)?.squares;
        let oracle = bench.oracle(&label, &curve)?;
        match match_square_sets(&newton, &oracle) {
            Some(d) if d < MATCH_TOLERANCE => worst = worst.max(d),
            Some(d) => {
                ok = false;
                failures.push(format!("{label} distance {d:.2e}"));
            }
            None => {
                ok = false;
                failures.push(format!("{label} {} vs {}", newton.len(), oracle.len()));
            }
        }
    }
    let observed = if failures.is_empty() {
        format!("9 curves agree, worst Hausdorff {worst:.2e}")
    } else {
        format!("mismatch: {}", failures.join(", "))
    };
    Ok((ok, observed))
}

/// Curves whose derivatives and bumps are checked by criterion 7.
fn hygiene_curves(bench: &Workbench) -> Result<Vec<(String, Curve)>> {
    let mut curves = bench.constructions()?;
    curves.push(("circle".to_string(), Curve::new(unit_circle())?));
    Ok(curves)
}

/// A parameter at least `margin` away from every joint.
fn smooth_parameter(curve: &Curve, rng: &mut ChaCha8Rng, margin: f64) -> f64 {
    loop {
        let t: f64 = rng.random();
        if curve
            .joints()
            .iter()
            .all(|j| cyclic_distance(j.t, t) > margin)
        {
            return t;
        }
    }
}

/// Five-point central difference.
fn central<F: Fn(f64) -> Point>(f: F, t: f64, h: f64) -> Point {
    (f(t - 2.0 * h) - f(t + 2.0 * h) + 8.0 * (f(t + h) - f(t - h))) * (1.0 / (12.0 * h))
}

fn relative(a: Point, b: Point) -> f64 {
    (a - b).norm() / a.norm().max(f64::MIN_POSITIVE)
}

pub(crate) fn deriv_errors(curve: &Curve, rng: &mut ChaCha8Rng, points: usize) -> (f64, f64) {
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for _ in 0..points {
        let t = smooth_parameter(curve, rng, 3.0 * FD_STEP);
        e1 = e1.max(relative(curve.deriv1(t), central(|s| curve.eval(s), t, FD_STEP)));
        e2 = e2.max(relative(curve.deriv2(t), central(|s| curve.deriv1(s), t, FD_STEP)));
    }
    (e1, e2)
}

/// Largest entrywise relative error of the analytic Jacobian. Entries are
/// compared relative to `max(|entry|, 1)`, since exact zeros occur.
pub(crate) fn jacobian_error(curve: &Curve, rng: &mut ChaCha8Rng, points: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let t: Params = std::array::from_fn(|_| smooth_parameter(curve, rng, 3.0 * FD_STEP));
        let jac = residual_jacobian(curve, &t).matrix;
        for col in 0..4 {
            let f = |s: f64| {
                let mut p = t;
                p[col] = s;
                square_residual(curve, &p)
            };
            for row in 0..4 {
                let g = |s: f64| Point::new(f(s)[row], 0.0);
                let fd = central(g, t[col], FD_STEP).x;
                let a = jac[(row, col)];
                worst = worst.max((a - fd).abs() / a.abs().max(1.0));
            }
        }
    }
    worst
}

/// Largest bump value or derivative at the flatness offsets inside every
/// bump arc of the curve.
pub(crate) fn bump_edge_size(curve: &Curve) -> f64 {
    let mut worst: f64 = 0.0;
    for seg in curve.segments() {
        if let Some(bump) = seg.bump() {
            for d in FLAT_OFFSETS {
                for s in [bump.lo + d, bump.hi - d] {
                    for v in bump.jet(s) {
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
    }
    worst
}

fn hygiene(bench: &Workbench) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let (mut e1, mut e2, mut ej, mut flat): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (_, curve) in hygiene_curves(bench)? {
        let (a, b) = deriv_errors(&curve, &mut rng, DERIV_POINTS);
        e1 = e1.max(a);
        e2 = e2.max(b);
        ej = ej.max(jacobian_error(&curve, &mut rng, JACOBIAN_POINTS));
        flat = flat.max(bump_edge_size(&curve));
    }
    Ok((
        e1 < DERIV_REL && e2 < DERIV_REL && ej < JACOBIAN_REL && flat < FLATNESS,
        format!("deriv {e1:.1e} / {e2:.1e}, Jacobian {ej:.1e}, bump edge {flat:.1e}"),
    ))
}

fn locus_identities() -> Outcome {
    let ends = [
        (locus(0.0)? - 1.0).abs(),
        (locus(FRAC_1_SQRT_2)? + FRAC_1_SQRT_2).abs(),
        (locus(-FRAC_1_SQRT_2)? + FRAC_1_SQRT_2).abs(),
    ];
    let end_err = ends.iter().cloned().fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rng.random_range(-FRAC_1_SQRT_2..=FRAC_1_SQRT_2);
        let top = (1.0 - x * x).sqrt();
        let base = locus(x)?;
        let p = [
            Point::new(-x, top),
            Point::new(x, top),
            Point::new(x, base),
            Point::new(-x, base),
        ];
        let side = p[0].distance(p[1]);
        let sides = (0..4).map(|i| (p[i].distance(p[(i + 1) % 4]) - side).abs());
        let diag = (p[0].distance(p[2]) - side * 2f64.sqrt()).abs();
        let residual = norm4(&residual_from_points(&p));
        worst = sides.fold(worst.max(diag).max(residual), f64::max);
    }
    Ok((
        end_err <= 1e-15 && worst <= 1e-12,
        format!("endpoint error {end_err:.1e}, worst square defect {worst:.1e}"),
    ))
}

/// Specs for every construction the suite touches, for writing to disk.
pub fn suite_specs(bench: &Workbench) -> Result<Vec<CurveSpec>> {
    let mut specs: Vec<CurveSpec> = bench
        .constructions()?
        .into_iter()
        .map(|(_, c)| c.spec().clone())
        .collect();
    specs.push(unit_circle());
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locus_row_passes() {
        let row = run_criterion(8, &Workbench::default());
        assert!(row.passed, "{row}");
    }

    #[test]
    fn unknown_criterion_fails() {
        let row = run_criterion(42, &Workbench::default());
        assert!(!row.passed);
        assert!(row.observed.starts_with("error"));
    }

    #[test]
    fn target_angles_cover_anchors() {
        let curve = n_square_curve(3).unwrap();
        let got = target_angles(&curve);
        assert_eq!(got.len(), 3);
        assert!((got[0] + FRAC_PI_4).abs() < 1e-15);
        assert!((got[1] + FRAC_PI_4 / 3.0).abs() < 1e-15);
        assert!((got[2] - FRAC_PI_4 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn row_display_has_status() {
        let row = CriterionRow {
            id: 3,
            name: "x".into(),
            expected: "a".into(),
            observed: "b".into(),
            passed: false,
            seconds: 0.0,
        };
        assert!(row.to_string().starts_with("FAIL [3]"));
    }
}
