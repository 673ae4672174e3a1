//! Damped Newton on the square residual, and Gauss-Newton with some
//! parameters pinned to joints.

use nalgebra::{DMatrix, DVector, Vector4};
use serde::{Deserialize, Serialize};

use super::residual::{norm4, residual_jacobian, square_residual, Params};
use super::SolveConfig;
use crate::curve::{cyclic_distance, wrap, Curve, JointKind};

const LINE_SEARCH_HALVINGS: usize = 40;
/// Extra Newton steps taken after the tolerance is met, while they help.
const POLISH_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewtonSolution {
    pub params: Params,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    /// The Jacobian is numerically singular and the truncated step made no
    /// progress.
    Singular,
    /// Iteration cap reached, or no step along the Newton direction reduced
    /// the residual.
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewtonFailure {
    pub kind: FailureKind,
    pub last: Params,
    pub residual_norm: f64,
}

fn wrap_all(t: Params) -> Params {
    t.map(wrap)
}

/// Backtracking along `step` until the residual norm drops below `current`.
fn line_search(curve: &Curve, t: &Params, step: &[f64; 4], current: f64) -> Option<(Params, f64)> {
    let mut lambda = 1.0;
    for _ in 0..LINE_SEARCH_HALVINGS {
        let trial = wrap_all([
            t[0] + lambda * step[0],
            t[1] + lambda * step[1],
            t[2] + lambda * step[2],
            t[3] + lambda * step[3],
        ]);
        let n = norm4(&square_residual(curve, &trial));
        if n < current {
            return Some((trial, n));
        }
        lambda *= 0.5;
    }
    None
}

/// Newton step `-J^+ F` through the SVD, dropping singular values below
/// `smax / max_condition`. The flag reports whether any were dropped.
fn newton_step(curve: &Curve, t: &Params, f: &[f64; 4], max_condition: f64) -> Option<([f64; 4], bool)> {
    let svd = residual_jacobian(curve, t).matrix.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) {
        return None;
    }
    let cut = smax / max_condition;
    let rhs = -Vector4::from_column_slice(f);
    let step = svd.solve(&rhs, cut).ok()?;
    Some(([step[0], step[1], step[2], step[3]], smin < cut))
}

/// Damped Newton from `seed` until the residual norm is below
/// `config.newton_tolerance`, followed by a few polishing steps.
///
/// Steps come from the truncated SVD of the Jacobian, so iterates can
/// still settle onto a continuum of roots (where the Jacobian is singular)
/// instead of stopping next to it.
pub fn newton_refine(
    curve: &Curve,
    seed: &Params,
    config: &SolveConfig,
) -> Result<NewtonSolution, NewtonFailure> {
    let mut t = wrap_all(*seed);
    let mut n = norm4(&square_residual(curve, &t));
    let fail = |kind, t, n| NewtonFailure {
        kind,
        last: t,
        residual_norm: n,
    };
    for iter in 0..=config.max_newton_iterations {
        if n < config.newton_tolerance {
            for _ in 0..POLISH_STEPS {
                if n == 0.0 {
                    break;
                }
                let f = square_residual(curve, &t);
                let Some((step, _)) = newton_step(curve, &t, &f, config.max_condition) else {
                    break;
                };
                match line_search(curve, &t, &step, n) {
                    Some((next, m)) if m < 0.5 * n => {
                        t = next;
                        n = m;
                    }
                    Some((next, m)) => {
                        t = next;
                        n = m;
                        break;
                    }
                    None => break,
                }
            }
            return Ok(NewtonSolution {
                params: t,
                residual_norm: n,
                iterations: iter,
            });
        }
        if iter == config.max_newton_iterations {
            break;
        }
        let f = square_residual(curve, &t);
        let Some((step, truncated)) = newton_step(curve, &t, &f, config.max_condition) else {
            return Err(fail(FailureKind::Singular, t, n));
        };
        match line_search(curve, &t, &step, n) {
            Some((next, m)) => {
                t = next;
                n = m;
            }
            None if truncated => return Err(fail(FailureKind::Singular, t, n)),
            None => return Err(fail(FailureKind::NoConvergence, t, n)),
        }
    }
    Err(fail(FailureKind::NoConvergence, t, n))
}

/// Gauss-Newton on the residual over the parameters not marked `fixed`.
pub fn pinned_gauss_newton(
    curve: &Curve,
    start: Params,
    fixed: [bool; 4],
    config: &SolveConfig,
) -> Option<NewtonSolution> {
    let free: Vec<usize> = (0..4).filter(|&i| !fixed[i]).collect();
    let mut t = start;
    let mut n = norm4(&square_residual(curve, &t));
    for iter in 0..=config.max_newton_iterations {
        if n < config.newton_tolerance || free.is_empty() || iter == config.max_newton_iterations {
            break;
        }
        let f = square_residual(curve, &t);
        let j = residual_jacobian(curve, &t).matrix;
        let jf = DMatrix::from_fn(4, free.len(), |r, c| j[(r, free[c])]);
        let svd = jf.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&-DVector::from_column_slice(&f), smax / config.max_condition)
            .ok()?;
        let mut full = [0.0; 4];
        for (c, &i) in free.iter().enumerate() {
            full[i] = step[c];
        }
        let (next, m) = line_search(curve, &t, &full, n)?;
        t = next;
        n = m;
    }
    (n < config.newton_tolerance).then_some(NewtonSolution {
        params: t,
        residual_norm: n,
        iterations: 0,
    })
}

/// Vertex/joint pairs closer than `radius`, nearest first.
pub(crate) fn snap_candidates(curve: &Curve, params: &Params, radius: f64) -> Vec<(usize, f64, f64)> {
    let mut out: Vec<(usize, f64, f64)> = Vec::new();
    for (i, &ti) in params.iter().enumerate() {
        for j in curve.joints() {
            if j.kind == JointKind::Smooth {
                continue;
            }
            let d = cyclic_distance(ti, j.t);
            if d < radius {
                out.push((i, j.t, d));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    out
}

/// Moves a root (or near-root) onto the corner or flat joints it sits
/// next to.
///
/// Near a flat joint the bump term is below double precision, so every
/// parameter in a small window around the joint solves the system to
/// working accuracy; the exact root is the one with the vertex on the joint,
/// where the bump vanishes identically. Near a corner the residual is only
/// piecewise smooth and Newton can stall beside the kink. In both cases the
/// nearest vertices are pinned to their joints one at a time and the rest
/// re-solved by Gauss-Newton; the first pinning that meets the tolerance
/// wins.
pub fn snap_to_joints(curve: &Curve, params: &Params, config: &SolveConfig) -> Option<NewtonSolution> {
    let candidates = snap_candidates(curve, params, config.snap_radius);
    let mut fixed = [false; 4];
    let mut pinned = *params;
    for (i, jt, _) in candidates {
        if fixed[i] {
            continue;
        }
        fixed[i] = true;
        pinned[i] = jt;
        if let Some(sol) = pinned_gauss_newton(curve, pinned, fixed, config) {
            return Some(sol);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::unit_circle;

    fn circle() -> Curve {
        Curve::new(unit_circle()).unwrap()
    }

    #[test]
    fn exact_root_is_a_fixed_point() {
        let seed = [0.0, 0.25, 0.5, 0.75];
        let sol = newton_refine(&circle(), &seed, &SolveConfig::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        for i in 0..4 {
            assert!(cyclic_distance(sol.params[i], seed[i]) < 1e-15);
        }
    }

    #[test]
    fn perturbed_seed_returns_to_family() {
        let c = circle();
        let perturbed = [0.02, 0.25, 0.52, 0.74];
        let sol = newton_refine(&c, &perturbed, &SolveConfig::default()).unwrap();
        assert!(sol.residual_norm < 1e-12);
        // Lands somewhere on the rotation family: consecutive gaps are quarters.
        for i in 0..4 {
            let gap = (sol.params[(i + 1) % 4] - sol.params[i]).rem_euclid(1.0);
            assert!((gap - 0.25).abs() < 1e-10, "{:?}", sol.params);
        }
    }

    #[test]
    fn degenerate_seed_stays_small() {
        // Seeds bunched together either fail or collapse onto a tiny square
        // that the side-length filter removes.
        let c = circle();
        let cfg = SolveConfig::default();
        if let Ok(sol) = newton_refine(&c, &[0.1, 0.1005, 0.101, 0.1015], &cfg) {
            let sq = super::super::Square::from_params(&c, sol.params, sol.residual_norm);
            assert!(sq.side_length < cfg.min_side_length);
        }
    }
}
