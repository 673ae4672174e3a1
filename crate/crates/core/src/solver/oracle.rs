//! Diagonal-pair oracle.
//!
//! For a pair `(t1, t3)` taken as one diagonal, the square is fixed: its
//! other two vertices are `m +/- rot90(d)` with `m` the midpoint and `d` the
//! half diagonal. The pair belongs to an inscribed square exactly when both
//! of those points lie on the curve, i.e. when their signed distances to the
//! curve vanish. The oracle scans a `resolution x resolution` grid of pairs,
//! polishes grid minima with a finite-difference Newton iteration on the two
//! signed distances, and recovers `t2`, `t4` by closest-point projection.
//! It shares no code with the residual system of the Newton enumerator
//! beyond curve evaluation, closest-point projection and the final
//! filtering/deduplication.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use super::newton::snap_candidates;
use super::square::{deduplicate, verify_square, Square};
use super::SolveConfig;
use crate::curve::{wrap, ClosestPoint, Curve};
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const DEFAULT_ORACLE_RESOLUTION: usize = 512;
const FD_STEP: f64 = 1e-7;
const RESCUE_RESIDUAL: f64 = 1e-3;

/// Signed distances of the two completing vertices for the diagonal
/// `(t1, t3)`, with their projections onto the curve.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalProbe {
    pub residual: [f64; 2],
    pub plus: ClosestPoint,
    pub minus: ClosestPoint,
}

impl DiagonalProbe {
    pub fn norm(&self) -> f64 {
        self.residual[0].hypot(self.residual[1])
    }
}

pub fn diagonal_residual(curve: &Curve, t1: f64, t3: f64) -> DiagonalProbe {
    let p1 = curve.eval(t1);
    let p3 = curve.eval(t3);
    let m = p1.midpoint(p3);
    let d = (p3 - p1) * 0.5;
    let (sp, plus) = curve.signed_distance(m + d.rot90());
    let (sm, minus) = curve.signed_distance(m - d.rot90());
    DiagonalProbe {
        residual: [sp, sm],
        plus,
        minus,
    }
}

fn square_from_probe(curve: &Curve, t1: f64, t3: f64, probe: &DiagonalProbe) -> Square {
    Square::from_params(curve, [t1, probe.plus.t, t3, probe.minus.t], probe.norm())
}

/// Finite-difference Newton on both signed distances over `(t1, t3)`.
fn polish(curve: &Curve, mut t1: f64, mut t3: f64, config: &SolveConfig) -> (f64, f64, DiagonalProbe) {
    let mut probe = diagonal_residual(curve, t1, t3);
    for _ in 0..config.max_newton_iterations {
        let n = probe.norm();
        if n < config.newton_tolerance {
            break;
        }
        let col = |dt1: f64, dt3: f64| {
            let a = diagonal_residual(curve, t1 + dt1, t3 + dt3).residual;
            let b = diagonal_residual(curve, t1 - dt1, t3 - dt3).residual;
            Vector2::new(a[0] - b[0], a[1] - b[1]) / (2.0 * FD_STEP)
        };
        let c1 = col(FD_STEP, 0.0);
        let c3 = col(0.0, FD_STEP);
        let j = Matrix2::from_columns(&[c1, c3]);
        let svd = j.svd(true, true);
        let cut = svd.singular_values.max() / config.max_condition;
        let Ok(step) = svd.solve(&-Vector2::from(probe.residual), cut) else {
            break;
        };
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let (a, b) = (wrap(t1 + lambda * step[0]), wrap(t3 + lambda * step[1]));
            let trial = diagonal_residual(curve, a, b);
            if trial.norm() < n {
                t1 = a;
                t3 = b;
                probe = trial;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (t1, t3, probe)
}

/// With `t1` pinned, least squares over `t3` alone.
fn polish_pinned(curve: &Curve, t1: f64, mut t3: f64, config: &SolveConfig) -> (f64, DiagonalProbe) {
    let mut probe = diagonal_residual(curve, t1, t3);
    for _ in 0..config.max_newton_iterations {
        let n = probe.norm();
        if n < config.newton_tolerance {
            break;
        }
        let a = diagonal_residual(curve, t1, t3 + FD_STEP).residual;
        let b = diagonal_residual(curve, t1, t3 - FD_STEP).residual;
        let g = [(a[0] - b[0]) / (2.0 * FD_STEP), (a[1] - b[1]) / (2.0 * FD_STEP)];
        let gg = g[0] * g[0] + g[1] * g[1];
        if !(gg > 0.0) {
            break;
        }
        let step = -(g[0] * probe.residual[0] + g[1] * probe.residual[1]) / gg;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let b = wrap(t3 + lambda * step);
            let trial = diagonal_residual(curve, t1, b);
            if trial.norm() < n {
                t3 = b;
                probe = trial;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (t3, probe)
}

/// Pins a vertex near a corner or flat joint onto it, treating it as `p1`
/// and re-solving for the opposite vertex.
fn snap(curve: &Curve, params: &[f64; 4], config: &SolveConfig) -> Option<Square> {
    for (v, jt, _) in snap_candidates(curve, params, config.snap_radius) {
        let (t3, probe) = polish_pinned(curve, jt, params[(v + 2) % 4], config);
        if probe.norm() < config.newton_tolerance {
            return Some(square_from_probe(curve, jt, t3, &probe));
        }
    }
    None
}

fn solve_candidate(curve: &Curve, t1: f64, t3: f64, config: &SolveConfig) -> Option<Square> {
    let (t1, t3, probe) = polish(curve, t1, t3, config);
    let n = probe.norm();
    if n >= RESCUE_RESIDUAL {
        return None;
    }
    let params = [t1, probe.plus.t, t3, probe.minus.t];
    let square = match snap(curve, &params, config) {
        Some(sq) => sq,
        None if n < config.newton_tolerance => square_from_probe(curve, t1, t3, &probe),
        None => return None,
    };
    if square.side_length < config.min_side_length
        || verify_square(curve, &square, config.vertex_tolerance).is_err()
    {
        return None;
    }
    Some(square)
}

/// Enumerates inscribed squares by the diagonal-pair method.
pub fn oracle_enumerate(curve: &Curve, resolution: usize, config: &SolveConfig) -> Result<Vec<Square>> {
    if resolution < 256 {
        return Err(Error::InvalidConfig(format!(
            "oracle resolution must be at least 256, got {resolution}"
        )));
    }
    config.validate()?;
    let n = resolution;
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let pts: Vec<Point> = ts.iter().map(|&t| curve.eval(t)).collect();
    let min_diagonal = config.min_side_length * std::f64::consts::SQRT_2;

    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j <= i || pts[i].distance(pts[j]) < min_diagonal {
                        f64::INFINITY
                    } else {
                        diagonal_residual(curve, ts[i], ts[j]).norm()
                    }
                })
                .collect()
        })
        .collect();
    // (t1, t3) and (t3, t1) swap the completing vertices, so the grid is
    // symmetric.
    let grid = |i: usize, j: usize| {
        let (i, j) = (i % n, j % n);
        if i < j {
            upper[i][j]
        } else {
            upper[j][i]
        }
    };

    let threshold = 4.0 * curve.approximate_length() / n as f64;
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = upper[i][j];
            if !(v < threshold) {
                continue;
            }
            let is_min = (0..3).all(|di| {
                (0..3).all(|dj| (di == 1 && dj == 1) || v <= grid(i + n + di - 1, j + n + dj - 1))
            });
            if is_min {
                candidates.push((ts[i], ts[j]));
            }
        }
    }

    let found: Vec<Square> = candidates
        .par_iter()
        .filter_map(|&(t1, t3)| solve_candidate(curve, t1, t3, config))
        .collect();
    Ok(deduplicate(&found, config.dedup_tolerance))
}
