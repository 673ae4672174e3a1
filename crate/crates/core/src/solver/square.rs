//! Found squares, their canonical labelling and key, deduplication, family
//! detection, and the post-hoc verifier.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::residual::Params;
use crate::curve::{wrap, Curve};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Square {
    pub params: Params,
    pub vertices: [Point; 4],
    pub center: Point,
    /// Half of the diagonal from vertex 3 to vertex 1.
    pub half_diagonal: Point,
    pub side_length: f64,
    pub residual_norm: f64,
}

/// The eight relabellings (four rotations, each optionally reversed) of a
/// cyclic vertex order.
const RELABELINGS: [[usize; 4]; 8] = [
    [0, 1, 2, 3],
    [1, 2, 3, 0],
    [2, 3, 0, 1],
    [3, 0, 1, 2],
    [3, 2, 1, 0],
    [0, 3, 2, 1],
    [1, 0, 3, 2],
    [2, 1, 0, 3],
];

impl Square {
    /// Builds the square for the given parameters, relabelled so that the
    /// parameter tuple is lexicographically smallest among its eight
    /// equivalent labellings.
    pub fn from_params(curve: &Curve, params: Params, residual_norm: f64) -> Self {
        let params = params.map(wrap);
        let best = RELABELINGS
            .iter()
            .map(|perm| perm.map(|i| params[i]))
            .min_by(|a, b| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(params);
        Self::from_vertices(best, best.map(|t| curve.eval(t)), residual_norm)
    }

    pub fn from_vertices(params: Params, vertices: [Point; 4], residual_norm: f64) -> Self {
        let center = Point::new(
            vertices.iter().map(|p| p.x).sum::<f64>() / 4.0,
            vertices.iter().map(|p| p.y).sum::<f64>() / 4.0,
        );
        let side_length = (0..4)
            .map(|i| vertices[i].distance(vertices[(i + 1) % 4]))
            .sum::<f64>()
            / 4.0;
        Square {
            params,
            vertices,
            center,
            half_diagonal: (vertices[0] - vertices[2]) * 0.5,
            side_length,
            residual_norm,
        }
    }

    /// Direction of a diagonal, reduced modulo a quarter turn.
    pub fn diagonal_angle(&self) -> f64 {
        let a = self.half_diagonal.angle().rem_euclid(FRAC_PI_2);
        if a >= FRAC_PI_2 {
            0.0
        } else {
            a
        }
    }

    /// Distance in (center, side, angle) space; the angle difference is
    /// taken modulo a quarter turn.
    pub fn key_distance(&self, other: &Square) -> f64 {
        let da = (self.diagonal_angle() - other.diagonal_angle()).abs();
        let da = da.min(FRAC_PI_2 - da);
        (self.center.x - other.center.x)
            .abs()
            .max((self.center.y - other.center.y).abs())
            .max((self.side_length - other.side_length).abs())
            .max(da)
    }

    /// Hausdorff distance between the two vertex sets.
    pub fn hausdorff(&self, other: &Square) -> f64 {
        let one_way = |a: &Square, b: &Square| {
            a.vertices
                .iter()
                .map(|p| {
                    b.vertices
                        .iter()
                        .map(|q| p.distance(*q))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(self, other).max(one_way(other, self))
    }
}

/// Grid cell of a square in (center, side, angle) space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SquareKey {
    pub cx: i64,
    pub cy: i64,
    pub side: i64,
    pub angle: i64,
}

/// Key invariant under the eight relabellings of the same geometric square.
pub fn canonical_key(square: &Square, tolerance: f64) -> SquareKey {
    let q = |v: f64| (v / tolerance).round() as i64;
    let turns = q(FRAC_PI_2).max(1);
    SquareKey {
        cx: q(square.center.x),
        cy: q(square.center.y),
        side: q(square.side_length),
        angle: q(square.diagonal_angle()).rem_euclid(turns),
    }
}

/// Merges squares closer than `tolerance` in key space, keeping the member
/// with the smallest residual, and sorts the survivors by key.
pub fn deduplicate(squares: &[Square], tolerance: f64) -> Vec<Square> {
    let mut reps: Vec<Square> = Vec::new();
    for sq in squares {
        match reps
            .iter_mut()
            .find(|r| r.key_distance(sq) <= tolerance)
        {
            Some(r) => {
                if sq.residual_norm < r.residual_norm {
                    *r = *sq;
                }
            }
            None => reps.push(*sq),
        }
    }
    sort_canonical(&mut reps, tolerance);
    reps
}

pub fn sort_canonical(squares: &mut [Square], tolerance: f64) {
    squares.sort_by(|a, b| {
        canonical_key(a, tolerance)
            .cmp(&canonical_key(b, tolerance))
            .then(a.params[0].total_cmp(&b.params[0]))
    });
}

/// Size of the largest single-linkage cluster with links shorter than
/// `link` in key space.
pub fn largest_chain(squares: &[Square], link: f64) -> usize {
    let n = squares.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut i = i;
        while parent[i] != r {
            let next = parent[i];
            parent[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if squares[i].key_distance(&squares[j]) < link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sizes[r] += 1;
    }
    sizes.into_iter().max().unwrap_or(0)
}

/// Pairs the two sets one-to-one by nearest vertex-set Hausdorff distance.
/// Returns the worst matched distance, or `None` when the sizes differ.
pub fn match_square_sets(a: &[Square], b: &[Square]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for sq in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, other)| (j, sq.hausdorff(other)))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[j] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

/// Independent re-check of a reported square: every vertex within
/// `vertex_tolerance` of the curve (by closest-point projection), four equal
/// sides, and equal, perpendicular, mutually bisecting diagonals, all to
/// `1e-8` relative.
pub fn verify_square(curve: &Curve, sq: &Square, vertex_tolerance: f64) -> Result<(), String> {
    const REL: f64 = 1e-8;
    for (i, v) in sq.vertices.iter().enumerate() {
        let d = curve.closest_point(*v).distance;
        if !(d < vertex_tolerance) {
            return Err(format!("vertex {i} is {d:e} from the curve"));
        }
    }
    let v = &sq.vertices;
    let sides: Vec<f64> = (0..4).map(|i| v[i].distance(v[(i + 1) % 4])).collect();
    let mean = sides.iter().sum::<f64>() / 4.0;
    if !(mean > 0.0) {
        return Err("zero-size square".into());
    }
    if sides.iter().any(|s| (s - mean).abs() > REL * mean) {
        return Err(format!("unequal sides {sides:?}"));
    }
    let d1 = v[0] - v[2];
    let d2 = v[1] - v[3];
    if (d1.norm() - d2.norm()).abs() > REL * mean {
        return Err("unequal diagonals".into());
    }
    if d1.dot(d2).abs() > REL * mean * mean {
        return Err("diagonals not perpendicular".into());
    }
    if v[0].midpoint(v[2]).distance(v[1].midpoint(v[3])) > REL * mean {
        return Err("diagonals do not bisect each other".into());
    }
    Ok(())
}
