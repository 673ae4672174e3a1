//! Enumeration of inscribed squares.
//!
//! [`enumerate_squares`] seeds Newton's method from every cyclically ordered
//! quadruple of a uniform parameter grid, pins roots that sit on corner or
//! flat joints onto those joints, filters degenerate and unverifiable
//! solutions, merges duplicates and flags continuum families.
//! [`oracle_enumerate`] reaches the same set by an unrelated route and is
//! used to cross-check it.

mod newton;
mod oracle;
mod residual;
mod square;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use newton::{
    newton_refine, pinned_gauss_newton, snap_to_joints, FailureKind, NewtonFailure,
    NewtonSolution,
};
pub use oracle::{diagonal_residual, oracle_enumerate, DEFAULT_ORACLE_RESOLUTION};
pub use residual::{
    norm4, residual_from_points, residual_jacobian, square_residual, Params, ResidualJacobian,
};
pub use square::{
    canonical_key, deduplicate, largest_chain, match_square_sets, verify_square, Square,
    SquareKey,
};

use crate::curve::Curve;
use crate::error::{Error, Result};

/// Failed Newton runs whose residual is below this get a joint-pinning
/// retry.
const RESCUE_RESIDUAL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolveConfig {
    /// Seeds per parameter dimension.
    pub grid_resolution: usize,
    /// Residual norm a root must reach.
    pub newton_tolerance: f64,
    pub max_newton_iterations: usize,
    /// Squares closer than this in (center, side, angle) space are merged.
    pub dedup_tolerance: f64,
    /// Squares with shorter sides are discarded as degenerate.
    pub min_side_length: f64,
    /// Distance from the curve a reported vertex may have.
    pub vertex_tolerance: f64,
    /// Parameter window around a corner or flat joint inside which roots
    /// are pinned onto the joint.
    pub snap_radius: f64,
    /// Jacobian condition estimate at which Newton gives up.
    pub max_condition: f64,
    /// A family is suspected above `family_count_factor * grid_resolution`
    /// distinct squares...
    pub family_count_factor: usize,
    /// ...or when `family_chain_length` squares form a chain with links
    /// shorter than `family_link_factor * dedup_tolerance`.
    pub family_chain_length: usize,
    pub family_link_factor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            grid_resolution: 24,
            newton_tolerance: 1e-12,
            max_newton_iterations: 50,
            dedup_tolerance: 1e-6,
            min_side_length: 1e-2,
            vertex_tolerance: 1e-9,
            snap_radius: 0.02,
            max_condition: 1e12,
            family_count_factor: 4,
            family_chain_length: 10,
            family_link_factor: 10.0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 8 {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be at least 8, got {}",
                self.grid_resolution
            )));
        }
        let positive = [
            ("newtonTolerance", self.newton_tolerance),
            ("dedupTolerance", self.dedup_tolerance),
            ("minSideLength", self.min_side_length),
            ("vertexTolerance", self.vertex_tolerance),
            ("snapRadius", self.snap_radius),
            ("maxCondition", self.max_condition),
            ("familyLinkFactor", self.family_link_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_newton_iterations == 0 {
            return Err(Error::InvalidConfig("maxNewtonIterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveStats {
    pub seeds_tried: usize,
    /// Seeds that produced a root (directly or after joint pinning).
    pub converged: usize,
    /// Of those, how many needed joint pinning.
    pub snapped: usize,
    pub filtered_degenerate: usize,
    pub filtered_off_curve: usize,
    /// Roots surviving the filters, before deduplication.
    pub raw_solutions: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveReport {
    pub curve: String,
    pub config: SolveConfig,
    pub squares: Vec<Square>,
    pub family_suspected: bool,
    pub stats: SolveStats,
}

impl SolveReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One square per row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t1", "t2", "t3", "t4", "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4", "cx", "cy",
            "side", "residual",
        ])
        .map_err(csv_err)?;
        for sq in &self.squares {
            let mut row: Vec<String> = sq.params.iter().map(|v| v.to_string()).collect();
            for v in &sq.vertices {
                row.push(v.x.to_string());
                row.push(v.y.to_string());
            }
            row.push(sq.center.x.to_string());
            row.push(sq.center.y.to_string());
            row.push(sq.side_length.to_string());
            row.push(sq.residual_norm.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

enum SeedOutcome {
    Root { square: Square, snapped: bool },
    Degenerate,
    OffCurve,
    Failed,
}

/// Every grid quadruple `i < j < k < l` whose consecutive points (cyclically)
/// are at least `min_side_length` apart.
fn seeds(curve: &Curve, config: &SolveConfig) -> Vec<Params> {
    let g = config.grid_resolution;
    let pts: Vec<_> = (0..g).map(|i| curve.eval(i as f64 / g as f64)).collect();
    let far = |a: usize, b: usize| pts[a].distance(pts[b]) >= config.min_side_length;
    let mut out = Vec::new();
    for i in 0..g {
        for j in i + 1..g {
            if !far(i, j) {
                continue;
            }
            for k in j + 1..g {
                if !far(j, k) {
                    continue;
                }
                for l in k + 1..g {
                    if far(k, l) && far(l, i) {
                        out.push([i, j, k, l].map(|v| v as f64 / g as f64));
                    }
                }
            }
        }
    }
    out
}

fn solve_seed(curve: &Curve, seed: &Params, config: &SolveConfig) -> SeedOutcome {
    let (sol, snapped) = match newton_refine(curve, seed, config) {
        Ok(sol) => match snap_to_joints(curve, &sol.params, config) {
            Some(pinned) => (pinned, true),
            None => (sol, false),
        },
        Err(fail) if fail.residual_norm < RESCUE_RESIDUAL => {
            match snap_to_joints(curve, &fail.last, config) {
                Some(pinned) => (pinned, true),
                None => return SeedOutcome::Failed,
            }
        }
        Err(_) => return SeedOutcome::Failed,
    };
    let square = Square::from_params(curve, sol.params, sol.residual_norm);
    classify(curve, square, snapped, config)
}

fn classify(curve: &Curve, square: Square, snapped: bool, config: &SolveConfig) -> SeedOutcome {
    if square.side_length < config.min_side_length {
        return SeedOutcome::Degenerate;
    }
    if verify_square(curve, &square, config.vertex_tolerance).is_err() {
        return SeedOutcome::OffCurve;
    }
    SeedOutcome::Root { square, snapped }
}

/// Finds the squares inscribed in `curve`.
pub fn enumerate_squares(curve: &Curve, config: &SolveConfig) -> Result<SolveReport> {
    config.validate()?;
    let started = Instant::now();
    let seeds = seeds(curve, config);
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|s| solve_seed(curve, s, config))
        .collect();

    let mut stats = SolveStats {
        seeds_tried: seeds.len(),
        ..Default::default()
    };
    let mut raw = Vec::new();
    for outcome in outcomes {
        match outcome {
            SeedOutcome::Root { square, snapped } => {
                stats.converged += 1;
                stats.snapped += usize::from(snapped);
                raw.push(square);
            }
            SeedOutcome::Degenerate => {
                stats.converged += 1;
                stats.filtered_degenerate += 1;
            }
            SeedOutcome::OffCurve => {
                stats.converged += 1;
                stats.filtered_off_curve += 1;
            }
            SeedOutcome::Failed => {}
        }
    }
    stats.raw_solutions = raw.len();
    let squares = deduplicate(&raw, config.dedup_tolerance);
    let family_suspected = family_suspected(&squares, config);
    stats.wall_time = started.elapsed().as_secs_f64();
    Ok(SolveReport {
        curve: curve.name().to_string(),
        config: *config,
        squares,
        family_suspected,
        stats,
    })
}

/// Too many distinct squares, or a long chain of near-identical ones.
pub fn family_suspected(squares: &[Square], config: &SolveConfig) -> bool {
    squares.len() > config.family_count_factor * config.grid_resolution
        || largest_chain(squares, config.family_link_factor * config.dedup_tolerance)
            >= config.family_chain_length
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        let bad = SolveConfig {
            grid_resolution: 4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolveConfig {
            newton_tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_uses_camel_case() {
        let json = serde_json::to_value(SolveConfig::default()).unwrap();
        assert_eq!(json["gridResolution"], 24);
        let back: SolveConfig = serde_json::from_str(r#"{"gridResolution": 12}"#).unwrap();
        assert_eq!(back.grid_resolution, 12);
        assert_eq!(back.newton_tolerance, 1e-12);
    }
}
