use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use squarepeg::constructions::{build_smooth_two_square_with, max_convex_c, CRITICAL_BRACKET};
use squarepeg::reproduce::{run_criterion, Workbench, CRITERIA};
use squarepeg::solver::match_square_sets;
use squarepeg::{
    build_n_square, build_nonsmooth_two_square, critical_c, enumerate_squares,
    graph_locus_intersections, oracle_enumerate, unit_circle, ConstructionParams, Curve,
    CurveSpec, Segment, SolveConfig, SolveReport,
};

use crate::svg::{self, Scene};
use crate::{
    ConstructArgs, ConvexityArgs, CriticalArgs, FindArgs, Kind, RenderArgs, SolverArgs,
    VerifyArgs, EXIT_OK, EXIT_ORACLE_DISAGREES, EXIT_VERIFY_FAILED, GRID_ENV,
};

const ORACLE_MATCH: f64 = 1e-6;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn load_curve(path: &Path) -> Result<Curve> {
    let spec = CurveSpec::read(path).with_context(|| format!("reading {}", path.display()))?;
    Curve::new(spec).with_context(|| format!("invalid curve in {}", path.display()))
}

/// Flags override the environment, which overrides the defaults.
fn solve_config(args: &SolverArgs) -> Result<SolveConfig> {
    let mut config = SolveConfig::default();
    if let Ok(raw) = std::env::var(GRID_ENV) {
        config.grid_resolution = raw
            .trim()
            .parse()
            .with_context(|| format!("{GRID_ENV}={raw:?} is not a grid size"))?;
    }
    if let Some(g) = args.grid {
        config.grid_resolution = g;
    }
    if let Some(m) = args.min_side {
        config.min_side_length = m;
    }
    if let Some(t) = args.tol {
        config.newton_tolerance = t;
    }
    config.validate()?;
    Ok(config)
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(0) => bail!("--threads must be positive"),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(job)),
    }
}

fn n_square_params(args: &ConstructArgs) -> Result<ConstructionParams> {
    let mut params = match (&args.anchors, args.n) {
        (Some(anchors), n) => {
            if let Some(n) = n {
                if n != anchors.len() + 1 {
                    bail!("--n {n} needs {} anchors, got {}", n.saturating_sub(1), anchors.len());
                }
            }
            ConstructionParams {
                anchors: anchors.clone(),
                ..Default::default()
            }
        }
        (None, Some(n)) => ConstructionParams::evenly_spaced(n)?,
        (None, None) => bail!("nsquare needs --n or --anchors"),
    };
    params.c = args.c;
    params.a = args.a;
    Ok(params)
}

pub fn construct(args: &ConstructArgs) -> Result<u8> {
    if args.kind != Kind::Nsquare && (args.n.is_some() || args.anchors.is_some()) {
        bail!("--n and --anchors only apply to nsquare");
    }
    let spec = match args.kind {
        Kind::Circle => unit_circle(),
        Kind::Nonsmooth2 => build_nonsmooth_two_square(),
        Kind::Smooth2 => {
            let c = match args.c {
                Some(c) => c,
                None => critical_c(CRITICAL_BRACKET)?.c_star,
            };
            build_smooth_two_square_with(c, args.a)?
        }
        Kind::Nsquare => build_n_square(&n_square_params(args)?)?,
    };
    let curve = Curve::new(spec.clone())?;
    let mut summary = format!("{}: {} segments", curve.name(), curve.segments().len());
    if !curve.has_corners() {
        let (convex, min_k) = curve.is_convex(100_000)?;
        summary.push_str(&format!(", convex {convex} (min curvature {min_k:.6})"));
    }
    eprintln!("{summary}");
    emit(args.out.as_deref(), &spec.to_json()?)?;
    Ok(EXIT_OK)
}

pub fn find_squares(args: &FindArgs) -> Result<u8> {
    let curve = load_curve(&args.curve)?;
    let config = solve_config(&args.solver)?;
    let (report, oracle) = with_threads(args.solver.threads, || -> Result<_> {
        let report = enumerate_squares(&curve, &config)?;
        let oracle = if args.oracle {
            Some(oracle_enumerate(
                &curve,
                squarepeg::solver::DEFAULT_ORACLE_RESOLUTION,
                &config,
            )?)
        } else {
            None
        };
        Ok((report, oracle))
    })??;

    match args.out.as_deref() {
        Some(path) if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
            let file = fs::File::create(path)
                .with_context(|| format!("writing {}", path.display()))?;
            report.write_csv(file)?;
        }
        out => emit(out, &report.to_json()?)?,
    }
    eprintln!(
        "{}: {} squares{} ({:.2} s)",
        report.curve,
        report.squares.len(),
        if report.family_suspected { ", family suspected" } else { "" },
        report.stats.wall_time
    );

    if let Some(oracle) = oracle {
        match match_square_sets(&report.squares, &oracle) {
            Some(d) if d < ORACLE_MATCH => {
                eprintln!("oracle agrees ({} squares, worst distance {d:.2e})", oracle.len());
            }
            Some(d) => {
                eprintln!("oracle disagrees: worst distance {d:.2e}");
                return Ok(EXIT_ORACLE_DISAGREES);
            }
            None => {
                eprintln!(
                    "oracle disagrees: {} squares vs {}",
                    report.squares.len(),
                    oracle.len()
                );
                return Ok(EXIT_ORACLE_DISAGREES);
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn critical(args: &CriticalArgs) -> Result<u8> {
    let found = critical_c((args.low, args.high))?;
    let below = graph_locus_intersections(found.c_star - 0.01);
    let above = graph_locus_intersections(found.c_star + 0.01);
    eprintln!(
        "c* = {:.12} (crossings {} below, {} above)",
        found.c_star, below.count, above.count
    );
    emit_json(
        args.out.as_deref(),
        &json!({
            "cStar": found.c_star,
            "bracket": found.bracket,
            "tangencyX": found.tangency_x,
            "iterations": found.iterations,
            "crossingsBelow": below.count,
            "crossingsAbove": above.count,
        }),
    )?;
    Ok(EXIT_OK)
}

pub fn convexity(args: &ConvexityArgs) -> Result<u8> {
    let curve = load_curve(&args.curve)?;
    let (convex, min_k) = curve.is_convex(args.samples)?;
    let mut arcs = Vec::new();
    for seg in curve.segments() {
        if let Segment::PolarBumpArc(arc) = seg {
            arcs.push(json!({
                "u": arc.u,
                "v": arc.v,
                "c": arc.c,
                "maxConvexC": max_convex_c(arc.u, arc.v, arc.a)?,
            }));
        }
    }
    eprintln!("{}: convex {convex}, min curvature {min_k:.6}", curve.name());
    emit_json(
        args.out.as_deref(),
        &json!({
            "curve": curve.name(),
            "samples": args.samples,
            "convex": convex,
            "minCurvature": min_k,
            "arcs": arcs,
        }),
    )?;
    Ok(EXIT_OK)
}

pub fn render(args: &RenderArgs) -> Result<u8> {
    let curve = load_curve(&args.curve)?;
    let squares = match &args.squares {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let report = SolveReport::from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            if report.curve != curve.name() {
                eprintln!(
                    "warning: squares were computed for '{}', not '{}'",
                    report.curve,
                    curve.name()
                );
            }
            report.squares
        }
        None => Vec::new(),
    };
    let text = svg::render(&Scene {
        curve: &curve,
        squares: &squares,
        locus: args.locus,
    });
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn verify(args: &VerifyArgs) -> Result<u8> {
    let ids = args.criteria.clone().unwrap_or_else(|| CRITERIA.to_vec());
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.contains(id)) {
        bail!("no criterion {bad}");
    }
    let bench = Workbench::new(solve_config(&args.solver)?);
    let rows = with_threads(args.solver.threads, || {
        ids.iter()
            .map(|&id| {
                let row = run_criterion(id, &bench);
                println!("{row}");
                row
            })
            .collect::<Vec<_>>()
    })?;
    if let Some(path) = &args.out {
        emit_json(Some(path), &rows)?;
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("[{}] {}", r.id, r.name))
        .collect();
    if failed.is_empty() {
        println!("all {} criteria passed", rows.len());
        Ok(EXIT_OK)
    } else {
        println!("failed: {}", failed.join(", "));
        Ok(EXIT_VERIFY_FAILED)
    }
}
