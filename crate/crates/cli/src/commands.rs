use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ssdkit::catalog::{self, FnKind, SetKind};
use ssdkit::convex::{auto_dual_grid, conjugate as grid_conjugate, dual_grid_for, lsc_biconjugate_envelope, GridFn};
use ssdkit::fitzpatrick::{fitzpatrick_family_suite, FitzTriple};
use ssdkit::io::{self, LoadedSpace};
use ssdkit::monotone::{negative_alignment_with, AlignmentOptions, MonotoneSet};
use ssdkit::positivity::{PointSet, Projector};
use ssdkit::suites::{self, Suite, SuiteOptions, DEFAULT_SPACE};
use ssdkit::{GridSpec, Status, Summary, VerifyReport};

use crate::{Common, Format};

const SUMMARY: &str = "summary";

fn load_space(arg: Option<&str>) -> Result<Option<LoadedSpace>> {
    let Some(arg) = arg else { return Ok(None) };
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(Some(io::read_space(path).with_context(|| format!("reading space {arg}"))?));
    }
    Ok(Some(catalog::space(arg).with_context(|| format!("`{arg}` is neither a file nor a catalog space"))?))
}

fn space_or_default(common: &Common) -> Result<LoadedSpace> {
    match load_space(common.space.as_deref())? {
        Some(s) => Ok(s),
        None => Ok(catalog::space(DEFAULT_SPACE)?),
    }
}

fn default_grid(common: &Common, dim: usize) -> Result<GridSpec> {
    match &common.grid {
        Some(g) => Ok(g.clone()),
        None => Ok(GridSpec::cube(dim, -2.0, 2.0, 41)?),
    }
}

/// A CSV file, or a catalog function sampled on the grid.
fn load_function(arg: &str, space: &LoadedSpace, grid: &GridSpec, allow_nonconvex: bool) -> Result<GridFn> {
    let path = Path::new(arg);
    if path.is_file() {
        let f = if allow_nonconvex { io::read_any_grid_fn(path) } else { io::read_grid_fn(path) };
        return f.with_context(|| format!("reading function {arg}"));
    }
    let kind: FnKind = arg.parse().with_context(|| format!("`{arg}` is neither a file nor a catalog function"))?;
    Ok(kind.build(&space.space, grid)?)
}

fn load_set(arg: &str, grid: &GridSpec) -> Result<PointSet> {
    let path = Path::new(arg);
    if path.is_file() {
        return io::read_point_set(path).with_context(|| format!("reading set {arg}"));
    }
    let kind: SetKind = arg.parse().with_context(|| format!("`{arg}` is neither a file nor a catalog set"))?;
    Ok(kind.build(grid)?)
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_report(common: &Common, name: &str, report: &VerifyReport) -> Result<()> {
    write(&common.out, &format!("{name}.json"), &report.to_json()?)?;
    if common.format == Format::Csv {
        write(&common.out, &format!("{name}.csv"), &report.to_csv()?)?;
    }
    Ok(())
}

/// One line per suite, then one per failed check.
fn print_report(report: &VerifyReport) {
    println!(
        "{}: {} passed, {} failed, {} skipped",
        report.suite,
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skipped)
    );
    for c in report.failures() {
        println!("  FAIL {} residual {:e} tolerance {:e} witness {:?}", c.id, c.worst_residual, c.tolerance, c.witness);
    }
}

pub fn verify(common: &Common, suite: &str, lambda: Option<f64>) -> Result<bool> {
    let space = load_space(common.space.as_deref())?;
    let dim = space.as_ref().map_or(2, |s| s.space.dim());
    let reference = space.clone().map_or_else(|| catalog::space(DEFAULT_SPACE), Ok)?;
    let grid = default_grid(common, dim)?;
    let function = common.function.as_deref().map(|a| load_function(a, &reference, &grid, false)).transpose()?;
    let set = common.set.as_deref().map(|a| load_set(a, &grid)).transpose()?;
    let opts = SuiteOptions {
        seed: common.seed,
        grid: common.grid.clone(),
        tolerance: common.tol,
        lambda,
        space,
        function,
        set,
    };
    let reports = if suite == "all" {
        suites::run_all(&opts)?
    } else {
        vec![suite.parse::<Suite>()?.run(&opts)?]
    };
    let mut ok = true;
    for r in &reports {
        write_report(common, &r.suite, r)?;
        print_report(r);
        ok &= r.passed();
    }
    Ok(ok)
}

pub fn conjugate(common: &Common, dual_grid: Option<GridSpec>, biconjugate: bool) -> Result<bool> {
    let Some(arg) = common.function.as_deref() else { bail!("conjugate needs --fn") };
    let space = space_or_default(common)?;
    let f = load_function(arg, &space, &default_grid(common, space.space.dim())?, true)?;
    let dual_grid = match dual_grid {
        Some(g) => g,
        None => auto_dual_grid(&f)?,
    };
    let star = grid_conjugate(&f, &dual_grid)?;
    write(&common.out, "conjugate.csv", &io::grid_fn_to_csv(&star.fun)?)?;
    println!("conjugate on {} ({} points)", dual_grid.describe(), dual_grid.len());
    if biconjugate {
        let ff = lsc_biconjugate_envelope(&f)?;
        write(&common.out, "biconjugate.csv", &io::grid_fn_to_csv(&ff)?)?;
        println!("biconjugate on {}", f.grid().describe());
    }
    Ok(true)
}

pub fn fitzpatrick(common: &Common) -> Result<bool> {
    let Some(arg) = common.set.as_deref() else { bail!("fitzpatrick needs --set") };
    let space = space_or_default(common)?;
    let s = &space.space;
    let grid = default_grid(common, s.dim())?;
    let set = load_set(arg, &grid)?;
    let dual_grid = dual_grid_for(s, &grid, 0.5)?;
    let triple = FitzTriple::build(s, &set, &grid, &dual_grid)?;
    write(&common.out, "theta.csv", &io::grid_fn_to_csv(&triple.theta)?)?;
    write(&common.out, "phi.csv", &io::grid_fn_to_csv(&triple.phi)?)?;
    write(&common.out, "star_theta.csv", &io::grid_fn_to_csv(&triple.star_theta)?)?;
    let report = fitzpatrick_family_suite(s, &set, &grid, &dual_grid)?.with_seed(common.seed);
    write_report(common, "fitzpatrick", &report)?;
    print_report(&report);
    Ok(report.passed())
}

pub fn project(common: &Common, point: &[f64], epsilon: f64) -> Result<bool> {
    let space = space_or_default(common)?;
    let s = &space.space;
    let grid = match &common.grid {
        Some(g) => g.clone(),
        None => GridSpec::cube(s.dim(), -3.0, 3.0, 61)?,
    };
    let f = load_function(common.function.as_deref().unwrap_or("half-square"), &space, &grid, false)?;
    let trace = Projector::new(&f, s)?.project(point, epsilon)?;
    let rechecked = trace.recheck(&f, s);
    write(&common.out, "projection.json", &serde_json::to_string_pretty(&trace)?)?;
    println!(
        "limit {:?} after {} steps; distance {:e} bound {:e}; certificates {}",
        trace.limit,
        trace.certificates.len(),
        trace.achieved_distance,
        trace.distance_bound,
        if rechecked { "rechecked" } else { "FAILED recheck" }
    );
    Ok(rechecked)
}

pub fn align(common: &Common, x: &[f64], xstar: &[f64], alpha: f64, beta: f64) -> Result<bool> {
    let set = match common.set.as_deref() {
        Some(arg) if Path::new(arg).is_file() => io::read_monotone_set(Path::new(arg))?,
        Some(arg) => MonotoneSet::new(load_set(arg, &default_grid(common, 2 * x.len())?)?)?,
        None => MonotoneSet::new(SetKind::Diagonal.build(&GridSpec::cube(2, -2.0, 2.0, 81)?)?)?,
    };
    let opts = AlignmentOptions { seed: common.seed, ..Default::default() };
    let result = negative_alignment_with(&set, x, xstar, alpha, beta, &opts)?;
    write(&common.out, "alignment.json", &serde_json::to_string_pretty(&result)?)?;
    println!("omega {:e} rho {:e} sigma {:e} inner {:e}", result.omega, result.rho, result.sigma, result.inner);
    match result.ratios() {
        Ok(r) => println!("distance ratio {:e} cosine {:e}", r.distance_ratio, r.cosine),
        Err(e) => println!("ratios unavailable: {e}"),
    }
    print_report(&result.report);
    Ok(result.report.passed())
}

/// Reports are read in file-name order; the summary itself is skipped.
pub fn report(common: &Common) -> Result<bool> {
    let dir = &common.out;
    let mut paths: Vec<_> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .filter(|p| p.file_stem().is_some_and(|s| s != SUMMARY))
            .collect(),
        Err(_) => Vec::new(),
    };
    paths.sort();
    let mut reports = Vec::new();
    for p in &paths {
        let text = fs::read_to_string(p)?;
        // other JSON artifacts (projection, alignment) are not reports
        if let Ok(r) = serde_json::from_str::<VerifyReport>(&text) {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            reports.push((name, r));
        }
    }
    if reports.is_empty() {
        return Err(ssdkit::Error::MissingArtifacts(format!("no reports in {}", dir.display())).into());
    }
    let summary = Summary::build(&reports);
    write(dir, &format!("{SUMMARY}.json"), &serde_json::to_string_pretty(&summary)?)?;
    write(dir, &format!("{SUMMARY}.csv"), &summary.to_csv()?)?;
    println!(
        "{} reports, {} checks: {} passed, {} failed, {} skipped",
        reports.len(),
        summary.total,
        summary.passed,
        summary.failed,
        summary.skipped
    );
    Ok(summary.failed == 0)
}
