//! Named verification suites over the built-in catalog.
//!
//! Every suite runs on catalog defaults; the optional inputs in
//! [`SuiteOptions`] replace the defaults where a suite consumes them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::{self, FnKind, SetKind};
use crate::convex::{dual_grid_for, is_mas, is_vz, lsc_biconjugate_envelope, rockafellar_sum_identity, ClosedForm, GridFn};
use crate::dual::{
    certify_density, compatibility_checks, density_check, dual_norm_check, gap_duality_identity, make_dual,
    vz_mas_equivalence, DensityCertificate, DualSsd,
};
use crate::error::{Error, Result};
use crate::fitzpatrick::{fitzpatrick_family_suite, sandwich_suite, sigma_minorant_test, star_theta_gap, FitzTriple};
use crate::grid::GridSpec;
use crate::io::LoadedSpace;
use crate::monotone::{distance_chain_check, mf_set, monotone_battery, negative_alignment, projection_closure_check, MonotoneSet};
use crate::positivity::{
    dense_set_suite, dist_bounds_check, is_maximally_q_positive, is_q_positive, is_q_positive_with, p_dense_check, p_set,
    q_gap_bound_check, touching_check, PointSet, Projector,
};
use crate::report::{Check, VerifyReport};
use crate::ssd::{check_banach_ssd, lipschitz_checks, random_pairs, Probe, SsdSpace};
use crate::tol;

/// The space most suites default to: swap pairing with ‖·‖₂,₁.
pub const DEFAULT_SPACE: &str = "product-two-1";

/// Inputs shared by all suites.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Replaces the suite's primal grid.
    pub grid: Option<GridSpec>,
    /// Replaces the single configurable tolerance of suites that have one.
    pub tolerance: Option<f64>,
    /// Helix pitch.
    pub lambda: Option<f64>,
    pub space: Option<LoadedSpace>,
    pub function: Option<GridFn>,
    pub set: Option<PointSet>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: tol::DEFAULT_SEED, grid: None, tolerance: None, lambda: None, space: None, function: None, set: None }
    }
}

impl SuiteOptions {
    fn space_or(&self, name: &str) -> Result<LoadedSpace> {
        match &self.space {
            Some(s) => Ok(s.clone()),
            None => catalog::space(name),
        }
    }

    fn grid_or(&self, fallback: Result<GridSpec>) -> Result<GridSpec> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => fallback,
        }
    }

    /// A caller function must live on the suite's grid.
    fn function_or(&self, kind: FnKind, space: &SsdSpace, grid: &GridSpec) -> Result<GridFn> {
        match &self.function {
            Some(f) if f.grid() != grid => Err(Error::GridMismatch),
            Some(f) => Ok(f.clone()),
            None => kind.build(space, grid),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    SsdAxioms,
    QGapBound,
    Helix,
    DiagonalHalfSquare,
    FitzpatrickFamily,
    Sandwich,
    DenseSets,
    DualStructure,
    GapIdentity,
    VzMas,
    Representability,
    Alignment,
    DistanceChain,
    FenchelMoreau,
}

impl Suite {
    pub const ALL: [Suite; 14] = [
        Suite::SsdAxioms,
        Suite::QGapBound,
        Suite::Helix,
        Suite::DiagonalHalfSquare,
        Suite::FitzpatrickFamily,
        Suite::Sandwich,
        Suite::DenseSets,
        Suite::DualStructure,
        Suite::GapIdentity,
        Suite::VzMas,
        Suite::Representability,
        Suite::Alignment,
        Suite::DistanceChain,
        Suite::FenchelMoreau,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SsdAxioms => "ssd-axioms",
            Suite::QGapBound => "q-gap-bound",
            Suite::Helix => "helix",
            Suite::DiagonalHalfSquare => "diagonal-half-square",
            Suite::FitzpatrickFamily => "fitzpatrick-family",
            Suite::Sandwich => "sandwich",
            Suite::DenseSets => "dense-sets",
            Suite::DualStructure => "dual-structure",
            Suite::GapIdentity => "gap-identity",
            Suite::VzMas => "vz-mas",
            Suite::Representability => "representability",
            Suite::Alignment => "alignment",
            Suite::DistanceChain => "distance-chain",
            Suite::FenchelMoreau => "fenchel-moreau",
        }
    }

    pub fn run(self, opts: &SuiteOptions) -> Result<VerifyReport> {
        let start = Instant::now();
        let mut report = match self {
            Suite::SsdAxioms => ssd_axioms(opts),
            Suite::QGapBound => q_gap_bound(opts),
            Suite::Helix => helix(opts),
            Suite::DiagonalHalfSquare => diagonal_half_square(opts),
            Suite::FitzpatrickFamily => fitzpatrick_family(opts),
            Suite::Sandwich => sandwich(opts),
            Suite::DenseSets => dense_sets(opts),
            Suite::DualStructure => dual_structure(opts),
            Suite::GapIdentity => gap_identity(opts),
            Suite::VzMas => vz_mas(opts),
            Suite::Representability => representability(opts),
            Suite::Alignment => alignment(opts),
            Suite::DistanceChain => distance_chain(opts),
            Suite::FenchelMoreau => fenchel_moreau(opts),
        }?;
        report.suite = self.name().to_string();
        Ok(report.with_seed(opts.seed).timed(start))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

/// Run every suite, concurrently, reports in `Suite::ALL` order.
pub fn run_all(opts: &SuiteOptions) -> Result<Vec<VerifyReport>> {
    Suite::ALL.par_iter().map(|s| s.run(opts)).collect()
}

fn dual_of(loaded: &LoadedSpace) -> Result<DualSsd> {
    match &loaded.dual {
        Some(d) => Ok(d.clone()),
        None => make_dual(&loaded.space),
    }
}

fn small_certificate(space: &SsdSpace, dual: &DualSsd) -> Result<DensityCertificate> {
    let g = GridSpec::cube(space.dim(), -2.0, 2.0, 11)?;
    certify_density(space, dual, &g, &dual_grid_for(space, &g, 0.5)?)
}

/// A check that passes exactly when `report` has a failure, carrying the
/// first failure's witness.
fn expect_failure(id: &str, anchor: &str, report: &VerifyReport) -> Check {
    let failed = report.failures().next();
    let check = Check::new(id, anchor).verdict(failed.is_some(), failed.map_or(0.0, |c| c.worst_residual), 0.0);
    match failed {
        Some(c) => check.witness(c.witness.clone()).note(format!("expected failure of {}", c.id)),
        None => check.note("no failure observed"),
    }
}

fn flag(id: &str, anchor: &str, ok: bool, note: impl Into<String>) -> Check {
    Check::new(id, anchor).verdict(ok, if ok { 0.0 } else { 1.0 }, 0.0).note(note)
}

fn ssd_axioms(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("");
    let spaces = match &opts.space {
        Some(s) => vec![s.space.clone()],
        None => catalog::space_names().iter().map(|n| catalog::space(n).map(|l| l.space)).collect::<Result<_>>()?,
    };
    for s in &spaces {
        let probe = match s.norm_spec().weight_matrix(s.dim()) {
            Some(_) => Probe::Analytic,
            None => Probe::Sampled(opts.grid_or(GridSpec::cube(s.dim(), -2.0, 2.0, 41))?),
        };
        report.absorb(s.label(), check_banach_ssd(s, &probe)?);
    }
    let s = opts.space_or(DEFAULT_SPACE)?.space;
    report.absorb("lipschitz", lipschitz_checks(&s, &random_pairs(s.dim(), 200, opts.seed, 1.0))?);
    Ok(report)
}

fn q_gap_bound(opts: &SuiteOptions) -> Result<VerifyReport> {
    let s = opts.space_or(DEFAULT_SPACE)?.space;
    let g = opts.grid_or(GridSpec::cube(s.dim(), -2.0, 2.0, 21))?;
    let f = opts.function_or(FnKind::HalfSquare, &s, &g)?;
    let mut report = VerifyReport::new("");
    report.set_grid(&g);
    report.absorb("", q_gap_bound_check(&f, &s, opts.seed)?);
    report.absorb("", touching_check(&f, &s)?);
    Ok(report)
}

fn helix(opts: &SuiteOptions) -> Result<VerifyReport> {
    let s = opts.space_or("swap3")?.space;
    let set = match &opts.set {
        Some(p) => p.clone(),
        None => SetKind::Helix { lambda: opts.lambda.unwrap_or(1.0), samples: 200 }.build(&GridSpec::cube(1, 0.0, 1.0, 2)?)?,
    };
    let mut report = VerifyReport::new("");
    let r = match opts.tolerance {
        Some(t) => is_q_positive_with(&s, &set, t)?,
        None => is_q_positive(&s, &set)?,
    };
    report.absorb(set.label(), r);
    if opts.set.is_none() && opts.space.is_none() {
        let line = SetKind::Line.build(&GridSpec::cube(1, 0.0, 1.0, 2)?)?;
        report.absorb("line", is_q_positive(&s, &line)?);
    }
    Ok(report)
}

fn diagonal_half_square(opts: &SuiteOptions) -> Result<VerifyReport> {
    let s = opts.space_or(DEFAULT_SPACE)?.space;
    let g = opts.grid_or(GridSpec::cube(2, -3.0, 3.0, 61))?;
    let f = opts.function_or(FnKind::HalfSquare, &s, &g)?;
    let mut report = VerifyReport::new("");
    report.set_grid(&g);

    let mut worst = (0.0_f64, Vec::new());
    for (b, v) in g.coords().chunks(2).zip(f.values()) {
        let err = (v - s.q(b) - 0.5 * (b[0] - b[1]).powi(2)).abs();
        if err > worst.0 || worst.1.is_empty() {
            worst = (err, b.to_vec());
        }
    }
    report.push(
        Check::new("gap-closed-form", "f - q equals half the squared difference of coordinates")
            .verdict(worst.0 <= tol::CLOSED_FORM, worst.0, tol::CLOSED_FORM)
            .witness(vec![worst.1]),
    );
    if let Some(a) = p_set(&f, &s)? {
        report.push(flag(
            "p-set-is-diagonal",
            "P(f) is the diagonal",
            a.iter().all(|b| (b[0] - b[1]).abs() <= tol::EXACT),
            format!("{} points", a.len()),
        ));
    }
    report.absorb("", dist_bounds_check(&f, &s, &g.coarsened(2)?)?);
    report.absorb("", touching_check(&f, &s)?);
    report.absorb("", is_vz(&f, &s)?);
    report.absorb("", is_mas(&f, &s, s.pairing_matrix(), &dual_grid_for(&s, &g, 0.5)?)?);

    // projection iteration from random starts in the middle half of the box
    let proj = Projector::new(&f, &s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lo, hi) = (0.5 * g.lower()[0], 0.5 * g.upper()[0]);
    let slack = 2.0 * g.max_spacing();
    let mut rechecked = true;
    let mut excess = (f64::NEG_INFINITY, Vec::new());
    for _ in 0..50 {
        let c = vec![rng.random_range(lo..hi), rng.random_range(lo..hi)];
        let t = proj.project(&c, 0.5)?;
        rechecked &= t.recheck(&f, &s);
        let e = t.achieved_distance - t.distance_bound - slack;
        if e > excess.0 {
            excess = (e, c);
        }
    }
    report.push(flag("projection-certificates", "every projection iterate meets its certificate on recheck", rechecked, "50 starts"));
    report.push(
        Check::new("projection-distance-bound", "final projection distance within the epsilon bound")
            .verdict(excess.0 <= 0.0, excess.0.max(0.0), slack)
            .witness(vec![excess.1])
            .note("tolerance is two grid cells"),
    );
    Ok(report)
}

fn fitzpatrick_family(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("");
    if let (Some(loaded), Some(set)) = (&opts.space, &opts.set) {
        let g = opts.grid_or(GridSpec::cube(loaded.space.dim(), -2.0, 2.0, 21))?;
        let dg = dual_grid_for(&loaded.space, &g, 0.5)?;
        report.absorb(set.label(), fitzpatrick_family_suite(&loaded.space, set, &g, &dg)?);
        return Ok(report);
    }
    let s = catalog::space(DEFAULT_SPACE)?.space;
    let g = opts.grid_or(GridSpec::cube(2, -2.0, 2.0, 41))?;
    let dg = dual_grid_for(&s, &g, 0.5)?;
    for kind in [SetKind::Diagonal, SetKind::Singleton] {
        let set = kind.build(&g)?;
        report.absorb(&kind.to_string(), fitzpatrick_family_suite(&s, &set, &g, &dg)?);
    }
    let s3 = catalog::space("swap3")?.space;
    let g3 = GridSpec::new(vec![-1.5, -1.5, -10.0], vec![1.5, 1.5, 10.0], vec![13, 13, 41])?;
    let helix = SetKind::Helix { lambda: 1.0, samples: 200 }.build(&g3)?;
    report.absorb("helix", fitzpatrick_family_suite(&s3, &helix, &g3, &dual_grid_for(&s3, &g3, 0.5)?)?);

    let zero = catalog::space("zero")?.space;
    let gz = GridSpec::cube(2, -2.0, 2.0, 21)?;
    let pair = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], "pair")?;
    let (gap, at) = star_theta_gap(&zero, &pair, &gz, &dual_grid_for(&zero, &gz, 0.5)?)?;
    report.push(
        Check::new("zero-pairing-separation", "star-Theta exceeds the intrinsic conjugate of Phi by at least 1/2 under the zero pairing")
            .verdict(gap >= 0.5, gap, 0.5)
            .witness(vec![at]),
    );
    Ok(report)
}

fn sandwich(opts: &SuiteOptions) -> Result<VerifyReport> {
    let s = opts.space_or(DEFAULT_SPACE)?.space;
    let g = opts.grid_or(GridSpec::cube(2, -2.0, 2.0, 41))?;
    let dg = dual_grid_for(&s, &g, 0.5)?;
    let f = opts.function_or(FnKind::HalfSquare, &s, &g)?;
    let a = p_set(&f, &s)?.ok_or_else(|| Error::PreconditionFailed("P(f) is empty".into()))?;
    let triple = FitzTriple::build(&s, &a, &g, &dg)?;
    let mut report = VerifyReport::new("");
    report.absorb("phi", sandwich_suite(&s, &f, Some(&triple.phi), &dg)?);
    report.absorb("minorant", sigma_minorant_test(&s, &a, &triple.phi, &dg)?);
    Ok(report)
}

fn dense_sets(opts: &SuiteOptions) -> Result<VerifyReport> {
    let s = opts.space_or(DEFAULT_SPACE)?.space;
    let g = opts.grid_or(GridSpec::cube(2, -2.0, 2.0, 41))?;
    let h = opts.function_or(FnKind::HalfSquare, &s, &g)?;
    let set = match &opts.set {
        Some(p) => p.clone(),
        None => SetKind::Diagonal.build(&g)?,
    };
    let mut report = VerifyReport::new("");
    report.absorb(set.label(), dense_set_suite(&s, &set, &h)?);
    report.absorb(set.label(), p_dense_check(&s, &set, &g)?);
    if opts.set.is_none() {
        let origin = SetKind::Singleton.build(&g)?;
        report.push(expect_failure("singleton-not-p-dense", "a singleton is not p-dense", &p_dense_check(&s, &origin, &g)?));
        report.push(expect_failure(
            "singleton-not-maximal",
            "a singleton is not maximally q-positive",
            &is_maximally_q_positive(&s, &origin, &g)?,
        ));
    }
    Ok(report)
}

fn dual_structure(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("");
    let names = match &opts.space {
        Some(_) => vec![String::new()],
        None => catalog::product_space_names(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples: Vec<Vec<f64>> = (0..20).map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    for name in &names {
        let loaded = if name.is_empty() { opts.space_or(DEFAULT_SPACE)? } else { catalog::space(name)? };
        let s = &loaded.space;
        let dual = dual_of(&loaded)?;
        let prefix = s.label().to_string();
        report.absorb(&prefix, compatibility_checks(s, &dual, &random_pairs(s.dim(), 200, opts.seed, 1.0))?);
        if s.dim() == 2 {
            report.absorb(&prefix, dual_norm_check(s, &dual, &samples, opts.seed)?);
        }
        let g = GridSpec::cube(s.dim(), -2.0, 2.0, 11)?;
        report.absorb(&prefix, density_check(s, &dual, &g, &dual_grid_for(s, &g, 0.5)?)?);
    }
    if opts.space.is_none() {
        let scaled = catalog::space("scaled-product")?.space;
        let (ok, value, witness) = match make_dual(&scaled) {
            Err(Error::NoDual { witness, value }) => ((value + 0.75).abs() <= tol::EXACT, value, witness),
            _ => (false, f64::NAN, Vec::new()),
        };
        report.push(
            Check::new("scaled-norm-has-no-dual", "doubling the product norm leaves no dual with nonnegative dual p")
                .verdict(ok, (value + 0.75).abs(), tol::EXACT)
                .witness(vec![witness])
                .note(format!("dual p at the witness {value}")),
        );
        let zero = catalog::space("zero")?.space;
        report.push(flag(
            "zero-pairing-singular",
            "the zero pairing has no dual pairing",
            matches!(make_dual(&zero), Err(Error::SingularPairing)),
            "",
        ));
    }
    Ok(report)
}

fn gap_identity(opts: &SuiteOptions) -> Result<VerifyReport> {
    let loaded = opts.space_or(DEFAULT_SPACE)?;
    let s = &loaded.space;
    let dual = dual_of(&loaded)?;
    let g = opts.grid_or(GridSpec::cube(2, -3.0, 3.0, 61))?;
    let c_grid = GridSpec::new(
        g.lower().iter().map(|v| 0.5 * v).collect(),
        g.upper().iter().map(|v| 0.5 * v).collect(),
        g.points().iter().map(|n| n / 4 + 1).collect(),
    )?;
    let dg = dual_grid_for(s, &g, 0.5)?;
    let fs = match &opts.function {
        Some(_) => vec![opts.function_or(FnKind::HalfSquare, s, &g)?],
        None => vec![FnKind::HalfSquare.build(s, &g)?, FnKind::PhiDiagonal.build(s, &g)?],
    };
    let mut report = VerifyReport::new("");
    report.set_grid(&g);
    for f in &fs {
        report.absorb(f.label(), gap_duality_identity(s, &dual, f, &c_grid, &dg, opts.tolerance)?.report);
    }
    Ok(report)
}

fn vz_mas(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("");
    let g = opts.grid_or(GridSpec::cube(2, -2.0, 2.0, 41))?;
    if let Some(f) = &opts.function {
        let loaded = opts.space_or(DEFAULT_SPACE)?;
        let dual = dual_of(&loaded)?;
        let cert = small_certificate(&loaded.space, &dual)?;
        let v = vz_mas_equivalence(&loaded.space, &dual, f, &dual_grid_for(&loaded.space, f.grid(), 0.5)?, &cert)?;
        report.absorb(f.label(), v.report);
        return Ok(report);
    }
    let kinds = [FnKind::HalfSquare, FnKind::HalfSquarePlusOne, FnKind::PhiDiagonal, FnKind::StarThetaDiagonal];
    let expected = [true, false, true, true];
    let names = catalog::product_space_names();
    let rows: Vec<(String, Vec<(bool, VerifyReport)>)> = names
        .par_iter()
        .map(|name| {
            let loaded = catalog::space(name)?;
            let s = &loaded.space;
            let dual = dual_of(&loaded)?;
            let cert = small_certificate(s, &dual)?;
            let dg = dual_grid_for(s, &g, 0.5)?;
            let row = kinds
                .iter()
                .map(|k| {
                    let v = vz_mas_equivalence(s, &dual, &k.build(s, &g)?, &dg, &cert)?;
                    Ok((v.vz, v.report))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((name.clone(), row))
        })
        .collect::<Result<_>>()?;
    for (name, row) in &rows {
        for (k, (_, r)) in kinds.iter().zip(row) {
            report.absorb(&format!("{name}/{}", k.name()), r.clone());
        }
    }
    for (i, k) in kinds.iter().enumerate() {
        let verdicts: Vec<bool> = rows.iter().map(|(_, row)| row[i].0).collect();
        let same = verdicts.iter().all(|v| *v == verdicts[0]);
        report.push(flag(
            &format!("{}/cross-norm-agreement", k.name()),
            "the VZ verdict does not depend on the product norm",
            same,
            format!("vz verdicts {verdicts:?}"),
        ));
        report.push(flag(
            &format!("{}/expected-verdict", k.name()),
            "VZ verdict of the catalog function",
            verdicts[0] == expected[i],
            format!("expected vz={}", expected[i]),
        ));
    }
    Ok(report)
}

fn representability(opts: &SuiteOptions) -> Result<VerifyReport> {
    let loaded = opts.space_or(DEFAULT_SPACE)?;
    let s = &loaded.space;
    let dual = dual_of(&loaded)?;
    let cert = small_certificate(s, &dual)?;
    let mut report = VerifyReport::new("");
    let mut run = |label: &str, set: PointSet, g: GridSpec| -> Result<()> {
        let m = MonotoneSet::new(set)?;
        report.absorb(label, monotone_battery(s, &dual, &m, &g, &dual_grid_for(s, &g, 0.5)?, &cert)?);
        Ok(())
    };
    if let Some(set) = &opts.set {
        let g = opts.grid_or(GridSpec::cube(2, -2.0, 2.0, 41))?;
        run(set.label(), set.clone(), g)?;
        return Ok(report);
    }
    let cases = [
        (SetKind::Diagonal, GridSpec::cube(2, -2.0, 2.0, 41)?),
        (SetKind::CubeGraph, GridSpec::new(vec![-2.0, -8.0], vec![2.0, 8.0], vec![41, 161])?),
        (SetKind::SignGraph, GridSpec::new(vec![-2.0, -1.0], vec![2.0, 1.0], vec![41, 21])?),
    ];
    for (kind, g) in cases {
        run(&kind.to_string(), kind.build(&g)?, g)?;
    }
    let g = GridSpec::cube(2, -2.0, 2.0, 41)?;
    let origin = MonotoneSet::new(SetKind::Singleton.build(&g)?)?;
    let gate = monotone_battery(s, &dual, &origin, &g, &dual_grid_for(s, &g, 0.5)?, &cert);
    report.push(flag(
        "singleton-refused",
        "the battery requires a maximally monotone set",
        matches!(gate, Err(Error::PreconditionFailed(_))),
        "",
    ));
    Ok(report)
}

fn alignment(opts: &SuiteOptions) -> Result<VerifyReport> {
    let g = GridSpec::cube(1, -2.0, 2.0, 81)?;
    let diagonal =
        MonotoneSet::from_pairs(g.axis_values(0).into_iter().map(|t| (vec![t], vec![t])).collect(), "diagonal")?;
    let set = match &opts.set {
        Some(p) => MonotoneSet::new(p.clone())?,
        None => diagonal,
    };
    let mut report = VerifyReport::new("");
    for (alpha, beta) in [(1.0, 1.0), (4.0, 1.0)] {
        let r = negative_alignment(&set, &[1.0], &[-1.0], alpha, beta)?;
        report.absorb(&format!("alpha-{alpha}-beta-{beta}"), r.report);
    }
    Ok(report)
}

fn distance_chain(opts: &SuiteOptions) -> Result<VerifyReport> {
    let s = opts.space_or(DEFAULT_SPACE)?.space;
    let g = opts.grid_or(GridSpec::cube(2, -3.0, 3.0, 61))?;
    let f = opts.function_or(FnKind::HalfSquare, &s, &g)?;
    let a = mf_set(&f, &s)?.ok_or_else(|| Error::PreconditionFailed("M_f is empty".into()))?;
    let c_grid = GridSpec::new(
        g.lower().iter().map(|v| 0.5 * v).collect(),
        g.upper().iter().map(|v| 0.5 * v).collect(),
        g.points().iter().map(|n| n / 4 + 1).collect(),
    )?;
    let mut report = VerifyReport::new("");
    report.absorb("", distance_chain_check(&a, &f, &c_grid)?);
    report.absorb("", projection_closure_check(&f, &s)?);
    Ok(report)
}

/// Largest |Δf| / h over lattice neighbours with both values finite.
pub fn observed_lipschitz(f: &GridFn) -> f64 {
    let g = f.grid();
    let mut best: f64 = 0.0;
    for flat in 0..g.len() {
        let idx = g.multi_index(flat);
        for axis in 0..g.dim() {
            if idx[axis] + 1 >= g.points()[axis] {
                continue;
            }
            let mut next = idx.clone();
            next[axis] += 1;
            let (a, b) = (f.values()[flat], f.values()[g.flat_index(&next)]);
            if a.is_finite() && b.is_finite() {
                best = best.max((b - a).abs() / g.spacing(axis));
            }
        }
    }
    best
}

/// Lower convex hull of 1-dimensional samples, interpolated at their abscissae.
pub fn lower_hull_1d(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if !y.is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    xs.iter()
        .map(|&x| {
            let k = hull.partition_point(|p| p.0 < x);
            match k {
                _ if hull.is_empty() => f64::INFINITY,
                0 if hull[0].0 == x => hull[0].1,
                0 => f64::INFINITY,
                k if k == hull.len() => f64::INFINITY,
                k if hull[k].0 == x => hull[k].1,
                k => {
                    let ((x1, y1), (x2, y2)) = (hull[k - 1], hull[k]);
                    y1 + (y2 - y1) * (x - x1) / (x2 - x1)
                }
            }
        })
        .collect()
}

/// A random proper convex lsc function: a positive quadratic plus a max of
/// three affine pieces, restricted to a random sub-box.
pub fn random_convex(grid: &GridSpec, rng: &mut ChaCha8Rng) -> Result<GridFn> {
    let d = grid.dim();
    let weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..2.0)).collect();
    let pieces: Vec<(Vec<f64>, f64)> =
        (0..3).map(|_| ((0..d).map(|_| rng.random_range(-1.0..1.0)).collect(), rng.random_range(-0.5..0.5))).collect();
    let (lower, upper): (Vec<f64>, Vec<f64>) = (0..d)
        .map(|a| {
            let (lo, hi) = (grid.lower()[a], grid.upper()[a]);
            let w = hi - lo;
            (lo + rng.random_range(0.0..0.3) * w, hi - rng.random_range(0.0..0.3) * w)
        })
        .unzip();
    let values = grid
        .coords()
        .chunks(d)
        .map(|x| {
            if x.iter().enumerate().any(|(a, v)| *v < lower[a] || *v > upper[a]) {
                return f64::INFINITY;
            }
            let quad: f64 = x.iter().zip(&weights).map(|(v, w)| 0.5 * w * v * v).sum();
            let lin = pieces
                .iter()
                .map(|(s, c)| s.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + c)
                .fold(f64::NEG_INFINITY, f64::max);
            quad + lin
        })
        .collect();
    GridFn::new(grid.clone(), values)
}

/// sup |f** - f| over finite lattice points, with its location.
fn sup_difference(a: &GridFn, b: &[f64]) -> (f64, Vec<f64>) {
    let mut worst = (0.0_f64, a.grid().point(0));
    for (k, (u, v)) in a.values().iter().zip(b).enumerate() {
        if u.is_finite() || v.is_finite() {
            let e = if u.is_finite() && v.is_finite() { (u - v).abs() } else { f64::INFINITY };
            if e > worst.0 {
                worst = (e, a.grid().point(k));
            }
        }
    }
    worst
}

fn fenchel_moreau(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let grids = [GridSpec::cube(1, -2.0, 2.0, 81)?, GridSpec::cube(2, -2.0, 2.0, 21)?];
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, Vec::new());
    for k in 0..20 {
        let g = &grids[k % 2];
        let f = random_convex(g, &mut rng)?;
        let bi = lsc_biconjugate_envelope(&f)?;
        let (err, at) = sup_difference(&f, bi.values());
        let t = 5.0 * g.max_spacing() * observed_lipschitz(&f);
        if err - t > worst.0 {
            worst = (err - t, err, t, at);
        }
    }
    report.push(
        Check::new("biconjugate-recovers-convex", "f** equals f for proper convex lsc f")
            .verdict(worst.0 <= 0.0, worst.1, worst.2)
            .witness(vec![worst.3])
            .note("20 random functions on R and R^2; tolerance 5 h L"),
    );

    let g = GridSpec::cube(1, -2.0, 2.0, 81)?;
    let well = FnKind::DoubleWell.build(&catalog::space(DEFAULT_SPACE)?.space, &g)?;
    let bi = lsc_biconjugate_envelope(&well)?;
    let hull = lower_hull_1d(&g.axis_values(0), well.values());
    let (err, at) = sup_difference(&bi, &hull);
    let t = 5.0 * g.max_spacing() * observed_lipschitz(&well);
    report.push(
        Check::new("biconjugate-is-convex-hull", "f** of a nonconvex function is its closed convex hull")
            .verdict(err <= t, err, t)
            .witness(vec![at])
            .note("double well against the lower convex hull of its samples"),
    );

    let g2 = GridSpec::cube(1, -2.0, 2.0, 41)?;
    let f = GridFn::from_closed_form(g2.clone(), ClosedForm::half_square(1))?;
    let h = GridFn::from_closed_form(
        g2.clone(),
        ClosedForm::Quadratic { a: vec![2.0], b: vec![0.5], c: 0.0 },
    )?;
    report.absorb("", rockafellar_sum_identity(&f, &h, &GridSpec::cube(1, -1.5, 1.5, 31)?)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn hull_of_double_well_samples() {
        let xs: Vec<f64> = (0..9).map(|k| -2.0 + 0.5 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * x - 1.0_f64).powi(2)).collect();
        let h = lower_hull_1d(&xs, &ys);
        for (x, v) in xs.iter().zip(&h) {
            if x.abs() <= 1.0 {
                assert!(v.abs() < 1e-12, "{x} {v}");
            } else {
                assert!((v - (x * x - 1.0).powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn helix_pitch_decides_the_verdict() {
        assert!(Suite::Helix.run(&SuiteOptions::default()).unwrap().passed());
        let opts = SuiteOptions { lambda: Some(0.5), ..Default::default() };
        let r = Suite::Helix.run(&opts).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures().next().unwrap().witness.len(), 2);
    }
}
