//! q-positive sets, the set P(f) where f touches q, p-density, the
//! constructive projection onto P(f) and the distance bounds it yields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{is_vz, intrinsic_conjugate, FinitePoints, GridFn};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::numeric::pattern_minimize;
use crate::report::{Check, VerifyReport};
use crate::ssd::SsdSpace;
use crate::tol;

/// A finite, nonempty set of distinct points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    label: String,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>, label: &str) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptySet)?.len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        // sort a permutation lexicographically; duplicates end up adjacent
        // unless they straddle a rounding boundary, which the window catches
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|a, b| {
            points[*a]
                .iter()
                .zip(&points[*b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in 0..order.len() {
            for v in order.iter().skip(w + 1).take(8) {
                let (i, j) = (order[w], *v);
                let close = points[i].iter().zip(&points[j]).all(|(x, y)| (x - y).abs() <= tol::DUPLICATE);
                if close {
                    return Err(Error::DuplicatePoint(i.min(j), i.max(j)));
                }
            }
        }
        Ok(Self { dim, points, label: label.to_string() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.points.iter()
    }

    /// Largest distance from a point of the set to its nearest other point.
    pub fn mesh(&self, space: &SsdSpace) -> f64 {
        if self.points.len() < 2 {
            return 0.0;
        }
        self.points
            .par_iter()
            .enumerate()
            .map(|(i, a)| {
                self.points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| space.norm(&crate::linalg::sub(a, b)))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Nearest point in the space's norm: (index, distance).
    pub fn nearest(&self, space: &SsdSpace, c: &[f64]) -> (usize, f64) {
        let mut diff = vec![0.0; self.dim];
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.points.iter().enumerate() {
            crate::linalg::sub_into(c, a, &mut diff);
            let d = space.norm(&diff);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// min over a in the set of q(c - a): (index, value).
    pub fn min_q_gap(&self, space: &SsdSpace, c: &[f64]) -> (usize, f64) {
        let mut diff = vec![0.0; self.dim];
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.points.iter().enumerate() {
            crate::linalg::sub_into(c, a, &mut diff);
            let v = space.q(&diff);
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// min over a in the set of p(c - a): (index, value).
    pub fn min_p_gap(&self, space: &SsdSpace, c: &[f64]) -> (usize, f64) {
        let mut diff = vec![0.0; self.dim];
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.points.iter().enumerate() {
            crate::linalg::sub_into(c, a, &mut diff);
            let v = space.p(&diff);
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Grid points within `radius` (sup norm) of some point of the set.
    pub fn on_grid(&self, grid: &GridSpec) -> Vec<usize> {
        let mut out: Vec<usize> = self.points.iter().filter_map(|p| grid.locate(p)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Tolerance for a minimum of q over a sampled set: the sampled minimizer
/// may sit up to one mesh away from the true one, and q is locally
/// Lipschitz with constant ½‖ι‖(‖d‖ + ‖e‖).
pub(crate) fn q_sampling_tol(iota_norm: f64, mesh: f64, reach: f64) -> f64 {
    0.5 * iota_norm * mesh * (2.0 * reach + mesh)
}

/// Pass iff q(b - c) ≥ -tol for every pair of the set.
pub fn is_q_positive(space: &SsdSpace, set: &PointSet) -> Result<VerifyReport> {
    is_q_positive_with(space, set, tol::EXACT)
}

pub fn is_q_positive_with(space: &SsdSpace, set: &PointSet, tolerance: f64) -> Result<VerifyReport> {
    if set.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: set.dim() });
    }
    let pts = set.points();
    let (value, i, j) = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut diff = vec![0.0; set.dim()];
            let mut best = (f64::INFINITY, i, i);
            for j in i + 1..pts.len() {
                crate::linalg::sub_into(&pts[i], &pts[j], &mut diff);
                let v = space.q(&diff);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
    let mut report = VerifyReport::new("q-positive");
    let check = Check::new("q-positive", "q of every pairwise difference is nonnegative");
    let check = if pts.len() < 2 {
        check.verdict(true, 0.0, tolerance).note("single point")
    } else {
        check
            .verdict(value >= -tolerance, (-value).max(0.0), tolerance)
            .witness(vec![pts[i].clone(), pts[j].clone()])
            .note(format!("min pairwise q = {value:e} over {} points", pts.len()))
    };
    report.push(check);
    Ok(report)
}

/// Grid-relative maximality: no candidate point away from the set keeps
/// q-positivity when added.
pub fn is_maximally_q_positive(space: &SsdSpace, set: &PointSet, candidates: &GridSpec) -> Result<VerifyReport> {
    if set.dim() != space.dim() || candidates.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: candidates.dim() });
    }
    let d = space.dim();
    let mesh = set.mesh(space);
    let dist_tol = mesh.max(tol::CLOSED_FORM);
    let cs = candidates.coords();
    let mut extensions: Vec<(f64, usize)> = cs
        .par_chunks(d)
        .enumerate()
        .filter_map(|(k, c)| {
            let (_, dist) = set.nearest(space, c);
            if dist <= dist_tol {
                return None;
            }
            let (_, minq) = set.min_q_gap(space, c);
            (minq >= -tol::EXACT).then_some((minq, k))
        })
        .collect();
    extensions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut report = VerifyReport::new("maximal-q-positive");
    report.set_grid(candidates);
    let check = Check::new("maximal-q-positive", "no grid point off the set extends it q-positively");
    let check = match extensions.first() {
        None => check.verdict(true, 0.0, tol::EXACT),
        Some((minq, _)) => check
            .verdict(false, *minq, tol::EXACT)
            .witness(extensions.iter().take(10).map(|(_, k)| candidates.point(*k)).collect()),
    };
    report.push(check.note(format!(
        "{} extension points among {} candidates; distance tolerance {dist_tol:e} (set mesh)",
        extensions.len(),
        candidates.len()
    )));
    Ok(report)
}

/// Grid points where f - q ≤ `tol_p`, or None when there are none.
pub fn p_set(f: &GridFn, space: &SsdSpace) -> Result<Option<PointSet>> {
    p_set_with(f, space, tol::MEMBERSHIP)
}

pub fn p_set_with(f: &GridFn, space: &SsdSpace, tol_p: f64) -> Result<Option<PointSet>> {
    if f.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: f.dim() });
    }
    let d = space.dim();
    let coords = f.grid().coords();
    let mut points = Vec::new();
    let mut lowest = (f64::INFINITY, 0usize);
    for (k, (v, b)) in f.values().iter().zip(coords.chunks(d)).enumerate() {
        let gap = v - space.q(b);
        if gap < lowest.0 {
            lowest = (gap, k);
        }
        if gap <= tol_p {
            points.push(b.to_vec());
        }
    }
    if lowest.0 < -tol::GRID {
        return Err(Error::FBelowQ { gap: -lowest.0, at: f.grid().point(lowest.1) });
    }
    if points.is_empty() {
        return Ok(None);
    }
    Ok(Some(PointSet::new(points, "P(f)")?))
}

/// Pass iff min over the set of p(c - a) is (grid-)zero at every c.
pub fn p_dense_check(space: &SsdSpace, set: &PointSet, c_grid: &GridSpec) -> Result<VerifyReport> {
    if set.dim() != space.dim() || c_grid.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: c_grid.dim() });
    }
    let d = space.dim();
    let mesh = set.mesh(space);
    let k = space.iota_norm().value;
    let cs = c_grid.coords();
    let rows: Vec<(f64, f64)> = cs
        .par_chunks(d)
        .map(|c| {
            let (i, v) = set.min_p_gap(space, c);
            let reach = space.norm(&crate::linalg::sub(c, &set.points()[i]));
            let t = tol::DENSITY + 0.5 * (1.0 + k) * mesh * (reach + mesh);
            (v, t)
        })
        .collect();
    let (worst, excess) = rows
        .iter()
        .map(|(v, t)| v - t)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    let mut report = VerifyReport::new("p-dense");
    report.set_grid(c_grid);
    report.push(
        Check::new("p-dense", "inf of p(c - a) over the set is zero at every grid point")
            .verdict(excess <= 0.0, rows[worst].0, rows[worst].1)
            .witness(vec![c_grid.point(worst)])
            .note(format!("set mesh {mesh:e}; tolerance grows with mesh times distance")),
    );
    Ok(report)
}

/// Per-step record of the projection iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepCertificate {
    pub step: usize,
    /// (f - q)(bₙ)
    pub gap: f64,
    /// p(bₙ₋₁ - bₙ)
    pub p_step: f64,
    /// λ²ⁿα²
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTrace {
    pub start: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
    pub certificates: Vec<StepCertificate>,
    pub epsilon: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub limit: Vec<f64>,
    pub achieved_distance: f64,
    /// (1 + ε)√2·α
    pub distance_bound: f64,
}

impl ProjectionTrace {
    /// Recompute every certificate from the stored iterates.
    pub fn recheck(&self, f: &GridFn, space: &SsdSpace) -> bool {
        let alpha2 = self.alpha * self.alpha;
        self.iterates.windows(2).enumerate().all(|(k, w)| {
            let n = k + 1;
            let bound = self.lambda.powi(2 * n as i32) * alpha2;
            let gap = f.eval(&w[1]) - space.q(&w[1]);
            let step = space.p(&crate::linalg::sub(&w[0], &w[1]));
            gap + step <= bound * (1.0 + 1e-9) + 1e-15 && gap >= -tol::GRID
        })
    }
}

/// Projection onto P(f) for a grid-verified VZ function.
pub struct Projector<'a> {
    f: &'a GridFn,
    space: &'a SsdSpace,
    pts: FinitePoints,
    gap: Vec<f64>,
}

impl<'a> Projector<'a> {
    /// Runs the VZ check once; fails with NotVz.
    pub fn new(f: &'a GridFn, space: &'a SsdSpace) -> Result<Self> {
        let report = is_vz(f, space)?;
        if !report.passed() {
            let residual = report.failures().map(|c| c.worst_residual).fold(0.0, f64::max);
            return Err(Error::NotVz { residual });
        }
        Ok(Self::trusted(f, space))
    }

    /// Skip the VZ check, for callers that already ran it.
    pub fn trusted(f: &'a GridFn, space: &'a SsdSpace) -> Self {
        let pts = f.finite_points();
        let gap = (0..pts.len()).map(|i| pts.values[i] - space.q(pts.point(i))).collect();
        Self { f, space, pts, gap }
    }

    fn objective(&self, prev: &[f64], b: &[f64]) -> f64 {
        let fb = self.f.eval(b);
        if !fb.is_finite() {
            return f64::INFINITY;
        }
        fb - self.space.q(b) + self.space.p(&crate::linalg::sub(prev, b))
    }

    pub fn project(&self, c: &[f64], epsilon: f64) -> Result<ProjectionTrace> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        let d = self.space.dim();
        if c.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: c.len() });
        }
        let fc = self.f.eval(c);
        if !fc.is_finite() {
            return Err(Error::OutsideDomain);
        }
        let lambda = epsilon / (3.0 + epsilon);
        let alpha2 = (fc - self.space.q(c)).max(0.0);
        let alpha = alpha2.sqrt();
        let mut iterates = vec![c.to_vec()];
        let mut certificates = Vec::new();
        let h = self.f.grid().max_spacing();
        let mut n = 0;
        while alpha2 > 0.0 {
            n += 1;
            let bound = lambda.powi(2 * n as i32) * alpha2;
            let prev = iterates.last().unwrap().clone();
            let mut diff = vec![0.0; d];
            let (mut best, mut arg) = (f64::INFINITY, 0);
            for i in 0..self.pts.len() {
                crate::linalg::sub_into(&prev, self.pts.point(i), &mut diff);
                let v = self.gap[i] + self.space.p(&diff);
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            let start = self.pts.point(arg).to_vec();
            let (refined, point) = pattern_minimize(start.clone(), 0.5 * h, 1e-13, |b| self.objective(&prev, b));
            let (value, point) = if refined < best { (refined, point) } else { (best, start) };
            if value > bound {
                return Err(Error::StepInfeasible { step: n, achieved: value, required: bound });
            }
            let gap = self.f.eval(&point) - self.space.q(&point);
            let p_step = self.space.p(&crate::linalg::sub(&prev, &point));
            certificates.push(StepCertificate { step: n, gap, p_step, bound });
            iterates.push(point);
            if bound < tol::PROJECTION_STOP {
                break;
            }
        }
        let limit = iterates.last().unwrap().clone();
        let achieved_distance = self.space.norm(&crate::linalg::sub(c, &limit));
        Ok(ProjectionTrace {
            start: c.to_vec(),
            iterates,
            certificates,
            epsilon,
            lambda,
            alpha,
            limit,
            achieved_distance,
            distance_bound: (1.0 + epsilon) * std::f64::consts::SQRT_2 * alpha,
        })
    }
}

pub fn project_to_p(f: &GridFn, space: &SsdSpace, c: &[f64], epsilon: f64) -> Result<ProjectionTrace> {
    Projector::new(f, space)?.project(c, epsilon)
}

/// Per-point distance data against a sampled set.
struct DistanceRow {
    dist: f64,
    /// -min over the set of q(c - a)
    neg_min_q: f64,
    q_tol: f64,
}

fn distance_rows(space: &SsdSpace, set: &PointSet, cs: &[f64]) -> (Vec<DistanceRow>, f64) {
    let d = space.dim();
    let mesh = set.mesh(space);
    let k = space.iota_norm().value;
    let rows = cs
        .par_chunks(d)
        .map(|c| {
            let (_, dist) = set.nearest(space, c);
            let (i, minq) = set.min_q_gap(space, c);
            let reach = space.norm(&crate::linalg::sub(c, &set.points()[i]));
            DistanceRow { dist, neg_min_q: -minq, q_tol: tol::GRID + q_sampling_tol(k, mesh, reach) }
        })
        .collect();
    (rows, mesh)
}

/// Distance checks for the q-gap of a set: inf q(c - A) ≤ 0 and
/// dist(c, A) ≤ √2·√(-inf q(c - A)).
fn push_q_distance_checks(report: &mut VerifyReport, rows: &[DistanceRow], mesh: f64, grid: &GridSpec) {
    let mut worst_inf = (f64::NEG_INFINITY, 0, 0.0);
    let mut worst_dist = (f64::NEG_INFINITY, 0, 0.0);
    for (k, r) in rows.iter().enumerate() {
        let e = -r.neg_min_q - r.q_tol;
        if e > worst_inf.0 {
            worst_inf = (e, k, r.q_tol);
        }
        let t = mesh + std::f64::consts::SQRT_2 * r.q_tol.sqrt();
        let e = r.dist - std::f64::consts::SQRT_2 * r.neg_min_q.max(0.0).sqrt() - t;
        if e > worst_dist.0 {
            worst_dist = (e, k, t);
        }
    }
    let (e, k, t) = worst_inf;
    report.push(
        Check::new("inf-q-gap-nonpositive", "inf of q(c - A) is at most zero")
            .verdict(e <= 0.0, (e + t).max(0.0), t)
            .witness(vec![grid.point(k)]),
    );
    let (e, k, t) = worst_dist;
    report.push(
        Check::new("distance-below-q-gap-bound", "dist(c, A) is at most sqrt2 times sqrt(-inf q(c - A))")
            .verdict(e <= 0.0, (e + t).max(0.0), t)
            .witness(vec![grid.point(k)]),
    );
}

/// Both distance bounds to P(f) on a grid of points c, plus the ratio
/// dist / √(-inf q(c - P(f))) as a sharpness probe.
pub fn dist_bounds_check(f: &GridFn, space: &SsdSpace, c_grid: &GridSpec) -> Result<VerifyReport> {
    let set = p_set(f, space)?.ok_or_else(|| Error::PreconditionFailed("P(f) is empty on the grid".into()))?;
    let d = space.dim();
    let cs = c_grid.coords();
    let (rows, mesh) = distance_rows(space, &set, &cs);
    let mut report = VerifyReport::new("distance-bounds");
    report.set_grid(c_grid);
    push_q_distance_checks(&mut report, &rows, mesh, c_grid);

    let mut worst_gap = (f64::NEG_INFINITY, 0, 0.0);
    let mut worst_chain = (f64::NEG_INFINITY, 0);
    let mut ratio = (0.0_f64, 0usize);
    for (k, (r, c)) in rows.iter().zip(cs.chunks(d)).enumerate() {
        let fc = f.eval(c);
        if !fc.is_finite() {
            continue;
        }
        let gap = fc - space.q(c);
        let t = mesh + tol::GRID;
        let e = r.dist - std::f64::consts::SQRT_2 * gap.max(0.0).sqrt() - t;
        if e > worst_gap.0 {
            worst_gap = (e, k, t);
        }
        let e = r.neg_min_q - gap;
        if e > worst_chain.0 {
            worst_chain = (e, k);
        }
        if r.neg_min_q > 1e-9 {
            let rho = r.dist / r.neg_min_q.sqrt();
            if rho > ratio.0 {
                ratio = (rho, k);
            }
        }
    }
    let (e, k, t) = worst_gap;
    report.push(
        Check::new("distance-below-f-gap-bound", "dist(c, P(f)) is at most sqrt2 times sqrt((f - q)(c))")
            .verdict(e <= 0.0, (e + t).max(0.0), t)
            .witness(vec![c_grid.point(k)]),
    );
    let (e, k) = worst_chain;
    report.push(
        Check::new("q-gap-below-f-gap", "-inf q(c - P(f)) is at most (f - q)(c)")
            .verdict(e <= tol::GRID, e.max(0.0), tol::GRID)
            .witness(vec![c_grid.point(k)]),
    );
    report.push(
        Check::new("sharpness-ratio", "largest ratio of dist(c, P(f)) to sqrt(-inf q(c - P(f)))")
            .verdict(true, ratio.0, std::f64::consts::SQRT_2)
            .witness(vec![c_grid.point(ratio.1)])
            .note("informational: sqrt 2 is the worst case of the q-gap distance bound checked above"),
    );
    Ok(report)
}

/// For a closed p-dense q-positive set A and a grid function h: the q-gap
/// distance bounds, the VZ property of any h ≥ q touching q on A, and
/// grid-relative maximality of A.
pub fn dense_set_suite(space: &SsdSpace, set: &PointSet, h: &GridFn) -> Result<VerifyReport> {
    let positive = is_q_positive(space, set)?;
    if !positive.passed() {
        return Err(Error::PreconditionFailed("set is not q-positive".into()));
    }
    let dense = p_dense_check(space, set, h.grid())?;
    if !dense.passed() {
        return Err(Error::PreconditionFailed("set is not p-dense on the grid".into()));
    }
    let d = space.dim();
    let mut report = VerifyReport::new("dense-set");
    report.set_grid(h.grid());
    let (rows, mesh) = distance_rows(space, set, &h.grid().coords());
    push_q_distance_checks(&mut report, &rows, mesh, h.grid());

    let above_q = h
        .values()
        .iter()
        .zip(h.grid().coords().chunks(d))
        .all(|(v, b)| v - space.q(b) >= -tol::GRID);
    let touches = set.iter().all(|a| h.eval(a) - space.q(a) <= tol::MEMBERSHIP);
    if above_q && touches {
        report.absorb("h", is_vz(h, space)?);
    } else {
        report.push(
            Check::new("h/vz-infconv-zero", "h above q and touching q on A is VZ")
                .skipped("h is not above q or does not touch q on A"),
        );
    }
    report.absorb("", is_maximally_q_positive(space, set, h.grid())?);
    Ok(report)
}

/// Pairs of grid points for the pairwise q-gap bounds: all pairs on small
/// grids, a seeded sample on large ones.
fn grid_pairs(n: usize, seed: u64, cap: usize) -> Vec<(usize, usize)> {
    if n * (n - 1) / 2 <= cap {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..cap).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect()
    }
}

/// For f ≥ q: -q(b - c) ≤ (√(f-q)(b) + √(f-q)(c))² and its doubled form
/// -q(b - c) ≤ 2(f-q)(b) + 2(f-q)(c), on grid pairs.
pub fn q_gap_bound_check(f: &GridFn, space: &SsdSpace, seed: u64) -> Result<VerifyReport> {
    let d = space.dim();
    let coords = f.grid().coords();
    let finite: Vec<(usize, f64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(k, v)| (k, v - space.q(&coords[k * d..(k + 1) * d])))
        .collect();
    let (lo, lo_at) = finite.iter().fold((f64::INFINITY, 0), |a, (k, g)| if *g < a.0 { (*g, *k) } else { a });
    if lo < -tol::GRID {
        return Err(Error::FBelowQ { gap: -lo, at: f.grid().point(lo_at) });
    }
    let pairs = grid_pairs(finite.len(), seed, 2_000_000);
    let (e1, e2, wi, wj) = pairs
        .par_iter()
        .map(|(i, j)| {
            let (ki, gi) = finite[*i];
            let (kj, gj) = finite[*j];
            let (gi, gj) = (gi.max(0.0), gj.max(0.0));
            let diff = crate::linalg::sub(&coords[ki * d..(ki + 1) * d], &coords[kj * d..(kj + 1) * d]);
            let lhs = -space.q(&diff);
            let scale = 1.0 + lhs.abs();
            ((lhs - (gi.sqrt() + gj.sqrt()).powi(2)) / scale, (lhs - 2.0 * gi - 2.0 * gj) / scale, ki, kj)
        })
        .reduce(
            || (f64::NEG_INFINITY, f64::NEG_INFINITY, 0, 0),
            |a, b| {
                let (wi, wj) = if b.0 > a.0 { (b.2, b.3) } else { (a.2, a.3) };
                (a.0.max(b.0), a.1.max(b.1), wi, wj)
            },
        );
    let t = tol::CLOSED_FORM;
    let mut report = VerifyReport::new("q-gap-bound");
    report.set_grid(f.grid());
    report.push(
        Check::new("q-gap-sqrt-bound", "-q(b - c) is at most (sqrt gap(b) + sqrt gap(c))^2")
            .verdict(e1 <= t, e1.max(0.0), t)
            .witness(vec![f.grid().point(wi), f.grid().point(wj)])
            .note(format!("{} pairs", pairs.len())),
    );
    report.push(
        Check::new("q-gap-doubled-bound", "-q(b - c) is at most 2 gap(b) + 2 gap(c)")
            .verdict(e2 <= t, e2.max(0.0), t),
    );
    Ok(report)
}

/// For a in P(f) and every grid b: ⌊b, a⌋ ≤ q(a) + f(b), and f^@(a) = q(a).
pub fn touching_check(f: &GridFn, space: &SsdSpace) -> Result<VerifyReport> {
    let set = p_set(f, space)?.ok_or_else(|| Error::PreconditionFailed("P(f) is empty on the grid".into()))?;
    let pts = f.finite_points();
    let worst = set
        .points()
        .par_iter()
        .map(|a| {
            let qa = space.q(a);
            (0..pts.len())
                .map(|i| space.pair(pts.point(i), a) - qa - pts.values[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let at = intrinsic_conjugate(f, space)?;
    let dev = set
        .iter()
        .map(|a| (at.fun.eval(a) - space.q(a)).abs())
        .fold(0.0_f64, f64::max);
    let mut report = VerifyReport::new("touching");
    report.set_grid(f.grid());
    let t = tol::MEMBERSHIP;
    report.push(
        Check::new("touching-pairing-bound", "pairing of b with a point of P(f) is at most q(a) + f(b)")
            .verdict(worst <= t, worst.max(0.0), t),
    );
    report.push(
        Check::new("touching-conjugate-equals-q", "intrinsic conjugate equals q on P(f)")
            .verdict(dev <= t, dev, t),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ClosedForm;
    use crate::ssd::{make_ssd, NormSpec, ProductNorm};

    fn product() -> SsdSpace {
        make_ssd(vec![vec![0.0, 1.0], vec![1.0, 0.0]], NormSpec::product(ProductNorm::Two, 1.0), "product").unwrap()
    }

    fn swap3() -> SsdSpace {
        make_ssd(
            vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
            NormSpec::Euclidean,
            "swap3",
        )
        .unwrap()
    }

    fn helix(lambda: f64) -> PointSet {
        let pts = (0..200)
            .map(|k| {
                let t = -10.0 + 20.0 * k as f64 / 199.0;
                vec![t.cos(), t.sin(), lambda * t]
            })
            .collect();
        PointSet::new(pts, "helix").unwrap()
    }

    fn diagonal(grid: &GridSpec) -> PointSet {
        PointSet::new(grid.axis_values(0).into_iter().map(|t| vec![t, t]).collect(), "diagonal").unwrap()
    }

    #[test]
    fn point_set_invariants() {
        assert!(matches!(PointSet::new(vec![], ""), Err(Error::EmptySet)));
        assert!(matches!(
            PointSet::new(vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![1.0, 2.0 + 1e-13]], ""),
            Err(Error::DuplicatePoint(0, 2))
        ));
        assert!(matches!(PointSet::new(vec![vec![1.0], vec![1.0, 2.0]], ""), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn helix_positivity_depends_on_pitch() {
        let s = swap3();
        let r = is_q_positive(&s, &helix(1.0)).unwrap();
        assert!(r.passed());
        let r = is_q_positive(&s, &helix(0.5)).unwrap();
        assert!(!r.passed());
        assert_eq!(r.checks[0].witness.len(), 2);
        let line = PointSet::new((-10..=10).map(|k| vec![k as f64, -k as f64, 2.0 * k as f64]).collect(), "").unwrap();
        assert!(is_q_positive(&s, &line).unwrap().passed());
    }

    #[test]
    fn diagonal_is_maximal_and_origin_is_not() {
        let s = product();
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        assert!(is_maximally_q_positive(&s, &diagonal(&g), &g).unwrap().passed());
        let origin = PointSet::new(vec![vec![0.0, 0.0]], "").unwrap();
        let r = is_maximally_q_positive(&s, &origin, &g).unwrap();
        assert!(!r.passed());
        assert!(r.checks[0].witness.iter().all(|c| c[0] * c[1] >= 0.0));
    }

    #[test]
    fn p_set_of_half_square_is_diagonal() {
        let s = product();
        let g = GridSpec::cube(2, -3.0, 3.0, 61).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(2)).unwrap();
        let p = p_set(&f, &s).unwrap().unwrap();
        assert_eq!(p.len(), 61);
        assert!(p.iter().all(|b| b[0] == b[1]));
        assert!(is_q_positive(&s, &p).unwrap().passed());
    }

    #[test]
    fn p_set_empty_and_below_q() {
        let id = make_ssd(vec![vec![1.0, 0.0], vec![0.0, 1.0]], NormSpec::Euclidean, "").unwrap();
        let g = GridSpec::cube(2, -1.0, 1.0, 11).unwrap();
        let up = GridFn::from_fn(g.clone(), |b| 0.5 * (b[0] * b[0] + b[1] * b[1]) + 1.0).unwrap();
        assert!(p_set(&up, &id).unwrap().is_none());
        let down = GridFn::from_fn(g, |b| 0.5 * (b[0] * b[0] + b[1] * b[1]) - 1.0).unwrap();
        assert!(matches!(p_set(&down, &id), Err(Error::FBelowQ { .. })));
    }

    #[test]
    fn density_verdicts() {
        let s = product();
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        assert!(p_dense_check(&s, &diagonal(&g), &g).unwrap().passed());
        let origin = PointSet::new(vec![vec![0.0, 0.0]], "").unwrap();
        let r = p_dense_check(&s, &origin, &g).unwrap();
        assert!(!r.passed());
        let whole = PointSet::new(g.coords().chunks(2).map(|c| c.to_vec()).collect(), "").unwrap();
        assert!(p_dense_check(&s, &whole, &g).unwrap().passed());
    }

    #[test]
    fn projection_of_half_square() {
        let s = product();
        let g = GridSpec::cube(2, -3.0, 3.0, 61).unwrap();
        let f = GridFn::from_closed_form(g, ClosedForm::half_square(2)).unwrap();
        let proj = Projector::new(&f, &s).unwrap();
        let t = proj.project(&[1.0, 0.0], 0.5).unwrap();
        assert!((t.limit[0] - 0.5).abs() < 1e-6 && (t.limit[1] - 0.5).abs() < 1e-6, "{:?}", t.limit);
        assert!((t.achieved_distance - 0.5f64.sqrt()).abs() < 1e-6);
        assert!(t.achieved_distance <= t.distance_bound);
        assert!(t.recheck(&f, &s));
        let on = proj.project(&[1.0, 1.0], 0.5).unwrap();
        assert_eq!(on.iterates.len(), 1);
        assert!(matches!(proj.project(&[1.0, 0.0], 1.0), Err(Error::EpsilonOutOfRange(_))));
    }

    #[test]
    fn distance_bounds_are_sharp_on_diagonal_example() {
        let s = product();
        let g = GridSpec::cube(2, -3.0, 3.0, 61).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(2)).unwrap();
        let r = dist_bounds_check(&f, &s, &g.coarsened(2).unwrap()).unwrap();
        assert!(r.passed(), "{r:?}");
        let ratio = r.check("sharpness-ratio").unwrap().worst_residual;
        assert!((ratio - std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn q_gap_bounds_and_touching() {
        let s = product();
        let g = GridSpec::cube(2, -2.0, 2.0, 21).unwrap();
        let f = GridFn::from_closed_form(g, ClosedForm::half_square(2)).unwrap();
        assert!(q_gap_bound_check(&f, &s, 1).unwrap().passed());
        assert!(touching_check(&f, &s).unwrap().passed());
    }
}
