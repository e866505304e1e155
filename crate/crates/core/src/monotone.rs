//! Monotone sets in E × E* with E = ℝⁿ, where q(x, x*) = ⟨x, x*⟩.
//!
//! Points are stored as (x, x*) concatenated; the product pairing makes
//! q-positivity the same thing as classical monotonicity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{is_mas, GridFn};
use crate::dual::{dual_q_gap_rows, iota_of_grid, representability_battery, worst_excess, DensityCertificate, DualSsd};
use crate::error::{Error, Result};
use crate::fitzpatrick::touch_set_match;
use crate::grid::GridSpec;
use crate::linalg::{dot, euclid, sub};
use crate::positivity::{p_set_with, q_sampling_tol, PointSet};
use crate::report::{Check, VerifyReport};
use crate::ssd::SsdSpace;
use crate::tol;

/// A monotone subset of ℝⁿ × ℝⁿ.
#[derive(Clone, Debug)]
pub struct MonotoneSet {
    set: PointSet,
    n: usize,
}

impl MonotoneSet {
    /// Validate ⟨x - y, x* - y*⟩ ≥ -1e-12 for every pair.
    pub fn new(set: PointSet) -> Result<Self> {
        Self::with_tolerance(set, tol::EXACT)
    }

    pub fn with_tolerance(set: PointSet, tolerance: f64) -> Result<Self> {
        if set.dim() % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: set.dim() + 1, got: set.dim() });
        }
        let n = set.dim() / 2;
        let pts = set.points();
        let worst = (0..pts.len())
            .into_par_iter()
            .map(|i| {
                let mut best = (f64::INFINITY, i, i);
                for j in i + 1..pts.len() {
                    let v = monotone_gap(n, &pts[i], &pts[j]);
                    if v < best.0 {
                        best = (v, i, j);
                    }
                }
                best
            })
            .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
        if worst.0 < -tolerance {
            return Err(Error::NotMonotone { value: worst.0, first: pts[worst.1].clone(), second: pts[worst.2].clone() });
        }
        Ok(Self { set, n })
    }

    /// Build from (x, x*) pairs.
    pub fn from_pairs(pairs: Vec<(Vec<f64>, Vec<f64>)>, label: &str) -> Result<Self> {
        let points = pairs
            .into_iter()
            .map(|(x, xs)| {
                if x.len() != xs.len() {
                    return Err(Error::DimensionMismatch { expected: x.len(), got: xs.len() });
                }
                Ok(x.into_iter().chain(xs).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::new(PointSet::new(points, label)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn set(&self) -> &PointSet {
        &self.set
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.set.points()[i][..self.n]
    }

    pub fn xstar(&self, i: usize) -> &[f64] {
        &self.set.points()[i][self.n..]
    }
}

/// ⟨x - y, x* - y*⟩ for concatenated points.
fn monotone_gap(n: usize, a: &[f64], b: &[f64]) -> f64 {
    (0..n).map(|k| (a[k] - b[k]) * (a[n + k] - b[n + k])).sum()
}

fn require_product(space: &SsdSpace, n: usize) -> Result<()> {
    if space.dim() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: space.dim() });
    }
    if !space.is_product_pairing() {
        return Err(Error::PreconditionFailed(format!("{} does not carry the product pairing", space.label())));
    }
    Ok(())
}

/// M_f = {f = q} on the grid, checked for monotonicity.
///
/// Points with f - q ≤ t can fail monotonicity by at most 4t (midpoint
/// convexity), which is the slack allowed here.
pub fn mf_set(f: &GridFn, space: &SsdSpace) -> Result<Option<MonotoneSet>> {
    if space.dim() % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: space.dim() + 1, got: space.dim() });
    }
    require_product(space, space.dim() / 2)?;
    match p_set_with(f, space, tol::MEMBERSHIP)? {
        None => Ok(None),
        Some(set) => Ok(Some(MonotoneSet::with_tolerance(set.with_label("Mf"), 4.0 * tol::MEMBERSHIP)?)),
    }
}

/// inf over A of ⟨x* - s*, x** - s⟩ ≤ 0 at every dual grid point (x*, x**),
/// reading the bidual as E.
pub fn type_ni_check(space: &SsdSpace, dual: &DualSsd, set: &MonotoneSet, dual_grid: &GridSpec) -> Result<VerifyReport> {
    require_product(space, set.n)?;
    if dual_grid.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: dual_grid.dim() });
    }
    Ok(type_ni_on(space, dual, set, &dual_grid.coords(), Some(dual_grid)))
}

fn type_ni_on(space: &SsdSpace, dual: &DualSsd, set: &MonotoneSet, ys: &[f64], grid: Option<&GridSpec>) -> VerifyReport {
    let d = space.dim();
    let rows = dual_q_gap_rows(space, dual, &set.set, ys);
    let (excess, value, tolerance, k) = worst_excess(rows.into_iter());
    let mut report = VerifyReport::new("type-ni");
    if let Some(g) = grid {
        report.set_grid(g);
    }
    report.push(
        Check::new("type-ni", "inf over A of <x* - s*, x** - s> is nonpositive at every dual point")
            .verdict(excess <= 0.0, value, tolerance)
            .witness(vec![ys[k * d..(k + 1) * d].to_vec()])
            .note(format!("{} dual points; bidual read as E on the grid", ys.len() / d)),
    );
    report
}

/// f is MAS and M_f = A on the grid.
pub fn strongly_representable_check(
    space: &SsdSpace,
    dual: &DualSsd,
    set: &MonotoneSet,
    f: &GridFn,
    dual_grid: &GridSpec,
) -> Result<VerifyReport> {
    require_product(space, set.n)?;
    let mut report = VerifyReport::new("strongly-representable");
    report.set_grid(f.grid());
    report.absorb("f", is_mas(f, space, dual.pairing_matrix(), dual_grid)?);
    let m = touch_set_match(space, f, &set.set);
    let mut witness: Vec<Vec<f64>> = m.outside.iter().take(10).cloned().collect();
    witness.extend(m.witness.clone());
    let note = format!("{} set points off M_f; farthest extra point at distance {:e}", m.outside.len(), m.distance);
    report.push(
        Check::new("mf-equals-set", "M_f coincides with A on the grid")
            .verdict(m.pass(), m.distance.max(m.outside.len() as f64), m.radius)
            .witness(witness)
            .note(note),
    );
    Ok(report)
}

/// Type (NI) together with the representability conditions, for a maximal
/// monotone sampled set.
pub fn monotone_battery(
    space: &SsdSpace,
    dual: &DualSsd,
    set: &MonotoneSet,
    grid: &GridSpec,
    dual_grid: &GridSpec,
    density: &DensityCertificate,
) -> Result<VerifyReport> {
    require_product(space, set.n)?;
    let mut report = VerifyReport::new("monotone");
    report.set_grid(grid);
    let battery = representability_battery(space, dual, &set.set, grid, dual_grid, density, None)?;
    let all_hold = battery.checks.iter().filter(|c| c.id.starts_with("condition-")).all(|c| c.passed());
    let ni = type_ni_on(space, dual, set, &iota_of_grid(space, grid), Some(grid));
    let ni_ok = ni.passed();
    report.absorb("", ni);
    report.absorb("", battery);
    report.push(
        Check::new("type-ni-matches-conditions", "type (NI) holds iff the representability conditions hold")
            .verdict(ni_ok == all_hold, if ni_ok == all_hold { 0.0 } else { 1.0 }, 0.0)
            .note(format!("type-ni={ni_ok}; conditions={all_hold}")),
    );
    Ok(report)
}

/// One recorded term of an approach sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentTerm {
    pub y: Vec<f64>,
    pub ystar: Vec<f64>,
    /// ‖y - x‖.
    pub rho: f64,
    /// ‖y* - x*‖.
    pub sigma: f64,
    /// ⟨y - x, y* - x*⟩.
    pub inner: f64,
    pub objective: f64,
}

/// Limits of ‖y - x‖/‖y* - x*‖ and the cosine of the pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioLimits {
    pub distance_ratio: f64,
    pub cosine: f64,
    /// Set when the exact minimizer had y = x or y* = x* and a neighbour was
    /// used instead.
    pub substituted: bool,
}

/// Negative-alignment data at (x, x*).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub rho: f64,
    pub sigma: f64,
    pub inner: f64,
    /// Minimum over A of the alignment objective.
    pub objective: f64,
    pub on_set: bool,
    /// Best points in decreasing objective, ending at the minimizer.
    pub sequence: Vec<AlignmentTerm>,
    /// ω at the local minimum reached from each restart.
    pub restart_omegas: Vec<f64>,
    ratios: Option<RatioLimits>,
    pub report: VerifyReport,
}

impl AlignmentResult {
    pub fn ratios(&self) -> Result<&RatioLimits> {
        self.ratios.as_ref().ok_or(Error::OnSetDegenerate)
    }

    pub fn omega_spread(&self) -> f64 {
        let (lo, hi) = self.restart_omegas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), w| (l.min(*w), h.max(*w)));
        if lo.is_finite() { hi - lo } else { 0.0 }
    }
}

#[derive(Clone, Debug)]
pub struct AlignmentOptions {
    pub restarts: usize,
    pub neighbours: usize,
    pub seed: u64,
    /// Allowed spread of ω across restarts.
    pub omega_tolerance: f64,
    pub sequence_len: usize,
}

impl Default for AlignmentOptions {
    fn default() -> Self {
        Self { restarts: 16, neighbours: 8, seed: tol::DEFAULT_SEED, omega_tolerance: 1e-6, sequence_len: 8 }
    }
}

pub fn negative_alignment(set: &MonotoneSet, x: &[f64], xstar: &[f64], alpha: f64, beta: f64) -> Result<AlignmentResult> {
    negative_alignment_with(set, x, xstar, alpha, beta, &AlignmentOptions::default())
}

/// Minimize max(β‖y - x‖²/α, α‖y* - x*‖²/β) + ⟨y - x, y* - x*⟩ over A and
/// read off ω = ‖y - x‖/α at the minimizer.
pub fn negative_alignment_with(
    set: &MonotoneSet,
    x: &[f64],
    xstar: &[f64],
    alpha: f64,
    beta: f64,
    opts: &AlignmentOptions,
) -> Result<AlignmentResult> {
    let n = set.n;
    if x.len() != n || xstar.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidValue);
    }
    let term = |i: usize| -> AlignmentTerm {
        let dy = sub(set.x(i), x);
        let ds = sub(set.xstar(i), xstar);
        let (rho, sigma) = (euclid(&dy), euclid(&ds));
        let inner = dot(&dy, &ds);
        let objective = (beta * rho * rho / alpha).max(alpha * sigma * sigma / beta) + inner;
        AlignmentTerm { y: set.x(i).to_vec(), ystar: set.xstar(i).to_vec(), rho, sigma, inner, objective }
    };
    let terms: Vec<AlignmentTerm> = (0..set.len()).into_par_iter().map(term).collect();
    let mut order: Vec<usize> = (0..terms.len()).collect();
    order.sort_by(|a, b| terms[*a].objective.total_cmp(&terms[*b].objective).then(a.cmp(b)));
    let best = &terms[order[0]];
    let on_set = best.rho == 0.0 && best.sigma == 0.0;
    let omega = best.rho / alpha;

    // restarts: greedy descent over k-nearest-neighbour links
    let points = set.set.points();
    let k = opts.neighbours.min(points.len().saturating_sub(1));
    let links: Vec<Vec<usize>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut near: Vec<(f64, usize)> =
                (0..points.len()).filter(|j| *j != i).map(|j| (euclid(&sub(&points[i], &points[j])), j)).collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            near.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let restart_omegas: Vec<f64> = (0..opts.restarts)
        .map(|_| {
            let mut at = rng.random_range(0..points.len());
            loop {
                let next = links[at].iter().copied().min_by(|a, b| terms[*a].objective.total_cmp(&terms[*b].objective));
                match next {
                    Some(j) if terms[j].objective < terms[at].objective => at = j,
                    _ => break,
                }
            }
            terms[at].rho / alpha
        })
        .collect();

    let mut sequence: Vec<AlignmentTerm> = order.iter().take(opts.sequence_len.max(1)).map(|i| terms[*i].clone()).collect();
    sequence.reverse();

    let mut report = VerifyReport::new("negative-alignment").with_seed(opts.seed);
    let mesh = set.set.points().len().gt(&1).then(|| euclid_mesh(points)).unwrap_or(0.0);
    let (rho, sigma) = (best.rho, best.sigma);
    let slope = 2.0 * (beta / alpha * rho + alpha / beta * sigma) + rho + sigma;
    let j_tol = tol::GRID + mesh * slope + mesh * mesh * (beta / alpha + alpha / beta + 1.0);
    let delta = best.objective.max(0.0);
    report.push(
        Check::new("alignment-objective-zero", "the alignment objective has infimum zero over A")
            .verdict(best.objective.abs() <= j_tol, best.objective.abs(), j_tol)
            .witness(vec![best.y.iter().chain(&best.ystar).copied().collect()])
            .note(format!("set mesh {mesh:e}")),
    );
    // from max(A, B) - √(AB) ≤ δ with A = βρ²/α, B = ασ²/β
    let scale = (beta * rho * rho / alpha).max(alpha * sigma * sigma / beta).sqrt();
    let balance_tol = if scale > 0.0 { delta / (scale * (alpha * beta).sqrt()) } else { 0.0 } + tol::CLOSED_FORM;
    let balance = (rho / alpha - sigma / beta).abs();
    report.push(
        Check::new("alignment-balance", "rho/alpha equals sigma/beta at the limit")
            .verdict(balance <= balance_tol, balance, balance_tol),
    );
    let inner_gap = (best.inner + alpha * beta * omega * omega).abs();
    let inner_tol = 3.0 * delta + tol::CLOSED_FORM;
    report.push(
        Check::new("alignment-inner-limit", "the pairing tends to -alpha beta omega squared")
            .verdict(inner_gap <= inner_tol, inner_gap, inner_tol)
            .note(format!("limits ({rho}, {sigma}, {})", best.inner)),
    );
    let spread = {
        let (lo, hi) = restart_omegas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), w| (l.min(*w), h.max(*w)));
        if lo.is_finite() { hi - lo } else { 0.0 }
    };
    let restart_gap = restart_omegas.iter().fold(0.0_f64, |m, w| m.max((w - omega).abs()));
    report.push(
        Check::new("alignment-omega-unique", "every restart reaches the same omega")
            .verdict(spread.max(restart_gap) <= opts.omega_tolerance, spread.max(restart_gap), opts.omega_tolerance)
            .note(format!("{} restarts over {k}-nearest-neighbour links", opts.restarts)),
    );

    let ratios = if on_set {
        report.push(Check::new("alignment-cosine-minus-one", "the pair aligns negatively").skipped("(x, x*) lies on A; omega = 0"));
        None
    } else {
        let (pick, substituted) = match order.iter().find(|i| terms[**i].rho > 0.0 && terms[**i].sigma > 0.0) {
            Some(i) => (&terms[*i], *i != order[0]),
            None => return Err(Error::PreconditionFailed("no point of A differs from (x, x*) in both components".into())),
        };
        let rs = pick.rho * pick.sigma;
        let eps = pick.objective.max(0.0) / rs + tol::CLOSED_FORM;
        let cosine = pick.inner / rs;
        let distance_ratio = pick.rho / pick.sigma;
        let ratio_gap = (distance_ratio * beta / alpha - 1.0).abs();
        report.push(
            Check::new("alignment-distance-ratio", "the distance ratio tends to alpha/beta")
                .verdict(ratio_gap <= eps, ratio_gap, eps)
                .note(if substituted { "minimizer touches (x, x*) in one component; next-best point used" } else { "at the minimizer" }),
        );
        report.push(
            Check::new("alignment-cosine-minus-one", "the pair aligns negatively")
                .verdict((cosine + 1.0).abs() <= eps, (cosine + 1.0).abs(), eps),
        );
        Some(RatioLimits { distance_ratio, cosine, substituted })
    };

    let inf_inner = terms.iter().map(|t| t.inner).fold(f64::INFINITY, f64::min);
    let check = Check::new("alignment-radii-bounded", "rho < alpha and sigma < beta when the pairing stays above -alpha beta");
    report.push(if on_set || inf_inner <= -alpha * beta {
        check.skipped(format!("inf of the pairing {inf_inner:e} is not above -alpha beta, or the point is on A"))
    } else {
        let excess = (rho - alpha).max(sigma - beta);
        check.verdict(excess < 0.0, excess.max(0.0), 0.0)
    });

    Ok(AlignmentResult {
        x: x.to_vec(),
        xstar: xstar.to_vec(),
        alpha,
        beta,
        omega,
        rho,
        sigma,
        inner: best.inner,
        objective: best.objective,
        on_set,
        sequence,
        restart_omegas,
        ratios,
        report,
    })
}

/// Largest Euclidean distance from a point to its nearest other point.
fn euclid_mesh(points: &[Vec<f64>]) -> f64 {
    points
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| euclid(&sub(a, b)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// dist((x, x*), A) ≤ √2 √(-inf ⟨y - x, y* - x*⟩) ≤ √2 √(f(x, x*) - ⟨x, x*⟩)
/// at every c in `c_grid`, distances in the Euclidean product norm.
pub fn distance_chain_check(set: &MonotoneSet, f: &GridFn, c_grid: &GridSpec) -> Result<VerifyReport> {
    let d = 2 * set.n;
    if f.dim() != d || c_grid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: c_grid.dim() });
    }
    let points = set.set.points();
    let mesh = if points.len() > 1 { euclid_mesh(points) } else { 0.0 };
    let rows: Vec<(f64, f64, f64, f64)> = c_grid
        .coords()
        .par_chunks(d)
        .map(|c| {
            let mut dist = f64::INFINITY;
            let mut inner = f64::INFINITY;
            for a in points {
                dist = dist.min(euclid(&sub(a, c)));
                inner = inner.min(monotone_gap(set.n, a, c));
            }
            let gap = f.eval(c) - monotone_gap(set.n, c, &vec![0.0; d]);
            // ‖ι‖ = 1 for the product pairing under the Euclidean product norm
            let t = mesh + (2.0 * q_sampling_tol(1.0, mesh, dist)).sqrt();
            (dist, (-inner).max(0.0), gap, t)
        })
        .collect();
    let sqrt2 = std::f64::consts::SQRT_2;
    let cs = c_grid.coords();
    let at = |k: usize| vec![cs[k * d..(k + 1) * d].to_vec()];
    let (e1, v1, t1, k1) = worst_excess(rows.iter().map(|(dist, m, _, t)| (dist - sqrt2 * m.sqrt(), *t)));
    let (e2, v2, t2, k2) = worst_excess(rows.iter().map(|(_, m, g, _)| (m - g, tol::GRID)));
    let (e3, v3, t3, k3) = worst_excess(rows.iter().map(|(dist, _, g, t)| (dist - 2.0 * g.max(0.0).sqrt(), *t)));
    let mut report = VerifyReport::new("distance-chain");
    report.set_grid(c_grid);
    report.push(
        Check::new("distance-below-alignment-bound", "distance to A is at most sqrt 2 times the root of minus the inf pairing")
            .verdict(e1 <= 0.0, v1, t1)
            .witness(at(k1)),
    );
    report.push(
        Check::new("alignment-bound-below-gap-bound", "minus the inf pairing is at most f - q")
            .verdict(e2 <= 0.0, v2, t2)
            .witness(at(k2)),
    );
    report.push(
        Check::new("distance-below-doubled-gap-bound", "distance to A is at most twice the root of f - q")
            .verdict(e3 <= 0.0, v3, t3)
            .witness(at(k3)),
    );
    let (ks, ratio) = rows
        .iter()
        .map(|(dist, m, _, _)| if *m > 1e-6 { dist / m.sqrt() } else { 0.0 })
        .enumerate()
        .fold((0, 0.0_f64), |acc, (k, r)| if r > acc.1 { (k, r) } else { acc });
    report.push(
        Check::new("sharpness-ratio", "the constant sqrt 2 is attained")
            .verdict(true, ratio, sqrt2)
            .witness(at(ks))
            .note("informational: largest observed distance over root of minus the inf pairing"),
    );
    Ok(report)
}

/// Projections of M_f and dom f onto E and E* agree up to two grid cells,
/// and for n = 1 both are intervals of grid indices.
pub fn projection_closure_check(f: &GridFn, space: &SsdSpace) -> Result<VerifyReport> {
    let d = space.dim();
    if d % 2 != 0 || f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    require_product(space, d / 2)?;
    let n = d / 2;
    let grid = f.grid();
    let mf = p_set_with(f, space, tol::MEMBERSHIP)?.ok_or_else(|| Error::PreconditionFailed("M_f is empty on the grid".into()))?;
    let mf_idx: Vec<Vec<usize>> = mf.iter().filter_map(|p| grid.locate(p)).map(|k| grid.multi_index(k)).collect();
    let dom_idx: Vec<Vec<usize>> =
        f.values().iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(k, _)| grid.multi_index(k)).collect();
    let mut report = VerifyReport::new("projection-closure");
    report.set_grid(grid);
    for (name, axes) in [("e", 0..n), ("e-star", n..d)] {
        let project = |idx: &[Vec<usize>]| {
            let mut v: Vec<Vec<usize>> = idx.iter().map(|m| m[axes.clone()].to_vec()).collect();
            v.sort();
            v.dedup();
            v
        };
        let pm = project(&mf_idx);
        let pd = project(&dom_idx);
        let cells = |a: &[usize], b: &[usize]| a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0);
        let one_sided = |from: &[Vec<usize>], to: &[Vec<usize>]| {
            from.iter()
                .map(|p| (to.iter().map(|q| cells(p, q)).min().unwrap_or(usize::MAX), p))
                .max_by_key(|(c, _)| *c)
                .map(|(c, p)| (c, p.clone()))
                .unwrap_or((0, Vec::new()))
        };
        let (h1, w1) = one_sided(&pd, &pm);
        let (h2, w2) = one_sided(&pm, &pd);
        let (h, w) = if h1 >= h2 { (h1, w1) } else { (h2, w2) };
        let values: Vec<f64> = w.iter().enumerate().map(|(j, k)| grid.axis_value(axes.start + j, *k)).collect();
        report.push(
            Check::new(&format!("projection-{name}-closures-agree"), "projections of M_f and dom f have the same closure")
                .verdict(h <= 2, h as f64, 2.0)
                .witness(vec![values])
                .note(format!("{} projected points of M_f, {} of dom f (grid cells)", pm.len(), pd.len())),
        );
        let check = Check::new(&format!("projection-{name}-interval"), "the projection of M_f is convex");
        report.push(if n == 1 {
            let ks: Vec<usize> = pm.iter().map(|v| v[0]).collect();
            let gaps = ks.windows(2).filter(|w| w[1] != w[0] + 1).count();
            check.verdict(gaps == 0, gaps as f64, 0.0)
        } else {
            check.skipped("interval test applies to one-dimensional projections")
        });
    }
    Ok(report)
}
