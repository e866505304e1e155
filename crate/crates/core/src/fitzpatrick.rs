//! The three convex functions attached to a q-positive set A:
//! Θ_A on the dual, Φ_A = Θ_A∘ι and *Θ_A on the primal side.

use rayon::prelude::*;

use crate::convex::{conjugate, intrinsic_conjugate, is_vz, ClosedForm, GridFn};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::dot;
use crate::positivity::{is_maximally_q_positive, p_set, q_sampling_tol, PointSet};
use crate::report::{Check, VerifyReport};
use crate::ssd::SsdSpace;
use crate::tol;

/// Θ_A(b*) = max over a of ⟨a, b*⟩ - q(a).
pub fn theta(space: &SsdSpace, set: &PointSet, b_star: &[f64]) -> Result<f64> {
    check_dims(space, set, b_star)?;
    Ok(theta_unchecked(space, set, b_star))
}

pub(crate) fn theta_unchecked(space: &SsdSpace, set: &PointSet, b_star: &[f64]) -> f64 {
    set.iter().map(|a| dot(a, b_star) - space.q(a)).fold(f64::NEG_INFINITY, f64::max)
}

/// Φ_A(b) = max over a of ⌊a, b⌋ - q(a).
pub fn phi(space: &SsdSpace, set: &PointSet, b: &[f64]) -> Result<f64> {
    check_dims(space, set, b)?;
    Ok(phi_unchecked(space, set, b))
}

/// Φ_A(b) through the second formula q(b) - min over a of q(b - a).
pub fn phi_via_q_gap(space: &SsdSpace, set: &PointSet, b: &[f64]) -> Result<f64> {
    check_dims(space, set, b)?;
    Ok(space.q(b) - set.min_q_gap(space, b).1)
}

fn phi_unchecked(space: &SsdSpace, set: &PointSet, b: &[f64]) -> f64 {
    set.iter().map(|a| space.pair(a, b) - space.q(a)).fold(f64::NEG_INFINITY, f64::max)
}

fn check_dims(space: &SsdSpace, set: &PointSet, x: &[f64]) -> Result<()> {
    if set.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: set.dim() });
    }
    if x.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: x.len() });
    }
    Ok(())
}

/// *Θ_A(c) = sup over dual probe points of ⟨c, b*⟩ - Θ_A(b*).
pub fn star_theta(space: &SsdSpace, set: &PointSet, dual_grid: &GridSpec, c: &[f64]) -> Result<f64> {
    check_dims(space, set, c)?;
    let probe = DualProbe::new(space, set, dual_grid, None);
    Ok(probe.star(c))
}

/// Dual points where Θ_A is sampled, with its values.
#[derive(Clone, Debug)]
struct DualProbe {
    dim: usize,
    coords: Vec<f64>,
    theta: Vec<f64>,
}

impl DualProbe {
    /// The dual grid, plus ι of the set and ι of any primal grid point that
    /// misses the dual lattice. Including ι(A) and ι(grid) makes the chain
    /// *Θ ≥ Φ^@ ≥ Φ hold exactly on the sampled data.
    fn new(space: &SsdSpace, set: &PointSet, dual_grid: &GridSpec, primal: Option<&GridSpec>) -> Self {
        let d = space.dim();
        let mut coords = dual_grid.coords();
        for a in set.iter() {
            coords.extend(space.iota_apply(a));
        }
        if let Some(g) = primal {
            for b in g.coords().chunks(d) {
                let y = space.iota_apply(b);
                if dual_grid.locate(&y).is_none() {
                    coords.extend(y);
                }
            }
        }
        let qa: Vec<f64> = set.iter().map(|a| space.q(a)).collect();
        let theta = coords
            .par_chunks(d)
            .map(|y| set.iter().zip(&qa).map(|(a, q)| dot(a, y) - q).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Self { dim: d, coords, theta }
    }

    fn star(&self, c: &[f64]) -> f64 {
        self.coords
            .chunks(self.dim)
            .zip(&self.theta)
            .map(|(y, t)| dot(c, y) - t)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn closed_form(&self) -> ClosedForm {
        ClosedForm::SupAffine { dim: self.dim, slopes: self.coords.clone(), intercepts: self.theta.iter().map(|t| -t).collect() }
    }
}

/// Θ_A on the dual grid, Φ_A and *Θ_A on the primal grid.
#[derive(Clone, Debug)]
pub struct FitzTriple {
    pub set: PointSet,
    pub theta: GridFn,
    pub phi: GridFn,
    pub star_theta: GridFn,
    probe: DualProbe,
}

impl FitzTriple {
    pub fn build(space: &SsdSpace, set: &PointSet, grid: &GridSpec, dual_grid: &GridSpec) -> Result<Self> {
        let d = space.dim();
        if set.dim() != d || grid.dim() != d || dual_grid.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: grid.dim() });
        }
        let probe = DualProbe::new(space, set, dual_grid, Some(grid));
        let n_dual = dual_grid.len();
        let theta_form = ClosedForm::SupAffine {
            dim: d,
            slopes: set.iter().flatten().copied().collect(),
            intercepts: set.iter().map(|a| -space.q(a)).collect(),
        };
        let theta = GridFn::assume_convex(dual_grid.clone(), probe.theta[..n_dual].to_vec(), Some(theta_form))?;

        let cs = grid.coords();
        let phi_values: Vec<f64> = cs.par_chunks(d).map(|b| phi_unchecked(space, set, b)).collect();
        let phi_form = ClosedForm::SupAffine {
            dim: d,
            slopes: set.iter().flat_map(|a| space.iota_apply(a)).collect(),
            intercepts: set.iter().map(|a| -space.q(a)).collect(),
        };
        let phi = GridFn::assume_convex(grid.clone(), phi_values, Some(phi_form))?;

        let star_values: Vec<f64> = cs.par_chunks(d).map(|c| probe.star(c)).collect();
        let star_theta = GridFn::assume_convex(grid.clone(), star_values, Some(probe.closed_form()))?;
        Ok(Self { set: set.clone(), theta, phi, star_theta, probe })
    }

    /// *Θ_A at an arbitrary point through the full dual probe.
    pub fn star_theta_at(&self, c: &[f64]) -> f64 {
        self.probe.star(c)
    }

    /// Φ_A^@(c) = sup over primal grid and set points b of ⌊c, b⌋ - Φ_A(b).
    pub fn phi_at(&self, space: &SsdSpace, c: &[f64]) -> f64 {
        let d = space.dim();
        let grid = self.phi.grid().coords();
        let on_grid = grid
            .chunks(d)
            .zip(self.phi.values())
            .map(|(b, v)| space.pair(c, b) - v)
            .fold(f64::NEG_INFINITY, f64::max);
        self.set
            .iter()
            .map(|a| space.pair(c, a) - space.q(a))
            .fold(on_grid, f64::max)
    }

    /// Φ_A^@ sampled on the primal grid.
    pub fn phi_at_grid(&self, space: &SsdSpace) -> Result<GridFn> {
        let d = space.dim();
        let values: Vec<f64> = self.phi.grid().coords().par_chunks(d).map(|c| self.phi_at(space, c)).collect();
        GridFn::assume_convex(self.phi.grid().clone(), values, None)
    }
}

struct Worst {
    value: f64,
    at: Vec<f64>,
}

impl Worst {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, at: Vec::new() }
    }

    fn offer(&mut self, value: f64, at: &[f64]) {
        if value > self.value {
            self.value = value;
            self.at = at.to_vec();
        }
    }

    fn check(self, id: &str, anchor: &str, tolerance: f64) -> Check {
        let residual = self.value.max(0.0);
        Check::new(id, anchor).verdict(self.value <= tolerance, residual, tolerance).witness(if self.at.is_empty() {
            vec![]
        } else {
            vec![self.at]
        })
    }
}

/// Grid comparison of P(h) with a sampled set.
#[derive(Clone, Debug)]
pub(crate) struct SetMatch {
    /// Farthest grid point of P(h) beyond `radius` from the set, if any.
    pub witness: Option<Vec<f64>>,
    pub distance: f64,
    pub radius: f64,
    /// Set points where h - q exceeds the membership tolerance.
    pub outside: Vec<Vec<f64>>,
}

impl SetMatch {
    pub fn pass(&self) -> bool {
        self.witness.is_none() && self.outside.is_empty()
    }
}

/// P(h) = A on the grid: every touching grid point lies within the set's
/// mesh of A, and h touches q at every point of A.
pub(crate) fn touch_set_match(space: &SsdSpace, h: &GridFn, set: &PointSet) -> SetMatch {
    let d = space.dim();
    let found: Vec<Vec<f64>> = h
        .grid()
        .coords()
        .chunks(d)
        .zip(h.values())
        .filter(|(c, v)| *v - space.q(c) <= tol::MEMBERSHIP)
        .map(|(c, _)| c.to_vec())
        .collect();
    let radius = set.mesh(space).max(tol::CLOSED_FORM);
    let (distance, witness) = same_set(space, set, &found, radius);
    let outside = set.iter().filter(|a| h.eval(a) - space.q(a) > tol::MEMBERSHIP).cloned().collect();
    SetMatch { witness, distance, radius, outside }
}

/// Farthest point of `found` lying more than `radius` from the set.
fn same_set(space: &SsdSpace, set: &PointSet, found: &[Vec<f64>], radius: f64) -> (f64, Option<Vec<f64>>) {
    let mut worst = (0.0, None);
    for b in found {
        let (_, dist) = set.nearest(space, b);
        if dist > radius && dist > worst.0 {
            worst = (dist, Some(b.clone()));
        }
    }
    worst
}

/// The elementary properties of Θ_A, Φ_A, *Θ_A and Φ_A^@ on a grid.
pub fn fitzpatrick_family_suite(space: &SsdSpace, set: &PointSet, grid: &GridSpec, dual_grid: &GridSpec) -> Result<VerifyReport> {
    let d = space.dim();
    let triple = FitzTriple::build(space, set, grid, dual_grid)?;
    let phi_at = triple.phi_at_grid(space)?;
    let mut report = VerifyReport::new("fitzpatrick-family");
    report.set_grid(grid);
    let cs = grid.coords();
    let exact = |v: f64| tol::EXACT * (1.0 + v.abs());

    // two formulas for Φ, on grid and set points
    let mut w = Worst::new();
    for b in cs.chunks(d).chain(set.iter().map(|a| a.as_slice())) {
        let a = phi_unchecked(space, set, b);
        let v = space.q(b) - set.min_q_gap(space, b).1;
        w.offer((a - v).abs() - exact(a), b);
    }
    report.push(w.check("phi-two-formulas", "sup form and q-gap form of Phi agree", 0.0).note("tolerance 1e-12 relative to |Phi|"));

    let mut w = Worst::new();
    for a in set.iter() {
        let v = phi_unchecked(space, set, a);
        w.offer((v - space.q(a)).abs() - exact(v), a);
    }
    report.push(w.check("phi-equals-q-on-set", "Phi equals q on A", 0.0));

    report.push(
        Check::new("theta-convex", "Theta is convex and lower semicontinuous")
            .verdict(triple.theta.check_convex().is_ok(), 0.0, tol::CONVEXITY_REL)
            .note("finite max of affine functions, checked by midpoints on the dual grid"),
    );

    // (*Θ)^@ = Φ on A, with the primal probe grid ∪ A
    let star_on_set: Vec<f64> = set.iter().map(|a| triple.star_theta_at(a)).collect();
    let mut w = Worst::new();
    for a in set.iter() {
        let on_grid = cs
            .chunks(d)
            .zip(triple.star_theta.values())
            .map(|(c, v)| space.pair(a, c) - v)
            .fold(f64::NEG_INFINITY, f64::max);
        let at = set
            .iter()
            .zip(&star_on_set)
            .map(|(c, v)| space.pair(a, c) - v)
            .fold(on_grid, f64::max);
        let p = phi_unchecked(space, set, a);
        w.offer((at - p).abs(), a);
    }
    report.push(w.check("star-theta-conjugate-is-phi", "intrinsic conjugate of star-Theta equals Phi on A", tol::GRID));

    let mut w = Worst::new();
    for (a, s) in set.iter().zip(&star_on_set) {
        w.offer(s - space.q(a), a);
    }
    report.push(w.check("star-theta-below-q-on-set", "star-Theta is at most q on A", tol::GRID));

    let mut w1 = Worst::new();
    let mut w2 = Worst::new();
    for (k, c) in cs.chunks(d).enumerate() {
        let (s, pa, p) = (triple.star_theta.values()[k], phi_at.values()[k], triple.phi.values()[k]);
        w1.offer(pa - s, c);
        w2.offer(p.max(space.q(c)) - pa, c);
    }
    report.push(w1.check("star-theta-above-phi-conjugate", "star-Theta dominates the intrinsic conjugate of Phi", tol::GRID));
    report.push(w2.check("phi-conjugate-above-phi-and-q", "intrinsic conjugate of Phi dominates Phi and q", tol::GRID));

    let mut w = Worst::new();
    for (a, s) in set.iter().zip(&star_on_set) {
        let q = space.q(a);
        w.offer((s - q).abs().max((triple.phi_at(space, a) - q).abs()), a);
    }
    report.push(w.check("family-equals-q-on-set", "star-Theta and the intrinsic conjugate of Phi equal q on A", tol::GRID));

    let maximal = is_maximally_q_positive(space, set, grid)?;
    if maximal.passed() {
        let mesh = set.mesh(space);
        let k = space.iota_norm().value;
        let mut w = Worst::new();
        for (c, p) in cs.chunks(d).zip(triple.phi.values()) {
            let (i, _) = set.min_q_gap(space, c);
            let reach = space.norm(&crate::linalg::sub(c, &set.points()[i]));
            w.offer(space.q(c) - p - q_sampling_tol(k, mesh, reach), c);
        }
        report.push(w.check("phi-above-q", "Phi dominates q when A is maximal", tol::GRID).note("grid slack from the set mesh"));
        let mut w = Worst::new();
        for (a, s) in set.iter().zip(&star_on_set) {
            w.offer(space.q(a) - s, a);
        }
        report.push(w.check("set-inside-p-star-theta", "A lies in P(star-Theta)", tol::MEMBERSHIP));

        let radius = mesh.max(tol::CLOSED_FORM);
        let families: [(&str, &[f64]); 3] =
            [("star-theta", triple.star_theta.values()), ("phi-conjugate", phi_at.values()), ("phi", triple.phi.values())];
        let mut worst = (0.0, None, "");
        for (name, values) in families {
            let found: Vec<Vec<f64>> = cs
                .chunks(d)
                .zip(values)
                .filter(|(c, v)| *v - space.q(c) <= tol::MEMBERSHIP)
                .map(|(c, _)| c.to_vec())
                .collect();
            let (dist, at) = same_set(space, set, &found, radius);
            if dist > worst.0 {
                worst = (dist, at, name);
            }
        }
        let check = Check::new("p-sets-equal-set", "P(star-Theta), P(conjugate of Phi) and P(Phi) all equal A")
            .verdict(worst.1.is_none(), worst.0, radius)
            .note(if worst.1.is_some() { format!("{} touches q away from A", worst.2) } else { "grid points touching q lie within one set mesh of A".into() });
        report.push(match worst.1 {
            Some(at) => check.witness(vec![at]),
            None => check,
        });
    } else {
        for id in ["phi-above-q", "set-inside-p-star-theta", "p-sets-equal-set"] {
            report.push(Check::new(id, "requires A maximally q-positive").skipped("A is not maximally q-positive on the grid"));
        }
    }
    let gap = cs
        .chunks(d)
        .enumerate()
        .map(|(k, _)| triple.star_theta.values()[k] - phi_at.values()[k])
        .fold(0.0_f64, f64::max);
    report.push(
        Check::new("star-theta-minus-phi-conjugate", "observed gap between star-Theta and the intrinsic conjugate of Phi")
            .verdict(true, gap, 0.0)
            .note("informational"),
    );
    Ok(report)
}

/// Largest value of *Θ_A - Φ_A^@ on the grid.
pub fn star_theta_gap(space: &SsdSpace, set: &PointSet, grid: &GridSpec, dual_grid: &GridSpec) -> Result<(f64, Vec<f64>)> {
    let triple = FitzTriple::build(space, set, grid, dual_grid)?;
    let phi_at = triple.phi_at_grid(space)?;
    let (k, gap) = triple
        .star_theta
        .values()
        .iter()
        .zip(phi_at.values())
        .map(|(s, p)| s - p)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (k, g)| if g > a.1 { (k, g) } else { a });
    Ok((gap, grid.point(k)))
}

/// For f ≥ q with A = P(f): *Θ_A ≥ f ≥ Φ_A and Φ_A* ≥ f* ≥ Θ_A; for a VZ f
/// and h inside the sandwich, h and h^@ are VZ and P(h) = A.
pub fn sandwich_suite(space: &SsdSpace, f: &GridFn, h: Option<&GridFn>, dual_grid: &GridSpec) -> Result<VerifyReport> {
    let d = space.dim();
    let set = p_set(f, space)?.ok_or_else(|| Error::PreconditionFailed("P(f) is empty on the grid".into()))?;
    let grid = f.grid();
    let triple = FitzTriple::build(space, &set, grid, dual_grid)?;
    let mut report = VerifyReport::new("sandwich");
    report.set_grid(grid);
    let cs = grid.coords();

    let mut upper = Worst::new();
    let mut lower = Worst::new();
    for (k, c) in cs.chunks(d).enumerate() {
        let fv = f.values()[k];
        if fv.is_finite() {
            upper.offer(fv - triple.star_theta.values()[k], c);
        }
        lower.offer(triple.phi.values()[k] - fv, c);
    }
    report.push(upper.check("star-theta-above-f", "star-Theta dominates f", tol::MEMBERSHIP));
    report.push(lower.check("f-above-phi", "f dominates Phi", tol::MEMBERSHIP));

    let fstar = conjugate(f, dual_grid)?;
    let phistar = conjugate(&triple.phi, dual_grid)?;
    let mut upper = Worst::new();
    let mut lower = Worst::new();
    for (j, y) in dual_grid.coords().chunks(d).enumerate() {
        // a box-truncated conjugate only underestimates; count it when it passes
        let e = fstar.fun.values()[j] - phistar.fun.values()[j];
        if phistar.interior[j] || e <= 0.0 {
            upper.offer(e, y);
        }
        lower.offer(triple.theta.values()[j] - fstar.fun.values()[j], y);
    }
    report.push(upper.check("phi-conjugate-above-f-conjugate", "conjugate of Phi dominates the conjugate of f", tol::MEMBERSHIP));
    report.push(lower.check("f-conjugate-above-theta", "conjugate of f dominates Theta", tol::MEMBERSHIP));

    let vz = is_vz(f, space)?;
    let f_is_vz = vz.passed();
    report.absorb("f", vz);
    if let Some(h) = h {
        if h.grid() != grid {
            return Err(Error::GridMismatch);
        }
        for (k, c) in cs.chunks(d).enumerate() {
            let hv = h.values()[k];
            let above = hv - triple.star_theta.values()[k];
            let below = triple.phi.values()[k] - hv;
            let residual = above.max(below);
            if residual > tol::MEMBERSHIP {
                return Err(Error::BracketViolated { residual, at: c.to_vec() });
            }
        }
        if f_is_vz {
            report.absorb("h", is_vz(h, space)?);
            let at = intrinsic_conjugate(h, space)?;
            report.absorb("h-intrinsic", at.report);
            report.absorb("h-conjugate", is_vz(&at.fun, space)?);
            let m = touch_set_match(space, h, &set);
            let check = Check::new("h-touches-q-exactly-on-set", "P(h) equals P(f)").verdict(m.pass(), m.distance, m.radius);
            report.push(match m.witness {
                Some(at) => check.witness(vec![at]),
                None => check,
            });
        } else {
            report.push(Check::new("h/vz-infconv-zero", "h inside the sandwich of a VZ f is VZ").skipped("f is not VZ on the grid"));
        }
    }
    Ok(report)
}

/// For h ≤ q on A: h ≤ *Θ_A on the grid.
pub fn sigma_minorant_test(space: &SsdSpace, set: &PointSet, h: &GridFn, dual_grid: &GridSpec) -> Result<VerifyReport> {
    let d = space.dim();
    for a in set.iter() {
        let excess = h.eval(a) - space.q(a);
        if excess > tol::MEMBERSHIP {
            return Err(Error::NotAMinorant { excess, at: a.clone() });
        }
    }
    let triple = FitzTriple::build(space, set, h.grid(), dual_grid)?;
    let mut w = Worst::new();
    for (k, c) in h.grid().coords().chunks(d).enumerate() {
        let hv = h.values()[k];
        if hv.is_finite() {
            w.offer(hv - triple.star_theta.values()[k], c);
        }
    }
    let mut report = VerifyReport::new("sigma-minorant");
    report.set_grid(h.grid());
    report.push(w.check("minorant-below-star-theta", "a convex minorant of q on A lies below star-Theta", tol::GRID));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::dual_grid_for;
    use crate::ssd::{make_ssd, NormSpec, ProductNorm};

    fn product() -> SsdSpace {
        make_ssd(vec![vec![0.0, 1.0], vec![1.0, 0.0]], NormSpec::product(ProductNorm::Two, 1.0), "product").unwrap()
    }

    fn diagonal(grid: &GridSpec) -> PointSet {
        PointSet::new(grid.axis_values(0).into_iter().map(|t| vec![t, t]).collect(), "diagonal").unwrap()
    }

    #[test]
    fn closed_forms_on_diagonal() {
        let s = product();
        let g = GridSpec::cube(2, -2.0, 2.0, 81).unwrap();
        let a = diagonal(&g);
        // Θ(y, y*) = (y + y*)²/4 when (y + y*)/2 is a sample
        for (y1, y2) in [(0.5, 0.3), (-1.0, 0.2), (1.1, 1.1)] {
            let t = theta(&s, &a, &[y1, y2]).unwrap();
            assert!((t - (y1 + y2) * (y1 + y2) / 4.0).abs() < 1e-12);
            let p = phi(&s, &a, &[y1, y2]).unwrap();
            assert!((p - (y1 * y2 + 0.25 * (y1 - y2) * (y1 - y2))).abs() < 1e-12);
            assert!((phi_via_q_gap(&s, &a, &[y1, y2]).unwrap() - p).abs() < 1e-12);
        }
        let origin = PointSet::new(vec![vec![0.0, 0.0]], "").unwrap();
        assert_eq!(phi(&s, &origin, &[1.3, -0.7]).unwrap(), 0.0);
    }

    #[test]
    fn family_suite_diagonal_and_singleton() {
        let s = product();
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let dual = dual_grid_for(&s, &g, 0.5).unwrap();
        let r = fitzpatrick_family_suite(&s, &diagonal(&g), &g, &dual).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.count(crate::report::Status::Skipped), 0);
        let origin = PointSet::new(vec![vec![0.0, 0.0]], "").unwrap();
        let r = fitzpatrick_family_suite(&s, &origin, &g, &dual).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.count(crate::report::Status::Skipped), 3);
    }

    #[test]
    fn zero_pairing_separates_star_theta_from_phi_conjugate() {
        let zero = make_ssd(vec![vec![0.0; 2]; 2], NormSpec::Euclidean, "zero").unwrap();
        let g = GridSpec::cube(2, -2.0, 2.0, 21).unwrap();
        let dual = dual_grid_for(&zero, &g, 0.5).unwrap();
        let a = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], "").unwrap();
        let (gap, _) = star_theta_gap(&zero, &a, &g, &dual).unwrap();
        assert!(gap >= 0.5);
    }

    #[test]
    fn sandwich_and_minorants() {
        let s = product();
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let dual = dual_grid_for(&s, &g, 0.5).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(2)).unwrap();
        let a = p_set(&f, &s).unwrap().unwrap();
        let triple = FitzTriple::build(&s, &a, &g, &dual).unwrap();
        let r = sandwich_suite(&s, &f, Some(&triple.phi), &dual).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        let low = triple.phi.shifted(-1.0);
        assert!(matches!(sandwich_suite(&s, &f, Some(&low), &dual), Err(Error::BracketViolated { .. })));

        assert!(sigma_minorant_test(&s, &a, &triple.phi, &dual).unwrap().passed());
        let high = triple.phi.shifted(1.0);
        assert!(matches!(sigma_minorant_test(&s, &a, &high, &dual), Err(Error::NotAMinorant { .. })));
    }
}
