//! The dual side of a Banach SSD space.
//!
//! Dual vectors live in ℝᵈ under the dot product, so ι = M and the dual
//! pairing compatible with ⌈ι(b), c*⌉ = ⟨b, c*⟩ is M̃ = M⁻¹.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{block_slope, conjugate, gap_infconv_profile, is_mas, is_vz, GridFn};
use crate::error::{Error, Result};
use crate::fitzpatrick::{theta_unchecked, touch_set_match, FitzTriple};
use crate::grid::GridSpec;
use crate::linalg::{bilinear, dot, from_dmatrix, matvec, normalize_witness, sub, sub_into, to_dmatrix};
use crate::numeric::{maximize_on_sphere, nested_convex_minimize};
use crate::positivity::{is_maximally_q_positive, PointSet};
use crate::report::{Check, VerifyReport};
use crate::ssd::{random_pairs, NormDescriptor, NormSpec, SsdSpace};
use crate::tol;

/// Pairing M̃ and norm on the dual of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSsd {
    dim: usize,
    pairing: Vec<f64>,
    norm: NormSpec,
    label: String,
}

/// JSON shape of a dual, stored under the space's "dual" key.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualDescriptor {
    pub pairing: Vec<Vec<f64>>,
    pub norm: NormDescriptor,
}

impl DualSsd {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pairing_matrix(&self) -> &[f64] {
        &self.pairing
    }

    pub fn norm_spec(&self) -> &NormSpec {
        &self.norm
    }

    /// ⌈y, z⌉.
    pub fn pair(&self, y: &[f64], z: &[f64]) -> f64 {
        bilinear(&self.pairing, y, z)
    }

    pub fn q_tilde(&self, y: &[f64]) -> f64 {
        0.5 * self.pair(y, y)
    }

    pub fn norm(&self, y: &[f64]) -> f64 {
        self.norm.norm(y)
    }

    /// p̃ = ½‖·‖*² + q̃.
    pub fn p_tilde(&self, y: &[f64]) -> f64 {
        0.5 * self.norm.norm_sq(y) + self.q_tilde(y)
    }

    pub fn descriptor(&self) -> DualDescriptor {
        DualDescriptor {
            pairing: self.pairing.chunks(self.dim).map(|r| r.to_vec()).collect(),
            norm: NormDescriptor::from_norm(&self.norm, self.dim),
        }
    }

    /// Rebuild a stored dual, checking it against the space.
    pub fn from_descriptor(space: &SsdSpace, desc: &DualDescriptor) -> Result<Self> {
        let d = space.dim();
        if desc.pairing.len() != d || desc.pairing.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: desc.pairing.len() });
        }
        let dual = DualSsd {
            dim: d,
            pairing: desc.pairing.iter().flatten().copied().collect(),
            norm: desc.norm.to_norm()?,
            label: format!("{}*", space.label()),
        };
        dual.norm.validate(d)?;
        validate(space, &dual)?;
        Ok(dual)
    }
}

/// Construct the canonical dual: M̃ = M⁻¹ with the dual norm.
pub fn make_dual(space: &SsdSpace) -> Result<DualSsd> {
    let d = space.dim();
    let m = space.iota();
    let sv = m.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), s| (l.min(*s), h.max(*s)));
    if hi == 0.0 || lo <= 1e-12 * hi {
        return Err(Error::SingularPairing);
    }
    let inv = m.try_inverse().ok_or(Error::SingularPairing)?;
    let inv = (&inv + inv.transpose()) * 0.5;
    let mut pairing = from_dmatrix(&inv);
    // entries that are zero up to rounding stay exactly zero
    pairing.iter_mut().filter(|v| v.abs() < 1e-15).for_each(|v| *v = 0.0);
    let dual = DualSsd { dim: d, pairing, norm: space.norm_spec().dual(d)?, label: format!("{}*", space.label()) };
    validate(space, &dual)?;
    Ok(dual)
}

fn validate(space: &SsdSpace, dual: &DualSsd) -> Result<()> {
    let pairs = random_pairs(space.dim(), 1000, tol::DEFAULT_SEED, 1.0);
    let report = compatibility_checks(space, dual, &pairs)?;
    if let Some(bad) = report.failures().next() {
        return Err(Error::PreconditionFailed(format!("dual pairing incompatible: {} residual {:e}", bad.id, bad.worst_residual)));
    }
    let (value, witness) = p_tilde_minimum(dual);
    if value < -tol::CLOSED_FORM {
        return Err(Error::NoDual { witness, value });
    }
    Ok(())
}

/// ⌈ι(b), c*⌉ = ⟨b, c*⟩, ⌈ι(b), ι(c)⌉ = ⌊b, c⌋ and q̃∘ι = q on the pairs.
pub fn compatibility_checks(space: &SsdSpace, dual: &DualSsd, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<VerifyReport> {
    if dual.dim != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: dual.dim });
    }
    let mut report = VerifyReport::new("dual-compatibility");
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));
    let mut worst = [(0.0_f64, 0usize); 3];
    for (k, (b, c)) in pairs.iter().enumerate() {
        let ib = space.iota_apply(b);
        let ic = space.iota_apply(c);
        let r = [
            rel(dual.pair(&ib, c), dot(b, c)),
            rel(dual.pair(&ib, &ic), space.pair(b, c)),
            rel(dual.q_tilde(&ib), space.q(b)),
        ];
        for (w, v) in worst.iter_mut().zip(r) {
            if v > w.0 {
                *w = (v, k);
            }
        }
    }
    let ids = [
        ("iota-pairs-with-dot", "the dual pairing against iota(b) is the dot product with b"),
        ("iota-preserves-pairing", "iota carries the pairing onto the dual pairing"),
        ("dual-q-of-iota-is-q", "the dual quadratic form composed with iota is q"),
    ];
    for ((id, anchor), (v, k)) in ids.into_iter().zip(worst) {
        let check = Check::new(id, anchor).verdict(v <= 1e-10, v, 1e-10);
        report.push(match pairs.get(k) {
            Some((b, c)) => check.witness(vec![b.clone(), c.clone()]),
            None => check,
        });
    }
    Ok(report.with_seed(tol::DEFAULT_SEED))
}

/// min of p̃ over unit vectors and its normalized minimizer; p̃ is
/// 2-homogeneous, so its sign there decides p̃ ≥ 0.
///
/// Exact eigenvalue test for quadratic dual norms, sampled and polished
/// otherwise.
pub fn p_tilde_minimum(dual: &DualSsd) -> (f64, Vec<f64>) {
    let d = dual.dim;
    let direction = match dual.norm.weight_matrix(d) {
        Some(w) => {
            let sum = w + to_dmatrix(&dual.pairing, d);
            let eig = SymmetricEigen::new(sum);
            let (k, _) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, l)| if *l < acc.1 { (i, *l) } else { acc });
            eig.eigenvectors.column(k).iter().copied().collect::<Vec<f64>>()
        }
        None => maximize_on_sphere(d, 10_000, tol::DEFAULT_SEED, |y| -dual.p_tilde(y)).1,
    };
    let witness = normalize_witness(&direction);
    (dual.p_tilde(&witness), witness)
}

/// sup{⟨x, y⟩ : ‖x‖ ≤ 1}, numerically.
///
/// Up to dimension 4 this is 1 / min{‖z‖ : ⟨z, y⟩ = 1}, a convex problem on
/// the hyperplane solved by nested golden sections; the sphere search stalls
/// on the ridges of max-type norms. Higher dimensions use the sphere search.
pub fn numeric_dual_norm(space: &SsdSpace, y: &[f64], seed: u64) -> f64 {
    let d = y.len();
    let len2 = dot(y, y);
    if len2 == 0.0 {
        return 0.0;
    }
    if d > 4 {
        return maximize_on_sphere(d, 2_000, seed, |x| dot(x, y) / space.norm(x)).0;
    }
    let z0: Vec<f64> = y.iter().map(|v| v / len2).collect();
    // orthonormal basis of y⊥ by Gram-Schmidt over the standard basis
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let unit: Vec<f64> = y.iter().map(|v| v / len2.sqrt()).collect();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        for b in std::iter::once(&unit).chain(basis.iter()) {
            let c = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(u, v)| *u -= c * v);
        }
        let n = dot(&e, &e).sqrt();
        if n > 1e-8 && basis.len() < d - 1 {
            basis.push(e.iter().map(|v| v / n).collect());
        }
    }
    let radius = 2.0 * dot(&z0, &z0).sqrt();
    let (min, _) = nested_convex_minimize(&vec![0.0; d - 1], radius, |t| {
        let mut z = z0.clone();
        for (tk, b) in t.iter().zip(&basis) {
            z.iter_mut().zip(b).for_each(|(u, v)| *u += tk * v);
        }
        space.norm(&z)
    });
    1.0 / min
}

/// Compare the numerical sup{⟨x, y⟩ : ‖x‖ ≤ 1} with the closed-form dual norm.
pub fn dual_norm_check(space: &SsdSpace, dual: &DualSsd, samples: &[Vec<f64>], seed: u64) -> Result<VerifyReport> {
    let d = space.dim();
    let rows: Vec<(f64, f64)> = samples
        .par_iter()
        .enumerate()
        .map(|(i, y)| {
            if y.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: y.len() });
            }
            Ok((numeric_dual_norm(space, y, seed.wrapping_add(i as u64)), dual.norm(y)))
        })
        .collect::<Result<_>>()?;
    let mut worst = (0.0_f64, 0usize);
    for (i, (n, c)) in rows.iter().enumerate() {
        let r = (n - c).abs() / c.max(1.0);
        if r > worst.0 {
            worst = (r, i);
        }
    }
    let mut report = VerifyReport::new("dual-norm").with_seed(seed);
    let check = Check::new("dual-norm-matches-closed-form", "sampled operator norm of the functional equals the dual norm")
        .verdict(worst.0 <= 1e-4, worst.0, 1e-4)
        .note(format!("{} samples; {}", samples.len(), dual.norm.describe()));
    report.push(match samples.get(worst.1) {
        Some(y) => check.witness(vec![y.clone()]),
        None => check,
    });
    Ok(report)
}

/// How a density witness was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityRoute {
    /// c = (0, u + τ²v) for b* = (u, v) on a product space.
    Constructive,
    /// c = ι⁻¹(b*), so that b* - ι(c) = 0.
    Preimage,
    /// Brute-force minimum over grid points.
    Grid,
}

/// p̃(b* - ι(c)) at the witness c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub value: f64,
    pub c: Vec<f64>,
    pub route: DensityRoute,
}

/// A c with p̃(b* - ι(c)) small.
pub fn p_tilde_density(space: &SsdSpace, dual: &DualSsd, b_star: &[f64]) -> Result<DensityWitness> {
    let d = space.dim();
    if b_star.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: b_star.len() });
    }
    let (c, route) = match space.norm_spec() {
        NormSpec::Product { tau, .. } if space.is_product_pairing() => {
            let n = d / 2;
            let (u, v) = b_star.split_at(n);
            let mut c = vec![0.0; d];
            for k in 0..n {
                c[n + k] = u[k] + tau * tau * v[k];
            }
            (c, DensityRoute::Constructive)
        }
        _ => {
            let inv = to_dmatrix(space.pairing_matrix(), d).try_inverse().ok_or(Error::SingularPairing)?;
            (matvec(&from_dmatrix(&inv), b_star), DensityRoute::Preimage)
        }
    };
    let value = dual.p_tilde(&sub(b_star, &space.iota_apply(&c)));
    Ok(DensityWitness { value, c, route })
}

/// Brute-force min over grid points c of p̃(b* - ι(c)).
pub fn p_tilde_density_on_grid(space: &SsdSpace, dual: &DualSsd, b_star: &[f64], grid: &GridSpec) -> Result<DensityWitness> {
    let d = space.dim();
    if b_star.len() != d || grid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.dim() });
    }
    let mut diff = vec![0.0; d];
    let mut best = (f64::INFINITY, 0usize);
    for (k, c) in grid.coords().chunks(d).enumerate() {
        sub_into(b_star, &space.iota_apply(c), &mut diff);
        let v = dual.p_tilde(&diff);
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(DensityWitness { value: best.0, c: grid.point(best.1), route: DensityRoute::Grid })
}

/// Largest space-norm length of a half-cell vector (±h₁/2, …, ±h_d/2).
fn half_cell_radius(space: &SsdSpace, grid: &GridSpec) -> f64 {
    let h = grid.spacings();
    let d = h.len();
    (0..1usize << d)
        .map(|mask| {
            let v: Vec<f64> = (0..d).map(|a| if mask >> a & 1 == 1 { 0.5 * h[a] } else { -0.5 * h[a] }).collect();
            space.norm(&v)
        })
        .fold(0.0, f64::max)
}

/// Density of ι(B) for p̃, by the explicit witness at every dual grid point
/// and by brute force over the primal grid where ι⁻¹(b*) lies in its box.
pub fn density_check(space: &SsdSpace, dual: &DualSsd, primal: &GridSpec, dual_grid: &GridSpec) -> Result<VerifyReport> {
    let d = space.dim();
    if primal.dim() != d || dual_grid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: primal.dim() });
    }
    let ys = dual_grid.coords();
    let witnesses: Vec<DensityWitness> =
        ys.par_chunks(d).map(|y| p_tilde_density(space, dual, y)).collect::<Result<_>>()?;
    let (k, worst) = witnesses
        .iter()
        .map(|w| w.value)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let mut report = VerifyReport::new("p-tilde-density");
    report.set_grid(dual_grid);
    report.push(
        Check::new("p-tilde-density-witness", "the explicit witness drives the dual p to zero")
            .verdict(worst <= tol::DENSITY, worst.max(0.0), tol::DENSITY)
            .witness(vec![dual_grid.point(k), witnesses[k].c.clone()])
            .note(format!("route: {:?}", witnesses[k].route)),
    );

    // p̃(ι(e)) = ½‖ι(e)‖*² + q(e) ≤ ½(‖ι‖² + ‖ι‖)‖e‖² for a lattice offset e
    let k_iota = space.iota_norm().value;
    let delta = half_cell_radius(space, primal);
    let grid_tol = tol::DENSITY + 0.5 * (k_iota * k_iota + k_iota) * delta * delta;
    let rows: Vec<Option<(f64, Vec<f64>)>> = ys
        .par_chunks(d)
        .zip(&witnesses)
        .map(|(y, w)| {
            if w.route == DensityRoute::Preimage && !primal.contains(&w.c) {
                return Ok(None);
            }
            let inv = to_dmatrix(space.pairing_matrix(), d).try_inverse().ok_or(Error::SingularPairing)?;
            let pre = matvec(&from_dmatrix(&inv), y);
            if !primal.contains(&pre) {
                return Ok(None);
            }
            let g = p_tilde_density_on_grid(space, dual, y, primal)?;
            Ok(Some((g.value, y.to_vec())))
        })
        .collect::<Result<_>>()?;
    let probed = rows.iter().flatten().count();
    let worst = rows.into_iter().flatten().fold((f64::NEG_INFINITY, Vec::new()), |acc, (v, y)| if v > acc.0 { (v, y) } else { acc });
    let check = Check::new("p-tilde-density-grid", "a grid point of the primal box drives the dual p to zero");
    report.push(if probed == 0 {
        check.skipped("no dual grid point has its preimage inside the primal box")
    } else {
        check
            .verdict(worst.0 <= grid_tol, worst.0.max(0.0), grid_tol)
            .witness(vec![worst.1])
            .note(format!("{probed} dual points with preimage in the box"))
    });
    Ok(report)
}

/// Evidence that ι(B) is p̃-dense, tied to the space it was produced for.
#[derive(Clone, Debug)]
pub struct DensityCertificate {
    space_label: String,
    report: VerifyReport,
}

impl DensityCertificate {
    pub fn from_report(space: &SsdSpace, report: VerifyReport) -> Result<Self> {
        if report.suite != "p-tilde-density" || !report.passed() {
            return Err(Error::DensityNotVerified);
        }
        Ok(Self { space_label: space.label().to_string(), report })
    }

    pub fn report(&self) -> &VerifyReport {
        &self.report
    }

    fn covers(&self, space: &SsdSpace) -> Result<()> {
        if self.space_label != space.label() {
            return Err(Error::DensityNotVerified);
        }
        Ok(())
    }
}

/// Run `density_check` and keep the certificate if it passes.
pub fn certify_density(space: &SsdSpace, dual: &DualSsd, primal: &GridSpec, dual_grid: &GridSpec) -> Result<DensityCertificate> {
    DensityCertificate::from_report(space, density_check(space, dual, primal, dual_grid)?)
}

/// Both inf-convolutions of the primal/dual gap identity, per c.
#[derive(Clone, Debug)]
pub struct GapIdentity {
    /// ((f - q)∇p)(c).
    pub primal: Vec<f64>,
    /// ((f* - q̃)∇p̃)(ι(c)).
    pub dual: Vec<f64>,
    pub report: VerifyReport,
}

/// ((f - q)∇p)(c) + ((f* - q̃)∇p̃)(ι(c)) = 0 on `c_grid`.
///
/// The dual inf runs over dual grid points whose conjugate is not box
/// truncated. Without `tolerance` each point gets the grid allowance
/// h·slope of both minimizations.
pub fn gap_duality_identity(
    space: &SsdSpace,
    dual: &DualSsd,
    f: &GridFn,
    c_grid: &GridSpec,
    dual_grid: &GridSpec,
    tolerance: Option<f64>,
) -> Result<GapIdentity> {
    let d = space.dim();
    if f.dim() != d || c_grid.dim() != d || dual_grid.dim() != d || dual.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: c_grid.dim() });
    }
    let cs = c_grid.coords();
    let primal = gap_infconv_profile(f, space, &cs, tol::GRID);

    let star = conjugate(f, dual_grid)?;
    let ys = dual_grid.coords();
    let dual_gap: Vec<f64> = star
        .fun
        .values()
        .iter()
        .zip(ys.chunks(d))
        .zip(&star.interior)
        .map(|((v, y), ok)| if *ok { v - dual.q_tilde(y) } else { f64::INFINITY })
        .collect();
    let trusted: Vec<usize> = (0..dual_gap.len()).filter(|j| dual_gap[*j].is_finite()).collect();
    if trusted.is_empty() {
        return Err(Error::PreconditionFailed("every dual grid point is box-truncated".into()));
    }
    let hd = dual_grid.max_spacing();
    let (dual_vals, dual_tol): (Vec<f64>, Vec<f64>) = cs
        .par_chunks(d)
        .map(|c| {
            let ic = space.iota_apply(c);
            let mut diff = vec![0.0; d];
            let mut best = (f64::INFINITY, trusted[0]);
            for &j in &trusted {
                sub_into(&ic, &ys[j * d..(j + 1) * d], &mut diff);
                let v = dual_gap[j] + dual.p_tilde(&diff);
                if v < best.0 {
                    best = (v, j);
                }
            }
            let slope = block_slope(dual_grid, best.1, |j| {
                if !dual_gap[j].is_finite() {
                    return f64::INFINITY;
                }
                dual_gap[j] + dual.p_tilde(&sub(&ic, &ys[j * d..(j + 1) * d]))
            });
            (best.0, hd * slope)
        })
        .unzip();

    let mut worst = (f64::NEG_INFINITY, 0usize, 0.0, 0.0);
    for k in 0..dual_vals.len() {
        let sum = (primal.values[k] + dual_vals[k]).abs();
        let t = tolerance.unwrap_or(primal.tolerance[k] + dual_tol[k]);
        if sum - t > worst.0 - worst.2 || k == 0 {
            worst = (sum, k, t, sum - t);
        }
    }
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut report = VerifyReport::new("gap-duality-identity");
    report.set_grid(c_grid);
    report.push(
        Check::new("gap-infconv-sum-zero", "primal and dual gap inf-convolutions cancel")
            .verdict(worst.3 <= 0.0, worst.0, worst.2)
            .witness(vec![c_grid.point(worst.1)])
            .note(format!(
                "max |primal term| {:e}; max |dual term| {:e}; {} of {} dual points untruncated",
                max_abs(&primal.values),
                max_abs(&dual_vals),
                trusted.len(),
                dual_grid.len()
            )),
    );
    Ok(GapIdentity { primal: primal.values, dual: dual_vals, report })
}

/// VZ and MAS verdicts for one function, with their sub-reports.
#[derive(Clone, Debug)]
pub struct VzMasVerdict {
    pub vz: bool,
    pub mas: bool,
    pub vz_report: VerifyReport,
    pub mas_report: VerifyReport,
    /// Passes iff the two verdicts agree.
    pub report: VerifyReport,
}

/// Under p̃-density, f is VZ exactly when it is MAS.
pub fn vz_mas_equivalence(
    space: &SsdSpace,
    dual: &DualSsd,
    f: &GridFn,
    dual_grid: &GridSpec,
    density: &DensityCertificate,
) -> Result<VzMasVerdict> {
    density.covers(space)?;
    let vz_report = is_vz(f, space)?;
    let mas_report = is_mas(f, space, dual.pairing_matrix(), dual_grid)?;
    let (vz, mas) = (vz_report.passed(), mas_report.passed());
    let mut report = VerifyReport::new("vz-mas-equivalence");
    report.set_grid(f.grid());
    report.push(
        Check::new("vz-mas-verdicts-agree", "a function is VZ iff it is MAS when iota(B) is dense")
            .verdict(vz == mas, if vz == mas { 0.0 } else { 1.0 }, 0.0)
            .note(format!("{}: vz={vz} mas={mas}", f.label())),
    );
    Ok(VzMasVerdict { vz, mas, vz_report, mas_report, report })
}

/// Per-candidate facts used by the representability conditions.
#[derive(Clone, Debug)]
struct CandidateFacts {
    label: String,
    below_star_theta: bool,
    above_phi: bool,
    conjugate_above_dual_q: bool,
    mas: bool,
    vz: bool,
    touches_exactly: bool,
}

fn candidate_facts(
    space: &SsdSpace,
    dual: &DualSsd,
    set: &PointSet,
    triple: &FitzTriple,
    h: &GridFn,
    dual_grid: &GridSpec,
) -> Result<CandidateFacts> {
    if h.grid() != triple.phi.grid() {
        return Err(Error::GridMismatch);
    }
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for (k, hv) in h.values().iter().enumerate() {
        if hv.is_finite() {
            upper = upper.max(hv - triple.star_theta.values()[k]);
        }
        lower = lower.max(triple.phi.values()[k] - hv);
    }
    let mas = is_mas(h, space, dual.pairing_matrix(), dual_grid)?;
    let conjugate_above_dual_q = mas.check("mas-conjugate-above-dual-q").is_some_and(|c| c.passed());
    Ok(CandidateFacts {
        label: h.label().to_string(),
        below_star_theta: upper <= tol::MEMBERSHIP,
        above_phi: lower <= tol::MEMBERSHIP,
        conjugate_above_dual_q,
        mas: mas.passed(),
        vz: is_vz(h, space)?.passed(),
        touches_exactly: touch_set_match(space, h, set).pass(),
    })
}

/// Φ_A, *Θ_A and their midpoint, labelled.
pub fn default_candidates(triple: &FitzTriple) -> Result<Vec<GridFn>> {
    let mid: Vec<f64> = triple.phi.values().iter().zip(triple.star_theta.values()).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(vec![
        triple.phi.clone().with_label("phi"),
        triple.star_theta.clone().with_label("star-theta"),
        GridFn::assume_convex(triple.phi.grid().clone(), mid, None)?.with_label("midpoint"),
    ])
}

/// Evaluate the equivalent representability conditions for a maximally
/// q-positive sampled set and require unanimous verdicts.
///
/// (a) inf q̃(b* - ι(A)) ≤ 0 and (b) Θ_A ≥ q̃ on ι(grid), (c) Φ_A* ≥ q̃
/// on the untruncated dual grid points; (f) Φ_A and (g) *Θ_A are VZ. The existence and universal
/// conditions over functions h run over `candidates` (default: Φ_A, *Θ_A
/// and their midpoint).
pub fn representability_battery(
    space: &SsdSpace,
    dual: &DualSsd,
    set: &PointSet,
    grid: &GridSpec,
    dual_grid: &GridSpec,
    density: &DensityCertificate,
    candidates: Option<Vec<GridFn>>,
) -> Result<VerifyReport> {
    density.covers(space)?;
    let d = space.dim();
    if set.dim() != d || grid.dim() != d || dual_grid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.dim() });
    }
    let maximal = is_maximally_q_positive(space, set, grid)?;
    if !maximal.passed() {
        return Err(Error::PreconditionFailed(format!("{} is not maximally q-positive on the grid", set.label())));
    }
    let triple = FitzTriple::build(space, set, grid, dual_grid)?;
    let mut report = VerifyReport::new("representability");
    report.set_grid(grid);
    report.absorb("precondition", maximal);

    // (a) and (b) compute -min q̃(b* - ι(A)) and Θ_A - q̃ by separate formulas,
    // on ι(grid): beyond it the box-truncated sample no longer stands in for A
    let ys = iota_of_grid(space, grid);
    let rows = dual_q_gap_rows(space, dual, set, &ys);
    let cond_a = worst_excess(rows.iter().map(|(v, t)| (*v, *t)));
    let cond_b = worst_excess(
        ys.chunks(d).zip(&rows).map(|(y, (_, t))| (dual.q_tilde(y) - theta_unchecked(space, set, y), *t)),
    );
    let phi_mas = is_mas(&triple.phi, space, dual.pairing_matrix(), dual_grid)?;
    let cond_c = phi_mas.check("mas-conjugate-above-dual-q").cloned().ok_or(Error::PreconditionFailed("missing MAS check".into()))?;
    let phi_vz = is_vz(&triple.phi, space)?;
    let star_vz = is_vz(&triple.star_theta, space)?;

    let candidates = match candidates {
        Some(c) => c,
        None => default_candidates(&triple)?,
    };
    let facts: Vec<CandidateFacts> = candidates
        .iter()
        .map(|h| candidate_facts(space, dual, set, &triple, h, dual_grid))
        .collect::<Result<_>>()?;
    let names = |pick: &dyn Fn(&CandidateFacts) -> bool| {
        let v: Vec<&str> = facts.iter().filter(|f| pick(f)).map(|f| f.label.as_str()).collect();
        if v.is_empty() { "none".to_string() } else { v.join(", ") }
    };
    let every = |when: &dyn Fn(&CandidateFacts) -> bool| facts.iter().filter(|f| when(f)).all(|f| f.conjugate_above_dual_q);

    let verdicts = [
        ("condition-a", "inf of the dual q over b* - iota(A) is nonpositive", cond_a.0 <= 0.0, cond_a.1, cond_a.2, Some(cond_a.3)),
        ("condition-b", "Theta_A dominates the dual q", cond_b.0 <= 0.0, cond_b.1, cond_b.2, Some(cond_b.3)),
        ("condition-c", "conjugate of Phi_A dominates the dual q", cond_c.passed(), cond_c.worst_residual, cond_c.tolerance, None),
        ("condition-f", "Phi_A is VZ", phi_vz.passed(), 0.0, 0.0, None),
        ("condition-g", "star-Theta_A is VZ", star_vz.passed(), 0.0, 0.0, None),
    ];
    let mut truth = Vec::new();
    for (k, (id, anchor, ok, residual, tolerance, at)) in verdicts.into_iter().enumerate() {
        let mut check = Check::new(id, anchor).verdict(ok, residual, tolerance);
        if let Some(j) = at {
            check = check.witness(vec![ys[j * d..(j + 1) * d].to_vec()]);
        }
        if k == 2 {
            check = check.note(cond_c.note.clone());
        }
        truth.push((id, ok));
        report.push(check);
    }
    let d_ok = facts.iter().any(|f| f.mas && f.touches_exactly);
    let e_ok = facts.iter().any(|f| f.vz && f.touches_exactly);
    let b1 = every(&|f| f.below_star_theta);
    let b2 = every(&|f| f.below_star_theta && f.above_phi);
    let c1 = facts.iter().any(|f| f.below_star_theta && f.above_phi && f.conjugate_above_dual_q);
    let c2 = facts.iter().any(|f| f.above_phi && f.conjugate_above_dual_q);
    let existence = [
        ("condition-d", "some candidate is MAS with P(f) = A", d_ok, names(&|f| f.mas && f.touches_exactly)),
        ("condition-e", "some candidate is VZ with P(f) = A", e_ok, names(&|f| f.vz && f.touches_exactly)),
        ("condition-b1", "every candidate below star-Theta has conjugate above the dual q", b1, names(&|f| f.below_star_theta)),
        ("condition-b2", "every candidate in the sandwich has conjugate above the dual q", b2, names(&|f| f.below_star_theta && f.above_phi)),
        ("condition-c1", "some candidate in the sandwich has conjugate above the dual q", c1, names(&|f| f.below_star_theta && f.above_phi && f.conjugate_above_dual_q)),
        ("condition-c2", "some candidate above Phi has conjugate above the dual q", c2, names(&|f| f.above_phi && f.conjugate_above_dual_q)),
    ];
    for (id, anchor, ok, who) in existence {
        truth.push((id, ok));
        report.push(Check::new(id, anchor).verdict(ok, if ok { 0.0 } else { 1.0 }, 0.0).note(format!("candidates: {who}")));
    }
    let holding = truth.iter().filter(|(_, ok)| *ok).count();
    let unanimous = holding == 0 || holding == truth.len();
    report.push(
        Check::new("conditions-unanimous", "the representability conditions are equivalent")
            .verdict(unanimous, (truth.len() - holding).min(holding) as f64, 0.0)
            .note(format!("{holding} of {} conditions hold", truth.len())),
    );
    Ok(report)
}

/// ι of every grid point, flattened.
pub(crate) fn iota_of_grid(space: &SsdSpace, grid: &GridSpec) -> Vec<f64> {
    grid.coords().chunks(space.dim()).flat_map(|b| space.iota_apply(b)).collect()
}

/// (min over a of q̃(b* - ι(a)), its sampling tolerance) for each b* in `ys`.
///
/// The tolerance bounds the change of q̃(b* - ι(a)) when a moves by one set
/// mesh: ‖Δ‖·‖b* - ι(a)‖* + ½‖ι‖‖Δ‖².
pub(crate) fn dual_q_gap_rows(space: &SsdSpace, dual: &DualSsd, set: &PointSet, ys: &[f64]) -> Vec<(f64, f64)> {
    let d = space.dim();
    let mesh = set.mesh(space);
    let k_iota = space.iota_norm().value;
    let iota_set: Vec<Vec<f64>> = set.iter().map(|a| space.iota_apply(a)).collect();
    ys.par_chunks(d)
        .map(|y| {
            let mut diff = vec![0.0; d];
            let mut best = (f64::INFINITY, 0usize);
            for (i, ia) in iota_set.iter().enumerate() {
                sub_into(y, ia, &mut diff);
                let v = dual.q_tilde(&diff);
                if v < best.0 {
                    best = (v, i);
                }
            }
            let reach = dual.norm(&sub(y, &iota_set[best.1]));
            (best.0, tol::GRID + mesh * reach + 0.5 * k_iota * mesh * mesh)
        })
        .collect()
}

/// (pass-excess, worst value, its tolerance, index) over (value, tolerance)
/// rows, where a row passes when value ≤ tolerance.
pub(crate) fn worst_excess(rows: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, usize) {
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0usize);
    for (k, (v, t)) in rows.enumerate() {
        if v - t > worst.0 {
            worst = (v - t, v.max(0.0), t, k);
        }
    }
    worst
}
