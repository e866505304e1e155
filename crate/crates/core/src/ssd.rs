//! Finite-dimensional spaces with a symmetric bilinear pairing and a norm.
//!
//! Points live in ℝᵈ, the pairing is ⌊b,c⌋ = bᵀMc for a symmetric matrix M and
//! the dual is identified with ℝᵈ through the dot product, so the canonical map
//! ι is the matrix M itself.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::{bilinear, dot, euclid, from_dmatrix, matvec, normalize_witness, to_dmatrix};
use crate::numeric::{maximize_on_sphere, random_gaussian};
use crate::report::{Check, VerifyReport};
use crate::tol;

/// The three product norms on E × E* with a balancing weight τ > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductNorm {
    One,
    Two,
    Inf,
}

impl ProductNorm {
    pub fn dual(self) -> Self {
        match self {
            ProductNorm::One => ProductNorm::Inf,
            ProductNorm::Two => ProductNorm::Two,
            ProductNorm::Inf => ProductNorm::One,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProductNorm::One => "one",
            ProductNorm::Two => "two",
            ProductNorm::Inf => "inf",
        }
    }

    pub const ALL: [ProductNorm; 3] = [ProductNorm::One, ProductNorm::Two, ProductNorm::Inf];
}

/// Norm on ℝᵈ.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    Euclidean,
    /// √(bᵀWb) for a symmetric positive definite W (row-major).
    Quadratic { weight: Vec<f64> },
    /// A product norm on ℝⁿ × ℝⁿ; the split n is half the dimension.
    Product { kind: ProductNorm, tau: f64 },
}

impl NormSpec {
    pub fn quadratic(weight: Vec<f64>) -> Self {
        NormSpec::Quadratic { weight }
    }

    pub fn product(kind: ProductNorm, tau: f64) -> Self {
        NormSpec::Product { kind, tau }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NormSpec::Euclidean => Ok(()),
            NormSpec::Quadratic { weight } => {
                if weight.len() != dim * dim {
                    return Err(Error::InvalidNorm(format!(
                        "weight has {} entries, expected {}",
                        weight.len(),
                        dim * dim
                    )));
                }
                let w = to_dmatrix(weight, dim);
                if (&w - w.transpose()).amax() > 0.0 {
                    return Err(Error::InvalidNorm("weight is not symmetric".into()));
                }
                if w.cholesky().is_none() {
                    return Err(Error::InvalidNorm("weight is not positive definite".into()));
                }
                Ok(())
            }
            NormSpec::Product { tau, .. } => {
                if dim % 2 != 0 {
                    return Err(Error::InvalidNorm(format!(
                        "product norms need even dimension, got {dim}"
                    )));
                }
                if !(tau.is_finite() && *tau > 0.0) {
                    return Err(Error::InvalidNorm(format!("tau must be positive, got {tau}")));
                }
                Ok(())
            }
        }
    }

    /// Squared norm; avoids the square root where the formula allows it.
    pub fn norm_sq(&self, b: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean => dot(b, b),
            NormSpec::Quadratic { weight } => bilinear(weight, b, b).max(0.0),
            NormSpec::Product { kind, tau } => {
                let n = b.len() / 2;
                let (x, xs) = b.split_at(n);
                let (a, c) = (euclid(x), euclid(xs));
                match kind {
                    ProductNorm::One => 0.5 * (tau * a + c / tau).powi(2),
                    ProductNorm::Two => tau * tau * a * a + c * c / (tau * tau),
                    ProductNorm::Inf => 2.0 * (tau * a).max(c / tau).powi(2),
                }
            }
        }
    }

    pub fn norm(&self, b: &[f64]) -> f64 {
        match self {
            NormSpec::Product { kind: ProductNorm::One, tau } => {
                let n = b.len() / 2;
                (tau * euclid(&b[..n]) + euclid(&b[n..]) / tau) / std::f64::consts::SQRT_2
            }
            NormSpec::Product { kind: ProductNorm::Inf, tau } => {
                let n = b.len() / 2;
                std::f64::consts::SQRT_2 * (tau * euclid(&b[..n])).max(euclid(&b[n..]) / tau)
            }
            _ => self.norm_sq(b).sqrt(),
        }
    }

    /// The dual norm under the dot-product identification.
    ///
    /// For product norms the dual vector's first block pairs with x, so the
    /// dual of the (kind, τ) norm is the (dual kind, 1/τ) norm in the same
    /// coordinates.
    pub fn dual(&self, dim: usize) -> Result<NormSpec> {
        match self {
            NormSpec::Euclidean => Ok(NormSpec::Euclidean),
            NormSpec::Quadratic { weight } => {
                let w = to_dmatrix(weight, dim);
                let inv = w
                    .cholesky()
                    .ok_or_else(|| Error::InvalidNorm("weight is not positive definite".into()))?
                    .inverse();
                // symmetrize to keep the exact-symmetry invariant
                let inv = (&inv + inv.transpose()) * 0.5;
                Ok(NormSpec::Quadratic { weight: from_dmatrix(&inv) })
            }
            NormSpec::Product { kind, tau } => Ok(NormSpec::Product { kind: kind.dual(), tau: 1.0 / tau }),
        }
    }

    /// The symmetric matrix W with ‖b‖² = bᵀWb, when the norm is quadratic.
    pub fn weight_matrix(&self, dim: usize) -> Option<DMatrix<f64>> {
        match self {
            NormSpec::Euclidean => Some(DMatrix::identity(dim, dim)),
            NormSpec::Quadratic { weight } => Some(to_dmatrix(weight, dim)),
            NormSpec::Product { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            NormSpec::Euclidean => "euclidean".into(),
            NormSpec::Quadratic { .. } => "quadratic".into(),
            NormSpec::Product { kind, tau } => format!("{}(tau={tau})", kind.name()),
        }
    }
}

/// JSON shape of a norm: `{"variant": "...", "tau": t, "weight": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormDescriptor {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<Vec<f64>>>,
}

impl NormDescriptor {
    pub fn from_norm(norm: &NormSpec, dim: usize) -> Self {
        match norm {
            NormSpec::Euclidean => Self { variant: "euclidean".into(), tau: None, weight: None },
            NormSpec::Quadratic { weight } => Self {
                variant: "quadratic".into(),
                tau: None,
                weight: Some(weight.chunks(dim).map(|r| r.to_vec()).collect()),
            },
            NormSpec::Product { kind, tau } => {
                Self { variant: kind.name().into(), tau: Some(*tau), weight: None }
            }
        }
    }

    pub fn to_norm(&self) -> Result<NormSpec> {
        let tau = || self.tau.ok_or_else(|| Error::InvalidNorm("product norm needs tau".into()));
        match self.variant.as_str() {
            "euclidean" => Ok(NormSpec::Euclidean),
            "quadratic" => {
                let rows = self
                    .weight
                    .as_ref()
                    .ok_or_else(|| Error::InvalidNorm("quadratic norm needs weight".into()))?;
                Ok(NormSpec::Quadratic { weight: rows.iter().flatten().copied().collect() })
            }
            "one" => Ok(NormSpec::Product { kind: ProductNorm::One, tau: tau()? }),
            "two" => Ok(NormSpec::Product { kind: ProductNorm::Two, tau: tau()? }),
            "inf" => Ok(NormSpec::Product { kind: ProductNorm::Inf, tau: tau()? }),
            other => Err(Error::InvalidNorm(format!("unknown norm variant `{other}`"))),
        }
    }
}

/// A finite-dimensional space with symmetric pairing matrix and norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDescriptor", into = "SpaceDescriptor")]
pub struct SsdSpace {
    dim: usize,
    pairing: Vec<f64>,
    norm: NormSpec,
    label: String,
}

/// JSON shape of a space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub dim: usize,
    pub pairing: Vec<Vec<f64>>,
    pub norm: NormDescriptor,
    #[serde(default)]
    pub label: String,
}

impl TryFrom<SpaceDescriptor> for SsdSpace {
    type Error = Error;

    fn try_from(d: SpaceDescriptor) -> Result<Self> {
        let space = make_ssd(d.pairing, d.norm.to_norm()?, &d.label)?;
        if space.dim != d.dim {
            return Err(Error::DimensionMismatch { expected: d.dim, got: space.dim });
        }
        Ok(space)
    }
}

impl From<SsdSpace> for SpaceDescriptor {
    fn from(s: SsdSpace) -> Self {
        SpaceDescriptor {
            dim: s.dim,
            pairing: s.pairing.chunks(s.dim).map(|r| r.to_vec()).collect(),
            norm: NormDescriptor::from_norm(&s.norm, s.dim),
            label: s.label,
        }
    }
}

/// Build a space from the rows of its pairing matrix.
pub fn make_ssd(pairing: Vec<Vec<f64>>, norm: NormSpec, label: &str) -> Result<SsdSpace> {
    let dim = pairing.len();
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    for row in &pairing {
        if row.len() != dim {
            return Err(Error::NotSquare { rows: dim, cols: row.len() });
        }
    }
    let flat: Vec<f64> = pairing.into_iter().flatten().collect();
    SsdSpace::from_flat(dim, flat, norm, label)
}

impl SsdSpace {
    pub fn from_flat(dim: usize, pairing: Vec<f64>, norm: NormSpec, label: &str) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if pairing.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: pairing.len() });
        }
        if pairing.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut asymmetry = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                asymmetry = asymmetry.max((pairing[i * dim + j] - pairing[j * dim + i]).abs());
            }
        }
        if asymmetry > 0.0 {
            return Err(Error::NotSymmetric { asymmetry });
        }
        norm.validate(dim)?;
        Ok(Self { dim, pairing, norm, label: label.to_string() })
    }

    /// E × E* with E = ℝⁿ: pairing [[0, I], [I, 0]], so q(x, x*) = ⟨x, x*⟩.
    pub fn product(n: usize, norm: NormSpec, label: &str) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let d = 2 * n;
        let mut pairing = vec![0.0; d * d];
        for k in 0..n {
            pairing[k * d + n + k] = 1.0;
            pairing[(n + k) * d + k] = 1.0;
        }
        Self::from_flat(d, pairing, norm, label)
    }

    /// Whether the pairing is exactly the product pairing [[0, I], [I, 0]].
    pub fn is_product_pairing(&self) -> bool {
        let d = self.dim;
        if d % 2 != 0 {
            return false;
        }
        let n = d / 2;
        (0..d).all(|i| (0..d).all(|j| self.pairing[i * d + j] == if j == (i + n) % d { 1.0 } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm_spec(&self) -> &NormSpec {
        &self.norm
    }

    /// Row-major pairing matrix.
    pub fn pairing_matrix(&self) -> &[f64] {
        &self.pairing
    }

    pub fn with_norm(&self, norm: NormSpec, label: &str) -> Result<Self> {
        Self::from_flat(self.dim, self.pairing.clone(), norm, label)
    }

    fn check_dim(&self, b: &[f64]) -> Result<()> {
        if b.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: b.len() });
        }
        Ok(())
    }

    pub fn try_pair(&self, b: &[f64], c: &[f64]) -> Result<f64> {
        self.check_dim(b)?;
        self.check_dim(c)?;
        Ok(self.pair(b, c))
    }

    pub fn try_q(&self, b: &[f64]) -> Result<f64> {
        self.check_dim(b)?;
        Ok(self.q(b))
    }

    pub fn try_p(&self, b: &[f64]) -> Result<f64> {
        self.check_dim(b)?;
        Ok(self.p(b))
    }

    /// ⌊b,c⌋ = bᵀMc. Callers guarantee matching lengths.
    #[inline]
    pub fn pair(&self, b: &[f64], c: &[f64]) -> f64 {
        bilinear(&self.pairing, b, c)
    }

    #[inline]
    pub fn q(&self, b: &[f64]) -> f64 {
        0.5 * self.pair(b, b)
    }

    #[inline]
    pub fn norm(&self, b: &[f64]) -> f64 {
        self.norm.norm(b)
    }

    #[inline]
    pub fn g(&self, b: &[f64]) -> f64 {
        0.5 * self.norm.norm_sq(b)
    }

    #[inline]
    pub fn p(&self, b: &[f64]) -> f64 {
        self.g(b) + self.q(b)
    }

    /// ι(c) = Mc as a dual vector.
    pub fn iota_apply(&self, c: &[f64]) -> Vec<f64> {
        matvec(&self.pairing, c)
    }

    pub fn iota(&self) -> DMatrix<f64> {
        to_dmatrix(&self.pairing, self.dim)
    }

    /// Operator norm of ι from the space to its dual.
    ///
    /// Exact (a singular value) for Euclidean and quadratic norms; sampled
    /// and polished for product norms, in which case `estimated` is set.
    pub fn iota_norm(&self) -> IotaNorm {
        match self.norm.weight_matrix(self.dim) {
            Some(w) => {
                let eig = SymmetricEigen::new(w);
                let inv_sqrt = &eig.eigenvectors
                    * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
                    * eig.eigenvectors.transpose();
                let scaled = &inv_sqrt * self.iota() * &inv_sqrt;
                let value = scaled.singular_values().iter().fold(0.0_f64, |m, s| m.max(*s));
                IotaNorm { value, estimated: false }
            }
            None => {
                let dual = self.norm.dual(self.dim).expect("validated norm");
                let (value, _) = maximize_on_sphere(self.dim, 10_000, tol::DEFAULT_SEED, |b| {
                    dual.norm(&self.iota_apply(b)) / self.norm(b)
                });
                IotaNorm { value, estimated: true }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IotaNorm {
    pub value: f64,
    pub estimated: bool,
}

/// How `check_banach_ssd` probes p = g + q for nonnegativity.
#[derive(Clone, Debug)]
pub enum Probe {
    /// Eigenvalue test of W + M; needs a quadratic norm.
    Analytic,
    /// Minimum of p over the grid points.
    Sampled(GridSpec),
}

/// Check p ≥ 0 on the space, reporting the minimizing witness.
pub fn check_banach_ssd(space: &SsdSpace, probe: &Probe) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("banach-ssd");
    match probe {
        Probe::Analytic => {
            let w = space.norm.weight_matrix(space.dim).ok_or(Error::UnsupportedProbe)?;
            let sum = w + space.iota();
            let eig = SymmetricEigen::new(sum);
            let (k, min) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, l)| if *l < acc.1 { (i, *l) } else { acc });
            let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let witness = normalize_witness(&v);
            let value = space.p(&witness);
            let tolerance = tol::CLOSED_FORM;
            report.push(
                Check::new("p-nonnegative", "half squared norm plus q is nonnegative")
                    .verdict(min >= -tolerance, (-min).max(0.0), tolerance)
                    .witness(vec![witness])
                    .note(format!("min eigenvalue of W + M = {min:e}; p(witness) = {value:e}")),
            );
        }
        Probe::Sampled(grid) => {
            if grid.dim() != space.dim {
                return Err(Error::DimensionMismatch { expected: space.dim, got: grid.dim() });
            }
            let coords = grid.coords();
            let (idx, min) = coords
                .chunks(space.dim)
                .map(|b| space.p(b))
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
            let tolerance = tol::GRID;
            report.push(
                Check::new("p-nonnegative", "half squared norm plus q is nonnegative")
                    .verdict(min >= -tolerance, (-min).max(0.0), tolerance)
                    .witness(vec![grid.point(idx)])
                    .note(format!("sampled minimum of p over {} grid points", grid.len())),
            );
            report.set_grid(grid);
        }
    }
    let zero = vec![0.0; space.dim];
    report.push(
        Check::new("p-zero-at-origin", "inf p = 0 is attained at the origin")
            .verdict(space.p(&zero) == 0.0, space.p(&zero).abs(), 0.0),
    );
    Ok(report)
}

/// Seeded random pairs of Gaussian vectors.
pub fn random_pairs(dim: usize, count: usize, seed: u64, sigma: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (random_gaussian(&mut rng, dim, sigma), random_gaussian(&mut rng, dim, sigma)))
        .collect()
}

/// Check the Lipschitz-type bounds for the pairing, q, g and p on sample pairs.
pub fn lipschitz_checks(space: &SsdSpace, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<VerifyReport> {
    for (d, e) in pairs {
        space.check_dim(d)?;
        space.check_dim(e)?;
    }
    let iota = space.iota_norm();
    let k = iota.value;
    // relative slack covers rounding and, for product norms, the sampled ‖ι‖
    let rel = if iota.estimated { 1e-7 } else { 1e-12 };
    let mut worst = [0.0_f64; 4];
    let mut witness: [Vec<Vec<f64>>; 4] = Default::default();
    for (d, e) in pairs {
        let (nd, ne) = (space.norm(d), space.norm(e));
        let diff: Vec<f64> = d.iter().zip(e).map(|(a, b)| a - b).collect();
        let sum: Vec<f64> = d.iter().zip(e).map(|(a, b)| a + b).collect();
        let (ndiff, nsum) = (space.norm(&diff), space.norm(&sum));
        let excess = [
            (space.pair(d, e).abs() - k * nd * ne) / (1.0 + k * nd * ne),
            ((space.q(d) - space.q(e)).abs() - 0.5 * k * ndiff * nsum) / (1.0 + k * ndiff * nsum),
            ((space.g(d) - space.g(e)).abs() - 0.5 * ndiff * (nd + ne)) / (1.0 + ndiff * (nd + ne)),
            ((space.p(d) - space.p(e)).abs() - 0.5 * (1.0 + k) * ndiff * (nd + ne))
                / (1.0 + (1.0 + k) * ndiff * (nd + ne)),
        ];
        for i in 0..4 {
            if excess[i] > worst[i] || witness[i].is_empty() {
                worst[i] = worst[i].max(excess[i]);
                witness[i] = vec![d.clone(), e.clone()];
            }
        }
    }
    let mut report = VerifyReport::new("lipschitz");
    let names = [
        ("pairing-bound", "|pairing| is bounded by the iota norm times both norms"),
        ("q-lipschitz", "q is locally Lipschitz with constant from the iota norm"),
        ("g-lipschitz", "half squared norm is locally Lipschitz"),
        ("p-lipschitz", "p is locally Lipschitz with constant (1 + iota norm)/2"),
    ];
    let note = format!(
        "iota norm = {k:.12} ({}) over {} pairs",
        if iota.estimated { "sampled estimate" } else { "exact" },
        pairs.len()
    );
    for (i, (id, anchor)) in names.iter().enumerate() {
        report.push(
            Check::new(id, anchor)
                .verdict(worst[i] <= rel, worst[i].max(0.0), rel)
                .witness(std::mem::take(&mut witness[i]))
                .note(note.clone()),
        );
    }
    Ok(report)
}
