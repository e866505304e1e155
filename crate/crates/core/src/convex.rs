//! Proper convex functions sampled on grids, with conjugation,
//! inf-convolution and the VZ / MAS verdicts.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::{bilinear, dot};
use crate::report::{Check, VerifyReport};
use crate::ssd::SsdSpace;
use crate::tol;

/// Exact formula behind a grid function, used off the lattice.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    /// ½ xᵀAx + bᵀx + c with A row-major.
    Quadratic { a: Vec<f64>, b: Vec<f64>, c: f64 },
    /// 0 on the listed points, +∞ elsewhere.
    IndicatorOfPoints(Vec<Vec<f64>>),
    /// 0 on the box, +∞ elsewhere.
    IndicatorOfBox { lower: Vec<f64>, upper: Vec<f64> },
    /// max over i of ⟨slopeᵢ, x⟩ + interceptᵢ; slopes stored flat.
    SupAffine { dim: usize, slopes: Vec<f64>, intercepts: Vec<f64> },
    /// Sum of the terms.
    Sum(Vec<ClosedForm>),
    Constant(f64),
}

impl ClosedForm {
    /// ½|x|² in dimension `dim`.
    pub fn half_square(dim: usize) -> Self {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        ClosedForm::Quadratic { a, b: vec![0.0; dim], c: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ClosedForm::Quadratic { a, b, c } => 0.5 * bilinear(a, x, x) + dot(b, x) + c,
            ClosedForm::IndicatorOfPoints(points) => {
                if points.iter().any(|p| p.iter().zip(x).all(|(u, v)| (u - v).abs() <= tol::DUPLICATE)) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ClosedForm::IndicatorOfBox { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (lo, hi))| *v >= lo - tol::DUPLICATE && *v <= hi + tol::DUPLICATE);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ClosedForm::SupAffine { dim, slopes, intercepts } => slopes
                .chunks(*dim)
                .zip(intercepts)
                .map(|(s, c)| dot(s, x) + c)
                .fold(f64::NEG_INFINITY, f64::max),
            ClosedForm::Sum(terms) => terms.iter().map(|t| t.eval(x)).sum(),
            ClosedForm::Constant(c) => *c,
        }
    }
}

/// A proper function on a grid; +∞ marks points outside the effective domain.
#[derive(Clone, Debug)]
pub struct GridFn {
    grid: GridSpec,
    values: Vec<f64>,
    closed_form: Option<Arc<ClosedForm>>,
    convex: bool,
    label: String,
}

impl GridFn {
    /// Validated constructor: proper, no NaN or -∞, midpoint convex.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let f = Self::nonconvex(grid, values)?;
        f.check_convex()?;
        Ok(Self { convex: true, ..f })
    }

    /// Sample a closed form on the grid and validate convexity.
    pub fn from_closed_form(grid: GridSpec, form: ClosedForm) -> Result<Self> {
        let values = grid.coords().chunks(grid.dim()).map(|x| form.eval(x)).collect();
        let f = Self::new(grid, values)?;
        Ok(f.with_closed_form(form))
    }

    /// Sample an arbitrary function; convexity is validated.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = grid.coords().chunks(grid.dim()).map(f).collect();
        Self::new(grid, values)
    }

    /// Proper but possibly nonconvex data, e.g. input to the biconjugate.
    pub fn nonconvex(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidValue);
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::Improper);
        }
        Ok(Self { grid, values, closed_form: None, convex: false, label: String::new() })
    }

    /// Results of convexity-preserving operations skip the midpoint test.
    pub(crate) fn assume_convex(grid: GridSpec, values: Vec<f64>, form: Option<ClosedForm>) -> Result<Self> {
        let mut f = Self::nonconvex(grid, values)?;
        f.convex = true;
        f.closed_form = form.map(Arc::new);
        Ok(f)
    }

    pub fn with_closed_form(mut self, form: ClosedForm) -> Self {
        self.closed_form = Some(Arc::new(form));
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_deref()
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Value at an arbitrary point: the stored value on the lattice, then the
    /// closed form, then multilinear interpolation inside the box, else +∞.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if let Some(idx) = self.grid.locate(x) {
            return self.values[idx];
        }
        if let Some(form) = &self.closed_form {
            return form.eval(x);
        }
        if !self.grid.contains(x) {
            return f64::INFINITY;
        }
        self.interpolate(x)
    }

    fn interpolate(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for (a, v) in x.iter().enumerate() {
            let n = self.grid.points()[a];
            let t = ((v - self.grid.lower()[a]) / self.grid.spacing(a)).clamp(0.0, (n - 1) as f64);
            let k = (t.floor() as usize).min(n - 2);
            base.push(k);
            frac.push(t - k as f64);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut idx = base.clone();
            for a in 0..d {
                if corner >> a & 1 == 1 {
                    idx[a] += 1;
                    weight *= frac[a];
                } else {
                    weight *= 1.0 - frac[a];
                }
            }
            if weight == 0.0 {
                continue;
            }
            let v = self.values[self.grid.flat_index(&idx)];
            if v.is_infinite() {
                return f64::INFINITY;
            }
            acc += weight * v;
        }
        acc
    }

    /// Midpoint convexity along axes and axis diagonals.
    pub fn check_convex(&self) -> Result<()> {
        let d = self.dim();
        let mut dirs: Vec<Vec<isize>> = Vec::new();
        for i in 0..d {
            let mut e = vec![0isize; d];
            e[i] = 1;
            dirs.push(e);
            for j in i + 1..d {
                for s in [1isize, -1] {
                    let mut e = vec![0isize; d];
                    e[i] = 1;
                    e[j] = s;
                    dirs.push(e);
                }
            }
        }
        let n = self.grid.points();
        let worst = (0..self.grid.len())
            .into_par_iter()
            .filter_map(|flat| {
                let idx = self.grid.multi_index(flat);
                let mid = self.values[flat];
                let mut worst: Option<(f64, usize)> = None;
                for dir in &dirs {
                    let mut lo = idx.clone();
                    let mut hi = idx.clone();
                    let mut ok = true;
                    for a in 0..d {
                        let l = idx[a] as isize - dir[a];
                        let h = idx[a] as isize + dir[a];
                        if l < 0 || h < 0 || l >= n[a] as isize || h >= n[a] as isize {
                            ok = false;
                            break;
                        }
                        lo[a] = l as usize;
                        hi[a] = h as usize;
                    }
                    if !ok {
                        continue;
                    }
                    let (fl, fh) = (self.values[self.grid.flat_index(&lo)], self.values[self.grid.flat_index(&hi)]);
                    if !(fl.is_finite() && fh.is_finite()) {
                        continue;
                    }
                    let avg = 0.5 * (fl + fh);
                    let violation = if mid.is_infinite() { f64::INFINITY } else { mid - avg };
                    let slack = tol::CONVEXITY_REL * (1.0 + fl.abs().max(fh.abs()));
                    if violation > slack && worst.is_none_or(|(w, _)| violation > w) {
                        worst = Some((violation, flat));
                    }
                }
                worst
            })
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        match worst {
            Some((violation, flat)) => Err(Error::NotConvex { violation, at: self.grid.point(flat) }),
            None => Ok(()),
        }
    }

    /// Finite grid points as (flat index, coordinates, value).
    pub fn finite_points(&self) -> FinitePoints {
        let coords = self.grid.coords();
        let d = self.dim();
        let mut out =
            FinitePoints { dim: d, index: Vec::new(), coords: Vec::new(), values: Vec::new(), on_boundary: Vec::new() };
        for (i, v) in self.values.iter().enumerate() {
            if v.is_finite() {
                out.index.push(i);
                out.on_boundary.push(self.grid.on_boundary(i));
                out.coords.extend_from_slice(&coords[i * d..(i + 1) * d]);
                out.values.push(*v);
            }
        }
        out
    }

    /// Lowest-index grid minimizer.
    pub fn argmin(&self) -> (usize, f64) {
        first_min(self.values.iter().copied())
    }

    /// f + c, keeping the closed form.
    pub fn shifted(&self, c: f64) -> GridFn {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v += c);
        out.closed_form = self
            .closed_form
            .as_ref()
            .map(|f| Arc::new(ClosedForm::Sum(vec![(**f).clone(), ClosedForm::Constant(c)])));
        out
    }

    /// Pointwise sum on a shared grid.
    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let form = match (&self.closed_form, &other.closed_form) {
            (Some(a), Some(b)) => Some(ClosedForm::Sum(vec![(**a).clone(), (**b).clone()])),
            _ => None,
        };
        if self.convex && other.convex {
            GridFn::assume_convex(self.grid.clone(), values, form)
        } else {
            let mut f = GridFn::nonconvex(self.grid.clone(), values)?;
            f.closed_form = form.map(Arc::new);
            Ok(f)
        }
    }

    /// Largest axis-neighbour slope of `values` around a grid point.
    pub fn local_slope(&self, flat: usize) -> f64 {
        local_slope(&self.grid, &self.values, flat)
    }
}

pub(crate) fn local_slope(grid: &GridSpec, values: &[f64], flat: usize) -> f64 {
    block_slope(grid, flat, |j| values[j])
}

/// Largest |F(z) - F(centre)| / |z - centre| over grid points z within two
/// cells (sup norm) of the centre; +∞ values are skipped.
///
/// Two cells rather than one: at box corners and along flat valleys every
/// immediate neighbour can tie with the centre.
pub(crate) fn block_slope(grid: &GridSpec, centre: usize, value: impl Fn(usize) -> f64) -> f64 {
    let v = value(centre);
    if !v.is_finite() {
        return 0.0;
    }
    let d = grid.dim();
    let idx = grid.multi_index(centre);
    let h = grid.spacings();
    let mut offset = vec![-2isize; d];
    let mut best: f64 = 0.0;
    let mut other = idx.clone();
    'outer: loop {
        let mut inside = true;
        let mut dist2 = 0.0;
        for a in 0..d {
            let k = idx[a] as isize + offset[a];
            if k < 0 || k >= grid.points()[a] as isize {
                inside = false;
                break;
            }
            other[a] = k as usize;
            dist2 += (offset[a] as f64 * h[a]).powi(2);
        }
        if inside && dist2 > 0.0 {
            let w = value(grid.flat_index(&other));
            if w.is_finite() {
                best = best.max((w - v).abs() / dist2.sqrt());
            }
        }
        for a in (0..d).rev() {
            offset[a] += 1;
            if offset[a] <= 2 {
                continue 'outer;
            }
            offset[a] = -2;
        }
        break;
    }
    best
}

/// Lowest index attaining the minimum.
pub(crate) fn first_min(it: impl Iterator<Item = f64>) -> (usize, f64) {
    it.enumerate().fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
}

/// Finite part of a grid function, laid out for tight loops.
#[derive(Clone, Debug)]
pub struct FinitePoints {
    pub dim: usize,
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
    /// Whether the point lies on the boundary of the grid box.
    pub on_boundary: Vec<bool>,
}

impl FinitePoints {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

/// Sup over finite points of ⟨x, y⟩ - value, with the lowest-index argmax.
fn sup_affine_at(points: &FinitePoints, y: &[f64]) -> (f64, usize) {
    let (v, i, _) = sup_affine_traced(points, y);
    (v, i)
}

/// As `sup_affine_at`, also reporting whether some maximizer lies off the
/// box boundary (ties included).
fn sup_affine_traced(points: &FinitePoints, y: &[f64]) -> (f64, usize, bool) {
    let mut best = f64::NEG_INFINITY;
    let mut best_inner = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, v) in points.values.iter().enumerate() {
        let s = dot(points.point(i), y) - v;
        if s > best {
            best = s;
            arg = i;
        }
        if !points.on_boundary[i] && s > best_inner {
            best_inner = s;
        }
    }
    let interior = best_inner >= best - 1e-12 * (1.0 + best.abs());
    (best, arg, interior)
}

/// Grid conjugate with the primal argmax of every dual point.
#[derive(Clone, Debug)]
pub struct Conjugate {
    pub fun: GridFn,
    /// Flat primal index of the maximizer for each dual grid point.
    pub argmax: Vec<usize>,
    /// Whether some maximizer lies off the primal box boundary, so that the
    /// grid sup is not truncated by the box.
    pub interior: Vec<bool>,
}

/// f*(y) = max over grid x of ⟨x, y⟩ - f(x), on the dual grid.
pub fn conjugate(f: &GridFn, dual: &GridSpec) -> Result<Conjugate> {
    if dual.dim() != f.dim() {
        return Err(Error::GridMismatch);
    }
    let pts = f.finite_points();
    let ys = dual.coords();
    let d = f.dim();
    let traced: Vec<(f64, usize, bool)> = ys
        .par_chunks(d)
        .map(|y| {
            let (v, i, inner) = sup_affine_traced(&pts, y);
            (v, pts.index[i], inner)
        })
        .collect();
    let values = traced.iter().map(|t| t.0).collect();
    let argmax = traced.iter().map(|t| t.1).collect();
    let interior = traced.iter().map(|t| t.2).collect();
    let form = ClosedForm::SupAffine {
        dim: d,
        slopes: pts.coords.clone(),
        intercepts: pts.values.iter().map(|v| -v).collect(),
    };
    let fun = GridFn::assume_convex(dual.clone(), values, Some(form))?;
    Ok(Conjugate { fun, argmax, interior })
}

/// Conjugate value at a single dual point by direct maximization.
pub fn conjugate_at(f: &GridFn, y: &[f64]) -> f64 {
    let pts = f.finite_points();
    sup_affine_at(&pts, y).0
}

const REFINE_FACTOR: usize = 4;
const REFINE_WINDOW: f64 = 4.0;

/// Sup of ⟨b, y⟩ - f(b) over a lattice `factor` times finer than f's grid,
/// spanning two cells either side of the grid point `centre`. Off-lattice
/// values come from `GridFn::eval`.
pub(crate) fn refined_conjugate_at(f: &GridFn, y: &[f64], centre: usize, factor: usize) -> f64 {
    let d = f.dim();
    let c = f.grid.point(centre);
    let h = f.grid.spacings();
    let side = 4 * factor + 1;
    let mut best = f64::NEG_INFINITY;
    let mut b = vec![0.0; d];
    for k in 0..side.pow(d as u32) {
        let mut rest = k;
        for a in 0..d {
            let step = (rest % side) as f64 - 2.0 * factor as f64;
            rest /= side;
            b[a] = (c[a] + step * h[a] / factor as f64).clamp(f.grid.lower()[a], f.grid.upper()[a]);
        }
        best = best.max(dot(&b, y) - f.eval(&b));
    }
    best
}

/// Dual grid covering ι(primal box), each axis extended by `inflation`
/// times its half-width.
///
/// Rows of M with a single nonzero entry map a primal axis onto a dual axis;
/// the dual lattice then contains ι of every primal grid point.
pub fn dual_grid_for(space: &SsdSpace, primal: &GridSpec, inflation: f64) -> Result<GridSpec> {
    let d = space.dim();
    if primal.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: primal.dim() });
    }
    let m = space.pairing_matrix();
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    let mut points = Vec::with_capacity(d);
    for i in 0..d {
        let row = &m[i * d..(i + 1) * d];
        let nonzero: Vec<usize> = (0..d).filter(|j| row[*j] != 0.0).collect();
        let lattice_axis = match nonzero.as_slice() {
            [] => Some((i, 1.0)),
            [j] => Some((*j, row[*j])),
            _ => None,
        };
        match lattice_axis {
            Some((j, s)) => {
                let n = primal.points()[j];
                let h = s.abs() * primal.spacing(j);
                let extra = (inflation * (n - 1) as f64 / 2.0 - 1e-9).ceil().max(0.0) as usize;
                let anchor = if s > 0.0 { s * primal.lower()[j] } else { s * primal.upper()[j] };
                let lo = anchor - extra as f64 * h;
                let count = n + 2 * extra;
                lower.push(lo);
                upper.push(lo + (count - 1) as f64 * h);
                points.push(count);
            }
            None => {
                let centre: f64 = (0..d).map(|j| row[j] * 0.5 * (primal.lower()[j] + primal.upper()[j])).sum();
                let half: f64 = (0..d).map(|j| row[j].abs() * 0.5 * (primal.upper()[j] - primal.lower()[j])).sum();
                let n = primal.points()[i];
                let extra = (inflation * (n - 1) as f64 / 2.0 - 1e-9).ceil().max(0.0) as usize;
                lower.push(centre - (1.0 + inflation) * half);
                upper.push(centre + (1.0 + inflation) * half);
                points.push(n + 2 * extra);
            }
        }
    }
    GridSpec::new(lower, upper, points)
}

/// f^@ computed directly and through f*∘ι, with their agreement recorded.
#[derive(Clone, Debug)]
pub struct IntrinsicConjugate {
    pub fun: GridFn,
    pub report: VerifyReport,
}

/// f^@(c) = sup over b of ⌊b, c⌋ - f(b), sampled on f's own grid.
pub fn intrinsic_conjugate(f: &GridFn, space: &SsdSpace) -> Result<IntrinsicConjugate> {
    let d = space.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    let pts = f.finite_points();
    let cs = f.grid.coords();
    let direct: Vec<f64> = cs
        .par_chunks(d)
        .map(|c| {
            (0..pts.len())
                .map(|i| space.pair(pts.point(i), c) - pts.values[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let dual = dual_grid_for(space, &f.grid, 0.5)?;
    let star = conjugate(f, &dual)?;
    let via_iota: Vec<f64> = cs.par_chunks(d).map(|c| star.fun.eval(&space.iota_apply(c))).collect();
    let residual = direct
        .iter()
        .zip(&via_iota)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max);

    let mut report = VerifyReport::new("intrinsic-conjugate");
    report.set_grid(&f.grid);
    report.push(
        Check::new("intrinsic-equals-conjugate-of-iota", "intrinsic conjugate equals the conjugate composed with iota")
            .verdict(residual <= tol::CLOSED_FORM, residual, tol::CLOSED_FORM),
    );
    let slopes: Vec<f64> = (0..pts.len()).flat_map(|i| space.iota_apply(pts.point(i))).collect();
    let form = ClosedForm::SupAffine { dim: d, slopes, intercepts: pts.values.iter().map(|v| -v).collect() };
    let fun = GridFn::assume_convex(f.grid.clone(), direct, Some(form))?;
    Ok(IntrinsicConjugate { fun, report })
}

/// (h ∇ k)(x) = min over grid y of h(y) + k(x - y), on the shared grid.
pub fn inf_conv(h: &GridFn, k: &GridFn) -> Result<GridFn> {
    if h.grid != k.grid {
        return Err(Error::GridMismatch);
    }
    let d = h.dim();
    let hp = h.finite_points();
    let xs = h.grid.coords();
    let values: Vec<f64> = xs
        .par_chunks(d)
        .map(|x| {
            let mut diff = vec![0.0; d];
            let mut best = f64::INFINITY;
            for i in 0..hp.len() {
                crate::linalg::sub_into(x, hp.point(i), &mut diff);
                let v = hp.values[i] + k.eval(&diff);
                if v < best {
                    best = v;
                }
            }
            best
        })
        .collect();
    if h.convex && k.convex {
        GridFn::assume_convex(h.grid.clone(), values, None)
    } else {
        GridFn::nonconvex(h.grid.clone(), values)
    }
}

/// f** through an automatically sized dual grid; f** ≤ f and is convex.
/// Lattice points outside the closed convex hull of dom f get +∞.
pub fn lsc_biconjugate_envelope(f: &GridFn) -> Result<GridFn> {
    let dual = auto_dual_grid(f)?;
    let star = conjugate(f, &dual).map_err(|e| match e {
        Error::Improper => Error::NoAffineMinorant,
        other => other,
    })?;
    if !star.fun.values.iter().any(|v| v.is_finite()) {
        return Err(Error::NoAffineMinorant);
    }
    let back = conjugate(&star.fun, &f.grid)?;
    // the bounded dual grid cannot produce +∞, so the domain is restored from
    // the hull of dom f; the second conjugate's closed form is dropped
    let hull = DomainHull::new(&f.finite_points());
    let values = back
        .fun
        .values
        .iter()
        .zip(f.grid.coords().chunks(f.dim()))
        .map(|(v, x)| if hull.contains(x) { *v } else { f64::INFINITY })
        .collect();
    GridFn::assume_convex(f.grid.clone(), values, None)
}

/// Closed convex hull of finitely many points: exact in one and two
/// dimensions, the bounding box above that.
enum DomainHull {
    Interval(f64, f64),
    /// Counter-clockwise vertices; fewer than three for degenerate hulls.
    Polygon(Vec<[f64; 2]>),
    Box(Vec<f64>, Vec<f64>),
}

impl DomainHull {
    fn new(points: &FinitePoints) -> Self {
        let d = points.dim;
        let pts = (0..points.len()).map(|i| points.point(i));
        match d {
            1 => {
                let (lo, hi) = pts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
                DomainHull::Interval(lo, hi)
            }
            2 => {
                let mut ps: Vec<[f64; 2]> = pts.map(|p| [p[0], p[1]]).collect();
                ps.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
                ps.dedup();
                DomainHull::Polygon(monotone_chain(&ps))
            }
            _ => {
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for p in pts {
                    for a in 0..d {
                        lo[a] = lo[a].min(p[a]);
                        hi[a] = hi[a].max(p[a]);
                    }
                }
                DomainHull::Box(lo, hi)
            }
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        let eps = tol::DUPLICATE;
        match self {
            DomainHull::Interval(lo, hi) => x[0] >= lo - eps && x[0] <= hi + eps,
            DomainHull::Box(lo, hi) => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *v >= a - eps && *v <= b + eps),
            DomainHull::Polygon(vs) => match vs.len() {
                0 => false,
                1 => (x[0] - vs[0][0]).abs() <= eps && (x[1] - vs[0][1]).abs() <= eps,
                2 => {
                    let (a, b) = (vs[0], vs[1]);
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    let along = ((x[0] - a[0]) * (b[0] - a[0]) + (x[1] - a[1]) * (b[1] - a[1])) / len;
                    cross(a, b, [x[0], x[1]]).abs() <= eps * len && along >= -eps && along <= len + eps
                }
                n => (0..n).all(|i| {
                    let (a, b) = (vs[i], vs[(i + 1) % n]);
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    cross(a, b, [x[0], x[1]]) >= -eps * len
                }),
            },
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain on sorted, distinct points; collinear points dropped.
fn monotone_chain(ps: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if ps.len() <= 2 {
        return ps.to_vec();
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in ps {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in ps.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Dual box spanning the observed finite-difference slopes with a margin.
pub fn auto_dual_grid(f: &GridFn) -> Result<GridSpec> {
    let g = &f.grid;
    let d = g.dim();
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    let mut points = Vec::with_capacity(d);
    let finite_span = {
        let fin: Vec<f64> = f.values.iter().copied().filter(|v| v.is_finite()).collect();
        let (lo, hi) = fin.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(*v), a.1.max(*v)));
        hi - lo
    };
    for axis in 0..d {
        let h = g.spacing(axis);
        let mut smin = f64::INFINITY;
        let mut smax = f64::NEG_INFINITY;
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            if idx[axis] + 1 >= g.points()[axis] {
                continue;
            }
            let mut next = idx.clone();
            next[axis] += 1;
            let (a, b) = (f.values[flat], f.values[g.flat_index(&next)]);
            if a.is_finite() && b.is_finite() {
                let s = (b - a) / h;
                smin = smin.min(s);
                smax = smax.max(s);
            }
        }
        if !smin.is_finite() {
            // isolated finite points: any slope bounded by the value spread
            let width = g.upper()[axis] - g.lower()[axis];
            let r = 1.0 + finite_span / h.min(width);
            smin = -r;
            smax = r;
        }
        let margin = 0.1 * (smax - smin) + 1.0;
        lower.push(smin - margin);
        upper.push(smax + margin);
        points.push((2 * (g.points()[axis] - 1) + 1).max(3));
    }
    // shrink toward the budget if the doubled resolution is too large
    let mut spec = GridSpec::new(lower.clone(), upper.clone(), points.clone());
    while matches!(spec, Err(Error::BudgetExceeded { .. })) {
        points.iter_mut().for_each(|n| *n = (*n / 2).max(3));
        spec = GridSpec::new(lower.clone(), upper.clone(), points.clone());
    }
    spec
}

/// Options for the VZ verdict.
#[derive(Clone, Debug, Default)]
pub struct VzOptions {
    /// Points c at which (f - q)∇p is evaluated; defaults to f's grid.
    pub c_grid: Option<GridSpec>,
    /// Absolute tolerance; the grid term h·L is added on top.
    pub abs_tol: Option<f64>,
}

/// Per-point values of (f - q)∇p with the minimizer's local slope.
pub(crate) struct InfConvProfile {
    pub values: Vec<f64>,
    pub tolerance: Vec<f64>,
    pub points: Vec<f64>,
}

pub(crate) fn gap_infconv_profile(f: &GridFn, space: &SsdSpace, cs: &[f64], abs_tol: f64) -> InfConvProfile {
    let d = space.dim();
    let pts = f.finite_points();
    let gap: Vec<f64> = (0..pts.len()).map(|i| pts.values[i] - space.q(pts.point(i))).collect();
    let h = f.grid.max_spacing();
    let (values, tolerance): (Vec<f64>, Vec<f64>) = cs
        .par_chunks(d)
        .map(|c| {
            let mut diff = vec![0.0; d];
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for i in 0..pts.len() {
                crate::linalg::sub_into(c, pts.point(i), &mut diff);
                let v = gap[i] + space.p(&diff);
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            let centre = pts.index[arg];
            let slope = block_slope(&f.grid, centre, |j| {
                let fj = f.values[j];
                if !fj.is_finite() {
                    return f64::INFINITY;
                }
                let b = f.grid.point(j);
                let diff: Vec<f64> = c.iter().zip(&b).map(|(x, y)| x - y).collect();
                fj - space.q(&b) + space.p(&diff)
            });
            (best, abs_tol + h * slope)
        })
        .unzip();
    InfConvProfile { values, tolerance, points: cs.to_vec() }
}

/// VZ verdict: (f - q)∇p = 0 at every c, and inf (f - q) = 0.
pub fn is_vz(f: &GridFn, space: &SsdSpace) -> Result<VerifyReport> {
    is_vz_with(f, space, &VzOptions::default())
}

pub fn is_vz_with(f: &GridFn, space: &SsdSpace, opts: &VzOptions) -> Result<VerifyReport> {
    let d = space.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    let abs_tol = opts.abs_tol.unwrap_or(tol::GRID);
    let c_grid = opts.c_grid.clone().unwrap_or_else(|| f.grid.clone());
    let profile = gap_infconv_profile(f, space, &c_grid.coords(), abs_tol);
    let mut report = VerifyReport::new("vz");
    report.set_grid(&f.grid);

    let (worst_i, worst_excess) = profile
        .values
        .iter()
        .zip(&profile.tolerance)
        .map(|(v, t)| v.abs() - t)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    let worst_abs = profile.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    report.push(
        Check::new("vz-infconv-zero", "(f - q) inf-convolved with p vanishes at every point")
            .verdict(worst_excess <= 0.0, worst_abs, profile.tolerance[worst_i])
            .witness(vec![profile.points[worst_i * d..(worst_i + 1) * d].to_vec()])
            .note(format!("{} points; tolerance adds h times the local slope", c_grid.len())),
    );

    let gaps: Vec<f64> = f
        .values
        .iter()
        .zip(f.grid.coords().chunks(d))
        .map(|(v, b)| v - space.q(b))
        .collect();
    let (arg, min_gap) = first_min(gaps.iter().copied());
    let t = abs_tol + f.grid.max_spacing() * local_slope(&f.grid, &gaps, arg);
    report.push(
        Check::new("vz-gap-infimum-zero", "inf of f - q is zero")
            .verdict(min_gap.abs() <= t, min_gap.abs(), t)
            .witness(vec![f.grid.point(arg)]),
    );
    Ok(report)
}

/// MAS verdict: f ≥ q on the primal grid and f* ≥ q̃ on the dual grid.
///
/// `dual_pairing` is M̃ (row-major). Dual points whose conjugate maximizer
/// sits on the primal box boundary only count when they pass, since the grid
/// sup there underestimates the true conjugate. Near misses are re-examined
/// on a finer local lattice before they count as failures.
pub fn is_mas(f: &GridFn, space: &SsdSpace, dual_pairing: &[f64], dual_grid: &GridSpec) -> Result<VerifyReport> {
    let d = space.dim();
    if f.dim() != d || dual_grid.dim() != d || dual_pairing.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    let mut report = VerifyReport::new("mas");
    report.set_grid(&f.grid);

    let gaps: Vec<f64> = f
        .values
        .iter()
        .zip(f.grid.coords().chunks(d))
        .map(|(v, b)| v - space.q(b))
        .collect();
    let (arg, min_gap) = first_min(gaps.iter().copied());
    report.push(
        Check::new("mas-f-above-q", "f dominates q on the primal grid")
            .verdict(min_gap >= -tol::GRID, (-min_gap).max(0.0), tol::GRID)
            .witness(vec![f.grid.point(arg)]),
    );

    let star = conjugate(f, dual_grid)?;
    let ys = dual_grid.coords();
    let dual_gap: Vec<f64> = star
        .fun
        .values
        .iter()
        .zip(ys.chunks(d))
        .map(|(v, y)| v - 0.5 * bilinear(dual_pairing, y, y))
        .collect();
    let h = dual_grid.max_spacing();
    let mut worst: Option<(f64, usize, f64)> = None;
    let mut inconclusive = 0usize;
    let mut refined = 0usize;
    for (j, gap) in dual_gap.iter().enumerate() {
        let t = tol::GRID + h * local_slope(dual_grid, &dual_gap, j);
        if *gap >= -t {
            continue;
        }
        if !star.interior[j] {
            inconclusive += 1;
            continue;
        }
        // the lattice sup misses the maximizer by up to a cell; near misses
        // get a finer local sup, which is still a lower bound on f*
        let mut gap = *gap;
        if gap >= -REFINE_WINDOW * t {
            let y = &ys[j * d..(j + 1) * d];
            let better = refined_conjugate_at(f, y, star.argmax[j], REFINE_FACTOR);
            gap = gap.max(better - 0.5 * bilinear(dual_pairing, y, y));
            refined += 1;
            if gap >= -t {
                continue;
            }
        }
        if worst.is_none_or(|(g, _, _)| gap < g) {
            worst = Some((gap, j, t));
        }
    }
    let check = Check::new("mas-conjugate-above-dual-q", "f* dominates the dual quadratic form on the dual grid");
    let check = match worst {
        Some((gap, j, t)) => check.verdict(false, -gap, t).witness(vec![dual_grid.point(j)]),
        None => check.verdict(true, 0.0, tol::GRID),
    };
    report.push(check.note(format!(
        "{} dual points; {inconclusive} box-truncated points below the bound were not counted; {refined} refined",
        dual_grid.len()
    )));
    Ok(report)
}

/// Check (f + h)* = min over y* of f*(y*) + h*(x* - y*) on the dual grid.
pub fn rockafellar_sum_identity(f: &GridFn, h: &GridFn, dual_grid: &GridSpec) -> Result<VerifyReport> {
    if f.grid != h.grid {
        return Err(Error::GridMismatch);
    }
    if h.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::HNotFinite);
    }
    let d = f.dim();
    let sum = f.add(h)?;
    let lhs = conjugate(&sum, dual_grid)?;
    let fstar = conjugate(f, dual_grid)?;
    let hp = h.finite_points();
    let ys = dual_grid.coords();
    let fvals = &fstar.fun.values;
    let rhs: Vec<f64> = ys
        .par_chunks(d)
        .map(|x| {
            let mut z = vec![0.0; d];
            let mut best = f64::INFINITY;
            for (j, y) in ys.chunks(d).enumerate() {
                crate::linalg::sub_into(x, y, &mut z);
                let v = fvals[j] + sup_affine_at(&hp, &z).0;
                if v < best {
                    best = v;
                }
            }
            best
        })
        .collect();
    let hmax = dual_grid.max_spacing() + f.grid.max_spacing();
    let mut worst = (0.0_f64, 0usize, 0.0_f64);
    let mut pass = true;
    for j in 0..rhs.len() {
        let r = (lhs.fun.values[j] - rhs[j]).abs();
        let t = tol::GRID + hmax * (1.0 + lhs.fun.local_slope(j));
        if r > t {
            pass = false;
        }
        if r - t > worst.0 - worst.2 || j == 0 {
            worst = (r, j, t);
        }
    }
    let mut report = VerifyReport::new("rockafellar-sum");
    report.set_grid(&f.grid);
    report.push(
        Check::new("conjugate-of-sum", "conjugate of a sum equals the inf-convolution of conjugates")
            .verdict(pass, worst.0, worst.2)
            .witness(vec![dual_grid.point(worst.1)]),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssd::{make_ssd, NormSpec, ProductNorm};

    fn swap2() -> SsdSpace {
        make_ssd(vec![vec![0.0, 1.0], vec![1.0, 0.0]], NormSpec::product(ProductNorm::Two, 1.0), "product").unwrap()
    }

    fn identity2() -> SsdSpace {
        make_ssd(vec![vec![1.0, 0.0], vec![0.0, 1.0]], NormSpec::Euclidean, "identity").unwrap()
    }

    #[test]
    fn rejects_nonconvex_and_improper() {
        let g = GridSpec::cube(1, -1.0, 1.0, 21).unwrap();
        assert!(matches!(GridFn::from_fn(g.clone(), |x| -x[0] * x[0]), Err(Error::NotConvex { .. })));
        assert!(matches!(GridFn::new(g.clone(), vec![f64::INFINITY; 21]), Err(Error::Improper)));
        let mut v = vec![0.0; 21];
        v[3] = f64::NAN;
        assert!(matches!(GridFn::new(g.clone(), v), Err(Error::InvalidValue)));
        // a hole in the domain is not convex
        let mut v = vec![0.0; 21];
        v[10] = f64::INFINITY;
        assert!(matches!(GridFn::new(g, v), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn eval_prefers_lattice_then_form_then_interpolation() {
        let g = GridSpec::cube(1, 0.0, 1.0, 3).unwrap();
        let f = GridFn::from_fn(g.clone(), |x| x[0] * x[0]).unwrap();
        assert_eq!(f.eval(&[0.5]), 0.25);
        assert!((f.eval(&[0.25]) - 0.125).abs() < 1e-15);
        assert_eq!(f.eval(&[2.0]), f64::INFINITY);
        let f = f.with_closed_form(ClosedForm::Quadratic { a: vec![2.0], b: vec![0.0], c: 0.0 });
        assert!((f.eval(&[0.25]) - 0.0625).abs() < 1e-15);
        assert_eq!(f.eval(&[2.0]), 4.0);
    }

    #[test]
    fn conjugate_of_half_square_is_half_square() {
        let g = GridSpec::cube(1, -4.0, 4.0, 161).unwrap();
        let f = GridFn::from_closed_form(g, ClosedForm::half_square(1)).unwrap();
        let dual = GridSpec::cube(1, -2.0, 2.0, 81).unwrap();
        let c = conjugate(&f, &dual).unwrap();
        for (y, v) in dual.coords().iter().zip(c.fun.values()) {
            assert!((v - 0.5 * y * y).abs() < 1e-12);
        }
        assert!(c.interior.iter().all(|t| *t));
    }

    #[test]
    fn intrinsic_conjugate_swaps_through_iota() {
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(2)).unwrap();
        let at = intrinsic_conjugate(&f, &swap2()).unwrap();
        assert!(at.report.passed());
        for (c, v) in g.coords().chunks(2).zip(at.fun.values()) {
            assert!((v - 0.5 * (c[0] * c[0] + c[1] * c[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn intrinsic_conjugate_zero_pairing_is_minus_min() {
        let zero = make_ssd(vec![vec![0.0; 2]; 2], NormSpec::Euclidean, "zero").unwrap();
        let g = GridSpec::cube(2, -1.0, 1.0, 11).unwrap();
        let f = GridFn::from_fn(g, |x| (x[0] - 0.2).powi(2) + x[1].abs() + 0.5).unwrap();
        let at = intrinsic_conjugate(&f, &zero).unwrap();
        let min = f.values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(at.fun.values().iter().all(|v| (v + min).abs() < 1e-15));
        assert!(at.report.passed());
    }

    #[test]
    fn inf_conv_of_half_squares() {
        let g = GridSpec::cube(1, -2.0, 2.0, 81).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(1)).unwrap();
        let r = inf_conv(&f, &f).unwrap();
        // exact where x/2 is on the lattice, within one cell squared elsewhere
        let h = g.spacing(0);
        for (k, (x, v)) in g.coords().iter().zip(r.values()).enumerate() {
            let err = v - 0.25 * x * x;
            assert!(err >= -1e-12);
            assert!(if k % 2 == 0 { err < 1e-12 } else { err <= h * h }, "{x}: {v}");
        }
        let delta = GridFn::assume_convex(
            g.clone(),
            g.coords().iter().map(|x| if *x == 0.0 { 0.0 } else { f64::INFINITY }).collect(),
            Some(ClosedForm::IndicatorOfPoints(vec![vec![0.0]])),
        )
        .unwrap();
        let same = inf_conv(&f, &delta).unwrap();
        assert_eq!(same.values(), f.values());
    }

    #[test]
    fn diagonal_half_square_is_vz_and_mas() {
        let s = swap2();
        let g = GridSpec::cube(2, -3.0, 3.0, 61).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(2)).unwrap();
        let r = is_vz(&f, &s).unwrap();
        assert!(r.passed(), "{r:?}");
        let dual = dual_grid_for(&s, &g, 0.5).unwrap();
        let r = is_mas(&f, &s, s.pairing_matrix(), &dual).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn q_plus_one_fails_vz_on_identity_pairing() {
        let s = identity2();
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let f = GridFn::from_closed_form(
            g,
            ClosedForm::Sum(vec![ClosedForm::half_square(2), ClosedForm::Constant(1.0)]),
        )
        .unwrap();
        let r = is_vz(&f, &s).unwrap();
        assert!(!r.passed());
        assert_eq!(r.check("vz-gap-infimum-zero").unwrap().status, crate::report::Status::Fail);
    }

    #[test]
    fn concave_q_rejected_at_construction() {
        let neg = make_ssd(vec![vec![-1.0, 0.0], vec![0.0, -1.0]], NormSpec::Euclidean, "").unwrap();
        let g = GridSpec::cube(2, -1.0, 1.0, 11).unwrap();
        assert!(matches!(GridFn::from_fn(g, |b| neg.q(b)), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn biconjugate_recovers_convex_quadratic() {
        let g = GridSpec::cube(1, -2.0, 2.0, 81).unwrap();
        let f = GridFn::from_fn(g.clone(), |x| 0.7 * x[0] * x[0] - 0.3 * x[0] + 1.0).unwrap();
        let ff = lsc_biconjugate_envelope(&f).unwrap();
        let l = 0.7 * 4.0 + 0.3;
        for (a, b) in ff.values().iter().zip(f.values()) {
            assert!(a <= &(b + 1e-12));
            assert!((a - b).abs() <= 5.0 * g.spacing(0) * l);
        }
    }

    #[test]
    fn biconjugate_of_two_point_indicator_is_zero_on_segment() {
        let g = GridSpec::cube(1, -2.0, 2.0, 41).unwrap();
        let values: Vec<f64> = g
            .coords()
            .iter()
            .map(|x| if (*x + 1.0).abs() < 1e-12 || (*x - 1.0).abs() < 1e-12 { 0.0 } else { f64::INFINITY })
            .collect();
        let f = GridFn::nonconvex(g.clone(), values).unwrap();
        let ff = lsc_biconjugate_envelope(&f).unwrap();
        for (x, v) in g.coords().iter().zip(ff.values()) {
            if x.abs() <= 1.0 + 1e-12 {
                assert!(v.abs() < 1e-9, "{x}: {v}");
            } else {
                assert_eq!(*v, f64::INFINITY);
            }
        }
        // a triangle's hull keeps the lattice points inside it
        let g = GridSpec::cube(2, 0.0, 2.0, 3).unwrap();
        let corners = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];
        let values = g.coords().chunks(2).map(|x| if corners.iter().any(|c| c == x) { 0.0 } else { f64::INFINITY }).collect();
        let ff = lsc_biconjugate_envelope(&GridFn::nonconvex(g.clone(), values).unwrap()).unwrap();
        for (x, v) in g.coords().chunks(2).zip(ff.values()) {
            assert_eq!(v.is_finite(), x[0] + x[1] <= 2.0, "{x:?}");
        }
    }

    #[test]
    fn rockafellar_quadratics() {
        let g = GridSpec::cube(1, -3.0, 3.0, 121).unwrap();
        let f = GridFn::from_closed_form(g.clone(), ClosedForm::half_square(1)).unwrap();
        let dual = GridSpec::cube(1, -2.0, 2.0, 41).unwrap();
        let r = rockafellar_sum_identity(&f, &f, &dual).unwrap();
        assert!(r.passed(), "{r:?}");
        let mut v = vec![1.0; 121];
        v[0] = f64::INFINITY;
        let bad = GridFn::nonconvex(g, v).unwrap();
        assert!(matches!(rockafellar_sum_identity(&f, &bad, &dual), Err(Error::HNotFinite)));
    }

    #[test]
    fn dual_grid_contains_iota_of_primal() {
        let s = swap2();
        let g = GridSpec::new(vec![-2.0, -8.0], vec![2.0, 8.0], vec![81, 81]).unwrap();
        let dual = dual_grid_for(&s, &g, 0.5).unwrap();
        for b in g.coords().chunks(2) {
            assert!(dual.locate(&s.iota_apply(b)).is_some());
        }
        let tight = dual_grid_for(&s, &g, 0.0).unwrap();
        assert_eq!(tight.lower(), &[-8.0, -2.0]);
        assert_eq!(tight.upper(), &[8.0, 2.0]);
    }
}
