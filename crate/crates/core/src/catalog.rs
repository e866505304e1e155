//! Built-in examples: spaces shipped as JSON data, plus generated sets and
//! functions sampled on a caller-supplied grid.

use std::fmt;
use std::str::FromStr;

use crate::convex::{dual_grid_for, ClosedForm, GridFn};
use crate::error::{Error, Result};
use crate::fitzpatrick::FitzTriple;
use crate::grid::GridSpec;
use crate::io::{LoadedSpace, SpaceDocument};
use crate::positivity::PointSet;
use crate::ssd::SsdSpace;

const SPACES: &str = include_str!("../catalog/spaces.json");

fn documents() -> Vec<SpaceDocument> {
    serde_json::from_str(SPACES).expect("catalog/spaces.json is valid")
}

/// Labels of the shipped spaces, in file order.
pub fn space_names() -> Vec<String> {
    documents().into_iter().map(|d| d.space.label).collect()
}

/// A shipped space by label. Stored duals are validated on load.
pub fn space(name: &str) -> Result<LoadedSpace> {
    documents()
        .into_iter()
        .find(|d| d.space.label == name)
        .ok_or_else(|| Error::Parse(format!("no catalog space `{name}`")))?
        .load()
}

/// The nine product-space labels, kinds outer and τ inner.
pub fn product_space_names() -> Vec<String> {
    space_names().into_iter().filter(|n| n.starts_with("product-")).collect()
}

/// Generated point sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SetKind {
    /// (cos t, sin t, λt) for t in [-10, 10] in the 3-dimensional swap space.
    Helix { lambda: f64, samples: usize },
    /// The line through (1, -1, 2) in the 3-dimensional swap space.
    Line,
    /// {(t, t)} over the first grid axis.
    Diagonal,
    /// {(t, 2t)}.
    Doubling,
    /// Graph of t ↦ t³, sampled along both grid axes.
    CubeGraph,
    /// Graph of the sign subdifferential, vertical segment included.
    SignGraph,
    /// The origin.
    Singleton,
}

impl FromStr for SetKind {
    type Err = Error;

    /// `helix`, `helix:0.5`, `helix:0.5:400`, `diagonal`, ...
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or("");
        let bad = || Error::Parse(format!("bad set name `{s}`"));
        let kind = match head {
            "helix" => {
                let lambda = parts.next().map(str::parse).transpose().map_err(|_| bad())?.unwrap_or(1.0);
                let samples = parts.next().map(str::parse).transpose().map_err(|_| bad())?.unwrap_or(200);
                SetKind::Helix { lambda, samples }
            }
            "line" => SetKind::Line,
            "diagonal" => SetKind::Diagonal,
            "doubling" => SetKind::Doubling,
            "cube-graph" => SetKind::CubeGraph,
            "sign-graph" => SetKind::SignGraph,
            "singleton" => SetKind::Singleton,
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(kind)
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKind::Helix { lambda, samples } => write!(f, "helix:{lambda}:{samples}"),
            SetKind::Line => write!(f, "line"),
            SetKind::Diagonal => write!(f, "diagonal"),
            SetKind::Doubling => write!(f, "doubling"),
            SetKind::CubeGraph => write!(f, "cube-graph"),
            SetKind::SignGraph => write!(f, "sign-graph"),
            SetKind::Singleton => write!(f, "singleton"),
        }
    }
}

fn need_dim(grid: &GridSpec, d: usize) -> Result<()> {
    if grid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.dim() });
    }
    Ok(())
}

/// Dedup by exact coordinates after sorting.
fn graph(mut points: Vec<Vec<f64>>, label: &str) -> Result<PointSet> {
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    points.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(u, v)| (u - v).abs() <= 1e-12));
    PointSet::new(points, label)
}

impl SetKind {
    /// Sample the set. Helix and line ignore the grid; the others are 2-dimensional
    /// graphs whose samples lie on the grid's axes.
    pub fn build(&self, grid: &GridSpec) -> Result<PointSet> {
        let label = self.to_string();
        match *self {
            SetKind::Helix { lambda, samples } => {
                if samples < 2 {
                    return Err(Error::Parse("helix needs at least 2 samples".into()));
                }
                let pts = (0..samples)
                    .map(|k| {
                        let t = -10.0 + 20.0 * k as f64 / (samples - 1) as f64;
                        vec![t.cos(), t.sin(), lambda * t]
                    })
                    .collect();
                PointSet::new(pts, &label)
            }
            SetKind::Line => PointSet::new((-10..=10).map(|k| vec![k as f64, -k as f64, 2.0 * k as f64]).collect(), &label),
            SetKind::Diagonal => {
                need_dim(grid, 2)?;
                PointSet::new(grid.axis_values(0).into_iter().map(|t| vec![t, t]).collect(), &label)
            }
            SetKind::Doubling => {
                need_dim(grid, 2)?;
                PointSet::new(grid.axis_values(0).into_iter().map(|t| vec![t, 2.0 * t]).collect(), &label)
            }
            SetKind::CubeGraph => {
                need_dim(grid, 2)?;
                let mut pts: Vec<Vec<f64>> = grid.axis_values(0).into_iter().map(|t| vec![t, t * t * t]).collect();
                let (lo, hi) = (grid.lower()[0], grid.upper()[0]);
                pts.extend(grid.axis_values(1).into_iter().map(|y| vec![y.cbrt(), y]).filter(|p| p[0] >= lo && p[0] <= hi));
                graph(pts, &label)
            }
            SetKind::SignGraph => {
                need_dim(grid, 2)?;
                let mut pts: Vec<Vec<f64>> =
                    grid.axis_values(0).into_iter().filter(|t| *t != 0.0).map(|t| vec![t, t.signum()]).collect();
                pts.extend(grid.axis_values(1).into_iter().filter(|s| s.abs() <= 1.0).map(|s| vec![0.0, s]));
                graph(pts, &label)
            }
            SetKind::Singleton => PointSet::new(vec![vec![0.0; grid.dim()]], &label),
        }
    }
}

/// Generated functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FnKind {
    /// ½|b|².
    HalfSquare,
    /// ½|b|² + 1, the convex stand-in for a shifted representer.
    HalfSquarePlusOne,
    /// Φ of the diagonal.
    PhiDiagonal,
    /// *Θ of the diagonal.
    StarThetaDiagonal,
    /// (x² - 1)², nonconvex, on ℝ¹.
    DoubleWell,
}

impl FnKind {
    pub const ALL: [FnKind; 5] =
        [FnKind::HalfSquare, FnKind::HalfSquarePlusOne, FnKind::PhiDiagonal, FnKind::StarThetaDiagonal, FnKind::DoubleWell];

    pub fn name(self) -> &'static str {
        match self {
            FnKind::HalfSquare => "half-square",
            FnKind::HalfSquarePlusOne => "half-square-plus-one",
            FnKind::PhiDiagonal => "phi-diagonal",
            FnKind::StarThetaDiagonal => "star-theta-diagonal",
            FnKind::DoubleWell => "double-well",
        }
    }

    /// Sample on `grid`. The diagonal's Fitzpatrick functions need the space.
    pub fn build(self, space: &SsdSpace, grid: &GridSpec) -> Result<GridFn> {
        let d = grid.dim();
        let f = match self {
            FnKind::HalfSquare => GridFn::from_closed_form(grid.clone(), ClosedForm::half_square(d))?,
            FnKind::HalfSquarePlusOne => GridFn::from_closed_form(
                grid.clone(),
                ClosedForm::Sum(vec![ClosedForm::half_square(d), ClosedForm::Constant(1.0)]),
            )?,
            FnKind::PhiDiagonal | FnKind::StarThetaDiagonal => {
                let set = SetKind::Diagonal.build(grid)?;
                let triple = FitzTriple::build(space, &set, grid, &dual_grid_for(space, grid, 0.5)?)?;
                if self == FnKind::PhiDiagonal {
                    triple.phi
                } else {
                    triple.star_theta
                }
            }
            FnKind::DoubleWell => {
                need_dim(grid, 1)?;
                GridFn::nonconvex(grid.clone(), grid.axis_values(0).into_iter().map(|x| (x * x - 1.0).powi(2)).collect())?
            }
        };
        Ok(f.with_label(self.name()))
    }
}

impl FromStr for FnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FnKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("no catalog function `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::make_dual;

    #[test]
    fn shipped_spaces_load() {
        let names = space_names();
        assert_eq!(names.len(), 14);
        assert_eq!(product_space_names().len(), 9);
        for n in &names {
            let loaded = space(n).unwrap();
            assert_eq!(loaded.space.label(), n);
            if let Some(stored) = loaded.dual {
                assert_eq!(make_dual(&loaded.space).unwrap(), stored.clone());
            }
        }
        assert!(matches!(make_dual(&space("scaled-product").unwrap().space), Err(Error::NoDual { .. })));
        assert!(space("nope").is_err());
    }

    #[test]
    fn set_names_round_trip() {
        for s in ["helix:0.5:200", "line", "diagonal", "doubling", "cube-graph", "sign-graph", "singleton"] {
            assert_eq!(s.parse::<SetKind>().unwrap().to_string(), s);
        }
        assert_eq!("helix".parse::<SetKind>().unwrap(), SetKind::Helix { lambda: 1.0, samples: 200 });
        assert!("helix:x".parse::<SetKind>().is_err());
        assert!("diagonal:2".parse::<SetKind>().is_err());
    }

    #[test]
    fn graphs_lie_on_their_curves() {
        let g = GridSpec::new(vec![-2.0, -8.0], vec![2.0, 8.0], vec![41, 161]).unwrap();
        let cube = SetKind::CubeGraph.build(&g).unwrap();
        assert!(cube.iter().all(|p| (p[1] - p[0].powi(3)).abs() < 1e-9));
        assert!(cube.len() > 161);
        let sign = SetKind::SignGraph.build(&GridSpec::cube(2, -2.0, 2.0, 41).unwrap()).unwrap();
        assert_eq!(sign.iter().filter(|p| p[0] == 0.0).count(), 21);
        assert!(sign.iter().all(|p| p[0] == 0.0 || p[1] == p[0].signum()));
    }

    #[test]
    fn diagonal_fitzpatrick_functions() {
        let s = space("product-two-1").unwrap().space;
        let g = GridSpec::cube(2, -2.0, 2.0, 21).unwrap();
        let phi = FnKind::PhiDiagonal.build(&s, &g).unwrap();
        let star = FnKind::StarThetaDiagonal.build(&s, &g).unwrap();
        for (b, (p, t)) in g.coords().chunks(2).zip(phi.values().iter().zip(star.values())) {
            assert!(p <= t);
            assert!(*p >= s.q(b) - 1e-12);
            if b[0] == b[1] {
                assert!((p - b[0] * b[0]).abs() < 1e-12);
            }
        }
        assert!(FnKind::DoubleWell.build(&s, &g).is_err());
        let w = FnKind::DoubleWell.build(&s, &GridSpec::cube(1, -2.0, 2.0, 41).unwrap()).unwrap();
        assert!(!w.is_convex());
    }
}
