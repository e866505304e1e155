//! File formats: space documents (JSON), grid functions, point sets and
//! monotone sets (CSV).
//!
//! Grid function CSV: a first record `grid,<lo:hi:n,...>`, a header
//! `x1,...,xd,value`, then one row per grid point in row-major order
//! (last axis fastest). +∞ is written as `inf`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convex::GridFn;
use crate::dual::{DualDescriptor, DualSsd};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::monotone::MonotoneSet;
use crate::positivity::PointSet;
use crate::report::fmt_float;
use crate::ssd::{SpaceDescriptor, SsdSpace};

/// A space with its optional stored dual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDocument {
    #[serde(flatten)]
    pub space: SpaceDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualDescriptor>,
}

/// A validated space and, when the document carries one, its dual.
#[derive(Clone, Debug)]
pub struct LoadedSpace {
    pub space: SsdSpace,
    pub dual: Option<DualSsd>,
}

impl SpaceDocument {
    pub fn new(space: &SsdSpace, dual: Option<&DualSsd>) -> Self {
        Self { space: space.clone().into(), dual: dual.map(DualSsd::descriptor) }
    }

    /// Validate the space and the stored dual against it.
    pub fn load(self) -> Result<LoadedSpace> {
        let space = SsdSpace::try_from(self.space)?;
        let dual = self.dual.map(|d| DualSsd::from_descriptor(&space, &d)).transpose()?;
        Ok(LoadedSpace { space, dual })
    }
}

pub fn parse_space(text: &str) -> Result<LoadedSpace> {
    serde_json::from_str::<SpaceDocument>(text)?.load()
}

pub fn read_space(path: &Path) -> Result<LoadedSpace> {
    parse_space(&fs::read_to_string(path)?)
}

pub fn space_to_json(space: &SsdSpace, dual: Option<&DualSsd>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SpaceDocument::new(space, dual))?)
}

fn parse_value(field: &str) -> Result<f64> {
    match field.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        s => {
            let v: f64 = s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("only +inf may be non-finite, got `{s}`")))
            }
        }
    }
}

fn axis_header(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|k| format!("{prefix}{k}")).collect()
}

pub fn grid_fn_to_csv(f: &GridFn) -> Result<String> {
    let d = f.dim();
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(["grid", &f.grid().describe()])?;
    let mut header = axis_header("x", d);
    header.push("value".into());
    w.write_record(&header)?;
    for (b, v) in f.grid().coords().chunks(d).zip(f.values()) {
        let mut row: Vec<String> = b.iter().map(|x| fmt_float(*x)).collect();
        row.push(fmt_float(*v));
        w.write_record(&row)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Parse a grid function; the values are checked for grid convexity.
pub fn parse_grid_fn(text: &str) -> Result<GridFn> {
    let (grid, values) = parse_grid_values(text)?;
    GridFn::new(grid, values)
}

/// Parse a grid function without the convexity check.
pub fn parse_any_grid_fn(text: &str) -> Result<GridFn> {
    let (grid, values) = parse_grid_values(text)?;
    match GridFn::new(grid.clone(), values.clone()) {
        Err(Error::NotConvex { .. }) => GridFn::nonconvex(grid, values),
        other => other,
    }
}

fn parse_grid_values(text: &str) -> Result<(GridSpec, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = r.records();
    let first = records.next().ok_or_else(|| Error::Parse("empty grid function file".into()))??;
    if first.get(0) != Some("grid") || first.len() != 2 {
        return Err(Error::Parse("first record must be `grid,<lo:hi:n,...>`".into()));
    }
    let grid = GridSpec::parse(&first[1])?;
    let d = grid.dim();
    let header = records.next().ok_or_else(|| Error::Parse("missing header".into()))??;
    if header.len() != d + 1 {
        return Err(Error::Parse(format!("header has {} columns, expected {}", header.len(), d + 1)));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (k, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != d + 1 {
            return Err(Error::Parse(format!("row {} has {} columns", k + 1, rec.len())));
        }
        if k >= grid.len() {
            return Err(Error::Parse("more rows than grid points".into()));
        }
        let expected = grid.point(k);
        for (a, x) in expected.iter().enumerate() {
            let got = parse_value(&rec[a])?;
            if (got - x).abs() > 1e-9 * (1.0 + x.abs()) {
                return Err(Error::Parse(format!("row {} coordinate {} is {got}, expected {x}", k + 1, a + 1)));
            }
        }
        values.push(parse_value(&rec[d])?);
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!("{} rows for {} grid points", values.len(), grid.len())));
    }
    Ok((grid, values))
}

fn stem(path: &Path) -> &str {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("")
}

/// Read a convex grid function, labelled by the file stem.
pub fn read_grid_fn(path: &Path) -> Result<GridFn> {
    Ok(parse_grid_fn(&fs::read_to_string(path)?)?.with_label(stem(path)))
}

/// As `read_grid_fn`, accepting nonconvex values.
pub fn read_any_grid_fn(path: &Path) -> Result<GridFn> {
    Ok(parse_any_grid_fn(&fs::read_to_string(path)?)?.with_label(stem(path)))
}

fn points_to_csv(header: Vec<String>, points: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for p in points {
        w.write_record(p.iter().map(|x| fmt_float(*x)))?;
    }
    finish(w)
}

fn parse_points(text: &str) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let width = r.headers()?.len();
    let mut points = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!("row {} has {} columns, expected {width}", k + 1, rec.len())));
        }
        let p = rec.iter().map(parse_value).collect::<Result<Vec<f64>>>()?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        points.push(p);
    }
    Ok((width, points))
}

pub fn point_set_to_csv(set: &PointSet) -> Result<String> {
    points_to_csv(axis_header("x", set.dim()), set.points())
}

pub fn parse_point_set(text: &str, label: &str) -> Result<PointSet> {
    let (_, points) = parse_points(text)?;
    PointSet::new(points, label)
}

/// Monotone set CSV: columns x1..xn, xstar1..xstarn.
pub fn monotone_set_to_csv(set: &MonotoneSet) -> Result<String> {
    let mut header = axis_header("x", set.n());
    header.extend(axis_header("xstar", set.n()));
    points_to_csv(header, set.set().points())
}

pub fn parse_monotone_set(text: &str, label: &str) -> Result<MonotoneSet> {
    let (width, points) = parse_points(text)?;
    if width % 2 != 0 {
        return Err(Error::Parse(format!("{width} columns cannot split into x and xstar")));
    }
    MonotoneSet::new(PointSet::new(points, label)?)
}

pub fn read_point_set(path: &Path) -> Result<PointSet> {
    parse_point_set(&fs::read_to_string(path)?, stem(path))
}

pub fn read_monotone_set(path: &Path) -> Result<MonotoneSet> {
    parse_monotone_set(&fs::read_to_string(path)?, stem(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ClosedForm;
    use crate::dual::make_dual;
    use crate::ssd::{NormSpec, ProductNorm};

    #[test]
    fn grid_fn_round_trip_with_infinity() {
        let g = GridSpec::parse("-1:1:5,0:2:3").unwrap();
        let f = GridFn::from_fn(g.clone(), |b| if b[0] > 0.6 { f64::INFINITY } else { b[0] * b[0] + b[1] }).unwrap();
        let text = grid_fn_to_csv(&f).unwrap();
        assert!(text.starts_with("grid,\"-1:1:5,0:2:3\"\n"));
        assert!(text.contains(",inf\n"));
        let back = parse_grid_fn(&text).unwrap();
        assert_eq!(back.grid(), &g);
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn grid_fn_rejects_bad_input() {
        assert!(matches!(parse_grid_fn(""), Err(Error::Parse(_))));
        assert!(matches!(parse_grid_fn("grid,\"0:1:2\"\nx1,value\n0,1\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_grid_fn("grid,\"0:1:2\"\nx1,value\n0,1\n0.5,2\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_grid_fn("grid,\"0:1:2\"\nx1,value\n0,nan\n1,2\n"), Err(Error::Parse(_))));
        let wiggle = "grid,\"0:2:3\"\nx1,value\n0,0\n1,1\n2,0\n";
        assert!(matches!(parse_grid_fn(wiggle), Err(Error::NotConvex { .. })));
        assert!(!parse_any_grid_fn(wiggle).unwrap().is_convex());
    }

    #[test]
    fn space_document_round_trip() {
        let s = SsdSpace::product(1, NormSpec::product(ProductNorm::Inf, 2.0), "p").unwrap();
        let dual = make_dual(&s).unwrap();
        let text = space_to_json(&s, Some(&dual)).unwrap();
        let loaded = parse_space(&text).unwrap();
        assert_eq!(loaded.space, s);
        assert_eq!(loaded.dual.unwrap(), dual);
        assert!(parse_space("{\"dim\": 2").is_err());
        let f = GridFn::from_closed_form(GridSpec::cube(1, 0.0, 1.0, 3).unwrap(), ClosedForm::half_square(1)).unwrap();
        assert_eq!(parse_grid_fn(&grid_fn_to_csv(&f).unwrap()).unwrap().values(), f.values());
    }

    #[test]
    fn monotone_csv_columns() {
        let m = MonotoneSet::from_pairs(vec![(vec![0.0], vec![0.0]), (vec![1.0], vec![2.0])], "m").unwrap();
        let text = monotone_set_to_csv(&m).unwrap();
        assert!(text.starts_with("x1,xstar1\n"));
        assert_eq!(parse_monotone_set(&text, "m").unwrap().len(), 2);
        assert!(matches!(parse_monotone_set("x1,xstar1\n0,1\n1,0\n", ""), Err(Error::NotMonotone { .. })));
    }
}
