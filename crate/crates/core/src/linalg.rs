//! Small dense helpers on slices; the grids are low dimensional so these stay
//! allocation-light on purpose.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn sub_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x - y;
    }
}

#[inline]
pub fn euclid(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Row-major `m` (dim x dim) times `x`.
pub fn matvec(m: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d).map(|i| dot(&m[i * d..(i + 1) * d], x)).collect()
}

#[inline]
pub fn bilinear(m: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut acc = 0.0;
    for i in 0..d {
        if x[i] == 0.0 {
            continue;
        }
        let row = &m[i * d..(i + 1) * d];
        acc += x[i] * dot(row, y);
    }
    acc
}

pub fn to_dmatrix(m: &[f64], d: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(d, d, m)
}

pub fn from_dmatrix(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Scale so the largest |entry| is 1 and the first nonzero entry is positive.
pub fn normalize_witness(v: &[f64]) -> Vec<f64> {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return v.to_vec();
    }
    let sign = v.iter().find(|x| x.abs() > 1e-12 * max).map_or(1.0, |x| x.signum());
    v.iter()
        .map(|x| {
            let y = sign * x / max;
            // snap exact +-1 produced by rounding of the normalizing division
            if (y.abs() - 1.0).abs() < 1e-14 {
                y.signum()
            } else {
                y
            }
        })
        .collect()
}
