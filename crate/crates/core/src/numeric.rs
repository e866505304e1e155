//! Derivative-free optimizers: directions on the sphere, pattern search, and
//! nested golden sections for low-dimensional convex problems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{euclid, scale};

/// Uniformly random unit vector from a seeded stream.
pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = euclid(&v);
        if n > 1e-12 {
            return scale(&v, 1.0 / n);
        }
    }
}

/// Gaussian vector with the given standard deviation.
pub fn random_gaussian(rng: &mut ChaCha8Rng, dim: usize, sigma: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

/// Maximize `f` over Euclidean unit vectors.
///
/// Random sampling picks starting points, then a shrinking pattern search
/// (coordinate and random directions, renormalized) polishes the best few.
/// Returns the best value and its direction.
pub fn maximize_on_sphere<F>(dim: usize, samples: usize, seed: u64, f: F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(f64, Vec<f64>)> = (0..samples.max(1))
        .map(|_| {
            let d = random_unit(&mut rng, dim);
            (f(&d), d)
        })
        .collect();
    // coordinate axes are frequent maximizers of block norms
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            starts.push((f(&e), e));
        }
    }
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    starts.truncate(4);

    let mut best = starts[0].clone();
    for (v, d) in starts {
        let polished = polish(dim, &mut rng, v, d, &f);
        if polished.0 > best.0 {
            best = polished;
        }
    }
    best
}

fn polish<F>(dim: usize, rng: &mut ChaCha8Rng, mut value: f64, mut x: Vec<f64>, f: &F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut step = 0.25;
    let mut iterations = 0;
    while step > 1e-13 && iterations < 20_000 {
        iterations += 1;
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(2 * dim + 4);
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[i] = s;
                directions.push(e);
            }
        }
        for _ in 0..4 {
            directions.push(random_unit(rng, dim));
        }
        let mut improved = false;
        for dir in directions {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let n = euclid(&trial);
            if n < 1e-15 {
                continue;
            }
            let trial = scale(&trial, 1.0 / n);
            let v = f(&trial);
            if v > value {
                value = v;
                x = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, x)
}

/// Minimize a convex `f` on ℝᵏ by nested golden-section searches.
///
/// Minimizing a jointly convex function over its last coordinate leaves a
/// convex function of the others, so every level is a 1-dimensional convex
/// search and kinks do no harm. Brackets start at `center ± radius` and
/// double while the minimizer sits at an end. Cost is about 60ᵏ evaluations.
pub fn nested_convex_minimize<F>(center: &[f64], radius: f64, f: F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = center.to_vec();
    let value = nested_level(0, &mut x, center, radius, &f);
    (value, x)
}

fn nested_level<F>(level: usize, x: &mut Vec<f64>, center: &[f64], radius: f64, f: &F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    if level == x.len() {
        return f(x);
    }
    let inner = |t: f64, x: &mut Vec<f64>| {
        x[level] = t;
        nested_level(level + 1, x, center, radius, f)
    };
    let mut r = radius;
    let mut best = (center[level], f64::INFINITY);
    for _ in 0..30 {
        let (lo, hi) = (center[level] - r, center[level] + r);
        best = golden_section(lo, hi, |t| inner(t, x));
        if (best.0 - lo).min(hi - best.0) > 0.01 * r {
            break;
        }
        r *= 2.0;
    }
    // leave the lower levels at their optimum for this t
    inner(best.0, x);
    best.1
}

fn golden_section(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    let width = hi - lo;
    while hi - lo > 1e-11 * width {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb { (a, fa) } else { (b, fb) }
}

/// Minimize `f` from `start` by a shrinking pattern search in ℝᵈ.
pub fn pattern_minimize<F>(start: Vec<f64>, initial_step: f64, min_step: f64, f: F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            directions.push(e);
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; dim];
                e[i] = si;
                e[j] = sj;
                directions.push(e);
            }
        }
    }
    let mut x = start;
    let mut value = f(&x);
    let mut step = initial_step;
    let mut iterations = 0;
    while step > min_step && iterations < 100_000 {
        iterations += 1;
        let mut improved = false;
        for dir in &directions {
            let trial: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + step * b).collect();
            let v = f(&trial);
            if v < value {
                value = v;
                x = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn sphere_max_of_linear_functional_is_its_length() {
        let y = [3.0, -4.0, 1.0];
        let (v, d) = maximize_on_sphere(3, 500, 7, |x| dot(x, &y));
        assert!((v - 26f64.sqrt()).abs() < 1e-9);
        assert!((dot(&d, &y) - v).abs() < 1e-12);
    }

    #[test]
    fn pattern_search_finds_quadratic_minimum() {
        let (v, x) = pattern_minimize(vec![2.0, -1.0], 0.5, 1e-12, |x| {
            (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2)
        });
        assert!(v < 1e-20);
        assert!((x[0] - 0.3).abs() < 1e-10 && (x[1] + 0.7).abs() < 1e-10);
    }

    #[test]
    fn nested_search_handles_kinks() {
        // |x - 1| + 2|y + 0.5| + max(x, y)/2, unique minimum at (1, -0.5)
        let f = |x: &[f64]| (x[0] - 1.0).abs() + 2.0 * (x[1] + 0.5).abs() + 0.5 * x[0].max(x[1]);
        let (v, x) = nested_convex_minimize(&[0.0, 0.0], 0.1, f);
        assert!((v - 0.5).abs() < 1e-9, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] + 0.5).abs() < 1e-6);
    }
}
