use proptest::prelude::*;
use ssdkit::convex::{conjugate_at, GridFn};
use ssdkit::dual::make_dual;
use ssdkit::fitzpatrick::{phi, phi_via_q_gap};
use ssdkit::io::{self, parse_any_grid_fn, parse_point_set, point_set_to_csv};
use ssdkit::positivity::{is_q_positive, PointSet};
use ssdkit::ssd::{NormSpec, ProductNorm, SsdSpace};
use ssdkit::GridSpec;
use tempfile::tempdir;

fn kind() -> impl Strategy<Value = ProductNorm> {
    prop_oneof![Just(ProductNorm::One), Just(ProductNorm::Two), Just(ProductNorm::Inf)]
}

fn tau() -> impl Strategy<Value = f64> {
    0.25f64..4.0
}

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, d)
}

fn product(n: usize, kind: ProductNorm, tau: f64) -> SsdSpace {
    SsdSpace::product(n, NormSpec::product(kind, tau), "prop").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_of_dual_norm_is_the_norm(k in kind(), t in tau(), n in 1usize..4) {
        let d = 2 * n;
        let norm = NormSpec::product(k, t);
        match norm.dual(d).unwrap().dual(d).unwrap() {
            NormSpec::Product { kind: k2, tau: t2 } => {
                prop_assert_eq!(k2, k);
                prop_assert!((t2 - t).abs() <= 4.0 * f64::EPSILON * t);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn holder_inequality_for_dual_norm(k in kind(), t in tau(), x in vector(4), y in vector(4)) {
        let s = product(2, k, t);
        let dual = make_dual(&s).unwrap();
        let lhs: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!(lhs <= s.norm(&x) * dual.norm(&y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn product_spaces_have_nonnegative_p(k in kind(), t in tau(), b in vector(4)) {
        let s = product(2, k, t);
        prop_assert!(s.p(&b) >= -1e-12);
        // q is the duality product on E × E*
        prop_assert!((s.q(&b) - (b[0] * b[2] + b[1] * b[3])).abs() <= 1e-12);
    }

    #[test]
    fn q_positive_iff_monotone(pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..8)) {
        let mut products = Vec::new();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                products.push((a.0 - b.0) * (a.1 - b.1));
            }
        }
        // stay clear of the tolerance band
        prop_assume!(products.iter().all(|p| p.abs() > 1e-6));
        let monotone = products.iter().all(|p| *p >= 0.0);
        let set = PointSet::new(pts.iter().map(|(x, y)| vec![*x, *y]).collect(), "prop");
        prop_assume!(set.is_ok());
        let s = product(1, ProductNorm::Two, 1.0);
        prop_assert_eq!(is_q_positive(&s, &set.unwrap()).unwrap().passed(), monotone);
    }

    #[test]
    fn phi_formulas_agree(pts in prop::collection::vec(vector(2), 1..10), b in vector(2)) {
        let s = product(1, ProductNorm::Two, 1.0);
        let set = PointSet::new(pts, "prop");
        prop_assume!(set.is_ok());
        let set = set.unwrap();
        let direct = phi(&s, &set, &b).unwrap();
        let via_gap = phi_via_q_gap(&s, &set, &b).unwrap();
        prop_assert!((direct - via_gap).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn fenchel_young(a in 0.1f64..3.0, c in -2.0f64..2.0, n in 5usize..40, y in -5.0f64..5.0) {
        let g = GridSpec::cube(1, -2.0, 2.0, n).unwrap();
        let f = GridFn::from_fn(g.clone(), |x| a * x[0] * x[0] + c * x[0]).unwrap();
        let star = conjugate_at(&f, &[y]);
        for (x, v) in g.axis_values(0).iter().zip(f.values()) {
            prop_assert!(v + star >= x * y - 1e-12);
        }
    }

    #[test]
    fn grid_fn_csv_round_trip(vals in prop::collection::vec(prop::option::weighted(0.8, -1e3f64..1e3), 2..30)) {
        prop_assume!(vals.iter().any(Option::is_some));
        let g = GridSpec::cube(1, -1.5, 2.5, vals.len()).unwrap();
        let values: Vec<f64> = vals.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
        let f = GridFn::nonconvex(g, values).unwrap();
        let back = parse_any_grid_fn(&io::grid_fn_to_csv(&f).unwrap()).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn point_set_csv_round_trip(pts in prop::collection::vec(vector(3), 1..12)) {
        let set = PointSet::new(pts, "prop");
        prop_assume!(set.is_ok());
        let set = set.unwrap();
        let back = parse_point_set(&point_set_to_csv(&set).unwrap(), "prop").unwrap();
        prop_assert_eq!(back.points(), set.points());
    }
}

#[test]
fn space_and_function_files_round_trip() {
    let dir = tempdir().unwrap();
    let s = product(1, ProductNorm::One, 0.5);
    let dual = make_dual(&s).unwrap();
    let path = dir.path().join("space.json");
    std::fs::write(&path, io::space_to_json(&s, Some(&dual)).unwrap()).unwrap();
    let loaded = io::read_space(&path).unwrap();
    assert_eq!(loaded.space.pairing_matrix(), s.pairing_matrix());
    assert_eq!(loaded.space.norm_spec(), s.norm_spec());
    assert_eq!(loaded.dual.unwrap().norm_spec(), dual.norm_spec());

    let g = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
    let f = GridFn::from_fn(g, |x| x[0] * x[0] + 0.5 * x[1] * x[1]).unwrap();
    let path = dir.path().join("bowl.csv");
    std::fs::write(&path, io::grid_fn_to_csv(&f).unwrap()).unwrap();
    let back = io::read_grid_fn(&path).unwrap();
    assert_eq!(back.values(), f.values());
    assert_eq!(back.label(), "bowl");
}
