use num_complex::Complex64;
use proptest::prelude::*;
use serde_json::json;
use std::sync::OnceLock;
use zollforms::cli::{canonical_digest, parse_metric, RunConfig};
use zollforms::geodesic::*;
use zollforms::jacobi::{solve_fundamental, JacobiFrame};
use zollforms::normalform::{metaplectic_substitute, SymbolField};
use zollforms::scalar::Cq;
use zollforms::spectral::{self, Interpolant};
use zollforms::surface::*;
use zollforms::weyl::{transvectant_constant, PolySymbol};

fn symbol(max_degree: usize) -> impl Strategy<Value = PolySymbol<Cq>> {
    let term = (0..=max_degree, 0..=max_degree, -4i64..=4, -4i64..=4, 1i64..=3);
    prop::collection::vec(term, 0..5).prop_map(move |ts| {
        let mut p = PolySymbol::zero();
        for (m, n, re, im, d) in ts {
            if m + n <= max_degree {
                p.insert(m, n, Cq::new(Cq::frac(re, d).re, Cq::frac(im, d).re));
            }
        }
        p
    })
}

fn zoll_frame() -> &'static JacobiFrame {
    static FRAME: OnceLock<JacobiFrame> = OnceLock::new();
    FRAME.get_or_init(|| {
        let m = MetricModel::zoll_revolution(&[0.15]).unwrap();
        let init = sample_inits(&m, 3, 1).unwrap()[2];
        solve_fundamental(&trace_geodesic(&m, &init, 256).unwrap()).unwrap()
    })
}

fn field_distance(a: &SymbolField, b: &SymbolField) -> f64 {
    let d = a.sub(b);
    d.terms().map(|(_, f)| f.max_abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn star_is_associative(a in symbol(2), b in symbol(2), c in symbol(2)) {
        let left = a.star(&b).unwrap().star(&c).unwrap();
        let right = a.star(&b.star(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutator_is_antisymmetric_and_satisfies_jacobi(a in symbol(2), b in symbol(2), c in symbol(2)) {
        let ab = a.star_commutator(&b).unwrap();
        prop_assert!(ab.add(&b.star_commutator(&a).unwrap()).is_zero());
        let jacobi = a.star_commutator(&b.star_commutator(&c).unwrap()).unwrap()
            .add(&b.star_commutator(&c.star_commutator(&a).unwrap()).unwrap())
            .add(&c.star_commutator(&a.star_commutator(&b).unwrap()).unwrap());
        prop_assert!(jacobi.is_zero());
    }

    #[test]
    fn transvectant_parity(m in 0usize..5, n in 0usize..5, p in 0usize..5, q in 0usize..5, j in 0usize..5) {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(transvectant_constant(j, (m, n), (p, q)), sign * transvectant_constant(j, (p, q), (m, n)));
    }

    #[test]
    fn star_of_real_symbols_has_hermitian_commutator(a in symbol(3), b in symbol(3)) {
        let real = |s: &PolySymbol<Cq>| {
            let mut out = s.clone();
            for (&(m, n), c) in s.terms() {
                out.insert(n, m, c.conj());
            }
            out
        };
        let (a, b) = (real(&a), real(&b));
        prop_assert!(a.is_real() && b.is_real());
        // [a, b] is anti-Hermitian, so i[a, b] is real.
        let c = a.star_commutator(&b).unwrap().scale(&Cq::i());
        prop_assert!(c.is_real());
    }

    #[test]
    fn frame_substitution_preserves_the_bracket(a in symbol(3), b in symbol(3)) {
        let frame = zoll_frame();
        let bracket = a.transvectant(&b, 1).unwrap();
        let lhs = metaplectic_substitute(&a, frame).unwrap().transvectant(&metaplectic_substitute(&b, frame).unwrap(), 1).unwrap();
        let rhs = metaplectic_substitute(&bracket, frame).unwrap();
        let scale = 1.0 + rhs.terms().map(|(_, f)| f.max_abs()).fold(0.0, f64::max);
        prop_assert!(field_distance(&lhs, &rhs) < 1e-10 * scale);
    }

    #[test]
    fn interpolant_reproduces_samples(coeffs in prop::collection::vec(-1.0f64..1.0, 1..6), s in 0.0f64..std::f64::consts::TAU) {
        let f = |x: f64| coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * x).cos()).sum::<f64>();
        let samples: Vec<f64> = spectral::grid(256).into_iter().map(f).collect();
        let ip = Interpolant::new(&samples);
        prop_assert!((ip.eval(s) - f(s)).abs() < 1e-12);
    }

    // Zero-mean input, so the integral is periodic.
    #[test]
    fn cumulative_integral_inverts_derivative(coeffs in prop::collection::vec(-1.0f64..1.0, 1..6)) {
        let s = spectral::grid(256);
        let f: Vec<Complex64> = s.iter()
            .map(|x| coeffs.iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, (k as f64 + 1.0) * x)).sum())
            .collect();
        let back = spectral::derivative(&spectral::cumulative_integral(&f));
        for (a, b) in back.iter().zip(&f) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn metric_strings_parse(a in -0.3f64..0.3, b in -0.1f64..0.1) {
        let spec = parse_metric(&format!("zoll:{a},{b}")).unwrap();
        prop_assert_eq!(&spec, &MetricSpec::ZollRevolution { h_odd_coeffs: vec![a, b] });
        prop_assert!(MetricModel::new(spec).is_ok());
    }

    #[test]
    fn config_round_trips(geodesics in 1usize..100, seed in any::<u64>(), exp in 8u32..13, a in -0.2f64..0.2) {
        let cfg = RunConfig {
            metric: MetricSpec::ZollRevolution { h_odd_coeffs: vec![a] },
            geodesics,
            seed,
            grid: 1 << exp,
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn digest_ignores_construction_order(x in any::<i32>(), y in "[a-z]{0,8}") {
        let a = json!({"x": x, "y": y, "nested": {"b": 1, "a": [x]}});
        let mut b = serde_json::Map::new();
        b.insert("nested".into(), json!({"a": [x], "b": 1}));
        b.insert("y".into(), json!(y));
        b.insert("x".into(), json!(x));
        prop_assert_eq!(canonical_digest(&a), canonical_digest(&serde_json::Value::Object(b)));
    }
}

#[test]
fn round_substitution_of_y_squared() {
    let m = MetricModel::round();
    let init = sample_inits(&m, 1, 0).unwrap()[0];
    let frame = solve_fundamental(&trace_geodesic(&m, &init, 256).unwrap()).unwrap();
    let sub = metaplectic_substitute(&PolySymbol::y_eta(2, 0).unwrap(), &frame).unwrap();
    // ¼(e^{−is} z + e^{is} z̄)².
    for (j, s) in spectral::grid(256).into_iter().enumerate() {
        let get = |m, n| sub.coeff(m, n).map(|f| f.0[j]).unwrap_or_default();
        assert!((get(2, 0) - Complex64::from_polar(0.25, -2.0 * s)).norm() < 1e-9);
        assert!((get(1, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-9);
        assert!((get(0, 2) - Complex64::from_polar(0.25, 2.0 * s)).norm() < 1e-9);
    }
}
