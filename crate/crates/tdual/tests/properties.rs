//! Algebraic invariants, checked exactly on randomly generated inputs.
//! Each property draws a seed and builds its inputs from a ChaCha stream so
//! failures reproduce from the printed seed.

mod common;

use common::{random_duality, random_fn, random_form, random_homogeneous, random_section, random_vector, rng};
use proptest::prelude::*;
use rand::Rng;
use tdual::cli::parse::parse_form;
use tdual::cli::print::print_form;
use tdual::forms::{lie_derivative, pullback};
use tdual::genstruct::{clifford, d_h, dorfman, pairing, GenSection};
use tdual::tduality::{cochain_verify, make_correspondence};
use tdual::{Chart, Form};

fn charts() -> Vec<Chart> {
    vec![
        Chart::elliptic(1, 0, 1),
        Chart::elliptic(2, 0, 0),
        Chart::elliptic(1, 1, 0),
        Chart::complex_log(1, 0, 1),
        Chart::real_log(1, 0, 1),
        Chart::smooth(1, 1),
    ]
}

fn chart_strategy() -> impl Strategy<Value = Chart> {
    proptest::sample::select(charts())
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

fn sign(p: u32) -> i64 {
    if p.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `[[d_H, u.], v.]` applied to `rho`.
fn derived_bracket(u: &GenSection, v: &GenSection, h: &Form, rho: &Form) -> Form {
    let du = |a: &Form| d_h(&clifford(u, a).unwrap(), h).add(&clifford(u, &d_h(a, h)).unwrap());
    du(&clifford(v, rho).unwrap()).sub(&clifford(v, &du(rho)).unwrap())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn coefficient_ring_axioms(seed in any::<u64>()) {
        let mut g = rng(seed);
        let sig = Chart::elliptic(2, 1, 1).sig();
        let (a, b, c) = (random_fn(&mut g, sig, 3, false), random_fn(&mut g, sig, 3, false), random_fn(&mut g, sig, 3, false));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn d_squares_to_zero_and_obeys_leibniz(seed in any::<u64>(), chart in chart_strategy()) {
        let mut g = rng(seed);
        let p = g.gen_range(0..=2);
        let a = random_homogeneous(&mut g, chart, p, 3, false);
        let b = random_form(&mut g, chart, 3, 2, false);
        prop_assert!(a.d().d().is_zero());
        let lhs = a.wedge(&b).d();
        let rhs = a.d().wedge(&b).add(&a.wedge(&b.d()).scale_int(sign(p)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), chart in chart_strategy()) {
        let mut g = rng(seed);
        let (p, q) = (g.gen_range(0..=2), g.gen_range(0..=2));
        let a = random_homogeneous(&mut g, chart, p, 3, false);
        let b = random_homogeneous(&mut g, chart, q, 3, false);
        prop_assert_eq!(a.wedge(&b), b.wedge(&a).scale_int(sign(p * q)));
    }

    #[test]
    fn contraction_is_an_odd_derivation(seed in any::<u64>(), chart in chart_strategy()) {
        let mut g = rng(seed);
        let p = g.gen_range(0..=2);
        let x = random_vector(&mut g, chart);
        let a = random_homogeneous(&mut g, chart, p, 3, false);
        let b = random_form(&mut g, chart, 3, 2, false);
        let lhs = x.contract(&a.wedge(&b)).unwrap();
        let rhs = x.contract(&a).unwrap().wedge(&b).add(&a.wedge(&x.contract(&b).unwrap()).scale_int(sign(p)));
        prop_assert_eq!(lhs, rhs);
        prop_assert!(x.contract(&x.contract(&a).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_and_bracket_intertwine(seed in any::<u64>(), chart in chart_strategy()) {
        let mut g = rng(seed);
        let x = random_vector(&mut g, chart);
        let y = random_vector(&mut g, chart);
        let a = random_form(&mut g, chart, 3, 3, false);
        // [L_X, iota_Y] = iota_[X,Y]
        let lhs = lie_derivative(&x, &y.contract(&a).unwrap()).unwrap()
            .sub(&y.contract(&lie_derivative(&x, &a).unwrap()).unwrap());
        prop_assert_eq!(lhs, x.bracket(&y).contract(&a).unwrap());
        // L_X commutes with d
        prop_assert_eq!(lie_derivative(&x, &a.d()).unwrap(), lie_derivative(&x, &a).unwrap().d());
    }

    #[test]
    fn pullback_is_natural(seed in any::<u64>(), idx in 0usize..3) {
        let mut g = rng(seed);
        let left = charts()[idx];
        let corr = make_correspondence(&left, &left).unwrap();
        let a = random_form(&mut g, left, 3, 2, false);
        let b = random_form(&mut g, left, 3, 2, false);
        let pb = |f: &Form| pullback(f, &corr.phat, &corr.chart).unwrap();
        prop_assert_eq!(pb(&a.d()), pb(&a).d());
        prop_assert_eq!(pb(&a.wedge(&b)), pb(&a).wedge(&pb(&b)));
    }

    #[test]
    fn clifford_relation(seed in any::<u64>(), chart in chart_strategy()) {
        let mut g = rng(seed);
        let u = random_section(&mut g, chart);
        let v = random_section(&mut g, chart);
        let rho = random_form(&mut g, chart, 3, 3, false);
        let anti = clifford(&u, &clifford(&v, &rho).unwrap()).unwrap()
            .add(&clifford(&v, &clifford(&u, &rho).unwrap()).unwrap());
        let two = pairing(&u, &v).unwrap().scale(&tdual::Qi::int(2));
        prop_assert_eq!(anti, rho.scale_fn(&two));
    }

    #[test]
    fn dorfman_bracket_is_derived_and_leibniz(seed in any::<u64>(), idx in 0usize..3) {
        let mut g = rng(seed);
        let chart = charts()[idx];
        let h = random_homogeneous(&mut g, chart, 2, 2, true).d();
        let (u, v, w) = (random_section(&mut g, chart), random_section(&mut g, chart), random_section(&mut g, chart));
        let uv = dorfman(&u, &v, &h).unwrap();
        let rho = random_form(&mut g, chart, 3, 3, false);
        prop_assert_eq!(derived_bracket(&u, &v, &h, &rho), clifford(&uv, &rho).unwrap());
        // [u, [v, w]] = [[u, v], w] + [v, [u, w]]
        let lhs = dorfman(&u, &dorfman(&v, &w, &h).unwrap(), &h).unwrap();
        let rhs = dorfman(&uv, &w, &h).unwrap().add(&dorfman(&v, &dorfman(&u, &w, &h).unwrap(), &h).unwrap());
        prop_assert_eq!(lhs, rhs);
        // X <v, w> = <[u, v], w> + <v, [u, w]>
        let lhs = u.vec.apply(&pairing(&v, &w).unwrap());
        let rhs = pairing(&uv, &w).unwrap().add(&pairing(&v, &dorfman(&u, &w, &h).unwrap()).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn duality_is_a_cochain_map_and_invertible(seed in any::<u64>(), idx in 0usize..4) {
        let mut g = rng(seed);
        let left = common::duality_shapes()[idx];
        let data = random_duality(&mut g, left);
        let samples: Vec<Form> = (0..4).map(|_| random_form(&mut g, left, 3, 3, true)).collect();
        let rep = cochain_verify(&data, &samples).unwrap();
        prop_assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn printed_forms_parse_back(seed in any::<u64>(), chart in chart_strategy()) {
        let mut g = rng(seed);
        let a = random_form(&mut g, chart, 4, 3, false);
        let text = print_form(&a);
        let back = parse_form(&text, &chart).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, a);
    }
}
