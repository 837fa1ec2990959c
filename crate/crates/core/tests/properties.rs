use std::io::Cursor;

use hodge_core::exterior::{d, FormField};
use hodge_core::solvers::{solve_qform_with, SolverOptions};
use hodge_core::strip::{dump, StripGrid};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn smooth_form(n: usize, degree: usize, coeffs: &[f64]) -> FormField {
    let g = StripGrid::new(n, 2.0 * std::f64::consts::PI, 8, 12.0, 257).unwrap();
    FormField::from_fn(&g, degree, |c, x, y| {
        let a = coeffs[c % coeffs.len()];
        let phase: f64 = y.iter().enumerate().map(|(i, t)| (i + c + 1) as f64 * t).sum();
        C64::new(a * (-x * x).exp() * phase.cos(), a * x * (-x).exp() * phase.sin())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn d_squared_vanishes(n in 1usize..=3, degree in 0usize..=2, coeffs in prop::collection::vec(-2.0f64..2.0, 1..4)) {
        prop_assume!(degree + 2 <= n + 1);
        let phi = smooth_form(n, degree, &coeffs);
        let dd = d(&d(&phi).unwrap()).unwrap();
        prop_assert!(dd.max_abs() <= 1e-9 * (1.0 + phi.max_abs()), "{}", dd.max_abs());
    }

    #[test]
    fn dump_round_trip_is_exact(n in 1usize..=2, degree in 0usize..=2, coeffs in prop::collection::vec(-5.0f64..5.0, 1..4)) {
        prop_assume!(degree <= n + 1);
        let phi = smooth_form(n, degree, &coeffs);
        let mut buf = Vec::new();
        dump::write_form(&mut buf, &phi).unwrap();
        let back = dump::read_form(&mut Cursor::new(buf)).unwrap();
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn solver_is_linear(s in -3.0f64..3.0) {
        let a = smooth_form(1, 1, &[1.0, -0.5]);
        let b = smooth_form(1, 1, &[0.3]);
        let opts = SolverOptions::default();
        let (ua, _) = solve_qform_with(&a, &opts).unwrap();
        let (ub, _) = solve_qform_with(&b, &opts).unwrap();
        let (uc, _) = solve_qform_with(&b.axpy(C64::new(s, 0.0), &a).unwrap(), &opts).unwrap();
        let expect = ub.axpy(C64::new(s, 0.0), &ua).unwrap();
        let err = uc.sub(&expect).unwrap().max_abs();
        prop_assert!(err <= 1e-10 * (1.0 + expect.max_abs()), "{err}");
    }
}
