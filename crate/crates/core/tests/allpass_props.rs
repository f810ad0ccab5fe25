use nalgebra::{DMatrix, DVector};
use nclim_core::allpass::{allpass_factorize, partial_eval, AllPassFactorization, BlaschkeFactor, Side};
use nclim_core::lti::{CMatrix, FrequencyResponse, RationalFn, TransferMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn rotation(t: f64) -> TransferMatrix {
    TransferMatrix::constant(&DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]))
}

/// `U1 diag((s - z1)/(s + a1), (s - z2)/(s + a2)) U2` with NMP zeros `z1`, `z2`.
fn nmp_plant(z: (f64, f64), a: (f64, f64), t: (f64, f64)) -> TransferMatrix {
    let d = TransferMatrix::diag(vec![
        RationalFn::from_coeffs(&[-z.0, 1.0], &[a.0, 1.0]).unwrap(),
        RationalFn::from_coeffs(&[-z.1, 1.0], &[a.1, 1.0]).unwrap(),
    ]);
    rotation(t.0).product(&d).unwrap().product(&rotation(t.1)).unwrap()
}

fn reconstruct(f: &AllPassFactorization, s: Complex64) -> CMatrix {
    let b = partial_eval(f, s, &[], false).unwrap();
    let mp = f.mp_part.eval(s).unwrap();
    match f.side {
        Side::Left => b * mp,
        Side::Right => mp * b,
    }
}

fn plant_params() -> impl Strategy<Value = ((f64, f64), (f64, f64), (f64, f64))> {
    (
        (0.2f64..5.0, 0.2f64..5.0).prop_filter("distinct zeros", |(a, b)| (a - b).abs() > 0.05),
        (0.2f64..5.0, 0.2f64..5.0),
        (-1.5f64..1.5, -1.5f64..1.5),
    )
}

fn axis_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 20).prop_map(|e| e.into_iter().map(|x| 10f64.powf(x)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blaschke_factor_is_unitary_on_the_axis(
        re in 0.01f64..10.0,
        im in -5.0f64..5.0,
        dir in prop::collection::vec(-1.0f64..1.0, 6),
        x in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let v = DVector::from_fn(3, |k, _| Complex64::new(dir[2 * k], dir[2 * k + 1]));
        prop_assume!(v.norm() > 1e-3);
        let x = DVector::from_fn(3, |k, _| Complex64::new(x[2 * k], x[2 * k + 1]));
        for side in [Side::Left, Side::Right] {
            let b = BlaschkeFactor::new(Complex64::new(re, im), &v, side).unwrap();
            for k in 0..=30 {
                let w = 10f64.powf(-3.0 + 6.0 * k as f64 / 30.0);
                for sign in [1.0, -1.0] {
                    let bx = b.eval(Complex64::new(0.0, sign * w)) * &x;
                    prop_assert!((bx.norm() - x.norm()).abs() <= 1e-9 * x.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn factorization_reconstructs_and_leaves_minimum_phase_remainder(
        (z, a, t) in plant_params(),
        ws in axis_points(),
    ) {
        let g = nmp_plant(z, a, t);
        let zeros = [Complex64::new(z.0, 0.0), Complex64::new(z.1, 0.0)];
        for side in [Side::Left, Side::Right] {
            let f = allpass_factorize(&g, &zeros, side).unwrap();
            for w in &ws {
                let s = Complex64::new(0.0, *w);
                let gs = g.eval(s).unwrap();
                prop_assert!((reconstruct(&f, s) - &gs).norm() <= 1e-8 * gs.norm().max(1e-3));
            }
            let mut norm = 0.0f64;
            let mut min_sv = f64::INFINITY;
            for sr in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
                for wi in [0.0, 0.3, 1.0, 4.0, 20.0] {
                    let sv = f.mp_part.eval(Complex64::new(sr, wi)).unwrap().singular_values();
                    norm = norm.max(sv.max());
                    min_sv = min_sv.min(sv.min());
                }
            }
            prop_assert!(min_sv > 1e-6 * norm, "min singular value {min_sv} against {norm}");
        }
    }

    #[test]
    fn repeated_factorization_is_bitwise_identical((z, a, t) in plant_params()) {
        let g = nmp_plant(z, a, t);
        let zeros = [Complex64::new(z.0, 0.0), Complex64::new(z.1, 0.0)];
        let f1 = allpass_factorize(&g, &zeros, Side::Left).unwrap();
        let f2 = allpass_factorize(&g, &zeros, Side::Left).unwrap();
        for (x, y) in f1.factors.iter().zip(&f2.factors) {
            prop_assert_eq!(x.direction(), y.direction());
            prop_assert_eq!(x.location(), y.location());
        }
    }

    #[test]
    fn reordering_preserves_reconstruction((z, a, t) in plant_params(), ws in axis_points()) {
        let g = nmp_plant(z, a, t);
        let fwd = [Complex64::new(z.0, 0.0), Complex64::new(z.1, 0.0)];
        let rev = [fwd[1], fwd[0]];
        let f1 = allpass_factorize(&g, &fwd, Side::Left).unwrap();
        let f2 = allpass_factorize(&g, &rev, Side::Left).unwrap();
        for w in &ws {
            let s = Complex64::new(0.0, *w);
            let gs = g.eval(s).unwrap();
            prop_assert!((reconstruct(&f2, s) - &gs).norm() <= 1e-8 * gs.norm().max(1e-3));
            prop_assert!((reconstruct(&f1, s) - reconstruct(&f2, s)).norm() <= 1e-8 * gs.norm().max(1e-3));
        }
    }
}
