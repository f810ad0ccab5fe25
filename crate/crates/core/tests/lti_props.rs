use nclim_core::lti::{classify_pz, Polynomial, RationalFn, TransferMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Real roots kept apart from each other so the companion eigenvalues are simple.
fn separated_roots(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, n).prop_filter("roots too close", |r| {
        r.iter().enumerate().all(|(i, a)| r[i + 1..].iter().all(|b| (a - b).abs() > 0.05))
    })
}

fn rational(zeros: &[f64], poles: &[f64], k: f64) -> RationalFn {
    let z: Vec<Complex64> = zeros.iter().map(|x| c(*x)).collect();
    let p: Vec<Complex64> = poles.iter().map(|x| c(*x)).collect();
    RationalFn::from_zpk(&z, &p, k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_reconstruct_coefficients(roots in separated_roots(5), pair in (0.1f64..2.0, 0.2f64..3.0)) {
        let mut all: Vec<Complex64> = roots.iter().map(|x| c(*x)).collect();
        all.push(Complex64::new(pair.0, pair.1));
        all.push(Complex64::new(pair.0, -pair.1));
        let p = Polynomial::from_roots(&all);
        let q = Polynomial::from_roots(&p.roots().unwrap());
        let scale = p.max_abs_coeff();
        for k in 0..=p.degree() {
            prop_assert!((p.coeff(k) - q.coeff(k)).abs() <= 1e-10 * scale, "{} vs {}", p, q);
        }
    }

    #[test]
    fn product_evaluates_pointwise(
        poles in separated_roots(4),
        zeros in prop::collection::vec(-3.0f64..3.0, 4),
        w in 0.05f64..20.0,
        sigma in -0.5f64..0.5,
    ) {
        let a = TransferMatrix::from_rows(vec![
            vec![rational(&zeros[..1], &poles[..2], 1.0), rational(&[], &poles[2..3], 2.0)],
            vec![rational(&zeros[1..2], &poles[1..3], -1.0), rational(&zeros[2..3], &poles[3..], 0.5)],
        ]).unwrap();
        let b = TransferMatrix::from_rows(vec![
            vec![rational(&[], &poles[..1], 1.0)],
            vec![rational(&zeros[3..], &poles[2..4], 3.0)],
        ]).unwrap();
        let s = Complex64::new(sigma, w);
        prop_assume!(poles.iter().all(|p| (s - p).norm() > 0.2));
        let ab = a.product(&b).unwrap().eval(s).unwrap();
        let direct = a.eval(s).unwrap() * b.eval(s).unwrap();
        let err = (ab - &direct).norm() / direct.norm().max(1.0);
        prop_assert!(err <= 1e-12, "relative error {err:e}");
    }

    #[test]
    fn classified_zeros_annihilate_the_determinant(
        z in 0.3f64..4.0,
        p in prop::collection::vec(0.3f64..4.0, 2),
        stable in prop::collection::vec(-4.0f64..-0.3, 2),
    ) {
        prop_assume!((p[0] - p[1]).abs() > 0.1 && (z - p[0]).abs() > 0.1 && (z - p[1]).abs() > 0.1);
        let g = TransferMatrix::from_rows(vec![
            vec![rational(&[z], &[p[0], stable[0]], 1.0), rational(&[], &[stable[1]], 0.5)],
            vec![RationalFn::zero(), rational(&[], &[p[1]], 1.0)],
        ]).unwrap();
        let (poles, zeros) = classify_pz(&g).unwrap();
        prop_assert!(poles.iter().chain(&zeros).all(|x| x.re > 0.0));
        prop_assert_eq!(poles.len(), 2);
        let det = g.det().unwrap();
        for zz in zeros {
            let local = det.eval(zz + 0.1).unwrap().norm().max(1e-300);
            prop_assert!(det.eval(zz).unwrap().norm() < 1e-6 * local);
        }
    }
}
