use nalgebra::DVector;
use nclim_core::lti::RationalFn;
use nclim_core::network::{
    bandwidth_factorize, butter1, cos_angle, power_stats, quantizer_sigma, spectral_factor, ChannelSpec,
    NetworkConstraints, Quantizer,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// Stable proper filters, some with a right-half-plane zero.
fn filter() -> impl Strategy<Value = RationalFn> {
    prop_oneof![
        (0.1f64..20.0).prop_map(|wc| butter1(wc).unwrap()),
        Just(RationalFn::one()),
        (-5.0f64..5.0, 0.2f64..4.0, 0.2f64..9.0, 0.1f64..3.0).prop_filter_map("axis zero", |(z, a, b, k)| {
            (z.abs() > 0.05).then(|| RationalFn::from_coeffs(&[-z * k, k], &[b, a, 1.0]).unwrap())
        }),
    ]
}

fn channel() -> impl Strategy<Value = ChannelSpec> {
    (0.0f64..2.0, 0.0f64..1.0, 1.0f64..4.0, filter()).prop_filter_map("noiseless", |(sn, sq, lam, f)| {
        let q = (sq > 1e-3).then_some(Quantizer::Sigma { sigma_q: sq });
        let c = ChannelSpec::new(if sn > 1e-3 { sn } else { 0.0 }, q, lam, f).ok()?;
        (!c.is_noiseless()).then_some(c)
    })
}

fn log_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n - 1) as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn spectral_factor_matches_the_axis_spectrum(ch in channel()) {
        let h = spectral_factor(&ch).unwrap();
        let (sn, sq, lam) = (ch.sigma_n, ch.sigma_q(), ch.lambda);
        for w in log_grid(50) {
            let s = Complex64::new(0.0, w);
            let target = (sn * sn + ch.filter.eval(s).unwrap().norm_sqr() * sq * sq) / (lam * lam);
            let got = h.eval(s).unwrap().norm_sqr();
            prop_assert!((got - target).abs() <= 1e-10 * target, "w = {w}: {got} vs {target}");
        }
        for r in h.poles().unwrap().iter().chain(h.zeros().unwrap().iter()) {
            prop_assert!(r.re < 0.0, "root {r} of h is not in the open LHP");
        }
    }

    #[test]
    fn bandwidth_factorization_keeps_axis_modulus(f in filter()) {
        let bw = bandwidth_factorize(&f).unwrap();
        prop_assert!(bw.f_m.zeros().unwrap().iter().all(|z| z.re <= 0.0));
        for w in log_grid(40) {
            let s = Complex64::new(0.0, w);
            let (a, b) = (f.eval(s).unwrap().norm(), bw.f_m.eval(s).unwrap().norm());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn power_statistics_reconstruct_raw_vectors(chs in prop::collection::vec(channel(), 1..4), sr in prop::collection::vec(0.0f64..2.0, 3)) {
        let m = chs.len();
        let sigma_r = sr[..m].to_vec();
        let nc = NetworkConstraints::new(chs.clone(), sigma_r.clone()).unwrap();
        let st = power_stats(&nc, None).unwrap();
        let check = |d: &nclim_core::network::PowerDistribution, raw: Vec<f64>| {
            let back = d.raw(raw.len());
            raw.iter().zip(back.iter()).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
        };
        prop_assert!(check(&st.r, sigma_r.iter().map(|s| s * s).collect()));
        prop_assert!(check(&st.n, chs.iter().map(|c| c.sigma_n * c.sigma_n).collect()));
        prop_assert!(check(&st.q, chs.iter().map(|c| c.sigma_q() * c.sigma_q()).collect()));
        prop_assert!(check(&st.a, chs.iter().map(|c| 1.0 / (c.lambda * c.lambda)).collect()));
    }

    #[test]
    fn cos_angle_is_symmetric_and_scale_invariant(
        a in prop::collection::vec(-1.0f64..1.0, 6),
        b in prop::collection::vec(-1.0f64..1.0, 6),
        k in (0.1f64..10.0, -3.2f64..3.2),
    ) {
        let a = DVector::from_fn(3, |i, _| Complex64::new(a[2 * i], a[2 * i + 1]));
        let b = DVector::from_fn(3, |i, _| Complex64::new(b[2 * i], b[2 * i + 1]));
        prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
        let c = Complex64::from_polar(k.0, k.1);
        let ab = cos_angle(&a, &b).unwrap();
        prop_assert!((ab - cos_angle(&b, &a).unwrap()).abs() <= 1e-15);
        prop_assert!((ab - cos_angle(&(&a * c), &b).unwrap()).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn quantizer_sigma_is_monotone(bits in 1u32..30, range in 0.01f64..100.0, grow in 1.01f64..3.0) {
        let s = quantizer_sigma(bits, range).unwrap();
        prop_assert!(quantizer_sigma(bits + 1, range).unwrap() < s);
        prop_assert!(quantizer_sigma(bits, range * grow).unwrap() > s);
    }
}

#[test]
fn zero_power_vector_has_no_direction() {
    let nc = NetworkConstraints::new(vec![ChannelSpec::ideal(1.0), ChannelSpec::ideal(0.5)], vec![0.0, 0.0]).unwrap();
    let st = power_stats(&nc, None).unwrap();
    assert_eq!(st.r.psi, 0.0);
    assert!(st.r.direction.is_none());
    assert!(st.q.direction.is_none());
}

#[test]
fn weak_quantization_is_kept() {
    for sq in [1e-4, 1e-6, 1e-8] {
        let ch = ChannelSpec::new(0.1, Some(Quantizer::Sigma { sigma_q: sq }), 2.0, butter1(2.0).unwrap()).unwrap();
        let h = spectral_factor(&ch).unwrap();
        for w in log_grid(30) {
            let s = Complex64::new(0.0, w);
            let target = (0.01 + ch.filter.eval(s).unwrap().norm_sqr() * sq * sq) / 4.0;
            let got = h.eval(s).unwrap().norm_sqr();
            assert!((got - target).abs() <= 1e-10 * target, "sigma_q = {sq}, w = {w}");
        }
    }
}
