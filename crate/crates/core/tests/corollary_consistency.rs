use nclim_core::limits::{corollary_reduce, mimo_limit, siso_limit, CorollaryCase};
use nclim_core::lti::{PlantModel, RationalFn, TransferMatrix};
use nclim_core::network::{butter1, ChannelSpec, NetworkConstraints, Quantizer};
use nclim_core::Error;

fn tf(num: &[f64], den: &[f64]) -> RationalFn {
    RationalFn::from_coeffs(num, den).unwrap()
}

fn lag(a: f64) -> RationalFn {
    tf(&[1.0], &[a, 1.0])
}

fn plant(rows: Vec<Vec<RationalFn>>) -> PlantModel {
    PlantModel::from_tf(TransferMatrix::from_rows(rows).unwrap()).unwrap()
}

fn channel(sigma_n: f64, sigma_q: f64, lambda: f64, filter: RationalFn) -> ChannelSpec {
    let q = (sigma_q > 0.0).then_some(Quantizer::Sigma { sigma_q });
    ChannelSpec::new(sigma_n, q, lambda, filter).unwrap()
}

fn net(channels: Vec<ChannelSpec>, sigma_r: Vec<f64>) -> NetworkConstraints {
    NetworkConstraints::new(channels, sigma_r).unwrap()
}

/// Single unstable pole at 1 with a non-axis pole direction; minimum phase.
fn coupled_one_pole() -> PlantModel {
    plant(vec![vec![lag(-1.0), lag(3.0).scale(0.5)], vec![lag(-1.0).scale(0.7), lag(2.0)]])
}

fn agree(case: CorollaryCase, pm: &PlantModel, nc: &NetworkConstraints) {
    let general = mimo_limit(pm, nc).unwrap();
    let special = corollary_reduce(case, pm, nc).unwrap();
    let scale = general.total.abs().max(1e-12);
    assert!(
        (general.total - special.total).abs() / scale < 1e-9,
        "{case}: corollary {} vs theorem {}",
        special.total,
        general.total
    );
    assert!((general.j1 - special.j1).abs() <= 1e-9 * scale, "{case}: j1 differs");
}

fn mismatched(case: CorollaryCase, pm: &PlantModel, nc: &NetworkConstraints) {
    match corollary_reduce(case, pm, nc) {
        Err(Error::CaseMismatch { .. }) => {}
        other => panic!("{case}: expected a case mismatch, got {other:?}"),
    }
}

#[test]
fn co1_parallel_directions() {
    // u = 1/(s-1) - 1.5/(s-2) shares the output direction (1, 1) at both poles.
    let u = &lag(-1.0) - &lag(-2.0).scale(1.5);
    let pm = plant(vec![vec![u.clone(), lag(1.0)], vec![u, lag(1.0).scale(2.0)]]);
    assert_eq!(pm.unstable_poles().len(), 2);
    assert!(pm.nmp_zeros().is_empty());
    let nc = net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()); 2], vec![0.1, 0.1]);
    agree(CorollaryCase::Co1Parallel, &pm, &nc);
    mismatched(CorollaryCase::Co1Orthogonal, &pm, &nc);
}

#[test]
fn co1_orthogonal_directions() {
    let (c, s) = (0.6f64, 0.8f64);
    let pm = plant(vec![
        vec![lag(-1.0).scale(c), lag(-2.0).scale(-s)],
        vec![lag(-1.0).scale(s), lag(-2.0).scale(c)],
    ]);
    let nc = net(vec![channel(0.3, 0.2, 1.2, butter1(5.0).unwrap()); 2], vec![0.0, 0.0]);
    agree(CorollaryCase::Co1Orthogonal, &pm, &nc);
    mismatched(CorollaryCase::Co1Parallel, &pm, &nc);
}

#[test]
fn cor1_a_noise_only() {
    let pm = coupled_one_pole();
    let nc = net(
        vec![channel(0.5, 0.0, 1.5, butter1(4.0).unwrap()), channel(0.2, 0.0, 1.0, butter1(6.0).unwrap())],
        vec![0.1, 0.2],
    );
    agree(CorollaryCase::Cor1A, &pm, &nc);
    mismatched(CorollaryCase::Cor1B, &pm, &nc);
}

#[test]
fn cor1_b_quantization_only() {
    let pm = coupled_one_pole();
    let nc = net(
        vec![channel(0.0, 0.3, 1.5, butter1(4.0).unwrap()), channel(0.0, 0.1, 1.0, butter1(6.0).unwrap())],
        vec![0.1, 0.2],
    );
    agree(CorollaryCase::Cor1B, &pm, &nc);
    mismatched(CorollaryCase::Cor1A, &pm, &nc);
}

#[test]
fn cor1_c_unrestricted_bandwidth() {
    let pm = coupled_one_pole();
    let nc = net(vec![channel(0.5, 0.1, 2.0, RationalFn::one()), channel(0.2, 0.3, 1.0, RationalFn::one())], vec![0.1, 0.2]);
    agree(CorollaryCase::Cor1C, &pm, &nc);
    let filtered = net(vec![channel(0.5, 0.1, 2.0, butter1(3.0).unwrap()), channel(0.2, 0.3, 1.0, RationalFn::one())], vec![0.1, 0.2]);
    mismatched(CorollaryCase::Cor1C, &pm, &filtered);
}

#[test]
fn cor1_d_shared_bandwidth_noise() {
    let pm = coupled_one_pole();
    // Shared filter with a zero at s = 4.
    let f = tf(&[4.0, -1.0], &[4.0, 3.0, 1.0]);
    let nc = net(vec![channel(0.5, 0.0, 1.0, f.clone()), channel(0.2, 0.0, 1.0, f)], vec![0.1, 0.2]);
    agree(CorollaryCase::Cor1D, &pm, &nc);
    let nc = net(vec![channel(0.5, 0.0, 1.0, butter1(2.0).unwrap()), channel(0.2, 0.0, 1.0, butter1(2.0).unwrap())], vec![0.0, 0.0]);
    agree(CorollaryCase::Cor1D, &pm, &nc);
    let uneven = net(vec![channel(0.5, 0.0, 2.0, butter1(2.0).unwrap()), channel(0.2, 0.0, 1.0, butter1(2.0).unwrap())], vec![0.0, 0.0]);
    mismatched(CorollaryCase::Cor1D, &pm, &uneven);
}

#[test]
fn cor1_e_shared_bandwidth_quantization() {
    let pm = coupled_one_pole();
    let f = tf(&[4.0, -1.0], &[4.0, 3.0, 1.0]);
    let nc = net(vec![channel(0.0, 0.4, 1.0, f.clone()), channel(0.0, 0.1, 1.0, f)], vec![0.1, 0.2]);
    agree(CorollaryCase::Cor1E, &pm, &nc);
    let nc = net(vec![channel(0.0, 0.4, 1.0, butter1(3.0).unwrap()), channel(0.0, 0.1, 1.0, butter1(3.0).unwrap())], vec![0.1, 0.2]);
    agree(CorollaryCase::Cor1E, &pm, &nc);
}

#[test]
fn cor1_rejects_nmp_plants() {
    let pm = plant(vec![vec![tf(&[-2.0, 1.0], &[-3.0, 2.0, 1.0])]]);
    let nc = net(vec![channel(0.1, 0.0, 1.0, RationalFn::one())], vec![0.1]);
    mismatched(CorollaryCase::Cor1A, &pm, &nc);
}

#[test]
fn cor2_a_stable_plant() {
    let pm = plant(vec![
        vec![tf(&[-4.0, 1.0], &[2.0, 3.0, 1.0]), lag(3.0).scale(0.5)],
        vec![lag(1.0).scale(0.7), lag(2.0)],
    ]);
    assert!(pm.unstable_poles().is_empty());
    assert!(!pm.nmp_zeros().is_empty());
    let nc = net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()), channel(0.2, 0.1, 1.0, RationalFn::one())], vec![0.3, 0.2]);
    agree(CorollaryCase::Cor2A, &pm, &nc);
}

#[test]
fn cor2_b_orthogonal_zero_and_pole() {
    let pm = plant(vec![vec![tf(&[-2.0, 1.0], &[3.0, 4.0, 1.0]), RationalFn::zero()], vec![RationalFn::zero(), lag(-1.0)]]);
    let nc = net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()), channel(0.2, 0.1, 1.5, butter1(4.0).unwrap())], vec![0.3, 0.2]);
    agree(CorollaryCase::Cor2B, &pm, &nc);
    // Zero and pole in the same output break orthogonality.
    let aligned = plant(vec![vec![tf(&[-2.0, 1.0], &[-3.0, 2.0, 1.0]), RationalFn::zero()], vec![RationalFn::zero(), lag(1.0)]]);
    mismatched(CorollaryCase::Cor2B, &aligned, &nc);
}

#[test]
fn cor2_c_minimum_phase_multi_pole() {
    let pm = plant(vec![vec![lag(-1.0), RationalFn::zero()], vec![lag(-1.0).scale(0.7), lag(-2.0)]]);
    assert_eq!(pm.unstable_poles().len(), 2);
    assert!(pm.nmp_zeros().is_empty());
    let nc = net(
        vec![channel(0.5, 0.3, 1.5, butter1(4.0).unwrap()), channel(0.2, 0.1, 1.0, butter1(6.0).unwrap())],
        vec![0.3, 0.2],
    );
    agree(CorollaryCase::Cor2C, &pm, &nc);
}

#[test]
fn cor2_d_single_zero() {
    // Scalar: two unstable poles and one NMP zero.
    let pm = plant(vec![vec![RationalFn::from_zpk(&[c(2.0)], &[c(-1.0), c(3.0), c(5.0)], 1.0).unwrap()]]);
    let nc = net(vec![channel(0.1, 0.05, 1.0, butter1(2.0).unwrap())], vec![0.1]);
    agree(CorollaryCase::Cor2D, &pm, &nc);
    let s = siso_limit(&pm, &nc.channels[0], 0.1).unwrap();
    let d = corollary_reduce(CorollaryCase::Cor2D, &pm, &nc).unwrap();
    assert!((s.total - d.total).abs() / s.total < 1e-9);

    // Zero and pole share the output direction e1.
    let pm = plant(vec![vec![tf(&[-2.0, 1.0], &[-3.0, 2.0, 1.0]), RationalFn::zero()], vec![RationalFn::zero(), lag(1.0)]]);
    let nc = net(vec![channel(0.5, 0.0, 1.0, RationalFn::one()), channel(0.2, 0.0, 1.0, RationalFn::one())], vec![0.3, 0.2]);
    agree(CorollaryCase::Cor2D, &pm, &nc);
}

fn c(x: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(x, 0.0)
}

#[test]
fn case_names_round_trip() {
    for case in CorollaryCase::ALL {
        assert_eq!(case.name().parse::<CorollaryCase>().unwrap(), case);
    }
    assert!("cor3_a".parse::<CorollaryCase>().is_err());
}
