use nalgebra::DVector;
use num_complex::Complex64;

use super::{check_divergence, pole_kernel, PerfBreakdown};
use crate::allpass::{extract_factors, partial_product, BlaschkeFactor, Side};
use crate::error::{Error, Result};
use crate::lti::plant::{dominant_left_vector, PlantModel};
use crate::lti::{CMatrix, TransferMatrix};
use crate::network::{cos_angle, network_factor, network_h, power_stats, NetworkConstraints, PowerDistribution};

/// Directions entering the closed forms.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Left factors of the plant at its NMP zeros; directions are `eta_i`.
    pub zero_factors: Vec<BlaschkeFactor>,
    /// Output directions of `F G` at the unstable poles.
    pub pole_directions: Vec<DVector<Complex64>>,
    /// Right factors of `M~_F H` at the unstable poles; directions are `gamma_i`.
    pub network_factors: Vec<BlaschkeFactor>,
    pub h: TransferMatrix,
}

pub fn analyze(plant: &PlantModel, constraints: &NetworkConstraints) -> Result<Analysis> {
    let m = plant.outputs();
    if constraints.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} channels for a plant with {m} outputs",
            constraints.len()
        )));
    }
    check_divergence(plant, constraints)?;

    let zero_factors = extract_factors(plant.g(), plant.nmp_zeros(), Side::Left)?;
    let h = network_h(constraints)?;

    let mut pole_directions = Vec::with_capacity(plant.unstable_poles().len());
    for &p in plant.unstable_poles() {
        let res = plant.g().residue(p)?;
        let f = constraints.filter_matrix().eval(p)?;
        let dir = dominant_left_vector(&(f * res))
            .ok_or_else(|| Error::InvalidInput(format!("{p} is not a pole of the plant")))?;
        pole_directions.push(dir);
    }

    let mut network_factors = Vec::new();
    if !constraints.is_noiseless() && !plant.unstable_poles().is_empty() {
        if constraints.channels.iter().any(|c| c.is_noiseless()) {
            return Err(Error::InvalidInput(
                "noiseless channels mixed with noisy ones leave H singular".into(),
            ));
        }
        for (&p, w) in plant.unstable_poles().iter().zip(&pole_directions) {
            let hp = h.eval(p)?;
            let hinv_w = DVector::from_iterator(m, (0..m).map(|k| w[k] / hp[(k, k)]));
            let prior = partial_product(&network_factors, Side::Right, m, p, &[], false)?;
            let gamma = prior * hinv_w;
            network_factors.push(BlaschkeFactor::new(p, &gamma, Side::Right)?);
        }
    }
    Ok(Analysis { zero_factors, pole_directions, network_factors, h })
}

/// `J1 = 2 sum_i Re(z_i) Psi_r Psi_eta_i cos(upsilon_r, eta_check_i)`.
pub(crate) fn j1_term(zero_factors: &[BlaschkeFactor], constraints: &NetworkConstraints) -> Result<f64> {
    let stats = power_stats(constraints, None)?;
    let Some(vr) = stats.r.direction.as_ref() else {
        return Ok(0.0);
    };
    let vr = vr.map(|x| Complex64::new(x, 0.0));
    let mut j1 = 0.0;
    for f in zero_factors {
        let eta = f.direction();
        let sq = PowerDistribution::of(eta.map(|c| c.norm_sqr()));
        let Some(check) = sq.direction.as_ref() else { continue };
        let cos = cos_angle(&vr, &check.map(|x| Complex64::new(x, 0.0)))?;
        j1 += 2.0 * f.location().re * stats.r.psi * sq.psi * cos;
    }
    Ok(j1)
}

pub fn mimo_limit(plant: &PlantModel, constraints: &NetworkConstraints) -> Result<PerfBreakdown> {
    let a = analyze(plant, constraints)?;
    let m = plant.outputs();
    let j1 = j1_term(&a.zero_factors, constraints)?;
    let poles = plant.unstable_poles();
    let n = poles.len();
    if a.network_factors.is_empty() {
        return Ok(PerfBreakdown::new(j1, CMatrix::zeros(n, n), None, constraints.is_noiseless()));
    }

    let mut fh = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for (i, &p) in poles.iter().enumerate() {
        let l_inv = partial_product(&a.zero_factors, Side::Left, m, p, &[], true)?;
        let f_net = network_factor(constraints, &a.h, p)?;
        let gamma = a.network_factors[i].direction();
        let before: Vec<usize> = (i..n).collect();
        let after: Vec<usize> = (0..=i).collect();
        let p_i = partial_product(&a.network_factors, Side::Right, m, p, &before, true)?;
        let q_i = partial_product(&a.network_factors, Side::Right, m, p, &after, true)?;
        fh.push(l_inv * f_net * (p_i * gamma));
        g.push(q_i.adjoint() * gamma);
    }
    let terms = CMatrix::from_fn(n, n, |i, j| {
        pole_kernel(poles[i], poles[j]) * fh[i].dotc(&fh[j]) * g[j].dotc(&g[i])
    });
    Ok(PerfBreakdown::new(j1, terms, None, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::RationalFn;
    use crate::network::ChannelSpec;

    fn lag(a: f64) -> RationalFn {
        RationalFn::from_coeffs(&[1.0], &[a, 1.0]).unwrap()
    }

    #[test]
    fn diagonal_unit_noise() {
        let g = TransferMatrix::diag(vec![lag(-1.0), lag(2.0)]);
        let pm = PlantModel::from_tf(g).unwrap();
        let nc = NetworkConstraints::new(vec![ChannelSpec::ideal(1.0), ChannelSpec::ideal(1.0)], vec![0.0, 0.0]).unwrap();
        let r = mimo_limit(&pm, &nc).unwrap();
        assert_eq!(r.j1, 0.0);
        assert!((r.j2 - 2.0).abs() < 1e-12);

        let nc = NetworkConstraints::new(vec![ChannelSpec::ideal(2.0), ChannelSpec::ideal(1.0)], vec![0.0, 0.0]).unwrap();
        let r = mimo_limit(&pm, &nc).unwrap();
        assert!((r.j2 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_reference_zeroes_j1() {
        let nmp = RationalFn::from_coeffs(&[-1.0, 1.0], &[1.0, 1.0]).unwrap();
        let g = TransferMatrix::diag(vec![nmp, lag(1.0)]);
        let pm = PlantModel::from_tf(g).unwrap();
        let nc = NetworkConstraints::new(vec![ChannelSpec::ideal(0.0), ChannelSpec::ideal(0.0)], vec![0.0, 1.0]).unwrap();
        let r = mimo_limit(&pm, &nc).unwrap();
        assert_eq!(r.total, 0.0);
    }
}
