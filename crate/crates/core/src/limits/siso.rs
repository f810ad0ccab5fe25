use num_complex::Complex64;

use super::{check_divergence, pole_kernel, PerfBreakdown};
use crate::error::{Error, Result};
use crate::lti::{CMatrix, PlantModel};
use crate::network::{spectral_factor, ChannelSpec, NetworkConstraints};

/// Scalar limit `J1 + sum_ij W_sys^ij W_net^ij`.
pub fn siso_limit(plant: &PlantModel, channel: &ChannelSpec, sigma_r: f64) -> Result<PerfBreakdown> {
    if !plant.is_siso() {
        return Err(Error::InvalidInput("siso_limit needs a scalar plant".into()));
    }
    let constraints = NetworkConstraints::new(vec![channel.clone()], vec![sigma_r])?;
    check_divergence(plant, &constraints)?;

    let zeros = plant.nmp_zeros();
    let poles = plant.unstable_poles();
    let j1 = 2.0 * sigma_r * sigma_r * zeros.iter().map(|z| z.re).sum::<f64>();

    let n = poles.len();
    let h = spectral_factor(channel)?;
    let noiseless = h.is_zero();

    let pi: Vec<Complex64> = poles
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut v = Complex64::new(1.0, 0.0);
            for z in zeros {
                v *= (p + z.conj()) / (p - z);
            }
            for (k, q) in poles.iter().enumerate() {
                if k != i {
                    v *= (p + q.conj()) / (p - q);
                }
            }
            v
        })
        .collect();
    let phi = poles
        .iter()
        .map(|&p| Ok(h.eval(p)? / channel.filter.eval(p)?))
        .collect::<Result<Vec<Complex64>>>()?;

    let w_sys = CMatrix::from_fn(n, n, |i, j| pole_kernel(poles[i], poles[j]) * pi[i].conj() * pi[j]);
    let w_net = CMatrix::from_fn(n, n, |i, j| phi[i].conj() * phi[j]);
    let terms = w_sys.component_mul(&w_net);
    Ok(PerfBreakdown::new(j1, terms, Some((w_sys, w_net)), noiseless))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{RationalFn, TransferMatrix};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plant(k: f64, p: f64) -> PlantModel {
        let g = RationalFn::from_zpk(&[c(k)], &[c(-1.0), c(p)], 1.0).unwrap();
        PlantModel::from_tf(TransferMatrix::scalar(g)).unwrap()
    }

    #[test]
    fn unstable_first_order_baseline() {
        let g = RationalFn::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap();
        let pm = PlantModel::from_tf(TransferMatrix::scalar(g)).unwrap();
        let r = siso_limit(&pm, &ChannelSpec::ideal(1.0), 1.0).unwrap();
        assert_eq!(r.j1, 0.0);
        assert!((r.j2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn section_six_hand_values() {
        let r = siso_limit(&plant(2.0, 3.0), &ChannelSpec::ideal(0.1), 0.1).unwrap();
        let (w_sys, w_net) = r.siso_w.clone().unwrap();
        assert!((w_sys[(0, 0)].re - 150.0).abs() < 1e-10);
        assert!((w_net[(0, 0)].re - 0.01).abs() < 1e-15);
        assert!((r.j1 - 0.04).abs() < 1e-15);
        assert!((r.j2 - 1.5).abs() < 1e-10);
        assert!((r.total - 1.54).abs() < 1e-10);

        let ch = ChannelSpec { lambda: 2.0, ..ChannelSpec::ideal(0.1) };
        let r2 = siso_limit(&plant(2.0, 3.0), &ch, 0.1).unwrap();
        assert!((r2.j2 - 0.375).abs() < 1e-10);
        assert_eq!(r2.j1, r.j1);
    }

    #[test]
    fn pole_on_zero_diverges() {
        let g = TransferMatrix::scalar(RationalFn::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap());
        let pm = PlantModel::new(g, vec![c(2.0)], vec![c(2.0)]).unwrap();
        let e = siso_limit(&pm, &ChannelSpec::ideal(0.1), 0.1).unwrap_err();
        assert!(e.is_divergence());
    }
}
