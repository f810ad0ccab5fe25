//! Channel constraints: quantization, bandwidth, channel noise and encoder gain.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::plant::AXIS_TOL;
use crate::lti::{CMatrix, Polynomial, RationalFn, TransferMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantizer {
    Bits { bits: u32, range: f64 },
    Sigma { sigma_q: f64 },
}

impl Quantizer {
    pub fn sigma_q(&self) -> Result<f64> {
        match *self {
            Quantizer::Bits { bits, range } => quantizer_sigma(bits, range),
            Quantizer::Sigma { sigma_q } => Ok(sigma_q),
        }
    }
}

/// Uniform-quantizer noise standard deviation `Delta / sqrt(12)`, `Delta = 2 M / (2^b - 1)`.
pub fn quantizer_sigma(bits: u32, range: f64) -> Result<f64> {
    if bits == 0 {
        return Err(Error::InvalidInput("quantizer needs at least one bit".into()));
    }
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::InvalidInput("quantizer range must be positive".into()));
    }
    let levels = 2f64.powi(bits as i32) - 1.0;
    Ok(2.0 * range / levels / 12f64.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub sigma_n: f64,
    pub quantizer: Option<Quantizer>,
    pub lambda: f64,
    pub filter: RationalFn,
}

impl ChannelSpec {
    pub fn new(sigma_n: f64, quantizer: Option<Quantizer>, lambda: f64, filter: RationalFn) -> Result<Self> {
        if !(sigma_n >= 0.0) || !sigma_n.is_finite() {
            return Err(Error::InvalidInput(format!("sigma_n = {sigma_n} must be nonnegative")));
        }
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda = {lambda} must be at least 1")));
        }
        if let Some(q) = quantizer {
            let s = q.sigma_q()?;
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::InvalidInput(format!("sigma_q = {s} must be nonnegative")));
            }
        }
        if filter.is_zero() || !filter.is_proper() {
            return Err(Error::InvalidInput("channel filter must be nonzero and proper".into()));
        }
        if !filter.is_stable()? {
            return Err(Error::InvalidInput("channel filter must be stable".into()));
        }
        Ok(ChannelSpec { sigma_n, quantizer, lambda, filter })
    }

    /// Noise-only channel with unit filter and unit encoder gain.
    pub fn ideal(sigma_n: f64) -> Self {
        ChannelSpec { sigma_n, quantizer: None, lambda: 1.0, filter: RationalFn::one() }
    }

    pub fn sigma_q(&self) -> f64 {
        self.quantizer.map_or(0.0, |q| q.sigma_q().unwrap_or(0.0))
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma_n == 0.0 && self.sigma_q() == 0.0
    }
}

/// First-order Butterworth low-pass `wc / (s + wc)`.
pub fn butter1(cutoff_rad_s: f64) -> Result<RationalFn> {
    if !(cutoff_rad_s > 0.0) || !cutoff_rad_s.is_finite() {
        return Err(Error::InvalidInput("cutoff must be positive".into()));
    }
    RationalFn::from_coeffs(&[cutoff_rad_s], &[cutoff_rad_s, 1.0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConstraints {
    pub channels: Vec<ChannelSpec>,
    pub sigma_r: Vec<f64>,
}

impl NetworkConstraints {
    pub fn new(channels: Vec<ChannelSpec>, sigma_r: Vec<f64>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidInput("at least one channel is required".into()));
        }
        if sigma_r.len() != channels.len() {
            return Err(Error::InvalidInput(format!(
                "sigma_r has {} entries for {} channels",
                sigma_r.len(),
                channels.len()
            )));
        }
        if let Some(s) = sigma_r.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma_r = {s} must be nonnegative")));
        }
        Ok(NetworkConstraints { channels, sigma_r })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// `F = diag(f_i)`.
    pub fn filter_matrix(&self) -> TransferMatrix {
        TransferMatrix::diag(self.channels.iter().map(|c| c.filter.clone()).collect())
    }

    pub fn is_noiseless(&self) -> bool {
        self.channels.iter().all(ChannelSpec::is_noiseless)
    }
}

/// `f = L_f f_m` with `L_f` all-pass and `f_m` minimum phase.
#[derive(Clone, Debug, PartialEq)]
pub struct BandwidthFactors {
    pub nmp_zeros: Vec<Complex64>,
    pub l_f: RationalFn,
    pub f_m: RationalFn,
}

pub fn bandwidth_factorize(f: &RationalFn) -> Result<BandwidthFactors> {
    if !f.is_proper() || !f.is_stable()? {
        return Err(Error::InvalidInput("bandwidth filter must be stable and proper".into()));
    }
    let nmp_zeros: Vec<Complex64> = f.zeros()?.into_iter().filter(|z| z.re > AXIS_TOL).collect();
    if nmp_zeros.is_empty() {
        return Ok(BandwidthFactors { nmp_zeros, l_f: RationalFn::one(), f_m: f.clone() });
    }
    let mirrored: Vec<Complex64> = nmp_zeros.iter().map(|z| -z.conj()).collect();
    let l_f = RationalFn::new(Polynomial::from_roots(&nmp_zeros), Polynomial::from_roots(&mirrored))?;
    let f_m = (f / &l_f)?;
    Ok(BandwidthFactors { nmp_zeros, l_f, f_m })
}

/// Stable minimum-phase `h` with `|h(jw)|^2 = (sigma_n^2 + |f(jw)|^2 sigma_q^2) / lambda^2`.
///
/// A noiseless channel gives `h = 0`.
pub fn spectral_factor(channel: &ChannelSpec) -> Result<RationalFn> {
    let sn = channel.sigma_n;
    let sq = channel.sigma_q();
    let lam = channel.lambda;
    if sn == 0.0 && sq == 0.0 {
        return Ok(RationalFn::zero());
    }
    if sq == 0.0 {
        return Ok(RationalFn::constant(sn / lam));
    }
    if sn == 0.0 {
        let bw = bandwidth_factorize(&channel.filter)?;
        if bw.f_m.zeros()?.iter().any(|z| z.re.abs() <= AXIS_TOL) {
            return Err(Error::DegenerateSpectrum("filter has zeros on the imaginary axis".into()));
        }
        return Ok(bw.f_m.scale(sq / lam));
    }
    let n = channel.filter.num();
    let d = channel.filter.den();
    let dd = (d * &d.reflect()).scale(sn * sn);
    let nn = (n * &n.reflect()).scale(sq * sq);
    let even = &dd + &nn;
    let roots = even.roots()?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    if roots.iter().any(|r| r.re.abs() <= 1e-9 * scale) {
        return Err(Error::DegenerateSpectrum("noise spectrum vanishes on the imaginary axis".into()));
    }
    let lhp: Vec<Complex64> = roots.into_iter().filter(|r| r.re < 0.0).collect();
    let q = Polynomial::from_roots(&lhp);
    let k = q.degree();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let kappa2 = even.leading() * sign;
    if !(kappa2 > 0.0) {
        return Err(Error::DegenerateSpectrum("spectrum is not positive".into()));
    }
    // Weak quantization puts a root of `q` next to a filter pole; cancelling it would drop `sigma_q`.
    RationalFn::new_unreduced(q.scale(kappa2.sqrt() / lam), d.clone())
}

/// `H = diag(h_i)`.
pub fn network_h(constraints: &NetworkConstraints) -> Result<TransferMatrix> {
    let hs = constraints.channels.iter().map(spectral_factor).collect::<Result<Vec<_>>>()?;
    Ok(TransferMatrix::diag(hs))
}

/// `f_net(p) = F(p)^-1 H(p)`.
pub fn network_factor(constraints: &NetworkConstraints, h: &TransferMatrix, p: Complex64) -> Result<CMatrix> {
    let m = constraints.len();
    let mut out = CMatrix::zeros(m, m);
    for (i, ch) in constraints.channels.iter().enumerate() {
        let fv = ch.filter.eval(p)?;
        if fv.norm() <= 1e-14 * ch.filter.num().max_abs_coeff().max(1.0) {
            return Err(Error::PoleEvaluation { row: i, col: i, at: p });
        }
        out[(i, i)] = h.get(i, i).eval(p)? / fv;
    }
    Ok(out)
}

/// Norm and normalized direction of a nonnegative power vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDistribution {
    pub psi: f64,
    pub direction: Option<DVector<f64>>,
}

impl PowerDistribution {
    pub fn of(raw: DVector<f64>) -> Self {
        let psi = raw.norm();
        let direction = (psi > 0.0).then(|| raw.unscale(psi));
        PowerDistribution { psi, direction }
    }

    /// `psi * direction`, the raw vector.
    pub fn raw(&self, len: usize) -> DVector<f64> {
        match &self.direction {
            Some(d) => d.scale(self.psi),
            None => DVector::zeros(len),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerStats {
    pub r: PowerDistribution,
    pub n: PowerDistribution,
    pub q: PowerDistribution,
    pub a: PowerDistribution,
    /// Bandwidth allocation `(|f_i(p)|^-2)`, present when a point was given.
    pub f: Option<PowerDistribution>,
}

pub fn power_stats(constraints: &NetworkConstraints, p: Option<Complex64>) -> Result<PowerStats> {
    let ch = &constraints.channels;
    let m = ch.len();
    if m == 0 {
        return Err(Error::InvalidInput("power statistics need at least one channel".into()));
    }
    let sq = |v: f64| v * v;
    let r = PowerDistribution::of(DVector::from_iterator(m, constraints.sigma_r.iter().map(|s| sq(*s))));
    let n = PowerDistribution::of(DVector::from_iterator(m, ch.iter().map(|c| sq(c.sigma_n))));
    let q = PowerDistribution::of(DVector::from_iterator(m, ch.iter().map(|c| sq(c.sigma_q()))));
    let a = PowerDistribution::of(DVector::from_iterator(m, ch.iter().map(|c| 1.0 / sq(c.lambda))));
    let f = match p {
        None => None,
        Some(p) => {
            let vals = ch
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let v = c.filter.eval(p)?.norm_sqr();
                    if v == 0.0 {
                        Err(Error::PoleEvaluation { row: i, col: i, at: p })
                    } else {
                        Ok(1.0 / v)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Some(PowerDistribution::of(DVector::from_vec(vals)))
        }
    };
    Ok(PowerStats { r, n, q, a, f })
}

/// `|a^H b| / (|a| |b|)`.
pub fn cos_angle(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("cos_angle needs equal-length vectors".into()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidInput("cos_angle of a zero vector".into()));
    }
    Ok((a.dotc(b).norm() / (na * nb)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quantizer_examples() {
        let s9 = quantizer_sigma(9, 1.0).unwrap();
        assert!((s9 - 2.0 / 511.0 / 12f64.sqrt()).abs() < 1e-18);
        assert!((s9 - 1.1298e-3).abs() < 1e-7);
        assert!((quantizer_sigma(1, 1.0).unwrap() - 0.57735).abs() < 1e-5);
        assert!(quantizer_sigma(0, 1.0).is_err());
    }

    #[test]
    fn bandwidth_of_butterworth_is_trivial() {
        let f = butter1(2.0).unwrap();
        let bw = bandwidth_factorize(&f).unwrap();
        assert!(bw.nmp_zeros.is_empty());
        assert_eq!(bw.l_f, RationalFn::one());
        assert_eq!(bw.f_m, f);
    }

    #[test]
    fn bandwidth_nmp_zero() {
        let f = RationalFn::from_coeffs(&[1.0, -1.0], &[2.0, 3.0, 1.0]).unwrap();
        let bw = bandwidth_factorize(&f).unwrap();
        assert_eq!(bw.nmp_zeros.len(), 1);
        assert!((bw.nmp_zeros[0] - c(1.0, 0.0)).norm() < 1e-12);
        for w in [0.0, 1.0, 10.0] {
            let s = c(0.0, w);
            assert!((f.eval(s).unwrap().norm() - bw.f_m.eval(s).unwrap().norm()).abs() < 1e-12);
            assert!((bw.l_f.eval(s).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_factor_example() {
        let ch = ChannelSpec::new(1.0, Some(Quantizer::Sigma { sigma_q: 1.0 }), 1.0, butter1(1.0).unwrap()).unwrap();
        let h = spectral_factor(&ch).unwrap();
        let expect = RationalFn::from_coeffs(&[2f64.sqrt(), 1.0], &[1.0, 1.0]).unwrap();
        for w in [0.0, 1.0, 2.0] {
            let s = c(0.0, w);
            assert!((h.eval(s).unwrap() - expect.eval(s).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn network_factor_example() {
        let ch = ChannelSpec::new(1.0, Some(Quantizer::Sigma { sigma_q: 1.0 }), 1.0, butter1(1.0).unwrap()).unwrap();
        let nc = NetworkConstraints::new(vec![ch], vec![0.0]).unwrap();
        let h = network_h(&nc).unwrap();
        let v = network_factor(&nc, &h, c(1.0, 0.0)).unwrap();
        assert!((v[(0, 0)] - c(1.0 + 2f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn power_stats_examples() {
        let nc = NetworkConstraints::new(
            vec![ChannelSpec::ideal(0.0), ChannelSpec { lambda: 2.0, ..ChannelSpec::ideal(0.0) }],
            vec![1.0, 1.0],
        )
        .unwrap();
        let st = power_stats(&nc, None).unwrap();
        assert!((st.r.psi - 2f64.sqrt()).abs() < 1e-15);
        assert!((st.a.psi - 17f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(st.n.psi, 0.0);
        assert!(st.n.direction.is_none());
    }

    #[test]
    fn cos_angle_examples() {
        let e1 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e2 = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(cos_angle(&e1, &e2).unwrap(), 0.0);
        let v = DVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1)]);
        assert!((cos_angle(&v, &v.scale(3.0)).unwrap() - 1.0).abs() < 1e-15);
        let d = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).unscale(2f64.sqrt());
        assert!((cos_angle(&d, &e1).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
