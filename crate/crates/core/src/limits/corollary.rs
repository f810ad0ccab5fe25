use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mimo::{analyze, j1_term, Analysis};
use super::{pole_kernel, PerfBreakdown};
use crate::allpass::{partial_product, Side};
use crate::error::{Error, Result};
use crate::lti::{CMatrix, PlantModel};
use crate::network::{bandwidth_factorize, cos_angle, network_factor, power_stats, NetworkConstraints, PowerDistribution};

/// Alignment tolerance for parallel / orthogonal hypotheses.
const ALIGN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryCase {
    Co1Parallel,
    Co1Orthogonal,
    Cor1A,
    Cor1B,
    Cor1C,
    Cor1D,
    Cor1E,
    Cor2A,
    Cor2B,
    Cor2C,
    Cor2D,
}

impl CorollaryCase {
    pub const ALL: [CorollaryCase; 11] = [
        CorollaryCase::Co1Parallel,
        CorollaryCase::Co1Orthogonal,
        CorollaryCase::Cor1A,
        CorollaryCase::Cor1B,
        CorollaryCase::Cor1C,
        CorollaryCase::Cor1D,
        CorollaryCase::Cor1E,
        CorollaryCase::Cor2A,
        CorollaryCase::Cor2B,
        CorollaryCase::Cor2C,
        CorollaryCase::Cor2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorollaryCase::Co1Parallel => "co1_parallel",
            CorollaryCase::Co1Orthogonal => "co1_orthogonal",
            CorollaryCase::Cor1A => "cor1_a",
            CorollaryCase::Cor1B => "cor1_b",
            CorollaryCase::Cor1C => "cor1_c",
            CorollaryCase::Cor1D => "cor1_d",
            CorollaryCase::Cor1E => "cor1_e",
            CorollaryCase::Cor2A => "cor2_a",
            CorollaryCase::Cor2B => "cor2_b",
            CorollaryCase::Cor2C => "cor2_c",
            CorollaryCase::Cor2D => "cor2_d",
        }
    }
}

impl fmt::Display for CorollaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorollaryCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CorollaryCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown corollary case {s:?}")))
    }
}

fn mismatch(case: CorollaryCase, reason: impl Into<String>) -> Error {
    Error::CaseMismatch { case: case.name().into(), reason: reason.into() }
}

fn require(case: CorollaryCase, cond: bool, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(mismatch(case, reason))
    }
}

fn parallel(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Result<bool> {
    Ok(cos_angle(a, b)? > 1.0 - ALIGN_TOL)
}

fn orthogonal(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Result<bool> {
    Ok(cos_angle(a, b)? < ALIGN_TOL)
}

fn real_vec(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}

/// `H(p)^-1 w`.
fn h_inv_times(a: &Analysis, p: Complex64, w: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let hp = a.h.eval(p)?;
    Ok(DVector::from_iterator(w.len(), (0..w.len()).map(|k| w[k] / hp[(k, k)])))
}

/// Evaluates the printed special-case formula after checking its hypotheses.
pub fn corollary_reduce(
    case: CorollaryCase,
    plant: &PlantModel,
    constraints: &NetworkConstraints,
) -> Result<PerfBreakdown> {
    let a = analyze(plant, constraints)?;
    let poles = plant.unstable_poles();
    let zeros = plant.nmp_zeros();
    let chans = &constraints.channels;
    let noisy = !constraints.is_noiseless();
    use CorollaryCase::*;
    match case {
        Co1Parallel | Co1Orthogonal => {
            require(case, zeros.is_empty(), "plant must be minimum phase")?;
            require(case, !poles.is_empty(), "needs at least one unstable pole")?;
            require(case, noisy, "needs a noisy network")?;
            let w = &a.pole_directions;
            for (i, &p) in poles.iter().enumerate() {
                require(case, parallel(&h_inv_times(&a, p, &w[i])?, &w[i])?, "H(p)^-1 must preserve the pole direction")?;
                for k in 0..i {
                    let ok = if case == Co1Parallel { parallel(&w[i], &w[k])? } else { orthogonal(&w[i], &w[k])? };
                    require(
                        case,
                        ok,
                        if case == Co1Parallel { "pole directions are not parallel" } else { "pole directions are not orthogonal" },
                    )?;
                }
            }
            co1(case, &a, poles, constraints)
        }
        Cor1A | Cor1B | Cor1C | Cor1D | Cor1E => {
            require(case, zeros.is_empty(), "plant must be minimum phase")?;
            require(case, poles.len() == 1, "needs exactly one unstable pole")?;
            let p = poles[0];
            let w = &a.pole_directions[0];
            let all_q0 = chans.iter().all(|c| c.sigma_q() == 0.0);
            let all_n0 = chans.iter().all(|c| c.sigma_n == 0.0);
            let unit_lambda = chans.iter().all(|c| c.lambda == 1.0);
            let same_bw = chans.iter().all(|c| c.filter == chans[0].filter);
            let stats = power_stats(constraints, Some(p))?;
            let j2 = match case {
                Cor1A | Cor1B => {
                    if case == Cor1A {
                        require(case, all_q0, "quantization must be absent")?;
                        require(case, chans.iter().all(|c| c.sigma_n > 0.0), "every channel needs sigma_n > 0")?;
                    } else {
                        require(case, all_n0, "channel noise must be absent")?;
                        require(case, chans.iter().all(|c| c.sigma_q() > 0.0), "every channel needs sigma_q > 0")?;
                    }
                    let pf = stats.f.clone().expect("point supplied");
                    let w_check = PowerDistribution::of(w.map(|c| c.norm_sqr()));
                    let cos = cos_angle(&real_vec(pf.direction.as_ref().expect("nonzero")), &real_vec(w_check.direction.as_ref().expect("unit")))?;
                    // A V^-1 w (case a) or A Q^-1 F_m(p)^-1 w (case b)
                    let mut denom_vec = DVector::zeros(w.len());
                    for (k, c) in chans.iter().enumerate() {
                        denom_vec[k] = if case == Cor1A {
                            w[k] * c.lambda / c.sigma_n
                        } else {
                            let fm = bandwidth_factorize(&c.filter)?.f_m.eval(p)?;
                            w[k] * c.lambda / (c.sigma_q() * fm)
                        };
                    }
                    2.0 * p.re * pf.psi * w_check.psi * cos / denom_vec.norm_squared()
                }
                Cor1C => {
                    require(case, chans.iter().all(|c| c.filter.num() == c.filter.den()), "bandwidth must be unrestricted (F = I)")?;
                    require(case, chans.iter().all(|c| !c.is_noiseless()), "every channel needs noise")?;
                    let sum_cos2: f64 = (0..w.len())
                        .map(|i| {
                            let e = DVector::from_fn(w.len(), |k, _| Complex64::new(if k == i { 1.0 } else { 0.0 }, 0.0));
                            cos_angle(&e, w).map(|c| c * c)
                        })
                        .sum::<Result<f64>>()?;
                    let hinv: f64 = chans
                        .iter()
                        .enumerate()
                        .map(|(k, c)| w[k].norm_sqr() * c.lambda * c.lambda / (c.sigma_n.powi(2) + c.sigma_q().powi(2)))
                        .sum();
                    2.0 * p.re * sum_cos2 / hinv
                }
                Cor1D | Cor1E => {
                    require(case, unit_lambda, "encoder gains must be one")?;
                    require(case, same_bw, "every channel needs the same bandwidth")?;
                    let bw = bandwidth_factorize(&chans[0].filter)?;
                    let blaschke: f64 = bw.nmp_zeros.iter().map(|s| ((p + s.conj()) / (p - s)).norm_sqr()).product();
                    let gamma = a.network_factors[0].direction();
                    let g_check = PowerDistribution::of(gamma.map(|c| c.norm_sqr()));
                    let gc = real_vec(g_check.direction.as_ref().expect("unit"));
                    if case == Cor1D {
                        require(case, all_q0, "quantization must be absent")?;
                        require(case, chans.iter().all(|c| c.sigma_n > 0.0), "every channel needs sigma_n > 0")?;
                        let fm = bw.f_m.eval(p)?.norm_sqr();
                        let vn = real_vec(stats.n.direction.as_ref().expect("nonzero"));
                        2.0 * p.re / fm * blaschke * stats.n.psi * g_check.psi * cos_angle(&vn, &gc)?
                    } else {
                        require(case, all_n0, "channel noise must be absent")?;
                        require(case, chans.iter().all(|c| c.sigma_q() > 0.0), "every channel needs sigma_q > 0")?;
                        let vq = real_vec(stats.q.direction.as_ref().expect("nonzero"));
                        2.0 * p.re * blaschke * stats.q.psi * g_check.psi * cos_angle(&vq, &gc)?
                    }
                }
                _ => unreachable!(),
            };
            let terms = CMatrix::from_element(1, 1, Complex64::new(j2, 0.0));
            Ok(PerfBreakdown::new(0.0, terms, None, false))
        }
        Cor2A => {
            require(case, poles.is_empty(), "plant must have no unstable poles")?;
            let j1 = j1_term(&a.zero_factors, constraints)?;
            Ok(PerfBreakdown::new(j1, CMatrix::zeros(0, 0), None, constraints.is_noiseless()))
        }
        Cor2B => {
            require(case, poles.len() == 1, "needs exactly one unstable pole")?;
            let j1 = j1_term(&a.zero_factors, constraints)?;
            if !noisy {
                return Ok(PerfBreakdown::new(j1, CMatrix::zeros(1, 1), None, true));
            }
            let p = poles[0];
            let gamma = a.network_factors[0].direction();
            let v = network_factor(constraints, &a.h, p)? * gamma;
            for f in &a.zero_factors {
                require(case, orthogonal(f.direction(), &v)?, "zero directions must be orthogonal to f_net gamma")?;
            }
            let terms = CMatrix::from_element(1, 1, Complex64::new(2.0 * p.re * v.norm_squared(), 0.0));
            Ok(PerfBreakdown::new(j1, terms, None, false))
        }
        Cor2C | Cor2D => {
            if case == Cor2C {
                require(case, zeros.is_empty(), "plant must have no NMP zeros")?;
            } else {
                require(case, zeros.len() == 1, "needs exactly one NMP zero")?;
            }
            let j1 = j1_term(&a.zero_factors, constraints)?;
            let n = poles.len();
            if !noisy || n == 0 {
                return Ok(PerfBreakdown::new(j1, CMatrix::zeros(n, n), None, !noisy));
            }
            let m = plant.outputs();
            let mut fh = Vec::with_capacity(n);
            let mut g = Vec::with_capacity(n);
            let mut zeta = Vec::with_capacity(n);
            for (i, &p) in poles.iter().enumerate() {
                let gamma = a.network_factors[i].direction();
                let b_in = partial_product(&a.network_factors, Side::Right, m, p, &(i..n).collect::<Vec<_>>(), true)?;
                let b_out = partial_product(&a.network_factors, Side::Right, m, p, &(0..=i).collect::<Vec<_>>(), true)?;
                let v = network_factor(constraints, &a.h, p)? * (b_in * gamma);
                if case == Cor2D {
                    let eta = a.zero_factors[0].direction();
                    require(case, m == 1 || parallel(eta, &v)?, "f_net B_I^-1 gamma must be parallel to the zero direction")?;
                    let z = zeros[0];
                    zeta.push((p + z.conj()) / (p - z));
                } else {
                    zeta.push(Complex64::new(1.0, 0.0));
                }
                fh.push(v);
                g.push(b_out.adjoint() * gamma);
            }
            let terms = CMatrix::from_fn(n, n, |i, j| {
                pole_kernel(poles[i], poles[j]) * zeta[i].conj() * zeta[j] * fh[i].dotc(&fh[j]) * g[j].dotc(&g[i])
            });
            Ok(PerfBreakdown::new(j1, terms, None, false))
        }
    }
}

fn co1(case: CorollaryCase, a: &Analysis, poles: &[Complex64], constraints: &NetworkConstraints) -> Result<PerfBreakdown> {
    let n = poles.len();
    let w0 = &a.pole_directions[0];
    let proj = |w: &DVector<Complex64>| w * w.adjoint();
    let m = w0.len();
    let eye = CMatrix::identity(m, m);
    // Inner and outer inverse sub-products at p_i.
    let b_inv = |i: usize, range: std::ops::Range<usize>| -> CMatrix {
        let p = poles[i];
        if case == CorollaryCase::Co1Parallel {
            let prod: Complex64 = range.map(|k| (p + poles[k].conj()) / (p - poles[k])).product();
            &eye + proj(w0) * (prod - 1.0)
        } else {
            let mut acc = eye.clone();
            for k in range {
                acc += proj(&a.pole_directions[k]) * (2.0 * poles[k].re / (p - poles[k]));
            }
            acc
        }
    };
    let mut u = Vec::with_capacity(n);
    let mut fu = Vec::with_capacity(n);
    let mut gu = Vec::with_capacity(n);
    for (i, &p) in poles.iter().enumerate() {
        let ui = h_inv_times(a, p, &a.pole_directions[i])?;
        let fnet = network_factor(constraints, &a.h, p)?;
        fu.push(fnet * (b_inv(i, 0..i) * &ui));
        gu.push(b_inv(i, i + 1..n).adjoint() * &ui);
        u.push(ui);
    }
    let terms = CMatrix::from_fn(n, n, |i, j| {
        if case == CorollaryCase::Co1Orthogonal && i != j {
            return Complex64::new(0.0, 0.0);
        }
        let norm = u[i].norm_squared() * u[j].norm_squared();
        pole_kernel(poles[i], poles[j]) / norm * fu[i].dotc(&fu[j]) * gu[j].dotc(&gu[i])
    });
    Ok(PerfBreakdown::new(0.0, terms, None, false))
}
