//! Closed-form tracking-performance limits.

mod corollary;
mod mimo;
mod siso;

pub use corollary::{corollary_reduce, CorollaryCase};
pub use mimo::{analyze, mimo_limit, Analysis};
pub use siso::siso_limit;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{CMatrix, PlantModel};
use crate::network::{bandwidth_factorize, NetworkConstraints};

/// Pole/zero distance under which the limit is reported as divergent.
pub const DIVERGENCE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PerfBreakdown {
    pub j1: f64,
    pub j2: f64,
    pub total: f64,
    /// Pole-pair terms whose real sum is `j2`.
    pub terms: CMatrix,
    /// `(W_sys, W_net)` for scalar plants.
    pub siso_w: Option<(CMatrix, CMatrix)>,
    /// Every channel is noiseless, so `j2` is exactly zero.
    pub noiseless: bool,
}

impl PerfBreakdown {
    fn new(j1: f64, terms: CMatrix, siso_w: Option<(CMatrix, CMatrix)>, noiseless: bool) -> Self {
        // `+ 0.0` turns the `-0.0` of an empty sum into `0.0`.
        let (j1, j2) = (j1 + 0.0, sum_terms(&terms) + 0.0);
        PerfBreakdown { j1, j2, total: j1 + j2, terms, siso_w, noiseless }
    }

    /// Imaginary part left over in the term sum.
    pub fn imaginary_residue(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.terms.iter() {
            acc += v;
        }
        acc.im
    }
}

/// Fixed row-major summation order.
fn sum_terms(terms: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..terms.nrows() {
        for j in 0..terms.ncols() {
            acc += terms[(i, j)].re;
        }
    }
    acc
}

/// Fails when an unstable pole meets a plant NMP zero or a channel NMP zero.
pub fn check_divergence(plant: &PlantModel, constraints: &NetworkConstraints) -> Result<()> {
    let mut channel_zeros = Vec::new();
    for ch in &constraints.channels {
        channel_zeros.extend(bandwidth_factorize(&ch.filter)?.nmp_zeros);
    }
    for &p in plant.unstable_poles() {
        for &z in plant.nmp_zeros() {
            if (p - z).norm() < DIVERGENCE_TOL {
                return Err(Error::Divergence { what: "unstable pole meets NMP zero".into(), a: p, b: z });
            }
        }
        for &s in &channel_zeros {
            if (p - s).norm() < DIVERGENCE_TOL {
                return Err(Error::Divergence { what: "unstable pole meets bandwidth NMP zero".into(), a: p, b: s });
            }
        }
    }
    Ok(())
}

/// `4 Re(p_i) Re(p_j) / (conj(p_i) + p_j)`.
fn pole_kernel(pi: Complex64, pj: Complex64) -> Complex64 {
    4.0 * pi.re * pj.re / (pi.conj() + pj)
}
