use nalgebra::DVector;
use num_complex::Complex64;

use super::matrix::{CMatrix, TransferMatrix};
use super::rational::CANCEL_TOL;
use crate::error::{Error, Result};

/// Real parts within this distance of zero count as on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-9;

/// Plant with its open-RHP poles and transmission zeros.
#[derive(Clone, Debug)]
pub struct PlantModel {
    g: TransferMatrix,
    unstable_poles: Vec<Complex64>,
    nmp_zeros: Vec<Complex64>,
}

impl PlantModel {
    /// Plant with explicitly supplied pole and zero lists (kept in the given order).
    pub fn new(g: TransferMatrix, unstable_poles: Vec<Complex64>, nmp_zeros: Vec<Complex64>) -> Result<Self> {
        if !g.is_proper() {
            return Err(Error::InvalidInput("plant entries must be proper".into()));
        }
        if g.rows() > g.cols() {
            return Err(Error::InvalidInput(format!(
                "plant with {} outputs and {} inputs is not right-invertible",
                g.rows(),
                g.cols()
            )));
        }
        check_locations(&unstable_poles, "pole")?;
        check_locations(&nmp_zeros, "zero")?;
        Ok(PlantModel { g, unstable_poles, nmp_zeros })
    }

    /// Plant whose poles and zeros are found by [`classify_pz`].
    pub fn from_tf(g: TransferMatrix) -> Result<Self> {
        let (poles, zeros) = classify_pz(&g)?;
        Self::new(g, poles, zeros)
    }

    pub fn g(&self) -> &TransferMatrix {
        &self.g
    }

    pub fn outputs(&self) -> usize {
        self.g.rows()
    }

    pub fn is_siso(&self) -> bool {
        self.g.rows() == 1 && self.g.cols() == 1
    }

    pub fn unstable_poles(&self) -> &[Complex64] {
        &self.unstable_poles
    }

    pub fn nmp_zeros(&self) -> &[Complex64] {
        &self.nmp_zeros
    }
}

fn check_locations(locs: &[Complex64], what: &str) -> Result<()> {
    for (i, a) in locs.iter().enumerate() {
        if !(a.re > AXIS_TOL) || !a.im.is_finite() {
            return Err(Error::InvalidInput(format!("{what} {a} is not in the open right half-plane")));
        }
        for b in &locs[i + 1..] {
            if (a - b).norm() < CANCEL_TOL * a.norm().max(1.0) {
                return Err(Error::UnsupportedMultiplicity { at: *a, what: format!("repeated {what}") });
            }
        }
        if a.im != 0.0 && !locs.iter().any(|b| (b - a.conj()).norm() < CANCEL_TOL * a.norm().max(1.0)) {
            return Err(Error::InvalidInput(format!("complex {what} {a} listed without its conjugate")));
        }
    }
    Ok(())
}

/// Sorts by ascending real part, ties by ascending imaginary part.
pub fn sort_locations(locs: &mut [Complex64]) {
    locs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn push_distinct(set: &mut Vec<Complex64>, r: Complex64) -> bool {
    if set.iter().any(|q| (q - r).norm() <= CANCEL_TOL * r.norm().max(1.0)) {
        false
    } else {
        set.push(r);
        true
    }
}

/// Open-RHP poles and transmission zeros of a proper plant.
///
/// Zeros of a square plant are the RHP roots of the reduced numerator of `det g`.
pub fn classify_pz(g: &TransferMatrix) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !g.is_proper() {
        return Err(Error::InvalidInput("classify_pz needs a proper matrix".into()));
    }
    if !g.is_square() {
        return Err(Error::InvalidInput(
            "zeros of non-square plants must be supplied explicitly".into(),
        ));
    }

    let mut poles = Vec::new();
    for e in g.entries() {
        let roots = e.poles()?;
        for (k, r) in roots.iter().enumerate() {
            if r.re.abs() <= AXIS_TOL {
                return Err(Error::InvalidInput(format!("pole {r} on the imaginary axis is not supported")));
            }
            if r.re <= 0.0 {
                continue;
            }
            let tol = CANCEL_TOL * r.norm().max(1.0);
            if roots[k + 1..].iter().any(|q| (q - r).norm() <= tol) {
                return Err(Error::UnsupportedMultiplicity { at: *r, what: "repeated unstable pole in an entry".into() });
            }
            push_distinct(&mut poles, *r);
        }
    }
    if g.rows() > 1 {
        for p in &poles {
            let res = g.residue(*p)?;
            let sv = res.singular_values();
            if sv.len() > 1 && sv[1] > 1e-6 * sv[0] {
                return Err(Error::UnsupportedMultiplicity {
                    at: *p,
                    what: "unstable pole with residue rank above one".into(),
                });
            }
        }
    }

    let det = g.det()?;
    if det.is_zero() {
        return Err(Error::Singular("plant determinant is identically zero".into()));
    }
    let mut zeros = Vec::new();
    let roots = det.zeros()?;
    for (k, r) in roots.iter().enumerate() {
        if r.re.abs() <= AXIS_TOL {
            return Err(Error::InvalidInput(format!("zero {r} on the imaginary axis is not supported")));
        }
        if r.re <= 0.0 {
            continue;
        }
        let tol = CANCEL_TOL * r.norm().max(1.0);
        if roots[k + 1..].iter().any(|q| (q - r).norm() <= tol) {
            return Err(Error::UnsupportedMultiplicity { at: *r, what: "repeated NMP zero".into() });
        }
        zeros.push(*r);
    }
    sort_locations(&mut poles);
    sort_locations(&mut zeros);
    Ok((poles, zeros))
}

/// Unit vector spanning the range of the residue of `t` at a simple pole `p`.
pub fn pole_output_direction(t: &TransferMatrix, p: Complex64) -> Result<DVector<Complex64>> {
    let res = t.residue(p)?;
    dominant_left_vector(&res).ok_or_else(|| Error::InvalidInput(format!("{p} is not a pole of the matrix")))
}

/// Left singular vector of the largest singular value, `None` for the zero matrix.
pub fn dominant_left_vector(m: &CMatrix) -> Option<DVector<Complex64>> {
    let svd = m.clone().svd(true, false);
    let u = svd.u?;
    let (k, smax) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if *smax <= 0.0 {
        return None;
    }
    Some(u.column(k).into_owned())
}
