//! Rank-one Blaschke factor extraction.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::response::Response;
use crate::lti::{CMatrix, FrequencyResponse, RationalFn, TransferMatrix};

/// Locations closer than this are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-6;
/// Relative smallest singular value below which a matrix counts as rank deficient.
pub const RANK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `I - (2 Re p / (s + conj p)) g g^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeFactor {
    location: Complex64,
    direction: DVector<Complex64>,
    side: Side,
}

/// Unit vector with the first nonzero component real and positive.
pub fn normalize_direction(v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidInput("direction must be a nonzero finite vector".into()));
    }
    let u = v.unscale(n);
    let lead = u.iter().find(|c| c.norm() > 1e-12).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let mut out = u.map(|c| c * phase);
    for c in out.iter_mut() {
        if c.norm() <= 1e-12 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let first = out.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    out[first] = Complex64::new(out[first].norm(), 0.0);
    Ok(out)
}

impl BlaschkeFactor {
    pub fn new(location: Complex64, direction: &DVector<Complex64>, side: Side) -> Result<Self> {
        if !(location.re > 0.0) {
            return Err(Error::InvalidInput(format!("Blaschke location {location} is not in the open RHP")));
        }
        Ok(BlaschkeFactor { location, direction: normalize_direction(direction)?, side })
    }

    pub fn location(&self) -> Complex64 {
        self.location
    }

    pub fn direction(&self) -> &DVector<Complex64> {
        &self.direction
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn projector(&self) -> CMatrix {
        &self.direction * self.direction.adjoint()
    }

    pub fn eval(&self, s: Complex64) -> CMatrix {
        let m = self.direction.len();
        let c = 2.0 * self.location.re / (s + self.location.conj());
        CMatrix::identity(m, m) - self.projector() * c
    }

    /// `I + (2 Re p / (s - p)) g g^H`.
    pub fn eval_inverse(&self, s: Complex64) -> Result<CMatrix> {
        let d = s - self.location;
        if d.norm() <= 1e-14 * self.location.norm().max(1.0) {
            return Err(Error::PoleEvaluation { row: 0, col: 0, at: s });
        }
        let m = self.direction.len();
        Ok(CMatrix::identity(m, m) + self.projector() * (2.0 * self.location.re / d))
    }

    fn is_real(&self) -> bool {
        self.location.im == 0.0 && self.direction.iter().all(|c| c.im == 0.0)
    }

    /// Exact rational form, available for a real location and real direction.
    pub fn to_transfer_matrix(&self, inverted: bool) -> Option<TransferMatrix> {
        if !self.is_real() {
            return None;
        }
        let p = self.location.re;
        let m = self.direction.len();
        let c = if inverted {
            RationalFn::from_coeffs(&[2.0 * p], &[-p, 1.0]).ok()?
        } else {
            RationalFn::from_coeffs(&[-2.0 * p], &[p, 1.0]).ok()?
        };
        let entries = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| {
                let g = self.direction[i].re * self.direction[j].re;
                let off = c.scale(g);
                if i == j {
                    &RationalFn::one() + &off
                } else {
                    off
                }
            })
            .collect();
        TransferMatrix::new(m, m, entries).ok()
    }
}

/// Ordered factors plus the minimum-phase remainder.
///
/// Factors are stored in extraction order. A left factorization reconstructs as
/// `F1 F2 ... Fn mp`; a right factorization as `mp Fn ... F1`.
#[derive(Clone, Debug)]
pub struct AllPassFactorization {
    pub factors: Vec<BlaschkeFactor>,
    pub side: Side,
    pub mp_part: Response,
}

/// Product of the non-skipped factors in reconstruction order, or its inverse.
pub fn partial_product(
    factors: &[BlaschkeFactor],
    side: Side,
    dim: usize,
    s: Complex64,
    skip: &[usize],
    inverted: bool,
) -> Result<CMatrix> {
    let m = dim;
    let idx: Vec<usize> = (0..factors.len()).filter(|i| !skip.contains(i)).collect();
    // Reconstruction order as a left-to-right sequence.
    let order: Vec<usize> = match side {
        Side::Left => idx,
        Side::Right => idx.into_iter().rev().collect(),
    };
    let mut acc = CMatrix::identity(m, m);
    if inverted {
        for &i in order.iter().rev() {
            acc *= factors[i].eval_inverse(s)?;
        }
    } else {
        for &i in &order {
            acc *= factors[i].eval(s);
        }
    }
    Ok(acc)
}

pub fn partial_eval(f: &AllPassFactorization, s: Complex64, skip: &[usize], inverted: bool) -> Result<CMatrix> {
    let (r, c) = f.mp_part.dims();
    let m = if f.side == Side::Left { r } else { c };
    partial_product(&f.factors, f.side, m, s, skip, inverted)
}

fn check_distinct(locations: &[Complex64]) -> Result<()> {
    for (i, a) in locations.iter().enumerate() {
        if !(a.re > 0.0) {
            return Err(Error::InvalidInput(format!("location {a} is not in the open RHP")));
        }
        for b in &locations[i + 1..] {
            if (a - b).norm() < COINCIDENCE_TOL {
                return Err(Error::IllConditioned { a: *a, b: *b });
            }
        }
    }
    Ok(())
}

/// Sequential extraction on any pointwise-evaluable matrix function.
pub fn extract_factors(
    t: &dyn FrequencyResponse,
    locations: &[Complex64],
    side: Side,
) -> Result<Vec<BlaschkeFactor>> {
    check_distinct(locations)?;
    let (rows, cols) = t.dims();
    if side == Side::Right && rows != cols {
        return Err(Error::InvalidInput("right factorization needs a square matrix".into()));
    }
    let mut factors: Vec<BlaschkeFactor> = Vec::with_capacity(locations.len());
    for &loc in locations {
        let tv = t.eval(loc)?;
        let peeled = match side {
            Side::Left => partial_product(&factors, side, rows, loc, &[], true)? * tv,
            Side::Right => tv * partial_product(&factors, side, cols, loc, &[], true)?,
        };
        // A rank drop is judged against the size of the function just off `loc`, so 1x1 cases work too.
        let radius = 1e-2 * (1.0 + loc.norm());
        let mut scale = peeled.norm().max(f64::MIN_POSITIVE);
        for k in 0..4 {
            let s = loc + Complex64::from_polar(radius, 0.4 + k as f64 * std::f64::consts::FRAC_PI_2);
            let near = t.eval(s).and_then(|tv| match side {
                Side::Left => Ok(partial_product(&factors, side, rows, s, &[], true)? * tv),
                Side::Right => Ok(tv * partial_product(&factors, side, cols, s, &[], true)?),
            });
            if let Ok(v) = near {
                scale = scale.max(v.norm());
            }
        }
        let svd = peeled.clone().svd(side == Side::Left, side == Side::Right);
        let (k, smin) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| (k, *v))
            .expect("nonempty matrix");
        let ratio = smin / scale;
        if ratio >= RANK_TOL {
            return Err(Error::NotAZero { at: loc, ratio });
        }
        let dir: DVector<Complex64> = match side {
            Side::Left => svd.u.expect("requested U").column(k).into_owned(),
            Side::Right => svd.v_t.expect("requested V^T").row(k).adjoint(),
        };
        factors.push(BlaschkeFactor::new(loc, &dir, side)?);
    }
    Ok(factors)
}

fn remainder(t: &TransferMatrix, factors: &[BlaschkeFactor], side: Side) -> Response {
    if let Some(exact) = exact_remainder(t, factors, side) {
        return Response::Exact(exact);
    }
    let t = t.clone();
    let fs: Arc<Vec<BlaschkeFactor>> = Arc::new(factors.to_vec());
    Response::pointwise(t.rows(), t.cols(), move |s| {
        let tv = t.eval(s)?;
        let (r, c) = tv.shape();
        Ok(match side {
            Side::Left => partial_product(&fs, side, r, s, &[], true)? * tv,
            Side::Right => tv * partial_product(&fs, side, c, s, &[], true)?,
        })
    })
}

fn exact_remainder(t: &TransferMatrix, factors: &[BlaschkeFactor], side: Side) -> Option<TransferMatrix> {
    let mut acc = t.clone();
    for f in factors {
        let inv = f.to_transfer_matrix(true)?;
        acc = match side {
            Side::Left => inv.product(&acc).ok()?,
            Side::Right => acc.product(&inv).ok()?,
        };
    }
    // A missed cancellation would leave an RHP pole behind.
    let stable = acc.is_stable().ok()?;
    stable.then_some(acc)
}

/// Extracts one rank-one Blaschke factor per location, in the given order.
pub fn allpass_factorize(t: &TransferMatrix, locations: &[Complex64], side: Side) -> Result<AllPassFactorization> {
    let factors = extract_factors(t, locations, side)?;
    let mp_part = remainder(t, &factors, side);
    Ok(AllPassFactorization { factors, side, mp_part })
}

/// Right factorization of `M~_F H` at the unstable poles.
pub fn network_factorize(
    m_tilde_f: &TransferMatrix,
    h: &TransferMatrix,
    poles: &[Complex64],
) -> Result<AllPassFactorization> {
    if !h.is_diagonal() {
        return Err(Error::InvalidInput("network transfer H must be diagonal".into()));
    }
    if !h.is_stable()? {
        return Err(Error::InvalidInput("network transfer H must be stable".into()));
    }
    for i in 0..h.rows() {
        if h.get(i, i).zeros()?.iter().any(|z| z.re >= 0.0) {
            return Err(Error::InvalidInput("network transfer H must be minimum phase".into()));
        }
    }
    let t = m_tilde_f.product(h)?;
    allpass_factorize(&t, poles, Side::Right)
}

/// Stable part and unstable residue terms of `X B^-1` (side `Right`) or `B^-1 X` (side `Left`).
#[derive(Clone, Debug)]
pub struct Lemma1Expansion {
    pub stable_part: Response,
    /// `(p_i, C_i)`: the unstable term is `C_i / (s - p_i)`.
    pub residue_terms: Vec<(Complex64, CMatrix)>,
}

pub fn lemma1_expand(x: &TransferMatrix, f: &AllPassFactorization, side: Side) -> Result<Lemma1Expansion> {
    if !x.is_proper() || !x.is_stable()? {
        return Err(Error::InvalidInput("lemma1_expand needs a stable proper X".into()));
    }
    let factors = &f.factors;
    for (i, a) in factors.iter().enumerate() {
        for b in &factors[i + 1..] {
            if (a.location - b.location).norm() < COINCIDENCE_TOL {
                return Err(Error::UnsupportedMultiplicity { at: a.location, what: "repeated factor location".into() });
            }
        }
    }
    let n = factors.len();
    // Inverse product as a left-to-right index sequence.
    let inv_order: Vec<usize> = match f.side {
        Side::Left => (0..n).rev().collect(),
        Side::Right => (0..n).collect(),
    };
    let mut residue_terms = Vec::with_capacity(n);
    for (pos, &i) in inv_order.iter().enumerate() {
        let fi = &factors[i];
        let p = fi.location;
        let mut before = CMatrix::identity(fi.direction.len(), fi.direction.len());
        for &k in &inv_order[..pos] {
            before *= factors[k].eval_inverse(p)?;
        }
        let mut after = CMatrix::identity(fi.direction.len(), fi.direction.len());
        for &k in &inv_order[pos + 1..] {
            after *= factors[k].eval_inverse(p)?;
        }
        let core = before * fi.projector() * Complex64::new(2.0 * p.re, 0.0) * after;
        let xv = x.eval(p)?;
        let coeff = match side {
            Side::Right => xv * core,
            Side::Left => core * xv,
        };
        residue_terms.push((p, coeff));
    }

    let exact = exact_stable_part(x, f, side, &residue_terms);
    let stable_part = match exact {
        Some(t) => Response::Exact(t),
        None => {
            let x = x.clone();
            let f = f.clone();
            let terms = residue_terms.clone();
            let (r, c) = (x.rows(), x.cols());
            Response::pointwise(r, c, move |s| {
                let b_inv = partial_eval(&f, s, &[], true)?;
                let xv = x.eval(s)?;
                let mut v = match side {
                    Side::Right => xv * b_inv,
                    Side::Left => b_inv * xv,
                };
                for (p, cm) in &terms {
                    v -= cm / (s - p);
                }
                Ok(v)
            })
        }
    };
    Ok(Lemma1Expansion { stable_part, residue_terms })
}

fn exact_stable_part(
    x: &TransferMatrix,
    f: &AllPassFactorization,
    side: Side,
    terms: &[(Complex64, CMatrix)],
) -> Option<TransferMatrix> {
    if terms.iter().any(|(p, c)| p.im != 0.0 || c.iter().any(|v| v.im.abs() > 1e-14 * c.norm().max(1.0))) {
        return None;
    }
    let mut prod = x.clone();
    let order: Vec<usize> = match f.side {
        Side::Left => (0..f.factors.len()).rev().collect(),
        Side::Right => (0..f.factors.len()).collect(),
    };
    let mut b_inv: Option<TransferMatrix> = None;
    for &i in &order {
        let t = f.factors[i].to_transfer_matrix(true)?;
        b_inv = Some(match b_inv {
            None => t,
            Some(acc) => acc.product(&t).ok()?,
        });
    }
    if let Some(b) = b_inv {
        prod = match side {
            Side::Right => prod.product(&b).ok()?,
            Side::Left => b.product(&prod).ok()?,
        };
    }
    for (p, c) in terms {
        let pole = RationalFn::from_coeffs(&[1.0], &[-p.re, 1.0]).ok()?;
        let entries = c.iter().map(|v| pole.scale(v.re)).collect::<Vec<_>>();
        // nalgebra stores column-major; rebuild row-major.
        let (r, cc) = c.shape();
        let row_major = (0..r).flat_map(|i| (0..cc).map(move |j| j * r + i)).map(|k| entries[k].clone()).collect();
        let term = TransferMatrix::new(r, cc, row_major).ok()?;
        prod = prod.sum(&term.map(|e| -e)).ok()?;
    }
    prod.is_stable().ok()?.then_some(prod)
}
