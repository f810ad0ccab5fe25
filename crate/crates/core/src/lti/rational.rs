use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Relative distance under which a numerator root cancels a denominator root.
///
/// Looser than [`super::poly::ROOT_TOL`] because repeated roots produced by
/// matrix algebra are only resolved to about the square root of machine precision.
pub const CANCEL_TOL: f64 = 1e-6;

/// Scalar real-rational function `num(s) / den(s)` kept in reduced form with a
/// monic denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFn {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFn {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("rational function with zero denominator".into()));
        }
        let mut r = RationalFn { num, den };
        r.reduce();
        Ok(r)
    }

    /// Keeps near-common roots; for factors whose roots approach each other continuously.
    pub(crate) fn new_unreduced(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("rational function with zero denominator".into()));
        }
        Ok(RationalFn { num, den })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn constant(c: f64) -> Self {
        RationalFn { num: Polynomial::constant(c), den: Polynomial::one() }
    }

    pub fn zero() -> Self {
        RationalFn { num: Polynomial::zero(), den: Polynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFn { num: p, den: Polynomial::one() }
    }

    /// `gain * prod(s - z) / prod(s - p)`.
    pub fn from_zpk(zeros: &[Complex64], poles: &[Complex64], gain: f64) -> Result<Self> {
        Self::new(Polynomial::from_roots(zeros).scale(gain), Polynomial::from_roots(poles))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.is_zero() || self.num.degree() < self.den.degree()
    }

    /// `deg(den) - deg(num)`; negative for improper functions.
    pub fn relative_degree(&self) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        self.den.degree() as i64 - self.num.degree() as i64
    }

    /// Value at infinity of a proper function.
    pub fn at_infinity(&self) -> f64 {
        if self.is_zero() || self.num.degree() < self.den.degree() {
            0.0
        } else {
            self.num.leading() / self.den.leading()
        }
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.poles()?.iter().all(|p| p.re < 0.0))
    }

    /// Evaluates at `s`; fails when `s` is a pole.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval(s);
        let scale: f64 = self
            .den
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * s.norm().powi(k as i32))
            .sum();
        if d.norm() <= 1e-13 * scale {
            return Err(Error::PoleEvaluation { row: 0, col: 0, at: s });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Residue at a simple pole `p`.
    pub fn residue(&self, p: Complex64) -> Complex64 {
        self.num.eval(p) / self.den.derivative().eval(p)
    }

    /// `f(-s)`, which for real coefficients is the para-conjugate `f~`.
    pub fn para_conjugate(&self) -> Self {
        let mut r = RationalFn { num: self.num.reflect(), den: self.den.reflect() };
        r.normalize();
        r
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Singular("inverse of the zero rational function".into()));
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut r = RationalFn { num: self.num.scale(a), den: self.den.clone() };
        r.normalize();
        r
    }

    fn normalize(&mut self) {
        let l = self.den.leading();
        if l != 1.0 && l != 0.0 {
            self.num = self.num.scale(1.0 / l);
            self.den = self.den.scale(1.0 / l);
        }
        if self.num.is_zero() {
            self.den = Polynomial::one();
        }
    }

    /// Cancels common roots of numerator and denominator by deflation.
    fn reduce(&mut self) {
        self.num = self.num.trimmed(1e-14);
        self.normalize();
        if self.num.is_zero() || self.num.degree() == 0 || self.den.degree() == 0 {
            return;
        }
        let (Ok(zs), Ok(ps)) = (self.num.roots(), self.den.roots()) else {
            return;
        };
        let mut used = vec![false; zs.len()];
        let mut common = Vec::new();
        for p in &ps {
            let tol = CANCEL_TOL * p.norm().max(1.0);
            let best = zs
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|a, b| (a.1 - p).norm().total_cmp(&(b.1 - p).norm()));
            if let Some((i, z)) = best {
                if (z - p).norm() <= tol {
                    used[i] = true;
                    // A simple root is resolved far better than a clustered one.
                    let mz = zs.iter().filter(|w| (*w - z).norm() <= tol).count();
                    let mp = ps.iter().filter(|w| (*w - p).norm() <= tol).count();
                    let r = match mz.cmp(&mp) {
                        std::cmp::Ordering::Less => *z,
                        std::cmp::Ordering::Greater => *p,
                        std::cmp::Ordering::Equal => 0.5 * (z + p),
                    };
                    // Clustered real roots come back as near-real pairs.
                    common.push(snap_real(r, tol));
                }
            }
        }
        if common.is_empty() {
            return;
        }
        let num = deflate_roots(&self.num, &common);
        let den = deflate_roots(&self.den, &common);
        let reduced = RationalFn { num, den };
        if !reduced.agrees_with(self) {
            return;
        }
        *self = reduced;
        self.normalize();
    }

    /// Spot check that a cancellation preserved the function.
    fn agrees_with(&self, other: &RationalFn) -> bool {
        let radius = 1.0 + other.den.roots().map(|r| r.iter().map(|v| v.norm()).fold(0.0, f64::max)).unwrap_or(0.0);
        [0.37, 1.91, 3.3, 4.7].iter().all(|t| {
            let s = Complex64::from_polar(1.5 * radius, *t);
            let (a, b) = (self.eval_raw(s), other.eval_raw(s));
            (a - b).norm() <= 1e-6 * b.norm().max(1e-12)
        })
    }

    fn eval_raw(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }
}

/// Quotient of `p / d`, discarding the (numerically small) remainder.
fn deflate(p: &Polynomial, d: &Polynomial) -> Polynomial {
    let n = p.degree();
    let m = d.degree();
    if n < m || p.is_zero() {
        return p.clone();
    }
    let mut rem: Vec<f64> = p.coeffs().to_vec();
    let mut q = vec![0.0; n - m + 1];
    let dl = d.leading();
    for k in (0..=n - m).rev() {
        let c = rem[k + m] / dl;
        q[k] = c;
        for j in 0..=m {
            rem[k + j] -= c * d.coeff(j);
        }
    }
    Polynomial::new(q)
}

impl Add for &RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: &RationalFn) -> RationalFn {
        if self.den == rhs.den {
            return RationalFn::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero den");
        }
        if let Some((e1, e2)) = cofactors(&self.den, &rhs.den) {
            let num = &(&self.num * &e2) + &(&rhs.num * &e1);
            return RationalFn::new(num, &self.den * &e2).expect("nonzero den");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFn::new(num, &self.den * &rhs.den).expect("nonzero den")
    }
}

/// Monic `e1`, `e2` with `d1 e2 = d2 e1` equal to the least common multiple.
/// Shared roots are matched and divided out of each denominator, so clustered
/// unshared roots are never rebuilt from their (less accurate) estimates.
/// `None` when the denominators share no root.
fn cofactors(d1: &Polynomial, d2: &Polynomial) -> Option<(Polynomial, Polynomial)> {
    if d1.degree() == 0 || d2.degree() == 0 {
        return None;
    }
    let (r1, r2) = (d1.roots().ok()?, d2.roots().ok()?);
    let mut used = vec![false; r2.len()];
    let mut common = Vec::new();
    for a in &r1 {
        let tol = CANCEL_TOL * a.norm().max(1.0);
        let best = r2
            .iter()
            .enumerate()
            .filter(|(i, b)| !used[*i] && (*b - a).norm() <= tol)
            .min_by(|x, y| (x.1 - a).norm().total_cmp(&(y.1 - a).norm()));
        if let Some((i, b)) = best {
            used[i] = true;
            common.push(snap_real(0.5 * (a + b), tol));
        }
    }
    if common.is_empty() {
        return None;
    }
    Some((deflate_roots(d1, &common), deflate_roots(d2, &common)))
}

fn snap_real(r: Complex64, tol: f64) -> Complex64 {
    if r.im.abs() <= tol {
        Complex64::new(r.re, 0.0)
    } else {
        r
    }
}

/// Divides out each root; a complex root takes its conjugate partner along.
fn deflate_roots(p: &Polynomial, roots: &[Complex64]) -> Polynomial {
    let mut out = p.clone();
    let mut pending: Vec<Complex64> = roots.to_vec();
    while let Some(r) = pending.pop() {
        if r.im == 0.0 {
            out = deflate(&out, &Polynomial::linear(r.re));
        } else {
            out = deflate(&out, &Polynomial::new(vec![r.norm_sqr(), -2.0 * r.re, 1.0]));
            if let Some(j) = pending.iter().position(|c| (*c - r.conj()).norm() < 1e-9 * r.norm().max(1.0)) {
                pending.remove(j);
            }
        }
    }
    out
}

impl Sub for &RationalFn {
    type Output = RationalFn;
    fn sub(self, rhs: &RationalFn) -> RationalFn {
        self + &(-rhs)
    }
}

impl Mul for &RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: &RationalFn) -> RationalFn {
        if self.is_zero() || rhs.is_zero() {
            return RationalFn::zero();
        }
        RationalFn::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero den")
    }
}

impl Div for &RationalFn {
    type Output = Result<RationalFn>;
    fn div(self, rhs: &RationalFn) -> Result<RationalFn> {
        Ok(self * &rhs.inv()?)
    }
}

impl Neg for &RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}
