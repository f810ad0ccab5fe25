use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for conjugate pairing and root matching.
pub const ROOT_TOL: f64 = 1e-8;

/// Real polynomial with coefficients in ascending degree order.
///
/// The zero polynomial is stored with an empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(v: Vec<f64>) -> Self {
        Polynomial::new(v)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    /// `s - r` for real `r`.
    pub fn linear(r: f64) -> Self {
        Polynomial::new(vec![-r, 1.0])
    }

    /// Monic polynomial with the given roots. Complex roots must come in
    /// conjugate pairs; the imaginary residue of the product is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Polynomial::new(c.into_iter().map(|z| z.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops leading coefficients that are negligible relative to the largest one.
    pub fn trimmed(&self, rel: f64) -> Self {
        let scale = self.max_abs_coeff();
        let mut c = self.coeffs.clone();
        while let Some(&l) = c.last() {
            if l.abs() <= rel * scale {
                c.pop();
            } else {
                break;
            }
        }
        Polynomial::new(c)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// `p(-s)`.
    pub fn reflect(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    pub fn scale(&self, a: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * a).collect())
    }

    pub fn powi(&self, n: usize) -> Self {
        (0..n).fold(Polynomial::one(), |acc, _| &acc * self)
    }

    /// All `degree()` roots with multiplicity.
    ///
    /// Eigenvalues of the companion matrix, refined by Newton steps on the
    /// original coefficients, then snapped into exact conjugate pairs.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::InvalidInput("roots of the zero polynomial".into()));
        }
        // Exact roots at the origin.
        let lead_zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let reduced = Polynomial::new(self.coeffs[lead_zeros..].to_vec());
        let mut roots = vec![Complex64::new(0.0, 0.0); lead_zeros];
        let n = reduced.degree();
        if n == 0 {
            return Ok(roots);
        }
        let lead = reduced.leading();
        let raw: Vec<Complex64> = if n == 1 {
            vec![Complex64::new(-reduced.coeff(0) / lead, 0.0)]
        } else if n == 2 {
            quadratic_roots(reduced.coeff(2), reduced.coeff(1), reduced.coeff(0))
        } else {
            let mut comp = DMatrix::<f64>::zeros(n, n);
            for i in 1..n {
                comp[(i, i - 1)] = 1.0;
            }
            for i in 0..n {
                comp[(i, n - 1)] = -reduced.coeff(i) / lead;
            }
            super::eig::eigenvalues(&comp)?
        };
        let deriv = reduced.derivative();
        for r in raw {
            roots.push(polish(&reduced, &deriv, r));
        }
        Ok(pair_conjugates(roots))
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        if q == 0.0 {
            return vec![Complex64::new(0.0, 0.0); 2];
        }
        vec![Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a).abs();
        vec![Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

fn polish(p: &Polynomial, dp: &Polynomial, mut r: Complex64) -> Complex64 {
    for _ in 0..8 {
        let v = p.eval(r);
        let d = dp.eval(r);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        let next = r - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        // Only accept steps that reduce the residual.
        if p.eval(next).norm() < v.norm() {
            r = next;
        } else {
            break;
        }
        if step.norm() <= 1e-16 * r.norm().max(1.0) {
            break;
        }
    }
    r
}

/// Snaps nearly-real roots onto the real axis and averages conjugate partners.
fn pair_conjugates(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let r = roots[i];
        let tol = ROOT_TOL * r.norm().max(1.0);
        if r.im.abs() <= tol {
            roots[i] = Complex64::new(r.re, 0.0);
            done[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !done[j])
            .min_by(|&a, &b| {
                let da = (roots[a] - r.conj()).norm();
                let db = (roots[b] - r.conj()).norm();
                da.total_cmp(&db)
            });
        if let Some(j) = partner {
            if (roots[j] - r.conj()).norm() <= 1e3 * tol {
                let avg = Complex64::new(0.5 * (r.re + roots[j].re), 0.5 * (r.im - roots[j].im));
                roots[i] = avg;
                roots[j] = avg.conj();
                done[j] = true;
            }
        }
        done[i] = true;
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*s")?,
                _ => write!(f, "{a}*s^{k}")?,
            }
        }
        Ok(())
    }
}
