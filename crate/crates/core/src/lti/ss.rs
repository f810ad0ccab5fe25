use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::eig::eigenvalues;
use super::matrix::{CMatrix, FrequencyResponse, TransferMatrix};
use super::poly::Polynomial;
use super::rational::RationalFn;
use crate::error::{Error, Result};

/// Real state-space realization `(A, B, C, D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::InvalidInput("inconsistent state-space dimensions".into()));
        }
        Ok(StateSpace { a, b, c, d })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    /// Column-wise controller-canonical realization, reduced to its observable part.
    pub fn realize(t: &TransferMatrix) -> Result<Self> {
        if !t.is_proper() {
            return Err(Error::InvalidInput("cannot realize an improper matrix".into()));
        }
        let (p, m) = (t.rows(), t.cols());
        let d = t.at_infinity();
        let mut blocks = Vec::with_capacity(m);
        for j in 0..m {
            let mut den = Polynomial::one();
            let mut seen: Vec<&Polynomial> = Vec::new();
            for i in 0..p {
                let di = t.get(i, j).den();
                if di.degree() > 0 && !seen.iter().any(|s| *s == di) {
                    seen.push(di);
                    den = &den * di;
                }
            }
            let n = den.degree();
            let mut a = DMatrix::zeros(n, n);
            for k in 0..n.saturating_sub(1) {
                a[(k, k + 1)] = 1.0;
            }
            for k in 0..n {
                a[(n - 1, k)] = -den.coeff(k);
            }
            let mut b = DMatrix::zeros(n, 1);
            if n > 0 {
                b[(n - 1, 0)] = 1.0;
            }
            let mut c = DMatrix::zeros(p, n);
            for i in 0..p {
                let e = t.get(i, j);
                if e.is_zero() {
                    continue;
                }
                // e = d_ij + r / den with deg r < n
                let cofactor = polydiv_exact(&den, e.den());
                let r = &(e.num() * &cofactor) - &den.scale(d[(i, j)]);
                for k in 0..n {
                    c[(i, k)] = r.coeff(k);
                }
            }
            blocks.push((a, b, c));
        }
        let n: usize = blocks.iter().map(|b| b.0.nrows()).sum();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, m);
        let mut c = DMatrix::zeros(p, n);
        let mut off = 0;
        for (j, (aj, bj, cj)) in blocks.into_iter().enumerate() {
            let k = aj.nrows();
            a.view_mut((off, off), (k, k)).copy_from(&aj);
            b.view_mut((off, j), (k, 1)).copy_from(&bj);
            c.view_mut((0, off), (p, k)).copy_from(&cj);
            off += k;
        }
        Ok(StateSpace { a, b, c, d }.observable_part())
    }

    /// Projects out the unobservable subspace (the kernel of the observability matrix).
    pub fn observable_part(&self) -> Self {
        let n = self.states();
        if n == 0 {
            return self.clone();
        }
        let p = self.c.nrows();
        let mut obs = DMatrix::zeros(p * n, n);
        let mut row = self.c.clone();
        for k in 0..n {
            obs.view_mut((k * p, 0), (p, n)).copy_from(&row);
            row = &row * &self.a;
        }
        let svd = obs.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > 1e-9 * smax.max(1e-300))
            .collect();
        if keep.len() == n {
            return self.clone();
        }
        let mut tm = DMatrix::zeros(n, keep.len());
        for (col, &k) in keep.iter().enumerate() {
            tm.set_column(col, &vt.row(k).transpose());
        }
        StateSpace {
            a: tm.transpose() * &self.a * &tm,
            b: tm.transpose() * &self.b,
            c: &self.c * &tm,
            d: self.d.clone(),
        }
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.a)
    }

    /// `C (sI - A)^{-1} B + D`.
    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let n = self.states();
        let d = self.d.map(|x| Complex64::new(x, 0.0));
        if n == 0 {
            return Ok(d);
        }
        let si_a = CMatrix::from_fn(n, n, |i, j| {
            let v = Complex64::new(-self.a[(i, j)], 0.0);
            if i == j {
                v + s
            } else {
                v
            }
        });
        let b = self.b.map(|x| Complex64::new(x, 0.0));
        let x = si_a
            .lu()
            .solve(&b)
            .ok_or(Error::PoleEvaluation { row: 0, col: 0, at: s })?;
        Ok(self.c.map(|x| Complex64::new(x, 0.0)) * x + d)
    }

    /// Coefficient conversion: characteristic polynomial from the eigenvalues,
    /// numerators by interpolation on a circle enclosing the spectrum.
    pub fn to_transfer_matrix(&self) -> Result<TransferMatrix> {
        let (p, m) = (self.c.nrows(), self.b.ncols());
        let charp = char_poly(&self.a)?;
        let n = charp.degree();
        let npts = n + 1;
        let radius = 1.5 * self.poles()?.iter().map(|l| l.norm()).fold(1.0, f64::max);
        let nodes: Vec<Complex64> = (0..npts)
            .map(|k| Complex64::from_polar(radius, (2.0 * std::f64::consts::PI * k as f64 + 0.5) / npts as f64))
            .collect();
        let values = nodes
            .iter()
            .map(|s| Ok(self.eval(*s)? * charp.eval(*s)))
            .collect::<Result<Vec<CMatrix>>>()?;
        let mut entries = Vec::with_capacity(p * m);
        for i in 0..p {
            for j in 0..m {
                let coeffs: Vec<f64> = (0..npts)
                    .map(|deg| {
                        let acc: Complex64 = nodes
                            .iter()
                            .zip(&values)
                            .map(|(s, v)| v[(i, j)] * (s / radius).powi(-(deg as i32)))
                            .sum();
                        acc.re / (npts as f64 * radius.powi(deg as i32))
                    })
                    .collect();
                let num = Polynomial::new(coeffs).trimmed(1e-12);
                entries.push(RationalFn::new(num, charp.clone())?);
            }
        }
        TransferMatrix::new(p, m, entries)
    }
}

impl FrequencyResponse for StateSpace {
    fn dims(&self) -> (usize, usize) {
        (self.c.nrows(), self.b.ncols())
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        StateSpace::eval(self, s)
    }
}

fn char_poly(a: &DMatrix<f64>) -> Result<Polynomial> {
    Ok(Polynomial::from_roots(&eigenvalues(a)?))
}

/// Quotient of a division known to be exact.
fn polydiv_exact(p: &Polynomial, d: &Polynomial) -> Polynomial {
    let n = p.degree();
    let m = d.degree();
    if n < m {
        return Polynomial::zero();
    }
    let mut rem = p.coeffs().to_vec();
    let mut q = vec![0.0; n - m + 1];
    for k in (0..=n - m).rev() {
        let c = rem[k + m] / d.leading();
        q[k] = c;
        for j in 0..=m {
            rem[k + j] -= c * d.coeff(j);
        }
    }
    Polynomial::new(q)
}

/// Solves `A X + X A^T = Q` through the Kronecker form.
pub fn lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let big = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DVector::from_column_slice(q.as_slice());
    let x = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Construction("Lyapunov equation is singular".into()))?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

/// Gain `K` with `A + B K` Hurwitz (Bass's method). Fails if `(A, B)` is not controllable.
pub fn stabilizing_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(b.ncols(), 0));
    }
    let min_re = eigenvalues(a)?.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let beta = (-min_re).max(0.0) + 1.0;
    let abar = a + DMatrix::<f64>::identity(n, n) * beta;
    let z = lyapunov(&abar, &(b * b.transpose() * 2.0))?;
    let z = (&z + z.transpose()) * 0.5;
    let zinv = z
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Construction("realization is not controllable".into()))?
        .inverse();
    let k = -(b.transpose() * zinv) * 2.0;
    let closed = a + b * &k;
    if eigenvalues(&closed)?.iter().any(|l| l.re >= 0.0) {
        return Err(Error::Construction("stabilizing gain failed".into()));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realization_matches_transfer_matrix() {
        let t = TransferMatrix::from_rows(vec![
            vec![
                RationalFn::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap(),
                RationalFn::from_coeffs(&[-2.0, 1.0], &[2.0, 3.0, 1.0]).unwrap(),
            ],
            vec![RationalFn::constant(0.5), RationalFn::from_coeffs(&[1.0, 1.0], &[3.0, 1.0]).unwrap()],
        ])
        .unwrap();
        let ss = StateSpace::realize(&t).unwrap();
        for w in [0.1, 1.0, 7.0] {
            let s = Complex64::new(0.2, w);
            let diff = ss.eval(s).unwrap() - t.eval(s).unwrap();
            assert!(diff.norm() < 1e-12, "{diff}");
        }
        let back = ss.to_transfer_matrix().unwrap();
        let s = Complex64::new(0.0, 2.0);
        assert!((back.eval(s).unwrap() - t.eval(s).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn shared_denominator_is_minimal() {
        let f = RationalFn::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap();
        let t = TransferMatrix::from_rows(vec![vec![f.clone()], vec![f.scale(2.0)]]).unwrap();
        assert_eq!(StateSpace::realize(&t).unwrap().states(), 1);
    }

    #[test]
    fn bass_gain_stabilizes() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, -1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let k = stabilizing_gain(&a, &b).unwrap();
        assert!((&a + &b * k).complex_eigenvalues().iter().all(|l| l.re < 0.0));
    }
}
