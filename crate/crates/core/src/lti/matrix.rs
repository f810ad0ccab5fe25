use nalgebra::DMatrix;
use num_complex::Complex64;

use super::rational::RationalFn;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Anything that can be evaluated pointwise as a complex matrix.
pub trait FrequencyResponse {
    fn dims(&self) -> (usize, usize);
    fn eval(&self, s: Complex64) -> Result<CMatrix>;
}

/// Matrix of real-rational entries, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RationalFn>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraOp {
    Product,
    Inverse,
    ParaConjugate,
}

impl TransferMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RationalFn>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("transfer matrix must have positive dimensions".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(TransferMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<RationalFn>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged transfer matrix rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn scalar(f: RationalFn) -> Self {
        TransferMatrix { rows: 1, cols: 1, entries: vec![f] }
    }

    pub fn identity(m: usize) -> Self {
        Self::diag(vec![RationalFn::one(); m])
    }

    pub fn diag(d: Vec<RationalFn>) -> Self {
        let m = d.len();
        let mut entries = vec![RationalFn::zero(); m * m];
        for (i, f) in d.into_iter().enumerate() {
            entries[i * m + i] = f;
        }
        TransferMatrix { rows: m, cols: m, entries }
    }

    /// Constant real matrix.
    pub fn constant(m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| RationalFn::constant(m[(i, j)]))
            .collect();
        TransferMatrix { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFn {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[RationalFn] {
        &self.entries
    }

    pub fn is_proper(&self) -> bool {
        self.entries.iter().all(RationalFn::is_proper)
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.entries.iter().all(RationalFn::is_strictly_proper)
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_stable(&self) -> Result<bool> {
        for e in &self.entries {
            if !e.is_stable()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Entrywise evaluation; reports the first entry that has a pole at `s`.
    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.get(i, j).eval(s).map_err(|e| match e {
                    Error::PoleEvaluation { at, .. } => Error::PoleEvaluation { row: i, col: j, at },
                    other => other,
                })?;
            }
        }
        Ok(m)
    }

    pub fn at_infinity(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).at_infinity())
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        TransferMatrix { rows: self.cols, cols: self.rows, entries }
    }

    pub fn product(&self, rhs: &TransferMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidInput(format!(
                "non-conformable product {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = RationalFn::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                entries.push(acc);
            }
        }
        Ok(TransferMatrix { rows: self.rows, cols: rhs.cols, entries })
    }

    pub fn sum(&self, rhs: &TransferMatrix) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::InvalidInput("non-conformable sum".into()));
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Ok(TransferMatrix { rows: self.rows, cols: self.cols, entries })
    }

    pub fn map(&self, f: impl Fn(&RationalFn) -> RationalFn) -> Self {
        TransferMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> TransferMatrix {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                entries.push(self.get(i, j).clone());
            }
        }
        TransferMatrix { rows: self.rows - 1, cols: self.cols - 1, entries }
    }

    /// Determinant by cofactor expansion (desk-scale dimensions only).
    pub fn det(&self) -> Result<RationalFn> {
        if !self.is_square() {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        Ok(self.det_unchecked())
    }

    fn det_unchecked(&self) -> RationalFn {
        match self.rows {
            1 => self.entries[0].clone(),
            2 => &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0)),
            n => {
                let mut acc = RationalFn::zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let term = a * &self.minor(0, j).det_unchecked();
                    acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Exact inverse through the adjugate.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det()?;
        if det.is_zero() {
            return Err(Error::Singular("transfer matrix has identically zero determinant".into()));
        }
        let inv_det = det.inv()?;
        let n = self.rows;
        if n == 1 {
            return Ok(TransferMatrix::scalar(inv_det));
        }
        let mut entries = vec![RationalFn::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let cof = self.minor(j, i).det_unchecked();
                let signed = if (i + j) % 2 == 0 { cof } else { -&cof };
                entries[i * n + j] = &signed * &inv_det;
            }
        }
        Ok(TransferMatrix { rows: n, cols: n, entries })
    }

    /// `T~(s) = T(-s)^T`.
    pub fn para_conjugate(&self) -> Self {
        self.transpose().map(RationalFn::para_conjugate)
    }

    /// Matrix of residues at a simple pole `p` (zero for entries analytic at `p`).
    pub fn residue(&self, p: Complex64) -> Result<CMatrix> {
        let mut r = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                let poles = e.poles()?;
                let hits = poles
                    .iter()
                    .filter(|q| (*q - p).norm() <= super::rational::CANCEL_TOL * p.norm().max(1.0))
                    .count();
                match hits {
                    0 => {}
                    1 => r[(i, j)] = e.residue(p),
                    _ => {
                        return Err(Error::UnsupportedMultiplicity {
                            at: p,
                            what: format!("entry ({i}, {j}) has a repeated pole"),
                        })
                    }
                }
            }
        }
        Ok(r)
    }
}

impl FrequencyResponse for TransferMatrix {
    fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        TransferMatrix::eval(self, s)
    }
}

/// Rational matrix algebra entry point.
pub fn algebra(op: AlgebraOp, args: &[&TransferMatrix]) -> Result<TransferMatrix> {
    match op {
        AlgebraOp::Product => {
            let (first, rest) = args
                .split_first()
                .ok_or_else(|| Error::InvalidInput("product of no matrices".into()))?;
            rest.iter().try_fold((*first).clone(), |acc, m| acc.product(m))
        }
        AlgebraOp::Inverse => match args {
            [m] => m.inverse(),
            _ => Err(Error::InvalidInput("inverse takes exactly one argument".into())),
        },
        AlgebraOp::ParaConjugate => match args {
            [m] => Ok(m.para_conjugate()),
            _ => Err(Error::InvalidInput("para_conjugate takes exactly one argument".into())),
        },
    }
}
