use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::coprime::CoprimeFactors;
use super::quadrature::{Integral, QuadratureGrid};
use crate::allpass::{extract_factors, partial_product, Side};
use crate::error::{Error, Result};
use crate::lti::{CMatrix, FrequencyResponse};
use crate::network::NetworkConstraints;

/// Largest output dimension the dense least squares accepts.
pub const MAX_OUTPUTS: usize = 3;
/// Relative Tikhonov shift on the normal equations.
const REGULARIZATION: f64 = 1e-12;
/// Condition estimate above which the result is flagged.
const CONDITION_WARN: f64 = 1e12;

/// Scalar basis `((s - a)/(s + a))^k`, `k = 0..=degree`.
///
/// Spans the same space as `(a/(s + a))^k` but is orthonormal after a
/// `1/(s + a)` weight, which keeps the normal equations well scaled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoulaBasis {
    degree: usize,
    pole: f64,
}

impl YoulaBasis {
    pub fn new(degree: usize, pole: f64) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidInput("basis degree must be at least 1".into()));
        }
        if !(pole > 0.0) || !pole.is_finite() {
            return Err(Error::InvalidInput(format!("basis pole {pole} must be positive")));
        }
        Ok(YoulaBasis { degree, pole })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn pole(&self) -> f64 {
        self.pole
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All basis values at `s`.
    pub fn values(&self, s: Complex64) -> Vec<Complex64> {
        let ratio = (s - self.pole) / (s + self.pole);
        let mut v = Vec::with_capacity(self.len());
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..self.len() {
            v.push(acc);
            acc *= ratio;
        }
        v
    }

    /// `sum_k c_k b_k(s)`.
    pub fn combine(&self, coeffs: &[f64], s: Complex64) -> Complex64 {
        self.values(s).iter().zip(coeffs).map(|(b, c)| b * c).sum()
    }
}

/// Quadrature value of the tracking objective, split into its reference and noise parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoulaObjective {
    pub j1: Integral,
    pub j2: Integral,
}

impl YoulaObjective {
    pub fn total(&self) -> f64 {
        self.j1.value + self.j2.value
    }

    pub fn infinite(&self) -> bool {
        self.j1.infinite || self.j2.infinite
    }

    pub fn truncation(&self) -> f64 {
        self.j1.truncation + self.j2.truncation
    }
}

#[derive(Clone, Debug)]
pub struct YoulaOptimum {
    pub objective: YoulaObjective,
    /// Coefficients of `S` in `Q = N_m^-1 S`, ordered by output entry then basis index.
    pub q_coeffs: Vec<f64>,
    /// Coefficients of `R`, ordered by entry (row-major) then basis index.
    pub r_coeffs: Vec<f64>,
    pub ill_conditioned: bool,
}

impl YoulaOptimum {
    pub fn j_min(&self) -> f64 {
        self.objective.total()
    }
}

fn axis(w: f64) -> Complex64 {
    Complex64::new(0.0, w)
}

fn channel_weights(constraints: &NetworkConstraints, s: Complex64) -> Result<Vec<f64>> {
    constraints
        .channels
        .iter()
        .map(|c| {
            let f = c.filter.eval(s)?.norm_sqr();
            let sq = c.sigma_q();
            Ok((c.sigma_n * c.sigma_n + f * sq * sq) / (c.lambda * c.lambda))
        })
        .collect()
}

fn scale_columns(m: &mut CMatrix, d: &[f64]) {
    for (j, v) in d.iter().enumerate() {
        let r = Complex64::new(*v, 0.0);
        m.column_mut(j).iter_mut().for_each(|x| *x *= r);
    }
}

fn frob2(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum()
}

fn check_dims(factors: &CoprimeFactors, constraints: &NetworkConstraints) -> Result<(usize, usize)> {
    let (p, m) = factors.n.dims();
    if constraints.len() != p {
        return Err(Error::InvalidInput(format!("{} channels for {p} outputs", constraints.len())));
    }
    Ok((p, m))
}

/// `J = ||(I - N Q) U||^2 + ||N (Y~ - R M~_F) W||^2` with `U = diag(sigma_r)` and
/// `W = diag(sqrt(sigma_n^2 + |f|^2 sigma_q^2) / lambda)`.
pub fn youla_objective(
    q: &(dyn FrequencyResponse + Sync),
    r: &(dyn FrequencyResponse + Sync),
    factors: &CoprimeFactors,
    constraints: &NetworkConstraints,
    grid: &QuadratureGrid,
) -> Result<YoulaObjective> {
    let (p, m) = check_dims(factors, constraints)?;
    if q.dims() != (m, p) || r.dims() != (m, p) {
        return Err(Error::InvalidInput(format!("Q and R must be {m}x{p}")));
    }
    let samples = grid
        .frequencies()
        .par_iter()
        .map(|&w| {
            let s = axis(w);
            let n = factors.n.eval(s)?;
            let mut e1 = CMatrix::identity(p, p) - &n * q.eval(s)?;
            scale_columns(&mut e1, &constraints.sigma_r);
            let d: Vec<f64> = channel_weights(constraints, s)?.iter().map(|v| v.sqrt()).collect();
            let mut e2 = &n * (factors.y_tilde.eval(s)? - r.eval(s)? * factors.m_tilde.eval(s)?);
            scale_columns(&mut e2, &d);
            Ok((frob2(&e1), frob2(&e2)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (g1, g2): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    Ok(YoulaObjective { j1: grid.integrate_samples(&g1), j2: grid.integrate_samples(&g2) })
}

/// Target and regressors of a complex-matrix-valued least squares at one frequency.
struct Sample {
    target: CMatrix,
    columns: Vec<CMatrix>,
}

struct LsqSolution {
    coeffs: Vec<f64>,
    residual: Vec<f64>,
    ill_conditioned: bool,
}

fn re_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Minimizes `sum_w weight(w) ||target - sum_k c_k column_k||_F^2` over real `c`.
fn weighted_lsq(grid: &QuadratureGrid, build: impl Fn(Complex64) -> Result<Sample> + Sync, unknowns: usize) -> Result<LsqSolution> {
    let samples = grid
        .frequencies()
        .par_iter()
        .map(|&w| build(axis(w)))
        .collect::<Result<Vec<Sample>>>()?;
    let mut gram = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<f64>::zeros(unknowns);
    for (sample, wt) in samples.iter().zip(grid.weights()) {
        for j in 0..unknowns {
            rhs[j] += wt * re_inner(&sample.columns[j], &sample.target);
            for k in j..unknowns {
                gram[(j, k)] += wt * re_inner(&sample.columns[j], &sample.columns[k]);
            }
        }
    }
    for j in 0..unknowns {
        for k in 0..j {
            gram[(j, k)] = gram[(k, j)];
        }
    }
    let shift = REGULARIZATION * gram.trace().max(f64::MIN_POSITIVE) / unknowns.max(1) as f64;
    for j in 0..unknowns {
        gram[(j, j)] += shift;
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Construction("normal equations are not positive definite".into()))?;
    let diag: Vec<f64> = chol.l_dirty().diagonal().iter().map(|v| v * v).collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let coeffs = chol.solve(&rhs);
    let residual = samples
        .iter()
        .map(|sample| {
            let mut e = sample.target.clone();
            for (c, col) in coeffs.iter().zip(&sample.columns) {
                e -= col * Complex64::new(*c, 0.0);
            }
            frob2(&e)
        })
        .collect();
    Ok(LsqSolution { coeffs: coeffs.iter().copied().collect(), residual, ill_conditioned: hi > CONDITION_WARN * lo })
}

fn zero_integral() -> Integral {
    Integral { value: 0.0, truncation: 0.0, infinite: false }
}

/// Finite-basis infimum of the objective; an upper bound on the true infimum.
///
/// The reference part uses `Q = N_m^-1 S` with `N = L N_m` and
/// `S = I + sum c (a/(s+a)) b_k(s) E_ab`, so `N Q = L S` stays computable even
/// when `Q` itself is improper.
pub fn optimize_youla(
    factors: &CoprimeFactors,
    constraints: &NetworkConstraints,
    basis: &YoulaBasis,
    grid: &QuadratureGrid,
) -> Result<YoulaOptimum> {
    let (p, m) = check_dims(factors, constraints)?;
    if p > MAX_OUTPUTS {
        return Err(Error::InvalidInput(format!("oracle supports at most {MAX_OUTPUTS} outputs, got {p}")));
    }
    let nb = basis.len();
    let a = basis.pole();
    let mut ill = false;

    let (j1, q_coeffs) = if constraints.sigma_r.iter().all(|s| *s == 0.0) || factors.nmp_zeros.is_empty() {
        (zero_integral(), vec![0.0; p * p * nb])
    } else {
        let zf = extract_factors(&factors.n, &factors.nmp_zeros, Side::Left)?;
        let sol = weighted_lsq(
            grid,
            |s| {
                let l = partial_product(&zf, Side::Left, p, s, &[], false)?;
                let mut target = CMatrix::identity(p, p) - &l;
                scale_columns(&mut target, &constraints.sigma_r);
                let roll = Complex64::new(a, 0.0) / (s + a);
                let vals = basis.values(s);
                let mut columns = Vec::with_capacity(p * p * nb);
                for i in 0..p {
                    for j in 0..p {
                        for v in &vals {
                            let mut e = CMatrix::zeros(p, p);
                            e[(i, j)] = roll * v;
                            let mut col = &l * e;
                            scale_columns(&mut col, &constraints.sigma_r);
                            columns.push(col);
                        }
                    }
                }
                Ok(Sample { target, columns })
            },
            p * p * nb,
        )?;
        ill |= sol.ill_conditioned;
        (grid.integrate_samples(&sol.residual), sol.coeffs)
    };

    let noiseless = constraints.channels.iter().all(|c| c.is_noiseless());
    let (j2, r_coeffs) = if noiseless {
        (zero_integral(), vec![0.0; m * p * nb])
    } else {
        let sol = weighted_lsq(
            grid,
            |s| {
                let n = factors.n.eval(s)?;
                let mt = factors.m_tilde.eval(s)?;
                let d: Vec<f64> = channel_weights(constraints, s)?.iter().map(|v| v.sqrt()).collect();
                let mut target = &n * factors.y_tilde.eval(s)?;
                scale_columns(&mut target, &d);
                let vals = basis.values(s);
                let mut columns = Vec::with_capacity(m * p * nb);
                for i in 0..m {
                    for j in 0..p {
                        // N E_ij M~_F = (column i of N)(row j of M~_F)
                        let mut outer = n.column(i) * mt.row(j);
                        scale_columns(&mut outer, &d);
                        for v in &vals {
                            columns.push(&outer * *v);
                        }
                    }
                }
                Ok(Sample { target, columns })
            },
            m * p * nb,
        )?;
        ill |= sol.ill_conditioned;
        (grid.integrate_samples(&sol.residual), sol.coeffs)
    };

    Ok(YoulaOptimum { objective: YoulaObjective { j1, j2 }, q_coeffs, r_coeffs, ill_conditioned: ill })
}
