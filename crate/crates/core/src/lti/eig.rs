use nalgebra::DMatrix;
use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};

const SWEEPS_PER_DIM: usize = 200;

/// Eigenvalues of a real square matrix.
///
/// Balances first, then runs a Schur decomposition with a bounded iteration
/// count; unconverged runs retry on a similarity-rotated copy.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let b = balance(a);
    let budget = SWEEPS_PER_DIM * n.max(1);
    if let Some(s) = Schur::try_new(b.clone(), f64::EPSILON, budget) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    // Exact symmetries can stall the shifts; an orthogonal similarity breaks them.
    let rot = rotation(n, 0.3);
    let c = rot.transpose() * &b * &rot;
    Schur::try_new(c, f64::EPSILON, budget)
        .map(|s| s.complex_eigenvalues().iter().copied().collect())
        .ok_or_else(|| Error::Construction("eigenvalue iteration did not converge".into()))
}

/// Diagonal similarity scaling rows and columns to comparable norms.
fn balance(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut b = a.clone();
    for _ in 0..20 {
        let mut converged = true;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| b[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / 2.0 {
                cc *= 2.0;
                rr /= 2.0;
                f *= 2.0;
            }
            while cc >= rr * 2.0 {
                cc /= 2.0;
                rr *= 2.0;
                f /= 2.0;
            }
            if (cc + rr) < 0.95 * (c + r) {
                converged = false;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    b
}

/// Product of plane rotations over consecutive coordinate pairs.
fn rotation(n: usize, angle: f64) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::identity(n, n);
    let (c, s) = (angle.cos(), angle.sin());
    for k in 0..n.saturating_sub(1) {
        let mut g = DMatrix::<f64>::identity(n, n);
        g[(k, k)] = c;
        g[(k + 1, k + 1)] = c;
        g[(k, k + 1)] = -s;
        g[(k + 1, k)] = s;
        q = q * g;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_of_even_polynomial() {
        // s^4 - 5 s^2 + 4 = (s^2 - 1)(s^2 - 4)
        let coeffs = [4.0, 0.0, -5.0, 0.0];
        let mut comp = DMatrix::<f64>::zeros(4, 4);
        for i in 1..4 {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..4 {
            comp[(i, 3)] = -coeffs[i];
        }
        let mut ev: Vec<f64> = eigenvalues(&comp).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
