//! Small dense linear algebra: checked inverses, least squares, eigenvalues,
//! and Gaussian elimination carried out in jet arithmetic.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jets::Jet2;

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e10;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse by LU with partial pivoting; rejects matrices whose 1-norm
/// condition number exceeds [`MAX_CONDITION`].
pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { cond: f64::INFINITY })?;
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::Singular { cond });
    }
    Ok(inv)
}

/// Least-squares solution of `A x ≈ b` by SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let cols = a.ncols();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-12;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < cols || smax == 0.0 {
        return Err(Error::RankDeficient { rank, cols });
    }
    svd.solve(b, eps)
        .map_err(|_| Error::RankDeficient { rank, cols })
}

pub fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym.clone()).eigenvalues.min()
}

/// Solves `A z = b` with `A` row-major `n x n`, pivoting on values.
pub fn jet_solve(a: &[Jet2], b: &[Jet2]) -> Result<Vec<Jet2>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let mut m: Vec<Jet2> = a.to_vec();
    let mut rhs: Vec<Jet2> = b.to_vec();
    let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.value().abs()));
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[j * n + col].value().abs())
            })
            .unwrap();
        if m[piv * n + col].value().abs() <= scale * 1e-14 {
            return Err(Error::Singular { cond: f64::INFINITY });
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let inv = m[col * n + col].recip()?;
        for row in (col + 1)..n {
            let factor = &m[row * n + col] * &inv;
            for k in col..n {
                let update = &factor * &m[col * n + k];
                m[row * n + k] = &m[row * n + k] - &update;
            }
            let update = &factor * &rhs[col];
            rhs[row] = &rhs[row] - &update;
        }
    }
    let mut z = vec![Jet2::constant(0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for k in (row + 1)..n {
            acc = acc - &m[row * n + k] * &z[k];
        }
        z[row] = acc / &m[row * n + row];
    }
    Ok(z)
}
