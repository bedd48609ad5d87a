//! Dense complex LU with partial pivoting (nalgebra), plus the condition
//! estimate and residual the solver reports with every solution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: DVector<Complex64>,
    /// 1-norm condition number `|A|_1 |A^-1|_1`.
    pub condition_estimate: f64,
    /// `|A x - b|_2 / |b|_2`.
    pub residual: f64,
}

fn norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a x = b`.
pub fn solve(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<LinearSolution> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::InvalidModel(format!(
            "system shape {}x{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let condition_estimate = norm1(a) * norm1(&inv);
    if !condition_estimate.is_finite() {
        return Err(Error::Singular {
            condition: condition_estimate,
        });
    }
    let mut x = lu.solve(b).ok_or(Error::Singular {
        condition: condition_estimate,
    })?;
    // one step of iterative refinement
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let bnorm = b.norm();
    let residual = if bnorm > 0.0 {
        (b - a * &x).norm() / bnorm
    } else {
        0.0
    };
    Ok(LinearSolution {
        x,
        condition_estimate,
        residual,
    })
}
