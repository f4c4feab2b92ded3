//! Dense symmetric linear algebra shared by every integrator.
//!
//! All in-scope problems have at most a few hundred degrees of freedom, so a
//! plain row-oriented Cholesky on dense storage is sufficient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative shift used when testing positive semi-definiteness.
pub const TOL_PSD: f64 = 1e-10;

/// Relative tolerance on the largest off-diagonal asymmetry.
pub const TOL_SYM: f64 = 1e-12;

/// Lower-triangular factor `L` with `L Lᵀ = A` and a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    l: DMatrix<f64>,
}

impl CholeskyFactor {
    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `(L Lᵀ) x = b` by forward then backward substitution.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_lower(b);
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.l[(j, i)] * x[j];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `L y = b` only. Used for the `‖L⁻¹ f‖` bound on the auxiliary floor.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.l[(i, j)] * y[j];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Reassembles `L Lᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.l * self.l.transpose()
    }
}

/// Factorizes a symmetric matrix. Only the lower triangle is read.
pub fn cholesky(a: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            what: "matrix columns",
            expected: n,
            found: a.ncols(),
        });
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(CholeskyFactor { l })
}

pub fn solve_spd(factor: &CholeskyFactor, b: &DVector<f64>) -> DVector<f64> {
    factor.solve(b)
}

/// Largest `|a_ij - a_ji|` relative to the largest entry magnitude.
pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / scale
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Positive semi-definiteness test: Cholesky of `A + TOL_PSD·tr(A)/n·I` must succeed.
pub fn is_positive_semidefinite(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    if n == 0 {
        return true;
    }
    if a.iter().all(|&x| x == 0.0) {
        return true;
    }
    let trace = a.trace();
    if trace < 0.0 {
        return false;
    }
    let shift = TOL_PSD * trace / n as f64;
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += shift;
    }
    cholesky(&shifted).is_ok()
}

/// `xᵀ A y` without forming temporaries.
pub(crate) fn quad_form(a: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for j in 0..n {
        let yj = y[j];
        if yj == 0.0 {
            continue;
        }
        let mut col = 0.0;
        for i in 0..n {
            col += x[i] * a[(i, j)];
        }
        s += col * yj;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_factor_is_identity() {
        let f = cholesky(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(f.l(), &DMatrix::<f64>::identity(3, 3));
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(f.solve(&b), b);
    }

    #[test]
    fn two_by_two_factor() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let f = cholesky(&a).unwrap();
        assert_relative_eq!(f.l()[(0, 0)], 2.0, epsilon = 1e-15);
        assert_relative_eq!(f.l()[(1, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.l()[(1, 1)], 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_eq!(f.l()[(0, 1)], 0.0);
        assert!((f.reconstruct() - &a).norm() / a.norm() < 1e-12);
    }

    #[test]
    fn two_by_two_solve_matches_closed_form_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let f = cholesky(&a).unwrap();
        let x = f.solve(&DVector::from_vec(vec![1.0, 1.0]));
        // inverse = 1/8 [[3, -2], [-2, 4]]
        assert_relative_eq!(x[0], 1.0 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(x[1], 2.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn scalar_solve() {
        let f = cholesky(&DMatrix::from_element(1, 1, 4.0)).unwrap();
        assert_eq!(f.solve(&DVector::from_element(1, 8.0))[0], 2.0);
    }

    #[test]
    fn zero_pivot_rejected() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn psd_check_accepts_singular_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![98.1, 0.0]));
        assert!(is_positive_semidefinite(&a));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(!is_positive_semidefinite(&b));
        assert!(is_positive_semidefinite(&DMatrix::zeros(2, 2)));
    }

    #[test]
    fn asymmetry_measure() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.25, 1.0]);
        assert_relative_eq!(relative_asymmetry(&a), 0.25);
        assert_relative_eq!(symmetrize(&a)[(0, 1)], 0.375);
    }
}
