//! Dense linear-algebra kernel.
//!
//! Economy SVD (one-sided Jacobi) with `r = min(n, l)` factors and
//! nonincreasing singular values, Hermitian eigendecomposition with real
//! eigenvalues (via `nalgebra`), and a clamped positive semi-definite square
//! root. Every entry point rejects non-finite input.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

pub use nalgebra::Complex;

use crate::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex<f64>>;

/// Orthonormality tolerance for unit-scale factors.
pub const TAU_ORTH: f64 = 1e-8;
/// Hermiticity tolerance, relative to `max(1, |B|)`.
pub const TAU_HERM: f64 = 1e-8;
/// Relative reconstruction tolerance.
pub const TAU_RECON: f64 = 1e-10;
/// Negative eigenvalues down to `-NEG_EIGEN_REL * |B|` are clamped to zero.
pub const NEG_EIGEN_REL: f64 = 1e-9;

const EIGEN_MAX_ITER: usize = 10_000;
const SVD_MAX_SWEEPS: usize = 100;

/// Scalar field of a configuration: `f64` or `Complex<f64>`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}

impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Economy singular value decomposition `M = U diag(s) V*`.
#[derive(Debug, Clone)]
pub struct SvdFactors<T: Scalar> {
    /// `n x r`, orthonormal columns.
    pub u: DMatrix<T>,
    /// Nonincreasing, nonnegative, length `r = min(n, l)`.
    pub singular_values: Vec<f64>,
    /// `l x r`, orthonormal columns.
    pub v: DMatrix<T>,
}

impl<T: Scalar> SvdFactors<T> {
    pub fn reconstruct(&self) -> DMatrix<T> {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

/// Eigendecomposition `M = Q diag(eigenvalues) Q*` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenFactors<T: Scalar> {
    pub q: DMatrix<T>,
    pub eigenvalues: Vec<f64>,
}

impl<T: Scalar> EigenFactors<T> {
    pub fn reconstruct(&self) -> DMatrix<T> {
        scaled_outer(&self.q, &self.eigenvalues)
    }
}

/// `Q diag(w) Q*`.
pub(crate) fn scaled_outer<T: Scalar>(q: &DMatrix<T>, w: &[f64]) -> DMatrix<T> {
    let mut qw = q.clone();
    for (j, &s) in w.iter().enumerate() {
        qw.column_mut(j).scale_mut(s);
    }
    qw * q.adjoint()
}

pub fn ensure_finite<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn ensure_nonempty<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.is_empty() {
        Err(Error::Empty {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    } else {
        Ok(())
    }
}

pub fn ensure_same_shape<T: Scalar, S: Scalar>(a: &DMatrix<T>, b: &DMatrix<S>) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        })
    }
}

/// One-sided Jacobi SVD. Accurate for rank-deficient input, where the
/// singular vectors of zero singular values are completed to an orthonormal
/// set.
pub fn svd<T: Scalar>(m: &DMatrix<T>) -> Result<SvdFactors<T>> {
    ensure_nonempty(m)?;
    ensure_finite(m)?;
    if m.nrows() < m.ncols() {
        let f = svd(&m.adjoint())?;
        return Ok(SvdFactors {
            u: f.v,
            singular_values: f.singular_values,
            v: f.u,
        });
    }
    let (rows, k) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<T>::identity(k, k);
    // off-diagonal mass below this is roundoff that rotations cannot remove
    let tol = rows as f64 * f64::EPSILON;
    let mut converged = k < 2;
    for _ in 0..SVD_MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..k - 1 {
            for q in p + 1..k {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.modulus();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                // rotate the phase out of gamma, then a real Jacobi rotation
                let w = gamma.conjugate() / T::from_real(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * w;
                        mat[(i, p)] = xp * T::from_real(c) - xq * T::from_real(s);
                        mat[(i, q)] = xp * T::from_real(s) + xq * T::from_real(c);
                    }
                }
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure);
    }
    let norms: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = singular_values[0];
    let keep = singular_values.iter().take_while(|&&s| s > smax * tol).count();
    let mut u = DMatrix::<T>::zeros(rows, k);
    let mut vs = DMatrix::<T>::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        vs.set_column(dst, &v.column(src));
        if dst < keep {
            u.set_column(dst, &(a.column(src) / T::from_real(norms[src])));
        }
    }
    complete_orthonormal(&mut u, keep);
    Ok(SvdFactors {
        u,
        singular_values,
        v: vs,
    })
}

/// Re-orthonormalize the first `keep` columns of `q` and overwrite the rest
/// with unit vectors orthogonal to everything before them.
fn complete_orthonormal<T: Scalar>(q: &mut DMatrix<T>, keep: usize) {
    let rows = q.nrows();
    let project_out = |q: &DMatrix<T>, j: usize, mut v: DVector<T>| {
        for _ in 0..2 {
            for i in 0..j {
                let c = q.column(i).dotc(&v);
                v -= q.column(i) * c;
            }
        }
        v
    };
    for j in 0..q.ncols() {
        let mut v = if j < keep {
            project_out(q, j, q.column(j).into_owned())
        } else {
            DVector::zeros(rows)
        };
        // a kept column that collapsed is treated like a missing one; the
        // best standard basis vector keeps at least sqrt((rows - j) / rows)
        if v.norm() < 0.5 {
            v = (0..rows)
                .map(|k| {
                    let mut e = DVector::zeros(rows);
                    e[k] = T::one();
                    project_out(q, j, e)
                })
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("rows > 0");
        }
        let norm = v.norm();
        q.set_column(j, &(v / T::from_real(norm)));
    }
}

pub fn nuclear_norm<T: Scalar>(m: &DMatrix<T>) -> Result<f64> {
    Ok(svd(m)?.singular_values.iter().sum())
}

pub fn frobenius_norm<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter()
        .map(|x| x.modulus_squared())
        .sum::<f64>()
        .sqrt()
}

pub fn frobenius_dist<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<f64> {
    ensure_same_shape(a, b)?;
    Ok(a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y).modulus_squared())
        .sum::<f64>()
        .sqrt())
}

/// `|M - M*|` measured against `max(1, |M|)`.
pub fn hermitian_deviation<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let dev = frobenius_norm(&(m - m.adjoint()));
    dev / frobenius_norm(m).max(1.0)
}

fn ensure_square<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn eigh<T: Scalar>(m: &DMatrix<T>) -> Result<EigenFactors<T>> {
    ensure_square(m)?;
    ensure_nonempty(m)?;
    ensure_finite(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > TAU_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    let half = T::from_real(0.5);
    let sym = (m + m.adjoint()) * half;
    let dec = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..dec.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let q = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| dec.eigenvectors[(r, order[c])]);
    Ok(EigenFactors { q, eigenvalues })
}

/// Default clamping tolerance for [`psd_sqrt`]: `1e-9 |B|`.
pub fn default_negative_tolerance<T: Scalar>(b: &DMatrix<T>) -> f64 {
    NEG_EIGEN_REL * frobenius_norm(b)
}

/// The unique positive semi-definite square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-tol_neg, 0)` are treated as round-off and clamped to zero;
/// anything more negative is rejected with [`Error::NotPsd`].
pub fn psd_sqrt<T: Scalar>(b: &DMatrix<T>, tol_neg: f64) -> Result<DMatrix<T>> {
    let eig = eigh(b)?;
    if let Some(&worst) = eig.eigenvalues.first() {
        if worst < -tol_neg {
            return Err(Error::NotPsd { eigenvalue: worst });
        }
    }
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let r = scaled_outer(&eig.q, &roots);
    let half = T::from_real(0.5);
    Ok((&r + r.adjoint()) * half)
}

/// Promote a real matrix to the complex field.
pub fn complexify(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex::new(x, 0.0))
}
