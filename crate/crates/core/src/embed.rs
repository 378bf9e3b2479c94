//! Invariant feature maps built from the square root of the Gram matrix.
//!
//! `phi(A) = sqrt(A^T A)` is `O(n)`-invariant and satisfies
//! `d_O(A, B) <= |phi(A) - phi(B)| <= sqrt(2) d_O(A, B)`; `psi` applies `phi`
//! after centering and gives the same sandwich for `E(n)`. The complex maps
//! `phi_c`, `psi_c` do the same for `U(n)` and `F(n)`.
//!
//! Each map also returns a [`FeatureVector`]: the coordinates of the output
//! matrix in an orthonormal basis of the smallest subspace containing the
//! image, so euclidean distances between feature vectors equal Frobenius
//! distances between the matrices.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::matcore::{self, ComplexMatrix, RealMatrix, Scalar};
use crate::metrics::{center, Configuration, GroupKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub coords: Vec<f64>,
}

impl FeatureVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean distance; both vectors must come from the same map.
    pub fn distance(&self, other: &FeatureVector) -> f64 {
        assert_eq!(self.coords.len(), other.coords.len(), "feature dimensions differ");
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Dimension of the feature vector produced for `kind` on `l` points.
pub fn feature_dim(kind: GroupKind, l: usize) -> usize {
    match kind {
        GroupKind::Orthogonal => l * (l + 1) / 2,
        GroupKind::Euclidean => l * l.saturating_sub(1) / 2,
        GroupKind::Unitary => l * l,
        GroupKind::ComplexEuclidean => l.saturating_sub(1).pow(2),
    }
}

/// Upper triangle, row by row; off-diagonal entries scaled by `sqrt(2)`.
pub fn flatten_symmetric(m: &RealMatrix) -> Vec<f64> {
    let l = m.nrows();
    let mut out = Vec::with_capacity(l * (l + 1) / 2);
    for i in 0..l {
        out.push(m[(i, i)]);
        for j in i + 1..l {
            out.push(SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    out
}

/// Real diagonal, then real and imaginary parts of the strict upper triangle
/// scaled by `sqrt(2)`; `l^2` coordinates.
pub fn flatten_hermitian(m: &ComplexMatrix) -> Vec<f64> {
    let l = m.nrows();
    let mut out = Vec::with_capacity(l * l);
    for i in 0..l {
        out.push(m[(i, i)].re);
        for j in i + 1..l {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out.push(SQRT_2 * z.re);
            out.push(SQRT_2 * z.im);
        }
    }
    out
}

/// Orthogonal `l x l` matrix whose last column is `1/sqrt(l)`, obtained by
/// Gram-Schmidt on `1/sqrt(l), e_1, ..., e_{l-1}`.
pub fn centering_basis(l: usize) -> RealMatrix {
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(l);
    if l == 0 {
        return RealMatrix::zeros(0, 0);
    }
    cols.push(nalgebra::DVector::from_element(l, 1.0 / (l as f64).sqrt()));
    for i in 0..l - 1 {
        let mut v = nalgebra::DVector::zeros(l);
        v[i] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v.axpy(-p, c, 1.0);
            }
        }
        v /= v.norm();
        cols.push(v);
    }
    let ones = cols.remove(0);
    cols.push(ones);
    RealMatrix::from_columns(&cols)
}

/// `sqrt(A* A)` evaluated as `V diag(s) V*` from the thin SVD of `A`.
pub fn gram_sqrt<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let f = matcore::svd(a)?;
    let r = matcore::scaled_outer(&f.v, &f.singular_values);
    let half = T::from_real(0.5);
    Ok((&r + r.adjoint()) * half)
}

/// Top-left `(l-1) x (l-1)` block of `Q^T M Q` for the [`centering_basis`] `Q`.
/// For `M` annihilating `1` the remaining row and column vanish.
pub fn translation_block<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let l = m.nrows();
    if l == 0 {
        return m.clone();
    }
    let q = centering_basis(l).map(T::from_real);
    let full = q.adjoint() * m * &q;
    full.view((0, 0), (l - 1, l - 1)).into_owned()
}

fn ensure_points<T: Scalar>(a: &DMatrix<T>) -> Result<()> {
    if a.is_empty() {
        Err(Error::Empty {
            rows: a.nrows(),
            cols: a.ncols(),
        })
    } else {
        Ok(())
    }
}

/// `phi(A) = sqrt(A^T A)`, an `l x l` symmetric PSD matrix.
pub fn phi(a: &RealMatrix) -> Result<(RealMatrix, FeatureVector)> {
    ensure_points(a)?;
    let m = gram_sqrt(a)?;
    let f = FeatureVector::new(flatten_symmetric(&m));
    Ok((m, f))
}

/// `psi(A) = phi(A - mean 1^T)`; the feature vector lives in `l(l-1)/2`
/// coordinates.
pub fn psi(a: &RealMatrix) -> Result<(RealMatrix, FeatureVector)> {
    ensure_points(a)?;
    let m = gram_sqrt(&center(a)?)?;
    let f = FeatureVector::new(flatten_symmetric(&translation_block(&m)));
    Ok((m, f))
}

/// `phi_c(A) = sqrt(A* A)`, Hermitian PSD; `l^2` real coordinates.
pub fn phi_c(a: &ComplexMatrix) -> Result<(ComplexMatrix, FeatureVector)> {
    ensure_points(a)?;
    let m = gram_sqrt(a)?;
    let f = FeatureVector::new(flatten_hermitian(&m));
    Ok((m, f))
}

/// Complex analogue of [`psi`]; `(l-1)^2` real coordinates.
pub fn psi_c(a: &ComplexMatrix) -> Result<(ComplexMatrix, FeatureVector)> {
    ensure_points(a)?;
    let m = gram_sqrt(&center(a)?)?;
    let f = FeatureVector::new(flatten_hermitian(&translation_block(&m)));
    Ok((m, f))
}

/// Feature vector of the full bi-Lipschitz map matching `kind`.
pub fn features(kind: GroupKind, a: &Configuration) -> Result<FeatureVector> {
    match kind {
        GroupKind::Orthogonal | GroupKind::Euclidean => {
            let m = a.as_real().ok_or(Error::FieldMismatch { group: kind.symbol() })?;
            if kind == GroupKind::Orthogonal {
                phi(m).map(|r| r.1)
            } else {
                psi(m).map(|r| r.1)
            }
        }
        GroupKind::Unitary => phi_c(&a.as_complex()).map(|r| r.1),
        GroupKind::ComplexEuclidean => psi_c(&a.as_complex()).map(|r| r.1),
    }
}
