//! Exact orbit distances.
//!
//! For `U(n)` acting by left multiplication the minimum of `|WA - B|` has the
//! closed form `|A|^2 + |B|^2 - 2 |A B*|_*`, attained at `W = V U*` where
//! `A B* = U D V*`. Real inputs admit a real SVD, so the same `W` is
//! orthogonal and `d_O = d_U`. Translations are removed by centering each
//! configuration at its column mean, after which `d_E = d_O` and `d_F = d_U`
//! on the centered matrices.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::matcore::{
    self, complexify, ensure_finite, ensure_same_shape, frobenius_norm, ComplexMatrix,
    RealMatrix, Scalar,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "O")]
    Orthogonal,
    #[serde(rename = "E")]
    Euclidean,
    #[serde(rename = "U")]
    Unitary,
    #[serde(rename = "F")]
    ComplexEuclidean,
}

impl GroupKind {
    pub const ALL: [GroupKind; 4] = [
        GroupKind::Orthogonal,
        GroupKind::Euclidean,
        GroupKind::Unitary,
        GroupKind::ComplexEuclidean,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            GroupKind::Orthogonal => "O",
            GroupKind::Euclidean => "E",
            GroupKind::Unitary => "U",
            GroupKind::ComplexEuclidean => "F",
        }
    }

    /// `U` and `F` act on complex configurations.
    pub fn is_complex(self) -> bool {
        matches!(self, GroupKind::Unitary | GroupKind::ComplexEuclidean)
    }

    pub fn has_translations(self) -> bool {
        matches!(self, GroupKind::Euclidean | GroupKind::ComplexEuclidean)
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for GroupKind {
    type Err = String;

    /// Accepts `O`, `E`, `U`, `F` (any case), optionally followed by the
    /// ambient dimension as in `E2`; the dimension is not checked here.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let (head, tail) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        if !tail.is_empty() && !tail.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("unknown group {s:?}"));
        }
        match head.to_ascii_uppercase().as_str() {
            "O" => Ok(GroupKind::Orthogonal),
            "E" => Ok(GroupKind::Euclidean),
            "U" => Ok(GroupKind::Unitary),
            "F" => Ok(GroupKind::ComplexEuclidean),
            _ => Err(format!("unknown group {s:?} (expected O, E, U or F)")),
        }
    }
}

/// A group acting on `n x l` configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupAction {
    pub kind: GroupKind,
    pub n: usize,
}

impl GroupAction {
    pub fn new(kind: GroupKind, n: usize) -> Self {
        Self { kind, n }
    }
}

/// A real or complex configuration; columns are points.
#[derive(Debug, Clone, PartialEq)]
pub enum Configuration {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

impl Configuration {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Configuration::Real(m) => m.shape(),
            Configuration::Complex(m) => m.shape(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Configuration::Real(_))
    }

    pub fn as_complex(&self) -> Cow<'_, ComplexMatrix> {
        match self {
            Configuration::Real(m) => Cow::Owned(complexify(m)),
            Configuration::Complex(m) => Cow::Borrowed(m),
        }
    }

    pub fn as_real(&self) -> Option<&RealMatrix> {
        match self {
            Configuration::Real(m) => Some(m),
            Configuration::Complex(_) => None,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Configuration::Real(m) => frobenius_norm(m),
            Configuration::Complex(m) => frobenius_norm(m),
        }
    }
}

impl From<RealMatrix> for Configuration {
    fn from(m: RealMatrix) -> Self {
        Configuration::Real(m)
    }
}

impl From<ComplexMatrix> for Configuration {
    fn from(m: ComplexMatrix) -> Self {
        Configuration::Complex(m)
    }
}

/// The group element `g = (W, t)` acting by `A -> W A + t 1^T`, and the
/// distance it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T: Scalar> {
    pub rotation: DMatrix<T>,
    pub translation: DVector<T>,
    pub achieved_distance: f64,
}

impl<T: Scalar> Alignment<T> {
    pub fn apply(&self, a: &DMatrix<T>) -> DMatrix<T> {
        let mut out = &self.rotation * a;
        for mut col in out.column_iter_mut() {
            col += &self.translation;
        }
        out
    }
}

/// Mean of the columns of `a`.
pub fn column_mean<T: Scalar>(a: &DMatrix<T>) -> DVector<T> {
    let inv = T::from_real(1.0 / a.ncols().max(1) as f64);
    a.column_sum() * inv
}

/// Subtract the column mean from every column.
pub fn center<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    ensure_finite(a)?;
    if a.ncols() == 0 {
        return Err(Error::Empty {
            rows: a.nrows(),
            cols: 0,
        });
    }
    let mean = column_mean(a);
    let mut out = a.clone();
    for mut col in out.column_iter_mut() {
        col -= &mean;
    }
    Ok(out)
}

/// `sqrt(max(0, |A|^2 + |B|^2 - 2 |A B*|_*))`: the closed-form value of
/// `min_W |W A - B|` over the unitary (or, for real input, orthogonal) group.
pub fn closed_form_distance<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<f64> {
    ensure_same_shape(a, b)?;
    let nuc = matcore::nuclear_norm(&(a * b.adjoint()))?;
    let na = frobenius_norm(a);
    let nb = frobenius_norm(b);
    Ok((na * na + nb * nb - 2.0 * nuc).max(0.0).sqrt())
}

/// Optimal `W = V U*` from `A B* = U D V*`.
fn optimal_rotation<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    ensure_same_shape(a, b)?;
    ensure_finite(a)?;
    ensure_finite(b)?;
    let f = matcore::svd(&(a * b.adjoint()))?;
    Ok(&f.v * f.u.adjoint())
}

fn align_linear<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<(f64, Alignment<T>)> {
    let rotation = optimal_rotation(a, b)?;
    let achieved_distance = matcore::frobenius_dist(&(&rotation * a), b)?;
    let alignment = Alignment {
        rotation,
        translation: DVector::zeros(a.nrows()),
        achieved_distance,
    };
    Ok((achieved_distance, alignment))
}

fn align_affine<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<(f64, Alignment<T>)> {
    ensure_same_shape(a, b)?;
    let rotation = optimal_rotation(&center(a)?, &center(b)?)?;
    let translation = column_mean(b) - &rotation * column_mean(a);
    let mut alignment = Alignment {
        rotation,
        translation,
        achieved_distance: 0.0,
    };
    alignment.achieved_distance = matcore::frobenius_dist(&alignment.apply(a), b)?;
    Ok((alignment.achieved_distance, alignment))
}

/// `d_U(n)(A, B)` and the unitary aligner.
pub fn dist_unitary(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, Alignment<matcore::Complex<f64>>)> {
    align_linear(a, b)
}

/// `d_O(n)(A, B)` and the orthogonal aligner (the orthogonal Procrustes problem).
pub fn dist_orthogonal(a: &RealMatrix, b: &RealMatrix) -> Result<(f64, Alignment<f64>)> {
    align_linear(a, b)
}

/// `d_E(n)(A, B)`; the aligner includes the optimal translation.
pub fn dist_euclidean(a: &RealMatrix, b: &RealMatrix) -> Result<(f64, Alignment<f64>)> {
    align_affine(a, b)
}

/// `d_F(n)(A, B)` for the complex euclidean group `U(n) x C^n`.
pub fn dist_complex_euclidean(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<(f64, Alignment<matcore::Complex<f64>>)> {
    align_affine(a, b)
}

/// Orbit distance for any supported group. Real configurations are promoted
/// for `U` and `F`; complex ones are rejected for `O` and `E`.
pub fn orbit_distance(kind: GroupKind, a: &Configuration, b: &Configuration) -> Result<f64> {
    match kind {
        GroupKind::Orthogonal | GroupKind::Euclidean => {
            let (Some(a), Some(b)) = (a.as_real(), b.as_real()) else {
                return Err(Error::FieldMismatch { group: kind.symbol() });
            };
            if kind == GroupKind::Orthogonal {
                dist_orthogonal(a, b).map(|r| r.0)
            } else {
                dist_euclidean(a, b).map(|r| r.0)
            }
        }
        GroupKind::Unitary => dist_unitary(&a.as_complex(), &b.as_complex()).map(|r| r.0),
        GroupKind::ComplexEuclidean => {
            dist_complex_euclidean(&a.as_complex(), &b.as_complex()).map(|r| r.0)
        }
    }
}
