//! Dimension reduction of the Gram-root features.
//!
//! Identify `l x l` matrices with polynomials in `x, y` of degree `< l` in each
//! variable (entry `(a, b)` is the coefficient of `x^a y^b`). The subspace
//! `W_r` of polynomials divisible by `(x - y)^r` has dimension `(l - r)^2` and
//! meets the variety of rank `<= r` matrices only at zero (a Wronskian
//! argument). Since `phi(A) - phi(B)` has rank at most `2n`, projecting the
//! features orthogonally onto `W_{2n}^perp` loses no injectivity and keeps the
//! map bi-Lipschitz, while the image shrinks to `n(2l - 2n + 1)` real
//! dimensions in the symmetric case and `4n(l - n)` in the Hermitian case.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::embed::{self, FeatureVector};
use crate::matcore::{hermitian_deviation, ComplexMatrix, RealMatrix, TAU_HERM};
use crate::metrics::{Configuration, GroupAction, GroupKind};
use crate::{Error, Result};

/// Residual norm (relative to the input vector) below which Gram-Schmidt
/// treats a vector as dependent.
const RANK_TOL: f64 = 1e-8;

pub type ReducedFeature = FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    /// Real symmetric matrices, Frobenius inner product.
    Symmetric,
    /// Hermitian matrices as a real inner-product space, `Re tr(A B*)`.
    Hermitian,
}

/// Orthonormal basis of `rho_r(ambient)`, the projection of the ambient space
/// onto `W_r^perp`.
///
/// Basis vectors are flattened row-major: `l^2` entries for symmetric
/// matrices, `2 l^2` (real parts, then imaginary parts) for Hermitian ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducerBasis {
    pub r: usize,
    pub ell: usize,
    pub ambient: Ambient,
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficient matrices of `(x - y)^r x^i y^j` for `0 <= i, j < l - r`.
pub fn build_w_basis(ell: usize, r: usize) -> Result<Vec<RealMatrix>> {
    if r == 0 || r > ell {
        return Err(Error::InvalidRank { ell, r });
    }
    let m = ell - r;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let mut w = RealMatrix::zeros(ell, ell);
            for k in 0..=r {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                w[(r - k + i, k + j)] += sign * binomial(r, k);
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// Modified Gram-Schmidt, two passes per vector; dependent vectors are dropped.
fn orthonormalize(vectors: impl IntoIterator<Item = DVector<f64>>) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let rest = v.norm();
        if rest > RANK_TOL * scale {
            basis.push(v / rest);
        }
    }
    basis
}

fn remove_components(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let p = q.dot(v);
            v.axpy(-p, q, 1.0);
        }
    }
}

fn flat_real(m: &RealMatrix) -> DVector<f64> {
    let l = m.ncols();
    DVector::from_fn(m.len(), |k, _| m[(k / l, k % l)])
}

fn ambient_basis(ell: usize, ambient: Ambient) -> Vec<DVector<f64>> {
    let sq = ell * ell;
    let width = match ambient {
        Ambient::Symmetric => sq,
        Ambient::Hermitian => 2 * sq,
    };
    let mut out = Vec::new();
    for i in 0..ell {
        for j in i..ell {
            let mut v = DVector::zeros(width);
            if i == j {
                v[i * ell + i] = 1.0;
            } else {
                v[i * ell + j] = FRAC_1_SQRT_2;
                v[j * ell + i] = FRAC_1_SQRT_2;
            }
            out.push(v);
            if ambient == Ambient::Hermitian && i != j {
                let mut v = DVector::zeros(width);
                v[sq + i * ell + j] = FRAC_1_SQRT_2;
                v[sq + j * ell + i] = -FRAC_1_SQRT_2;
                out.push(v);
            }
        }
    }
    out
}

/// `n(2l - 2n + 1)` for symmetric, `4n(l - n)` for Hermitian ambients.
pub fn expected_dim(n: usize, ell: usize, ambient: Ambient) -> usize {
    match ambient {
        Ambient::Symmetric => n * (2 * ell + 1 - 2 * n),
        Ambient::Hermitian => 4 * n * (ell - n),
    }
}

/// Reducer for configurations of `n`-dimensional points with `l x l` feature
/// matrices, projecting away `W_{2n}`.
pub fn build_reducer(n: usize, ell: usize, ambient: Ambient) -> Result<ReducerBasis> {
    if n == 0 || ell < 2 * n {
        return Err(Error::DimensionHypothesis { n, ell });
    }
    let r = 2 * n;
    let sq = ell * ell;
    let w = build_w_basis(ell, r)?;
    let w_real = w.iter().flat_map(|m| {
        let v = flat_real(m);
        match ambient {
            Ambient::Symmetric => vec![v],
            Ambient::Hermitian => {
                let mut re = DVector::zeros(2 * sq);
                re.rows_mut(0, sq).copy_from(&v);
                let mut im = DVector::zeros(2 * sq);
                im.rows_mut(sq, sq).copy_from(&v);
                vec![re, im]
            }
        }
    });
    let w_basis = orthonormalize(w_real);
    let projected = ambient_basis(ell, ambient).into_iter().map(|mut v| {
        remove_components(&mut v, &w_basis);
        v
    });
    let basis: Vec<Vec<f64>> = orthonormalize(projected)
        .into_iter()
        .map(|v| v.iter().copied().collect())
        .collect();
    Ok(ReducerBasis {
        r,
        ell,
        ambient,
        dim: basis.len(),
        basis,
    })
}

impl ReducerBasis {
    fn coords(&self, flat: &[f64]) -> ReducedFeature {
        let coords = self
            .basis
            .iter()
            .map(|b| b.iter().zip(flat).map(|(x, y)| x * y).sum())
            .collect();
        FeatureVector::new(coords)
    }

    fn check_square(&self, shape: (usize, usize)) -> Result<()> {
        if shape != (self.ell, self.ell) {
            return Err(Error::AmbientMismatch(format!(
                "expected {0}x{0} matrix, got {1}x{2}",
                self.ell, shape.0, shape.1
            )));
        }
        Ok(())
    }

    pub fn project_symmetric(&self, m: &RealMatrix) -> Result<ReducedFeature> {
        self.check_square(m.shape())?;
        let deviation = hermitian_deviation(m);
        if deviation > TAU_HERM {
            return Err(Error::AmbientMismatch(format!("not symmetric (deviation {deviation:.3e})")));
        }
        match self.ambient {
            Ambient::Symmetric => Ok(self.coords(flat_real(m).as_slice())),
            Ambient::Hermitian => self.project_hermitian(&crate::matcore::complexify(m)),
        }
    }

    pub fn project_hermitian(&self, m: &ComplexMatrix) -> Result<ReducedFeature> {
        self.check_square(m.shape())?;
        if self.ambient != Ambient::Hermitian {
            return Err(Error::AmbientMismatch("complex matrix for a symmetric reducer".into()));
        }
        let deviation = hermitian_deviation(m);
        if deviation > TAU_HERM {
            return Err(Error::AmbientMismatch(format!("not hermitian (deviation {deviation:.3e})")));
        }
        let l = self.ell;
        let sq = l * l;
        let mut flat = vec![0.0; 2 * sq];
        for i in 0..l {
            for j in 0..l {
                flat[i * l + j] = m[(i, j)].re;
                flat[sq + i * l + j] = m[(i, j)].im;
            }
        }
        Ok(self.coords(&flat))
    }

    /// Coordinates of the orthogonal projection of `m` onto `W_r^perp`.
    pub fn project(&self, m: &Configuration) -> Result<ReducedFeature> {
        match m {
            Configuration::Real(m) => self.project_symmetric(m),
            Configuration::Complex(m) => self.project_hermitian(m),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reducer basis serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// The reduced bi-Lipschitz map for one group and configuration size:
/// the matching full feature matrix followed by the projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedMap {
    pub group: GroupAction,
    pub ell: usize,
    pub basis: ReducerBasis,
}

impl ReducedMap {
    /// For `E` and `F` the feature matrix is the `(l-1) x (l-1)` block left
    /// after splitting off the `1` direction, so `l - 1 >= 2n` is required.
    pub fn new(group: GroupAction, ell: usize) -> Result<Self> {
        let n = group.n;
        let size = if group.kind.has_translations() {
            ell.checked_sub(1).ok_or(Error::DimensionHypothesis { n, ell })?
        } else {
            ell
        };
        let ambient = if group.kind.is_complex() {
            Ambient::Hermitian
        } else {
            Ambient::Symmetric
        };
        let basis = build_reducer(n, size, ambient)?;
        Ok(Self { group, ell, basis })
    }

    pub fn output_dim(&self) -> usize {
        self.basis.dim
    }

    pub fn embed(&self, a: &Configuration) -> Result<ReducedFeature> {
        let shape = a.shape();
        if shape != (self.group.n, self.ell) {
            return Err(Error::ShapeMismatch {
                left: (self.group.n, self.ell),
                right: shape,
            });
        }
        let kind = self.group.kind;
        match kind {
            GroupKind::Orthogonal | GroupKind::Euclidean => {
                let m = a.as_real().ok_or(Error::FieldMismatch { group: kind.symbol() })?;
                if kind == GroupKind::Orthogonal {
                    self.basis.project_symmetric(&embed::phi(m)?.0)
                } else {
                    self.basis.project_symmetric(&embed::translation_block(&embed::psi(m)?.0))
                }
            }
            GroupKind::Unitary => self.basis.project_hermitian(&embed::phi_c(&a.as_complex())?.0),
            GroupKind::ComplexEuclidean => {
                let m = embed::psi_c(&a.as_complex())?.0;
                self.basis.project_hermitian(&embed::translation_block(&m))
            }
        }
    }
}

/// One-shot reduced embedding; build a [`ReducedMap`] once when embedding many
/// configurations.
pub fn reduced_embed(group: GroupAction, a: &Configuration) -> Result<ReducedFeature> {
    ReducedMap::new(group, a.shape().1)?.embed(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::frobenius_norm;
    use crate::sampling;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rank(vectors: &[RealMatrix]) -> usize {
        if vectors.is_empty() {
            return 0;
        }
        let cols: Vec<DVector<f64>> = vectors.iter().map(flat_real).collect();
        DMatrix::from_columns(&cols).rank(1e-10)
    }

    #[test]
    fn full_rank_leaves_nothing() {
        assert!(build_w_basis(4, 4).unwrap().is_empty());
    }

    #[test]
    fn hand_expanded_square() {
        let w = build_w_basis(3, 2).unwrap();
        assert_eq!(w.len(), 1);
        let mut want = RealMatrix::zeros(3, 3);
        want[(2, 0)] = 1.0;
        want[(1, 1)] = -2.0;
        want[(0, 2)] = 1.0;
        assert_eq!(w[0], want);
    }

    #[test]
    fn basis_is_independent() {
        let w = build_w_basis(4, 2).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(rank(&w), 4);
        let w = build_w_basis(7, 3).unwrap();
        assert_eq!(rank(&w), 16);
    }

    #[test]
    fn invalid_ranks() {
        assert_eq!(build_w_basis(3, 0).unwrap_err(), Error::InvalidRank { ell: 3, r: 0 });
        assert_eq!(build_w_basis(3, 4).unwrap_err(), Error::InvalidRank { ell: 3, r: 4 });
        assert_eq!(
            build_reducer(2, 3, Ambient::Symmetric).unwrap_err(),
            Error::DimensionHypothesis { n: 2, ell: 3 }
        );
    }

    #[test]
    fn closed_under_transpose() {
        let w = build_w_basis(6, 2).unwrap();
        let r = rank(&w);
        let mut with_t = w.clone();
        with_t.extend(w.iter().map(|m| m.transpose()));
        assert_eq!(rank(&with_t), r);
    }

    #[test]
    fn small_reducer_dimensions() {
        assert_eq!(build_reducer(1, 2, Ambient::Symmetric).unwrap().dim, 3);
        assert_eq!(build_reducer(1, 3, Ambient::Symmetric).unwrap().dim, 5);
        assert_eq!(build_reducer(1, 3, Ambient::Hermitian).unwrap().dim, 8);
    }

    #[test]
    fn basis_is_orthonormal_and_serializes() {
        let b = build_reducer(1, 5, Ambient::Hermitian).unwrap();
        for (i, u) in b.basis.iter().enumerate() {
            for (j, v) in b.basis.iter().enumerate() {
                let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
        let back = ReducerBasis::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn projection_cases() {
        let b = build_reducer(1, 4, Ambient::Symmetric).unwrap();
        let zero = b.project_symmetric(&RealMatrix::zeros(4, 4)).unwrap();
        assert!(zero.coords.iter().all(|&c| c == 0.0));

        // a vector of the basis itself is fixed by the projection
        let v = &b.basis[2];
        let m = RealMatrix::from_row_slice(4, 4, v);
        let f = b.project_symmetric(&m).unwrap();
        assert!((f.norm() - frobenius_norm(&m)).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = sampling::real_gaussian(&mut rng, 4, 1);
            let w = sampling::real_gaussian(&mut rng, 4, 1);
            let m = &u * w.transpose() + &w * u.transpose();
            let f = b.project_symmetric(&m).unwrap();
            assert!(f.norm() > 1e-8 * m.norm());
            assert!(f.norm() <= m.norm() + 1e-12);
        }
    }

    #[test]
    fn projection_rejects_wrong_ambient() {
        let b = build_reducer(1, 3, Ambient::Symmetric).unwrap();
        let mut m = RealMatrix::identity(3, 3);
        m[(0, 1)] = 1.0;
        assert!(matches!(b.project_symmetric(&m), Err(Error::AmbientMismatch(_))));
        assert!(matches!(
            b.project_symmetric(&RealMatrix::identity(4, 4)),
            Err(Error::AmbientMismatch(_))
        ));
        assert!(matches!(
            b.project_hermitian(&ComplexMatrix::identity(3, 3)),
            Err(Error::AmbientMismatch(_))
        ));
    }

    #[test]
    fn reduced_maps_have_the_right_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1;
        let ell = 5;
        let cases = [
            (GroupKind::Orthogonal, n * (2 * ell - 2 * n + 1)),
            (GroupKind::Euclidean, n * (2 * ell - 2 * n - 1)),
            (GroupKind::Unitary, 4 * n * (ell - n)),
            (GroupKind::ComplexEuclidean, 4 * n * (ell - n - 1)),
        ];
        for (kind, dim) in cases {
            let a = sampling::configuration(&mut rng, kind, n, ell);
            let f = reduced_embed(GroupAction::new(kind, n), &a).unwrap();
            assert_eq!(f.ambient_dim(), dim, "{kind}");
            let g = sampling::random_group_action(&mut rng, kind, &a);
            let h = reduced_embed(GroupAction::new(kind, n), &g).unwrap();
            assert!(f.distance(&h) < 1e-9);
        }
        let err = ReducedMap::new(GroupAction::new(GroupKind::Euclidean, 2), 4).unwrap_err();
        assert!(matches!(err, Error::DimensionHypothesis { .. }));
    }
}
