//! Planar triangles under `E(2)`.
//!
//! Two invariants are compared here. The side-length map `gamma` separates
//! orbits and is `sqrt(3)`-Lipschitz, but it is not bi-Lipschitz: the family in
//! [`gamma_counterexample`] drives `|gamma(A) - gamma(B)| / d_E(A, B)` to zero.
//! The three-coordinate map [`psi_triangle`] is the centered Gram-root feature
//! written in an orthonormal basis adapted to triangles; it is isometric to
//! `psi` and so inherits the `[1, sqrt(2)]` distortion bounds. Its image is the
//! cone `z >= 0, p^2 + q^2 <= z^2`.

use std::f64::consts::SQRT_2;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::matcore::{ensure_finite, RealMatrix};
use crate::metrics::dist_euclidean;
use crate::{Error, Result};

/// Three points in the plane, stored as the columns of a `2 x 3` matrix.
/// Degenerate (collinear or coincident) triangles are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangle(RealMatrix);

impl Triangle {
    pub fn new(vertices: RealMatrix) -> Result<Self> {
        if vertices.shape() != (2, 3) {
            return Err(Error::ShapeMismatch {
                left: (2, 3),
                right: vertices.shape(),
            });
        }
        ensure_finite(&vertices)?;
        Ok(Self(vertices))
    }

    pub fn from_points(points: [[f64; 2]; 3]) -> Result<Self> {
        Self::new(RealMatrix::from_fn(2, 3, |i, j| points[j][i]))
    }

    pub fn vertices(&self) -> &RealMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.0
    }

    pub fn vertex(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.0[(0, i)], self.0[(1, i)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideLengths {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl SideLengths {
    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn distance(&self, other: &SideLengths) -> f64 {
        euclid3(self.to_array(), other.to_array())
    }

    /// Nonnegative lengths obeying all three triangle inequalities.
    pub fn in_cone(&self, tol: f64) -> bool {
        let [a, b, c] = self.to_array();
        [a, b, c, a + b - c, b + c - a, c + a - b]
            .iter()
            .all(|&x| x >= -tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiCoords {
    pub p: f64,
    pub q: f64,
    pub z: f64,
}

impl PsiCoords {
    pub fn to_array(self) -> [f64; 3] {
        [self.p, self.q, self.z]
    }

    pub fn distance(&self, other: &PsiCoords) -> f64 {
        euclid3(self.to_array(), other.to_array())
    }

    /// `z >= -1e-12` and `p^2 + q^2 <= z^2 (1 + rel_tol)`.
    pub fn in_cone(&self, rel_tol: f64) -> bool {
        self.z >= -1e-12 && self.p * self.p + self.q * self.q <= self.z * self.z * (1.0 + rel_tol)
    }
}

fn euclid3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `(d(a2, a3), d(a3, a1), d(a1, a2))`.
pub fn gamma(t: &Triangle) -> SideLengths {
    let (a1, a2, a3) = (t.vertex(0), t.vertex(1), t.vertex(2));
    SideLengths {
        x1: (a2 - a3).norm(),
        x2: (a3 - a1).norm(),
        x3: (a1 - a2).norm(),
    }
}

/// Columns `(a2 - a1)/sqrt(2)` and `(2 a3 - a1 - a2)/sqrt(6)`: the centered
/// triangle expressed in an orthonormal basis of `1^perp`.
fn reduced_frame(t: &Triangle) -> (Vector2<f64>, Vector2<f64>) {
    let (a1, a2, a3) = (t.vertex(0), t.vertex(1), t.vertex(2));
    ((a2 - a1) / SQRT_2, (2.0 * a3 - a1 - a2) / 6f64.sqrt())
}

/// Entries `(s11, s12, s22)` of `sqrt(G)` for the `2 x 2` Gram matrix
/// `G = [u v]^T [u v]`, via `sqrt(G) = (G + |det| I) / sqrt(tr G + 2 |det|)`
/// with `|det| = |det [u v]|`.
fn gram_root_2x2(u: Vector2<f64>, v: Vector2<f64>) -> (f64, f64, f64) {
    let (g11, g12, g22) = (u.dot(&u), u.dot(&v), v.dot(&v));
    let det = (u.x * v.y - u.y * v.x).abs();
    let denom = (g11 + g22 + 2.0 * det).sqrt();
    if denom == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    ((g11 + det) / denom, g12 / denom, (g22 + det) / denom)
}

/// The cone coordinates `((P1 - P2)/sqrt(2), P3, (P1 + P2)/sqrt(2))` where
/// `[[P1, P3/sqrt(2)], [P3/sqrt(2), P2]]` is the square root of the Gram matrix
/// of the centered triangle.
pub fn psi_triangle(t: &Triangle) -> PsiCoords {
    let (u, v) = reduced_frame(t);
    let (s11, s12, s22) = gram_root_2x2(u, v);
    let psi3 = SQRT_2 * s12;
    PsiCoords {
        p: (s11 - s22) / SQRT_2,
        q: psi3,
        z: (s11 + s22) / SQRT_2,
    }
}

/// A centered triangle with the given cone coordinates. The reduced frame is
/// taken to be the (symmetric) square root itself.
pub fn triangle_from_psi(c: &PsiCoords) -> Result<Triangle> {
    if !c.in_cone(1e-12) || !c.p.is_finite() || !c.q.is_finite() || !c.z.is_finite() {
        return Err(Error::OutOfRange(format!(
            "({}, {}, {}) is outside the cone z >= 0, p^2 + q^2 <= z^2",
            c.p, c.q, c.z
        )));
    }
    let s11 = (c.z + c.p) / SQRT_2;
    let s22 = (c.z - c.p) / SQRT_2;
    let s12 = c.q / SQRT_2;
    let u = Vector2::new(s11, s12);
    let v = Vector2::new(s12, s22);
    let a3 = v * 6f64.sqrt() / 3.0;
    let a2 = (-a3 + SQRT_2 * u) / 2.0;
    let a1 = (-a3 - SQRT_2 * u) / 2.0;
    Triangle::from_points([[a1.x, a1.y], [a2.x, a2.y], [a3.x, a3.y]])
}

/// The flat triangle `A = [[1, 0, -1], [0, 0, 0]]` and its perturbation
/// `B = [[1, 0, -1], [-eps, 2 eps, -eps]]`, with the ratio
/// `|gamma(A) - gamma(B)| / d_E(A, B)`, which behaves like
/// `9 sqrt(2) / (2 sqrt(6)) eps` as `eps -> 0`.
pub fn gamma_counterexample(eps: f64) -> Result<(Triangle, Triangle, f64)> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::OutOfRange(format!("eps = {eps} not in (0, 0.1)")));
    }
    let a = Triangle::new(RealMatrix::from_row_slice(2, 3, &[1.0, 0.0, -1.0, 0.0, 0.0, 0.0]))?;
    let b = Triangle::new(RealMatrix::from_row_slice(
        2,
        3,
        &[1.0, 0.0, -1.0, -eps, 2.0 * eps, -eps],
    ))?;
    let (d, _) = dist_euclidean(a.vertices(), b.vertices())?;
    let ratio = gamma(&a).distance(&gamma(&b)) / d;
    Ok((a, b, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::psi;
    use crate::matcore::psd_sqrt;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn equilateral(s: f64) -> Triangle {
        let h = s * 3f64.sqrt() / 2.0;
        Triangle::from_points([[0.0, 0.0], [s, 0.0], [s / 2.0, h]]).unwrap()
    }

    #[test]
    fn gamma_of_the_flat_pair() {
        let eps = 0.01;
        let (a, b, _) = gamma_counterexample(eps).unwrap();
        let g = gamma(&a);
        assert_eq!(g.to_array(), [1.0, 2.0, 1.0]);
        let side = (1.0 + 9.0 * eps * eps).sqrt();
        let h = gamma(&b).to_array();
        assert!((h[0] - side).abs() < 1e-15);
        assert!((h[1] - 2.0).abs() < 1e-15);
        assert!((h[2] - side).abs() < 1e-15);
    }

    #[test]
    fn coincident_vertices() {
        let t = Triangle::from_points([[1.0, 2.0]; 3]).unwrap();
        assert_eq!(gamma(&t).to_array(), [0.0, 0.0, 0.0]);
        assert_eq!(psi_triangle(&t).to_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn equilateral_sits_on_the_axis() {
        let c = psi_triangle(&equilateral(2.5));
        assert!(c.p.abs() < 1e-14);
        assert!(c.q.abs() < 1e-14);
        assert!((c.z - 2.5).abs() < 1e-14);
    }

    #[test]
    fn counterexample_ratio_vanishes() {
        let (_, _, r1) = gamma_counterexample(1e-3).unwrap();
        let want = 9.0 * SQRT_2 / (2.0 * 6f64.sqrt()) * 1e-3;
        assert!((r1 - want).abs() < 0.01 * want);
        assert!((r1 - 2.598e-3).abs() < 0.01 * 2.598e-3);
        for eps in [1e-2, 1e-3] {
            let (_, _, r) = gamma_counterexample(eps).unwrap();
            let (_, _, half) = gamma_counterexample(eps / 2.0).unwrap();
            assert!(half < r);
        }
        assert!(matches!(gamma_counterexample(0.0), Err(Error::OutOfRange(_))));
        assert!(matches!(gamma_counterexample(0.2), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn closed_form_root_matches_eigen_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t = Triangle::new(sampling::real_gaussian(&mut rng, 2, 3)).unwrap();
            let (u, v) = reduced_frame(&t);
            let g = RealMatrix::from_row_slice(2, 2, &[u.dot(&u), u.dot(&v), u.dot(&v), v.dot(&v)]);
            let r = psd_sqrt(&g, 1e-9 * g.norm()).unwrap();
            let (s11, s12, s22) = gram_root_2x2(u, v);
            assert!((r[(0, 0)] - s11).abs() < 1e-9);
            assert!((r[(0, 1)] - s12).abs() < 1e-9);
            assert!((r[(1, 1)] - s22).abs() < 1e-9);
        }
    }

    #[test]
    fn psi_coords_are_isometric_to_psi() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let a = Triangle::new(sampling::real_gaussian(&mut rng, 2, 3)).unwrap();
            let b = Triangle::new(sampling::real_gaussian(&mut rng, 2, 3)).unwrap();
            let ca = psi_triangle(&a);
            let cb = psi_triangle(&b);
            assert!(ca.in_cone(1e-10) && cb.in_cone(1e-10));
            let full = psi(a.vertices()).unwrap().1.distance(&psi(b.vertices()).unwrap().1);
            assert!((ca.distance(&cb) - full).abs() < 1e-10);
        }
    }

    #[test]
    fn cone_points_are_reached() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z: f64 = rng.random_range(0.0..3.0);
            let rho = z * rng.random_range(0.0..1.0_f64).sqrt();
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let c = PsiCoords { p: rho * th.cos(), q: rho * th.sin(), z };
            let t = triangle_from_psi(&c).unwrap();
            assert!(psi_triangle(&t).distance(&c) <= 1e-6);
        }
        let outside = PsiCoords { p: 2.0, q: 0.0, z: 1.0 };
        assert!(triangle_from_psi(&outside).is_err());
    }

    #[test]
    fn gamma_is_covariant_under_cyclic_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = sampling::real_gaussian(&mut rng, 2, 3);
        let t = Triangle::new(m.clone()).unwrap();
        let rolled = Triangle::new(RealMatrix::from_columns(&[m.column(1), m.column(2), m.column(0)])).unwrap();
        let g = gamma(&t).to_array();
        let h = gamma(&rolled).to_array();
        assert_eq!([g[1], g[2], g[0]], h);
        assert!(gamma(&t).in_cone(1e-12));
    }

    #[test]
    fn rejects_wrong_shape() {
        assert!(Triangle::new(RealMatrix::zeros(3, 3)).is_err());
    }
}
