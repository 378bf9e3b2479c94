//! Random configurations and group elements.
//!
//! Every stream is derived from a master seed and a stream index, so callers
//! can draw trials in any order (or in parallel) and get identical samples.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::matcore::{Complex, ComplexMatrix, RealMatrix};
use crate::metrics::{Configuration, GroupKind};

/// Independent generator for `(seed, domain, index)`.
///
/// `domain` separates unrelated uses of the same master seed (database draws,
/// noise draws, ...); `index` is the trial number within a domain.
pub fn stream_rng(seed: u64, domain: u32, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(domain) << 56).rotate_left(3));
    rng.set_stream(index);
    rng
}

pub fn real_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> RealMatrix {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Real and imaginary parts independently standard normal.
pub fn complex_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Gaussian configuration over the field the group acts on.
pub fn configuration(rng: &mut impl Rng, kind: GroupKind, rows: usize, cols: usize) -> Configuration {
    if kind.is_complex() {
        Configuration::Complex(complex_gaussian(rng, rows, cols))
    } else {
        Configuration::Real(real_gaussian(rng, rows, cols))
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> RealMatrix {
    let qr = real_gaussian(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed unitary matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Apply a random element of `kind` (with a Gaussian translation for `E`/`F`).
pub fn random_group_action(rng: &mut impl Rng, kind: GroupKind, a: &Configuration) -> Configuration {
    let (n, l) = a.shape();
    match (kind, a) {
        (GroupKind::Orthogonal | GroupKind::Euclidean, Configuration::Real(m)) => {
            let mut out = random_orthogonal(rng, n) * m;
            if kind == GroupKind::Euclidean {
                let t = real_gaussian(rng, n, 1);
                for j in 0..l {
                    let mut col = out.column_mut(j);
                    col += &t.column(0);
                }
            }
            Configuration::Real(out)
        }
        _ => {
            let mut out = random_unitary(rng, n) * a.as_complex().into_owned();
            if kind.has_translations() {
                let t = complex_gaussian(rng, n, 1);
                for j in 0..l {
                    let mut col = out.column_mut(j);
                    col += &t.column(0);
                }
            }
            Configuration::Complex(out)
        }
    }
}
