//! Orbit distances under the four groups, with the aligning group element.
//!
//! cargo run --example procrustes_distance

use orbit_features::metrics::{dist_complex_euclidean, dist_euclidean, dist_orthogonal, dist_unitary};
use orbit_features::sampling::{random_group_action, stream_rng};
use orbit_features::{Configuration, GroupKind, RealMatrix};

fn main() -> orbit_features::Result<()> {
    let a = RealMatrix::from_row_slice(2, 4, &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    let mut rng = stream_rng(7, 0, 0);

    // a rotated, reflected and shifted copy of the unit square
    let Configuration::Real(b) = random_group_action(&mut rng, GroupKind::Euclidean, &Configuration::Real(a.clone()))
    else {
        unreachable!()
    };
    let (d, al) = dist_euclidean(&a, &b)?;
    println!("square vs moved square under E(2): {d:.3e}");
    println!("recovered rotation {:.6}", al.rotation);
    println!("recovered translation {:.6}", al.translation);

    // the shift is invisible to E(2) but not to O(2)
    let (d_o, _) = dist_orthogonal(&a, &b)?;
    println!("same pair under O(2): {d_o:.6}");

    let c = RealMatrix::from_row_slice(2, 4, &[0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    let (d, al) = dist_euclidean(&a, &c)?;
    println!("unit square vs 2x1 rectangle under E(2): {d:.6}");
    println!("  achieved by the aligner: {:.6}", (al.apply(&a) - &c).norm());

    // complex configurations: a global phase is a unitary transformation
    let z = orbit_features::sampling::complex_gaussian(&mut rng, 1, 5);
    let w = z.map(|x| x * orbit_features::matcore::Complex::from_polar(1.0, 0.7));
    println!("z vs e^(0.7i) z under U(1): {:.3e}", dist_unitary(&z, &w)?.0);
    let w_shift = w.add_scalar(orbit_features::matcore::Complex::new(3.0, -1.0));
    println!("plus a shift, under F(1): {:.3e}", dist_complex_euclidean(&z, &w_shift)?.0);
    Ok(())
}
