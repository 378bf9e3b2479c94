//! Side lengths are invariant but not bi-Lipschitz; the cone coordinates are.
//!
//! cargo run --example triangle_counterexample

use orbit_features::metrics::dist_euclidean;
use orbit_features::triangle::{gamma, gamma_counterexample, psi_triangle, triangle_from_psi, PsiCoords};

fn main() -> orbit_features::Result<()> {
    println!("{:>8} {:>14} {:>14} {:>14}", "eps", "d_E", "gamma ratio", "psi ratio");
    for eps in [1e-1 / 2.0, 1e-2, 1e-3, 1e-4] {
        let (a, b, ratio) = gamma_counterexample(eps)?;
        let (d, _) = dist_euclidean(a.vertices(), b.vertices())?;
        let psi_ratio = psi_triangle(&a).distance(&psi_triangle(&b)) / d;
        println!("{eps:>8.0e} {d:>14.6e} {ratio:>14.6e} {psi_ratio:>14.6}");
    }
    println!("gamma ratio / eps tends to 9 sqrt(2) / (2 sqrt(6)) = {:.6}", 9.0 * 2f64.sqrt() / (2.0 * 6f64.sqrt()));

    // every point of the cone z >= sqrt(p^2 + q^2) is a triangle
    let c = PsiCoords { p: 0.3, q: -0.4, z: 1.0 };
    let t = triangle_from_psi(&c)?;
    println!("triangle for {c:?}:\n{:.6}", t.vertices());
    println!("its side lengths {:?}", gamma(&t));
    Ok(())
}
