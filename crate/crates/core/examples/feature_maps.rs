//! Invariant features and the sqrt(2) distortion sandwich.
//!
//! cargo run --example feature_maps

use orbit_features::embed::{feature_dim, features};
use orbit_features::metrics::orbit_distance;
use orbit_features::sampling::{configuration, random_group_action, stream_rng};
use orbit_features::GroupKind;

fn main() -> orbit_features::Result<()> {
    let (n, l) = (3, 5);
    for kind in GroupKind::ALL {
        let mut rng = stream_rng(1, 0, kind as u64);
        let a = configuration(&mut rng, kind, n, l);
        let b = configuration(&mut rng, kind, n, l);
        let moved = random_group_action(&mut rng, kind, &a);

        let fa = features(kind, &a)?;
        let drift = fa.distance(&features(kind, &moved)?);
        let d = orbit_distance(kind, &a, &b)?;
        let f = fa.distance(&features(kind, &b)?);
        println!(
            "{kind}: {} coordinates, invariance drift {drift:.1e}, d = {d:.4}, |f(a) - f(b)| = {f:.4}, ratio {:.4}",
            feature_dim(kind, l),
            f / d
        );
    }

    // the worst observed ratio over many pairs stays within [1, sqrt(2)]
    let kind = GroupKind::Euclidean;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..2000 {
        let mut rng = stream_rng(2, 0, i);
        let a = configuration(&mut rng, kind, 2, 4);
        let b = configuration(&mut rng, kind, 2, 4);
        let r = features(kind, &a)?.distance(&features(kind, &b)?) / orbit_distance(kind, &a, &b)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    println!("E(2) on 4 points, 2000 pairs: ratio in [{lo:.4}, {hi:.4}], bound sqrt(2) = {:.4}", 2f64.sqrt());
    Ok(())
}
