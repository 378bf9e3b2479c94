//! Reduced features: fewer coordinates, same invariance and upper bound.
//!
//! cargo run --example dimension_reduction

use orbit_features::bench::survey;
use orbit_features::embed::feature_dim;
use orbit_features::reduce::{build_reducer, Ambient, ReducedMap};
use orbit_features::sampling::{configuration, random_group_action, stream_rng};
use orbit_features::{GroupAction, GroupKind};

fn main() -> orbit_features::Result<()> {
    println!("{:>3} {:>3} {:>10} {:>10}", "n", "l", "full", "reduced");
    for (n, l) in [(1, 4), (1, 8), (2, 6), (2, 10), (3, 10)] {
        let r = build_reducer(n, l, Ambient::Symmetric)?;
        println!("{n:>3} {l:>3} {:>10} {:>10}", feature_dim(GroupKind::Orthogonal, l), r.dim);
    }

    let group = GroupAction::new(GroupKind::Unitary, 2);
    let map = ReducedMap::new(group, 6)?;
    let mut rng = stream_rng(5, 0, 0);
    let a = configuration(&mut rng, group.kind, 2, 6);
    let moved = random_group_action(&mut rng, group.kind, &a);
    let drift = map.embed(&a)?.distance(&map.embed(&moved)?);
    println!(
        "U(2) on 6 points: {} -> {} coordinates, invariance drift {drift:.1e}",
        feature_dim(group.kind, 6),
        map.output_dim()
    );

    // the lower constant is not known in closed form; estimate it
    let report = survey(GroupKind::Orthogonal, 1, 4, 10_000, 3)?;
    let s = &report.ratios[0];
    println!(
        "O(1) on 4 points, {} pairs: reduced/exact ratio min {:.4}, median {:.4}, max {:.4}",
        s.count, s.min, s.quantiles[4].value, s.max
    );

    // the basis can be stored and reloaded
    let json = map.basis.to_json();
    println!("serialized reducer basis: {} bytes", json.len());
    Ok(())
}
