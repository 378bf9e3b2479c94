//! Certified nearest-orbit search over a shape database.
//!
//! cargo run --example nearest_orbit

use orbit_features::sampling::{random_group_action, real_gaussian, stream_rng};
use orbit_features::search::{feature_nearest, linear_scan_nearest, verify, FeatureMap, ShapeDatabase};
use orbit_features::{Configuration, GroupAction, GroupKind};

fn main() -> orbit_features::Result<()> {
    let group = GroupAction::new(GroupKind::Euclidean, 2);
    let entries: Vec<_> = (0..2000u64)
        .map(|i| (format!("shape{i:04}"), Configuration::Real(real_gaussian(&mut stream_rng(1, 0, i), 2, 5))))
        .collect();
    let db = ShapeDatabase::build(group, 5, FeatureMap::Full, entries)?;
    println!("{} records, {} feature coordinates each", db.len(), db.feature_dim());

    // a moved and slightly perturbed copy of one record
    let mut rng = stream_rng(2, 0, 0);
    let target = db.get("shape1234").expect("present").matrix.clone();
    let Configuration::Real(moved) = random_group_action(&mut rng, group.kind, &target) else {
        unreachable!()
    };
    let query = Configuration::Real(moved + real_gaussian(&mut rng, 2, 5) * 0.01);

    for hit in feature_nearest(&db, &query, 3)? {
        let v = verify(&db, &hit, &query)?;
        println!(
            "{}  feature distance {:.4}  orbit distance {:.4}  certified within x{:.4}",
            v.id,
            v.embedded_distance,
            v.exact_orbit_distance.unwrap(),
            v.approximation_bound.unwrap()
        );
    }
    let best = linear_scan_nearest(&db, &query)?;
    println!("linear scan optimum: {} at {:.4}", best.id, best.exact_orbit_distance.unwrap());
    Ok(())
}
