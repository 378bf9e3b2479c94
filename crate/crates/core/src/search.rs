//! Nearest-orbit queries.
//!
//! If a feature map `f` satisfies `d_G(a, b) <= |f(a) - f(b)| <= C d_G(a, b)`,
//! the exact nearest neighbour of `f(query)` among the database features is a
//! `C`-approximate nearest orbit. With the full Gram-root maps `C = sqrt(2)`,
//! so the feature-space answer is certified without evaluating `d_G` against
//! every record. [`linear_scan_nearest`] computes the true answer for
//! comparison.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::{self, FeatureVector};
use crate::kdtree::KdTree;
use crate::metrics::{orbit_distance, Configuration, GroupAction, GroupKind};
use crate::reduce::ReducedMap;
use crate::triangle::{psi_triangle, Triangle};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMap {
    /// `phi`, `psi`, `phi_c` or `psi_c`, matching the group.
    Full,
    /// The full map followed by projection onto `W_{2n}^perp`.
    Reduced,
    /// The three cone coordinates of a planar triangle (`E`, `n = 2`, `l = 3`).
    Triangle,
}

impl fmt::Display for FeatureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMap::Full => "full",
            FeatureMap::Reduced => "reduced",
            FeatureMap::Triangle => "triangle",
        })
    }
}

impl FromStr for FeatureMap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(FeatureMap::Full),
            "reduced" => Ok(FeatureMap::Reduced),
            "triangle" => Ok(FeatureMap::Triangle),
            _ => Err(format!("unknown feature map {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub matrix: Configuration,
    pub feature: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub id: String,
    pub embedded_distance: f64,
    pub exact_orbit_distance: Option<f64>,
    /// Certified approximation factor of the feature-space answer; `None` when
    /// the map has no known lower Lipschitz constant.
    pub approximation_bound: Option<f64>,
}

/// Configurations of one shape `(n, l)` with their features and a k-d tree
/// over them. Records are kept sorted by id.
#[derive(Debug, Clone)]
pub struct ShapeDatabase {
    group: GroupAction,
    ell: usize,
    feature_map: FeatureMap,
    reducer: Option<ReducedMap>,
    records: Vec<Record>,
    index: KdTree,
}

impl ShapeDatabase {
    pub fn build(
        group: GroupAction,
        ell: usize,
        feature_map: FeatureMap,
        entries: impl IntoIterator<Item = (String, Configuration)>,
    ) -> Result<Self> {
        if feature_map == FeatureMap::Triangle && (group.kind, group.n, ell) != (GroupKind::Euclidean, 2, 3) {
            return Err(Error::FeatureMapMismatch(format!(
                "triangle features need E(2) on 2x3 configurations, got {}({}) with l={ell}",
                group.kind, group.n
            )));
        }
        let reducer = match feature_map {
            FeatureMap::Reduced => Some(ReducedMap::new(group, ell)?),
            _ => None,
        };
        let mut db = ShapeDatabase {
            group,
            ell,
            feature_map,
            reducer,
            records: Vec::new(),
            index: KdTree::new(0, &[]),
        };
        let mut records = Vec::new();
        for (id, matrix) in entries {
            let feature = db.embed(&matrix)?;
            records.push(Record { id, matrix, feature });
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.clone()));
        }
        let points: Vec<Vec<f64>> = records.iter().map(|r| r.feature.coords.clone()).collect();
        db.index = KdTree::new(db.feature_dim(), &points);
        db.records = records;
        Ok(db)
    }

    pub fn group(&self) -> GroupAction {
        self.group
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.group.n, self.ell)
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.feature_map
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn feature_dim(&self) -> usize {
        match (self.feature_map, &self.reducer) {
            (FeatureMap::Triangle, _) => 3,
            (FeatureMap::Reduced, Some(r)) => r.output_dim(),
            _ => embed::feature_dim(self.group.kind, self.ell),
        }
    }

    /// `sqrt(2)` for the full and triangle maps.
    pub fn approximation_bound(&self) -> Option<f64> {
        match self.feature_map {
            FeatureMap::Full | FeatureMap::Triangle => Some(SQRT_2),
            FeatureMap::Reduced => None,
        }
    }

    /// Features of a configuration under this database's map.
    pub fn embed(&self, m: &Configuration) -> Result<FeatureVector> {
        if m.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: m.shape(),
            });
        }
        if !self.group.kind.is_complex() && !m.is_real() {
            return Err(Error::FeatureMapMismatch(format!(
                "complex configuration for real group {}",
                self.group.kind
            )));
        }
        match self.feature_map {
            FeatureMap::Full => embed::features(self.group.kind, m),
            FeatureMap::Reduced => self
                .reducer
                .as_ref()
                .expect("reduced database carries its reducer")
                .embed(m),
            FeatureMap::Triangle => {
                let t = Triangle::new(m.as_real().expect("checked real").clone())?;
                Ok(FeatureVector::new(psi_triangle(&t).to_array().to_vec()))
            }
        }
    }
}

/// The record with the smallest exact orbit distance; ties go to the
/// lexicographically smallest id.
pub fn linear_scan_nearest(db: &ShapeDatabase, query: &Configuration) -> Result<QueryResult> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let qf = db.embed(query)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, rec) in db.records.iter().enumerate() {
        let d = orbit_distance(db.group.kind, query, &rec.matrix)?;
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    let (i, d) = best.expect("nonempty database");
    let rec = &db.records[i];
    Ok(QueryResult {
        id: rec.id.clone(),
        embedded_distance: qf.distance(&rec.feature),
        exact_orbit_distance: Some(d),
        approximation_bound: Some(1.0),
    })
}

/// The `k` records nearest in feature space (all records if `k` exceeds the
/// database size), nondecreasing in feature distance, ties by id.
pub fn feature_nearest(db: &ShapeDatabase, query: &Configuration, k: usize) -> Result<Vec<QueryResult>> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if k == 0 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    let qf = db.embed(query)?;
    Ok(db
        .index
        .nearest(&qf.coords, k)
        .into_iter()
        .map(|(i, d)| QueryResult {
            id: db.records[i].id.clone(),
            embedded_distance: d,
            exact_orbit_distance: None,
            approximation_bound: db.approximation_bound(),
        })
        .collect())
}

/// Fill in the exact orbit distance between `query` and the result's record.
pub fn verify(db: &ShapeDatabase, result: &QueryResult, query: &Configuration) -> Result<QueryResult> {
    let rec = db
        .get(&result.id)
        .ok_or_else(|| Error::UnknownId(result.id.clone()))?;
    let d = orbit_distance(db.group.kind, query, &rec.matrix)?;
    Ok(QueryResult {
        exact_orbit_distance: Some(d),
        ..result.clone()
    })
}
