//! Seeded experiments on random configurations.
//!
//! Every trial draws from its own stream `stream_rng(seed, domain, index)`, so
//! the outcome does not depend on scheduling. Trials run on the rayon pool and
//! are collected in index order before any aggregation.

use std::f64::consts::SQRT_2;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kdtree::KdTree;
use crate::matcore::RealMatrix;
use crate::metrics::{dist_euclidean, orbit_distance, GroupAction, GroupKind};
use crate::reduce::ReducedMap;
use crate::sampling::{self, stream_rng};
use crate::triangle::{gamma, psi_triangle, Triangle};
use crate::{Error, Result};

/// Pairs closer than this are redrawn.
pub const DEGENERATE_PAIR: f64 = 1e-12;

const DOMAIN_PAIRS: u32 = 1;
const DOMAIN_DATABASE: u32 = 2;
const DOMAIN_NOISE: u32 = 3;
const DOMAIN_SURVEY: u32 = 4;

const QUANTILES: [f64; 9] = [0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// The orbit distance itself.
    Exact,
    /// Side lengths of a triangle.
    Gamma,
    /// Cone coordinates of a triangle.
    PsiTriangle,
    /// Projected Gram-root features.
    Reduced,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::Exact => "exact",
            MapKind::Gamma => "gamma",
            MapKind::PsiTriangle => "psi_triangle",
            MapKind::Reduced => "reduced",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Distortion,
    Classify,
    LowerConstant,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Distortion => "distortion",
            ExperimentKind::Classify => "classify",
            ExperimentKind::LowerConstant => "lower-constant",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "distortion" => Ok(ExperimentKind::Distortion),
            "classify" => Ok(ExperimentKind::Classify),
            "lower-constant" => Ok(ExperimentKind::LowerConstant),
            _ => Err(format!("unknown experiment {s:?}")),
        }
    }
}

fn default_n_pairs() -> usize {
    100_000
}
fn default_db_size() -> usize {
    500
}
fn default_noise_draws() -> usize {
    20
}
fn default_noise_grid() -> Vec<f64> {
    vec![0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03]
}
fn default_group() -> GroupKind {
    GroupKind::Euclidean
}
fn default_n() -> usize {
    2
}
fn default_l() -> usize {
    3
}
fn default_bins() -> usize {
    50
}

/// Parameters of one experiment. Every field has a default, so `{}` is a
/// valid config file. An empty `maps` list means "all maps the experiment
/// supports".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
    #[serde(default = "default_db_size")]
    pub db_size: usize,
    #[serde(default = "default_noise_draws")]
    pub noise_draws: usize,
    #[serde(default = "default_noise_grid")]
    pub noise_grid: Vec<f64>,
    #[serde(default)]
    pub maps: Vec<MapKind>,
    #[serde(default = "default_group")]
    pub group: GroupKind,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_l")]
    pub l: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        ExperimentConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Check the config against `kind` and fill in the default map list.
    pub fn validated(&self, kind: ExperimentKind) -> Result<Self> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        let mut cfg = self.clone();
        let (allowed, defaults): (&[MapKind], &[MapKind]) = match kind {
            ExperimentKind::Distortion => (&[MapKind::Gamma, MapKind::PsiTriangle], &[MapKind::Gamma, MapKind::PsiTriangle]),
            ExperimentKind::Classify => (
                &[MapKind::Exact, MapKind::Gamma, MapKind::PsiTriangle],
                &[MapKind::Exact, MapKind::Gamma, MapKind::PsiTriangle],
            ),
            ExperimentKind::LowerConstant => (&[MapKind::Reduced], &[MapKind::Reduced]),
        };
        if cfg.maps.is_empty() {
            cfg.maps = defaults.to_vec();
        }
        cfg.maps.sort();
        cfg.maps.dedup();
        if let Some(m) = cfg.maps.iter().find(|m| !allowed.contains(m)) {
            return bad(format!("map {m} is not available for the {kind} experiment"));
        }
        if cfg.histogram_bins == 0 {
            return bad("histogram_bins must be at least 1".into());
        }
        match kind {
            ExperimentKind::Distortion | ExperimentKind::Classify => {
                if (cfg.group, cfg.n, cfg.l) != (GroupKind::Euclidean, 2, 3) {
                    return bad(format!(
                        "the {kind} experiment runs on planar triangles (group E, n=2, l=3), got {}, n={}, l={}",
                        cfg.group, cfg.n, cfg.l
                    ));
                }
            }
            ExperimentKind::LowerConstant => {
                if cfg.n == 0 || cfg.l == 0 {
                    return bad("n and l must be at least 1".into());
                }
            }
        }
        match kind {
            ExperimentKind::Distortion | ExperimentKind::LowerConstant => {
                if cfg.n_pairs == 0 {
                    return bad("n_pairs must be at least 1".into());
                }
            }
            ExperimentKind::Classify => {
                if cfg.db_size == 0 || cfg.noise_draws == 0 {
                    return bad("db_size and noise_draws must be at least 1".into());
                }
                if cfg.noise_grid.is_empty() {
                    return bad("noise_grid must not be empty".into());
                }
                if cfg.noise_grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
                    return bad("noise levels must be finite and nonnegative".into());
                }
                if cfg.noise_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("noise levels must be strictly increasing".into());
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub p: f64,
    pub value: f64,
}

/// Equal-width bins over `[lo, hi]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0u64; bins];
        if values.is_empty() {
            return Histogram { lo: 0.0, hi: 0.0, counts };
        }
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let b = if width > 0.0 { ((v - lo) / width) as usize } else { 0 };
            counts[b.min(bins - 1)] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + w * bin as f64, self.lo + w * (bin + 1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub map: MapKind,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (divisor `count - 1`).
    pub std: f64,
    /// `None` if some ratio is zero.
    pub log_mean: Option<f64>,
    pub log_std: Option<f64>,
    pub quantiles: Vec<Quantile>,
    pub histogram: Histogram,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

impl RatioStats {
    /// Panics on an empty slice.
    pub fn from_ratios(map: MapKind, ratios: &[f64], bins: usize) -> Self {
        assert!(!ratios.is_empty(), "no ratios");
        let mut sorted = ratios.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (mean, std) = mean_std(ratios);
        let (log_mean, log_std) = if sorted[0] > 0.0 {
            let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
            let (m, s) = mean_std(&logs);
            (Some(m), Some(s))
        } else {
            (None, None)
        };
        RatioStats {
            map,
            count: ratios.len(),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean,
            std,
            log_mean,
            log_std,
            quantiles: QUANTILES
                .iter()
                .map(|&p| Quantile {
                    p,
                    value: quantile(&sorted, p),
                })
                .collect(),
            histogram: Histogram::new(ratios, bins),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misclassification {
    pub map: MapKind,
    pub eps: f64,
    pub rate: f64,
    pub errors: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub ratios: Vec<RatioStats>,
    #[serde(default)]
    pub misclassification: Vec<Misclassification>,
}

impl ExperimentReport {
    pub fn ratio_stats(&self, map: MapKind) -> Option<&RatioStats> {
        self.ratios.iter().find(|s| s.map == map)
    }

    pub fn rate(&self, map: MapKind, eps: f64) -> Option<f64> {
        self.misclassification
            .iter()
            .find(|r| r.map == map && r.eps == eps)
            .map(|r| r.rate)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Histogram rows for ratio experiments, one row per (map, eps) otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.experiment == ExperimentKind::Classify {
            out.push_str("map,eps,rate,errors,trials\n");
            for r in &self.misclassification {
                let _ = writeln!(out, "{},{},{},{},{}", r.map, r.eps, r.rate, r.errors, r.trials);
            }
        } else {
            out.push_str("map,bin_lo,bin_hi,count\n");
            for s in &self.ratios {
                for (b, c) in s.histogram.counts.iter().enumerate() {
                    let (lo, hi) = s.histogram.edges(b);
                    let _ = writeln!(out, "{},{lo},{hi},{c}", s.map);
                }
            }
        }
        out
    }

    /// Plain-text table for the terminal.
    pub fn summary(&self) -> String {
        let mut out = format!("{} experiment, seed {}\n", self.experiment, self.config.seed);
        if !self.ratios.is_empty() {
            let _ = writeln!(out, "{:<14}{:>9}{:>10}{:>10}{:>10}{:>10}", "map", "count", "min", "max", "mean", "std");
            for s in &self.ratios {
                let _ = writeln!(
                    out,
                    "{:<14}{:>9}{:>10.4}{:>10.4}{:>10.4}{:>10.4}",
                    s.map.to_string(),
                    s.count,
                    s.min,
                    s.max,
                    s.mean,
                    s.std
                );
            }
        }
        if !self.misclassification.is_empty() {
            let _ = writeln!(out, "{:<14}{:>8}{:>10}{:>9}", "map", "eps", "rate", "errors");
            for r in &self.misclassification {
                let _ = writeln!(out, "{:<14}{:>8.4}{:>10.4}{:>9}", r.map.to_string(), r.eps, r.rate, r.errors);
            }
        }
        out
    }
}

fn random_triangle(rng: &mut impl Rng) -> Triangle {
    Triangle::new(sampling::real_gaussian(rng, 2, 3)).expect("gaussian samples are finite 2x3")
}

/// Two random triangles at orbit distance at least [`DEGENERATE_PAIR`].
fn triangle_pair(seed: u64, index: u64) -> (Triangle, Triangle, f64) {
    let mut rng = stream_rng(seed, DOMAIN_PAIRS, index);
    loop {
        let a = random_triangle(&mut rng);
        let b = random_triangle(&mut rng);
        let d = dist_euclidean(a.vertices(), b.vertices()).expect("finite triangles").0;
        if d >= DEGENERATE_PAIR {
            return (a, b, d);
        }
    }
}

/// Ratios `|map(A) - map(B)| / d_E(A, B)` over random planar triangle pairs
/// with standard normal vertex coordinates.
pub fn distortion_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.validated(ExperimentKind::Distortion)?;
    let maps = cfg.maps.clone();
    let per_trial: Vec<Vec<f64>> = (0..cfg.n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let (a, b, d) = triangle_pair(cfg.seed, i);
            maps.iter()
                .map(|m| match m {
                    MapKind::Gamma => gamma(&a).distance(&gamma(&b)) / d,
                    MapKind::PsiTriangle => psi_triangle(&a).distance(&psi_triangle(&b)) / d,
                    _ => unreachable!("validated"),
                })
                .collect()
        })
        .collect();
    let ratios = maps
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let column: Vec<f64> = per_trial.iter().map(|t| t[k]).collect();
            RatioStats::from_ratios(m, &column, cfg.histogram_bins)
        })
        .collect();
    Ok(ExperimentReport {
        experiment: ExperimentKind::Distortion,
        config: cfg,
        ratios,
        misclassification: Vec::new(),
    })
}

/// Index of the record nearest to `query` in exact orbit distance, ties to
/// the smallest index. Uses `|dPsi| / sqrt(2) <= d_E <= |dPsi|` to skip
/// records that cannot win.
fn exact_nearest(db: &[RealMatrix], psi_db: &[[f64; 3]], query: &RealMatrix, psi_q: [f64; 3]) -> usize {
    let mut order: Vec<(f64, usize)> = psi_db
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let d2: f64 = p.iter().zip(&psi_q).map(|(x, y)| (x - y) * (x - y)).sum();
            (d2.sqrt(), j)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best = (f64::INFINITY, usize::MAX);
    for &(upper, j) in &order {
        let lower = upper / SQRT_2;
        // slack covers rounding in both the features and the distance
        if lower > best.0 + 1e-9 * (1.0 + best.0) {
            break;
        }
        let d = dist_euclidean(query, &db[j]).expect("finite triangles").0;
        if d < best.0 || (d == best.0 && j < best.1) {
            best = (d, j);
        }
    }
    best.1
}

/// Nearest-record classification of noisy copies of database triangles.
///
/// For draw `k` of triangle `j` the noise is `eps * Z` with `Z` a fixed
/// standard normal 2x3 matrix, so every noise level sees the same directions.
pub fn classification_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.validated(ExperimentKind::Classify)?;
    let db: Vec<RealMatrix> = (0..cfg.db_size as u64)
        .map(|j| random_triangle(&mut stream_rng(cfg.seed, DOMAIN_DATABASE, j)).into_matrix())
        .collect();
    let gamma_db: Vec<Vec<f64>> = db
        .iter()
        .map(|m| gamma(&Triangle::new(m.clone()).expect("valid")).to_array().to_vec())
        .collect();
    let psi_arr: Vec<[f64; 3]> = db
        .iter()
        .map(|m| psi_triangle(&Triangle::new(m.clone()).expect("valid")).to_array())
        .collect();
    let psi_db: Vec<Vec<f64>> = psi_arr.iter().map(|p| p.to_vec()).collect();
    let gamma_tree = KdTree::new(3, &gamma_db);
    let psi_tree = KdTree::new(3, &psi_db);
    let draws = cfg.noise_draws;
    let maps = cfg.maps.clone();
    let grid = cfg.noise_grid.clone();

    // errors[trial][eps][map] as 0/1
    let per_trial: Vec<Vec<Vec<bool>>> = (0..(cfg.db_size * draws) as u64)
        .into_par_iter()
        .map(|t| {
            let j = (t / draws as u64) as usize;
            let mut rng = stream_rng(cfg.seed, DOMAIN_NOISE, t);
            let z = RealMatrix::from_fn(2, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
            grid.iter()
                .map(|&eps| {
                    let q = &db[j] + &z * eps;
                    let tri = Triangle::new(q.clone()).expect("finite");
                    let psi_q = psi_triangle(&tri).to_array();
                    maps.iter()
                        .map(|m| {
                            let hit = match m {
                                MapKind::Exact => exact_nearest(&db, &psi_arr, &q, psi_q),
                                MapKind::Gamma => gamma_tree.nearest(&gamma(&tri).to_array(), 1)[0].0,
                                MapKind::PsiTriangle => psi_tree.nearest(&psi_q, 1)[0].0,
                                MapKind::Reduced => unreachable!("validated"),
                            };
                            hit != j
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let trials = per_trial.len();
    let mut rows = Vec::new();
    for (k, &map) in maps.iter().enumerate() {
        for (e, &eps) in grid.iter().enumerate() {
            let errors = per_trial.iter().filter(|t| t[e][k]).count();
            rows.push(Misclassification {
                map,
                eps,
                rate: errors as f64 / trials as f64,
                errors,
                trials,
            });
        }
    }
    Ok(ExperimentReport {
        experiment: ExperimentKind::Classify,
        config: cfg,
        ratios: Vec::new(),
        misclassification: rows,
    })
}

/// Ratios `|reduced(A) - reduced(B)| / d_G(A, B)` over random pairs.
pub fn lower_constant_survey(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.validated(ExperimentKind::LowerConstant)?;
    let map = ReducedMap::new(GroupAction::new(cfg.group, cfg.n), cfg.l)?;
    let kind = cfg.group;
    let ratios: Vec<f64> = (0..cfg.n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, DOMAIN_SURVEY, i);
            loop {
                let a = sampling::configuration(&mut rng, kind, cfg.n, cfg.l);
                let b = sampling::configuration(&mut rng, kind, cfg.n, cfg.l);
                let d = orbit_distance(kind, &a, &b)?;
                if d >= DEGENERATE_PAIR {
                    return Ok(map.embed(&a)?.distance(&map.embed(&b)?) / d);
                }
            }
        })
        .collect::<Result<_>>()?;
    let stats = RatioStats::from_ratios(MapKind::Reduced, &ratios, cfg.histogram_bins);
    Ok(ExperimentReport {
        experiment: ExperimentKind::LowerConstant,
        config: cfg,
        ratios: vec![stats],
        misclassification: Vec::new(),
    })
}

/// Convenience wrapper for the survey with explicit parameters.
pub fn survey(group: GroupKind, n: usize, l: usize, n_pairs: usize, seed: u64) -> Result<ExperimentReport> {
    lower_constant_survey(&ExperimentConfig {
        seed,
        n_pairs,
        group,
        n,
        l,
        ..Default::default()
    })
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::Distortion => distortion_experiment(cfg),
        ExperimentKind::Classify => classification_experiment(cfg),
        ExperimentKind::LowerConstant => lower_constant_survey(cfg),
    }
}
