//! End-to-end acceptance checks at the documented tolerances.
//!
//! Runs without the libtest harness so every check prints exactly one
//! `PASS`/`FAIL` line; the process fails if any check fails.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use orbit_features::bench::{self, ExperimentConfig, ExperimentKind, MapKind};
use orbit_features::embed;
use orbit_features::matcore;
use orbit_features::metrics::{self, orbit_distance};
use orbit_features::reduce::{build_reducer, build_w_basis, Ambient, ReducedMap};
use orbit_features::sampling::{self, stream_rng};
use orbit_features::search::{self, FeatureMap, ShapeDatabase};
use orbit_features::triangle::gamma_counterexample;
use orbit_features::{Configuration, GroupAction, GroupKind, RealMatrix};
use rand::Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn sandwich() -> Check {
    let start = Instant::now();
    let cases = [
        (GroupKind::Orthogonal, 2, 3),
        (GroupKind::Orthogonal, 3, 5),
        (GroupKind::Euclidean, 2, 3),
        (GroupKind::Euclidean, 3, 6),
        (GroupKind::Unitary, 2, 3),
        (GroupKind::ComplexEuclidean, 2, 4),
    ];
    let mut worst_lo = f64::INFINITY;
    let mut worst_hi = f64::NEG_INFINITY;
    for (c, &(kind, n, l)) in cases.iter().enumerate() {
        for i in 0..10_000u64 {
            let mut rng = stream_rng(11, c as u32, i);
            let a = sampling::configuration(&mut rng, kind, n, l);
            let b = sampling::configuration(&mut rng, kind, n, l);
            let d = orbit_distance(kind, &a, &b).map_err(|e| e.to_string())?;
            let f = embed::features(kind, &a)
                .and_then(|fa| Ok(fa.distance(&embed::features(kind, &b)?)))
                .map_err(|e| e.to_string())?;
            ensure!(
                d - 1e-8 <= f && f <= SQRT_2 * d + 1e-8,
                "{kind}({n}), l={l}, pair {i}: d={d}, feature distance {f}"
            );
            worst_lo = worst_lo.min(f / d);
            worst_hi = worst_hi.max(f / d);
        }
    }
    let t = start.elapsed();
    ensure!(t <= Duration::from_secs(120), "took {t:?}");
    Ok(format!("6 x 10^4 pairs, ratios in [{worst_lo:.6}, {worst_hi:.6}], {t:.1?}"))
}

/// Minimum of |R A - B| over a grid of rotations and reflections.
fn o2_grid_min(a: &RealMatrix, b: &RealMatrix, points: usize) -> f64 {
    let per = points / 2;
    let mut best = f64::INFINITY;
    for k in 0..per {
        let th = 2.0 * PI * k as f64 / per as f64;
        let (s, c) = th.sin_cos();
        for refl in [1.0, -1.0] {
            // R = [[c, -s*refl], [s, c*refl]]: rotation times diag(1, refl)
            let mut sum = 0.0;
            for j in 0..a.ncols() {
                let (x, y) = (a[(0, j)], refl * a[(1, j)]);
                let u = c * x - s * y - b[(0, j)];
                let v = s * x + c * y - b[(1, j)];
                sum += u * u + v * v;
            }
            best = best.min(sum);
        }
    }
    best.sqrt()
}

fn procrustes() -> Check {
    let mut worst = 0.0f64;
    let mut worst_rel = 0.0f64;
    for i in 0..100u64 {
        let l = 2 + (i as usize % 5);
        let mut rng = stream_rng(12, 0, i);
        let a = sampling::real_gaussian(&mut rng, 2, l);
        let b = sampling::real_gaussian(&mut rng, 2, l);
        let (d, al) = metrics::dist_orthogonal(&a, &b).map_err(|e| e.to_string())?;
        let brute = o2_grid_min(&a, &b, 1_000_000);
        worst = worst.max((d - brute).abs());
        ensure!((d - brute).abs() <= 1e-4, "pair {i} (l={l}): d={d}, grid {brute}");
        let w = &al.rotation;
        ensure!(
            (w.transpose() * w - RealMatrix::identity(2, 2)).norm() < 1e-12,
            "pair {i}: aligner is not orthogonal"
        );
        let achieved = (w * &a - &b).norm();
        let rel = (achieved - d).abs() / d.max(f64::MIN_POSITIVE);
        worst_rel = worst_rel.max(rel);
        ensure!(rel <= 1e-9, "pair {i}: aligner gives {achieved}, distance {d}");
    }
    Ok(format!("max |d - grid| = {worst:.2e}, aligner relative error {worst_rel:.1e}"))
}

/// argmin over t of sum_j (x_j + t)^2 by grid search and golden-section refinement.
fn line_search(offsets: &[f64]) -> f64 {
    let f = |t: f64| offsets.iter().map(|x| (x + t) * (x + t)).sum::<f64>();
    let lo = -offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0;
    let hi = -offsets.iter().copied().fold(f64::INFINITY, f64::min) + 1.0;
    let steps = 2000;
    let h = (hi - lo) / steps as f64;
    let k = (0..=steps)
        .min_by(|&p, &q| f(lo + h * p as f64).total_cmp(&f(lo + h * q as f64)))
        .unwrap();
    let (mut a, mut b) = (lo + h * (k as f64 - 1.0), lo + h * (k as f64 + 1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f((a + b) / 2.0)
}

fn centering() -> Check {
    let mut worst_trans = 0.0f64;
    let mut worst_chain = 0.0f64;
    for i in 0..1000u64 {
        let mut rng = stream_rng(13, 0, i);
        let n = 1 + (i as usize % 3);
        let l = 2 + (i as usize % 5);
        let a = sampling::real_gaussian(&mut rng, n, l);
        let b = sampling::real_gaussian(&mut rng, n, l);
        let diff = &a - &b;
        let searched = (0..n)
            .map(|r| line_search(&diff.row(r).iter().copied().collect::<Vec<_>>()))
            .sum::<f64>()
            .sqrt();
        let ca = metrics::center(&a).map_err(|e| e.to_string())?;
        let cb = metrics::center(&b).map_err(|e| e.to_string())?;
        let centered = (&ca - &cb).norm();
        worst_trans = worst_trans.max((searched - centered).abs());
        ensure!((searched - centered).abs() <= 1e-6, "pair {i}: line search {searched}, centered {centered}");
        let de = metrics::dist_euclidean(&a, &b).map_err(|e| e.to_string())?.0;
        let doc = metrics::dist_orthogonal(&ca, &cb).map_err(|e| e.to_string())?.0;
        worst_chain = worst_chain.max((de - doc).abs());
        ensure!((de - doc).abs() <= 1e-12, "pair {i}: d_E={de}, d_O(centered)={doc}");
    }
    Ok(format!(
        "translation search error {worst_trans:.1e}, d_E vs d_O of centered {worst_chain:.1e}"
    ))
}

fn sqrt_check<T: matcore::Scalar>(b: &DMatrix<T>) -> Result<f64, String> {
    let r = matcore::psd_sqrt(b, matcore::default_negative_tolerance(b)).map_err(|e| e.to_string())?;
    let bn = matcore::frobenius_norm(b);
    let err = matcore::frobenius_norm(&(&r * &r - b));
    ensure!(err <= 1e-10 * bn, "|R^2 - B| = {err:.3e}, |B| = {bn:.3e}");
    ensure!(r.adjoint() == r, "R is not exactly hermitian");
    let min_eig = matcore::eigh(&r).map_err(|e| e.to_string())?.eigenvalues[0];
    ensure!(min_eig >= -1e-12 * matcore::frobenius_norm(&r), "R has eigenvalue {min_eig:.3e}");
    Ok(err / bn)
}

fn matrix_sqrt() -> Check {
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let mut rng = stream_rng(14, 0, i);
        let m = rng.random_range(2..=8);
        // every other sample is rank deficient
        let k = if i % 2 == 0 { m } else { rng.random_range(1..m) };
        let rel = if i % 4 < 2 {
            let a = sampling::real_gaussian(&mut rng, k, m);
            sqrt_check(&(a.transpose() * &a))
        } else {
            let a = sampling::complex_gaussian(&mut rng, k, m);
            sqrt_check(&(a.adjoint() * &a))
        };
        worst = worst.max(rel.map_err(|e| format!("sample {i} ({m}x{m}, rank {k}): {e}"))?);
    }
    Ok(format!("1000 Gram matrices, max |R^2 - B| / |B| = {worst:.1e}"))
}

fn dimension_counts() -> Check {
    let mut checked = 0;
    for l in 1..=10usize {
        for r in 1..=l {
            let got = build_w_basis(l, r).map_err(|e| e.to_string())?.len();
            ensure!(got == (l - r) * (l - r), "W basis l={l} r={r}: {got}");
            checked += 1;
        }
    }
    for n in 1..=5usize {
        for l in 2 * n..=10 {
            let s = build_reducer(n, l, Ambient::Symmetric).map_err(|e| e.to_string())?.dim;
            ensure!(s == n * (2 * l - 2 * n + 1), "symmetric n={n} l={l}: {s}");
            let h = build_reducer(n, l, Ambient::Hermitian).map_err(|e| e.to_string())?.dim;
            ensure!(h == 4 * n * (l - n), "hermitian n={n} l={l}: {h}");
            checked += 2;
            if l > 2 * n {
                let e = ReducedMap::new(GroupAction::new(GroupKind::Euclidean, n), l)
                    .map_err(|e| e.to_string())?
                    .output_dim();
                ensure!(e == n * (2 * l - 2 * n - 1), "E n={n} l={l}: {e}");
                let f = ReducedMap::new(GroupAction::new(GroupKind::ComplexEuclidean, n), l)
                    .map_err(|e| e.to_string())?
                    .output_dim();
                ensure!(f == 4 * n * (l - n - 1), "F n={n} l={l}: {f}");
                checked += 2;
            }
        }
    }
    Ok(format!("{checked} dimension counts exact"))
}

fn wronskian() -> Check {
    let mut report = Vec::new();
    for (c, &(n, l)) in [(1usize, 4usize), (1, 5), (2, 5), (2, 6)].iter().enumerate() {
        let basis = build_reducer(n, l, Ambient::Symmetric).map_err(|e| e.to_string())?;
        let mut min_rel = f64::INFINITY;
        for i in 0..1000u64 {
            let mut rng = stream_rng(15, c as u32, i);
            let rank = rng.random_range(1..=2 * n);
            let v = sampling::real_gaussian(&mut rng, rank, l);
            let signs = RealMatrix::from_diagonal(&sampling::real_gaussian(&mut rng, rank, 1).column(0).into_owned());
            let m = v.transpose() * signs * &v;
            let p = basis.project_symmetric(&m).map_err(|e| e.to_string())?.norm();
            let rel = p / m.norm();
            min_rel = min_rel.min(rel);
            ensure!(rel > 1e-8, "n={n} l={l}: rank {rank} matrix projects to {p:.3e}");
        }
        let map = ReducedMap::new(GroupAction::new(GroupKind::Orthogonal, n), l).map_err(|e| e.to_string())?;
        let mut min_ratio = f64::INFINITY;
        for i in 0..10_000u64 {
            let mut rng = stream_rng(16, c as u32, i);
            let a = Configuration::Real(sampling::real_gaussian(&mut rng, n, l));
            let b = Configuration::Real(sampling::real_gaussian(&mut rng, n, l));
            let d = orbit_distance(GroupKind::Orthogonal, &a, &b).map_err(|e| e.to_string())?;
            let f = map
                .embed(&a)
                .and_then(|fa| Ok(fa.distance(&map.embed(&b)?)))
                .map_err(|e| e.to_string())?;
            ensure!(f <= SQRT_2 * d + 1e-8, "n={n} l={l} pair {i}: reduced {f} > sqrt2 * {d}");
            min_ratio = min_ratio.min(f / d);
        }
        ensure!(min_ratio > 0.0, "n={n} l={l}: lower ratio minimum {min_ratio}");
        report.push(format!("({n},{l}) min projection {min_rel:.2e}, min ratio {min_ratio:.4}"));
    }
    Ok(report.join("; "))
}

fn counterexample() -> Check {
    let mut out = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let (a, b, ratio) = gamma_counterexample(eps).map_err(|e| e.to_string())?;
        let d = metrics::dist_euclidean(a.vertices(), b.vertices()).map_err(|e| e.to_string())?.0;
        let want = 6f64.sqrt() * eps;
        ensure!((d - want).abs() <= 1e-9 * want, "eps={eps}: d_E={d}, expected {want}");
        let slope = 9.0 * SQRT_2 / (2.0 * 6f64.sqrt()) * eps;
        let rel = (ratio - slope).abs() / slope;
        if eps <= 1e-3 {
            ensure!(rel <= 0.01, "eps={eps}: ratio {ratio}, expected {slope}");
        }
        out.push(format!("eps={eps:e} ratio/prediction-1={:.1e}", ratio / slope - 1.0));
    }
    Ok(out.join(", "))
}

fn distortion() -> Check {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        seed: 1,
        n_pairs: 100_000,
        ..Default::default()
    };
    let r = bench::distortion_experiment(&cfg).map_err(|e| e.to_string())?;
    let g = r.ratio_stats(MapKind::Gamma).ok_or("no gamma stats")?;
    let p = r.ratio_stats(MapKind::PsiTriangle).ok_or("no psi stats")?;
    let t = start.elapsed();
    let summary = format!(
        "gamma mean {:.4} sd {:.4} range [{:.4}, {:.4}]; psi range [{:.6}, {:.6}]; {t:.1?}",
        g.mean, g.std, g.min, g.max, p.min, p.max
    );
    ensure!((g.mean - 1.4043).abs() <= 0.01, "gamma mean off: {summary}");
    ensure!((g.std - 0.2128).abs() <= 0.01, "gamma sd off: {summary}");
    ensure!(g.min >= 0.0 && g.max <= 3f64.sqrt() + 1e-9, "gamma outside [0, sqrt3]: {summary}");
    ensure!(p.min >= 1.0 - 1e-9 && p.max <= SQRT_2 + 1e-9, "psi outside [1, sqrt2]: {summary}");
    ensure!(g.max >= 1.70, "gamma max below 1.70: {summary}");
    ensure!(g.min <= 0.30, "gamma min above 0.30: {summary}");
    ensure!(t <= Duration::from_secs(300), "too slow: {summary}");
    Ok(summary)
}

fn misclassification() -> Check {
    let cfg = ExperimentConfig {
        seed: 1,
        db_size: 500,
        noise_draws: 20,
        noise_grid: vec![0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03],
        ..Default::default()
    };
    let r = bench::classification_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for &eps in &cfg.noise_grid {
        let rate = |m| r.rate(m, eps).ok_or(format!("missing rate for {m} at {eps}"));
        let (ex, g, p) = (rate(MapKind::Exact)?, rate(MapKind::Gamma)?, rate(MapKind::PsiTriangle)?);
        ensure!(p <= ex + 0.01, "eps={eps}: psi {p} vs exact {ex}");
        if eps >= 0.01 {
            ensure!(g >= p, "eps={eps}: gamma {g} below psi {p}");
        }
        rows.push(format!("{eps}: {ex:.4}/{g:.4}/{p:.4}"));
    }
    Ok(format!("exact/gamma/psi rates {}", rows.join(", ")))
}

fn certificate() -> Check {
    let group = GroupAction::new(GroupKind::Euclidean, 2);
    let entries: Vec<_> = (0..500u64)
        .map(|i| {
            let m = sampling::real_gaussian(&mut stream_rng(17, 0, i), 2, 3);
            (format!("t{i:03}"), Configuration::Real(m))
        })
        .collect();
    let db = ShapeDatabase::build(group, 3, FeatureMap::Triangle, entries).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut exact_hits = 0;
    for i in 0..100u64 {
        let q = Configuration::Real(sampling::real_gaussian(&mut stream_rng(17, 1, i), 2, 3));
        let hit = search::feature_nearest(&db, &q, 1).map_err(|e| e.to_string())?.remove(0);
        let got = search::verify(&db, &hit, &q)
            .map_err(|e| e.to_string())?
            .exact_orbit_distance
            .unwrap();
        let best = search::linear_scan_nearest(&db, &q).map_err(|e| e.to_string())?;
        let opt = best.exact_orbit_distance.unwrap();
        ensure!(got <= SQRT_2 * opt + 1e-9, "query {i}: returned {got}, optimum {opt}");
        worst = worst.max(got / opt);
        exact_hits += usize::from(hit.id == best.id);
    }
    Ok(format!("100 queries, worst ratio {worst:.4}, {exact_hits} exact hits"))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn determinism() -> Check {
    let runs = [
        (
            ExperimentKind::Distortion,
            ExperimentConfig {
                seed: 3,
                n_pairs: 20_000,
                ..Default::default()
            },
        ),
        (
            ExperimentKind::Classify,
            ExperimentConfig {
                seed: 3,
                db_size: 100,
                noise_draws: 5,
                ..Default::default()
            },
        ),
        (
            ExperimentKind::LowerConstant,
            ExperimentConfig {
                seed: 3,
                n_pairs: 5_000,
                group: GroupKind::Unitary,
                n: 1,
                l: 3,
                ..Default::default()
            },
        ),
    ];
    for (kind, cfg) in &runs {
        let run = |threads| in_pool(threads, || bench::run(*kind, cfg).map(|r| r.to_json()));
        let first = run(1).map_err(|e| e.to_string())?;
        let second = run(1).map_err(|e| e.to_string())?;
        let parallel = run(4).map_err(|e| e.to_string())?;
        ensure!(first == second, "{kind}: repeated runs differ");
        ensure!(first == parallel, "{kind}: 1-thread and 4-thread runs differ");
    }
    Ok("distortion, classify and lower-constant reports byte-identical across runs and thread counts".into())
}

fn main() {
    let checks: [(&str, fn() -> Check); 11] = [
        ("bi-Lipschitz sandwich", sandwich),
        ("procrustes vs grid search", procrustes),
        ("centering", centering),
        ("matrix square root", matrix_sqrt),
        ("dimension counts", dimension_counts),
        ("rank separation and reduced bound", wronskian),
        ("triangle counterexample", counterexample),
        ("distortion statistics", distortion),
        ("misclassification ordering", misclassification),
        ("nearest-orbit certificate", certificate),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
