//! Command-line front end.
//!
//! ```text
//! orbit-features dist --group E2 a.csv b.csv
//! orbit-features embed --group O q.csv [--reduced | --triangle] [--out f.csv]
//! orbit-features db-build --group E --out db.jsonl [--reduced | --triangle] FILES...
//! orbit-features db-build --group E --n 2 --l 3 --random 500 --seed 7 --out db.jsonl
//! orbit-features db-query db.jsonl q.csv -k 3 [--verify]
//! orbit-features experiment distortion --seed 1 [--config cfg.json] [--out prefix]
//! ```
//!
//! Exit codes: 0 success, 2 unreadable input, 3 shape mismatch, 4 dimension
//! hypothesis `l >= 2n` violated, 5 empty database, 6 invalid experiment
//! config, 1 anything else.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::bench::{self, ExperimentConfig, ExperimentKind};
use crate::embed;
use crate::io::{self, FileError};
use crate::matcore::Scalar;
use crate::metrics::{self, Configuration, GroupAction, GroupKind};
use crate::reduce::reduced_embed;
use crate::sampling;
use crate::search::{self, FeatureMap, ShapeDatabase};
use crate::triangle::{psi_triangle, Triangle};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    File(#[from] FileError),
    #[error(transparent)]
    Domain(#[from] crate::Error),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        let domain = |e: &E| match e {
            E::ShapeMismatch { .. } => 3,
            E::DimensionHypothesis { .. } => 4,
            E::EmptyDatabase => 5,
            E::ConfigInvalid(_) => 6,
            _ => 1,
        };
        match self {
            CliError::File(FileError::Parse { .. }) => 2,
            CliError::File(FileError::Io { .. }) => 1,
            CliError::File(FileError::Domain(e)) | CliError::Domain(e) => domain(e),
            CliError::Usage(_) => 2,
            CliError::Output(_) => 1,
        }
    }
}

/// A group letter with an optional dimension, e.g. `E` or `E2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupArg {
    pub kind: GroupKind,
    pub n: Option<usize>,
}

impl FromStr for GroupArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind: GroupKind = s.parse()?;
        let digits = s.trim().get(1..).unwrap_or("");
        let n = if digits.is_empty() {
            None
        } else {
            Some(digits.parse().map_err(|e| format!("bad dimension in {s:?}: {e}"))?)
        };
        Ok(GroupArg { kind, n })
    }
}

impl GroupArg {
    /// The group acting on `m`, checking an explicit dimension against its rows.
    fn action_for(&self, m: &Configuration) -> Result<GroupAction, CliError> {
        let rows = m.shape().0;
        if let Some(n) = self.n {
            if n != rows {
                return Err(crate::Error::ShapeMismatch {
                    left: (n, m.shape().1),
                    right: m.shape(),
                }
                .into());
            }
        }
        Ok(GroupAction::new(self.kind, rows))
    }
}

#[derive(Debug, Parser)]
#[command(name = "orbit-features", version, about = "Orbit distances and invariant features of point configurations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orbit distance between two configurations and the aligning group element.
    Dist {
        /// O, E, U or F, optionally with the dimension (E2).
        #[arg(long, short)]
        group: GroupArg,
        a: PathBuf,
        b: PathBuf,
    },
    /// Invariant features of one configuration as a CSV row.
    Embed {
        #[arg(long, short)]
        group: GroupArg,
        file: PathBuf,
        #[command(flatten)]
        map: MapFlags,
        /// Write the row here (plus a `.meta.json` sidecar) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a shape database from matrix files (id = file stem) or random samples.
    DbBuild {
        #[arg(long, short)]
        group: GroupArg,
        #[command(flatten)]
        map: MapFlags,
        #[arg(long)]
        out: PathBuf,
        /// Generate this many standard normal configurations instead of reading files.
        #[arg(long, conflicts_with = "files", requires_all = ["n", "l"])]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rows of generated configurations.
        #[arg(long)]
        n: Option<usize>,
        /// Columns of generated configurations.
        #[arg(long)]
        l: Option<usize>,
        files: Vec<PathBuf>,
    },
    /// Nearest records to a query configuration.
    DbQuery {
        db: PathBuf,
        query: PathBuf,
        #[arg(short, default_value_t = 1)]
        k: usize,
        /// Also compute the exact orbit distance to each returned record.
        #[arg(long)]
        verify: bool,
    },
    /// Run a seeded experiment and write `<out>.json` and `<out>.csv`.
    Experiment {
        /// distortion, classify or lower-constant
        kind: ExperimentKind,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path prefix; defaults to the experiment name.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MapFlags {
    /// Project the features onto the reduced subspace (needs l >= 2n).
    #[arg(long, conflicts_with = "triangle")]
    reduced: bool,
    /// Cone coordinates of a planar triangle (group E, 2x3 input).
    #[arg(long)]
    triangle: bool,
}

impl MapFlags {
    fn feature_map(self) -> FeatureMap {
        match (self.reduced, self.triangle) {
            (true, _) => FeatureMap::Reduced,
            (_, true) => FeatureMap::Triangle,
            _ => FeatureMap::Full,
        }
    }
}

/// 12 significant digits; scientific notation outside `[1e-4, 1e12)`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if !(1e-4..1e12).contains(&a) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - a.log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn fmt_scalar<T: Scalar>(z: T) -> String {
    let (re, im) = (z.real(), z.imaginary());
    if im == 0.0 {
        sig12(re)
    } else if im < 0.0 {
        format!("{}-{}i", sig12(re), sig12(-im))
    } else {
        format!("{}+{}i", sig12(re), sig12(im))
    }
}

fn print_alignment<T: Scalar>(
    out: &mut impl Write,
    d: f64,
    al: &metrics::Alignment<T>,
    translations: bool,
) -> std::io::Result<()> {
    writeln!(out, "distance: {}", sig12(d))?;
    writeln!(out, "W:")?;
    for i in 0..al.rotation.nrows() {
        let row: Vec<String> = al.rotation.row(i).iter().map(|&z| fmt_scalar(z)).collect();
        writeln!(out, "  {}", row.join(" "))?;
    }
    if translations {
        let t: Vec<String> = al.translation.iter().map(|&z| fmt_scalar(z)).collect();
        writeln!(out, "translation: {}", t.join(" "))?;
    }
    Ok(())
}

fn cmd_dist(out: &mut impl Write, group: GroupArg, a: &Path, b: &Path) -> Result<(), CliError> {
    let a = io::read_matrix(a)?;
    let b = io::read_matrix(b)?;
    group.action_for(&a)?;
    let tr = group.kind.has_translations();
    let field_err = || crate::Error::FieldMismatch {
        group: group.kind.symbol(),
    };
    match group.kind {
        GroupKind::Orthogonal | GroupKind::Euclidean => {
            let (Some(a), Some(b)) = (a.as_real(), b.as_real()) else {
                return Err(field_err().into());
            };
            let (d, al) = if tr {
                metrics::dist_euclidean(a, b)?
            } else {
                metrics::dist_orthogonal(a, b)?
            };
            print_alignment(out, d, &al, tr)?;
        }
        GroupKind::Unitary | GroupKind::ComplexEuclidean => {
            let (a, b) = (a.as_complex(), b.as_complex());
            let (d, al) = if tr {
                metrics::dist_complex_euclidean(&a, &b)?
            } else {
                metrics::dist_unitary(&a, &b)?
            };
            print_alignment(out, d, &al, tr)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EmbedMeta {
    map: String,
    group: GroupKind,
    n: usize,
    l: usize,
    dim: usize,
}

fn map_name(kind: GroupKind, map: FeatureMap) -> String {
    let base = match kind {
        GroupKind::Orthogonal => "phi",
        GroupKind::Euclidean => "psi",
        GroupKind::Unitary => "phi_c",
        GroupKind::ComplexEuclidean => "psi_c",
    };
    match map {
        FeatureMap::Full => base.to_string(),
        FeatureMap::Reduced => format!("reduced_{base}"),
        FeatureMap::Triangle => "psi_triangle".to_string(),
    }
}

fn cmd_embed(
    out: &mut impl Write,
    group: GroupArg,
    file: &Path,
    map: FeatureMap,
    dest: Option<&Path>,
) -> Result<(), CliError> {
    let m = io::read_matrix(file)?;
    let action = group.action_for(&m)?;
    if !group.kind.is_complex() && !m.is_real() {
        return Err(crate::Error::FieldMismatch {
            group: group.kind.symbol(),
        }
        .into());
    }
    let feature = match map {
        FeatureMap::Full => embed::features(group.kind, &m)?,
        FeatureMap::Reduced => reduced_embed(action, &m)?,
        FeatureMap::Triangle => {
            if group.kind != GroupKind::Euclidean {
                return Err(CliError::Usage("--triangle needs group E".into()));
            }
            let t = Triangle::new(m.as_real().expect("checked real").clone())?;
            embed::FeatureVector::new(psi_triangle(&t).to_array().to_vec())
        }
    };
    let row: Vec<String> = feature.coords.iter().map(|&x| io::format_shortest(x)).collect();
    let row = row.join(",") + "\n";
    match dest {
        None => out.write_all(row.as_bytes())?,
        Some(path) => {
            io::write_atomic(path, row.as_bytes())?;
            let (n, l) = m.shape();
            let meta = EmbedMeta {
                map: map_name(group.kind, map),
                group: group.kind,
                n,
                l,
                dim: feature.ambient_dim(),
            };
            let json = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
            io::write_atomic(&sidecar(path), json.as_bytes())?;
            writeln!(out, "wrote {} ({} coordinates)", path.display(), feature.ambient_dim())?;
        }
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[allow(clippy::too_many_arguments)]
fn cmd_db_build(
    out: &mut impl Write,
    group: GroupArg,
    map: FeatureMap,
    dest: &Path,
    random: Option<usize>,
    seed: u64,
    shape: (Option<usize>, Option<usize>),
    files: &[PathBuf],
) -> Result<(), CliError> {
    let (entries, n, l) = if let Some(count) = random {
        let (Some(n), Some(l)) = shape else {
            return Err(CliError::Usage("--random needs --n and --l".into()));
        };
        if let Some(gn) = group.n {
            if gn != n {
                return Err(crate::Error::ShapeMismatch { left: (gn, l), right: (n, l) }.into());
            }
        }
        let width = count.saturating_sub(1).to_string().len();
        let entries: Vec<(String, Configuration)> = (0..count as u64)
            .map(|i| {
                let mut rng = sampling::stream_rng(seed, 0, i);
                (format!("r{i:0width$}"), sampling::configuration(&mut rng, group.kind, n, l))
            })
            .collect();
        (entries, n, l)
    } else {
        let mut entries = Vec::with_capacity(files.len());
        for f in files {
            let id = f
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| f.display().to_string());
            entries.push((id, io::read_matrix(f)?));
        }
        let Some(first) = entries.first() else {
            return Err(CliError::Usage("no input files (give files or --random)".into()));
        };
        let (n, l) = first.1.shape();
        if let Some((_, bad)) = entries.iter().find(|(_, m)| m.shape() != (n, l)) {
            return Err(crate::Error::ShapeMismatch {
                left: (n, l),
                right: bad.shape(),
            }
            .into());
        }
        (entries, n, l)
    };
    let action = group.action_for(&Configuration::Real(crate::RealMatrix::zeros(n, l)))?;
    let db = ShapeDatabase::build(action, l, map, entries)?;
    io::write_atomic(dest, io::format_database(&db).as_bytes())?;
    writeln!(
        out,
        "wrote {} records ({}, {}x{}, {} features of dimension {}) to {}",
        db.len(),
        action.kind,
        n,
        l,
        map,
        db.feature_dim(),
        dest.display()
    )?;
    Ok(())
}

fn cmd_db_query(out: &mut impl Write, db: &Path, query: &Path, k: usize, verify: bool) -> Result<(), CliError> {
    let db = io::read_database(db)?;
    let q = io::read_matrix(query)?;
    let hits = search::feature_nearest(&db, &q, k)?;
    if verify {
        writeln!(out, "id,embedded_distance,exact_orbit_distance")?;
        for h in &hits {
            let v = search::verify(&db, h, &q)?;
            let exact = v.exact_orbit_distance.expect("verified");
            writeln!(out, "{},{},{}", v.id, io::format_shortest(v.embedded_distance), io::format_shortest(exact))?;
        }
    } else {
        writeln!(out, "id,embedded_distance")?;
        for h in &hits {
            writeln!(out, "{},{}", h.id, io::format_shortest(h.embedded_distance))?;
        }
    }
    Ok(())
}

fn cmd_experiment(
    out: &mut impl Write,
    kind: ExperimentKind,
    seed: Option<u64>,
    config: Option<&Path>,
    prefix: Option<&Path>,
) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::from_json(&io::read_text(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = bench::run(kind, &cfg)?;
    let prefix = prefix.map_or_else(|| PathBuf::from(kind.to_string()), Path::to_path_buf);
    let with_ext = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    let (json, csv) = (with_ext(".json"), with_ext(".csv"));
    io::write_atomic(&json, report.to_json().as_bytes())?;
    io::write_atomic(&csv, report.to_csv().as_bytes())?;
    write!(out, "{}", report.summary())?;
    writeln!(out, "wrote {} and {}", json.display(), csv.display())?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Dist { group, a, b } => cmd_dist(out, group, &a, &b),
        Command::Embed { group, file, map, out: dest } => {
            cmd_embed(out, group, &file, map.feature_map(), dest.as_deref())
        }
        Command::DbBuild {
            group,
            map,
            out: dest,
            random,
            seed,
            n,
            l,
            files,
        } => cmd_db_build(out, group, map.feature_map(), &dest, random, seed, (n, l), &files),
        Command::DbQuery { db, query, k, verify } => cmd_db_query(out, &db, &query, k, verify),
        Command::Experiment {
            kind,
            seed,
            config,
            out: prefix,
        } => cmd_experiment(out, kind, seed, config.as_deref(), prefix.as_deref()),
    }
}

/// Parse arguments, run, report errors on stderr; returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
