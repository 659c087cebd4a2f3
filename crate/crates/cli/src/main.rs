//! `renorm-lab`: batch front end for tuning, towers, partitions,
//! certification and conjugacy experiments.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 computation error.
//! Errors are reported on stderr as one JSON object.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use renorm_lab::conjugacy::{build_mesh, equivariance_defect, qs_modulus};
use renorm_lab::distortion::{certify, Thresholds};
use renorm_lab::partition::{build_partition, MarkovPartition};
use renorm_lab::renorm::{build_tower, RenormTower};
use renorm_lab::tune::tune_parameter;
use renorm_lab::{report, Tolerances, Unimodal, UnimodalMap};
use serde_json::json;

use config::{MapSource, MapSpec, RunConfig, TypeSpec};
use output::Artifacts;

/// Landmarks sampled for the equivariance check in `conjugate`.
const EQUIVARIANCE_SAMPLES: usize = 200;

#[derive(Parser)]
#[command(name = "renorm-lab", version, about = "Renormalization laboratory for even unimodal maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune the affine family to a combinatorial type and print c.
    Tune(RunArgs),
    /// Build the renormalization tower.
    Tower(RunArgs),
    /// Build the Markov partition and list admissible words.
    Partition(RunArgs),
    /// Certify bounded distortion.
    Certify(RunArgs),
    /// Build the conjugacy mesh between two maps and its qs table.
    Conjugate(RunArgs),
}

#[derive(Args, Default)]
struct MapFlags {
    /// Critical exponent t.
    #[arg(long)]
    t: Option<f64>,
    /// Critical value of the affine factor.
    #[arg(long)]
    c: Option<f64>,
    /// Power coefficients of h, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h_coeffs: Option<Vec<f64>>,
    #[arg(long)]
    label: Option<String>,
    /// Target type: doubling, tripling, constant-N or a list like 2,3,2.
    #[arg(long = "type")]
    kind: Option<String>,
    /// Tuning depth for a named type.
    #[arg(long)]
    depth: Option<usize>,
}

impl MapFlags {
    fn spec(&self) -> MapSpec {
        MapSpec {
            t: self.t,
            c: self.c,
            h_coeffs: self.h_coeffs.clone(),
            label: self.label.clone(),
            kind: self.kind.as_deref().map(TypeSpec::parse_flag),
            depth: self.depth,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    map: MapFlags,
    /// Critical exponent of the target map (conjugate).
    #[arg(long)]
    target_t: Option<f64>,
    #[arg(long)]
    target_c: Option<f64>,
    #[arg(long = "target-type")]
    target_kind: Option<String>,
    #[arg(long)]
    target_depth: Option<usize>,
    /// Tower and partition depth K.
    #[arg(long)]
    k: Option<usize>,
    /// Largest return time tried by detection.
    #[arg(long)]
    max_n: Option<usize>,
    /// Word length L.
    #[arg(long = "l")]
    word_length: Option<usize>,
    /// Sample points per word domain (certify).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    max_a: Option<f64>,
    #[arg(long)]
    max_b: Option<f64>,
    #[arg(long)]
    max_c: Option<f64>,
    /// Coarsest dyadic scale 2^-j0 (conjugate).
    #[arg(long)]
    j0: Option<u32>,
    /// Finest dyadic scale 2^-j1 (conjugate).
    #[arg(long)]
    j1: Option<u32>,
    /// Points in the qs grid (conjugate).
    #[arg(long)]
    qs_grid: Option<usize>,
    /// Seed for landmark sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; without it the main artifact goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(renorm_lab::Error),
    Io(String),
}

impl From<renorm_lab::Error> for Failure {
    fn from(e: renorm_lab::Error) -> Self {
        match e {
            renorm_lab::Error::ParameterOutOfRange(msg) => Failure::Usage(msg),
            other => Failure::Compute(other),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Compute(_) | Failure::Io(_) => 2,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage".to_string(), m.clone()),
            Failure::Compute(e) => (e.kind().to_string(), e.to_string()),
            Failure::Io(m) => ("io".to_string(), m.clone()),
        };
        json!({ "schema": report::SCHEMA, "error": kind, "message": message })
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

impl RunArgs {
    fn resolve(&self) -> Outcome<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_json(&text).map_err(Failure::Usage)?
            }
            None => RunConfig::default(),
        };
        cfg.map = cfg.map.overlay(&self.map.spec());
        let target_flags = MapSpec {
            t: self.target_t,
            c: self.target_c,
            kind: self.target_kind.as_deref().map(TypeSpec::parse_flag),
            depth: self.target_depth,
            ..Default::default()
        };
        if !target_flags.is_empty() {
            // unset target fields fall back to the map's own
            let base = cfg.target.take().unwrap_or_else(|| MapSpec { label: None, ..cfg.map.clone() });
            cfg.target = Some(base.overlay(&target_flags));
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if self.$field.is_some() { cfg.$field = self.$field.clone(); } )* };
        }
        set!(k, max_n, word_length, grid, j0, j1, qs_grid, seed, out);
        if self.max_a.is_some() || self.max_b.is_some() || self.max_c.is_some() {
            let mut th = cfg.thresholds.unwrap_or_default();
            th.adjacent = self.max_a.unwrap_or(th.adjacent);
            th.core = self.max_b.unwrap_or(th.core);
            th.nonlinearity = self.max_c.unwrap_or(th.nonlinearity);
            cfg.thresholds = Some(th);
        }
        cfg.word_length().map_err(Failure::Usage)?;
        cfg.max_n().map_err(Failure::Usage)?;
        cfg.depth(1).map_err(Failure::Usage)?;
        Ok(cfg)
    }
}

struct Prepared {
    map: UnimodalMap,
    source: MapSource,
}

fn prepare(spec: &MapSpec, tol: &Tolerances) -> Outcome<Prepared> {
    let source = spec.source().map_err(Failure::Usage)?;
    source.validate().map_err(Failure::Usage)?;
    let map = match &source {
        MapSource::Tuned { t, target } => {
            let c = tune_parameter(*t, target, tol)?;
            UnimodalMap::affine(*t, c)?.with_label(source.label())
        }
        MapSource::Explicit(d) => d.build()?,
    };
    Ok(Prepared { map, source })
}

fn tuned_depth(source: &MapSource) -> Option<usize> {
    match source {
        MapSource::Tuned { target, .. } => Some(target.len()),
        MapSource::Explicit(_) => None,
    }
}

fn tower_for(p: &Prepared, cfg: &RunConfig, tol: &Tolerances) -> Outcome<RenormTower> {
    let depth = cfg.depth(tuned_depth(&p.source).unwrap_or(4)).map_err(Failure::Usage)?;
    let max_n = cfg.max_n().map_err(Failure::Usage)?;
    Ok(build_tower(&p.map, depth, max_n, tol)?)
}

fn partition_for(p: &Prepared, cfg: &RunConfig, tol: &Tolerances) -> Outcome<MarkovPartition> {
    let tower = tower_for(p, cfg, tol)?;
    let depth = cfg.depth(tower.depth()).map_err(Failure::Usage)?;
    Ok(build_partition(&tower, depth, tol)?)
}

fn run(command: Command) -> Outcome<()> {
    let (name, args) = match &command {
        Command::Tune(a) => ("tune", a),
        Command::Tower(a) => ("tower", a),
        Command::Partition(a) => ("partition", a),
        Command::Certify(a) => ("certify", a),
        Command::Conjugate(a) => ("conjugate", a),
    };
    let cfg = args.resolve()?;
    let tol = cfg.tolerances().map_err(Failure::Usage)?;
    let mut out = Artifacts::new(cfg.out.clone());

    match name {
        "tune" => {
            if !matches!(cfg.map.source().map_err(Failure::Usage)?, MapSource::Tuned { .. }) {
                return Err(Failure::Usage("tune needs --type (and --depth)".into()));
            }
            let p = prepare(&cfg.map, &tol)?;
            let c = p.map.critical_value();
            println!("{c:.12}");
            if cfg.out.is_some() {
                out.json("map.json", &report::map_json(p.map.exponent(), c, &p.source.label()));
            }
        }
        "tower" => {
            let p = prepare(&cfg.map, &tol)?;
            let tower = tower_for(&p, &cfg, &tol)?;
            out.json("tower.json", &report::tower_json(&tower));
            out.text("tower.csv", report::tower_csv(&tower));
        }
        "partition" => {
            let p = prepare(&cfg.map, &tol)?;
            let partition = partition_for(&p, &cfg, &tol)?;
            let words = partition.admissible_words(cfg.word_length().map_err(Failure::Usage)?)?;
            out.text("partition.csv", report::partition_csv(&partition));
            out.text("words.txt", report::words_dump(&partition, &words));
        }
        "certify" => {
            let p = prepare(&cfg.map, &tol)?;
            let partition = partition_for(&p, &cfg, &tol)?;
            let grid = cfg.grid.unwrap_or(64);
            let thresholds = cfg.thresholds.unwrap_or_else(Thresholds::default);
            let r = certify(&partition, cfg.word_length().map_err(Failure::Usage)?, grid, thresholds)?;
            out.json("report.json", &report::distortion_json(&r));
            out.text("report.csv", report::distortion_csv(&r));
        }
        "conjugate" => {
            let pf = prepare(&cfg.map, &tol)?;
            let pg = match &cfg.target {
                Some(spec) => prepare(spec, &tol)?,
                None => prepare(&cfg.map, &tol)?,
            };
            let tf = tower_for(&pf, &cfg, &tol)?;
            let tg = tower_for(&pg, &cfg, &tol)?;
            let depth = cfg.depth(tf.depth().min(tg.depth())).map_err(Failure::Usage)?;
            let part_f = build_partition(&tf, depth, &tol)?;
            let part_g = build_partition(&tg, depth, &tol)?;
            let mesh = build_mesh(&part_f, &part_g, cfg.word_length().map_err(Failure::Usage)?)?;
            let table = qs_modulus(&mesh, cfg.j0.unwrap_or(3), cfg.j1.unwrap_or(8), cfg.qs_grid.unwrap_or(2048))?;

            let interior: Vec<f64> =
                mesh.pairs().iter().map(|p| p.0).filter(|&x| part_f.locate(x).is_ok()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
            let picks = sample(&mut rng, interior.len(), EQUIVARIANCE_SAMPLES.min(interior.len()));
            let mut indices = picks.into_vec();
            indices.sort_unstable();
            let mut worst: f64 = 0.0;
            for i in &indices {
                worst = worst.max(equivariance_defect(&mesh, &part_f, &part_g, interior[*i])?);
            }

            let mut doc = report::qs_json(&table, &mesh);
            doc["equivariance"] = json!({ "samples": indices.len(), "max_defect": worst });
            out.json("qs.json", &doc);
            out.text("qs.csv", report::qs_csv(&table));
            out.text("qs_inverse.csv", report::qs_inverse_csv(&table));
            out.text("mesh.csv", report::mesh_csv(&mesh));
        }
        _ => unreachable!(),
    }
    out.commit().map_err(Failure::Io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
