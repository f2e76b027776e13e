use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orthotree::json::{
    self, ConsistencyInputJson, ContextsFileJson, DecompositionJson, DensityJson, MetaspaceJson, PmfJson,
};
use orthotree::{
    tol, CMatrix, DensityMatrix, ExtendedReal, HermitianObservable, ObservableCdf, State, WaveVector,
};

#[derive(Parser, Debug)]
#[command(name = "orthotree", version, about = "Observables, states and measurement trees on ortho-algebras")]
struct Cli {
    /// Eigenvalue clustering width (default: max(1e-8, 1e-10·‖A‖_F)).
    #[arg(long, global = true, value_parser = positive)]
    tol_cluster: Option<f64>,
    /// Subspace membership tolerance.
    #[arg(long, global = true, value_parser = positive, default_value_t = tol::MEMBER)]
    tol_member: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Matrix JSON to decomposition JSON.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decomposition JSON to matrix JSON.
    Synthesize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the eigen-pairing function on a vector.
    Classify {
        #[arg(long)]
        obs: PathBuf,
        /// Vector as an n×1 matrix JSON.
        #[arg(long)]
        vec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-eigenvalue probability table.
    Measure {
        #[arg(long)]
        obs: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cumulative distribution of an observable.
    Cdf {
        #[arg(long)]
        obs: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        /// Evaluate F at these points instead of listing the atoms.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        at: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a family of contexts for consistency; exits 2 on violations.
    CheckConsistency {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = positive, default_value_t = tol::MATCH)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a measurement tree to CSV, with a metadata sidecar.
    TreeRun {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cell probability table of the probability metaspace.
    Metaspace {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct StateArgs {
    /// Density matrix JSON.
    #[arg(long)]
    rho: Option<PathBuf>,
    /// Wave vector as an n×1 matrix JSON; normalized on load.
    #[arg(long)]
    psi: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[arg(long)]
    contexts: PathBuf,
    #[arg(long)]
    q: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("tolerance must be positive, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

enum Loaded {
    Wave(WaveVector),
    Density(DensityMatrix),
}

impl Loaded {
    fn state(&self) -> State<'_> {
        match self {
            Loaded::Wave(psi) => psi.into(),
            Loaded::Density(rho) => rho.into(),
        }
    }
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

/// Single-line JSON, for matrices and decompositions.
fn emit_compact<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    emit(out, &text)
}

/// CSV with `f64` fields in shortest round-trip form.
fn csv_text<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

fn load_vector(path: &Path) -> Result<WaveVector> {
    let m: CMatrix = read(path)?;
    if m.cols() != 1 {
        bail!("{}: expected an n×1 vector, got {}×{}", path.display(), m.rows(), m.cols());
    }
    Ok(WaveVector::new(m.column(0))?)
}

fn observable(cli: &Cli, path: &Path) -> Result<HermitianObservable> {
    let matrix: CMatrix = read(path)?;
    let obs = match cli.tol_cluster {
        Some(w) => orthotree::decompose(matrix, w)?,
        None => HermitianObservable::new(matrix)?,
    };
    if obs.cluster_chained() {
        log::warn!("eigenvalue clusters chain beyond the clustering width {:e}", obs.cluster_width());
    }
    Ok(obs)
}

fn load_state(args: &StateArgs) -> Result<Loaded> {
    match (&args.rho, &args.psi) {
        (Some(rho), _) => Ok(Loaded::Density(read::<DensityJson>(rho)?.to_density()?)),
        (None, Some(psi)) => Ok(Loaded::Wave(load_vector(psi)?.normalized())),
        (None, None) => bail!("one of --rho or --psi is required"),
    }
}

fn load_tree(cli: &Cli, args: &TreeArgs) -> Result<(Vec<orthotree::ExperimentalContext>, orthotree::ContextPmf)> {
    let contexts = read::<ContextsFileJson>(&args.contexts)?.to_contexts(cli.tol_cluster)?;
    let ids: Vec<&str> = contexts.iter().map(|c| c.id.as_str()).collect();
    let q = read::<PmfJson>(&args.q)?.to_pmf(&ids)?;
    Ok((contexts, q))
}

#[derive(Serialize)]
struct MeasureRow {
    lambda: f64,
    multiplicity: usize,
    probability: f64,
}

#[derive(Serialize)]
struct CdfRow {
    lambda: f64,
    probability: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct CdfPoint {
    r: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct Classification {
    value: Option<f64>,
    star: bool,
    cell: Option<usize>,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    rng: &'a str,
    seed: u64,
    batch_size: usize,
    samples: usize,
    contexts: Vec<&'a str>,
    q: &'a [f64],
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Decompose { input, out } => {
            let obs = observable(cli, input)?;
            emit_compact(out.as_deref(), &DecompositionJson::from(obs.decomposition()))?;
        }
        Command::Synthesize { input, out } => {
            let d = read::<DecompositionJson>(input)?.to_decomposition()?;
            emit_compact(out.as_deref(), &d.synthesize())?;
        }
        Command::Classify { obs, vec, out } => {
            let obs = observable(cli, obs)?;
            let x = read::<CMatrix>(vec)?;
            if x.cols() != 1 {
                bail!("{}: expected an n×1 vector", vec.display());
            }
            let x = x.column(0);
            let cell = obs.decomposition().locate(&x, cli.tol_member)?;
            let value = match obs.eigen_pairing(&x, cli.tol_member)? {
                ExtendedReal::Real(l) => Some(l),
                ExtendedReal::Star => None,
            };
            emit_json(out.as_deref(), &Classification { value, star: value.is_none(), cell })?;
        }
        Command::Measure { obs, state, format, out } => {
            let obs = observable(cli, obs)?;
            let state = load_state(state)?;
            let state = state.state();
            let mut rows = Vec::new();
            for part in obs.decomposition().parts() {
                rows.push(MeasureRow {
                    lambda: part.lambda,
                    multiplicity: part.dim(),
                    probability: state.probability(&part.subspace)?,
                });
            }
            rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            match format {
                Format::Json => emit_json(out.as_deref(), &rows)?,
                Format::Csv => {
                    let text = csv_text(
                        ["lambda", "multiplicity", "probability"],
                        rows.iter().map(|r| [r.lambda.to_string(), r.multiplicity.to_string(), r.probability.to_string()]),
                    )?;
                    emit(out.as_deref(), &text)?;
                }
            }
        }
        Command::Cdf { obs, state, at, format, out } => {
            let obs = observable(cli, obs)?;
            let state = load_state(state)?;
            let cdf = ObservableCdf::new(&obs, state.state())?;
            if at.is_empty() {
                let mut cumulative = 0.0;
                let rows: Vec<CdfRow> = cdf
                    .atoms()
                    .iter()
                    .map(|&(lambda, probability)| {
                        cumulative += probability;
                        CdfRow { lambda, probability, cumulative }
                    })
                    .collect();
                match format {
                    Format::Json => emit_json(out.as_deref(), &rows)?,
                    Format::Csv => {
                        let text = csv_text(
                            ["lambda", "probability", "cumulative"],
                            rows.iter().map(|r| [r.lambda.to_string(), r.probability.to_string(), r.cumulative.to_string()]),
                        )?;
                        emit(out.as_deref(), &text)?;
                    }
                }
            } else {
                let points: Vec<CdfPoint> = at.iter().map(|&r| CdfPoint { r, cumulative: cdf.evaluate(r) }).collect();
                match format {
                    Format::Json => emit_json(out.as_deref(), &points)?,
                    Format::Csv => {
                        let text = csv_text(
                            ["r", "cumulative"],
                            points.iter().map(|p| [p.r.to_string(), p.cumulative.to_string()]),
                        )?;
                        emit(out.as_deref(), &text)?;
                    }
                }
            }
        }
        Command::CheckConsistency { input, tol, out } => {
            let mps = read::<ConsistencyInputJson>(input)?.to_space()?;
            let report = orthotree::check_consistency(&mps, *tol)?;
            log::info!(
                "{} shared events, {} violations",
                report.shared_events,
                report.violations.len()
            );
            emit_json(out.as_deref(), &report)?;
            if !report.consistent {
                return Ok(ExitCode::from(2));
            }
        }
        Command::TreeRun { tree, seed, samples, out } => {
            let (contexts, q) = load_tree(cli, tree)?;
            let tree = orthotree::build_tree(contexts)?;
            let run = orthotree::sample(&tree, &q, *seed, *samples)?;
            let ids: Vec<&str> = tree.nodes().iter().map(|n| n.context_id.as_str()).collect();
            let text = csv_text(
                ["sample_index", "context_id", "lambda"],
                run.samples.iter().map(|s| [s.index.to_string(), ids[s.context].to_owned(), s.lambda.to_string()]),
            )?;
            emit(Some(out), &text)?;
            let meta = RunMetadata {
                rng: run.rng,
                seed: run.seed,
                batch_size: run.batch_size,
                samples: run.samples.len(),
                contexts: tree.nodes().iter().map(|n| n.context_id.as_str()).collect(),
                q: q.weights(),
            };
            emit_json(Some(&sidecar(out)), &meta)?;
        }
        Command::Metaspace { tree, out } => {
            let (contexts, q) = load_tree(cli, tree)?;
            let m = orthotree::reduce_to_metaspace(contexts, &q)?;
            emit_json(out.as_deref(), &MetaspaceJson::from(&m))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORTHOTREE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
