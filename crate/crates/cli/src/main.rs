use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use osveta::curvature::compute_descriptors;
use osveta::decimate::{decimate, gaussian_perturb};
use osveta::harness::{
    default_selection_size, emit_report, make_training_set, reference_markdown,
    run_survival_experiment, ReportFormat, DEFAULT_LEVELS,
};
use osveta::mesh::{load_mesh, write_mesh, write_point_cloud, MeshFormat, TopologyIndex};
use osveta::neuro::{parse_training_set, rank_neuro, train, training_set_csv, FnnModel, DEFAULT_EPOCHS};
use osveta::ranking::{osveta_ranking, rank_scored, select_top, Criterion, CriterionSet, StabilityRanking};
use osveta::{fixtures, Mesh64};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Vertex importance ranking, decimation and survival experiments for
/// triangle meshes.
#[derive(Parser)]
#[command(name = "osveta", version)]
struct Cli {
    /// Worker threads for per-vertex computations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank vertices and export the top selection.
    Rank(RankArgs),
    /// Write per-vertex curvature descriptors as CSV.
    Descriptors(DescriptorsArgs),
    /// Train the feature network on decimation survival.
    Train(TrainArgs),
    /// Simplify a mesh by quadric-error half-edge collapse.
    Decimate(DecimateArgs),
    /// Add seeded Gaussian noise to vertex positions.
    Perturb(PerturbArgs),
    /// Run the survival experiment and write a report.
    Eval(EvalArgs),
    /// Write one of the bundled test meshes.
    Fixture(FixtureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Osveta,
    Neuro,
    Random,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "osveta")]
    method: Method,
    /// Rank by a single criterion instead of the weighted set (osveta only):
    /// psi-min-nonneg, theta-below-2pi, kg1-pos, psi-max-nonneg,
    /// theta-above-2pi, kg-neg, kg1-neg or kg-pos.
    #[arg(long, value_parser = parse_criterion)]
    criterion: Option<Criterion>,
    /// Model file (neuro only).
    #[arg(long, required_if_eq("method", "neuro"))]
    model: Option<PathBuf>,
    /// Keep only the first N ranked vertices.
    #[arg(long)]
    top: Option<usize>,
    /// Required with --method random.
    #[arg(long, required_if_eq("method", "random"))]
    seed: Option<u64>,
    /// Ranking CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// OBJ point cloud of the selected vertices.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args)]
struct DescriptorsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Meshes to build the training set from.
    #[arg(long = "in", num_args = 1.., required_unless_present = "data")]
    inputs: Vec<PathBuf>,
    /// Existing training-set CSV instead of meshes.
    #[arg(long, conflicts_with = "inputs")]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long)]
    rate: Option<f64>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch loss CSV.
    #[arg(long)]
    losses: Option<PathBuf>,
    /// Also write the training set built from the meshes.
    #[arg(long)]
    export_set: Option<PathBuf>,
}

#[derive(Args)]
struct DecimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Fraction of vertices to remove, in [0, 1).
    #[arg(long)]
    fraction: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Removal trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Old-to-new index map CSV.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Noise standard deviation as a fraction of the bounding-box diagonal.
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Selection size (default: 10% of rankable vertices).
    #[arg(long = "L")]
    selection: Option<usize>,
    /// Decimation levels in percent.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    #[arg(long)]
    seed: u64,
    /// Report file; `.csv` selects long-form CSV, anything else Markdown.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append the published reference counts to a Markdown report.
    #[arg(long)]
    reference: bool,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMED))]
    name: String,
    #[arg(long)]
    out: PathBuf,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    Criterion::from_name(s).map_err(|e| e.to_string())
}

fn format_of(path: &Path) -> Result<MeshFormat> {
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(MeshFormat::from_extension)
        .ok_or_else(|| anyhow!("{}: expected a .obj or .off file", path.display()))
}

fn read_mesh(path: &Path) -> Result<Mesh64> {
    let format = format_of(path)?;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_mesh(&bytes, format).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn write_mesh_file(path: &Path, mesh: &Mesh64) -> Result<()> {
    write_out(Some(path), &write_mesh(mesh, format_of(path)?))
}

fn read_model(path: &Path) -> Result<FnnModel<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    FnnModel::load(&text).with_context(|| format!("loading {}", path.display()))
}

fn rank(args: RankArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    let desc = compute_descriptors(&mesh, &TopologyIndex::build(&mesh));
    if args.criterion.is_some() && !matches!(args.method, Method::Osveta) {
        bail!("--criterion applies to --method osveta only");
    }
    let (ranking, mask): (StabilityRanking<f64>, _) = match args.method {
        Method::Osveta => {
            let crit = match args.criterion {
                Some(c) => CriterionSet::single(c),
                None => CriterionSet::standard(),
            };
            let (r, m) = osveta_ranking(&desc, &crit);
            (r, Some(m))
        }
        Method::Neuro => {
            let path = args.model.as_deref().ok_or_else(|| anyhow!("--method neuro needs --model"))?;
            (rank_neuro(&read_model(path)?, &desc)?, None)
        }
        Method::Random => {
            let seed = args.seed.ok_or_else(|| anyhow!("--method random needs --seed"))?;
            let (base, _) = osveta_ranking(&desc, &CriterionSet::standard());
            let mut order = base.order().to_vec();
            order.sort_unstable();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            // scores descend with the shuffled position, so the sort keeps it
            let n = order.len();
            let mut scores = vec![None; mesh.vertex_count()];
            for (pos, v) in order.into_iter().enumerate() {
                scores[v] = Some((n - pos) as f64 / n as f64);
            }
            (rank_scored(&scores), None)
        }
    };
    let selected = select_top(&ranking, args.top.unwrap_or(ranking.len()))?;
    if let Some(path) = &args.points {
        write_out(Some(path), &write_point_cloud(&mesh, &selected))?;
    }
    write_out(args.out.as_deref(), &ranking.to_csv(mask.as_ref(), args.top))
}

fn descriptors(args: DescriptorsArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    let desc = compute_descriptors(&mesh, &TopologyIndex::build(&mesh));
    write_out(args.out.as_deref(), &desc.to_csv())
}

fn train_cmd(args: TrainArgs) -> Result<()> {
    let samples = match &args.data {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_training_set(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let meshes = args.inputs.iter().map(|p| read_mesh(p)).collect::<Result<Vec<_>>>()?;
            let set = make_training_set(&meshes, args.seed)?;
            if set.shortfall > 0 {
                eprintln!("warning: decimation fell {} removals short", set.shortfall);
            }
            if let Some(path) = &args.export_set {
                write_out(Some(path), &training_set_csv(&set.samples))?;
            }
            set.samples
        }
    };
    let mut model = FnnModel::standard(args.seed);
    if let Some(rate) = args.rate {
        if !(rate.is_finite() && rate >= 0.0) {
            bail!("--rate must be finite and non-negative");
        }
        model.learning_rate = rate;
    }
    let report = train(&model, &samples, args.epochs, args.seed)?;
    if let Some(path) = &args.losses {
        let mut csv = String::from("epoch,loss\n");
        for (i, l) in report.losses.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, osveta::scalar::fmt_sig17(*l)));
        }
        write_out(Some(path), &csv)?;
    }
    write_out(Some(&args.out), &report.model.save())
}

fn decimate_cmd(args: DecimateArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    let (simplified, trace) = decimate(&mesh, args.fraction, args.seed)?;
    if trace.shortfall() > 0 {
        eprintln!(
            "warning: removed {} of {} requested vertices; no legal collapse remained",
            trace.removed_count(),
            trace.requested()
        );
    }
    write_mesh_file(&args.out, &simplified)?;
    if let Some(path) = &args.trace {
        write_out(Some(path), &trace.to_csv())?;
    }
    if let Some(path) = &args.map {
        write_out(Some(path), &trace.compaction_csv())?;
    }
    Ok(())
}

fn perturb(args: PerturbArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    write_mesh_file(&args.out, &gaussian_perturb(&mesh, args.sigma, args.seed)?)
}

fn eval(args: EvalArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    let model = read_model(&args.model)?;
    let selection = match args.selection {
        Some(l) => l,
        None => {
            let desc = compute_descriptors(&mesh, &TopologyIndex::build(&mesh));
            default_selection_size(desc.rankable_count())
        }
    };
    let levels = args.levels.unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
    let id = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let report = run_survival_experiment(&mesh, &model, selection, &levels, args.seed, &id)?;
    let csv = args
        .out
        .as_deref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut text = emit_report(&report, if csv { ReportFormat::Csv } else { ReportFormat::Markdown });
    if !csv && args.reference {
        text.push_str("\nPublished counts for a 17350-vertex model with L = 1000:\n\n");
        text.push_str(&reference_markdown());
    }
    write_out(args.out.as_deref(), &text)
}

fn fixture(args: FixtureArgs) -> Result<()> {
    let mesh = fixtures::by_name::<f64>(&args.name).ok_or_else(|| anyhow!("unknown fixture {}", args.name))?;
    write_mesh_file(&args.out, &mesh)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rank(a) => rank(a),
        Command::Descriptors(a) => descriptors(a),
        Command::Train(a) => train_cmd(a),
        Command::Decimate(a) => decimate_cmd(a),
        Command::Perturb(a) => perturb(a),
        Command::Eval(a) => eval(a),
        Command::Fixture(a) => fixture(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
