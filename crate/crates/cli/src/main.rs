//! `chansel`: channel selection for multivariate time series from the shell.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 domain error.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chansel::bench::run_benchmark;
use chansel::classify::ClassifierSpec;
use chansel::distmat::{build_distance_matrix, channel_sums};
use chansel::prototype::{compute_prototypes, znormalize, PrototypeKind};
use chansel::select::{select, SelectConfig, SelectionParams, SelectionResult, Strategy};
use chansel::synth::{generate, SynthSpec, SynthTruth};
use chansel::tsdata::{parse_archive_file, write_archive, write_archive_file};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chansel", version, about = "Prototype-distance channel selection for multivariate time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select channels from a training archive and print the selection JSON.
    Select(SelectArgs),
    /// Keep only the channels named by a selection JSON.
    Restrict(RestrictArgs),
    /// Compare a classifier on all channels against the selected ones.
    Bench(BenchArgs),
    /// Generate a synthetic train/test pair with known informative channels.
    Synth(SynthArgs),
    /// Dump the prototype distance matrix and per-channel scores as CSV.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct SelectionFlags {
    /// ecs, ecp, greedy or all
    #[arg(long, default_value = "ecs")]
    strategy: String,
    /// mean or median
    #[arg(long, default_value = "mean")]
    prototype: String,
    /// Z-normalize every series before computing prototypes.
    #[arg(long)]
    znorm: bool,
    /// nn1 or rocket:<count>:<seed>
    #[arg(long, default_value = "nn1")]
    clf: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Human-readable output instead of JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: SelectionFlags,
}

#[derive(Args)]
struct RestrictArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Selection JSON; read from stdin when omitted.
    #[arg(long)]
    selection: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: SelectionFlags,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 120)]
    channels: usize,
    #[arg(long, default_value_t = 5)]
    informative: usize,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long = "per-class", default_value_t = 20)]
    per_class: usize,
    #[arg(long, default_value_t = 100)]
    length: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.5)]
    effect: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory for distances.csv and scores.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "mean")]
    prototype: String,
    #[arg(long)]
    znorm: bool,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<chansel::Error> for Failure {
    fn from(e: chansel::Error) -> Self {
        Failure { code: if e.is_input_error() { 2 } else { 3 }, msg: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 2, msg: format!("IoFailure: {}: {e}", path.display()) }
}

type CliResult<T = ()> = Result<T, Failure>;

fn emit(out: Option<&Path>, payload: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, payload).map_err(|e| io_failure(path, e)),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, payload: &str) -> CliResult {
    std::fs::write(path, payload).map_err(|e| io_failure(path, e))
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }
}

fn select_config(flags: &SelectionFlags) -> CliResult<(Strategy, SelectConfig)> {
    let strategy: Strategy = flags.strategy.parse()?;
    let prototype_kind: PrototypeKind = flags.prototype.parse()?;
    let classifier: ClassifierSpec = flags.clf.parse()?;
    let config = SelectConfig {
        params: SelectionParams { prototype_kind, znormalize: flags.znorm, seed: flags.seed },
        classifier,
        ..SelectConfig::default()
    };
    Ok((strategy, config))
}

fn render_selection(ds: &chansel::MtsDataset, r: &SelectionResult) -> String {
    let mut out = format!(
        "{}: kept {}/{} channels in {:.3} ms\n",
        r.strategy,
        r.selected.len(),
        ds.n_channels(),
        r.elapsed.as_secs_f64() * 1e3
    );
    for &c in &r.selected {
        let _ = writeln!(out, "  {:>5} {:<16} {:.6}", c, ds.channel_name(c), r.scores[c]);
    }
    out
}

fn cmd_select(args: SelectArgs) -> CliResult {
    configure_threads(args.flags.threads);
    let (strategy, config) = select_config(&args.flags)?;
    let ds = parse_archive_file(&args.input)?;
    let result = select(&ds, strategy, &config)?;
    let payload = if args.flags.pretty {
        render_selection(&ds, &result)
    } else {
        format!("{}\n", result.to_json())
    };
    emit(args.out.as_deref(), &payload)
}

fn cmd_restrict(args: RestrictArgs) -> CliResult {
    let ds = parse_archive_file(&args.input)?;
    let text = match &args.selection {
        Some(path) => std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| io_failure(Path::new("<stdin>"), e))?;
            s
        }
    };
    let selection = SelectionResult::from_json(&text)?;
    let reduced = ds.restrict(&selection.selected)?;
    match &args.out {
        Some(path) => write_archive_file(&reduced, path)?,
        None => print!("{}", write_archive(&reduced)),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    configure_threads(args.flags.threads);
    let (strategy, config) = select_config(&args.flags)?;
    let train = parse_archive_file(&args.input)?;
    let test = parse_archive_file(&args.test)?;
    let clf = config.classifier;
    let report = run_benchmark(&train, &test, strategy, &config, clf, args.flags.seed)?;
    let payload = if args.flags.pretty {
        report.render_text()
    } else {
        format!("{}\n", report.to_json())
    };
    emit(args.out.as_deref(), &payload)
}

fn cmd_synth(args: SynthArgs) -> CliResult {
    let spec = SynthSpec {
        channels: args.channels,
        informative: args.informative,
        classes: args.classes,
        per_class: args.per_class,
        length: args.length,
        noise_sigma: args.sigma,
        effect: args.effect,
        seed: args.seed,
    };
    let data = generate(&spec)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let name = data.train.name().to_string();
    write_archive_file(&data.train, args.out.join(format!("{name}_TRAIN.ts")))?;
    write_archive_file(&data.test, args.out.join(format!("{name}_TEST.ts")))?;
    let truth = SynthTruth { informative: data.informative, spec };
    let json = serde_json::to_string(&truth).expect("truth serializes");
    write_file(&args.out.join(format!("{name}_truth.json")), &format!("{json}\n"))?;
    if args.pretty {
        println!(
            "wrote {name}_TRAIN.ts, {name}_TEST.ts, {name}_truth.json to {}; informative channels {:?}",
            args.out.display(),
            truth.informative
        );
    } else {
        println!("{json}");
    }
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> CliResult {
    let kind: PrototypeKind = args.prototype.parse()?;
    let mut ds = parse_archive_file(&args.input)?;
    if args.znorm {
        ds = znormalize(&ds);
    }
    let ps = compute_prototypes(&ds, kind)?;
    let dm = build_distance_matrix(&ps);
    let sums = channel_sums(&dm);
    let maxes = dm.channel_max();
    let mags = ps.magnitudes();
    let mut scores = String::from("channel,name,ecs_score,max_pair_distance,prototype_magnitude\n");
    for c in 0..ds.n_channels() {
        let _ = writeln!(
            scores,
            "{c},{},{:?},{:?},{:?}",
            ds.channel_name(c),
            sums[c],
            maxes[c],
            mags[c]
        );
    }
    std::fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    write_file(&args.out.join("distances.csv"), &dm.to_csv())?;
    write_file(&args.out.join("scores.csv"), &scores)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Select(a) => cmd_select(a),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
