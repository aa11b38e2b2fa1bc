use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liar_core::adversary::{carole_break_original, carole_break_pathological, carole_threshold_report, WholeGameBalance};
use liar_core::bounds::{
    sphere_bound, theorem1_thresholds, theorem2_thresholds, threshold_rows, BoundConstants, GameShape, ThresholdRow,
};
use liar_core::game::{degenerate_witness, optimal_n, solve_adaptive, solve_two_batch, Play, Threshold, TwoBatchStrategy};
use liar_core::numeric::{Enclosure, DEFAULT_PREC};
use liar_core::synth::{check_conditions, cube_root_ceil, sweep, synth_original, synth_pathological, SweepGrid, SynthParams};
use liar_core::{channel::presets, Channel, Error, Limits, Variant, Winner};
use serde_json::json;

mod selftest;

#[derive(Parser)]
#[command(name = "liargame", version, about = "Solve, synthesize and bound two-batch liar games")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Largest t^Q the tools may enumerate.
    #[arg(long, global = true, env = "LIARGAME_CAP", default_value_t = 1 << 20)]
    max_space: u128,

    /// Largest number of solver states or search nodes.
    #[arg(long, global = true, env = "LIARGAME_NODES", default_value_t = 50_000_000)]
    max_nodes: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide who wins one game.
    Solve(SolveArgs),
    /// Build Paul's two-batch strategy from the sufficient conditions.
    Synth(SynthArgs),
    /// Replay a strategy file against every response.
    Verify(VerifyArgs),
    /// Optimal search-space size.
    Maxn(MaxnArgs),
    /// Threshold tables.
    Bounds(BoundsArgs),
    /// Search for a response that breaks a strategy, or print Carole's thresholds.
    Adversary(AdversaryArgs),
    /// Randomized self-checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct ChannelSource {
    /// Channel file: {"t": 2, "strings": [[], [[0,1]], ...]}.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Built-in channel: sym1, sym2, sym1-t3, z1, z2, rz1, unidir2, forced.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Pathological,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Original => Variant::Original,
            VariantArg::Pathological => Variant::Pathological,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Adaptive,
    TwoBatch,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ChannelSource,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    q: usize,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "adaptive")]
    mode: Mode,
    /// First-batch length for two-batch play.
    #[arg(long)]
    q1: Option<usize>,
    /// Write Paul's two-batch strategy here when he wins.
    #[arg(long)]
    strategy_out: Option<PathBuf>,
}

#[derive(Args)]
struct MaxnArgs {
    #[command(flatten)]
    source: ChannelSource,
    #[arg(long)]
    q: usize,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "adaptive")]
    mode: Mode,
    #[arg(long)]
    q1: Option<usize>,
    /// Largest n examined.
    #[arg(long, default_value_t = 1 << 20)]
    n_cap: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    source: ChannelSource,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long)]
    q1: Option<usize>,
    #[arg(long)]
    q2: Option<usize>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    #[arg(long, default_value_t = 1)]
    alpha: u64,
    #[arg(long, default_value_t = 0)]
    alpha_prime: u64,
    /// Search-space size; defaults to the capacity (original) or the
    /// smallest coverable size (pathological).
    #[arg(long)]
    n: Option<u64>,
    /// Strategy file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// List every small parameter set whose conditions hold instead.
    #[arg(long)]
    sweep: bool,
    #[arg(long, default_value_t = 14)]
    q_max: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: ChannelSource,
    #[arg(long)]
    strategy: PathBuf,
    #[arg(long, value_enum)]
    variant: VariantArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BoundsArgs {
    /// Total rounds; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: u8,
    /// Number of lie strings of the top length.
    #[arg(long = "Ek", alias = "ek")]
    e_k: u64,
    /// Second-batch length; defaults to ⌊√q⌋.
    #[arg(long)]
    q2: Option<usize>,
    /// JSON file with constants c1..c13.
    #[arg(long)]
    constants: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct AdversaryArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// Strategy to attack.
    #[arg(long, required_unless_present = "threshold")]
    strategy: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "threshold")]
    variant: Option<VariantArg>,
    /// Print Carole's volume thresholds instead.
    #[arg(long, requires_all = ["q1", "q2"])]
    threshold: bool,
    #[arg(long)]
    q1: Option<usize>,
    #[arg(long)]
    q2: Option<usize>,
    #[arg(long)]
    constants: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    cases: usize,
}

enum Failure {
    Core(Error),
    Io(String),
    /// Conditions or verification failed; the report is already printed.
    Unsatisfied,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_channel(src: &ChannelSource) -> Result<Channel, Failure> {
    match (&src.channel, &src.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(Channel::from_json(&text)?)
        }
        (None, Some(name)) => presets::by_name(name)
            .ok_or_else(|| Failure::Core(Error::InvalidArgument(format!("unknown preset {name:?}")))),
        (None, None) => unreachable!("clap requires a channel source"),
    }
}

fn load_strategy(path: &PathBuf) -> Result<TwoBatchStrategy, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(TwoBatchStrategy::from_json(&text)?)
}

/// Writes one line to stdout, exiting quietly when the reader has gone away.
fn say(text: &str) {
    if let Err(e) = writeln!(io::stdout().lock(), "{text}") {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(3);
    }
}

fn emit(cli: &Cli, value: &serde_json::Value, text: impl FnOnce() -> String) {
    if cli.json {
        say(&serde_json::to_string_pretty(value).expect("json"));
    } else {
        say(&text());
    }
}

fn play_for(mode: Mode, q: usize, q1: Option<usize>) -> Result<Play, Failure> {
    match mode {
        Mode::Adaptive => Ok(Play::Adaptive),
        Mode::TwoBatch => {
            let q1 = q1.ok_or_else(|| Failure::Core(Error::InvalidArgument("--q1 is required for two-batch play".into())))?;
            if q1 > q {
                return Err(Failure::Core(Error::InvalidArgument(format!("--q1 {q1} exceeds --q {q}"))));
            }
            Ok(Play::TwoBatch { q1 })
        }
    }
}

fn cmd_solve(cli: &Cli, args: &SolveArgs, limits: &Limits) -> Outcome {
    let channel = load_channel(&args.source)?;
    let variant = Variant::from(args.variant);
    let witness = degenerate_witness(&channel, variant);
    let play = play_for(args.mode, args.q, args.q1)?;
    let (winner, detail) = match play {
        Play::Adaptive => {
            let out = solve_adaptive(&channel, args.n, args.q, variant, limits)?;
            (out.winner, json!({ "states_solved": out.states_solved }))
        }
        Play::TwoBatch { q1 } => {
            let out = solve_two_batch(&channel, args.n, q1, args.q - q1, variant, limits)?;
            if let (Some(path), Some(s)) = (&args.strategy_out, &out.strategy) {
                fs::write(path, s.to_json())?;
            }
            (out.winner, json!({ "first_batches_tried": out.first_batches_tried }))
        }
    };
    let value = json!({
        "winner": winner,
        "variant": variant,
        "n": args.n,
        "q": args.q,
        "degenerate_witness": witness,
        "detail": detail,
    });
    emit(cli, &value, || match &witness {
        Some(w) if w.winner == Winner::Carole => format!("{winner}\nCarole answers {} to every question", w.letter),
        Some(w) => format!("{winner}\nPaul asks every element to answer {}", w.letter),
        None => winner.to_string(),
    });
    Ok(())
}

fn cmd_maxn(cli: &Cli, args: &MaxnArgs, limits: &Limits) -> Outcome {
    let channel = load_channel(&args.source)?;
    let variant = Variant::from(args.variant);
    let play = play_for(args.mode, args.q, args.q1)?;
    let threshold = optimal_n(&channel, args.q, variant, play, limits, args.n_cap)?;
    let value = json!({ "variant": variant, "q": args.q, "threshold": threshold });
    emit(cli, &value, || match threshold {
        Threshold::Exact(n) => n.to_string(),
        Threshold::Unbounded => "unbounded".to_string(),
        Threshold::NoneUpTo(cap) => format!("none up to {cap}"),
    });
    Ok(())
}

fn synth_params(args: &SynthArgs, k: usize) -> Result<SynthParams, Failure> {
    let (q1, q2) = match (args.q1, args.q2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Failure::Core(Error::InvalidArgument("--q1 and --q2 are required".into()))),
    };
    let mut p = SynthParams::with_defaults(q1, q2, k);
    p.m1 = args.m1.unwrap_or(cube_root_ceil(q1).max(1));
    p.m2 = args.m2.unwrap_or(cube_root_ceil(q2).max(1));
    p.eta1 = args.eta1.unwrap_or(p.eta1);
    p.eta2 = args.eta2.unwrap_or(p.eta2);
    p.alpha = args.alpha;
    p.alpha_prime = args.alpha_prime;
    Ok(p)
}

fn cmd_synth(cli: &Cli, args: &SynthArgs, limits: &Limits) -> Outcome {
    let channel = load_channel(&args.source)?;
    let variant = Variant::from(args.variant);
    if args.sweep {
        let grid = SweepGrid { q_max: args.q_max, ..SweepGrid::default() };
        let hits: Vec<_> = sweep(&channel, &grid, limits)?
            .into_iter()
            .filter(|h| match variant {
                Variant::Original => h.original,
                Variant::Pathological => h.pathological,
            })
            .collect();
        let value = serde_json::to_value(&hits).expect("json");
        emit(cli, &value, || {
            hits.iter()
                .map(|h| {
                    let p = &h.params;
                    format!(
                        "q1={} q2={} m1={} m2={} eta1={} eta2={} alpha={} alpha_prime={}",
                        p.q1, p.q2, p.m1, p.m2, p.eta1, p.eta2, p.alpha, p.alpha_prime
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        });
        return Ok(());
    }
    let params = synth_params(args, channel.order())?;
    let report = check_conditions(&channel, &params, limits)?;
    if !report.holds(variant) {
        say(&report.to_json());
        return Err(Failure::Unsatisfied);
    }
    let n = args.n.unwrap_or(match variant {
        Variant::Original => report.capacity_original,
        Variant::Pathological => report.min_n_pathological,
    });
    let strategy = match variant {
        Variant::Original => synth_original(&channel, n, &params, limits)?,
        Variant::Pathological => synth_pathological(&channel, n, &params, limits)?,
    };
    if let Some(path) = &args.out {
        fs::write(path, strategy.to_json())?;
    }
    let verdict = strategy.verify(&channel, variant, limits)?;
    let value = json!({
        "variant": variant,
        "n": n,
        "params": params,
        "verified": verdict.valid,
        "responses_checked": verdict.responses_checked,
        "strategy_file": args.out.as_ref().map(|p| p.display().to_string()),
    });
    emit(cli, &value, || {
        format!(
            "synthesized {variant} strategy for n = {n}; verified over {} first-batch responses",
            verdict.responses_checked
        )
    });
    Ok(())
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, limits: &Limits) -> Outcome {
    let channel = load_channel(&args.source)?;
    let strategy = load_strategy(&args.strategy)?;
    let verdict = strategy.verify(&channel, args.variant.into(), limits)?;
    let value = serde_json::to_value(&verdict).expect("json");
    emit(cli, &value, || {
        if verdict.valid {
            format!("pass ({} responses)", verdict.responses_checked)
        } else {
            format!(
                "fail at {}: {}",
                verdict.failure.as_ref().map(|w| w.to_string()).unwrap_or_default(),
                verdict.reason.clone().unwrap_or_default()
            )
        }
    });
    if verdict.valid {
        Ok(())
    } else {
        Err(Failure::Unsatisfied)
    }
}

fn load_constants(path: &Option<PathBuf>) -> Result<Option<BoundConstants>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Ok(Some(BoundConstants::from_json(&text)?))
        }
    }
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Outcome {
    let constants = load_constants(&args.constants)?;
    if let Some(c) = &constants {
        c.validate(args.t, args.k, args.e_k)?;
    }
    let mut rows: Vec<ThresholdRow> = Vec::new();
    let mut reports = Vec::new();
    for &q in &args.q {
        let q2 = args.q2.unwrap_or((q as f64).sqrt() as usize).min(q);
        let sphere = Enclosure::exact(sphere_bound(q, args.k, args.t, args.e_k)?);
        rows.push(ThresholdRow::new(q - q2, q2, "sphere_bound", &sphere));
        if let Some(c) = &constants {
            let shape = GameShape { q1: q - q2, q2, t: args.t, k: args.k, e_k: args.e_k };
            if c.c2.is_some() && c.c3.is_some() {
                let r = theorem1_thresholds(&shape, c, DEFAULT_PREC)?;
                rows.extend(threshold_rows(&r, q - q2, q2).into_iter().filter(|r| r.name != "sphere_bound"));
                reports.push(r);
            }
            if c.c4.is_some() && c.c5.is_some() && c.c6.is_some() {
                let r = theorem2_thresholds(&shape, c, DEFAULT_PREC)?;
                rows.extend(threshold_rows(&r, q - q2, q2).into_iter().filter(|r| r.name != "sphere_bound"));
                reports.push(r);
            }
        }
    }
    if cli.json || matches!(args.format, Format::Json) {
        say(&serde_json::to_string_pretty(&json!({ "rows": rows, "reports": reports })).expect("json"));
    } else {
        let mut w = csv::Writer::from_writer(io::stdout());
        for r in &rows {
            w.serialize(r).map_err(|e| Failure::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_adversary(cli: &Cli, args: &AdversaryArgs, limits: &Limits) -> Outcome {
    let channel = load_channel(&args.source)?;
    if args.threshold {
        let (q1, q2) = (args.q1.expect("required by clap"), args.q2.expect("required by clap"));
        let params = SynthParams::with_defaults(q1, q2, channel.order());
        let q = q1 + q2;
        let whole = WholeGameBalance { m: cube_root_ceil(q).max(1), eta: (channel.order() + 1) as f64 };
        let constants = load_constants(&args.constants)?;
        let report = carole_threshold_report(&channel, &params, &whole, constants.as_ref(), DEFAULT_PREC)?;
        let value = serde_json::to_value(&report).expect("json");
        emit(cli, &value, || {
            report
                .values
                .iter()
                .map(|(k, v)| format!("{k}: {v}"))
                .chain(report.notes.iter().cloned())
                .collect::<Vec<_>>()
                .join("\n")
        });
        return Ok(());
    }
    let strategy = load_strategy(args.strategy.as_ref().expect("required by clap"))?;
    let variant: Variant = args.variant.expect("required by clap").into();
    let found = match variant {
        Variant::Original => carole_break_original(&strategy, &channel, limits)?,
        Variant::Pathological => carole_break_pathological(&strategy, &channel, limits)?,
    };
    let value = serde_json::to_value(&found).expect("json");
    emit(cli, &value, || match &found {
        Some(b) => serde_json::to_string(b).expect("json"),
        None => "none".to_string(),
    });
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if cli.max_space == 0 || cli.max_nodes == 0 {
        return Err(Failure::Core(Error::InvalidArgument("caps must be positive".into())));
    }
    let limits = Limits { max_space: cli.max_space, max_nodes: cli.max_nodes, ..Limits::default() };
    match &cli.command {
        Command::Solve(a) => cmd_solve(cli, a, &limits),
        Command::Synth(a) => cmd_synth(cli, a, &limits),
        Command::Verify(a) => cmd_verify(cli, a, &limits),
        Command::Maxn(a) => cmd_maxn(cli, a, &limits),
        Command::Bounds(a) => cmd_bounds(cli, a),
        Command::Adversary(a) => cmd_adversary(cli, a, &limits),
        Command::Selftest(a) => {
            let report = selftest::run(a.seed, a.cases, &limits)?;
            let value = serde_json::to_value(&report).expect("json");
            emit(cli, &value, || report.summary());
            if report.failures() == 0 {
                Ok(())
            } else {
                Err(Failure::Unsatisfied)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(Failure::Unsatisfied) => 1,
        Err(Failure::Core(Error::ConditionsUnsatisfied(msg))) => {
            eprintln!("error: conditions not satisfied: {msg}");
            1
        }
        Err(Failure::Core(e @ Error::CapExceeded { .. })) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            3
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    };
    let _ = io::stdout().flush();
    ExitCode::from(code)
}
