use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deuce::atp::{fit_report, parse_stats, write_fit_csv, PlayerStats, SAMPLE_STATS_CSV};
use deuce::closed_form;
use deuce::engine::metrics_exact;
use deuce::monte_carlo::{estimate_metrics, MetricEstimate, SimConfig};
use deuce::shaper::{compare_table, recommend_cutoff, write_compare_csv, ShapingTargets};
use deuce::{Error, GameMetrics, RuleKind, ServeProfile};
use deuce_cli::svg;
use deuce_cli::sweep::{run_sweep, to_series, write_sweep_csv, Metric, SweepSpec, SweepVariable};
use serde::Serialize;

/// Largest closed-form versus engine gap tolerated before `eval` and
/// `compare` report an inconsistency.
const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "deuce",
    version,
    about = "Tennis game models under existing and alternative serving rules"
)]
struct Cli {
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metrics for one game and profile, closed form next to the exact engine.
    Eval(EvalArgs),
    /// Metrics over a probability grid as CSV, optionally plotted to SVG.
    Sweep(SweepArgs),
    /// Existing-game prediction against observed service games won.
    Fit(StatsArg),
    /// Cutoff x that places two players at the target win chances.
    Shape(ShapeArgs),
    /// Existing game against the single-serve-after-x game for every player.
    Compare(CompareArgs),
    /// Monte Carlo estimates with their distance from the exact values.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GameArgs {
    /// A, Bj, Bj1, Bj2, T, B, B1, B2, C (with --x) or C0..C6.
    #[arg(long)]
    game: String,
    /// Cutoff for C: points played with a second serve.
    #[arg(long)]
    x: Option<u8>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Same probability on every point.
    #[arg(long, conflicts_with_all = ["pf", "ps"])]
    p: Option<f64>,
    /// Point-win chance on a full serve.
    #[arg(long)]
    pf: Option<f64>,
    /// Point-win chance with a single serve or when receiving.
    #[arg(long)]
    ps: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated games.
    #[arg(long, value_delimiter = ',', required = true)]
    games: Vec<String>,
    /// Comma-separated metrics: win, bp, points, bps.
    #[arg(long, value_delimiter = ',', default_value = "win,bp,points,bps")]
    metrics: Vec<String>,
    /// p (both players) or p_F.
    #[arg(long = "var", default_value = "p")]
    variable: String,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 1.0)]
    stop: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// With --var p_F: p_S = 1 - p_F + delta.
    #[arg(long)]
    delta: Option<f64>,
    /// With --var p_F: fixed p_S.
    #[arg(long)]
    ps: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArg {
    /// Player statistics CSV; the bundled sample when absent.
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ShapeArgs {
    #[command(flatten)]
    stats: StatsArg,
    /// Weaker player, by rank or name; defaults to the lowest ranked.
    #[arg(long)]
    low: Option<String>,
    /// Stronger player, by rank or name; defaults to the highest ranked.
    #[arg(long)]
    high: Option<String>,
    /// Win chance the weaker player should keep.
    #[arg(long, default_value_t = 0.60)]
    target_low: f64,
    /// Win chance the stronger player should drop to.
    #[arg(long, default_value_t = 0.75)]
    target_high: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    stats: StatsArg,
    #[arg(long, default_value_t = 3)]
    x: u8,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Games to simulate.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Deuce returns allowed in one game before giving up.
    #[arg(long, default_value_t = SimConfig::DEFAULT_DEUCE_CAP)]
    max_deuce_cycles: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Consistency(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Consistency(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Consistency(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Range { .. } | Error::DeuceCapExceeded(_) | Error::DegenerateProfile(_) => {
                Failure::Data(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => eval(a, cli.json),
        Command::Sweep(a) => sweep(a, cli.json),
        Command::Fit(a) => fit(a, cli.json),
        Command::Shape(a) => shape(a, cli.json),
        Command::Compare(a) => compare(a, cli.json),
        Command::Simulate(a) => simulate(a, cli.json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn rule(args: &GameArgs) -> Result<RuleKind, Failure> {
    let kind = match (args.game.as_str(), args.x) {
        ("C", Some(x)) => format!("C{x}").parse::<RuleKind>()?,
        ("C", None) => return Err(Failure::Usage("game C needs --x".into())),
        (g, x) => {
            let kind = g.parse::<RuleKind>()?;
            match (kind, x) {
                (RuleKind::C(k), Some(x)) if k != x => {
                    return Err(Failure::Usage(format!("--game {g} contradicts --x {x}")))
                }
                (RuleKind::C(_), _) | (_, None) => kind,
                (_, Some(_)) => return Err(Failure::Usage(format!("--x only applies to game C, not {g}"))),
            }
        }
    };
    Ok(kind)
}

fn profile(args: &ProfileArgs, kind: RuleKind) -> Result<ServeProfile, Failure> {
    let one_variable = matches!(kind, RuleKind::A | RuleKind::T);
    let (pf, ps) = match (args.p, args.pf, args.ps) {
        (Some(p), None, None) => (p, p),
        (None, Some(pf), Some(ps)) => (pf, ps),
        (None, Some(pf), None) if one_variable => (pf, pf),
        _ => return Err(Failure::Usage("give --p, or --pf with --ps".into())),
    };
    Ok(ServeProfile::new(pf, ps)?)
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let mut out = stdout();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_kv(rows: &[(&str, String)]) -> Outcome {
    let mut w = csv::Writer::from_writer(stdout());
    w.write_record(["field", "value"]).map_err(csv_failure)?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()]).map_err(csv_failure)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Data(e.to_string())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

#[derive(Serialize)]
struct EvalReport {
    game: String,
    schedule: String,
    p_f: f64,
    p_s: f64,
    closed_form: Option<GameMetrics>,
    engine: GameMetrics,
    max_gap: Option<f64>,
}

fn eval(args: EvalArgs, json: bool) -> Outcome {
    let kind = rule(&args.game)?;
    let prof = profile(&args.profile, kind)?;
    let sched = kind.schedule()?;
    let engine = metrics_exact(&sched, &prof)?;
    let closed = closed_form::metrics(kind, &prof).transpose()?;
    let max_gap = closed.as_ref().map(|c| c.max_abs_diff(&engine));
    let report = EvalReport {
        game: kind.label(),
        schedule: sched.to_string(),
        p_f: prof.p_f(),
        p_s: prof.p_s(),
        closed_form: closed,
        engine,
        max_gap,
    };
    if json {
        print_json(&report)?;
    } else {
        let mut w = csv::Writer::from_writer(stdout());
        w.write_record(["metric", "closed_form", "engine", "gap"])
            .map_err(csv_failure)?;
        for m in Metric::ALL {
            let e = m.of(&report.engine);
            let c = report.closed_form.as_ref().and_then(|c| m.of(c));
            let gap = c.zip(e).map(|(c, e)| (c - e).abs());
            w.write_record([
                m.name().to_string(),
                fmt_opt(c),
                fmt_opt(e),
                gap.map_or_else(String::new, |g| format!("{g:.1e}")),
            ])
            .map_err(csv_failure)?;
        }
        w.flush()?;
    }
    match max_gap {
        Some(g) if g.is_nan() || g > CONSISTENCY_TOL => Err(Failure::Consistency(format!(
            "closed form and engine differ by {g:e} for {} at ({}, {})",
            report.game, report.p_f, report.p_s
        ))),
        _ => Ok(()),
    }
}

fn sweep(args: SweepArgs, json: bool) -> Outcome {
    let games = args
        .games
        .iter()
        .map(|g| g.parse::<RuleKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let metrics = args
        .metrics
        .iter()
        .map(|m| m.parse::<Metric>())
        .collect::<Result<Vec<_>, _>>()?;
    let variable: SweepVariable = args.variable.parse()?;
    let spec = SweepSpec::new(variable, args.start, args.stop, args.step, args.delta, args.ps)?;
    let output = run_sweep(&games, &metrics, &spec)?;
    if output.skipped > 0 {
        eprintln!(
            "note: {} grid points skipped (profile outside [0, 1] or singular)",
            output.skipped
        );
    }
    match (&args.out, json) {
        (Some(path), false) => write_sweep_csv(&output.rows, BufWriter::new(create(path)?))?,
        (Some(path), true) => {
            let mut f = BufWriter::new(create(path)?);
            serde_json::to_writer_pretty(&mut f, &output.rows)?;
            f.flush()?;
        }
        (None, false) => write_sweep_csv(&output.rows, stdout())?,
        (None, true) => print_json(&output.rows)?,
    }
    if let Some(path) = &args.svg {
        let x_label = match variable {
            SweepVariable::P => "p",
            SweepVariable::PF => "p_F",
        };
        let plot = svg::render(&to_series(&output.rows), x_label, "value");
        std::fs::write(path, plot).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_players(arg: &StatsArg) -> Result<Vec<PlayerStats>, Failure> {
    let (label, text) = match &arg.csv {
        Some(path) => (
            path.display().to_string(),
            std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
        ),
        None => ("bundled sample".to_string(), SAMPLE_STATS_CSV.to_string()),
    };
    let blank = text
        .lines()
        .all(|l| l.trim().is_empty() || l.trim_start().starts_with('#'));
    if blank {
        return Err(Failure::Usage(format!("{label}: no header or rows")));
    }
    let parsed = parse_stats(text.as_bytes()).map_err(|e| Failure::Data(format!("{label}: {e}")))?;
    for w in &parsed.warnings {
        eprintln!("warning: {label}: {w}");
    }
    if parsed.players.is_empty() {
        return Err(Failure::Usage(format!("{label}: {}", Error::EmptyInput)));
    }
    Ok(parsed.players)
}

fn fit(args: StatsArg, json: bool) -> Outcome {
    let players = load_players(&args)?;
    let report = fit_report(&players)?;
    if json {
        print_json(&report)?;
    } else {
        write_fit_csv(&report, stdout())?;
        eprintln!("{}", report.summary.to_string().trim_end());
    }
    Ok(())
}

fn select<'a>(players: &'a [PlayerStats], key: &str) -> Result<&'a PlayerStats, Failure> {
    let found = match key.parse::<u32>() {
        Ok(rank) => players.iter().find(|p| p.rank == rank),
        Err(_) => {
            let key = key.to_lowercase();
            players
                .iter()
                .find(|p| p.name.to_lowercase() == key)
                .or_else(|| players.iter().find(|p| p.name.to_lowercase().contains(&key)))
        }
    };
    found.ok_or_else(|| Failure::Data(format!("no player matches '{key}'")))
}

fn shape(args: ShapeArgs, json: bool) -> Outcome {
    let players = load_players(&args.stats)?;
    let low = match &args.low {
        Some(k) => select(&players, k)?,
        None => players.iter().max_by_key(|p| p.rank).expect("non-empty"),
    };
    let high = match &args.high {
        Some(k) => select(&players, k)?,
        None => players.iter().min_by_key(|p| p.rank).expect("non-empty"),
    };
    let targets = ShapingTargets::new(args.target_low, args.target_high)?;
    let sol = recommend_cutoff(low, high, &targets)?;
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    if json {
        return print_json(&sol);
    }
    write_kv(&[
        ("low", low.name.clone()),
        ("high", high.name.clone()),
        ("p_trad", format!("{:.6}", sol.p_trad.value())),
        ("p_exc", format!("{:.6}", sol.p_exc.value())),
        ("x_low", format!("{:.6}", sol.x_low)),
        ("x_high", format!("{:.6}", sol.x_high)),
        ("x_recommended", sol.x_recommended.to_string()),
    ])
}

fn compare(args: CompareArgs, json: bool) -> Outcome {
    let players = load_players(&args.stats)?;
    let rows = compare_table(&players, args.x)?;
    if json {
        print_json(&rows)?;
    } else {
        write_compare_csv(&rows, 6, stdout())?;
        let mut short = Vec::new();
        write_compare_csv(&rows, 3, &mut short)?;
        eprint!("{}", String::from_utf8_lossy(&short));
    }
    let worst = rows.iter().filter_map(|r| r.closed_form_gap).fold(0.0, f64::max);
    if worst.is_nan() || worst > CONSISTENCY_TOL {
        return Err(Failure::Consistency(format!(
            "closed form and engine differ by {worst:e}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SimLine {
    metric: &'static str,
    mean: f64,
    std_err: Option<f64>,
    exact: f64,
    z: Option<f64>,
}

fn simulate(args: SimulateArgs, json: bool) -> Outcome {
    let kind = rule(&args.game)?;
    let prof = profile(&args.profile, kind)?;
    let sched = kind.schedule()?;
    let mut cfg = SimConfig::new(args.n, args.seed)?;
    cfg.max_deuce_cycles = args.max_deuce_cycles;
    cfg.validate()?;
    let exact = metrics_exact(&sched, &prof)?;
    let sim = estimate_metrics(&sched, &prof, &cfg)?;
    let pairs: [(Metric, Option<MetricEstimate>); 4] = [
        (Metric::Win, Some(sim.win_prob)),
        (Metric::Bp, sim.bp_prob),
        (Metric::Points, Some(sim.expected_points)),
        (Metric::Bps, sim.expected_bps),
    ];
    let lines: Vec<SimLine> = pairs
        .into_iter()
        .filter_map(|(m, est)| {
            let (est, exact) = (est?, m.of(&exact)?);
            Some(SimLine {
                metric: m.name(),
                mean: est.mean,
                std_err: est.std_err,
                exact,
                z: est.z_score(exact),
            })
        })
        .collect();
    if json {
        #[derive(Serialize)]
        struct Report<'a> {
            game: String,
            p_f: f64,
            p_s: f64,
            n_games: u64,
            seed: u64,
            metrics: &'a [SimLine],
        }
        return print_json(&Report {
            game: kind.label(),
            p_f: prof.p_f(),
            p_s: prof.p_s(),
            n_games: sim.n_games,
            seed: args.seed,
            metrics: &lines,
        });
    }
    let mut w = csv::Writer::from_writer(stdout());
    w.write_record(["metric", "mean", "std_err", "exact", "z"])
        .map_err(csv_failure)?;
    for l in &lines {
        w.write_record([
            l.metric.to_string(),
            format!("{:.6}", l.mean),
            fmt_opt(l.std_err),
            format!("{:.6}", l.exact),
            l.z.map_or_else(String::new, |z| format!("{z:.3}")),
        ])
        .map_err(csv_failure)?;
    }
    w.flush()?;
    Ok(())
}
