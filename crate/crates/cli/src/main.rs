//! `hidden-agenda`: run self-play batches, analyze replays, serve live play.
//!
//! Machine-readable output is one JSON object per line; each object has a
//! `record` field naming its kind.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hidden_agenda::agents::Roster;
use hidden_agenda::harness::{measure_throughput, pair_metrics, run_batch, vote_timeline, EpisodeOptions, EpisodeRecord};
use hidden_agenda::observation::RenderMode;
use hidden_agenda::{GameConfig, WinCondition};
use hidden_agenda_service::server::{default_addr, ServerConfig, ADDR_ENV};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "hidden-agenda", version, about = "Hidden Agenda self-play, analytics and live sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a batch of episodes and print one line per episode plus a summary.
    Run(RunArgs),
    /// Win histogram and pair matrices over saved replays.
    Analyze(AnalyzeArgs),
    /// Ballots at every step of one voting round.
    Timeline(TimelineArgs),
    /// Re-simulate replays and check them against their logs.
    ReplayVerify(VerifyArgs),
    /// Measure stepping speed on this thread.
    Throughput(ThroughputArgs),
    /// Serve live sessions over WebSocket.
    Serve(ServeArgs),
}

#[derive(Args)]
struct GameArgs {
    /// Game config TOML; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set fuel_goal=16`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Roster preset name or roster TOML path.
    #[arg(long, default_value = "mixed")]
    roster: String,
}

impl GameArgs {
    fn load(&self) -> Result<(GameConfig, Roster)> {
        let mut cfg = match &self.config {
            Some(p) => GameConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => GameConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').with_context(|| format!("`{kv}` is not KEY=VALUE"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        let roster = Roster::resolve(&self.roster)?;
        Ok((cfg, roster))
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 100)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Directory for replay files, one per episode.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Replay files or glob patterns.
    #[arg(required = true)]
    replays: Vec<String>,
    /// Also write the machine-readable lines to this file.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Print JSON lines instead of the text report.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TimelineArgs {
    replay: PathBuf,
    /// Voting round, counting from 0.
    #[arg(long, default_value_t = 0)]
    round: usize,
    /// Write a color-strip PNG here.
    #[arg(long)]
    png: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(required = true)]
    replays: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sprites,
    Rgb,
}

#[derive(Args)]
struct ThroughputArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, value_enum, default_value = "sprites")]
    mode: Mode,
    /// Minimum env steps to time.
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = ADDR_ENV, default_value_t = default_addr())]
    addr: String,
    /// Save each finished session's replay here.
    #[arg(long)]
    record_dir: Option<PathBuf>,
    /// Seconds a finished session lingers before it is dropped.
    #[arg(long, default_value_t = 5.0)]
    grace: f64,
}

fn expand(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in patterns {
        let before = out.len();
        for entry in glob::glob(p).with_context(|| format!("bad pattern `{p}`"))? {
            out.push(entry?);
        }
        if out.len() == before {
            bail!("no files match `{p}`");
        }
    }
    Ok(out)
}

fn line(out: &mut impl Write, value: serde_json::Value) -> Result<()> {
    writeln!(out, "{value}")?;
    Ok(())
}

fn histogram_json(counts: &[(WinCondition, u64)], total: u64) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (w, c) in counts {
        m.insert(
            w.to_string(),
            json!({"count": c, "frequency": if total == 0 { 0.0 } else { *c as f64 / total as f64 }}),
        );
    }
    serde_json::Value::Object(m)
}

fn run(args: RunArgs) -> Result<()> {
    let (cfg, roster) = args.game.load()?;
    let seeds: Vec<u64> = (args.first_seed..args.first_seed + args.episodes).collect();
    let opts = EpisodeOptions {
        record: args.out.is_some(),
        render: RenderMode::Sprites,
    };
    let report = run_batch(&cfg, &seeds, &roster, args.parallel, opts)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for r in &report.records {
        if let Some(dir) = &args.out {
            r.save(dir.join(format!("episode-{}.json", r.seed)))?;
        }
        line(
            &mut out,
            json!({"record": "episode", "seed": r.seed, "win": r.win, "steps": r.steps, "returns": r.returns, "agents": r.agents}),
        )?;
    }
    let counts: Vec<_> = WinCondition::ALL.iter().map(|w| (*w, report.histogram.count(*w))).collect();
    line(
        &mut out,
        json!({
            "record": "summary",
            "episodes": report.episodes,
            "histogram": histogram_json(&counts, report.histogram.total()),
            "mean_length": report.mean_length,
            "mean_agent_returns": report.mean_agent_returns,
            "elapsed_seconds": report.elapsed_seconds,
            "episodes_per_second": report.episodes_per_second,
            "env_steps_per_second": report.env_steps_per_second,
        }),
    )
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<EpisodeRecord>> {
    paths
        .iter()
        .map(|p| EpisodeRecord::load(p).with_context(|| format!("loading {}", p.display())))
        .collect()
}

fn fmt_matrix(m: &[Vec<Option<f64>>], order: &[usize]) -> String {
    let mut s = String::from("      ");
    for a in order {
        s.push_str(&format!("{:>8}", format!("a{a}")));
    }
    s.push('\n');
    for (i, row) in m.iter().enumerate() {
        s.push_str(&format!("{:>6}", format!("a{}", order[i])));
        for v in row {
            match v {
                Some(x) => s.push_str(&format!("{x:>8.3}")),
                None => s.push_str(&format!("{:>8}", "-")),
            }
        }
        s.push('\n');
    }
    s
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let records = load_all(&expand(&args.replays)?)?;
    let mut counts: Vec<(WinCondition, u64)> = WinCondition::ALL.iter().map(|w| (*w, 0)).collect();
    for r in &records {
        if let Some(w) = r.win {
            counts[w.index()].1 += 1;
        }
    }
    let total = records.len() as u64;
    let m = pair_metrics(&records)?;
    let lines = [
        json!({"record": "histogram", "episodes": total, "histogram": histogram_json(&counts, total)}),
        json!({"record": "pair_matrices", "matrices": m}),
    ];
    if let Some(path) = &args.table {
        let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        for l in &lines {
            line(&mut f, l.clone())?;
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if args.json {
        for l in lines {
            line(&mut out, l)?;
        }
        return Ok(());
    }
    writeln!(out, "{total} episodes")?;
    for (w, c) in &counts {
        writeln!(out, "  {:<20} {c:>6}  {:>6.1}%", w.to_string(), 100.0 * *c as f64 / total.max(1) as f64)?;
    }
    writeln!(out, "\nslot order (roster agents): {:?}", m.seat_order)?;
    writeln!(out, "\nmean distance (cells)\n{}", fmt_matrix(&m.distance, &m.seat_order))?;
    writeln!(
        out,
        "vote similarity over {} rounds\n{}",
        m.voting_rounds,
        fmt_matrix(&m.vote_similarity, &m.seat_order)
    )?;
    Ok(())
}

fn timeline(args: TimelineArgs) -> Result<()> {
    let record = EpisodeRecord::load(&args.replay).with_context(|| format!("loading {}", args.replay.display()))?;
    let t = vote_timeline(&record, args.round)?;
    if let Some(path) = &args.png {
        std::fs::write(path, t.to_png(8)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.json {
        println!("{}", json!({"record": "timeline", "timeline": t}));
    } else {
        print!("{}", t.to_table());
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let paths = expand(&args.replays)?;
    let mut failed = 0;
    for p in &paths {
        let result = EpisodeRecord::load(p).and_then(|r| r.verify());
        let error = result.as_ref().err().map(|e| e.to_string());
        failed += usize::from(error.is_some());
        println!(
            "{}",
            json!({"record": "verify", "path": p.display().to_string(), "ok": error.is_none(), "error": error})
        );
    }
    if failed > 0 {
        bail!("{failed} of {} replays failed verification", paths.len());
    }
    Ok(())
}

fn throughput(args: ThroughputArgs) -> Result<()> {
    let (cfg, roster) = args.game.load()?;
    let mode = match args.mode {
        Mode::Sprites => RenderMode::Sprites,
        Mode::Rgb => RenderMode::Rgb,
    };
    let r = measure_throughput(&cfg, &roster, mode, args.steps)?;
    println!("{}", json!({"record": "throughput", "roster": args.game.roster, "report": r}));
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let addr = args.addr.parse().with_context(|| format!("bad listen address `{}`", args.addr))?;
    if let Some(dir) = &args.record_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let config = ServerConfig {
        grace: Duration::from_secs_f64(args.grace.max(0.0)),
        record_dir: args.record_dir.clone(),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(hidden_agenda_service::serve(addr, config))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Analyze(a) => analyze(a),
        Command::Timeline(a) => timeline(a),
        Command::ReplayVerify(a) => verify(a),
        Command::Throughput(a) => throughput(a),
        Command::Serve(a) => serve(a),
    }
}
