use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use zc_core::analysis::write_analysis_csv;
use zc_core::harness::{self, presets, ExperimentConfig, SweepParameter};
use zc_core::medium::TraceWriter;
use zc_core::{PhyParameters, TimingParameters};

/// Zero-collision MAC analysis and slot-level simulator.
#[derive(Parser)]
#[command(name = "zcsim", version)]
struct Cli {
    /// Worker threads for seeds and sweep points (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected convergence cycles, upper bound and exact expected time.
    Analyze(AnalyzeArgs),
    /// Run every seed of a config and write JSON reports plus a summary CSV.
    Run(RunArgs),
    /// Vary one parameter and write one CSV row per (value, seed).
    Sweep(SweepArgs),
    /// Dump every slot of a single seed as CSV.
    Trace(TraceArgs),
    /// Largest VoIP pair count meeting a 99th-percentile delay budget.
    VoipCapacity(VoipArgs),
    /// Write the built-in scenario presets as TOML files.
    Presets {
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingChoice {
    /// t_g = 2150, t_b = 2266, t_v = 20, t_s = 0 µs.
    Reference,
    /// Composed from the default PHY parameters for `--bytes`.
    Phy,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Slot counts N.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64, 128])]
    n: Vec<usize>,
    /// Station counts M; every M <= N is used when omitted.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TimingChoice::Reference)]
    timing: TimingChoice,
    /// MPDU size for `--timing phy`.
    #[arg(long, default_value_t = 2346)]
    bytes: u32,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed list of the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// n-stations, n-slots, error-rate, gamma or packet-bytes.
    #[arg(long)]
    param: SweepParameter,
    /// Comma-separated values, or `start:end:step` for an inclusive range.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    config: PathBuf,
    /// Defaults to the first seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VoipArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 31)]
    max_pairs: usize,
    #[arg(long, default_value_t = 30_000.0)]
    budget_us: f64,
    /// Output JSON (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let [a, b, s] = [parts[0], parts[1], parts[2]].map(|x| x.trim().parse::<f64>());
        let (start, end, step) = (a?, b?, s?);
        if !(step > 0.0) || end < start {
            bail!("range `{spec}` needs start <= end and a positive step");
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    spec.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad sweep value `{v}`"))
        })
        .collect()
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let timing = match args.timing {
        TimingChoice::Reference => TimingParameters::ieee80211b_reference(),
        TimingChoice::Phy => PhyParameters::default().timing(args.bytes),
    };
    let mut pairs = Vec::new();
    for &n in &args.n {
        if args.m.is_empty() {
            pairs.extend((1..=n).map(|m| (n, m)));
        } else {
            pairs.extend(args.m.iter().filter(|&&m| m <= n).map(|&m| (n, m)));
        }
    }
    if pairs.is_empty() {
        bail!("no (N, M) pair with M <= N selected");
    }
    let rows = harness::analyze(&pairs, &timing)?;
    write_analysis_csv(&rows, output(args.out.as_deref())?)?;
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let runs = harness::run(&cfg)?;
    for path in harness::write_reports(&cfg, &runs, &args.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let values = parse_values(&args.values)?;
    let rows = harness::sweep(&cfg, args.param, &values)?;
    harness::write_sweep_csv(&rows, output(args.out.as_deref())?)?;
    Ok(())
}

fn trace(args: &TraceArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    let seed = args.seed.unwrap_or(cfg.seeds[0]);
    let mut writer = TraceWriter::new(output(args.out.as_deref())?);
    let run = harness::run_seed_with_sink(&cfg, seed, &mut writer)?;
    writer.finish()?.flush()?;
    eprintln!(
        "seed {seed}: {} slots, goodput {:.0} b/s",
        run.log.slots, run.report.goodput_bps
    );
    Ok(())
}

fn voip_capacity(args: &VoipArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let cap = harness::voip_capacity(&cfg, args.max_pairs, args.budget_us)?;
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &cap)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_presets(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for cfg in presets::all() {
        let path = dir.join(format!("{}.toml", cfg.name));
        std::fs::write(&path, cfg.to_toml_string()?)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Trace(a) => trace(a),
        Command::VoipCapacity(a) => voip_capacity(a),
        Command::Presets { out } => write_presets(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        pool = pool.num_threads(w);
    }
    let result = pool
        .build()
        .context("starting worker pool")
        .and_then(|pool| pool.install(|| dispatch(&cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
