use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use noisy_mh::discrete_walk::{classify, BirthDeathSpec, ClassifyOptions, WalkClassification};
use noisy_mh::experiment::{run_experiment, RawConfig, GIT_DESCRIBE};
use noisy_mh::presets::{classify_preset, CLASSIFY_PRESETS, RUN_PRESETS};
use noisy_mh::verify::{verify, VERIFY_IDS};
use noisy_mh::{Error, Result};

#[derive(Parser)]
#[command(name = "nmh", version, long_version = concat!(env!("CARGO_PKG_VERSION"), " (", env!("NMH_GIT_DESCRIBE"), ")"))]
#[command(about = "Marginal, pseudo-marginal and noisy Metropolis-Hastings experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file, a manifest or a preset.
    Run(RunArgs),
    /// Classify a birth-death chain as transient or (geometrically) ergodic.
    Classify(ClassifyArgs),
    /// Run one of the built-in checks and report pass/fail with evidence.
    Verify {
        /// Check id; see `nmh list-presets`.
        id: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Print the full JSON report instead of a one-line summary.
        #[arg(long)]
        json: bool,
    },
    /// List run presets, classify presets and check ids.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config or a manifest.json written by an earlier run.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Run a preset with its defaults.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    preset: Option<String>,
    /// Table with columns m,p,q for m = 1, 2, ...
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Truncation level.
    #[arg(long = "M", default_value_t = 30_000)]
    m: i64,
    /// Number of averaged weights, for presets that take one.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Cauchy tolerance on the series tails.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let mut raw = match (&args.config, &args.preset) {
        (Some(path), _) => RawConfig::from_path(path)?,
        (None, Some(name)) => RawConfig::preset(name),
        (None, None) => return Err(Error::config("config", "pass --config or --preset")),
    };
    if args.out.is_some() {
        raw.output_dir = args.out;
    }
    let cfg = raw.resolve()?;
    let out = run_experiment(&cfg, args.jobs)?;
    println!("experiment {} -> {}", cfg.name, out.dir.display());
    println!("{:<16} {:>6} {:>6} {:>11} {:>10}", "kernel", "N", "seed", "acceptance", "tv");
    for j in &out.jobs {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<16} {:>6} {:>6} {:>11} {:>10}",
            j.kernel.name(),
            j.n,
            j.seed,
            fmt(j.acceptance),
            fmt(j.tv)
        );
    }
    for c in &out.classification {
        println!("classification {} N={}: {}", c.kernel, c.n, c.classification.verdict);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_classification(c: &WalkClassification) {
    println!("verdict: {}", c.verdict);
    println!(
        "recurrence series: {} (log S = {:.4}, log tail = {:.4})",
        serde_json::to_string(&c.recurrence.status).unwrap_or_default().trim_matches('"'),
        c.recurrence.log_partial_sum,
        c.recurrence.log_tail_sum
    );
    println!(
        "positivity series: {} (log S = {:.4}, log tail = {:.4})",
        serde_json::to_string(&c.positivity.status).unwrap_or_default().trim_matches('"'),
        c.positivity.log_partial_sum,
        c.positivity.log_tail_sum
    );
    let lim = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "none".into());
    println!("lim p: {}, lim q: {}", lim(c.lim_p), lim(c.lim_q));
    println!("p(M) = {:.6}, q(M) = {:.6}", c.p_at_m, c.q_at_m);
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode> {
    let spec: BirthDeathSpec = match (&args.preset, &args.csv) {
        (Some(name), _) => classify_preset(name, args.n)?,
        (None, Some(path)) => BirthDeathSpec::from_csv(path)?,
        (None, None) => return Err(Error::config("preset", "pass --preset or --csv")),
    };
    if !(args.tol > 0.0) {
        return Err(Error::config("tol", "must be positive"));
    }
    let opts = ClassifyOptions {
        m: args.m,
        cauchy_tol: args.tol,
        ..Default::default()
    };
    let c = classify(&spec, &opts)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&c)?);
    } else {
        print_classification(&c);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(id: &str, seed: u64, json: bool) -> Result<ExitCode> {
    let r = verify(id, seed)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.summary);
    }
    Ok(if r.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_list() {
    println!("run presets (nmh run --preset NAME):");
    for (n, d) in RUN_PRESETS {
        println!("  {n:<20} {d}");
    }
    println!("classify presets (nmh classify --preset NAME):");
    for (n, d) in CLASSIFY_PRESETS {
        println!("  {n:<20} {d}");
    }
    println!("checks (nmh verify ID):");
    for (n, d) in VERIFY_IDS {
        println!("  {n:<20} {d}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Verify { id, seed, json } => cmd_verify(&id, seed, json),
        Command::ListPresets => {
            cmd_list();
            Ok(ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config { .. }) {
                eprintln!("(nmh {GIT_DESCRIBE}; see `nmh --help`)");
            }
            ExitCode::from(2)
        }
    }
}
