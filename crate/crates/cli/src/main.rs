mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use beamband::bandit::{IndexKind, PolicyKind};
use beamband::ratio::SweepRatio;
use beamband::scenarios::{self, PolicySpec, Scenario, ScenarioConfig, StaticEvaluation};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Resolved;
use crate::output::{Baselines, Meta, RunInfo, Summary};

/// Bandit-driven mmWave link configuration experiments.
#[derive(Debug, Parser)]
#[command(name = "beamband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run policies on a scenario and write `<out>.csv` and `<out>.meta`.
    Run(RunArgs),
    /// Evaluate every static arm and report the genius and worst arms.
    Baselines(CommonArgs),
    /// Print the fully resolved configuration as TOML.
    ShowConfig(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario: 1 (period), 2 (period + beamwidth), 3 (+ beam subset).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    scenario: Option<u8>,
    /// TOML file overriding any default.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    realizations: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    slots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "BEAMBAND_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Policy to run; repeat for several (default depends on the scenario).
    #[arg(long = "policy", value_enum)]
    policies: Vec<PolicyName>,
    /// Fraction of the codebook swept per slot, as p/q; repeatable (scenario 3).
    #[arg(long = "ratio", value_name = "P/Q")]
    ratios: Vec<SweepRatio>,
    /// Output prefix.
    #[arg(long, value_name = "PREFIX", default_value = "beamband")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyName {
    Random,
    Ucb1,
    Klucb,
    /// Thompson sampling, Gaussian posterior.
    Ts,
    /// Thompson sampling, Beta posterior.
    TsBeta,
    /// Flat KL-UCB over every (period, beamwidth) arm.
    Flat,
    /// Tree search with KL-UCB nodes.
    Mcts,
    /// Tree search with UCB1 nodes.
    MctsUcb1,
}

impl PolicyName {
    fn spec(self) -> PolicySpec {
        match self {
            PolicyName::Random => PolicySpec::Random,
            PolicyName::Ucb1 => PolicySpec::Flat(PolicyKind::Ucb1),
            PolicyName::Klucb | PolicyName::Flat => PolicySpec::Flat(PolicyKind::KlUcb),
            PolicyName::Ts => PolicySpec::Flat(PolicyKind::TsGaussian),
            PolicyName::TsBeta => PolicySpec::Flat(PolicyKind::TsBeta),
            PolicyName::Mcts => PolicySpec::Tree(IndexKind::KlUcb),
            PolicyName::MctsUcb1 => PolicySpec::Tree(IndexKind::Ucb1),
        }
    }

    fn label(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    fn defaults(scenario: Scenario) -> Vec<PolicyName> {
        match scenario {
            Scenario::I => vec![PolicyName::Random, PolicyName::Ucb1, PolicyName::Ts, PolicyName::Klucb],
            Scenario::II => vec![PolicyName::Random, PolicyName::Flat, PolicyName::Mcts],
            Scenario::III => vec![PolicyName::Random, PolicyName::Mcts],
        }
    }
}

/// Bad input (exit 2) versus a failure while running (exit 1).
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

/// Tail window for summaries: the last fifth of the horizon, 100 slots at the defaults.
fn tail_window(slots: usize) -> usize {
    (slots / 5).max(1)
}

fn resolve(args: &CommonArgs) -> Result<Resolved, Failure> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
            config::parse(&text).map_err(|e| usage(anyhow!("{}:\n{e}", path.display())))?
        }
        None => toml::Table::new(),
    };
    let mut flags = Vec::new();
    let mut fallback = Scenario::I;
    if let Some(n) = args.scenario {
        fallback = Scenario::try_from(n).map_err(|e| usage(anyhow!(e)))?;
        if let Some(toml::Value::Table(s)) = doc.get_mut("scenario") {
            s.remove("id");
        }
        flags.push(format!("--scenario={n}"));
    }
    let mut resolved = config::resolve(&doc, fallback).map_err(|e| usage(anyhow!("invalid configuration:\n{e}")))?;
    let cfg = &mut resolved.config;
    if let Some(n) = args.realizations {
        cfg.realizations = n as usize;
        flags.push(format!("--realizations={n}"));
    }
    if let Some(n) = args.slots {
        cfg.slots = n as usize;
        flags.push(format!("--slots={n}"));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        flags.push(format!("--seed={seed}"));
    }
    resolved.overrides.extend(flags);
    Ok(resolved)
}

fn check(config: &ScenarioConfig) -> Result<(), Failure> {
    let issues = config.issues();
    if issues.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = issues.iter().map(ToString::to_string).collect();
    Err(usage(anyhow!("invalid configuration:\n{}", lines.join("\n"))))
}

fn pool(threads: Option<u64>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n as usize);
    }
    builder.build().map_err(|e| Failure::Runtime(anyhow!("starting worker pool: {e}")))
}

fn baseline(config: &ScenarioConfig) -> anyhow::Result<StaticEvaluation> {
    scenarios::evaluate_static_policies(config).context("evaluating static arms")
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let Resolved { config: base, mut overrides } = resolve(&args.common)?;
    let mut names = if args.policies.is_empty() { PolicyName::defaults(base.scenario) } else { args.policies.clone() };
    let mut seen = Vec::new();
    names.retain(|n| {
        let fresh = !seen.contains(n);
        seen.push(*n);
        fresh
    });
    let ratios = if args.ratios.is_empty() { vec![base.ratio] } else { args.ratios.clone() };
    overrides.extend(args.policies.iter().map(|p| format!("--policy={}", p.label())));
    overrides.extend(args.ratios.iter().map(|r| format!("--ratio={r}")));

    let mut jobs = Vec::new();
    for &ratio in &ratios {
        let config = ScenarioConfig { ratio, ..base.clone() };
        check(&config)?;
        for &name in &names {
            let label = if base.scenario == Scenario::III { format!("{} R={ratio}", name.label()) } else { name.label() };
            // Fail fast on policies the scenario does not support.
            scenarios::run_realization(&ScenarioConfig { slots: 1, ..config.clone() }, name.spec(), &label, 0, None)
                .map_err(|e| usage(anyhow!("{e}")))?;
            jobs.push((config.clone(), name, label));
        }
    }

    let pool = pool(args.common.threads)?;
    let (eval, sets) = pool.install(|| -> anyhow::Result<_> {
        let eval = baseline(&base)?;
        let sets = jobs
            .iter()
            .map(|(config, name, label)| {
                scenarios::run_policy(config, name.spec(), label, Some(&eval)).with_context(|| format!("running {label}"))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok((eval, sets))
    })?;

    let window = tail_window(base.slots);
    let mut summary = Vec::new();
    for (traces, (_, _, label)) in sets.iter().zip(&jobs) {
        let agg = scenarios::aggregate(traces, window).context("aggregating traces")?;
        println!("{label:<16} tail mean {:.4} Gbps (last {window} slots)", agg.tail_mean_gbps);
        summary.push(Summary::new(label, &agg));
    }
    println!("genius {} {:.4} Gbps, worst {} {:.4} Gbps", eval.genius_arm(), eval.genius_rate_gbps(), eval.worst_arm(), eval.worst_rate_gbps());

    let csv_path = output::with_extension(&args.out, "csv");
    let meta_path = output::with_extension(&args.out, "meta");
    let rows = output::write_csv(&csv_path, &sets)?;
    let meta = Meta {
        run: RunInfo {
            command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
            scenario: base.scenario.number(),
            seed: base.seed,
            realizations: base.realizations,
            slots: base.slots,
            policies: names.iter().map(|n| n.label()).collect(),
            ratios: ratios.iter().map(ToString::to_string).collect(),
            config_file: args.common.config.as_ref().map(|p| p.display().to_string()),
            overrides,
            csv_rows: rows,
        },
        baselines: Baselines::from(&eval),
        summary,
        config: config::to_document(&base),
    };
    output::write_meta(&meta_path, &meta)?;
    println!("wrote {} ({rows} rows) and {}", csv_path.display(), meta_path.display());
    Ok(())
}

fn baselines(args: CommonArgs) -> Result<(), Failure> {
    let Resolved { config, .. } = resolve(&args)?;
    check(&config)?;
    let eval = pool(args.threads)?.install(|| baseline(&config))?;
    println!("{:<12} {:>10} {:>8}", "arm", "rate_gbps", "reward");
    for ((arm, rate), reward) in eval.arms.iter().zip(&eval.mean_rate_gbps).zip(&eval.mean_reward) {
        println!("{:<12} {rate:>10.4} {reward:>8.4}", arm.to_string());
    }
    println!("genius {}\nworst {}", eval.genius_arm(), eval.worst_arm());
    Ok(())
}

fn show_config(args: CommonArgs) -> Result<(), Failure> {
    let Resolved { config, .. } = resolve(&args)?;
    print!("{}", toml::to_string(&config::to_document(&config)).context("serializing configuration")?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Baselines(args) => baselines(args),
        Command::ShowConfig(args) => show_config(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
