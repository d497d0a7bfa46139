//! Command-line driver for the transparent-games experiments.
//!
//! Every command writes one machine-readable data file (CSV by default,
//! JSON with `--format json`) plus a `<name>.manifest.json` holding the
//! fully resolved configuration, so outputs are reproducible byte for byte.
//! Set `TRANSPARENT_GAMES_THREADS` to cap worker parallelism.

mod config;
mod output;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use transparent_games::experiments::{
    eta_sweep, final_params_summary, fluctuation_stats, gradient_field, tandem_experiment,
    default_tandem_pairs, ExperimentConfig, FluctuationSummary, SosDiagnostics, Stat, ETA_GRID,
};
use transparent_games::learners::LearnerKind;
use transparent_games::tournament::{cross_play, mark_best_responses, Roster};

use config::{
    learner_kind_name, parse_learner_kind, resolve, resolve_roster, CommonOverrides, FileConfig,
    OutputFormat, Resolved, DEFAULT_FIELD_RESOLUTION, DEFAULT_RUNS, DEFAULT_SEED, DEFAULT_STEPS,
    DEFAULT_TANDEM_RATE,
};
use output::{sig9, to_json_pretty, write_file, write_manifest, CsvTable};

#[derive(Parser)]
#[command(
    name = "transparent-games",
    version,
    about = "Opponent-aware gradient learning in two-player games with mutually transparent decision-making"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated training runs; per-step aggregate statistics plus a summary
    Train(CommonArgs),
    /// Final outcome probabilities across a grid of opponent learning rates
    SweepEta(SweepArgs),
    /// Cross-play payoff matrix over a roster, with best-response flags
    Tournament(CommonArgs),
    /// Learner gradients over the ultimatum probability grid
    GradientField(FieldArgs),
    /// LOLA and SOS pairings in the tandem game
    Tandem(TandemArgs),
    /// Final policy probabilities split by higher/lower payoff role
    FinalParams(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; command-line flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Game: pd|chicken|ultimatum|tandem|custom
    #[arg(long)]
    game: Option<String>,
    /// Learner for player A: naive|la|lola|lola1|sos
    #[arg(long)]
    learner_a: Option<String>,
    /// Learner for player B: naive|la|lola|lola1|sos
    #[arg(long)]
    learner_b: Option<String>,
    /// Learning rate (delta) for player A
    #[arg(long)]
    delta_a: Option<f64>,
    /// Learning rate (delta) for player B
    #[arg(long)]
    delta_b: Option<f64>,
    /// Opponent learning rate (eta) imputed by player A
    #[arg(long)]
    eta_a: Option<f64>,
    /// Opponent learning rate (eta) imputed by player B
    #[arg(long)]
    eta_b: Option<f64>,
    /// Gradient steps per run
    #[arg(long)]
    steps: Option<usize>,
    /// Independent runs per configuration
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed; every run is reproducible from it
    #[arg(long)]
    seed: Option<u64>,
    /// Initialization scheme: gauss|egfb
    #[arg(long)]
    init: Option<String>,
    /// Initialization noise standard deviation
    #[arg(long)]
    sigma: Option<f64>,
    /// Output path for the data file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Data file format: csv|json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated opponent learning rates to sweep
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
}

#[derive(Args)]
struct FieldArgs {
    /// TOML config file; command-line flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Learner kind evaluated on the grid: naive|la|lola|lola1|sos
    #[arg(long)]
    learner: Option<String>,
    /// Opponent learning rate used by both players
    #[arg(long)]
    eta: Option<f64>,
    /// Grid points per axis
    #[arg(long)]
    resolution: Option<usize>,
    /// Output path for the data file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Data file format: csv|json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct TandemArgs {
    /// TOML config file; command-line flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gradient steps per run
    #[arg(long)]
    steps: Option<usize>,
    /// Independent runs per pairing
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Learning rate shared by both players
    #[arg(long)]
    delta: Option<f64>,
    /// Opponent learning rate shared by both players
    #[arg(long)]
    eta: Option<f64>,
    /// Output path for the data file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Data file format: csv|json
    #[arg(long)]
    format: Option<String>,
}

fn main() {
    if let Ok(threads) = std::env::var("TRANSPARENT_GAMES_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: TRANSPARENT_GAMES_THREADS must be a positive integer");
                std::process::exit(1);
            }
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::SweepEta(args) => cmd_sweep(args),
        Command::Tournament(args) => cmd_tournament(args),
        Command::GradientField(args) => cmd_field(args),
        Command::Tandem(args) => cmd_tandem(args),
        Command::FinalParams(args) => cmd_final_params(args),
    }
}

fn common_overrides<'a>(args: &'a CommonArgs) -> CommonOverrides<'a> {
    CommonOverrides {
        game: args.game.as_deref(),
        learner_a: args.learner_a.as_deref(),
        learner_b: args.learner_b.as_deref(),
        delta_a: args.delta_a,
        delta_b: args.delta_b,
        eta_a: args.eta_a,
        eta_b: args.eta_b,
        steps: args.steps,
        runs: args.runs,
        seed: args.seed,
        init: args.init.as_deref(),
        sigma: args.sigma,
        out: args.out.as_deref(),
        format: args.format.as_deref(),
    }
}

#[derive(Serialize)]
struct ExperimentManifest {
    game: String,
    experiment: ExperimentConfig,
    format: &'static str,
}

fn experiment_manifest(r: &Resolved) -> ExperimentManifest {
    ExperimentManifest {
        game: r.game_name.clone(),
        experiment: r.experiment.clone(),
        format: r.format.name(),
    }
}

// ---------------------------------------------------------------------------
// train

#[derive(Serialize)]
struct TrainSummary {
    runs: usize,
    divergent: usize,
    final_payoff_a: Stat,
    final_payoff_b: Stat,
    final_outcome: Option<[Stat; 4]>,
    final_policy_a: Option<[Stat; 4]>,
    final_policy_b: Option<[Stat; 4]>,
    /// Mean final theta_a + theta_b for the single-parameter games.
    final_param_sum: Option<Stat>,
    sos: Option<SosDiagnostics>,
}

fn cmd_train(args: CommonArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let r = resolve(&file, &common_overrides(&args), "train", OutputFormat::Csv)?;
    let stats = fluctuation_stats(&r.experiment)?;

    let data = match r.format {
        OutputFormat::Json => to_json_pretty(&stats)?,
        OutputFormat::Csv => render_train_csv(&stats),
    };
    write_file(&r.out, &data)?;

    let last = stats.per_step.last().expect("at least the initial row");
    let summary = TrainSummary {
        runs: stats.n_runs,
        divergent: stats.n_divergent,
        final_payoff_a: last.payoff_a,
        final_payoff_b: last.payoff_b,
        final_outcome: last.outcome,
        final_policy_a: last.policy_a,
        final_policy_b: last.policy_b,
        final_param_sum: last.param_sum,
        sos: stats.sos,
    };
    write_file(&r.out.with_extension("summary.json"), &to_json_pretty(&summary)?)?;
    write_manifest(&r.out, "train", experiment_manifest(&r))?;
    eprintln!("wrote {}", r.out.display());
    Ok(())
}

fn render_train_csv(stats: &FluctuationSummary) -> String {
    let is_matrix = stats.per_step[0].outcome.is_some();
    let mut table = if is_matrix {
        CsvTable::new(vec![
            "step",
            "payoff_a_mean",
            "payoff_a_std",
            "payoff_b_mean",
            "payoff_b_std",
            "p_cc_mean",
            "p_cd_mean",
            "p_dc_mean",
            "p_dd_mean",
            "pr_s_a_mean",
            "pr_s_a_std",
            "pr_c_not_s_a_mean",
            "pr_c_not_s_a_std",
            "pr_c_c_a_mean",
            "pr_c_c_a_std",
            "pr_c_d_a_mean",
            "pr_c_d_a_std",
            "pr_s_b_mean",
            "pr_s_b_std",
            "pr_c_not_s_b_mean",
            "pr_c_not_s_b_std",
            "pr_c_c_b_mean",
            "pr_c_c_b_std",
            "pr_c_d_b_mean",
            "pr_c_d_b_std",
        ])
    } else {
        CsvTable::new(vec![
            "step",
            "payoff_a_mean",
            "payoff_a_std",
            "payoff_b_mean",
            "payoff_b_std",
            "param_sum_mean",
            "param_sum_std",
        ])
    };
    for (step, agg) in stats.per_step.iter().enumerate() {
        let mut row = vec![
            step.to_string(),
            sig9(agg.payoff_a.mean),
            sig9(agg.payoff_a.std),
            sig9(agg.payoff_b.mean),
            sig9(agg.payoff_b.std),
        ];
        if is_matrix {
            for o in agg.outcome.unwrap() {
                row.push(sig9(o.mean));
            }
            for policy in [agg.policy_a.unwrap(), agg.policy_b.unwrap()] {
                for s in policy {
                    row.push(sig9(s.mean));
                    row.push(sig9(s.std));
                }
            }
        } else {
            let sum = agg.param_sum.unwrap();
            row.push(sig9(sum.mean));
            row.push(sig9(sum.std));
        }
        table.push(row);
    }
    table.render()
}

// ---------------------------------------------------------------------------
// sweep-eta

#[derive(Serialize)]
struct SweepManifest {
    game: String,
    experiment: ExperimentConfig,
    etas: Vec<f64>,
    format: &'static str,
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let r = resolve(
        &file,
        &common_overrides(&args.common),
        "sweep-eta",
        OutputFormat::Csv,
    )?;
    let etas = args
        .etas
        .or_else(|| file.sweep.as_ref().and_then(|s| s.etas.clone()))
        .unwrap_or_else(|| ETA_GRID.to_vec());
    let sweep = eta_sweep(&r.experiment, &etas)?;

    let data = match r.format {
        OutputFormat::Json => to_json_pretty(&sweep)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(vec![
                "eta",
                "p_cc_mean",
                "p_cc_se",
                "p_cd_mean",
                "p_cd_se",
                "p_dc_mean",
                "p_dc_se",
                "p_dd_mean",
                "p_dd_se",
                "payoff_a_mean",
                "payoff_a_se",
                "payoff_b_mean",
                "payoff_b_se",
                "divergent",
                "runs",
            ]);
            for e in &sweep.entries {
                let mut row = vec![sig9(e.eta)];
                for o in &e.outcomes {
                    row.push(sig9(o.mean));
                    row.push(sig9(o.stderr));
                }
                row.push(sig9(e.payoff_a.mean));
                row.push(sig9(e.payoff_a.stderr));
                row.push(sig9(e.payoff_b.mean));
                row.push(sig9(e.payoff_b.stderr));
                row.push(e.n_divergent.to_string());
                row.push(e.n_runs.to_string());
                table.push(row);
            }
            table.render()
        }
    };
    write_file(&r.out, &data)?;
    write_manifest(
        &r.out,
        "sweep-eta",
        SweepManifest {
            game: r.game_name.clone(),
            experiment: r.experiment.clone(),
            etas,
            format: r.format.name(),
        },
    )?;
    eprintln!("wrote {}", r.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// tournament

#[derive(Serialize)]
struct TournamentManifest {
    game: String,
    roster: Roster,
    steps: usize,
    runs: usize,
    seed: u64,
    format: &'static str,
}

fn cmd_tournament(args: CommonArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let r = resolve(&file, &common_overrides(&args), "tournament", OutputFormat::Json)?;
    if !r.experiment.game.is_matrix() {
        bail!("tournaments aggregate matrix-game payoffs; use --game pd, chicken or custom");
    }
    let roster = resolve_roster(&file)?;
    let mut matrix = cross_play(
        &roster,
        &r.experiment.game,
        r.experiment.steps,
        r.experiment.n_sample,
        r.experiment.master_seed,
    )?;
    mark_best_responses(&mut matrix);

    let data = match r.format {
        OutputFormat::Json => to_json_pretty(&matrix)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(vec![
                "row",
                "col",
                "mean",
                "std",
                "stderr",
                "best_response",
                "divergent",
                "runs",
            ]);
            for (i, row_name) in matrix.names.iter().enumerate() {
                for (j, col_name) in matrix.names.iter().enumerate() {
                    let c = matrix.cell(i, j);
                    table.push(vec![
                        row_name.clone(),
                        col_name.clone(),
                        sig9(c.mean),
                        sig9(c.std),
                        sig9(c.stderr),
                        c.best_response.to_string(),
                        c.n_divergent.to_string(),
                        c.n_runs.to_string(),
                    ]);
                }
            }
            table.render()
        }
    };
    write_file(&r.out, &data)?;
    write_manifest(
        &r.out,
        "tournament",
        TournamentManifest {
            game: r.game_name.clone(),
            roster,
            steps: r.experiment.steps,
            runs: r.experiment.n_sample,
            seed: r.experiment.master_seed,
            format: r.format.name(),
        },
    )?;
    eprintln!("wrote {}", r.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// gradient-field

#[derive(Serialize)]
struct FieldManifest {
    learner: &'static str,
    eta: f64,
    resolution: usize,
    format: &'static str,
}

fn cmd_field(args: FieldArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let field_cfg = file.field.clone().unwrap_or(config::FieldFile {
        learner: None,
        eta: None,
        resolution: None,
    });
    let kind = parse_learner_kind(
        args.learner
            .or(field_cfg.learner)
            .as_deref()
            .unwrap_or("naive"),
    )?;
    let eta = args.eta.or(field_cfg.eta).unwrap_or(1.0);
    let resolution = args
        .resolution
        .or(field_cfg.resolution)
        .unwrap_or(DEFAULT_FIELD_RESOLUTION);
    let format = OutputFormat::parse(
        args.format
            .or_else(|| file.format.clone())
            .as_deref()
            .unwrap_or("csv"),
    )?;
    let out = args
        .out
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("gradient-field.{}", format.extension())));

    let field = gradient_field(kind, eta, resolution)?;
    let data = match format {
        OutputFormat::Json => to_json_pretty(&field)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(vec![
                "p_fair",
                "p_accept",
                "proposer_grad",
                "responder_grad",
            ]);
            for pt in &field {
                table.push(vec![
                    sig9(pt.p_fair),
                    sig9(pt.p_accept),
                    sig9(pt.proposer_grad),
                    sig9(pt.responder_grad),
                ]);
            }
            table.render()
        }
    };
    write_file(&out, &data)?;
    write_manifest(
        &out,
        "gradient-field",
        FieldManifest {
            learner: learner_kind_name(kind),
            eta,
            resolution,
            format: format.name(),
        },
    )?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// tandem

#[derive(Serialize)]
struct TandemManifest {
    steps: usize,
    runs: usize,
    seed: u64,
    delta: f64,
    eta: f64,
    pairings: Vec<String>,
    format: &'static str,
}

#[derive(Serialize)]
struct TandemPairSummary {
    pairing: String,
    final_payoff_a: Stat,
    final_payoff_b: Stat,
    final_param_sum: Stat,
    divergent: usize,
}

fn cmd_tandem(args: TandemArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let tandem_cfg = file.tandem.clone().unwrap_or(config::TandemFile {
        delta: None,
        eta: None,
    });
    let steps = args.steps.or(file.steps).unwrap_or(DEFAULT_STEPS);
    let runs = args.runs.or(file.runs).unwrap_or(DEFAULT_RUNS);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let delta = args.delta.or(tandem_cfg.delta).unwrap_or(DEFAULT_TANDEM_RATE);
    let eta = args.eta.or(tandem_cfg.eta).unwrap_or(DEFAULT_TANDEM_RATE);
    let format = OutputFormat::parse(
        args.format
            .or_else(|| file.format.clone())
            .as_deref()
            .unwrap_or("csv"),
    )?;
    let out = args
        .out
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("tandem.{}", format.extension())));

    let pairs = default_tandem_pairs();
    let results = tandem_experiment(&pairs, steps, runs, seed, delta, eta)?;
    let pairing_name = |a: LearnerKind, b: LearnerKind| {
        format!("{}-vs-{}", learner_kind_name(a), learner_kind_name(b))
    };

    let data = match format {
        OutputFormat::Json => to_json_pretty(&results)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(vec![
                "pairing",
                "step",
                "payoff_a_mean",
                "payoff_a_std",
                "payoff_b_mean",
                "payoff_b_std",
                "param_sum_mean",
                "param_sum_std",
            ]);
            for res in &results {
                let name = pairing_name(res.kind_a, res.kind_b);
                for (step, agg) in res.summary.per_step.iter().enumerate() {
                    let sum = agg.param_sum.unwrap();
                    table.push(vec![
                        name.clone(),
                        step.to_string(),
                        sig9(agg.payoff_a.mean),
                        sig9(agg.payoff_a.std),
                        sig9(agg.payoff_b.mean),
                        sig9(agg.payoff_b.std),
                        sig9(sum.mean),
                        sig9(sum.std),
                    ]);
                }
            }
            table.render()
        }
    };
    write_file(&out, &data)?;

    let summaries: Vec<TandemPairSummary> = results
        .iter()
        .map(|res| {
            let last = res.summary.per_step.last().unwrap();
            TandemPairSummary {
                pairing: pairing_name(res.kind_a, res.kind_b),
                final_payoff_a: last.payoff_a,
                final_payoff_b: last.payoff_b,
                final_param_sum: last.param_sum.unwrap(),
                divergent: res.summary.n_divergent,
            }
        })
        .collect();
    write_file(&out.with_extension("summary.json"), &to_json_pretty(&summaries)?)?;
    write_manifest(
        &out,
        "tandem",
        TandemManifest {
            steps,
            runs,
            seed,
            delta,
            eta,
            pairings: results
                .iter()
                .map(|r| pairing_name(r.kind_a, r.kind_b))
                .collect(),
            format: format.name(),
        },
    )?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// final-params

fn cmd_final_params(args: CommonArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let r = resolve(&file, &common_overrides(&args), "final-params", OutputFormat::Json)?;
    let summary = final_params_summary(&r.experiment)?;

    let data = match r.format {
        OutputFormat::Json => to_json_pretty(&summary)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(vec![
                "role",
                "payoff_mean",
                "payoff_std",
                "pr_s_mean",
                "pr_s_std",
                "pr_c_not_s_mean",
                "pr_c_not_s_std",
                "pr_c_c_mean",
                "pr_c_c_std",
                "pr_c_d_mean",
                "pr_c_d_std",
                "runs",
                "divergent",
            ]);
            for (role, s) in [("higher", &summary.higher), ("lower", &summary.lower)] {
                let mut row = vec![role.to_string(), sig9(s.payoff.mean), sig9(s.payoff.std)];
                for p in &s.policy {
                    row.push(sig9(p.mean));
                    row.push(sig9(p.std));
                }
                row.push(summary.n_runs.to_string());
                row.push(summary.n_divergent.to_string());
                table.push(row);
            }
            table.render()
        }
    };
    write_file(&r.out, &data)?;
    write_manifest(&r.out, "final-params", experiment_manifest(&r))?;
    eprintln!("wrote {}", r.out.display());
    Ok(())
}
