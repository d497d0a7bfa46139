//! Seeded experiment harness: training runs, opponent-learning-rate sweeps,
//! per-step fluctuation statistics, final-parameter summaries, gradient
//! fields and the tandem-game comparison.
//!
//! Every run is deterministic given `(master_seed, run_index)`: the per-run
//! RNG seed is stream `run_index` of a SplitMix64 sequence anchored at the
//! master seed, and each player draws its initial parameters from its own
//! substream. Runs execute in parallel; results are collected in run order
//! and reduced sequentially, so aggregates do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::games::Game;
use crate::learners::{grad_report, update_step, LearnerKind, LearnerSpec, Player};
use crate::payoff::{self, PayoffFn};

/// Parameters whose magnitude exceeds this flag the run as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// The opponent-learning-rate grid used by the sweep experiments.
pub const ETA_GRID: [f64; 7] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` anchored at `master`: SplitMix64 applied to the
/// master seed advanced by `index` golden-gamma increments.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// How initial parameters are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum InitScheme {
    /// All parameters from N(0, sigma^2). The matrix-game experiments use
    /// sigma = 0.1.
    Gaussian { sigma: f64 },
    /// All parameters from N(0, 1); used by the tandem game.
    GaussianUnit,
    /// Matrix-game parameters (+3, +3, +3, -3) plus N(0, sigma^2) noise:
    /// close to the grounded fair bot, roughly 95% / 5% probabilities.
    NearFairBot { sigma: f64 },
}

impl InitScheme {
    /// Default initialization for a game.
    pub fn default_for(game: &Game) -> Self {
        match game {
            Game::Matrix(_) | Game::Ultimatum => InitScheme::Gaussian { sigma: 0.1 },
            Game::Tandem => InitScheme::GaussianUnit,
        }
    }
}

/// One training configuration.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub game: Game,
    pub spec_a: LearnerSpec,
    pub spec_b: LearnerSpec,
    /// Gradient steps per run.
    pub steps: usize,
    /// Independent runs per configuration.
    pub n_sample: usize,
    pub init: InitScheme,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(game: Game, spec_a: LearnerSpec, spec_b: LearnerSpec, master_seed: u64) -> Self {
        let init = InitScheme::default_for(&game);
        ExperimentConfig {
            game,
            spec_a,
            spec_b,
            steps: 1000,
            n_sample: 100,
            init,
            master_seed,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }
    pub fn with_samples(mut self, n_sample: usize) -> Self {
        self.n_sample = n_sample;
        self
    }
    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.spec_a
            .validate()
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        self.spec_b
            .validate()
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        if self.n_sample == 0 {
            return Err(ExperimentError::InvalidConfig(
                "n_sample must be at least 1".into(),
            ));
        }
        let sigma = match self.init {
            InitScheme::Gaussian { sigma } | InitScheme::NearFairBot { sigma } => sigma,
            InitScheme::GaussianUnit => 1.0,
        };
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(ExperimentError::InvalidConfig(format!(
                "init sigma must be finite and non-negative, got {sigma}"
            )));
        }
        if matches!(self.init, InitScheme::NearFairBot { .. }) && !self.game.is_matrix() {
            return Err(ExperimentError::InvalidConfig(
                "near-fair-bot initialization requires a matrix game".into(),
            ));
        }
        Ok(())
    }
}

/// State recorded at one step of one run. Row 0 is the initial state;
/// row k holds the state after k updates together with the SOS scaling
/// factors of the update that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub theta_a: Vec<f64>,
    pub theta_b: Vec<f64>,
    /// (Pr[S], Pr[C|not S], Pr[C|C], Pr[C|D]) per player; matrix games only.
    pub policy_a: Option<[f64; 4]>,
    pub policy_b: Option<[f64; 4]>,
    pub payoff_a: f64,
    pub payoff_b: f64,
    /// Joint outcome probabilities (CC, CD, DC, DD); matrix games only.
    pub outcome: Option<[f64; 4]>,
    /// SOS scaling factors of the producing update (1 for other learners
    /// and for the initial row).
    pub p_a: f64,
    pub p_b: f64,
}

/// Full trajectory of one seeded run.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub run_index: u64,
    /// `steps + 1` rows, or fewer if the run diverged.
    pub rows: Vec<StepRecord>,
    /// Step at which a parameter left the finite / bounded range, if any.
    pub divergent_at: Option<usize>,
    /// Smallest `<xi_sos, xi_la>` seen across all SOS updates of the run.
    pub sos_min_alignment: Option<f64>,
    /// Range of SOS scaling factors seen during the run.
    pub sos_p_range: Option<(f64, f64)>,
}

impl RunRecord {
    pub fn final_row(&self) -> &StepRecord {
        self.rows.last().expect("a run always records its initial state")
    }
}

fn draw_params<const N: usize>(init: &InitScheme, rng: &mut ChaCha8Rng) -> [f64; N] {
    let (base, sigma): ([f64; 4], f64) = match init {
        InitScheme::Gaussian { sigma } => ([0.0; 4], *sigma),
        InitScheme::GaussianUnit => ([0.0; 4], 1.0),
        InitScheme::NearFairBot { sigma } => ([3.0, 3.0, 3.0, -3.0], *sigma),
    };
    if sigma == 0.0 {
        return std::array::from_fn(|i| base[i]);
    }
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    std::array::from_fn(|i| base[i] + normal.sample(rng))
}

fn record_row<G: PayoffFn, const N: usize>(
    game: &G,
    is_matrix: bool,
    theta_a: &[f64; N],
    theta_b: &[f64; N],
    p_a: f64,
    p_b: f64,
) -> StepRecord {
    let (payoff_a, payoff_b) = game.eval(theta_a.as_slice(), theta_b.as_slice());
    let (policy_a, policy_b, outcome) = if is_matrix {
        (
            Some(payoff::policy_probabilities(theta_a)),
            Some(payoff::policy_probabilities(theta_b)),
            Some(payoff::outcome_probabilities(theta_a, theta_b)),
        )
    } else {
        (None, None, None)
    };
    StepRecord {
        theta_a: theta_a.to_vec(),
        theta_b: theta_b.to_vec(),
        policy_a,
        policy_b,
        payoff_a,
        payoff_b,
        outcome,
        p_a,
        p_b,
    }
}

fn in_bounds<const N: usize>(theta: &[f64; N]) -> bool {
    theta.iter().all(|v| v.is_finite() && v.abs() <= DIVERGENCE_BOUND)
}

fn run_loop<const N: usize>(
    cfg: &ExperimentConfig,
    run_index: u64,
    theta_a0: [f64; N],
    theta_b0: [f64; N],
) -> RunRecord {
    let is_matrix = cfg.game.is_matrix();
    let mut theta_a = theta_a0;
    let mut theta_b = theta_b0;
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    rows.push(record_row(&cfg.game, is_matrix, &theta_a, &theta_b, 1.0, 1.0));

    let mut divergent_at = None;
    let mut min_alignment: Option<f64> = None;
    let mut p_range: Option<(f64, f64)> = None;
    for step in 0..cfg.steps {
        let out = update_step(&cfg.game, &cfg.spec_a, &cfg.spec_b, &theta_a, &theta_b);
        for report in [&out.report_a, &out.report_b] {
            if let Some(alignment) = report.sos_alignment {
                min_alignment = Some(min_alignment.map_or(alignment, |m: f64| m.min(alignment)));
                p_range = Some(p_range.map_or((report.p, report.p), |(lo, hi): (f64, f64)| {
                    (lo.min(report.p), hi.max(report.p))
                }));
            }
        }
        if !in_bounds(&out.theta_a) || !in_bounds(&out.theta_b) {
            divergent_at = Some(step + 1);
            break;
        }
        theta_a = out.theta_a;
        theta_b = out.theta_b;
        rows.push(record_row(
            &cfg.game,
            is_matrix,
            &theta_a,
            &theta_b,
            out.report_a.p,
            out.report_b.p,
        ));
    }
    RunRecord {
        run_index,
        rows,
        divergent_at,
        sos_min_alignment: min_alignment,
        sos_p_range: p_range,
    }
}

fn run_training_unchecked(cfg: &ExperimentConfig, run_index: u64) -> RunRecord {
    let run_seed = stream_seed(cfg.master_seed, run_index);
    let mut rng_a = ChaCha8Rng::seed_from_u64(stream_seed(run_seed, 0));
    let mut rng_b = ChaCha8Rng::seed_from_u64(stream_seed(run_seed, 1));
    match cfg.game.params_per_player() {
        4 => {
            let a: [f64; 4] = draw_params(&cfg.init, &mut rng_a);
            let b: [f64; 4] = draw_params(&cfg.init, &mut rng_b);
            run_loop(cfg, run_index, a, b)
        }
        1 => {
            let a: [f64; 1] = draw_params(&cfg.init, &mut rng_a);
            let b: [f64; 1] = draw_params(&cfg.init, &mut rng_b);
            run_loop(cfg, run_index, a, b)
        }
        n => unreachable!("unsupported parameter count {n}"),
    }
}

/// One seeded training run; deterministic in `(cfg.master_seed, run_index)`.
pub fn run_training(cfg: &ExperimentConfig, run_index: u64) -> Result<RunRecord, ExperimentError> {
    cfg.validate()?;
    Ok(run_training_unchecked(cfg, run_index))
}

/// A training run from explicit initial parameters (no RNG involved).
pub fn run_training_from(
    cfg: &ExperimentConfig,
    theta_a0: &[f64],
    theta_b0: &[f64],
) -> Result<RunRecord, ExperimentError> {
    cfg.validate()?;
    let n = cfg.game.params_per_player();
    if theta_a0.len() != n || theta_b0.len() != n {
        return Err(ExperimentError::InvalidConfig(format!(
            "initial parameters must have length {n}"
        )));
    }
    Ok(match n {
        4 => run_loop::<4>(
            cfg,
            0,
            theta_a0.try_into().unwrap(),
            theta_b0.try_into().unwrap(),
        ),
        1 => run_loop::<1>(
            cfg,
            0,
            theta_a0.try_into().unwrap(),
            theta_b0.try_into().unwrap(),
        ),
        _ => unreachable!(),
    })
}

/// All `n_sample` runs of a configuration, in run order. Runs execute in
/// parallel.
pub fn collect_runs(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, ExperimentError> {
    cfg.validate()?;
    Ok((0..cfg.n_sample as u64)
        .into_par_iter()
        .map(|i| run_training_unchecked(cfg, i))
        .collect())
}

/// Sample mean, Bessel-corrected standard deviation, and the quoted standard
/// error 2 sigma / sqrt(n).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Stat {
        assert!(!xs.is_empty(), "cannot summarize an empty sample");
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat {
            mean,
            std,
            stderr: 2.0 * std / n.sqrt(),
        }
    }
}

/// Aggregate SOS diagnostics across runs.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SosDiagnostics {
    pub min_alignment: f64,
    pub p_min: f64,
    pub p_max: f64,
}

fn fold_sos(runs: &[RunRecord]) -> Option<SosDiagnostics> {
    let mut out: Option<SosDiagnostics> = None;
    for run in runs {
        if let (Some(alignment), Some((lo, hi))) = (run.sos_min_alignment, run.sos_p_range) {
            out = Some(match out {
                None => SosDiagnostics {
                    min_alignment: alignment,
                    p_min: lo,
                    p_max: hi,
                },
                Some(d) => SosDiagnostics {
                    min_alignment: d.min_alignment.min(alignment),
                    p_min: d.p_min.min(lo),
                    p_max: d.p_max.max(hi),
                },
            });
        }
    }
    out
}

/// Aggregated final-state results for one swept opponent learning rate.
#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub eta: f64,
    /// Final-step outcome probabilities (CC, CD, DC, DD) across runs.
    pub outcomes: [Stat; 4],
    pub payoff_a: Stat,
    pub payoff_b: Stat,
    pub n_runs: usize,
    pub n_divergent: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub entries: Vec<SweepEntry>,
    pub sos: Option<SosDiagnostics>,
}

/// Sweep the shared opponent learning rate over `etas`, aggregating final
/// outcome probabilities and payoffs across `n_sample` runs per value.
pub fn eta_sweep(base: &ExperimentConfig, etas: &[f64]) -> Result<SweepSummary, ExperimentError> {
    if !base.game.is_matrix() {
        return Err(ExperimentError::InvalidConfig(
            "the opponent-learning-rate sweep aggregates matrix-game outcomes".into(),
        ));
    }
    if base.n_sample < 2 {
        return Err(ExperimentError::InvalidConfig(
            "sweeps need at least 2 runs per value for deviation estimates".into(),
        ));
    }
    for &eta in etas {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(ExperimentError::InvalidConfig(format!(
                "swept opponent learning rates must be positive, got {eta}"
            )));
        }
    }
    let mut entries = Vec::with_capacity(etas.len());
    let mut sos: Option<SosDiagnostics> = None;
    for (k, &eta) in etas.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.spec_a.opponent_rate = eta;
        cfg.spec_b.opponent_rate = eta;
        cfg.master_seed = stream_seed(base.master_seed, k as u64);
        let runs = collect_runs(&cfg)?;
        let finals: Vec<&RunRecord> = runs.iter().filter(|r| r.divergent_at.is_none()).collect();
        if finals.is_empty() {
            return Err(ExperimentError::InvalidConfig(format!(
                "all runs diverged at eta = {eta}"
            )));
        }
        let outcome_samples = |idx: usize| {
            finals
                .iter()
                .map(|r| r.final_row().outcome.expect("matrix game")[idx])
                .collect::<Vec<_>>()
        };
        entries.push(SweepEntry {
            eta,
            outcomes: std::array::from_fn(|idx| Stat::from_samples(&outcome_samples(idx))),
            payoff_a: Stat::from_samples(
                &finals.iter().map(|r| r.final_row().payoff_a).collect::<Vec<_>>(),
            ),
            payoff_b: Stat::from_samples(
                &finals.iter().map(|r| r.final_row().payoff_b).collect::<Vec<_>>(),
            ),
            n_runs: runs.len(),
            n_divergent: runs.len() - finals.len(),
        });
        if let Some(d) = fold_sos(&runs) {
            sos = Some(match sos {
                None => d,
                Some(s) => SosDiagnostics {
                    min_alignment: s.min_alignment.min(d.min_alignment),
                    p_min: s.p_min.min(d.p_min),
                    p_max: s.p_max.max(d.p_max),
                },
            });
        }
    }
    Ok(SweepSummary { entries, sos })
}

/// Per-step aggregate over runs.
#[derive(Clone, Debug, Serialize)]
pub struct StepAggregate {
    pub payoff_a: Stat,
    pub payoff_b: Stat,
    pub policy_a: Option<[Stat; 4]>,
    pub policy_b: Option<[Stat; 4]>,
    pub outcome: Option<[Stat; 4]>,
    /// Mean of theta_a + theta_b for the single-parameter games.
    pub param_sum: Option<Stat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluctuationSummary {
    pub per_step: Vec<StepAggregate>,
    pub n_runs: usize,
    pub n_divergent: usize,
    pub sos: Option<SosDiagnostics>,
}

/// Mean and standard deviation of each player's expected payoff (and, where
/// applicable, policy probabilities and outcomes) at every step across runs.
/// Divergent runs are excluded from the aggregates and counted separately.
pub fn fluctuation_stats(cfg: &ExperimentConfig) -> Result<FluctuationSummary, ExperimentError> {
    let runs = collect_runs(cfg)?;
    let complete: Vec<&RunRecord> = runs.iter().filter(|r| r.divergent_at.is_none()).collect();
    if complete.is_empty() {
        return Err(ExperimentError::InvalidConfig("all runs diverged".into()));
    }
    let is_matrix = cfg.game.is_matrix();
    let per_step = (0..=cfg.steps)
        .map(|step| {
            let rows: Vec<&StepRecord> = complete.iter().map(|r| &r.rows[step]).collect();
            let collect = |f: &dyn Fn(&StepRecord) -> f64| {
                Stat::from_samples(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            StepAggregate {
                payoff_a: collect(&|r| r.payoff_a),
                payoff_b: collect(&|r| r.payoff_b),
                policy_a: is_matrix
                    .then(|| std::array::from_fn(|i| collect(&move |r| r.policy_a.unwrap()[i]))),
                policy_b: is_matrix
                    .then(|| std::array::from_fn(|i| collect(&move |r| r.policy_b.unwrap()[i]))),
                outcome: is_matrix
                    .then(|| std::array::from_fn(|i| collect(&move |r| r.outcome.unwrap()[i]))),
                param_sum: (!is_matrix).then(|| collect(&|r| r.theta_a[0] + r.theta_b[0])),
            }
        })
        .collect();
    Ok(FluctuationSummary {
        per_step,
        n_runs: runs.len(),
        n_divergent: runs.len() - complete.len(),
        sos: fold_sos(&runs),
    })
}

/// Final-policy statistics for the per-run higher- and lower-payoff roles.
#[derive(Clone, Debug, Serialize)]
pub struct RoleSummary {
    pub payoff: Stat,
    /// (Pr[S], Pr[C|not S], Pr[C|C], Pr[C|D]).
    pub policy: [Stat; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalParamsSummary {
    pub higher: RoleSummary,
    pub lower: RoleSummary,
    pub n_runs: usize,
    pub n_divergent: usize,
}

/// Split each run's two agents into higher- and lower-payoff roles by final
/// expected payoff (ties go to player A), then aggregate the final policy
/// probabilities per role.
pub fn final_params_summary(cfg: &ExperimentConfig) -> Result<FinalParamsSummary, ExperimentError> {
    if !cfg.game.is_matrix() {
        return Err(ExperimentError::InvalidConfig(
            "final-parameter summaries require a matrix game".into(),
        ));
    }
    let runs = collect_runs(cfg)?;
    let complete: Vec<&RunRecord> = runs.iter().filter(|r| r.divergent_at.is_none()).collect();
    if complete.is_empty() {
        return Err(ExperimentError::InvalidConfig("all runs diverged".into()));
    }
    let mut higher_pay = Vec::new();
    let mut lower_pay = Vec::new();
    let mut higher_policy: [Vec<f64>; 4] = Default::default();
    let mut lower_policy: [Vec<f64>; 4] = Default::default();
    for run in &complete {
        let row = run.final_row();
        let a = (row.payoff_a, row.policy_a.expect("matrix game"));
        let b = (row.payoff_b, row.policy_b.expect("matrix game"));
        let (hi, lo) = if row.payoff_a >= row.payoff_b { (a, b) } else { (b, a) };
        higher_pay.push(hi.0);
        lower_pay.push(lo.0);
        for i in 0..4 {
            higher_policy[i].push(hi.1[i]);
            lower_policy[i].push(lo.1[i]);
        }
    }
    Ok(FinalParamsSummary {
        higher: RoleSummary {
            payoff: Stat::from_samples(&higher_pay),
            policy: std::array::from_fn(|i| Stat::from_samples(&higher_policy[i])),
        },
        lower: RoleSummary {
            payoff: Stat::from_samples(&lower_pay),
            policy: std::array::from_fn(|i| Stat::from_samples(&lower_policy[i])),
        },
        n_runs: runs.len(),
        n_divergent: runs.len() - complete.len(),
    })
}

/// One evaluation point of the ultimatum-game gradient field.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FieldPoint {
    pub p_fair: f64,
    pub p_accept: f64,
    /// d V_proposer / d theta_proposer at this point.
    pub proposer_grad: f64,
    /// d V_responder / d theta_responder at this point.
    pub responder_grad: f64,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Both players' gradients on a uniform grid over probability space
/// (p_fair, p_accept) in [0.02, 0.98]^2, mapped through the inverse sigmoid
/// before differentiating. Row-major over p_fair, then p_accept.
pub fn gradient_field(
    kind: LearnerKind,
    eta: f64,
    resolution: usize,
) -> Result<Vec<FieldPoint>, ExperimentError> {
    if resolution < 2 {
        return Err(ExperimentError::InvalidConfig(
            "gradient-field resolution must be at least 2".into(),
        ));
    }
    let game = Game::Ultimatum;
    let spec = LearnerSpec::new(kind, 1.0, eta);
    spec.validate()
        .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
    let (lo, hi) = (0.02, 0.98);
    let coord = |i: usize| lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
    let mut points = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let (p_fair, p_accept) = (coord(i), coord(j));
            let ta = [logit(p_fair)];
            let tb = [logit(p_accept)];
            let ga = grad_report(&game, &spec, Player::A, &ta, &tb);
            let gb = grad_report(&game, &spec, Player::B, &tb, &ta);
            points.push(FieldPoint {
                p_fair,
                p_accept,
                proposer_grad: ga.update[0],
                responder_grad: gb.update[0],
            });
        }
    }
    Ok(points)
}

/// The learner pairings compared in the tandem game.
pub fn default_tandem_pairs() -> [(LearnerKind, LearnerKind); 3] {
    [
        (LearnerKind::LolaExact, LearnerKind::LolaExact),
        (LearnerKind::Sos, LearnerKind::Sos),
        (LearnerKind::LolaExact, LearnerKind::Sos),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct TandemPairing {
    pub kind_a: LearnerKind,
    pub kind_b: LearnerKind,
    pub summary: FluctuationSummary,
}

/// Cross-play the given learner kinds in the tandem game with unit-normal
/// initialization, collecting per-step reward statistics.
pub fn tandem_experiment(
    pairs: &[(LearnerKind, LearnerKind)],
    steps: usize,
    n_sample: usize,
    master_seed: u64,
    learning_rate: f64,
    opponent_rate: f64,
) -> Result<Vec<TandemPairing>, ExperimentError> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(kind_a, kind_b))| {
            let cfg = ExperimentConfig {
                game: Game::Tandem,
                spec_a: LearnerSpec::new(kind_a, learning_rate, opponent_rate),
                spec_b: LearnerSpec::new(kind_b, learning_rate, opponent_rate),
                steps,
                n_sample,
                init: InitScheme::GaussianUnit,
                master_seed: stream_seed(master_seed, k as u64),
            };
            Ok(TandemPairing {
                kind_a,
                kind_b,
                summary: fluctuation_stats(&cfg)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_pd_config() -> ExperimentConfig {
        ExperimentConfig::new(
            Game::pd(),
            LearnerSpec::lola(1.0, 1.0),
            LearnerSpec::lola(1.0, 1.0),
            7,
        )
        .with_steps(20)
        .with_samples(6)
    }

    #[test]
    fn run_records_include_initial_state() {
        let cfg = small_pd_config();
        let rec = run_training(&cfg, 0).unwrap();
        assert_eq!(rec.rows.len(), cfg.steps + 1);
        assert!(rec.divergent_at.is_none());
        for row in &rec.rows {
            let outcome = row.outcome.unwrap();
            assert!((outcome.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_learning_rates_freeze_the_trajectory() {
        let mut cfg = small_pd_config();
        cfg.spec_a.learning_rate = 0.0;
        cfg.spec_b.learning_rate = 0.0;
        let rec = run_training(&cfg, 3).unwrap();
        let first = &rec.rows[0];
        for row in &rec.rows {
            assert_eq!(row.theta_a, first.theta_a);
            assert_eq!(row.theta_b, first.theta_b);
        }
    }

    #[test]
    fn runs_are_deterministic_given_seed_and_index() {
        let cfg = small_pd_config();
        let a = collect_runs(&cfg).unwrap();
        let b = collect_runs(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        // Different run indices draw different initial parameters.
        assert_ne!(a[0].rows[0].theta_a, a[1].rows[0].theta_a);
    }

    #[test]
    fn mirrored_roles_produce_mirrored_trajectories() {
        // In a symmetric game, swapping the two learners and their initial
        // parameters must exactly mirror every recorded quantity.
        let spec_x = LearnerSpec::lola(1.0, 1.0);
        let spec_y = LearnerSpec::sos(1.0, 3.0);
        let base = ExperimentConfig::new(Game::pd(), spec_x, spec_y, 0).with_steps(30);
        let mut swapped = base.clone();
        swapped.spec_a = spec_y;
        swapped.spec_b = spec_x;
        let ta = [0.2, -0.1, 0.05, 0.3];
        let tb = [-0.4, 0.15, 0.0, -0.2];
        let fwd = run_training_from(&base, &ta, &tb).unwrap();
        let rev = run_training_from(&swapped, &tb, &ta).unwrap();
        for (f, r) in fwd.rows.iter().zip(&rev.rows) {
            for i in 0..4 {
                assert_relative_eq!(f.theta_a[i], r.theta_b[i], epsilon = 1e-12);
                assert_relative_eq!(f.theta_b[i], r.theta_a[i], epsilon = 1e-12);
            }
            assert_relative_eq!(f.payoff_a, r.payoff_b, epsilon = 1e-12);
        }
    }

    #[test]
    fn near_fair_bot_init_requires_matrix_game() {
        let cfg = ExperimentConfig::new(
            Game::Tandem,
            LearnerSpec::naive(1.0),
            LearnerSpec::naive(1.0),
            1,
        )
        .with_init(InitScheme::NearFairBot { sigma: 0.1 });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_rejects_bad_rates() {
        let cfg = small_pd_config();
        assert!(eta_sweep(&cfg, &[0.5, -1.0]).is_err());
        assert!(eta_sweep(&cfg, &[0.5, 0.0]).is_err());
    }

    #[test]
    fn sweep_entries_are_complete() {
        let cfg = small_pd_config().with_samples(4).with_steps(10);
        let sweep = eta_sweep(&cfg, &[0.5, 2.0]).unwrap();
        assert_eq!(sweep.entries.len(), 2);
        for entry in &sweep.entries {
            assert_eq!(entry.n_runs, 4);
            let total: f64 = entry.outcomes.iter().map(|s| s.mean).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn fluctuation_stats_are_zero_variance_for_identical_runs() {
        let mut cfg = small_pd_config().with_samples(3).with_steps(5);
        cfg.init = InitScheme::Gaussian { sigma: 0.0 };
        let stats = fluctuation_stats(&cfg).unwrap();
        // Identical samples; only mean-rounding noise remains.
        for step in &stats.per_step {
            assert!(step.payoff_a.std < 1e-12);
            assert!(step.payoff_b.std < 1e-12);
        }
    }

    #[test]
    fn final_params_roles_split_by_payoff_with_ties_to_a() {
        // Frozen asymmetric policies: A always cooperates, B always defects;
        // B earns more in the PD, so B is the higher role.
        let mut cfg = small_pd_config().with_samples(2).with_steps(3);
        cfg.spec_a.learning_rate = 0.0;
        cfg.spec_b.learning_rate = 0.0;
        cfg.init = InitScheme::Gaussian { sigma: 0.0 };
        let summary = final_params_summary(&cfg).unwrap();
        // With sigma = 0 both agents are identical: a tie, A takes higher.
        assert_eq!(summary.higher.payoff.mean, summary.lower.payoff.mean);

        // Asymmetric frozen case via explicit initial parameters.
        let rec = run_training_from(&cfg, &[-20.0, 20.0, 0.0, 0.0], &[-20.0, -20.0, 0.0, 0.0])
            .unwrap();
        let row = rec.final_row();
        assert!(row.payoff_b > row.payoff_a);
    }

    #[test]
    fn frozen_cooperators_show_unit_cooperation_in_both_roles() {
        let mut cfg = small_pd_config().with_samples(2).with_steps(2);
        cfg.spec_a.learning_rate = 0.0;
        cfg.spec_b.learning_rate = 0.0;
        cfg.init = InitScheme::Gaussian { sigma: 0.0 };
        // theta = 0 gives Pr[C|not S] = 0.5; instead freeze explicit
        // always-cooperate policies through a custom run and check roles.
        let rec =
            run_training_from(&cfg, &[-30.0, 30.0, 0.0, 0.0], &[-30.0, 30.0, 0.0, 0.0]).unwrap();
        let row = rec.final_row();
        assert_relative_eq!(row.policy_a.unwrap()[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(row.policy_b.unwrap()[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn gradient_field_has_expected_naive_signs() {
        let field = gradient_field(LearnerKind::Naive, 1.0, 9).unwrap();
        assert_eq!(field.len(), 81);
        // Responder gradient positive everywhere; proposer gradient changes
        // sign across p_accept = 5/8.
        assert!(field.iter().all(|pt| pt.responder_grad > 0.0));
        assert!(field
            .iter()
            .any(|pt| pt.p_accept < 0.625 && pt.proposer_grad > 0.0));
        assert!(field
            .iter()
            .any(|pt| pt.p_accept > 0.625 && pt.proposer_grad < 0.0));
    }

    #[test]
    fn gradient_field_rejects_degenerate_resolution() {
        assert!(gradient_field(LearnerKind::Naive, 1.0, 1).is_err());
    }

    #[test]
    fn stream_seed_is_stable() {
        // Pinned values guard the documented seeding scheme against
        // accidental changes that would break reproducibility.
        assert_eq!(stream_seed(0, 0), splitmix64(0));
        assert_eq!(stream_seed(42, 3), stream_seed(42, 3));
        assert_ne!(stream_seed(42, 3), stream_seed(42, 4));
        assert_ne!(stream_seed(42, 3), stream_seed(43, 3));
    }
}
