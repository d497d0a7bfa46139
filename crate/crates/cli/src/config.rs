//! Configuration loading and flag/file merging.
//!
//! Precedence: command-line flag > config-file value > built-in default.
//! Unknown config keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use transparent_games::experiments::{ExperimentConfig, InitScheme};
use transparent_games::games::{self, Game};
use transparent_games::learners::{LearnerKind, LearnerSpec};
use transparent_games::tournament::{Roster, RosterEntry};

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_LEARNING_RATE: f64 = 1.0;
pub const DEFAULT_OPPONENT_RATE: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 0.1;
pub const DEFAULT_FIELD_RESOLUTION: usize = 21;
pub const DEFAULT_TANDEM_RATE: f64 = 0.1;

/// Payoff pair per joint outcome, `[payoff to A, payoff to B]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGameFile {
    pub cc: [f64; 2],
    pub cd: [f64; 2],
    pub dc: [f64; 2],
    pub dd: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub etas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub learner: Option<String>,
    pub eta: Option<f64>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TandemFile {
    pub delta: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosterEntryFile {
    pub name: String,
    pub learner: String,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
}

/// The on-disk configuration; every field optional, flags override.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub game: Option<String>,
    pub learner_a: Option<String>,
    pub learner_b: Option<String>,
    pub delta_a: Option<f64>,
    pub delta_b: Option<f64>,
    pub eta_a: Option<f64>,
    pub eta_b: Option<f64>,
    pub steps: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<String>,
    pub sigma: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub custom_game: Option<CustomGameFile>,
    pub sweep: Option<SweepFile>,
    pub field: Option<FieldFile>,
    pub tandem: Option<TandemFile>,
    pub roster: Option<Vec<RosterEntryFile>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config file {}", p.display()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown format {other:?}; expected csv or json"),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn name(self) -> &'static str {
        self.extension()
    }
}

pub fn parse_learner_kind(s: &str) -> Result<LearnerKind> {
    match s {
        "naive" => Ok(LearnerKind::Naive),
        "la" => Ok(LearnerKind::LookAhead),
        "lola" => Ok(LearnerKind::LolaExact),
        "lola1" => Ok(LearnerKind::LolaFirstOrder),
        "sos" => Ok(LearnerKind::Sos),
        other => bail!("unknown learner {other:?}; expected naive|la|lola|lola1|sos"),
    }
}

pub fn learner_kind_name(kind: LearnerKind) -> &'static str {
    match kind {
        LearnerKind::Naive => "naive",
        LearnerKind::LookAhead => "la",
        LearnerKind::LolaExact => "lola",
        LearnerKind::LolaFirstOrder => "lola1",
        LearnerKind::Sos => "sos",
    }
}

pub fn parse_game(name: &str, custom: Option<&CustomGameFile>) -> Result<Game> {
    match name {
        "pd" => Ok(Game::pd()),
        "chicken" => Ok(Game::chicken()),
        "ultimatum" => Ok(Game::Ultimatum),
        "tandem" => Ok(Game::Tandem),
        "custom" => {
            let c = custom.ok_or_else(|| {
                anyhow!("--game custom needs a [custom_game] table in the config file")
            })?;
            let outcomes = [
                [(c.cc[0], c.cc[1]), (c.cd[0], c.cd[1])],
                [(c.dc[0], c.dc[1]), (c.dd[0], c.dd[1])],
            ];
            Ok(Game::Matrix(games::custom(outcomes)?))
        }
        other => bail!("unknown game {other:?}; expected pd|chicken|ultimatum|tandem|custom"),
    }
}


/// Everything the train / sweep / final-params family needs.
pub struct Resolved {
    pub game_name: String,
    pub experiment: ExperimentConfig,
    pub format: OutputFormat,
    pub out: PathBuf,
}

pub struct CommonOverrides<'a> {
    pub game: Option<&'a str>,
    pub learner_a: Option<&'a str>,
    pub learner_b: Option<&'a str>,
    pub delta_a: Option<f64>,
    pub delta_b: Option<f64>,
    pub eta_a: Option<f64>,
    pub eta_b: Option<f64>,
    pub steps: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<&'a str>,
    pub sigma: Option<f64>,
    pub out: Option<&'a Path>,
    pub format: Option<&'a str>,
}

pub fn resolve(
    file: &FileConfig,
    over: &CommonOverrides<'_>,
    command: &str,
    default_format: OutputFormat,
) -> Result<Resolved> {
    let game_name = over
        .game
        .map(str::to_string)
        .or_else(|| file.game.clone())
        .unwrap_or_else(|| "pd".to_string());
    let game = parse_game(&game_name, file.custom_game.as_ref())?;

    let kind_a = parse_learner_kind(
        over.learner_a
            .map(str::to_string)
            .or_else(|| file.learner_a.clone())
            .as_deref()
            .unwrap_or("lola"),
    )?;
    let kind_b = parse_learner_kind(
        over.learner_b
            .map(str::to_string)
            .or_else(|| file.learner_b.clone())
            .as_deref()
            .unwrap_or("lola"),
    )?;
    let spec_a = LearnerSpec::new(
        kind_a,
        over.delta_a.or(file.delta_a).unwrap_or(DEFAULT_LEARNING_RATE),
        over.eta_a.or(file.eta_a).unwrap_or(DEFAULT_OPPONENT_RATE),
    );
    let spec_b = LearnerSpec::new(
        kind_b,
        over.delta_b.or(file.delta_b).unwrap_or(DEFAULT_LEARNING_RATE),
        over.eta_b.or(file.eta_b).unwrap_or(DEFAULT_OPPONENT_RATE),
    );

    let init_name = over
        .init
        .map(str::to_string)
        .or_else(|| file.init.clone())
        .unwrap_or_else(|| "gauss".to_string());
    let sigma = over.sigma.or(file.sigma);
    let init = match init_name.as_str() {
        "gauss" => match (&game, sigma) {
            (Game::Tandem, None) => InitScheme::GaussianUnit,
            (_, s) => InitScheme::Gaussian {
                sigma: s.unwrap_or(DEFAULT_SIGMA),
            },
        },
        "egfb" => {
            if !game.is_matrix() {
                bail!("--init egfb only applies to the 2x2 matrix games");
            }
            InitScheme::NearFairBot {
                sigma: sigma.unwrap_or(DEFAULT_SIGMA),
            }
        }
        other => bail!("unknown init {other:?}; expected gauss or egfb"),
    };

    let format = OutputFormat::parse(
        over.format
            .map(str::to_string)
            .or_else(|| file.format.clone())
            .as_deref()
            .unwrap_or(default_format.name()),
    )?;
    let out = over
        .out
        .map(Path::to_path_buf)
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{command}.{}", format.extension())));

    let experiment = ExperimentConfig {
        game,
        spec_a,
        spec_b,
        steps: over.steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
        n_sample: over.runs.or(file.runs).unwrap_or(DEFAULT_RUNS),
        init,
        master_seed: over.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    };
    experiment.validate()?;
    Ok(Resolved {
        game_name,
        experiment,
        format,
        out,
    })
}

pub fn resolve_roster(file: &FileConfig) -> Result<Roster> {
    match &file.roster {
        None => Ok(Roster::default_five()),
        Some(entries) => {
            let entries = entries
                .iter()
                .map(|e| {
                    Ok(RosterEntry {
                        name: e.name.clone(),
                        spec: LearnerSpec::new(
                            parse_learner_kind(&e.learner)?,
                            e.delta.unwrap_or(DEFAULT_LEARNING_RATE),
                            e.eta.unwrap_or(DEFAULT_OPPONENT_RATE),
                        ),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Roster::new(entries)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<FileConfig>("stepz = 12").unwrap_err();
        assert!(err.to_string().contains("stepz"));
    }

    #[test]
    fn learner_names_round_trip() {
        for name in ["naive", "la", "lola", "lola1", "sos"] {
            assert_eq!(learner_kind_name(parse_learner_kind(name).unwrap()), name);
        }
        assert!(parse_learner_kind("lolz").is_err());
    }

    #[test]
    fn tandem_defaults_to_unit_normal_init() {
        let file = FileConfig::default();
        let over = CommonOverrides {
            game: Some("tandem"),
            learner_a: None,
            learner_b: None,
            delta_a: None,
            delta_b: None,
            eta_a: None,
            eta_b: None,
            steps: None,
            runs: None,
            seed: None,
            init: None,
            sigma: None,
            out: None,
            format: None,
        };
        let r = resolve(&file, &over, "train", OutputFormat::Csv).unwrap();
        assert_eq!(r.experiment.init, InitScheme::GaussianUnit);
    }

    #[test]
    fn near_fair_bot_init_rejected_off_matrix_games() {
        let file = FileConfig::default();
        let over = CommonOverrides {
            game: Some("tandem"),
            learner_a: None,
            learner_b: None,
            delta_a: None,
            delta_b: None,
            eta_a: None,
            eta_b: None,
            steps: None,
            runs: None,
            seed: None,
            init: Some("egfb"),
            sigma: None,
            out: None,
            format: None,
        };
        assert!(resolve(&file, &over, "train", OutputFormat::Csv).is_err());
    }
}
