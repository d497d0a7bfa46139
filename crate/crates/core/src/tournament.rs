//! The principals' meta-game: cross-play a roster of learner configurations
//! and mark which rows are best responses to each column.
//!
//! Each ordered pair of roster entries plays `n_sample` independently
//! initialized training runs; a cell reports the row agent's expected payoff
//! in the final single-shot game, averaged across runs. Self-play cells use
//! two independently initialized agents of the same spec.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::experiments::{
    collect_runs, stream_seed, ExperimentConfig, ExperimentError, InitScheme, SosDiagnostics, Stat,
};
use crate::games::Game;
use crate::learners::LearnerSpec;

#[derive(Debug, Error, PartialEq)]
pub enum TournamentError {
    #[error("roster needs at least two entries")]
    RosterTooSmall,
    #[error("duplicate roster name {0:?}")]
    DuplicateName(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

/// A named learner configuration entered into the tournament.
#[derive(Clone, Debug, Serialize)]
pub struct RosterEntry {
    pub name: String,
    pub spec: LearnerSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct Roster {
    pub entries: Vec<RosterEntry>,
}

impl Roster {
    pub fn new(entries: Vec<RosterEntry>) -> Result<Self, TournamentError> {
        if entries.len() < 2 {
            return Err(TournamentError::RosterTooSmall);
        }
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|other| other.name == e.name) {
                return Err(TournamentError::DuplicateName(e.name.clone()));
            }
        }
        Ok(Roster { entries })
    }

    /// The five representatives compared in the headline tournaments: a
    /// naive learner plus LOLA and SOS at opponent rates 1 and 30, all with
    /// unit learning rate.
    pub fn default_five() -> Self {
        let entry = |name: &str, spec: LearnerSpec| RosterEntry {
            name: name.to_string(),
            spec,
        };
        Roster {
            entries: vec![
                entry("naive", LearnerSpec::naive(1.0)),
                entry("lola-eta1", LearnerSpec::lola(1.0, 1.0)),
                entry("lola-eta30", LearnerSpec::lola(1.0, 30.0)),
                entry("sos-eta1", LearnerSpec::sos(1.0, 1.0)),
                entry("sos-eta30", LearnerSpec::sos(1.0, 30.0)),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One cross-play cell: the row agent's mean final payoff against the
/// column agent.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cell {
    pub mean: f64,
    pub std: f64,
    /// 2 sigma / sqrt(n).
    pub stderr: f64,
    pub n_runs: usize,
    pub n_divergent: usize,
    /// Set by [`mark_best_responses`].
    pub best_response: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossPlayMatrix {
    pub names: Vec<String>,
    /// Row-major: `cells[row][col]` is the row spec playing seat A against
    /// the column spec in seat B.
    pub cells: Vec<Vec<Cell>>,
    pub sos: Option<SosDiagnostics>,
}

impl CrossPlayMatrix {
    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row][col]
    }
}

/// Run the full cross-play: every ordered roster pair, `n_sample` runs each.
/// Deterministic per `(master_seed, cell index)`; cells run in parallel.
pub fn cross_play(
    roster: &Roster,
    game: &Game,
    steps: usize,
    n_sample: usize,
    master_seed: u64,
) -> Result<CrossPlayMatrix, TournamentError> {
    if roster.len() < 2 {
        return Err(TournamentError::RosterTooSmall);
    }
    if n_sample < 2 {
        return Err(TournamentError::Experiment(ExperimentError::InvalidConfig(
            "tournaments need at least 2 runs per cell".into(),
        )));
    }
    let k = roster.len();
    let indices: Vec<(usize, usize)> = (0..k).flat_map(|r| (0..k).map(move |c| (r, c))).collect();
    let per_cell: Vec<(Cell, Option<SosDiagnostics>)> = indices
        .par_iter()
        .map(|&(row, col)| {
            let cell_index = (row * k + col) as u64;
            let cfg = ExperimentConfig {
                game: game.clone(),
                spec_a: roster.entries[row].spec,
                spec_b: roster.entries[col].spec,
                steps,
                n_sample,
                init: InitScheme::default_for(game),
                master_seed: stream_seed(master_seed, cell_index),
            };
            let runs = collect_runs(&cfg).map_err(TournamentError::Experiment)?;
            let finals: Vec<f64> = runs
                .iter()
                .filter(|r| r.divergent_at.is_none())
                .map(|r| r.final_row().payoff_a)
                .collect();
            if finals.len() < 2 {
                return Err(TournamentError::Experiment(ExperimentError::InvalidConfig(
                    format!(
                        "cell ({}, {}): too many divergent runs",
                        roster.entries[row].name, roster.entries[col].name
                    ),
                )));
            }
            let stat = Stat::from_samples(&finals);
            let sos = fold_cell_sos(&runs);
            Ok((
                Cell {
                    mean: stat.mean,
                    std: stat.std,
                    stderr: stat.stderr,
                    n_runs: runs.len(),
                    n_divergent: runs.len() - finals.len(),
                    best_response: false,
                },
                sos,
            ))
        })
        .collect::<Result<_, _>>()?;

    let mut cells = vec![Vec::with_capacity(k); k];
    let mut sos: Option<SosDiagnostics> = None;
    for (idx, (cell, cell_sos)) in per_cell.into_iter().enumerate() {
        cells[idx / k].push(cell);
        if let Some(d) = cell_sos {
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
    Ok(CrossPlayMatrix {
        names: roster.entries.iter().map(|e| e.name.clone()).collect(),
        cells,
        sos,
    })
}

fn fold_cell_sos(runs: &[crate::experiments::RunRecord]) -> Option<SosDiagnostics> {
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

/// Flag cell (i, j) if row i is a best response to column j within error
/// bars: its mean plus error reaches the highest lower bound in the column.
pub fn mark_best_responses(matrix: &mut CrossPlayMatrix) {
    let k = matrix.names.len();
    for col in 0..k {
        let best_lower = (0..k)
            .map(|row| {
                let c = matrix.cells[row][col];
                c.mean - c.stderr
            })
            .fold(f64::NEG_INFINITY, f64::max);
        for row in 0..k {
            let c = &mut matrix.cells[row][col];
            c.best_response = c.mean + c.stderr >= best_lower;
        }
    }
}
