//! Simulation library for opponent-aware gradient learning in two-player
//! games whose players can predict each other's decisions.
//!
//! Two agents repeatedly play a single-shot matrix game. Each agent's policy
//! is parameterized by four logits: the probability of acting on a prediction
//! of the opponent, the action taken when acting independently, and the
//! reactions to a predicted cooperation or defection. Mutual prediction is
//! grounded by a minimum probability of an opponent-independent response, and
//! the resulting action distributions have a closed form that stays
//! differentiable end to end ([`transparency`]).
//!
//! On top of that sit four gradient learners ([`learners`]): naive ascent,
//! Look-Ahead, LOLA (exact, differentiating through the opponent's update),
//! and SOS with its per-player scaling factor. The [`experiments`] module
//! provides seeded training runs, opponent-learning-rate sweeps and summary
//! statistics; [`tournament`] cross-plays a roster of learner configurations
//! and marks best responses.
//!
//! Everything is deterministic given a master seed, including under
//! parallel execution.

pub mod autodiff;
pub mod experiments;
pub mod games;
pub mod learners;
pub mod payoff;
pub mod tournament;
pub mod transparency;

pub use autodiff::{Dual, Real};
pub use experiments::{ExperimentConfig, InitScheme, RunRecord, Stat, SweepSummary};
pub use games::{Game, MatrixGame2x2};
pub use learners::{GradientReport, LearnerKind, LearnerSpec, Player};
pub use payoff::PayoffFn;
pub use tournament::{CrossPlayMatrix, Roster};
pub use transparency::{ActionDistribution, TransparentPolicy, EPSILON};
