//! The gradient learners: naive ascent, Look-Ahead, LOLA (exact and
//! first-order) and SOS, plus the simultaneous parameter-update step.
//!
//! For a player with payoff V_self(own, opp), the operators are
//!
//! * naive: the partial gradient of V_self in the own parameters, treating
//!   the opponent as static;
//! * Look-Ahead: naive plus the anticipation term
//!   `eta * (grad_opp V_opp) . (grad_opp grad_own V_self)`, which accounts
//!   for evaluating the own gradient after the opponent's imputed step;
//! * LOLA (first-order): Look-Ahead plus the shaping term
//!   `eta * (grad_opp V_self) . (grad_own grad_opp V_opp)`, which rewards
//!   moving to regions where the opponent's own gradient will favor us;
//! * LOLA (exact): the total derivative of
//!   `V_self(own, opp + eta * grad_opp V_opp(own, opp))` in the own
//!   parameters, with no Taylor truncation — the opponent's imputed update
//!   is differentiated through;
//! * SOS: Look-Ahead plus the shaping term scaled by a per-step, per-player
//!   factor p in [0, 1] chosen so the result keeps a non-negative inner
//!   product with the Look-Ahead gradient and vanishes with the naive one.
//!
//! `eta` is the step size a learner imputes to its opponent; it does not
//! have to match the opponent's actual learning rate.
//!
//! All derivatives come from one nested forward-mode pass: the own
//! parameters are seeded as outer variables and the opponent's as inner
//! variables, so the inner gradient of either payoff emerges still carrying
//! its dependence on the own parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{seed, Dual, Real};
use crate::payoff::PayoffFn;

/// Which seat a learner occupies in the two-player game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    A,
    B,
}

/// Gradient algorithm selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Naive,
    LookAhead,
    LolaExact,
    LolaFirstOrder,
    Sos,
}

/// Default SOS alignment hyperparameter.
pub const SOS_A: f64 = 0.5;
/// Default SOS convergence-guard threshold.
pub const SOS_B: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("learning rate must be finite and non-negative, got {0}")]
    BadLearningRate(f64),
    #[error("opponent learning rate must be finite and non-negative, got {0}")]
    BadOpponentRate(f64),
    #[error("SOS hyperparameters must lie in (0, 1), got a={0}, b={1}")]
    BadSosHyperparameters(f64, f64),
}

/// A learner: algorithm kind, own learning rate, imputed opponent learning
/// rate, and the two SOS hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Own gradient-ascent step size (delta).
    pub learning_rate: f64,
    /// Step size imputed to the opponent (eta); ignored by naive learners.
    pub opponent_rate: f64,
    pub sos_a: f64,
    pub sos_b: f64,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind, learning_rate: f64, opponent_rate: f64) -> Self {
        LearnerSpec {
            kind,
            learning_rate,
            opponent_rate,
            sos_a: SOS_A,
            sos_b: SOS_B,
        }
    }

    pub fn naive(learning_rate: f64) -> Self {
        Self::new(LearnerKind::Naive, learning_rate, 0.0)
    }
    pub fn look_ahead(learning_rate: f64, opponent_rate: f64) -> Self {
        Self::new(LearnerKind::LookAhead, learning_rate, opponent_rate)
    }
    pub fn lola(learning_rate: f64, opponent_rate: f64) -> Self {
        Self::new(LearnerKind::LolaExact, learning_rate, opponent_rate)
    }
    pub fn lola_first_order(learning_rate: f64, opponent_rate: f64) -> Self {
        Self::new(LearnerKind::LolaFirstOrder, learning_rate, opponent_rate)
    }
    pub fn sos(learning_rate: f64, opponent_rate: f64) -> Self {
        Self::new(LearnerKind::Sos, learning_rate, opponent_rate)
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(LearnerError::BadLearningRate(self.learning_rate));
        }
        if !self.opponent_rate.is_finite() || self.opponent_rate < 0.0 {
            return Err(LearnerError::BadOpponentRate(self.opponent_rate));
        }
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.sos_a) || !open_unit(self.sos_b) {
            return Err(LearnerError::BadSosHyperparameters(self.sos_a, self.sos_b));
        }
        Ok(())
    }
}

/// Everything a learner computed at one parameter pair.
#[derive(Clone, Copy, Debug)]
pub struct GradientReport<const N: usize> {
    pub kind: LearnerKind,
    /// Partial gradient of the own payoff (opponent static).
    pub naive: [f64; N],
    /// naive + anticipation term.
    pub look_ahead: [f64; N],
    /// Shaping term (chi).
    pub shaping: [f64; N],
    /// The gradient actually applied by this learner.
    pub update: [f64; N],
    /// SOS scaling factor; 1 for every other kind.
    pub p: f64,
    /// `<update, look_ahead>`, recorded for SOS learners only. SOS
    /// guarantees this is non-negative.
    pub sos_alignment: Option<f64>,
}

/// The three summands of the first-order opponent-aware expansion.
#[derive(Clone, Copy, Debug)]
pub struct FirstOrderTerms<const N: usize> {
    pub naive: [f64; N],
    pub anticipate: [f64; N],
    pub shape: [f64; N],
}

impl<const N: usize> FirstOrderTerms<N> {
    pub fn look_ahead(&self) -> [f64; N] {
        std::array::from_fn(|i| self.naive[i] + self.anticipate[i])
    }
}

/// Result of the nested forward pass at (own, opp): the own-gradient of the
/// own payoff, and both payoffs' opponent-gradients with their dependence on
/// the own parameters still attached.
struct NestedPass<const N: usize> {
    naive: [f64; N],
    opp_grad_self: [Dual<f64, N>; N],
    opp_grad_opp: [Dual<f64, N>; N],
}

fn nested_pass<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
) -> NestedPass<N> {
    let own_outer: [Dual<f64, N>; N] = seed(own);
    // Own parameters are constants of the inner pass but keep their outer
    // derivative payload; opponent parameters are the inner variables.
    let own_lift: [Dual<Dual<f64, N>, N>; N] = own_outer.map(Dual::constant);
    let opp_inner: [Dual<Dual<f64, N>, N>; N] =
        std::array::from_fn(|j| Dual::variable(Dual::from_f64(opp[j]), j));

    let (v_a, v_b) = match player {
        Player::A => game.eval(&own_lift, &opp_inner),
        Player::B => game.eval(&opp_inner, &own_lift),
    };
    let (v_self, v_opp) = match player {
        Player::A => (v_a, v_b),
        Player::B => (v_b, v_a),
    };
    NestedPass {
        naive: v_self.value.derivs,
        opp_grad_self: v_self.derivs,
        opp_grad_opp: v_opp.derivs,
    }
}

impl<const N: usize> NestedPass<N> {
    fn first_order_terms(&self, eta: f64) -> FirstOrderTerms<N> {
        let anticipate = std::array::from_fn(|i| {
            eta * (0..N)
                .map(|j| self.opp_grad_opp[j].value * self.opp_grad_self[j].derivs[i])
                .sum::<f64>()
        });
        let shape = std::array::from_fn(|i| {
            eta * (0..N)
                .map(|j| self.opp_grad_self[j].value * self.opp_grad_opp[j].derivs[i])
                .sum::<f64>()
        });
        FirstOrderTerms {
            naive: self.naive,
            anticipate,
            shape,
        }
    }
}

/// Gradient of the own payoff with the opponent's parameters held fixed.
pub fn naive_grad<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
) -> [f64; N] {
    let own_seeds: [Dual<f64, N>; N] = seed(own);
    let opp_const: [Dual<f64, N>; N] = std::array::from_fn(|j| Dual::from_f64(opp[j]));
    let (v_a, v_b) = match player {
        Player::A => game.eval(&own_seeds, &opp_const),
        Player::B => game.eval(&opp_const, &own_seeds),
    };
    match player {
        Player::A => v_a.derivs,
        Player::B => v_b.derivs,
    }
}

/// The three summands of the first-order expansion: (naive, anticipate,
/// shape), each a vector over the own parameters.
pub fn lola_first_order_terms<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
) -> FirstOrderTerms<N> {
    nested_pass(game, player, own, opp).first_order_terms(eta)
}

/// Exact opponent-aware gradient: the total derivative of the own payoff
/// evaluated at the opponent's post-update parameters, including the
/// dependence of the opponent's gradient on the own parameters.
pub fn lola_exact_grad<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
) -> [f64; N] {
    let pass = nested_pass(game, player, own, opp);
    lola_exact_from_pass(game, player, own, opp, eta, &pass.opp_grad_opp)
}

fn lola_exact_from_pass<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
    opp_grad_opp: &[Dual<f64, N>; N],
) -> [f64; N] {
    let own_seeds: [Dual<f64, N>; N] = seed(own);
    // The imputed opponent update still carries its derivatives with respect
    // to the own parameters, so this second pass differentiates through it.
    let shifted: [Dual<f64, N>; N] = std::array::from_fn(|j| {
        Dual::from_f64(opp[j]) + Dual::from_f64(eta) * opp_grad_opp[j]
    });
    let (v_a, v_b) = match player {
        Player::A => game.eval(&own_seeds, &shifted),
        Player::B => game.eval(&shifted, &own_seeds),
    };
    match player {
        Player::A => v_a.derivs,
        Player::B => v_b.derivs,
    }
}

fn dot<const N: usize>(x: &[f64; N], y: &[f64; N]) -> f64 {
    (0..N).map(|i| x[i] * y[i]).sum()
}

fn norm_sq<const N: usize>(x: &[f64; N]) -> f64 {
    dot(x, x)
}

/// The SOS scaling factor for one player: as large as possible subject to
/// keeping a non-negative inner product with the Look-Ahead gradient
/// (bounded by `p1`) and vanishing with the naive gradient (bounded by
/// `p2`). Each player computes this independently.
fn sos_scaling<const N: usize>(terms: &FirstOrderTerms<N>, a: f64, b: f64) -> f64 {
    let la = terms.look_ahead();
    let align = dot(&terms.shape, &la);
    let p1 = if align >= 0.0 {
        1.0
    } else {
        (-a * norm_sq(&la) / align).min(1.0)
    };
    let naive_norm_sq = norm_sq(&terms.naive);
    let p2 = if naive_norm_sq.sqrt() < b {
        naive_norm_sq
    } else {
        1.0
    };
    p1.min(p2)
}

/// SOS gradient with its full report.
pub fn sos_grad<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
    a: f64,
    b: f64,
) -> GradientReport<N> {
    let terms = lola_first_order_terms(game, player, own, opp, eta);
    sos_report_from_terms(&terms, a, b)
}

fn sos_report_from_terms<const N: usize>(
    terms: &FirstOrderTerms<N>,
    a: f64,
    b: f64,
) -> GradientReport<N> {
    let la = terms.look_ahead();
    let p = sos_scaling(terms, a, b);
    let update: [f64; N] = std::array::from_fn(|i| la[i] + p * terms.shape[i]);
    let alignment = dot(&update, &la);
    debug_assert!((0.0..=1.0).contains(&p), "SOS scaling p={p} outside [0,1]");
    debug_assert!(
        alignment >= -1e-10,
        "SOS alignment guarantee violated: {alignment}"
    );
    GradientReport {
        kind: LearnerKind::Sos,
        naive: terms.naive,
        look_ahead: la,
        shaping: terms.shape,
        update,
        p,
        sos_alignment: Some(alignment),
    }
}

/// Compute one player's gradient report under its spec.
pub fn grad_report<G: PayoffFn, const N: usize>(
    game: &G,
    spec: &LearnerSpec,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
) -> GradientReport<N> {
    match spec.kind {
        LearnerKind::Naive => {
            let g = naive_grad(game, player, own, opp);
            GradientReport {
                kind: spec.kind,
                naive: g,
                look_ahead: g,
                shaping: [0.0; N],
                update: g,
                p: 1.0,
                sos_alignment: None,
            }
        }
        LearnerKind::LookAhead | LearnerKind::LolaFirstOrder => {
            let terms = lola_first_order_terms(game, player, own, opp, spec.opponent_rate);
            let la = terms.look_ahead();
            let update = match spec.kind {
                LearnerKind::LookAhead => la,
                _ => std::array::from_fn(|i| la[i] + terms.shape[i]),
            };
            GradientReport {
                kind: spec.kind,
                naive: terms.naive,
                look_ahead: la,
                shaping: terms.shape,
                update,
                p: 1.0,
                sos_alignment: None,
            }
        }
        LearnerKind::LolaExact => {
            let pass = nested_pass(game, player, own, opp);
            let terms = pass.first_order_terms(spec.opponent_rate);
            let update = lola_exact_from_pass(
                game,
                player,
                own,
                opp,
                spec.opponent_rate,
                &pass.opp_grad_opp,
            );
            GradientReport {
                kind: spec.kind,
                naive: terms.naive,
                look_ahead: terms.look_ahead(),
                shaping: terms.shape,
                update,
                p: 1.0,
                sos_alignment: None,
            }
        }
        LearnerKind::Sos => {
            let terms = lola_first_order_terms(game, player, own, opp, spec.opponent_rate);
            sos_report_from_terms(&terms, spec.sos_a, spec.sos_b)
        }
    }
}

/// Both players' new parameters after one simultaneous ascent step: both
/// gradients are evaluated at the current parameter pair, then applied
/// together.
#[derive(Clone, Copy, Debug)]
pub struct StepOutcome<const N: usize> {
    pub theta_a: [f64; N],
    pub theta_b: [f64; N],
    pub report_a: GradientReport<N>,
    pub report_b: GradientReport<N>,
}

pub fn update_step<G: PayoffFn, const N: usize>(
    game: &G,
    spec_a: &LearnerSpec,
    spec_b: &LearnerSpec,
    theta_a: &[f64; N],
    theta_b: &[f64; N],
) -> StepOutcome<N> {
    let report_a = grad_report(game, spec_a, Player::A, theta_a, theta_b);
    let report_b = grad_report(game, spec_b, Player::B, theta_b, theta_a);
    StepOutcome {
        theta_a: std::array::from_fn(|i| theta_a[i] + spec_a.learning_rate * report_a.update[i]),
        theta_b: std::array::from_fn(|i| theta_b[i] + spec_b.learning_rate * report_b.update[i]),
        report_a,
        report_b,
    }
}
