//! The parameter-to-payoff pipeline for transparent matrix games: raw
//! parameters -> sigmoid probabilities -> policy tuple -> action
//! distributions -> expected payoffs.
//!
//! Four parameters describe an agent, in this fixed order:
//!
//! | index | logit of                                            |
//! |-------|-----------------------------------------------------|
//! | 0     | Pr[S]: acting on a prediction of the opponent        |
//! | 1     | Pr[C|not S]: cooperating when acting independently   |
//! | 2     | Pr[C|C]: cooperating after predicted cooperation     |
//! | 3     | Pr[C|D]: cooperating after predicted defection       |
//!
//! Only Pr[S] is clamped (to `1 - EPSILON`); the other three probabilities
//! are plain sigmoids.

use crate::autodiff::Real;
use crate::games::{Game, MatrixGame2x2};
use crate::transparency::{transparent_distributions, TransparentPolicy, EPSILON};

/// Number of parameters describing one agent in a transparent matrix game.
pub const MATRIX_GAME_PARAMS: usize = 4;

/// Index of the prediction logit.
pub const IDX_PREDICT: usize = 0;
/// Index of the independent-cooperation logit.
pub const IDX_COOP_INDEPENDENT: usize = 1;
/// Index of the cooperate-after-predicted-cooperation logit.
pub const IDX_COOP_AFTER_C: usize = 2;
/// Index of the cooperate-after-predicted-defection logit.
pub const IDX_COOP_AFTER_D: usize = 3;

/// Translate four raw parameters into a transparent policy. Differentiable.
pub fn params_to_policy<T: Real>(theta: &[T]) -> TransparentPolicy<T> {
    assert_eq!(theta.len(), MATRIX_GAME_PARAMS);
    let predict = theta[IDX_PREDICT].sigmoid().min_const(1.0 - EPSILON);
    let coop_ind = theta[IDX_COOP_INDEPENDENT].sigmoid();
    let coop_after_c = theta[IDX_COOP_AFTER_C].sigmoid();
    let coop_after_d = theta[IDX_COOP_AFTER_D].sigmoid();
    TransparentPolicy {
        predict_prob: predict,
        independent: [coop_ind, T::one() - coop_ind],
        reaction: [
            [coop_after_c, coop_after_d],
            [T::one() - coop_after_c, T::one() - coop_after_d],
        ],
    }
}

/// Expected payoffs for both players: the outcome distribution is the outer
/// product of the two action distributions, weighted by the payoff tables.
/// Fully differentiable in all eight parameters.
pub fn expected_payoffs<T: Real>(game: &MatrixGame2x2, theta_a: &[T], theta_b: &[T]) -> (T, T) {
    let pol_a = params_to_policy(theta_a);
    let pol_b = params_to_policy(theta_b);
    let (w_a, w_b) = transparent_distributions(&pol_a, &pol_b)
        .expect("grounded policies cannot produce a singular system");
    let mut v_a = T::zero();
    let mut v_b = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            let joint = w_a.0[i] * w_b.0[j];
            v_a = v_a + joint * T::from_f64(game.payoff_to_a(i, j));
            v_b = v_b + joint * T::from_f64(game.payoff_to_b(i, j));
        }
    }
    (v_a, v_b)
}

/// Joint outcome probabilities (CC, CD, DC, DD), first index A's action.
pub fn outcome_probabilities(theta_a: &[f64], theta_b: &[f64]) -> [f64; 4] {
    let pol_a = params_to_policy(theta_a);
    let pol_b = params_to_policy(theta_b);
    let (w_a, w_b) = transparent_distributions(&pol_a, &pol_b)
        .expect("grounded policies cannot produce a singular system");
    [
        w_a.0[0] * w_b.0[0],
        w_a.0[0] * w_b.0[1],
        w_a.0[1] * w_b.0[0],
        w_a.0[1] * w_b.0[1],
    ]
}

/// The four policy probabilities (Pr[S], Pr[C|not S], Pr[C|C], Pr[C|D]) an
/// agent's parameters map to; used for run records and summaries.
pub fn policy_probabilities(theta: &[f64]) -> [f64; 4] {
    assert_eq!(theta.len(), MATRIX_GAME_PARAMS);
    [
        theta[IDX_PREDICT].sigmoid().min_const(1.0 - EPSILON),
        theta[IDX_COOP_INDEPENDENT].sigmoid(),
        theta[IDX_COOP_AFTER_C].sigmoid(),
        theta[IDX_COOP_AFTER_D].sigmoid(),
    ]
}

/// A two-player payoff function over raw parameter slices, generic in the
/// scalar type so the learners can differentiate through it at any order.
pub trait PayoffFn: Sync {
    fn params_per_player(&self) -> usize;
    /// Both players' expected payoffs at the given parameters.
    fn eval<T: Real>(&self, theta_a: &[T], theta_b: &[T]) -> (T, T);
}

impl PayoffFn for Game {
    fn params_per_player(&self) -> usize {
        Game::params_per_player(self)
    }

    fn eval<T: Real>(&self, theta_a: &[T], theta_b: &[T]) -> (T, T) {
        match self {
            Game::Matrix(m) => expected_payoffs(m, theta_a, theta_b),
            Game::Ultimatum => crate::games::ultimatum_payoffs(theta_a[0], theta_b[0]),
            Game::Tandem => crate::games::tandem_payoffs(theta_a[0], theta_b[0]),
        }
    }
}
