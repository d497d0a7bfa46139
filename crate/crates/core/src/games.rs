//! Game definitions: the prisoner's dilemma and chicken payoff tables, plus
//! the two single-parameter games (ultimatum, tandem) with their analytic
//! helper formulas.

use serde::Serialize;
use thiserror::Error;

use crate::autodiff::Real;

/// Action index for cooperate (swerve, in chicken).
pub const COOPERATE: usize = 0;
/// Action index for defect (go straight, in chicken).
pub const DEFECT: usize = 1;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("payoff entry is not finite")]
    NonFinitePayoff,
    #[error("opponent learning rate {0} is outside [0, 0.5); the fixed-point line diverges")]
    FixedPointDiverges(f64),
}

/// A two-action matrix game. Payoffs are indexed `[own action][opponent
/// action]` for each player, with action 0 = cooperate and 1 = defect.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixGame2x2 {
    pub payoff_a: [[f64; 2]; 2],
    pub payoff_b: [[f64; 2]; 2],
    pub labels: [&'static str; 2],
}

impl MatrixGame2x2 {
    /// Symmetric game: in (own action, opponent action) indexing both players
    /// share the same table.
    fn symmetric(payoff: [[f64; 2]; 2]) -> Self {
        MatrixGame2x2 {
            payoff_a: payoff,
            payoff_b: payoff,
            labels: ["C", "D"],
        }
    }

    /// A's payoff at the joint outcome (A plays `i`, B plays `j`).
    pub fn payoff_to_a(&self, i: usize, j: usize) -> f64 {
        self.payoff_a[i][j]
    }

    /// B's payoff at the joint outcome (A plays `i`, B plays `j`).
    pub fn payoff_to_b(&self, i: usize, j: usize) -> f64 {
        self.payoff_b[j][i]
    }

    /// Reward for mutual cooperation.
    pub fn reward(&self) -> f64 {
        self.payoff_a[COOPERATE][COOPERATE]
    }
    /// Sucker's payoff: cooperating against a defector.
    pub fn sucker(&self) -> f64 {
        self.payoff_a[COOPERATE][DEFECT]
    }
    /// Temptation: defecting against a cooperator.
    pub fn temptation(&self) -> f64 {
        self.payoff_a[DEFECT][COOPERATE]
    }
    /// Punishment for mutual defection.
    pub fn punishment(&self) -> f64 {
        self.payoff_a[DEFECT][DEFECT]
    }
}

/// Prisoner's dilemma: (T, R, P, S) = (40, 30, 10, 0).
pub fn pd() -> MatrixGame2x2 {
    MatrixGame2x2::symmetric([[30.0, 0.0], [40.0, 10.0]])
}

/// Game of chicken: (T, R, S, P) = (40, 30, 0, -30).
pub fn chicken() -> MatrixGame2x2 {
    MatrixGame2x2::symmetric([[30.0, 0.0], [40.0, -30.0]])
}

/// Arbitrary game from four outcome payoff pairs, indexed
/// `outcomes[a_action][b_action] = (payoff to A, payoff to B)`. Validates
/// nothing beyond finiteness; intended for sensitivity studies.
pub fn custom(outcomes: [[(f64, f64); 2]; 2]) -> Result<MatrixGame2x2, GameError> {
    let mut payoff_a = [[0.0; 2]; 2];
    let mut payoff_b = [[0.0; 2]; 2];
    for (i, row) in outcomes.iter().enumerate() {
        for (j, &(to_a, to_b)) in row.iter().enumerate() {
            if !to_a.is_finite() || !to_b.is_finite() {
                return Err(GameError::NonFinitePayoff);
            }
            payoff_a[i][j] = to_a;
            payoff_b[j][i] = to_b;
        }
    }
    Ok(MatrixGame2x2 {
        payoff_a,
        payoff_b,
        labels: ["C", "D"],
    })
}

/// Ultimatum game payoffs. The proposer's parameter sets the probability of
/// a fair split through a sigmoid, the responder's the probability of
/// accepting an unfair one; fair splits are always accepted.
pub fn ultimatum_payoffs<T: Real>(theta_proposer: T, theta_responder: T) -> (T, T) {
    let p_fair = theta_proposer.sigmoid();
    let p_accept = theta_responder.sigmoid();
    let unfair = (T::one() - p_fair) * p_accept;
    let v_a = T::from_f64(5.0) * p_fair + T::from_f64(8.0) * unfair;
    let v_b = T::from_f64(5.0) * p_fair + T::from_f64(2.0) * unfair;
    (v_a, v_b)
}

/// Closed-form naive gradients for the ultimatum game, used as an oracle
/// against the gradient learners: ((5 - 8 p_accept) p_fair', 2 (1 - p_fair)
/// p_accept').
pub fn ultimatum_naive_gradients(theta_proposer: f64, theta_responder: f64) -> (f64, f64) {
    let p_fair = theta_proposer.sigmoid();
    let p_accept = theta_responder.sigmoid();
    let d_fair = p_fair * (1.0 - p_fair);
    let d_accept = p_accept * (1.0 - p_accept);
    (
        (5.0 - 8.0 * p_accept) * d_fair,
        2.0 * (1.0 - p_fair) * d_accept,
    )
}

/// Tandem game payoffs: both players pay for miscoordination (x + y)^2 and
/// are rewarded for a large own parameter.
pub fn tandem_payoffs<T: Real>(x: T, y: T) -> (T, T) {
    let s = x + y;
    let shared = -(s * s);
    let two = T::from_f64(2.0);
    (shared + two * x, shared + two * y)
}

/// The x + y value of the stable fixed points reached by two exact-LOLA
/// learners in the tandem game with a shared opponent learning rate:
/// (1 - 2η + 4η²) / (1 - 2η)². Diverges as η approaches 1/2.
pub fn tandem_sfp_sum(eta: f64) -> Result<f64, GameError> {
    if !(0.0..0.5).contains(&eta) {
        return Err(GameError::FixedPointDiverges(eta));
    }
    let d = 1.0 - 2.0 * eta;
    Ok((1.0 - 2.0 * eta + 4.0 * eta * eta) / (d * d))
}

/// A playable game: the two transparent matrix games use four parameters per
/// player, ultimatum and tandem a single raw parameter per player.
#[derive(Clone, Debug, Serialize)]
pub enum Game {
    Matrix(MatrixGame2x2),
    Ultimatum,
    Tandem,
}

impl Game {
    pub fn pd() -> Self {
        Game::Matrix(pd())
    }
    pub fn chicken() -> Self {
        Game::Matrix(chicken())
    }

    pub fn params_per_player(&self) -> usize {
        match self {
            Game::Matrix(_) => 4,
            Game::Ultimatum | Game::Tandem => 1,
        }
    }

    /// True for games played through the prediction layer.
    pub fn is_matrix(&self) -> bool {
        matches!(self, Game::Matrix(_))
    }
}
