//! Finite-difference oracles for the acceptance suite.
//!
//! The oracles are layered: plain central differences of the payoff validate
//! the engine's first-order gradients, and the second-order learner terms
//! are then validated by differencing engine-computed first-order gradients
//! (whose correctness the first layer establishes). All differencing uses
//! the same step.

use transparent_games::learners::{naive_grad, Player};
use transparent_games::payoff::PayoffFn;

pub const FD_STEP: f64 = 1e-5;

fn eval_self<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
) -> f64 {
    let (a, b) = match player {
        Player::A => game.eval(own.as_slice(), opp.as_slice()),
        Player::B => game.eval(opp.as_slice(), own.as_slice()),
    };
    match player {
        Player::A => a,
        Player::B => b,
    }
}

/// Pure central-difference gradient of the own payoff.
pub fn fd_naive<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut hi = *own;
        let mut lo = *own;
        hi[i] += FD_STEP;
        lo[i] -= FD_STEP;
        (eval_self(game, player, &hi, opp) - eval_self(game, player, &lo, opp)) / (2.0 * FD_STEP)
    })
}

fn opp_grad_of<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    of_self: bool,
    own: &[f64; N],
    opp: &[f64; N],
) -> [f64; N] {
    // Gradient with respect to the opponent's parameters of either payoff,
    // computed by the engine (first-order only).
    let opp_player = match player {
        Player::A => Player::B,
        Player::B => Player::A,
    };
    if of_self {
        // grad_opp V_self: V_self is the *other* seat's payoff from the
        // opponent's perspective, so differentiate the opponent's seat but
        // select our payoff. naive_grad always selects the own seat's
        // payoff, so do it directly here.
        engine_grad_select(game, opp_player, opp, own, player)
    } else {
        naive_grad(game, opp_player, opp, own)
    }
}

/// Engine (forward-mode) gradient of `select`'s payoff with respect to the
/// parameters in the `player` seat.
fn engine_grad_select<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    select: Player,
) -> [f64; N] {
    use transparent_games::autodiff::{seed, Dual};
    let own_seeds: [Dual<f64, N>; N] = seed(own);
    let opp_const: [Dual<f64, N>; N] = std::array::from_fn(|j| Dual::constant(opp[j]));
    let (a, b) = match player {
        Player::A => game.eval(own_seeds.as_slice(), opp_const.as_slice()),
        Player::B => game.eval(opp_const.as_slice(), own_seeds.as_slice()),
    };
    match select {
        Player::A => a.derivs,
        Player::B => b.derivs,
    }
}

/// Oracle anticipation term: eta * d/dt < grad_opp V_opp , grad_own V_self(own, opp + t u) > ...
/// concretely eta * central difference over t of grad_own V_self evaluated at
/// opp + t * u with u = grad_opp V_opp held constant.
pub fn oracle_anticipate<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
) -> [f64; N] {
    let u = opp_grad_of(game, player, false, own, opp);
    let grad_at = |t: f64| {
        let shifted: [f64; N] = std::array::from_fn(|j| opp[j] + t * u[j]);
        engine_grad_select(game, player, own, &shifted, player)
    };
    let hi = grad_at(FD_STEP);
    let lo = grad_at(-FD_STEP);
    std::array::from_fn(|i| eta * (hi[i] - lo[i]) / (2.0 * FD_STEP))
}

/// Oracle shaping term: eta * grad_own < c , grad_opp V_opp(own, opp) > with
/// c = grad_opp V_self held constant; the outer gradient by central
/// differences over each own parameter.
pub fn oracle_shape<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
) -> [f64; N] {
    let c = opp_grad_of(game, player, true, own, opp);
    let contracted = |own: &[f64; N]| {
        let g = opp_grad_of(game, player, false, own, opp);
        (0..N).map(|j| c[j] * g[j]).sum::<f64>()
    };
    std::array::from_fn(|i| {
        let mut hi = *own;
        let mut lo = *own;
        hi[i] += FD_STEP;
        lo[i] -= FD_STEP;
        eta * (contracted(&hi) - contracted(&lo)) / (2.0 * FD_STEP)
    })
}

/// Oracle for the exact opponent-aware gradient: central differences of the
/// composite own -> V_self(own, opp + eta * grad_opp V_opp(own, opp)), the
/// inner gradient computed by the (first-order-validated) engine.
pub fn oracle_lola_exact<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
) -> [f64; N] {
    let composite = |own: &[f64; N]| {
        let g = opp_grad_of(game, player, false, own, opp);
        let shifted: [f64; N] = std::array::from_fn(|j| opp[j] + eta * g[j]);
        eval_self(game, player, own, &shifted)
    };
    std::array::from_fn(|i| {
        let mut hi = *own;
        let mut lo = *own;
        hi[i] += FD_STEP;
        lo[i] -= FD_STEP;
        (composite(&hi) - composite(&lo)) / (2.0 * FD_STEP)
    })
}

/// Oracle SOS gradient assembled purely from oracle pieces.
pub fn oracle_sos<G: PayoffFn, const N: usize>(
    game: &G,
    player: Player,
    own: &[f64; N],
    opp: &[f64; N],
    eta: f64,
    a: f64,
    b: f64,
) -> [f64; N] {
    let naive = fd_naive(game, player, own, opp);
    let ant = oracle_anticipate(game, player, own, opp, eta);
    let shape = oracle_shape(game, player, own, opp, eta);
    let la: [f64; N] = std::array::from_fn(|i| naive[i] + ant[i]);
    let align: f64 = (0..N).map(|i| shape[i] * la[i]).sum();
    let la_sq: f64 = (0..N).map(|i| la[i] * la[i]).sum();
    let p1 = if align >= 0.0 { 1.0 } else { (-a * la_sq / align).min(1.0) };
    let naive_sq: f64 = (0..N).map(|i| naive[i] * naive[i]).sum();
    let p2 = if naive_sq.sqrt() < b { naive_sq } else { 1.0 };
    let p = p1.min(p2);
    std::array::from_fn(|i| la[i] + p * shape[i])
}

/// Assert two gradients agree to `rel` relative error, with a small floor on
/// the denominator for near-zero components.
pub fn assert_close<const N: usize>(got: &[f64; N], want: &[f64; N], rel: f64, what: &str) {
    for i in 0..N {
        let scale = want[i].abs().max(1e-3);
        let err = (got[i] - want[i]).abs() / scale;
        assert!(
            err < rel,
            "{what}: component {i} got {} want {} (rel {err:.2e})",
            got[i],
            want[i]
        );
    }
}
