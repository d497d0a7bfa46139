//! Action distributions under mutual prediction.
//!
//! Each player acts on a prediction of the opponent with probability
//! `predict_prob`, otherwise samples an opponent-independent distribution.
//! The prediction is of how the opponent plays *against them*, which again
//! involves a prediction, and so on; grounding both `predict_prob` values at
//! or below `1 - EPSILON` makes the recursion terminate. The resulting
//! distribution of a player's actions has the closed form
//!
//! ```text
//! w_A = (I - pA pB M_A M_B)^-1 ((1 - pA) v_A + pA (1 - pB) M_A v_B)
//! ```
//!
//! implemented in [`transparent_distributions`] generically over the scalar
//! type, so gradients flow through the matrix inverse. [`series_oracle`]
//! sums the underlying alternating prediction series term by term instead
//! and serves as an independent reference for tests.

use serde::Serialize;
use thiserror::Error;

use crate::autodiff::Real;

/// Minimum probability of an opponent-independent response.
pub const EPSILON: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum TransparencyError {
    #[error("prediction matrix is singular (determinant {0})")]
    SingularMatrix(f64),
    #[error("policy invariant violated: {0}")]
    InvalidPolicy(String),
}

/// A policy under mutual prediction: the probability of acting on a
/// prediction, the action distribution when acting independently, and the
/// reaction matrix mapping each predicted opponent action (column) to a
/// response distribution.
#[derive(Clone, Copy, Debug)]
pub struct TransparentPolicy<T> {
    /// Probability of choosing the action by predicting the opponent;
    /// at most `1 - EPSILON`.
    pub predict_prob: T,
    /// Distribution over own actions when acting independently.
    pub independent: [T; 2],
    /// `reaction[i][j]`: probability of playing `i` after predicting the
    /// opponent plays `j`. Columns are distributions.
    pub reaction: [[T; 2]; 2],
}

impl<T: Real> TransparentPolicy<T> {
    /// Check the policy invariants on primal values.
    pub fn validate(&self) -> Result<(), TransparencyError> {
        let p = self.predict_prob.primal();
        if !(0.0..=1.0 - EPSILON).contains(&p) {
            return Err(TransparencyError::InvalidPolicy(format!(
                "predict_prob {p} outside [0, {}]",
                1.0 - EPSILON
            )));
        }
        check_distribution(&[self.independent[0].primal(), self.independent[1].primal()])?;
        for j in 0..2 {
            check_distribution(&[self.reaction[0][j].primal(), self.reaction[1][j].primal()])?;
        }
        Ok(())
    }
}

/// A distribution over the two actions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ActionDistribution<T>(pub [T; 2]);

impl<T: Real> ActionDistribution<T> {
    pub fn validate(&self) -> Result<(), TransparencyError> {
        check_distribution(&[self.0[0].primal(), self.0[1].primal()])
    }
}

fn check_distribution(w: &[f64; 2]) -> Result<(), TransparencyError> {
    if w[0] < -1e-9 || w[1] < -1e-9 {
        return Err(TransparencyError::InvalidPolicy(format!(
            "negative probability in {w:?}"
        )));
    }
    if (w[0] + w[1] - 1.0).abs() > 1e-9 {
        return Err(TransparencyError::InvalidPolicy(format!(
            "probabilities {w:?} do not sum to 1"
        )));
    }
    Ok(())
}

/// Closed-form action distributions for both players.
///
/// The 2x2 system is solved explicitly through the determinant, so the
/// computation is differentiable whenever `T` is a dual type. The matrix
/// `I - pA pB M_A M_B` cannot be singular when both predict probabilities
/// respect the `1 - EPSILON` bound; the determinant check is a guard against
/// invalid inputs.
pub fn transparent_distributions<T: Real>(
    pol_a: &TransparentPolicy<T>,
    pol_b: &TransparentPolicy<T>,
) -> Result<(ActionDistribution<T>, ActionDistribution<T>), TransparencyError> {
    let w_a = one_side(pol_a, pol_b)?;
    let w_b = one_side(pol_b, pol_a)?;
    Ok((w_a, w_b))
}

fn one_side<T: Real>(
    own: &TransparentPolicy<T>,
    opp: &TransparentPolicy<T>,
) -> Result<ActionDistribution<T>, TransparencyError> {
    let p_own = own.predict_prob;
    let p_opp = opp.predict_prob;

    // K = M_own * M_opp
    let k = mat_mul(&own.reaction, &opp.reaction);
    // S = I - p_own p_opp K
    let pp = p_own * p_opp;
    let s = [
        [T::one() - pp * k[0][0], -(pp * k[0][1])],
        [-(pp * k[1][0]), T::one() - pp * k[1][1]],
    ];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if det.primal().abs() < 1e-12 {
        return Err(TransparencyError::SingularMatrix(det.primal()));
    }

    // rhs = (1 - p_own) v_own + p_own (1 - p_opp) M_own v_opp
    let m_v = mat_vec(&own.reaction, &opp.independent);
    let c_ind = T::one() - p_own;
    let c_pred = p_own * (T::one() - p_opp);
    let rhs = [
        c_ind * own.independent[0] + c_pred * m_v[0],
        c_ind * own.independent[1] + c_pred * m_v[1],
    ];

    // w = S^-1 rhs via the adjugate.
    let w0 = (s[1][1] * rhs[0] - s[0][1] * rhs[1]) / det;
    let w1 = (s[0][0] * rhs[1] - s[1][0] * rhs[0]) / det;
    Ok(ActionDistribution([w0, w1]))
}

fn mat_mul<T: Real>(a: &[[T; 2]; 2], b: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    let mut out = [[T::zero(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_vec<T: Real>(m: &[[T; 2]; 2], v: &[T; 2]) -> [T; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Term-by-term sum of the prediction series, used as a test oracle for the
/// closed form. Plain-`f64` arithmetic only.
///
/// Terms alternate between the two players' independent responses, with the
/// k-th pair attenuated by `(pA pB)^k`. Summation stops once the geometric
/// tail bound `(pA pB)^k / (1 - pA pB)` drops below `tol`, which bounds the
/// truncation error because reaction matrices are column-stochastic.
pub fn series_oracle(
    pol_a: &TransparentPolicy<f64>,
    pol_b: &TransparentPolicy<f64>,
    tol: f64,
) -> (ActionDistribution<f64>, ActionDistribution<f64>) {
    assert!(tol > 0.0, "tolerance must be positive");
    (
        series_one_side(pol_a, pol_b, tol).0,
        series_one_side(pol_b, pol_a, tol).0,
    )
}

/// Number of series terms needed for the last [`series_oracle`] side; exposed
/// for the termination tests.
pub fn series_one_side(
    own: &TransparentPolicy<f64>,
    opp: &TransparentPolicy<f64>,
    tol: f64,
) -> (ActionDistribution<f64>, usize) {
    let p_own = own.predict_prob;
    let p_opp = opp.predict_prob;
    let ratio = p_own * p_opp;

    // Running pair of direction vectors: a_k = (M_own M_opp)^k v_own and
    // b_k = (M_own M_opp)^k M_own v_opp.
    let mut a_vec = own.independent;
    let mut b_vec = mat_vec(&own.reaction, &opp.independent);
    let k = mat_mul(&own.reaction, &opp.reaction);

    let c_ind = 1.0 - p_own;
    let c_pred = p_own * (1.0 - p_opp);
    let mut sum = [0.0; 2];
    let mut weight = 1.0; // (pA pB)^k
    let mut terms = 0usize;
    loop {
        sum[0] += weight * (c_ind * a_vec[0] + c_pred * b_vec[0]);
        sum[1] += weight * (c_ind * a_vec[1] + c_pred * b_vec[1]);
        terms += 1;
        weight *= ratio;
        // Remaining tail is bounded by weight / (1 - ratio).
        if weight / (1.0 - ratio) < tol {
            break;
        }
        a_vec = mat_vec(&k, &a_vec);
        b_vec = mat_vec(&k, &b_vec);
    }
    (ActionDistribution(sum), terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    pub(crate) fn policy(
        predict: f64,
        independent: [f64; 2],
        reaction: [[f64; 2]; 2],
    ) -> TransparentPolicy<f64> {
        TransparentPolicy {
            predict_prob: predict,
            independent,
            reaction,
        }
    }

    /// Mirrors a predicted cooperation, defects after a predicted defection,
    /// cooperates when acting independently.
    fn grounded_fair_bot() -> TransparentPolicy<f64> {
        policy(1.0 - EPSILON, [1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    }

    fn always_defect() -> TransparentPolicy<f64> {
        policy(0.0, [0.0, 1.0], [[0.5, 0.5], [0.5, 0.5]])
    }

    #[test]
    fn no_prediction_returns_independent_distribution() {
        let a = policy(0.0, [0.3, 0.7], [[0.9, 0.2], [0.1, 0.8]]);
        let b = policy(0.7, [0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]]);
        let (w_a, _) = transparent_distributions(&a, &b).unwrap();
        assert_relative_eq!(w_a.0[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(w_a.0[1], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn fair_bot_defects_against_defector() {
        let (w_a, w_b) = transparent_distributions(&grounded_fair_bot(), &always_defect()).unwrap();
        assert_relative_eq!(w_a.0[0], EPSILON, epsilon = 1e-12);
        assert_relative_eq!(w_a.0[1], 1.0 - EPSILON, epsilon = 1e-12);
        assert_relative_eq!(w_b.0[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fair_bots_cooperate_exactly() {
        let (w_a, w_b) =
            transparent_distributions(&grounded_fair_bot(), &grounded_fair_bot()).unwrap();
        assert_relative_eq!(w_a.0[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w_a.0[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(w_b.0[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn series_terminates_immediately_without_prediction() {
        let a = policy(0.0, [0.3, 0.7], [[1.0, 0.0], [0.0, 1.0]]);
        let b = policy(0.0, [0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]]);
        let (_, terms) = series_one_side(&a, &b, 1e-9);
        assert_eq!(terms, 1);
    }

    #[test]
    fn series_term_count_scales_inversely_with_grounding() {
        let a = grounded_fair_bot();
        let (_, terms) = series_one_side(&a, &a, 1e-9);
        // With predict probabilities at 0.999 the tail shrinks by roughly
        // 2 EPSILON per term, so on the order of 1/EPSILON terms are needed.
        assert!(terms > 1_000, "only {terms} terms");
        assert!(terms < 100_000, "{terms} terms");
    }

    #[test]
    fn validate_rejects_out_of_range_policies() {
        let mut p = grounded_fair_bot();
        assert!(p.validate().is_ok());
        p.predict_prob = 1.0;
        assert!(p.validate().is_err());
        let mut q = grounded_fair_bot();
        q.independent = [0.6, 0.6];
        assert!(q.validate().is_err());
    }

    fn arb_distribution() -> impl Strategy<Value = [f64; 2]> {
        (0.0f64..=1.0).prop_map(|p| [p, 1.0 - p])
    }

    fn arb_policy() -> impl Strategy<Value = TransparentPolicy<f64>> {
        (
            0.0f64..=(1.0 - EPSILON),
            arb_distribution(),
            arb_distribution(),
            arb_distribution(),
        )
            .prop_map(|(predict, independent, col_c, col_d)| {
                TransparentPolicy {
                    predict_prob: predict,
                    independent,
                    reaction: [[col_c[0], col_d[0]], [col_c[1], col_d[1]]],
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn closed_form_matches_series(a in arb_policy(), b in arb_policy()) {
            let (wa, wb) = transparent_distributions(&a, &b).unwrap();
            let (sa, sb) = series_oracle(&a, &b, 1e-12);
            for i in 0..2 {
                prop_assert!((wa.0[i] - sa.0[i]).abs() < 1e-9);
                prop_assert!((wb.0[i] - sb.0[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn outputs_are_valid_distributions(a in arb_policy(), b in arb_policy()) {
            let (wa, wb) = transparent_distributions(&a, &b).unwrap();
            prop_assert!(wa.validate().is_ok(), "w_a = {:?}", wa.0);
            prop_assert!(wb.validate().is_ok(), "w_b = {:?}", wb.0);
        }
    }

    #[test]
    fn no_inversion_failure_over_many_random_policies() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            let p: f64 = rng.gen_range(0.0..=1.0 - EPSILON);
            let v: f64 = rng.gen();
            let c0: f64 = rng.gen();
            let c1: f64 = rng.gen();
            policy(p, [v, 1.0 - v], [[c0, c1], [1.0 - c0, 1.0 - c1]])
        };
        for _ in 0..100_000 {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let out = transparent_distributions(&a, &b);
            assert!(out.is_ok());
        }
    }

    #[test]
    fn gradients_flow_through_the_inverse() {
        use crate::autodiff::{gradient, Dual};
        // d/dp of the cooperate probability of a fair-bot-vs-defector pair,
        // checked against central finite differences.
        let f = |p: f64| {
            let a = policy(p, [1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]);
            let b = policy(0.4, [0.2, 0.8], [[0.7, 0.3], [0.3, 0.7]]);
            transparent_distributions(&a, &b).unwrap().0 .0[0]
        };
        let g = gradient(
            |v: &[Dual<f64, 1>; 1]| {
                let lift = |c: f64| Dual::from_f64(c);
                let a = TransparentPolicy {
                    predict_prob: v[0],
                    independent: [lift(1.0), lift(0.0)],
                    reaction: [[lift(1.0), lift(0.0)], [lift(0.0), lift(1.0)]],
                };
                let b = TransparentPolicy {
                    predict_prob: lift(0.4),
                    independent: [lift(0.2), lift(0.8)],
                    reaction: [[lift(0.7), lift(0.3)], [lift(0.3), lift(0.7)]],
                };
                transparent_distributions(&a, &b).unwrap().0 .0[0]
            },
            &[0.3],
        );
        let h = 1e-5;
        let fd = (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        assert_relative_eq!(g[0], fd, epsilon = 1e-8);
    }
}
