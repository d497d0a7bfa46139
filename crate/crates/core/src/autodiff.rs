//! Forward-mode automatic differentiation with exact first and second
//! derivatives.
//!
//! [`Dual<T, N>`] tracks a value of type `T` together with its `N` partial
//! derivatives, computing a full gradient in a single forward pass. Because
//! the scalar type is generic, duals nest: `Dual<Dual<f64, N>, M>` carries
//! exact mixed second partials, and a gradient computation can run *inside*
//! another differentiated expression. That nesting is what makes the exact
//! opponent-aware gradients in [`crate::learners`] possible — the outer
//! derivative sees how the inner gradient itself moves with the outer
//! variables.
//!
//! All derivatives follow the analytic chain rule; there is no finite
//! differencing anywhere in this module. Finite differences belong in test
//! oracles.
//!
//! # Nested differentiation
//!
//! ```
//! use transparent_games::autodiff::{gradient, Dual, Real};
//!
//! // f(x) = g'(x) for g(x) = x^3, evaluated by differentiating through an
//! // inner gradient call. f(2) = 12 and f'(2) = g''(2) = 12.
//! let (value, outer) = {
//!     let f = |x: &[Dual<f64, 1>; 1]| {
//!         let inner = gradient(
//!             |y: &[Dual<Dual<f64, 1>, 1>; 1]| y[0] * y[0] * y[0],
//!             &[x[0]],
//!         );
//!         inner[0]
//!     };
//!     let seeds = transparent_games::autodiff::seed(&[2.0]);
//!     let out = f(&seeds);
//!     (out.value, out.derivs[0])
//! };
//! assert!((value - 12.0).abs() < 1e-12);
//! assert!((outer - 12.0).abs() < 1e-12);
//! ```

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Errors from the differentiation engine.
#[derive(Debug, Error, PartialEq)]
pub enum DiffError {
    /// A seed value was NaN or infinite.
    #[error("non-finite input value {0}")]
    NonFiniteInput(f64),
    /// Checked division hit a zero-valued denominator.
    #[error("division by a zero-valued scalar")]
    DivisionByZero,
}

/// Scalar field that supports exact forward-mode differentiation.
///
/// Implemented by `f64` (plain arithmetic) and by [`Dual<T, N>`] for any
/// `T: Real`, so expressions written against this trait can be evaluated at
/// any derivative order.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Lift a plain constant; all derivative entries are zero.
    fn from_f64(c: f64) -> Self;
    /// The underlying value with every level of derivative structure stripped.
    fn primal(&self) -> f64;
    fn exp(self) -> Self;

    /// Logistic function 1 / (1 + e^-x).
    ///
    /// Branches on the sign of the primal so neither branch overflows; both
    /// branches are the same analytic function, so derivatives are exact.
    fn sigmoid(self) -> Self {
        if self.primal() >= 0.0 {
            Self::one() / (Self::one() + (-self).exp())
        } else {
            let e = self.exp();
            e / (Self::one() + e)
        }
    }

    /// min(self, bound) against a constant.
    ///
    /// On the clamped branch the result is a constant: the derivative is zero,
    /// the subgradient choice for min. Values at the bound pass through
    /// unchanged with derivative one.
    fn min_const(self, bound: f64) -> Self {
        if self.primal() > bound {
            Self::from_f64(bound)
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(c: f64) -> Self {
        c
    }
    fn primal(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
}

/// A scalar carrying its value and `N` partial derivatives.
///
/// `Dual<f64, N>` gives first derivatives with respect to `N` seeded
/// variables; `Dual<Dual<f64, N>, M>` gives first derivatives with respect to
/// `M` outer variables of quantities that themselves carry `N` inner
/// derivatives, which is how second partials and nested gradients are
/// obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub value: T,
    pub derivs: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    /// A value with all derivative entries zero.
    pub fn constant(value: T) -> Self {
        Dual {
            value,
            derivs: [T::zero(); N],
        }
    }

    /// The `index`-th independent variable: unit derivative in its own slot.
    pub fn variable(value: T, index: usize) -> Self {
        assert!(index < N, "variable index {index} out of range for {N} slots");
        let mut derivs = [T::zero(); N];
        derivs[index] = T::one();
        Dual { value, derivs }
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            value: self.value + rhs.value,
            derivs: std::array::from_fn(|i| self.derivs[i] + rhs.derivs[i]),
        }
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            value: self.value - rhs.value,
            derivs: std::array::from_fn(|i| self.derivs[i] - rhs.derivs[i]),
        }
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            value: -self.value,
            derivs: std::array::from_fn(|i| -self.derivs[i]),
        }
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual {
            value: self.value * rhs.value,
            derivs: std::array::from_fn(|i| self.derivs[i] * rhs.value + self.value * rhs.derivs[i]),
        }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    /// d(a/b) = (da - (a/b) db) / b. A zero-valued denominator propagates
    /// IEEE infinities/NaNs exactly like `f64`; use [`checked_div`] where a
    /// diagnosable error is wanted.
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        Dual {
            value: q,
            derivs: std::array::from_fn(|i| (self.derivs[i] - q * rhs.derivs[i]) / rhs.value),
        }
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn one() -> Self {
        Dual::constant(T::one())
    }
    fn from_f64(c: f64) -> Self {
        Dual::constant(T::from_f64(c))
    }
    fn primal(&self) -> f64 {
        self.value.primal()
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual {
            value: e,
            derivs: std::array::from_fn(|i| e * self.derivs[i]),
        }
    }
}

/// Division that reports a zero-valued denominator instead of producing
/// IEEE non-finite results.
pub fn checked_div<T: Real>(num: T, den: T) -> Result<T, DiffError> {
    if den.primal() == 0.0 {
        Err(DiffError::DivisionByZero)
    } else {
        Ok(num / den)
    }
}

/// Seed `N` independent variables: unit derivative in each variable's own
/// slot, zero elsewhere. No finiteness check; see [`seed_variables`].
pub fn seed<T: Real, const N: usize>(at: &[T; N]) -> [Dual<T, N>; N] {
    std::array::from_fn(|i| Dual::variable(at[i], i))
}

/// Seed `N` independent `f64` variables, rejecting non-finite inputs.
pub fn seed_variables<const N: usize>(values: &[f64; N]) -> Result<[Dual<f64, N>; N], DiffError> {
    for &v in values {
        if !v.is_finite() {
            return Err(DiffError::NonFiniteInput(v));
        }
    }
    Ok(seed(values))
}

/// Gradient of `f` at `at` in one forward pass.
///
/// Generic over the scalar type, so calling this with `T = Dual<f64, M>`
/// inside another differentiated expression yields a gradient that is itself
/// differentiable with respect to the outer variables.
pub fn gradient<T: Real, const N: usize, F>(f: F, at: &[T; N]) -> [T; N]
where
    F: FnOnce(&[Dual<T, N>; N]) -> Dual<T, N>,
{
    f(&seed(at)).derivs
}

/// Value and gradient of `f` at `at` in one forward pass.
pub fn value_and_gradient<T: Real, const N: usize, F>(f: F, at: &[T; N]) -> (T, [T; N])
where
    F: FnOnce(&[Dual<T, N>; N]) -> Dual<T, N>,
{
    let out = f(&seed(at));
    (out.value, out.derivs)
}

/// Value, gradient and dense Hessian from one second-order forward pass.
#[derive(Clone, Copy, Debug)]
pub struct SecondOrder<const N: usize> {
    pub value: f64,
    pub gradient: [f64; N],
    pub hessian: [[f64; N]; N],
}

/// Evaluate `f` on nested duals and collect value, gradient and the full
/// matrix of second partials.
pub fn hessian<const N: usize, F>(f: F, at: &[f64; N]) -> SecondOrder<N>
where
    F: FnOnce(&[Dual<Dual<f64, N>, N>; N]) -> Dual<Dual<f64, N>, N>,
{
    let seeds: [Dual<Dual<f64, N>, N>; N] =
        std::array::from_fn(|i| Dual::variable(Dual::variable(at[i], i), i));
    let out = f(&seeds);
    SecondOrder {
        value: out.value.value,
        gradient: out.value.derivs,
        hessian: std::array::from_fn(|i| out.derivs[i].derivs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    /// Central finite difference of a plain-f64 function, step 1e-5.
    fn fd_gradient<const N: usize>(f: impl Fn(&[f64; N]) -> f64, at: &[f64; N]) -> [f64; N] {
        let h = 1e-5;
        std::array::from_fn(|i| {
            let mut hi = *at;
            let mut lo = *at;
            hi[i] += h;
            lo[i] -= h;
            (f(&hi) - f(&lo)) / (2.0 * h)
        })
    }

    #[test]
    fn seeding_is_identity() {
        let vars = seed_variables(&[0.0]).unwrap();
        assert_eq!(vars[0].value, 0.0);
        assert_eq!(vars[0].derivs[0], 1.0);
        let so = hessian(|x| x[0], &[0.0]);
        assert_eq!(so.gradient[0], 1.0);
        assert_eq!(so.hessian[0][0], 0.0);
    }

    #[test]
    fn seeding_rejects_non_finite() {
        assert!(matches!(
            seed_variables(&[1.0, f64::NAN]),
            Err(DiffError::NonFiniteInput(_))
        ));
        assert!(seed_variables(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn bilinear_product() {
        let so = hessian(|x| x[0] * x[1], &[2.0, 3.0]);
        assert_eq!(so.value, 6.0);
        assert_eq!(so.gradient, [3.0, 2.0]);
        assert_eq!(so.hessian[0][1], 1.0);
        assert_eq!(so.hessian[1][0], 1.0);
        assert_eq!(so.hessian[0][0], 0.0);
    }

    #[test]
    fn sigmoid_matches_finite_differences() {
        let g = gradient(|x: &[Dual<f64, 1>; 1]| x[0].sigmoid(), &[0.5]);
        let fd = fd_gradient(|x: &[f64; 1]| x[0].sigmoid(), &[0.5]);
        let s = 0.5f64.sigmoid();
        assert_relative_eq!(g[0], s * (1.0 - s), epsilon = 1e-12);
        assert_relative_eq!(g[0], fd[0], epsilon = 1e-9);
        assert_relative_eq!(g[0], 0.2350, epsilon = 1e-4);
    }

    #[test]
    fn sigmoid_at_zero() {
        let so = hessian(|x| x[0].sigmoid(), &[0.0]);
        assert_eq!(so.value, 0.5);
        assert_relative_eq!(so.gradient[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(so.hessian[0][0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        for &x in &[-800.0, -40.0, 40.0, 800.0] {
            let (v, g) = value_and_gradient(|t: &[Dual<f64, 1>; 1]| t[0].sigmoid(), &[x]);
            assert!(v.is_finite());
            assert!(g[0].is_finite(), "sigmoid'({x}) = {:?}", g[0]);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn min_const_clamps_with_zero_derivative() {
        let (v, g) = value_and_gradient(
            |x: &[Dual<f64, 1>; 1]| x[0].sigmoid().min_const(0.999),
            &[10.0],
        );
        assert_eq!(v, 0.999);
        assert_eq!(g[0], 0.0);

        // Pass-through branch keeps the sigmoid derivative.
        let (v, g) = value_and_gradient(
            |x: &[Dual<f64, 1>; 1]| x[0].sigmoid().min_const(0.999),
            &[0.0],
        );
        assert_eq!(v, 0.5);
        assert_relative_eq!(g[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn exp_product_identity() {
        let a = hessian(|x| x[0].exp() * x[0].exp(), &[1.0]);
        let b = hessian(|x| (x[0] + x[0]).exp(), &[1.0]);
        assert_relative_eq!(a.value, b.value, epsilon = 1e-12);
        assert_relative_eq!(a.gradient[0], b.gradient[0], epsilon = 1e-12);
        assert_relative_eq!(a.hessian[0][0], b.hessian[0][0], epsilon = 1e-12);
    }

    #[test]
    fn quadratic_gradient() {
        let g = gradient(|x: &[Dual<f64, 2>; 2]| x[0] * x[0] + x[1] * x[1], &[1.0, 2.0]);
        assert_eq!(g, [2.0, 4.0]);
    }

    #[test]
    fn checked_div_rejects_zero() {
        assert_eq!(checked_div(1.0, 0.0), Err(DiffError::DivisionByZero));
        let z = Dual::<f64, 1>::constant(0.0);
        let one = Dual::<f64, 1>::constant(1.0);
        assert!(checked_div(one, z).is_err());
        assert!(checked_div(one, one).is_ok());
    }

    #[test]
    fn nested_gradient_of_cubic() {
        // f(x) = d/dy [y^3] at y = x, so f(x) = 3x^2 and f'(x) = 6x.
        // Evaluated through an inner gradient call to exercise nesting.
        let (v, g) = value_and_gradient(
            |x: &[Dual<f64, 1>; 1]| {
                gradient(|y: &[Dual<Dual<f64, 1>, 1>; 1]| y[0] * y[0] * y[0], &[x[0]])[0]
            },
            &[2.0],
        );
        assert_relative_eq!(v, 12.0, epsilon = 1e-12);
        assert_relative_eq!(g[0], 12.0, epsilon = 1e-12);
    }

    // A moderately deep composite over 4 variables used for the randomized
    // engine checks below.
    fn composite<T: Real>(x: &[T; 4]) -> T {
        let s = x[0].sigmoid() * x[1].sigmoid() + (x[2] * T::from_f64(0.3)).exp();
        let t = (x[3] + x[0] * x[2]).sigmoid();
        s * t + s / (T::one() + t * t)
    }

    #[test]
    fn gradient_matches_finite_differences_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let at: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let g = gradient(composite::<Dual<f64, 4>>, &at);
            let fd = fd_gradient(composite::<f64>, &at);
            for i in 0..4 {
                let err = (g[i] - fd[i]).abs();
                if fd[i].abs() < 1e-3 {
                    assert!(err < 1e-8, "abs err {err} at {at:?}");
                } else {
                    assert!(err / fd[i].abs() < 1e-5, "rel err at {at:?}");
                }
            }
        }
    }

    #[test]
    fn second_partials_are_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let at: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let so = hessian(composite::<Dual<Dual<f64, 4>, 4>>, &at);
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (so.hessian[i][j] - so.hessian[j][i]).abs() < 1e-10,
                        "asymmetric at {at:?}: H[{i}][{j}]={} H[{j}][{i}]={}",
                        so.hessian[i][j],
                        so.hessian[j][i]
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = |x: &[Dual<f64, 2>; 2]| x[0].sigmoid() * x[1];
        let g = |x: &[Dual<f64, 2>; 2]| (x[0] * x[1]).exp();
        for _ in 0..50 {
            let at: [f64; 2] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
            let (alpha, beta): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combined = gradient(
                |x: &[Dual<f64, 2>; 2]| {
                    Dual::from_f64(alpha) * f(x) + Dual::from_f64(beta) * g(x)
                },
                &at,
            );
            let gf = gradient(f, &at);
            let gg = gradient(g, &at);
            for i in 0..2 {
                assert!(
                    (combined[i] - (alpha * gf[i] + beta * gg[i])).abs() < 1e-10,
                    "linearity violated at {at:?}"
                );
            }
        }
    }
}
