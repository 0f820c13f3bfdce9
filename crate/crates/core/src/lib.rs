//! Damped Pinney equation toolkit.
//!
//! The damped Pinney equation
//!
//! ```text
//! x'' + 2 eps x' + omega^2(t) x = k / x^3,    omega = Omega(eps t)
//! ```
//!
//! has no known closed-form solution for general frequency functions. This
//! crate provides the machinery needed to study it quantitatively at desk
//! scale:
//!
//! - [`frequency`]: catalogue of slowly varying frequency profiles
//!   `Omega(eps t)` with closed-form or quadrature phase integrals,
//! - [`ode`]: an adaptive Dormand-Prince 5(4) integrator with dense output
//!   and collapse-event detection, plus the Pinney and classical-oscillator
//!   right-hand sides,
//! - [`exact`]: ground-truth solutions of the undamped equation via the
//!   nonlinear superposition law, used as oracles,
//! - [`asymptotics`]: the two-timing (Kuzmak-Luke) zeroth-order solution:
//!   amplitude law, closed-form trajectory, derivative, initial-condition
//!   fitting, and the adiabatic energy law,
//! - [`transforms`]: numerical residual verifiers for the quasi-invariance,
//!   Emden-Fowler, Abel, and time-dependent-mass coordinate transformations,
//! - [`kostin`]: the dissipative-quantum-mechanics application: Gaussian
//!   wave-packet evolution driven by the coupled damped-Pinney / classical
//!   oscillator system, with density and velocity field reconstruction,
//! - [`metrics`]: error norms, envelope extraction, and damping-strength
//!   convergence studies comparing asymptotic and numeric trajectories.
//!
//! All numerical code is generic over the scalar type through the [`Real`]
//! trait; `f64` aliases for the main domain types are exported at the crate
//! root.

// Validations are written in negated form (`!(x > 0)`) so NaN inputs fail
// them instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod frequency;
pub mod kostin;
pub mod metrics;
pub mod ode;
pub mod solver;
pub mod transforms;

mod real;

pub use error::Error;
pub use real::Real;

/// Smallest |x| admitted before the `k/x^3` term is considered singular,
/// in the problem's length unit.
pub const LENGTH_FLOOR: f64 = 1e-12;

/// Concrete `f64` aliases for the main domain types.
pub type FrequencyProfile64 = frequency::FrequencyProfile<f64>;
pub type PinneyParams64 = ode::PinneyParams<f64>;
pub type Trajectory64 = ode::Trajectory<f64>;
pub type SuperpositionSolution64 = exact::SuperpositionSolution<f64>;
pub type AsymptoticSolution64 = asymptotics::AsymptoticSolution<f64>;
pub type QuasiInvarianceMap64 = transforms::QuasiInvarianceMap<f64>;
pub type KostinParams64 = kostin::KostinParams<f64>;
pub type QuantumFields64 = kostin::QuantumFields<f64>;
pub type ComparisonReport64 = metrics::ComparisonReport<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<FrequencyProfile64>();
        assert_send_sync::<PinneyParams64>();
        assert_send_sync::<Trajectory64>();
        assert_send_sync::<SuperpositionSolution64>();
        assert_send_sync::<AsymptoticSolution64>();
        assert_send_sync::<QuasiInvarianceMap64>();
        assert_send_sync::<KostinParams64>();
        assert_send_sync::<QuantumFields64>();
        assert_send_sync::<ComparisonReport64>();
    }
}
