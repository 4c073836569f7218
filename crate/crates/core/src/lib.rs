//! Gaussian-state model of a jammed bosonic channel: moment calculus, homodyne
//! statistics, capacity lower bounds, correlation distillation and seeded Monte
//! Carlo checks.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the simulation
//! harness runs in `f64`. Concrete aliases are provided below.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod protocol;
pub mod scalar;
pub mod sim;
pub mod special;

pub use bounds::{
    capacity_lb_cr, capacity_lb_direct, capacity_lb_quantum, delta_lower_bound, delta_lower_bound_literal, epsilon,
    epsilon_clamped, epsilon_guaranteed, nu, nu_clamped, symmetrization_error_bound, worst_case_jammer, BoundReport,
    JammerGrid, LowerBound,
};
pub use channel::{
    bpsk_homodyne_density, channel_output, self_jamming_attack, symmetrized_homodyne_density, JammerStrategy, PowerBudget,
    ReplayAttack, SenderSymbol, SymmetrizedDensity,
};
pub use error::{Error, Result};
pub use gaussian::{
    make_classically_correlated_thermal, make_coherent, make_displaced_thermal, make_tmsv, BivariateGaussian, GaussianState,
    HomodyneLaw, UnivariateGaussian,
};
pub use linalg::Matrix;
pub use num_complex::Complex;
pub use protocol::{
    decompose_on_triangle, effective_channel, quadrant_distribution, quadrant_distribution_for, scramble_uncorrelated,
    symmetrize_with_cr, BinaryChannel, CorrelationResource, QuadrantDistribution, SimplexDecomposition,
};
pub use scalar::Real;
pub use sim::{JammerPolicy, Protocol, SimulationConfig, SimulationReport};
pub use special::{binary_entropy, erf, erfc, phi, phi2, Correlation};

pub type GaussianState64 = GaussianState<f64>;
pub type GaussianState32 = GaussianState<f32>;
pub type PowerBudget64 = PowerBudget<f64>;
pub type PowerBudget32 = PowerBudget<f32>;
pub type JammerStrategy64 = JammerStrategy<f64>;
pub type JammerStrategy32 = JammerStrategy<f32>;
pub type QuadrantDistribution64 = QuadrantDistribution<f64>;
pub type BinaryChannel64 = BinaryChannel<f64>;
pub type BoundReport64 = BoundReport<f64>;
