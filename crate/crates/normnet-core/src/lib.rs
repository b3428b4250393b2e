//! Constructive norm-constrained neural networks.
//!
//! This crate builds feedforward networks whose weights are explicit closed
//! forms rather than trained values, tracks width/depth/weight-norm
//! certificates `(W, L, K)` through a small network algebra, and verifies
//! approximation-error and Rademacher-complexity bounds empirically.
//!
//! The main pieces:
//!
//! * [`network`] — the layered data model, evaluation, norm-constraint
//!   certificates and the JSON document format;
//! * [`activations`] — the activation registry with analytic metadata
//!   (Taylor specs, weak even-second-difference specs, piecewise-linear
//!   tags) and its numeric verification;
//! * [`algebra`] — padding, composition, concatenation and linear
//!   combination with exact certificate propagation;
//! * [`constructors`] — deterministic approximators for `x²`, `xy`,
//!   `x₁⋯x_d` and Lipschitz-regular functions glued by a partition of
//!   unity, plus budget-driven parameter selection;
//! * [`randomized`] — the same approximators with sampled weights and
//!   Bernstein-type success-probability guarantees;
//! * [`complexity`] — Rademacher complexity estimation (exact and Monte
//!   Carlo), closed-form bounds and their witness families.
//!
//! Networks are immutable after construction: evaluation and all
//! measurements take `&self` and are safe to call from multiple threads.

pub mod activations;
pub mod algebra;
pub mod complexity;
pub mod constructors;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod lipr;
pub mod network;
pub mod randomized;

pub use activations::{
    ActivationEntry, ActivationMeta, Modulus, PiecewiseLinear, Registry, TaylorSpec, WeakSpec,
};
pub use complexity::{
    bound_lower_general, bound_lower_relu, bound_upper, lower_bound_rate, rademacher_exact,
    rademacher_mc, FunctionFamily, SamplePanel,
};
pub use constructors::{
    build_product2, build_product_d, build_square, build_square_auto, build_square_weak,
    scaling_sweep, CertifiedApproximator,
};
pub use error::{Error, Result};
pub use grid::{measure_lipschitz_empirical, sup_error, EvalBox, EvalGrid};
pub use linalg::op_norm_inf;
pub use lipr::{build_lipr, choose_k, CompositeApproximator, LiprParams, LiprTarget, Partition};
pub use network::{augment, check_norm_constraint, ArchitectureCert, Layer, Network, NormReport};
pub use randomized::{
    build_random_lipr, build_random_product2, build_random_product_d, build_random_square,
    BernsteinConstants, RandomApproximator, RngSpec, SuccessRecord,
};
