//! Exact computational laboratory for one-dimensional multilinear
//! rearrangement functionals.
//!
//! The crate evaluates the form `Phi_L(E) = ∫_{R^m} ∏_j 1_{E_j}(L_j(x)) dx`
//! on tuples of interval unions with exact rational arithmetic, decides the
//! structural hypotheses on a configuration (nondegeneracy, admissibility,
//! strict admissibility, genericity), runs the measure-preserving
//! symmetrization flow, and carries out the verification campaigns for the
//! sharpened rearrangement inequality: symmetrized tuples maximize the form,
//! the maximizer is unique up to translation symmetry, and the deficit
//! controls the squared distance to the orbit of symmetrized tuples.
//!
//! No floating point enters any computation; `f64` appears only in decimal
//! rendering and log-log slope fits. The polytope engine enumerates
//! exhaustively and is sized for desk scale: around 12 slots and dimension
//! up to 5.

pub mod conditions;
pub mod config;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod functional;
pub mod interval;
pub mod linalg;
pub mod polytope;
pub mod rational;
pub mod report;
pub mod rng;
pub mod simplex;

pub use config::{builtin_config, Configuration, MeasureVector, Preset};
pub use error::{Error, Result};
pub use experiments::{
    deficit, dist_to_orbit, exponent_fit, orbit_objective_at, psi_scan, shifted_kernel_bound,
    stability_scan, DeficitReport, Family, OrbitDistance, Sampler, ScanReport, Side,
};
pub use flow::{flow_events, flow_state, flow_trace, FlowEvent, TracePoint};
pub use functional::{
    expansion_residual, first_order_term, in_row_space, kernel, kernel_integral,
    kernel_left_derivative, kernel_pair, kernel_table, phi, psi, second_order_term, KernelTable,
    SetTuple,
};
pub use interval::{normalize, Interval, IntervalUnion};
pub use polytope::{body_of, build_box_polytope, Polytope, Vertex};
pub use rational::{parse_rational, rat, ratio, Rational};
pub use rng::Rng;
