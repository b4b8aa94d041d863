//! Rational macromodeling of multiport frequency responses from few samples.
//!
//! The crate reconstructs S/Y/Z-parameter sweeps with Loewner-matrix state
//! models, selects new sample frequencies adaptively, and ships two baseline
//! interpolation sweeps (barycentric minimal sampling and Stoer–Bulirsch
//! path II) for comparison, plus analytic solver stand-ins and Touchstone v1
//! I/O.
//!
//! Typical use: wrap a frequency-response source in a [`solvers::SolverOracle`],
//! choose a [`sweep::TestGrid`] and a [`sweep::SweepConfig`], and call
//! [`sweep::run_sweep`]. The result carries the chosen samples, the reduced
//! state model, the per-iteration error trace and the model response over
//! the grid.

pub mod baselines;
pub mod error;
pub mod loewner;
pub mod metrics;
pub mod solvers;
pub mod sweep;
pub mod touchstone;
pub mod types;

pub use error::{Error, Result};
pub use types::{ComplexFrequency, ErrorTracePoint, Frequency, ResponseMatrix, SampleSet};
