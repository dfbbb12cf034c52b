//! Fidelity and interruption controlled blackbox optimization.
//!
//! A multi-fidelity blackbox is sampled on a Latin hypercube to estimate,
//! per fidelity and constraint, how often the fidelity predicts the true
//! feasibility verdict, how often the constraint is violated and what an
//! evaluation costs. Each constraint is then assigned to the cheapest
//! fidelity trusted to predict it, minimizing the expected evaluation time.
//! During optimization the [`controller::FidelityController`] evaluates
//! points through increasing fidelities and abandons a point as soon as an
//! assigned constraint is violated.
//!
//! ```
//! use ficopt::harness::{run, Mode, ProblemSource, RunConfig};
//!
//! let mut cfg = RunConfig::new(ProblemSource::builtin("gated"), Mode::InterEb, 20.0);
//! cfg.n_h = 200;
//! cfg.x0 = Some(vec![0.5; 4]);
//! let record = run(&cfg).unwrap();
//! assert!(record.best.is_some());
//! ```

pub mod assignment;
pub mod blackbox;
pub mod controller;
pub mod domain;
pub mod error;
pub mod harness;
pub mod problems;
pub mod sampling;
pub mod solver;

pub use assignment::{AssignmentInstance, AssignmentMatrix};
pub use blackbox::{BlackboxDescriptor, MultiFidelityBlackbox, VirtualClock};
pub use controller::FidelityController;
pub use domain::{
    BoxBounds, ConstraintMeta, EvalOutput, EvalStatus, ExtReal, FidelityLadder, TrialPoint,
};
pub use error::{Error, Result};
pub use harness::{Mode, RunConfig, RunRecord};
pub use sampling::FeasibilityStats;
pub use solver::{BarrierMode, SolverConfig};
