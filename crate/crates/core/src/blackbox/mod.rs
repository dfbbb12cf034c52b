//! The multi-fidelity blackbox contract and its implementations.

mod external;
mod synthetic;

pub use external::{ExternalBlackbox, ExternalConfig};
pub use synthetic::{
    true_stats, BiasShape, ConstraintShape, CostModel, SyntheticBlackbox, SyntheticConstraint,
    SyntheticSpec, TrueStats,
};

use serde::{Deserialize, Serialize};

use crate::domain::{BoxBounds, ConstraintMeta, EvalOutput, TrialPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackboxDescriptor {
    pub bounds: BoxBounds,
    pub constraints: ConstraintMeta,
    pub objective_varies_with_fidelity: bool,
}

impl BlackboxDescriptor {
    pub fn dimension(&self) -> usize {
        self.bounds.dim()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.count
    }
}

/// A blackbox that can be evaluated at any fidelity `phi` in `[0, 1]`.
///
/// Implementations check a-priori constraints first and short-circuit when
/// one is violated. At `phi = 0` only a-priori constraints are computed.
/// Failures are reported through [`EvalOutput::failure`], never by panicking.
pub trait MultiFidelityBlackbox: Send + Sync {
    fn descriptor(&self) -> &BlackboxDescriptor;

    fn evaluate(&self, x: &TrialPoint, fidelity: f64) -> EvalOutput;
}

impl<T: MultiFidelityBlackbox + ?Sized> MultiFidelityBlackbox for &T {
    fn descriptor(&self) -> &BlackboxDescriptor {
        (**self).descriptor()
    }

    fn evaluate(&self, x: &TrialPoint, fidelity: f64) -> EvalOutput {
        (**self).evaluate(x, fidelity)
    }
}

impl<T: MultiFidelityBlackbox + ?Sized> MultiFidelityBlackbox for Box<T> {
    fn descriptor(&self) -> &BlackboxDescriptor {
        (**self).descriptor()
    }

    fn evaluate(&self, x: &TrialPoint, fidelity: f64) -> EvalOutput {
        (**self).evaluate(x, fidelity)
    }
}

impl<T: MultiFidelityBlackbox + ?Sized> MultiFidelityBlackbox for std::sync::Arc<T> {
    fn descriptor(&self) -> &BlackboxDescriptor {
        (**self).descriptor()
    }

    fn evaluate(&self, x: &TrialPoint, fidelity: f64) -> EvalOutput {
        (**self).evaluate(x, fidelity)
    }
}

/// Model time spent in blackbox calls. Only grows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VirtualClock {
    elapsed: f64,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Charges one sub-evaluation and returns it unchanged.
    pub fn charge(&mut self, out: EvalOutput) -> EvalOutput {
        self.advance(out.time);
        out
    }

    pub fn advance(&mut self, seconds: f64) {
        debug_assert!(seconds >= 0.0);
        self.elapsed += seconds.max(0.0);
    }
}
