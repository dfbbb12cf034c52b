//! The fidelity controller: evaluates a point through increasing fidelities
//! and stops as soon as a constraint trusted at the current level is
//! violated.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentMatrix;
use crate::blackbox::{MultiFidelityBlackbox, VirtualClock};
use crate::domain::{is_feasible, EvalOutput, ExtReal, FidelityLadder, TrialPoint};
use crate::error::{Error, Result};
use crate::solver::{Evaluation, Evaluator};

/// Why a ladder walk stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interruption {
    pub fidelity: f64,
    /// Violated constraint, `None` when the blackbox failed.
    pub constraint: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalTrace {
    pub visited: Vec<f64>,
    pub outputs: Vec<EvalOutput>,
    pub interrupted_at: Option<Interruption>,
    pub safeguard_ran: bool,
    pub total_time: f64,
}

impl EvalTrace {
    /// The returned outputs come from fidelity 1.
    pub fn confirmed(&self) -> bool {
        self.outputs.last().is_some_and(|o| o.fidelity == 1.0)
    }
}

pub struct FidelityController<B> {
    bb: B,
    matrix: AssignmentMatrix,
    ladder: FidelityLadder,
    schedule: Vec<usize>,
    f_star: ExtReal,
    clock: VirtualClock,
}

impl<B: MultiFidelityBlackbox> FidelityController<B> {
    pub fn new(bb: B, matrix: AssignmentMatrix, ladder: FidelityLadder) -> Result<Self> {
        let meta = &bb.descriptor().constraints;
        if matrix.levels() != ladder.len() {
            return Err(Error::DimensionMismatch {
                expected: ladder.len(),
                got: matrix.levels(),
            });
        }
        if matrix.constraints() != meta.count {
            return Err(Error::DimensionMismatch {
                expected: meta.count,
                got: matrix.constraints(),
            });
        }
        let top = ladder.top_index();
        let mut levels: BTreeSet<usize> = matrix.assignments().iter().flatten().copied().collect();
        if ladder.has_zero() && !meta.a_priori.is_empty() {
            levels.insert(0);
        }
        if matrix.force_top() {
            levels.insert(top);
        }
        // the objective is never computed at fidelity 0
        if levels.last().is_none_or(|&i| ladder.get(i) == 0.0) {
            levels.insert(top);
        }
        Ok(FidelityController {
            bb,
            matrix,
            ladder,
            schedule: levels.into_iter().collect(),
            f_star: ExtReal::INFINITY,
            clock: VirtualClock::new(),
        })
    }

    /// Ladder indexes visited by a walk that is never interrupted.
    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn f_star(&self) -> ExtReal {
        self.f_star
    }

    pub fn clock(&self) -> &VirtualClock {
        &self.clock
    }

    pub fn matrix(&self) -> &AssignmentMatrix {
        &self.matrix
    }

    fn interruption(&self, level: usize, out: &EvalOutput) -> Option<Interruption> {
        let meta = &self.bb.descriptor().constraints;
        let at = |constraint| {
            Some(Interruption {
                fidelity: out.fidelity,
                constraint,
            })
        };
        if out.failed() {
            return at(None);
        }
        if out.apriori_violated() {
            let j = meta
                .a_priori
                .iter()
                .copied()
                .find(|&j| out.c[j] > ExtReal::ZERO);
            return at(j);
        }
        // every constraint trusted at this level or below is checked again
        self.matrix
            .assignments()
            .iter()
            .enumerate()
            .find(|&(j, row)| {
                row.is_some_and(|a| a <= level)
                    && out.is_computed(j, meta)
                    && out.c[j] > ExtReal::ZERO
            })
            .and_then(|(j, _)| at(Some(j)))
    }

    /// Walks the schedule for `x`. Returns the outputs of the last
    /// sub-evaluation and the trace of the walk.
    pub fn controlled_evaluate(&mut self, x: &TrialPoint) -> (ExtReal, Vec<ExtReal>, EvalTrace) {
        let start = self.clock.elapsed();
        let mut trace = EvalTrace {
            visited: Vec::with_capacity(self.schedule.len()),
            outputs: Vec::with_capacity(self.schedule.len()),
            interrupted_at: None,
            safeguard_ran: false,
            total_time: 0.0,
        };
        for k in 0..self.schedule.len() {
            let level = self.schedule[k];
            let phi = self.ladder.get(level);
            let out = self.clock.charge(self.bb.evaluate(x, phi));
            trace.visited.push(phi);
            trace.interrupted_at = self.interruption(level, &out);
            trace.outputs.push(out);
            if trace.interrupted_at.is_some() {
                break;
            }
        }

        let last = trace.outputs.last().expect("schedule is never empty");
        if trace.interrupted_at.is_none() && last.fidelity != 1.0 && last.f < self.f_star {
            let out = self.clock.charge(self.bb.evaluate(x, 1.0));
            trace.visited.push(1.0);
            trace.outputs.push(out);
            trace.safeguard_ran = true;
        }

        trace.total_time = self.clock.elapsed() - start;
        let last = trace.outputs.last().expect("at least one sub-evaluation");
        (last.f, last.c.clone(), trace)
    }

    /// Lowers `f*` when the outputs are feasible and come from fidelity 1.
    pub fn update_f_star(&mut self, f: ExtReal, c: &[ExtReal], trace: &EvalTrace) {
        if trace.confirmed() && is_feasible(c) && f < self.f_star {
            self.f_star = f;
        }
    }
}

impl<B: MultiFidelityBlackbox> Evaluator for FidelityController<B> {
    fn evaluate(&mut self, x: &TrialPoint) -> Evaluation {
        let (f, c, trace) = self.controlled_evaluate(x);
        self.update_f_star(f, &c, &trace);
        Evaluation {
            confirmed: trace.confirmed(),
            f,
            c,
            time: trace.total_time,
            visited: trace.visited,
            interrupted: trace.interrupted_at,
            safeguard: trace.safeguard_ran,
        }
    }
}
