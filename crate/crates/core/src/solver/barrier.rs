//! Incumbent bookkeeping of the extreme and progressive barriers.

use serde::{Deserialize, Serialize};

use crate::domain::{is_feasible, ExtReal, TrialPoint};

/// An evaluated point as seen by a barrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub x: TrialPoint,
    pub f: ExtReal,
    pub h: ExtReal,
}

impl Incumbent {
    pub fn is_feasible(&self) -> bool {
        self.h == ExtReal::ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierState {
    /// Best feasible point, lowest `f`.
    pub feasible: Option<Incumbent>,
    /// Infeasible incumbent. Under the extreme barrier this is the lowest-`h`
    /// point of the feasibility phase.
    pub infeasible: Option<Incumbent>,
    pub h_max: ExtReal,
    /// Nondominated infeasible points with `h <= h_max`, by increasing `h`.
    #[serde(default)]
    pub filter: Vec<Incumbent>,
}

impl Default for BarrierState {
    fn default() -> Self {
        BarrierState {
            feasible: None,
            infeasible: None,
            h_max: ExtReal::INFINITY,
            filter: Vec::new(),
        }
    }
}

impl BarrierState {
    /// Poll center: the feasible incumbent when there is one.
    pub fn primary(&self) -> Option<&Incumbent> {
        self.feasible.as_ref().or(self.infeasible.as_ref())
    }

    pub fn secondary(&self) -> Option<&Incumbent> {
        self.feasible.as_ref().and(self.infeasible.as_ref())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub feasible_improved: bool,
    pub infeasible_improved: bool,
}

impl StepOutcome {
    pub fn success(self) -> bool {
        self.feasible_improved || self.infeasible_improved
    }
}

/// `f_Omega`: the objective on feasible points, `+inf` elsewhere.
pub fn eb_filter(f: ExtReal, c: &[ExtReal]) -> ExtReal {
    if is_feasible(c) {
        f
    } else {
        ExtReal::INFINITY
    }
}

/// Extreme barrier update. Before the first feasible point the barrier
/// minimizes `h`; afterwards it minimizes `f_Omega`.
pub fn eb_step(cand: &Incumbent, state: &BarrierState) -> (BarrierState, StepOutcome) {
    let mut next = state.clone();
    let mut outcome = StepOutcome::default();
    match &state.feasible {
        Some(best) => {
            if cand.is_feasible() && cand.f < best.f {
                next.feasible = Some(cand.clone());
                outcome.feasible_improved = true;
            }
        }
        None if cand.is_feasible() => {
            next.feasible = Some(cand.clone());
            outcome.feasible_improved = true;
        }
        None => {
            let better = match &state.infeasible {
                Some(inc) => cand.h < inc.h,
                None => cand.h.is_finite(),
            };
            if better {
                next.infeasible = Some(cand.clone());
                outcome.infeasible_improved = true;
            }
        }
    }
    (next, outcome)
}

/// Progressive barrier update over one batch of candidates.
///
/// Candidates with `h > h_max` are rejected. The feasible incumbent is the
/// lowest `f` among feasible points. Infeasible points enter a filter of
/// mutually nondominated `(h, f)` pairs; dominated points never become
/// incumbents. When a candidate dominates the infeasible incumbent, it becomes
/// the lowest-`f` filter point and `h_max` drops to its `h`. When a candidate
/// only lowers `h`, `h_max` drops to the largest filter `h` below the
/// incumbent's and the incumbent moves to the lowest `f` under that threshold.
pub fn pb_step(candidates: &[Incumbent], state: &BarrierState) -> (BarrierState, StepOutcome) {
    let mut next = state.clone();
    let mut outcome = StepOutcome::default();
    let mut dominating = false;
    let mut improving = false;
    for cand in candidates {
        if cand.h > state.h_max {
            continue;
        }
        if cand.is_feasible() {
            if next.feasible.as_ref().is_none_or(|b| cand.f < b.f) {
                next.feasible = Some(cand.clone());
                outcome.feasible_improved = true;
            }
            continue;
        }
        if !cand.h.is_finite() || next.filter.iter().any(|v| v.h <= cand.h && v.f <= cand.f) {
            continue;
        }
        next.filter.retain(|v| !(cand.h <= v.h && cand.f <= v.f));
        next.filter.push(cand.clone());
        match &state.infeasible {
            Some(inc) if !(cand.h <= inc.h && cand.f <= inc.f) => improving = true,
            _ => dominating = true,
        }
    }
    next.filter.sort_by_key(|v| (v.h, v.f));

    if dominating {
        let inc = lowest_f(&next.filter).cloned();
        next.h_max = next
            .h_max
            .min(inc.as_ref().map_or(ExtReal::INFINITY, |i| i.h));
        next.infeasible = inc;
    } else if improving {
        let h_inf = state.infeasible.as_ref().map_or(ExtReal::INFINITY, |i| i.h);
        if let Some(h) = next.filter.iter().map(|v| v.h).filter(|&h| h < h_inf).max() {
            next.h_max = next.h_max.min(h);
        }
    }
    if dominating || improving {
        let h_max = next.h_max;
        next.filter.retain(|v| v.h <= h_max);
        next.infeasible = lowest_f(&next.filter).cloned();
        outcome.infeasible_improved = true;
    }
    (next, outcome)
}

fn lowest_f(filter: &[Incumbent]) -> Option<&Incumbent> {
    filter.iter().min_by(|a, b| (a.f, a.h).cmp(&(b.f, b.h)))
}
