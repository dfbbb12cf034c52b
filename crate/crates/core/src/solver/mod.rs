//! Coordinate-poll direct search on a mesh, with extreme or progressive
//! barrier constraint handling.
//!
//! Each iteration polls the `2n` points `x +- delta_i e_i` around the poll
//! center in a seeded random order, stopping at the first improvement. A
//! successful poll expands the mesh (capped at its initial size), a failed
//! one shrinks it. Under the progressive barrier the infeasible incumbent is
//! polled as well when the poll around the feasible one fails.

mod barrier;

pub use barrier::{eb_filter, eb_step, pb_step, BarrierState, Incumbent, StepOutcome};

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blackbox::{MultiFidelityBlackbox, VirtualClock};
use crate::controller::Interruption;
use crate::domain::{violation_h, BoxBounds, ExtReal, TrialPoint};
use crate::error::{Error, Result};

/// The result of evaluating one point, as handed to the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub f: ExtReal,
    pub c: Vec<ExtReal>,
    /// Blackbox time charged for this point.
    pub time: f64,
    /// Outputs come from the top fidelity.
    pub confirmed: bool,
    pub visited: Vec<f64>,
    pub interrupted: Option<Interruption>,
    pub safeguard: bool,
}

/// Anything that maps a point to outputs and a charged time.
pub trait Evaluator {
    fn evaluate(&mut self, x: &TrialPoint) -> Evaluation;
}

impl<E: Evaluator + ?Sized> Evaluator for &mut E {
    fn evaluate(&mut self, x: &TrialPoint) -> Evaluation {
        (**self).evaluate(x)
    }
}

/// Evaluates every point at one fixed fidelity, 1 by default.
pub struct DirectEvaluator<B> {
    bb: B,
    fidelity: f64,
    clock: VirtualClock,
}

impl<B: MultiFidelityBlackbox> DirectEvaluator<B> {
    pub fn new(bb: B) -> Self {
        Self::at_fidelity(bb, 1.0)
    }

    pub fn at_fidelity(bb: B, fidelity: f64) -> Self {
        DirectEvaluator {
            bb,
            fidelity,
            clock: VirtualClock::new(),
        }
    }

    pub fn clock(&self) -> &VirtualClock {
        &self.clock
    }
}

impl<B: MultiFidelityBlackbox> Evaluator for DirectEvaluator<B> {
    fn evaluate(&mut self, x: &TrialPoint) -> Evaluation {
        let out = self.clock.charge(self.bb.evaluate(x, self.fidelity));
        Evaluation {
            f: out.f,
            c: out.c,
            time: out.time,
            confirmed: self.fidelity == 1.0,
            visited: vec![self.fidelity],
            interrupted: None,
            safeguard: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierMode {
    Eb,
    Pb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub barrier: BarrierMode,
    /// Budget in virtual seconds.
    pub max_time: Option<f64>,
    pub max_evals: Option<usize>,
    /// Initial mesh size as a fraction of each bound width.
    pub initial_mesh: f64,
    pub expand: f64,
    pub shrink: f64,
    /// Stop once the mesh fraction drops below this.
    pub min_mesh: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            barrier: BarrierMode::Pb,
            max_time: None,
            max_evals: Some(1000),
            initial_mesh: 0.1,
            expand: 2.0,
            shrink: 0.5,
            min_mesh: 1e-7,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        match (self.max_time, self.max_evals) {
            (None, None) => return bad("a time or evaluation budget is required"),
            (Some(t), _) if !(t > 0.0) => return bad("time budget must be positive"),
            (_, Some(0)) => return bad("evaluation budget must be positive"),
            _ => {}
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if !(self.expand >= 1.0) {
            return bad("expand factor must be at least 1");
        }
        if !(self.initial_mesh > 0.0 && self.initial_mesh <= 1.0) {
            return bad("initial mesh fraction must lie in (0, 1]");
        }
        if !(self.min_mesh >= 0.0) {
            return bad("minimum mesh must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    MaxEvaluations,
    MinMesh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub index: usize,
    pub x: TrialPoint,
    pub f: ExtReal,
    pub h: ExtReal,
    /// Time charged for this point.
    pub cost: f64,
    /// Cumulative time at completion.
    pub time: f64,
    pub confirmed: bool,
    pub visited: Vec<f64>,
    pub interrupted: Option<Interruption>,
    pub safeguard: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub mesh: f64,
    pub incumbent_f: ExtReal,
    pub incumbent_h: ExtReal,
    pub h_max: ExtReal,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub time: f64,
    pub f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    /// Best point that was feasible with top-fidelity outputs.
    pub best: Option<Incumbent>,
    pub evaluations: Vec<EvalRecord>,
    pub iterations: Vec<IterationLog>,
    /// Improvements of `best`, `(time, f)`.
    pub history: Vec<HistoryPoint>,
    pub stop: StopReason,
    pub consumed_time: f64,
    pub barrier: BarrierState,
    pub diagnostic: Option<String>,
}

impl SolverResult {
    pub fn points(&self) -> impl Iterator<Item = &TrialPoint> {
        self.evaluations.iter().map(|e| &e.x)
    }
}

/// Writes the iteration log as CSV.
pub fn write_iteration_csv<W: Write>(log: &[IterationLog], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "iteration",
        "mesh_size",
        "incumbent_f",
        "incumbent_h",
        "h_max",
        "time",
    ])?;
    for it in log {
        w.write_record([
            it.iteration.to_string(),
            it.mesh.to_string(),
            it.incumbent_f.to_string(),
            it.incumbent_h.to_string(),
            it.h_max.to_string(),
            it.time.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct Run<'a, E: ?Sized> {
    ev: &'a mut E,
    bounds: &'a BoxBounds,
    cfg: &'a SolverConfig,
    spent: f64,
    evaluations: Vec<EvalRecord>,
    seen: HashSet<Vec<u64>>,
    best: Option<Incumbent>,
    history: Vec<HistoryPoint>,
    stop: Option<StopReason>,
    state: BarrierState,
}

impl<E: Evaluator + ?Sized> Run<'_, E> {
    /// Evaluates `x` unless the budget is exhausted. Returns whether the
    /// barrier reported a success.
    fn visit(&mut self, x: TrialPoint) -> bool {
        if self
            .cfg
            .max_evals
            .is_some_and(|k| self.evaluations.len() >= k)
        {
            self.stop = Some(StopReason::MaxEvaluations);
            return false;
        }
        let ev = self.ev.evaluate(&x);
        if self.cfg.max_time.is_some_and(|t| self.spent + ev.time > t) {
            self.stop = Some(StopReason::Budget);
            return false;
        }
        self.spent += ev.time;
        self.seen.insert(x.key());
        let cand = Incumbent {
            h: violation_h(&ev.c, self.bounds.contains(&x)),
            f: ev.f,
            x,
        };
        if ev.confirmed && cand.is_feasible() && self.best.as_ref().is_none_or(|b| cand.f < b.f) {
            self.best = Some(cand.clone());
            self.history.push(HistoryPoint {
                time: self.spent,
                f: cand.f.value(),
            });
        }
        let (next, outcome) = match self.cfg.barrier {
            BarrierMode::Eb => eb_step(&cand, &self.state),
            BarrierMode::Pb => pb_step(std::slice::from_ref(&cand), &self.state),
        };
        self.state = next;
        self.evaluations.push(EvalRecord {
            index: self.evaluations.len(),
            x: cand.x,
            f: cand.f,
            h: cand.h,
            cost: ev.time,
            time: self.spent,
            confirmed: ev.confirmed,
            visited: ev.visited,
            interrupted: ev.interrupted,
            safeguard: ev.safeguard,
        });
        outcome.success()
    }

    fn poll(&mut self, center: &TrialPoint, mesh: f64, dirs: &[(usize, f64)]) -> bool {
        for &(i, sign) in dirs {
            let mut y = center.to_vec();
            y[i] += sign * mesh * self.bounds.width(i);
            self.bounds.clamp(&mut y);
            let y = TrialPoint::new(y);
            if self.seen.contains(&y.key()) {
                continue;
            }
            if self.visit(y) {
                return true;
            }
            if self.stop.is_some() {
                return false;
            }
        }
        false
    }

    fn log(&self, iteration: usize, mesh: f64) -> IterationLog {
        let inc = self.state.primary();
        IterationLog {
            iteration,
            mesh,
            incumbent_f: inc.map_or(ExtReal::INFINITY, |i| i.f),
            incumbent_h: inc.map_or(ExtReal::INFINITY, |i| i.h),
            h_max: self.state.h_max,
            time: self.spent,
        }
    }
}

/// Runs the direct search from `x0` until the budget is exhausted or the
/// mesh falls below its minimum.
pub fn minimize<E: Evaluator + ?Sized>(
    ev: &mut E,
    x0: &TrialPoint,
    bounds: &BoxBounds,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    if x0.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: x0.len(),
        });
    }
    if let Some(index) =
        (0..x0.len()).find(|&i| !(bounds.lower()[i]..=bounds.upper()[i]).contains(&x0[i]))
    {
        return Err(Error::PointOutsideBounds { index });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dirs: Vec<(usize, f64)> = (0..bounds.dim())
        .filter(|&i| bounds.width(i) > 0.0)
        .flat_map(|i| [(i, 1.0), (i, -1.0)])
        .collect();

    let mut run = Run {
        ev,
        bounds,
        cfg,
        spent: 0.0,
        evaluations: Vec::new(),
        seen: HashSet::new(),
        best: None,
        history: Vec::new(),
        stop: None,
        state: BarrierState::default(),
    };
    let mut mesh = cfg.initial_mesh;
    let mut iterations = Vec::new();
    run.visit(x0.clone());
    iterations.push(run.log(0, mesh));

    let mut iteration = 0;
    while run.stop.is_none() {
        if mesh < cfg.min_mesh || dirs.is_empty() {
            run.stop = Some(StopReason::MinMesh);
            break;
        }
        iteration += 1;
        let primary = run
            .state
            .primary()
            .map_or_else(|| x0.clone(), |i| i.x.clone());
        let secondary = match cfg.barrier {
            BarrierMode::Pb => run.state.secondary().map(|i| i.x.clone()),
            BarrierMode::Eb => None,
        };
        dirs.shuffle(&mut rng);
        let mut success = run.poll(&primary, mesh, &dirs);
        if let (false, None, Some(sec)) = (success, run.stop, secondary) {
            dirs.shuffle(&mut rng);
            success = run.poll(&sec, mesh, &dirs);
        }
        mesh = if success {
            (mesh * cfg.expand).min(cfg.initial_mesh)
        } else {
            mesh * cfg.shrink
        };
        iterations.push(run.log(iteration, mesh));
    }

    let diagnostic = run
        .best
        .is_none()
        .then(|| "no feasible point was confirmed at full fidelity".to_string());
    Ok(SolverResult {
        best: run.best,
        evaluations: run.evaluations,
        iterations,
        history: run.history,
        stop: run.stop.expect("loop exits with a reason"),
        consumed_time: run.spent,
        barrier: run.state,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        target: Vec<f64>,
        calls: usize,
    }

    impl Evaluator for Quadratic {
        fn evaluate(&mut self, x: &TrialPoint) -> Evaluation {
            self.calls += 1;
            let f = x
                .iter()
                .zip(&self.target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Evaluation {
                f: ExtReal::new(f),
                c: vec![],
                time: 1.0,
                confirmed: true,
                visited: vec![1.0],
                interrupted: None,
                safeguard: false,
            }
        }
    }

    // c(x) = 0.5 - x_0 <= 0
    struct HalfPlane;

    impl Evaluator for HalfPlane {
        fn evaluate(&mut self, x: &TrialPoint) -> Evaluation {
            Evaluation {
                f: ExtReal::new(x[0] * x[0] + x[1] * x[1]),
                c: vec![ExtReal::new(0.5 - x[0])],
                time: 0.5,
                confirmed: true,
                visited: vec![1.0],
                interrupted: None,
                safeguard: false,
            }
        }
    }

    fn cfg(barrier: BarrierMode, evals: usize) -> SolverConfig {
        SolverConfig {
            barrier,
            max_evals: Some(evals),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn converges_on_box_constrained_quadratic() {
        // minimizer clipped to the box: (1, 0.25, -1)
        let bounds = BoxBounds::uniform(3, -1.0, 1.0).unwrap();
        let mut q = Quadratic {
            target: vec![2.0, 0.25, -3.0],
            calls: 0,
        };
        let res = minimize(
            &mut q,
            &TrialPoint::new(vec![0.0; 3]),
            &bounds,
            &cfg(BarrierMode::Eb, 2000),
        )
        .unwrap();
        let best = res.best.unwrap();
        let optimum = 1.0 + 4.0;
        assert!((best.f.value() - optimum).abs() < 1e-3, "{}", best.f);
        assert_eq!(q.calls, res.evaluations.len());
    }

    #[test]
    fn both_barriers_reach_the_constrained_optimum() {
        let bounds = BoxBounds::uniform(2, -2.0, 2.0).unwrap();
        for mode in [BarrierMode::Eb, BarrierMode::Pb] {
            let res = minimize(
                &mut HalfPlane,
                &TrialPoint::new(vec![-1.0, -1.0]),
                &bounds,
                &cfg(mode, 3000),
            )
            .unwrap();
            let best = res.best.expect("feasible point found");
            assert!((best.f.value() - 0.25).abs() < 1e-3, "{mode:?}: {}", best.f);
        }
    }

    #[test]
    fn pb_threshold_is_monotone_in_the_log() {
        let bounds = BoxBounds::uniform(2, -2.0, 2.0).unwrap();
        let res = minimize(
            &mut HalfPlane,
            &TrialPoint::new(vec![-2.0, -2.0]),
            &bounds,
            &cfg(BarrierMode::Pb, 500),
        )
        .unwrap();
        assert!(res.iterations.windows(2).all(|w| w[1].h_max <= w[0].h_max));
        assert!(res.iterations.last().unwrap().h_max < ExtReal::INFINITY);
    }

    #[test]
    fn time_budget_stops_before_overrun() {
        let bounds = BoxBounds::uniform(2, -1.0, 1.0).unwrap();
        let mut q = Quadratic {
            target: vec![0.3, 0.3],
            calls: 0,
        };
        let c = SolverConfig {
            max_time: Some(10.5),
            max_evals: None,
            ..SolverConfig::default()
        };
        let res = minimize(&mut q, &TrialPoint::new(vec![-1.0, -1.0]), &bounds, &c).unwrap();
        assert_eq!(res.stop, StopReason::Budget);
        assert_eq!(res.evaluations.len(), 10);
        assert_eq!(res.consumed_time, 10.0);
        // the 11th evaluation ran but overran the budget
        assert_eq!(q.calls, 11);
    }

    #[test]
    fn runs_are_reproducible_and_seed_dependent() {
        let bounds = BoxBounds::uniform(4, 0.0, 1.0).unwrap();
        let run = |seed| {
            let mut q = Quadratic {
                target: vec![0.1, 0.9, 0.4, 0.6],
                calls: 0,
            };
            let c = SolverConfig {
                seed,
                ..cfg(BarrierMode::Pb, 200)
            };
            minimize(&mut q, &TrialPoint::new(vec![0.5; 4]), &bounds, &c).unwrap()
        };
        assert_eq!(run(3), run(3));
        let a: Vec<_> = run(3).points().cloned().collect();
        let b: Vec<_> = run(4).points().cloned().collect();
        assert_ne!(a, b);
    }

    #[test]
    fn candidates_stay_in_the_box() {
        let bounds = BoxBounds::new(vec![0.0, 0.0], vec![1.0, 0.5]).unwrap();
        let mut q = Quadratic {
            target: vec![5.0, -5.0],
            calls: 0,
        };
        let res = minimize(
            &mut q,
            &TrialPoint::new(vec![0.9, 0.1]),
            &bounds,
            &cfg(BarrierMode::Eb, 300),
        )
        .unwrap();
        assert!(res.points().all(|x| bounds.contains(x)));
        assert_eq!(res.best.unwrap().x.to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bounds = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        let mut q = Quadratic {
            target: vec![0.0; 2],
            calls: 0,
        };
        let c = cfg(BarrierMode::Eb, 10);
        assert!(minimize(&mut q, &TrialPoint::new(vec![2.0, 0.0]), &bounds, &c).is_err());
        assert!(minimize(&mut q, &TrialPoint::new(vec![0.0]), &bounds, &c).is_err());
        let c = SolverConfig { shrink: 1.0, ..c };
        assert!(minimize(&mut q, &TrialPoint::new(vec![0.0, 0.0]), &bounds, &c).is_err());
    }

    #[test]
    fn no_feasible_point_yields_diagnostic() {
        struct Never;
        impl Evaluator for Never {
            fn evaluate(&mut self, _: &TrialPoint) -> Evaluation {
                Evaluation {
                    f: ExtReal::new(0.0),
                    c: vec![ExtReal::new(1.0)],
                    time: 1.0,
                    confirmed: true,
                    visited: vec![1.0],
                    interrupted: None,
                    safeguard: false,
                }
            }
        }
        let bounds = BoxBounds::uniform(1, 0.0, 1.0).unwrap();
        let res = minimize(
            &mut Never,
            &TrialPoint::new(vec![0.5]),
            &bounds,
            &cfg(BarrierMode::Eb, 50),
        )
        .unwrap();
        assert!(res.best.is_none());
        assert!(res.diagnostic.is_some());
    }

    #[test]
    fn iteration_csv_has_header() {
        let log = vec![IterationLog {
            iteration: 0,
            mesh: 0.1,
            incumbent_f: ExtReal::new(1.5),
            incumbent_h: ExtReal::ZERO,
            h_max: ExtReal::INFINITY,
            time: 2.0,
        }];
        let mut buf = Vec::new();
        write_iteration_csv(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "iteration,mesh_size,incumbent_f,incumbent_h,h_max,time\n0,0.1,1.5,0,inf,2\n"
        );
    }
}
