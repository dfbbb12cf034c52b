//! End-to-end runs: sampling, assignment and controlled optimization, the
//! direct base case, run records and data profiles.

mod profile;

pub use profile::{
    data_profile, write_profile_csv, DataProfile, DataProfileSpec, ProfileCurve, ProfilePoint,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{
    check_assumptions, solve_assignment_with_cap, AssignmentInstance, AssignmentMatrix,
    AssumptionReport, DEFAULT_EPSILON, DEFAULT_SEARCH_CAP,
};
use crate::blackbox::{
    ExternalBlackbox, ExternalConfig, MultiFidelityBlackbox, SyntheticBlackbox, SyntheticSpec,
};
use crate::controller::FidelityController;
use crate::domain::{BoxBounds, FidelityLadder, TrialPoint};
use crate::error::{Error, Result};
use crate::problems;
use crate::sampling::{
    best_sample, centered_bounds, estimate_stats, evaluate_samples, latin_hypercube,
    lh_time_offset, FeasibilityStats, SampleSet, DEFAULT_SAMPLE_SIZE,
};
use crate::solver::{
    minimize, BarrierMode, DirectEvaluator, EvalRecord, HistoryPoint, Incumbent, IterationLog,
    SolverConfig, SolverResult, StopReason,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    InterPb,
    InterEb,
    Base,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::InterPb, Mode::InterEb, Mode::Base];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::InterPb => "inter_pb",
            Mode::InterEb => "inter_eb",
            Mode::Base => "base",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("unknown mode `{s}` (inter_pb, inter_eb, base)"))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSource {
    Builtin { name: String },
    Synthetic { spec: SyntheticSpec },
    External { config: ExternalConfig },
}

impl ProblemSource {
    pub fn builtin(name: &str) -> Self {
        ProblemSource::Builtin {
            name: name.to_string(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ProblemSource::Builtin { name } => name.clone(),
            ProblemSource::Synthetic { spec } => spec.name.clone(),
            ProblemSource::External { config } => config.command.clone(),
        }
    }

    /// Instantiates the blackbox and the problem's default sizing factor.
    pub fn resolve(&self) -> Result<(Box<dyn MultiFidelityBlackbox>, Option<f64>)> {
        Ok(match self {
            ProblemSource::Builtin { name } => {
                let p = problems::builtin(name)?;
                (Box::new(SyntheticBlackbox::new(p.spec)?), Some(p.rho))
            }
            ProblemSource::Synthetic { spec } => {
                (Box::new(SyntheticBlackbox::new(spec.clone())?), None)
            }
            ProblemSource::External { config } => {
                (Box::new(ExternalBlackbox::new(config.clone())), None)
            }
        })
    }
}

/// Solver parameters other than the barrier, budget and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshSettings {
    pub initial_mesh: f64,
    pub expand: f64,
    pub shrink: f64,
    pub min_mesh: f64,
}

impl Default for MeshSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        MeshSettings {
            initial_mesh: d.initial_mesh,
            expand: d.expand,
            shrink: d.shrink,
            min_mesh: d.min_mesh,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub mode: Mode,
    #[serde(default = "FidelityLadder::reference")]
    pub fidelities: FidelityLadder,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Sizing factor; the problem default, else 1, when absent.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default = "default_n_h")]
    pub n_h: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Solver seed.
    #[serde(default)]
    pub seed: u64,
    /// Sampling seed; the solver seed when absent.
    #[serde(default)]
    pub lh_seed: Option<u64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Optimization budget in virtual seconds, sampling excluded.
    pub budget: f64,
    #[serde(default)]
    pub max_evals: Option<usize>,
    #[serde(default)]
    pub force_top: bool,
    /// Barrier of the base case.
    #[serde(default = "default_base_barrier")]
    pub base_barrier: BarrierMode,
    #[serde(default = "default_search_cap")]
    pub search_cap: u64,
    #[serde(default)]
    pub mesh: MeshSettings,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_n_h() -> usize {
    DEFAULT_SAMPLE_SIZE
}

fn default_workers() -> usize {
    1
}

fn default_base_barrier() -> BarrierMode {
    BarrierMode::Pb
}

fn default_search_cap() -> u64 {
    DEFAULT_SEARCH_CAP as u64
}

impl RunConfig {
    pub fn new(problem: ProblemSource, mode: Mode, budget: f64) -> Self {
        RunConfig {
            problem,
            mode,
            fidelities: FidelityLadder::reference(),
            epsilon: DEFAULT_EPSILON,
            rho: None,
            n_h: DEFAULT_SAMPLE_SIZE,
            workers: 1,
            seed: 0,
            lh_seed: None,
            x0: None,
            budget,
            max_evals: None,
            force_top: false,
            base_barrier: BarrierMode::Pb,
            search_cap: DEFAULT_SEARCH_CAP as u64,
            mesh: MeshSettings::default(),
        }
    }

    pub fn lh_seed(&self) -> u64 {
        self.lh_seed.unwrap_or(self.seed)
    }

    pub fn barrier(&self) -> BarrierMode {
        match self.mode {
            Mode::InterPb => BarrierMode::Pb,
            Mode::InterEb => BarrierMode::Eb,
            Mode::Base => self.base_barrier,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            barrier: self.barrier(),
            max_time: Some(self.budget),
            max_evals: self.max_evals,
            initial_mesh: self.mesh.initial_mesh,
            expand: self.mesh.expand,
            shrink: self.mesh.shrink,
            min_mesh: self.mesh.min_mesh,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "budget must be positive, got {}",
                self.budget
            )));
        }
        if self.n_h == 0 || self.workers == 0 {
            return Err(Error::InvalidConfig(
                "n_h and workers must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        if let Some(rho) = self.rho {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::InvalidSizingFactor(rho));
            }
        }
        self.solver_config().validate()
    }
}

/// Everything a run produced. Times include the sampling offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub problem: String,
    pub mode: Mode,
    /// Sampling time charged before optimization.
    pub lh_offset: f64,
    pub x0: TrialPoint,
    pub stats: Option<FeasibilityStats>,
    pub assignment: Option<AssignmentMatrix>,
    pub expected_eval_time: Option<f64>,
    pub assumptions: Option<AssumptionReport>,
    pub evaluations: Vec<EvalRecord>,
    pub iterations: Vec<IterationLog>,
    /// `(time, best feasible f)` after every improvement.
    pub history: Vec<HistoryPoint>,
    pub best: Option<Incumbent>,
    /// First feasible value confirmed at full fidelity.
    pub f0: Option<f64>,
    /// Optimization time, sampling excluded.
    pub consumed_time: f64,
    pub stop: StopReason,
    pub diagnostic: Option<String>,
}

impl RunRecord {
    /// Problem instance shared by runs that only differ by mode.
    pub fn instance_key(&self) -> String {
        format!(
            "{}/seed{}/lh{}",
            self.problem,
            self.config.seed,
            self.config.lh_seed()
        )
    }

    pub fn final_time(&self) -> f64 {
        self.lh_offset + self.consumed_time
    }

    /// First time at which the best feasible value is at most `target`.
    pub fn time_to_reach(&self, target: f64) -> Option<f64> {
        self.history.iter().find(|h| h.f <= target).map(|h| h.time)
    }

    fn from_result(cfg: &RunConfig, offset: f64, x0: TrialPoint, res: SolverResult) -> Self {
        let shift = |t: f64| t + offset;
        let evaluations = res
            .evaluations
            .into_iter()
            .map(|mut e| {
                e.time = shift(e.time);
                e
            })
            .collect();
        let iterations = res
            .iterations
            .into_iter()
            .map(|mut it| {
                it.time = shift(it.time);
                it
            })
            .collect();
        let history: Vec<HistoryPoint> = res
            .history
            .into_iter()
            .map(|h| HistoryPoint {
                time: shift(h.time),
                f: h.f,
            })
            .collect();
        RunRecord {
            config: cfg.clone(),
            problem: cfg.problem.name(),
            mode: cfg.mode,
            lh_offset: offset,
            x0,
            stats: None,
            assignment: None,
            expected_eval_time: None,
            assumptions: None,
            f0: history.first().map(|h| h.f),
            evaluations,
            iterations,
            history,
            best: res.best,
            consumed_time: res.consumed_time,
            stop: res.stop,
            diagnostic: res.diagnostic,
        }
    }
}

fn check_x0(x0: &[f64], bb: &dyn MultiFidelityBlackbox) -> Result<TrialPoint> {
    let bounds = &bb.descriptor().bounds;
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
    Ok(TrialPoint::new(x0.to_vec()))
}

/// Runs the configured mode.
pub fn run(cfg: &RunConfig) -> Result<RunRecord> {
    match cfg.mode {
        Mode::Base => run_base(cfg),
        Mode::InterPb | Mode::InterEb => run_fico(cfg),
    }
}

/// Latin hypercube sample of a run and what is estimated from it.
#[derive(Clone, Debug)]
pub struct SamplingOutcome {
    pub region: BoxBounds,
    pub samples: SampleSet,
    pub stats: FeasibilityStats,
    /// Sampling time charged to the run, spread over the workers.
    pub offset: f64,
}

/// Samples the box centered on `x0` when one is configured, the whole box
/// otherwise, at every fidelity of the ladder.
pub fn sample_problem(
    cfg: &RunConfig,
    bb: &dyn MultiFidelityBlackbox,
    default_rho: Option<f64>,
) -> Result<SamplingOutcome> {
    let desc = bb.descriptor();
    let region = match cfg.x0.as_deref() {
        Some(x) => centered_bounds(
            &check_x0(x, bb)?,
            &desc.bounds,
            cfg.rho.or(default_rho).unwrap_or(1.0),
        )?,
        None => desc.bounds.clone(),
    };
    let points = latin_hypercube(&region, cfg.n_h, cfg.lh_seed());
    let samples = evaluate_samples(bb, points, &cfg.fidelities);
    let stats = estimate_stats(&samples, &cfg.fidelities, &desc.constraints)?;
    let offset = lh_time_offset(&samples, cfg.workers);
    Ok(SamplingOutcome {
        region,
        samples,
        stats,
        offset,
    })
}

/// Sampling, assignment, then optimization through the fidelity controller.
pub fn run_fico(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let (bb, default_rho) = cfg.problem.resolve()?;
    let bb: &dyn MultiFidelityBlackbox = bb.as_ref();
    let desc = bb.descriptor();
    let SamplingOutcome {
        samples,
        stats,
        offset,
        ..
    } = sample_problem(cfg, bb, default_rho)?;
    let x0 = match cfg.x0.as_deref() {
        Some(x) => check_x0(x, bb)?,
        None => samples.points[best_sample(&samples).expect("sample is not empty")].clone(),
    };

    let inst = AssignmentInstance::from_stats(&stats, cfg.epsilon, cfg.force_top)?;
    let sol = solve_assignment_with_cap(&inst, u128::from(cfg.search_cap))?;
    let mut ctl = FidelityController::new(bb, sol.matrix.clone(), cfg.fidelities.clone())?;
    let res = minimize(&mut ctl, &x0, &desc.bounds, &cfg.solver_config())?;

    let mut record = RunRecord::from_result(cfg, offset, x0, res);
    record.assumptions = Some(check_assumptions(&inst));
    record.stats = Some(stats);
    record.assignment = Some(sol.matrix);
    record.expected_eval_time = Some(sol.expected_time);
    Ok(record)
}

/// Optimization at full fidelity only. Without `x0`, the same Latin
/// hypercube as [`run_fico`] is evaluated at fidelity 1 to pick one.
pub fn run_base(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let (bb, _) = cfg.problem.resolve()?;
    let bb: &dyn MultiFidelityBlackbox = bb.as_ref();
    let desc = bb.descriptor();
    let (x0, offset) = match cfg.x0.as_deref() {
        Some(x) => (check_x0(x, bb)?, 0.0),
        None => {
            let top = FidelityLadder::top_only();
            let points = latin_hypercube(&desc.bounds, cfg.n_h, cfg.lh_seed());
            let samples = evaluate_samples(bb, points, &top);
            let k = best_sample(&samples).expect("sample is not empty");
            (
                samples.points[k].clone(),
                lh_time_offset(&samples, cfg.workers),
            )
        }
    };
    let mut ev = DirectEvaluator::new(bb);
    let res = minimize(&mut ev, &x0, &desc.bounds, &cfg.solver_config())?;
    Ok(RunRecord::from_result(cfg, offset, x0, res))
}

/// Runs every configuration concurrently. Results keep the input order.
pub fn run_batch(configs: &[RunConfig]) -> Vec<Result<RunRecord>> {
    configs.par_iter().map(run).collect()
}
