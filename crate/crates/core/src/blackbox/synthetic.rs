//! Synthetic multi-fidelity problems with known ground truth.
//!
//! Each constraint is a true function `c_j(x)` plus a bias term
//! `b_j(phi) * d_j(x)` that vanishes from a per-constraint threshold fidelity
//! upward, so every fidelity at or above the threshold reproduces the
//! violated/satisfied indicator of the truth exactly.

use serde::{Deserialize, Serialize};

use super::{BlackboxDescriptor, MultiFidelityBlackbox};
use crate::domain::{BoxBounds, ConstraintMeta, EvalOutput, ExtReal, FidelityLadder, TrialPoint};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintShape {
    /// `w . x + offset`
    Linear { weights: Vec<f64>, offset: f64 },
    /// `|x - center|^2 - radius^2`: violated outside the ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// `radius^2 - |x - center|^2`: violated inside the ball.
    Hole { center: Vec<f64>, radius: f64 },
}

impl ConstraintShape {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            ConstraintShape::Linear { weights, offset } => {
                weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + offset
            }
            ConstraintShape::Ball { center, radius } => sq_dist(x, center) - radius * radius,
            ConstraintShape::Hole { center, radius } => radius * radius - sq_dist(x, center),
        }
    }

    fn dim(&self) -> usize {
        match self {
            ConstraintShape::Linear { weights, .. } => weights.len(),
            ConstraintShape::Ball { center, .. } | ConstraintShape::Hole { center, .. } => {
                center.len()
            }
        }
    }
}

fn sq_dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Spatial profile `d_j(x)` of the fidelity bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiasShape {
    Constant,
    /// `sin(frequency * sum(x) + phase)`
    Wave {
        frequency: f64,
        phase: f64,
    },
}

impl BiasShape {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            BiasShape::Constant => 1.0,
            BiasShape::Wave { frequency, phase } => {
                (frequency * x.iter().sum::<f64>() + phase).sin()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConstraint {
    pub shape: ConstraintShape,
    /// Fidelity from which the constraint value is exact. 0 means never biased.
    #[serde(default)]
    pub threshold: f64,
    /// Bias amplitude; `b_j(phi) = bias * (1 - phi / threshold)` below the threshold.
    #[serde(default)]
    pub bias: f64,
    #[serde(default = "default_bias_shape")]
    pub bias_shape: BiasShape,
}

fn default_bias_shape() -> BiasShape {
    BiasShape::Constant
}

impl SyntheticConstraint {
    pub fn exact(shape: ConstraintShape) -> Self {
        SyntheticConstraint {
            shape,
            threshold: 0.0,
            bias: 0.0,
            bias_shape: BiasShape::Constant,
        }
    }

    pub fn biased(
        shape: ConstraintShape,
        threshold: f64,
        bias: f64,
        bias_shape: BiasShape,
    ) -> Self {
        SyntheticConstraint {
            shape,
            threshold,
            bias,
            bias_shape,
        }
    }

    fn bias_at(&self, x: &[f64], fidelity: f64) -> f64 {
        if fidelity >= self.threshold || self.bias == 0.0 {
            0.0
        } else {
            self.bias * (1.0 - fidelity / self.threshold) * self.bias_shape.value(x)
        }
    }
}

/// `t(x, phi) = (t_min + (t_max - t_min) * phi^alpha) * (1 + x_weight * s(x))`
/// where `s(x)` is the mean normalized coordinate of `x` in the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub t_min: f64,
    pub t_max: f64,
    pub alpha: f64,
    #[serde(default)]
    pub x_weight: f64,
}

impl CostModel {
    pub fn new(t_min: f64, t_max: f64, alpha: f64) -> Self {
        CostModel {
            t_min,
            t_max,
            alpha,
            x_weight: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.t_min.is_finite()
            && self.t_max.is_finite()
            && self.t_min >= 0.0
            && self.t_max >= self.t_min
            && self.alpha >= 1.0
            && self.x_weight >= 0.0
            && self.x_weight.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "cost model must satisfy 0 <= t_min <= t_max, alpha >= 1, x_weight >= 0 \
                 (got {self:?})"
            )))
        }
    }

    pub fn time(&self, x: &[f64], bounds: &BoxBounds, fidelity: f64) -> f64 {
        let base = self.t_min + (self.t_max - self.t_min) * fidelity.powf(self.alpha);
        if self.x_weight == 0.0 {
            return base;
        }
        let n = x.len() as f64;
        let s: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = bounds.width(i);
                if w > 0.0 {
                    ((v - bounds.lower()[i]) / w).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / n;
        base * (1.0 + self.x_weight * s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    pub bounds: BoxBounds,
    /// Minimizer of the weighted quadratic objective `sum w_i (x_i - a_i)^2`.
    pub objective_target: Vec<f64>,
    pub objective_weights: Vec<f64>,
    /// `f(x, phi) = f(x) + objective_bias * (1 - phi)`.
    #[serde(default)]
    pub objective_bias: f64,
    pub constraints: Vec<SyntheticConstraint>,
    #[serde(default)]
    pub a_priori: Vec<usize>,
    pub cost: CostModel,
    /// Amplitude of deterministic pseudo-noise applied below each threshold.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Evaluations inside this ball fail (hidden constraint).
    #[serde(default)]
    pub failure_ball: Option<(Vec<f64>, f64)>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.bounds.dim();
        let dim_err = |what: &str| {
            Err(Error::InvalidSpec(format!(
                "{what} has the wrong dimension"
            )))
        };
        if self.objective_target.len() != n {
            return dim_err("objective_target");
        }
        if self.objective_weights.len() != n {
            return dim_err("objective_weights");
        }
        for (j, c) in self.constraints.iter().enumerate() {
            if c.shape.dim() != n {
                return dim_err(&format!("constraint {j}"));
            }
            if !(0.0..=1.0).contains(&c.threshold) {
                return Err(Error::InvalidSpec(format!(
                    "constraint {j}: threshold outside [0, 1]"
                )));
            }
            if c.bias != 0.0 && c.threshold == 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "constraint {j}: a bias needs a positive threshold"
                )));
            }
        }
        for &j in &self.a_priori {
            let Some(c) = self.constraints.get(j) else {
                return Err(Error::InvalidSpec(format!(
                    "a-priori index {j} out of range"
                )));
            };
            if c.bias != 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "a-priori constraint {j} cannot depend on fidelity"
                )));
            }
        }
        if let Some((center, radius)) = &self.failure_ball {
            if center.len() != n || *radius < 0.0 {
                return Err(Error::InvalidSpec("malformed failure ball".into()));
            }
        }
        if self.noise < 0.0 || !self.noise.is_finite() {
            return Err(Error::InvalidSpec(
                "noise must be a nonnegative amplitude".into(),
            ));
        }
        self.cost.validate()
    }

    pub fn meta(&self) -> ConstraintMeta {
        ConstraintMeta {
            count: self.constraints.len(),
            a_priori: self.a_priori.iter().copied().collect(),
        }
    }

    pub fn true_objective(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.objective_target)
            .zip(&self.objective_weights)
            .map(|((v, a), w)| w * (v - a) * (v - a))
            .sum()
    }

    pub fn objective(&self, x: &[f64], fidelity: f64) -> f64 {
        let mut f = self.true_objective(x) + self.objective_bias * (1.0 - fidelity);
        if fidelity < 1.0 && self.noise > 0.0 {
            f += self.noise * self.noise_at(x, fidelity, u64::MAX);
        }
        f
    }

    pub fn true_constraint(&self, j: usize, x: &[f64]) -> f64 {
        self.constraints[j].shape.value(x)
    }

    /// `c_j(x, phi)` for `phi > 0`, ignoring the a-priori short-circuit.
    pub fn constraint(&self, j: usize, x: &[f64], fidelity: f64) -> f64 {
        let con = &self.constraints[j];
        let mut v = con.shape.value(x) + con.bias_at(x, fidelity);
        if fidelity < con.threshold && self.noise > 0.0 {
            v += self.noise * self.noise_at(x, fidelity, j as u64);
        }
        v
    }

    pub fn cost(&self, x: &[f64], fidelity: f64) -> f64 {
        self.cost.time(x, &self.bounds, fidelity)
    }

    pub fn fails(&self, x: &[f64]) -> bool {
        self.failure_ball
            .as_ref()
            .is_some_and(|(c, r)| sq_dist(x, c) < r * r)
    }

    pub fn apriori_ok(&self, x: &[f64]) -> bool {
        self.a_priori
            .iter()
            .all(|&j| self.true_constraint(j, x) <= 0.0)
    }

    // Uniform in [-1, 1], a pure function of (seed, x, phi, channel).
    fn noise_at(&self, x: &[f64], fidelity: f64, channel: u64) -> f64 {
        let mut h = splitmix64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        for v in x {
            h = splitmix64(h ^ v.to_bits());
        }
        h = splitmix64(h ^ fidelity.to_bits());
        h = splitmix64(h ^ channel);
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SyntheticBlackbox {
    spec: SyntheticSpec,
    descriptor: BlackboxDescriptor,
}

impl SyntheticBlackbox {
    pub fn new(spec: SyntheticSpec) -> Result<Self> {
        spec.validate()?;
        let descriptor = BlackboxDescriptor {
            bounds: spec.bounds.clone(),
            constraints: spec.meta(),
            objective_varies_with_fidelity: spec.objective_bias != 0.0 || spec.noise > 0.0,
        };
        Ok(SyntheticBlackbox { spec, descriptor })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }
}

impl MultiFidelityBlackbox for SyntheticBlackbox {
    fn descriptor(&self) -> &BlackboxDescriptor {
        &self.descriptor
    }

    fn evaluate(&self, x: &TrialPoint, fidelity: f64) -> EvalOutput {
        let spec = &self.spec;
        let m = spec.constraints.len();
        if !spec.apriori_ok(x) || fidelity == 0.0 {
            let c = (0..m)
                .map(|j| {
                    if self.descriptor.constraints.is_a_priori(j) {
                        ExtReal::new(spec.true_constraint(j, x))
                    } else {
                        ExtReal::INFINITY
                    }
                })
                .collect();
            return EvalOutput::screened(
                ExtReal::INFINITY,
                c,
                &self.descriptor.constraints,
                fidelity,
                spec.cost(x, 0.0),
            );
        }
        let time = spec.cost(x, fidelity);
        if spec.fails(x) {
            return EvalOutput::failure(m, fidelity, time);
        }
        let c = (0..m)
            .map(|j| ExtReal::new(spec.constraint(j, x, fidelity)))
            .collect();
        EvalOutput::screened(
            ExtReal::new(spec.objective(x, fidelity)),
            c,
            &self.descriptor.constraints,
            fidelity,
            time,
        )
    }
}

/// Ground-truth `r`, `p` and `t` tables (rows: fidelities, columns: constraints).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueStats {
    pub r: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    /// Points of the region that pass the a-priori constraints.
    pub points: usize,
}

/// Grids with more cells than this fall back to a Halton sequence.
const MAX_GRID_POINTS: u64 = 4_000_000;
const HALTON_POINTS: usize = 1 << 20;

/// Dense-grid estimate of the representativity, violation and cost tables
/// over `region`, restricted to points passing the a-priori constraints.
///
/// Uses the cell centers of a `grid_density^n` grid, or a Halton sequence
/// when that grid would be too large. Works on the `SyntheticSpec` functions directly,
/// independently of [`MultiFidelityBlackbox::evaluate`].
pub fn true_stats(
    spec: &SyntheticSpec,
    ladder: &FidelityLadder,
    region: &BoxBounds,
    grid_density: usize,
) -> Result<TrueStats> {
    spec.validate()?;
    if grid_density < 2 {
        return Err(Error::InvalidConfig(
            "grid density must be at least 2".into(),
        ));
    }
    let n = region.dim();
    if n != spec.bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.bounds.dim(),
            got: n,
        });
    }
    let levels = ladder.len();
    let m = spec.constraints.len();
    let mut rep = vec![vec![0u64; m]; levels];
    let mut viol = vec![vec![0u64; m]; levels];
    let mut time = vec![0.0; levels];
    let mut count = 0u64;

    let mut visit = |x: &[f64]| {
        if !spec.apriori_ok(x) {
            return;
        }
        count += 1;
        let failed = spec.fails(x);
        for (i, &phi) in ladder.values().iter().enumerate() {
            time[i] += spec.cost(x, phi);
        }
        for j in 0..m {
            let a_priori = spec.a_priori.contains(&j);
            // violated indicator per level; None where the value is not computed
            let ind: Vec<Option<bool>> = ladder
                .values()
                .iter()
                .map(|&phi| {
                    if failed {
                        Some(true)
                    } else if phi == 0.0 && !a_priori {
                        None
                    } else {
                        Some(spec.constraint(j, x, phi) > 0.0)
                    }
                })
                .collect();
            let truth = ind[levels - 1];
            let mut all_match = true;
            for i in (0..levels).rev() {
                all_match &= ind[i] == truth;
                if all_match {
                    rep[i][j] += 1;
                }
                if ind[i] == Some(true) {
                    viol[i][j] += 1;
                }
            }
        }
    };

    let cells = (grid_density as u64).checked_pow(n as u32);
    match cells {
        Some(total) if total <= MAX_GRID_POINTS => {
            let mut idx = vec![0usize; n];
            let mut x = vec![0.0; n];
            for _ in 0..total {
                for d in 0..n {
                    x[d] = region.lower()[d]
                        + (idx[d] as f64 + 0.5) / grid_density as f64 * region.width(d);
                }
                visit(&x);
                for d in 0..n {
                    idx[d] += 1;
                    if idx[d] < grid_density {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
        _ => {
            let primes = first_primes(n);
            let mut x = vec![0.0; n];
            for k in 1..=HALTON_POINTS {
                for d in 0..n {
                    x[d] =
                        region.lower()[d] + radical_inverse(k as u64, primes[d]) * region.width(d);
                }
                visit(&x);
            }
        }
    }

    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    let total = count as f64;
    let frac = |tab: Vec<Vec<u64>>| {
        tab.into_iter()
            .map(|row| row.into_iter().map(|k| k as f64 / total).collect())
            .collect()
    };
    Ok(TrueStats {
        r: frac(rep),
        p: frac(viol),
        t: time.into_iter().map(|s| s / total).collect(),
        points: count as usize,
    })
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut k = 2u64;
    while primes.len() < n {
        if primes.iter().all(|p| k % p != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}
