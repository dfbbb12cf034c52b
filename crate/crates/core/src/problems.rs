//! Built-in synthetic problems.
//!
//! | name               | n  | m  | a priori | purpose                                          |
//! |--------------------|----|----|----------|--------------------------------------------------|
//! | `gated`            | 4  | 3  | 1        | small feasible ball, exact at every fidelity > 0 |
//! | `unrepresentative` | 3  | 3  | 1        | no low fidelity predicts any constraint          |
//! | `solar2_like`      | 14 | 13 | 5        | mixed thresholds, noise and hidden failures      |
//! | `mixed2d`          | 2  | 4  | 1        | dense-grid ground truth for the estimators       |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blackbox::{BiasShape, ConstraintShape, CostModel, SyntheticConstraint, SyntheticSpec};
use crate::domain::BoxBounds;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 4] = ["gated", "unrepresentative", "solar2_like", "mixed2d"];

#[derive(Clone, Debug, PartialEq)]
pub struct BuiltinProblem {
    pub spec: SyntheticSpec,
    /// Default sizing factor of the sampled region around `x0`.
    pub rho: f64,
    /// A feasible starting point.
    pub x0: Vec<f64>,
}

pub fn builtin(name: &str) -> Result<BuiltinProblem> {
    match name {
        "gated" => Ok(gated()),
        "unrepresentative" => Ok(unrepresentative()),
        "solar2_like" => Ok(solar2_like()),
        "mixed2d" => Ok(mixed2d()),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

fn linear(weights: Vec<f64>, offset: f64) -> ConstraintShape {
    ConstraintShape::Linear { weights, offset }
}

fn wave(frequency: f64, phase: f64) -> BiasShape {
    BiasShape::Wave { frequency, phase }
}

/// Feasible region: a ball of radius 0.3 in `[0, 1]^4`, about 4% of the box.
/// The ball constraint is exact from the first positive fidelity on, a cheap
/// gate compared with the top fidelity.
pub fn gated() -> BuiltinProblem {
    let n = 4;
    let spec = SyntheticSpec {
        name: "gated".into(),
        bounds: BoxBounds::uniform(n, 0.0, 1.0).expect("valid box"),
        objective_target: vec![0.95, 0.9, 0.85, 0.1],
        objective_weights: vec![1.0, 1.0, 1.0, 1.0],
        objective_bias: 0.0,
        constraints: vec![
            SyntheticConstraint::exact(linear(vec![1.0, 1.0, 0.0, 0.0], -1.8)),
            SyntheticConstraint::exact(ConstraintShape::Ball {
                center: vec![0.5; n],
                radius: 0.3,
            }),
            SyntheticConstraint::biased(
                linear(vec![0.0, 0.0, 1.0, -1.0], -0.45),
                0.5,
                0.3,
                wave(6.0, 0.0),
            ),
        ],
        a_priori: vec![0],
        cost: CostModel::new(0.01, 1.0, 1.0),
        noise: 0.0,
        seed: 11,
        failure_ball: None,
    };
    BuiltinProblem {
        spec,
        rho: 0.25,
        x0: vec![0.5; n],
    }
}

/// Every fidelity below 1 misjudges the constraints and the objective is
/// biased, so the top fidelity is the only usable one. Fidelity 0 costs
/// nothing.
pub fn unrepresentative() -> BuiltinProblem {
    let n = 3;
    let spec = SyntheticSpec {
        name: "unrepresentative".into(),
        bounds: BoxBounds::uniform(n, -1.0, 1.0).expect("valid box"),
        objective_target: vec![1.0, 1.0, -1.0],
        objective_weights: vec![1.0, 2.0, 1.0],
        objective_bias: 0.5,
        constraints: vec![
            SyntheticConstraint::exact(linear(vec![1.0, 1.0, 1.0], -2.0)),
            SyntheticConstraint::biased(
                ConstraintShape::Ball {
                    center: vec![0.0; n],
                    radius: 0.9,
                },
                1.0,
                10.0,
                BiasShape::Constant,
            ),
            SyntheticConstraint::biased(
                linear(vec![1.0, -1.0, 0.0], -0.5),
                1.0,
                10.0,
                wave(5.0, 1.0),
            ),
        ],
        a_priori: vec![0],
        cost: CostModel::new(0.0, 1.0, 2.0),
        noise: 0.0,
        seed: 3,
        failure_ball: None,
    };
    BuiltinProblem {
        spec,
        rho: 0.25,
        x0: vec![0.0; n],
    }
}

/// 14 variables, 13 constraints of which 5 a priori, with fidelity noise,
/// an x-dependent cost and a failure region. Constraints are satisfied at
/// the center of the box.
pub fn solar2_like() -> BuiltinProblem {
    let n = 14;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let center = vec![0.5; n];
    let mut constraints = Vec::new();

    // a priori: sparse linear cuts with slack 0.3 to 0.6 at the center
    for k in 0..5 {
        let mut w = vec![0.0; n];
        for i in [k, k + 5, (k + 9) % n] {
            w[i] = rng.random_range(0.5..1.5);
        }
        let at_center: f64 = w.iter().map(|v| v * 0.5).sum();
        constraints.push(SyntheticConstraint::exact(linear(
            w,
            -at_center - rng.random_range(0.3..0.6),
        )));
    }
    let thresholds = [0.001, 0.01, 0.05, 0.2, 0.4, 0.7, 0.9, 1.0];
    for (k, &threshold) in thresholds.iter().enumerate() {
        let shape = if k % 3 == 0 {
            let c: Vec<f64> = center
                .iter()
                .map(|v| v + rng.random_range(-0.1..0.1))
                .collect();
            let r = rng.random_range(1.0..1.3);
            ConstraintShape::Ball {
                center: c,
                radius: r,
            }
        } else {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let at_center: f64 = w.iter().map(|v| v * 0.5).sum();
            linear(w, -at_center - rng.random_range(0.2..0.8))
        };
        let bias = rng.random_range(0.2..0.8);
        let freq = rng.random_range(2.0..10.0);
        constraints.push(SyntheticConstraint::biased(
            shape,
            threshold,
            bias,
            wave(freq, k as f64),
        ));
    }
    let spec = SyntheticSpec {
        name: "solar2_like".into(),
        bounds: BoxBounds::uniform(n, 0.0, 1.0).expect("valid box"),
        objective_target: (0..n).map(|_| rng.random_range(0.0..1.0)).collect(),
        objective_weights: (0..n).map(|_| rng.random_range(0.5..2.0)).collect(),
        objective_bias: 0.2,
        constraints,
        a_priori: (0..5).collect(),
        cost: CostModel {
            t_min: 0.01,
            t_max: 1.0,
            alpha: 1.5,
            x_weight: 0.5,
        },
        noise: 0.01,
        seed: 7,
        failure_ball: Some((vec![0.05; n], 0.4)),
    };
    BuiltinProblem {
        spec,
        rho: 0.1,
        x0: center,
    }
}

/// Two variables with biases of several shapes and thresholds.
pub fn mixed2d() -> BuiltinProblem {
    let spec = SyntheticSpec {
        name: "mixed2d".into(),
        bounds: BoxBounds::uniform(2, 0.0, 1.0).expect("valid box"),
        objective_target: vec![0.9, 0.9],
        objective_weights: vec![1.0, 1.0],
        objective_bias: 0.0,
        constraints: vec![
            SyntheticConstraint::exact(linear(vec![1.0, 1.0], -1.7)),
            SyntheticConstraint::biased(
                ConstraintShape::Ball {
                    center: vec![0.5, 0.5],
                    radius: 0.35,
                },
                2f64.powi(-6),
                0.3,
                wave(9.0, 0.0),
            ),
            SyntheticConstraint::biased(
                ConstraintShape::Hole {
                    center: vec![0.8, 0.2],
                    radius: 0.15,
                },
                0.3,
                0.2,
                wave(13.0, 0.5),
            ),
            SyntheticConstraint::biased(
                linear(vec![1.0, -2.0], -0.2),
                0.7,
                0.4,
                BiasShape::Constant,
            ),
        ],
        a_priori: vec![0],
        cost: CostModel::new(0.001, 1.0, 1.0),
        noise: 0.0,
        seed: 5,
        failure_ball: None,
    };
    BuiltinProblem {
        spec,
        rho: 0.05,
        x0: vec![0.5, 0.5],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::{MultiFidelityBlackbox, SyntheticBlackbox};
    use crate::domain::{is_feasible, TrialPoint};

    #[test]
    fn builtins_are_valid_with_feasible_start() {
        for name in BUILTIN_NAMES {
            let p = builtin(name).unwrap();
            assert_eq!(p.spec.name, name);
            let bb = SyntheticBlackbox::new(p.spec.clone()).unwrap();
            let out = bb.evaluate(&TrialPoint::new(p.x0.clone()), 1.0);
            assert!(is_feasible(&out.c), "{name}: {:?}", out.c);
            assert!((0.0..=1.0).contains(&p.rho));
        }
    }

    #[test]
    fn solar2_like_shape() {
        let p = solar2_like();
        assert_eq!(p.spec.bounds.dim(), 14);
        assert_eq!(p.spec.constraints.len(), 13);
        assert_eq!(p.spec.a_priori.len(), 5);
        assert_eq!(p, solar2_like());
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin("solar99"), Err(Error::UnknownProblem(_))));
    }
}
