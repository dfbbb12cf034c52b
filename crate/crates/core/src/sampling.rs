//! Latin hypercube sampling of the blackbox across the fidelity ladder and
//! the estimators of representativity, violation probability and cost.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blackbox::MultiFidelityBlackbox;
use crate::domain::{
    is_feasible, violation_h, BoxBounds, ConstraintMeta, EvalOutput, EvalStatus, ExtReal,
    FidelityLadder, TrialPoint,
};
use crate::error::{Error, Result};

/// Default sample size.
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhConfig {
    pub n_h: usize,
    /// Sizing factor of the sampled region around `x0`, in `[0, 1]`.
    pub rho: f64,
    pub seed: u64,
    /// Parallel evaluation slots assumed when accounting the sampling time.
    pub workers: usize,
}

impl Default for LhConfig {
    fn default() -> Self {
        LhConfig {
            n_h: DEFAULT_SAMPLE_SIZE,
            rho: 1.0,
            seed: 0,
            workers: 1,
        }
    }
}

impl LhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_h == 0 {
            return Err(Error::InvalidConfig("n_H must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidSizingFactor(self.rho));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sampling box of half-width `rho * (u - l)` around `x0`, clipped to the box.
pub fn centered_bounds(x0: &TrialPoint, bounds: &BoxBounds, rho: f64) -> Result<BoxBounds> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidSizingFactor(rho));
    }
    if x0.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: x0.len(),
        });
    }
    if let Some(index) =
        (0..x0.len()).find(|&i| x0[i] < bounds.lower()[i] || x0[i] > bounds.upper()[i])
    {
        return Err(Error::PointOutsideBounds { index });
    }
    let (lower, upper) = (0..x0.len())
        .map(|i| {
            let half = rho * bounds.width(i);
            (
                bounds.lower()[i].max(x0[i] - half),
                bounds.upper()[i].min(x0[i] + half),
            )
        })
        .unzip();
    BoxBounds::new(lower, upper)
}

/// Classic Latin hypercube: in every coordinate the `n_h` points occupy the
/// `n_h` equal-width strata once each, uniformly within the stratum, with an
/// independent seeded permutation per coordinate.
pub fn latin_hypercube(bounds: &BoxBounds, n_h: usize, seed: u64) -> Vec<TrialPoint> {
    let n = bounds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![vec![0.0; n]; n_h];
    let mut strata: Vec<usize> = (0..n_h).collect();
    for d in 0..n {
        strata.shuffle(&mut rng);
        let (lo, width) = (bounds.lower()[d], bounds.width(d));
        for (k, point) in coords.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let v = lo + (strata[k] as f64 + u) / n_h as f64 * width;
            point[d] = v.min(bounds.upper()[d]);
        }
    }
    coords.into_iter().map(TrialPoint::new).collect()
}

/// Sample points with their outputs at every fidelity of a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<TrialPoint>,
    pub fidelities: FidelityLadder,
    /// `outputs[k][i]` is point `k` evaluated at fidelity `i`.
    pub outputs: Vec<Vec<EvalOutput>>,
    /// Points that violate no a-priori constraint.
    pub apriori_pass: Vec<bool>,
}

impl SampleSet {
    pub fn from_outputs(
        points: Vec<TrialPoint>,
        fidelities: FidelityLadder,
        outputs: Vec<Vec<EvalOutput>>,
    ) -> Self {
        let apriori_pass = outputs
            .iter()
            .map(|row| !row.iter().any(EvalOutput::apriori_violated))
            .collect();
        SampleSet {
            points,
            fidelities,
            outputs,
            apriori_pass,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pass_count(&self) -> usize {
        self.apriori_pass.iter().filter(|&&p| p).count()
    }

    pub fn total_time(&self) -> f64 {
        self.outputs.iter().flatten().map(|o| o.time).sum()
    }

    /// One row per (point, fidelity):
    /// `point,fidelity,status,time,f,x_0..x_{n-1},c_0..c_{m-1}`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.points.first().map_or(0, |p| p.len());
        let m = self
            .outputs
            .first()
            .and_then(|r| r.first())
            .map_or(0, |o| o.c.len());
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["point", "fidelity", "status", "time", "f"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((0..n).map(|d| format!("x_{d}")));
        header.extend((0..m).map(|j| format!("c_{j}")));
        w.write_record(&header)?;
        for (k, (x, row)) in self.points.iter().zip(&self.outputs).enumerate() {
            for out in row {
                let mut rec = vec![
                    k.to_string(),
                    out.fidelity.to_string(),
                    status_name(out.status).to_string(),
                    out.time.to_string(),
                    out.f.to_string(),
                ];
                rec.extend(x.iter().map(|v| v.to_string()));
                rec.extend(out.c.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let n = header.iter().filter(|h| h.starts_with("x_")).count();
        let m = header.iter().filter(|h| h.starts_with("c_")).count();
        let bad = |msg: &str| Error::InvalidConfig(format!("sample CSV: {msg}"));
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(&format!("bad number `{s}`")))
        };

        let mut points: Vec<TrialPoint> = Vec::new();
        let mut outputs: Vec<Vec<EvalOutput>> = Vec::new();
        let mut ladder: Vec<f64> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 5 + n + m {
                return Err(bad("wrong number of fields"));
            }
            let k: usize = rec[0].parse().map_err(|_| bad("bad point index"))?;
            let fidelity = num(&rec[1])?;
            let out = EvalOutput {
                f: ExtReal::new(num(&rec[4])?),
                c: (0..m)
                    .map(|j| num(&rec[5 + n + j]).map(ExtReal::new))
                    .collect::<Result<_>>()?,
                fidelity,
                time: num(&rec[3])?,
                status: parse_status(&rec[2]).ok_or_else(|| bad("bad status"))?,
            };
            if k == points.len() {
                points.push(TrialPoint::new(
                    (0..n).map(|d| num(&rec[5 + d])).collect::<Result<_>>()?,
                ));
                outputs.push(Vec::new());
            } else if k + 1 != points.len() {
                return Err(bad("rows must be grouped by point"));
            }
            if k == 0 {
                ladder.push(fidelity);
            }
            outputs[k].push(out);
        }
        let fidelities = FidelityLadder::new(ladder)?;
        if outputs.iter().any(|row| row.len() != fidelities.len()) {
            return Err(bad("every point needs one row per fidelity"));
        }
        Ok(SampleSet::from_outputs(points, fidelities, outputs))
    }
}

fn status_name(s: EvalStatus) -> &'static str {
    match s {
        EvalStatus::Complete => "complete",
        EvalStatus::AprioriOnly => "apriori_only",
        EvalStatus::AprioriViolated => "apriori_violated",
        EvalStatus::Failed => "failed",
    }
}

fn parse_status(s: &str) -> Option<EvalStatus> {
    Some(match s {
        "complete" => EvalStatus::Complete,
        "apriori_only" => EvalStatus::AprioriOnly,
        "apriori_violated" => EvalStatus::AprioriViolated,
        "failed" => EvalStatus::Failed,
        _ => return None,
    })
}

/// Evaluates every point at every fidelity of the ladder, in parallel.
/// The result does not depend on completion order.
pub fn evaluate_samples<B: MultiFidelityBlackbox + ?Sized>(
    bb: &B,
    points: Vec<TrialPoint>,
    ladder: &FidelityLadder,
) -> SampleSet {
    let outputs: Vec<Vec<EvalOutput>> = points
        .par_iter()
        .map(|x| {
            ladder
                .values()
                .iter()
                .map(|&phi| bb.evaluate(x, phi))
                .collect()
        })
        .collect();
    SampleSet::from_outputs(points, ladder.clone(), outputs)
}

/// Estimated `r`, `p`, `t` tables. Rows follow the ladder, columns the
/// constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityStats {
    pub fidelities: FidelityLadder,
    pub a_priori: Vec<usize>,
    pub r_hat: Vec<Vec<f64>>,
    pub p_hat: Vec<Vec<f64>>,
    pub t_hat: Vec<f64>,
    pub sample_count: usize,
    pub apriori_pass_count: usize,
}

impl FeasibilityStats {
    pub fn levels(&self) -> usize {
        self.t_hat.len()
    }

    pub fn constraints(&self) -> usize {
        self.r_hat.first().map_or(0, Vec::len)
    }
}

/// Computes the estimators over the sample points that pass the a-priori
/// constraints. A fidelity is representative for a constraint at a point when
/// the violated/satisfied indicator at that fidelity and at every higher one
/// matches the indicator at fidelity 1. Values that were not computed (fidelity
/// 0 for constraints that need the simulation) are never representative and
/// never count as violations.
pub fn estimate_stats(
    samples: &SampleSet,
    ladder: &FidelityLadder,
    meta: &ConstraintMeta,
) -> Result<FeasibilityStats> {
    if samples.fidelities != *ladder {
        return Err(Error::InvalidConfig(
            "sample set was evaluated on a different fidelity ladder".into(),
        ));
    }
    let levels = ladder.len();
    let m = meta.count;
    let mut rep = vec![vec![0usize; m]; levels];
    let mut viol = vec![vec![0usize; m]; levels];
    let mut time = vec![0.0; levels];
    let mut kept = 0usize;

    for (row, _) in samples
        .outputs
        .iter()
        .zip(&samples.apriori_pass)
        .filter(|(_, &pass)| pass)
    {
        kept += 1;
        for (i, out) in row.iter().enumerate() {
            time[i] += out.time;
        }
        for j in 0..m {
            let indicator =
                |out: &EvalOutput| out.is_computed(j, meta).then(|| out.c[j] > ExtReal::ZERO);
            let truth = indicator(&row[levels - 1]);
            let mut agrees_above = true;
            for i in (0..levels).rev() {
                let ind = indicator(&row[i]);
                agrees_above &= ind == truth;
                if agrees_above {
                    rep[i][j] += 1;
                }
                if ind == Some(true) {
                    viol[i][j] += 1;
                }
            }
        }
    }

    if kept == 0 {
        return Err(Error::EmptyAprioriSample {
            samples: samples.len(),
        });
    }
    let denom = kept as f64;
    let frac = |tab: Vec<Vec<usize>>| -> Vec<Vec<f64>> {
        tab.into_iter()
            .map(|r| r.into_iter().map(|k| k as f64 / denom).collect())
            .collect()
    };
    Ok(FeasibilityStats {
        fidelities: ladder.clone(),
        a_priori: meta.a_priori.iter().copied().collect(),
        r_hat: frac(rep),
        p_hat: frac(viol),
        t_hat: time.into_iter().map(|s| s / denom).collect(),
        sample_count: samples.len(),
        apriori_pass_count: kept,
    })
}

/// Sampling time charged before optimization starts: total blackbox time of
/// the sample divided by the number of parallel workers.
pub fn lh_time_offset(samples: &SampleSet, workers: usize) -> f64 {
    samples.total_time() / workers.max(1) as f64
}

/// Index of the best sample point judged at the top fidelity: feasible
/// first, then lowest violation `h`, then lowest objective; earliest on ties.
pub fn best_sample(samples: &SampleSet) -> Option<usize> {
    let top = samples.fidelities.top_index();
    samples
        .outputs
        .iter()
        .enumerate()
        .min_by_key(|(k, row)| {
            let out = &row[top];
            (!is_feasible(&out.c), violation_h(&out.c, true), out.f, *k)
        })
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> TrialPoint {
        TrialPoint::new(v.to_vec())
    }

    #[test]
    fn full_box_when_rho_is_one() {
        let b = BoxBounds::new(vec![0.0, -2.0], vec![10.0, 3.0]).unwrap();
        for x0 in [[0.0, -2.0], [3.3, 1.0], [10.0, 3.0]] {
            assert_eq!(centered_bounds(&pt(&x0), &b, 1.0).unwrap(), b);
        }
    }

    #[test]
    fn degenerate_box_when_rho_is_zero() {
        let b = BoxBounds::new(vec![0.0, -2.0], vec![10.0, 3.0]).unwrap();
        let c = centered_bounds(&pt(&[4.0, 0.5]), &b, 0.0).unwrap();
        assert_eq!(c.lower(), &[4.0, 0.5]);
        assert_eq!(c.upper(), &[4.0, 0.5]);
    }

    #[test]
    fn interior_centered_box() {
        let b = BoxBounds::new(vec![0.0], vec![10.0]).unwrap();
        let c = centered_bounds(&pt(&[5.0]), &b, 0.25).unwrap();
        assert_eq!(c.lower(), &[2.5]);
        assert_eq!(c.upper(), &[7.5]);
    }

    #[test]
    fn centered_box_rejects_outside_point_and_bad_rho() {
        let b = BoxBounds::new(vec![0.0], vec![10.0]).unwrap();
        assert!(matches!(
            centered_bounds(&pt(&[11.0]), &b, 0.5),
            Err(Error::PointOutsideBounds { index: 0 })
        ));
        assert!(centered_bounds(&pt(&[1.0]), &b, 1.5).is_err());
    }

    #[test]
    fn lhs_places_one_point_per_stratum() {
        let b = BoxBounds::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let pts = latin_hypercube(&b, 4, 3);
        assert_eq!(pts.len(), 4);
        for d in 0..2 {
            let mut strata: Vec<usize> = pts
                .iter()
                .map(|p| ((p[d] - b.lower()[d]) / b.width(d) * 4.0).floor() as usize)
                .collect();
            strata.sort();
            assert_eq!(strata, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn lhs_degenerate_bounds() {
        let b = BoxBounds::new(vec![2.0, 3.0], vec![2.0, 3.0]).unwrap();
        let pts = latin_hypercube(&b, 5, 1);
        assert!(pts.iter().all(|p| p[0] == 2.0 && p[1] == 3.0));
    }

    #[test]
    fn lhs_is_seeded() {
        let b = BoxBounds::uniform(3, 0.0, 1.0).unwrap();
        assert_eq!(latin_hypercube(&b, 20, 9), latin_hypercube(&b, 20, 9));
        assert_ne!(latin_hypercube(&b, 20, 9), latin_hypercube(&b, 20, 10));
    }

    fn out(fidelity: f64, c: &[f64], time: f64) -> EvalOutput {
        EvalOutput {
            f: ExtReal::ZERO,
            c: c.iter().map(|&v| ExtReal::new(v)).collect(),
            fidelity,
            time,
            status: EvalStatus::Complete,
        }
    }

    #[test]
    fn time_offset_is_sum_over_workers() {
        let ladder = FidelityLadder::new(vec![0.5, 1.0]).unwrap();
        let samples = SampleSet::from_outputs(
            vec![pt(&[0.0]), pt(&[1.0])],
            ladder,
            vec![
                vec![out(0.5, &[], 1.0), out(1.0, &[], 2.0)],
                vec![out(0.5, &[], 3.0), out(1.0, &[], 4.0)],
            ],
        );
        assert_eq!(lh_time_offset(&samples, 2), 5.0);
        assert_eq!(lh_time_offset(&samples, 1), 10.0);
        assert_eq!(lh_time_offset(&samples, 4), 2.5);
    }

    #[test]
    fn always_violated_constraint() {
        let ladder = FidelityLadder::new(vec![0.5, 1.0]).unwrap();
        let meta = ConstraintMeta::new(1, []).unwrap();
        let samples = SampleSet::from_outputs(
            vec![pt(&[0.0]), pt(&[1.0])],
            ladder.clone(),
            vec![
                vec![out(0.5, &[1.0], 1.0), out(1.0, &[2.0], 2.0)],
                vec![out(0.5, &[0.5], 1.0), out(1.0, &[3.0], 2.0)],
            ],
        );
        let s = estimate_stats(&samples, &ladder, &meta).unwrap();
        assert_eq!(s.p_hat[0][0], 1.0);
        assert_eq!(s.r_hat[0][0], 1.0);
        assert_eq!(s.t_hat, vec![1.0, 2.0]);
    }

    #[test]
    fn representativity_needs_every_higher_fidelity() {
        // violated at 0.25, satisfied at 0.5, violated at 1
        let ladder = FidelityLadder::new(vec![0.25, 0.5, 1.0]).unwrap();
        let meta = ConstraintMeta::new(1, []).unwrap();
        let samples = SampleSet::from_outputs(
            vec![pt(&[0.0])],
            ladder.clone(),
            vec![vec![
                out(0.25, &[1.0], 1.0),
                out(0.5, &[-1.0], 1.0),
                out(1.0, &[1.0], 1.0),
            ]],
        );
        let s = estimate_stats(&samples, &ladder, &meta).unwrap();
        assert_eq!(s.r_hat, vec![vec![0.0], vec![0.0], vec![1.0]]);
        assert_eq!(s.p_hat, vec![vec![1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn apriori_violators_are_excluded() {
        let ladder = FidelityLadder::new(vec![0.5, 1.0]).unwrap();
        let meta = ConstraintMeta::new(2, [0]).unwrap();
        let violator = EvalOutput::screened(
            ExtReal::ZERO,
            vec![ExtReal::new(1.0), ExtReal::new(5.0)],
            &meta,
            0.5,
            0.1,
        );
        let samples = SampleSet::from_outputs(
            vec![pt(&[0.0]), pt(&[1.0])],
            ladder.clone(),
            vec![
                vec![violator.clone(), violator],
                vec![out(0.5, &[-1.0, -1.0], 1.0), out(1.0, &[-1.0, -1.0], 2.0)],
            ],
        );
        assert_eq!(samples.apriori_pass, vec![false, true]);
        let s = estimate_stats(&samples, &ladder, &meta).unwrap();
        assert_eq!(s.apriori_pass_count, 1);
        assert_eq!(s.p_hat[0][1], 0.0);
        assert_eq!(s.t_hat, vec![1.0, 2.0]);
    }

    #[test]
    fn empty_pass_set_is_an_error() {
        let ladder = FidelityLadder::new(vec![1.0]).unwrap();
        let meta = ConstraintMeta::new(1, [0]).unwrap();
        let v = EvalOutput::screened(ExtReal::ZERO, vec![ExtReal::new(1.0)], &meta, 1.0, 0.1);
        let samples = SampleSet::from_outputs(vec![pt(&[0.0])], ladder.clone(), vec![vec![v]]);
        assert!(matches!(
            estimate_stats(&samples, &ladder, &meta),
            Err(Error::EmptyAprioriSample { samples: 1 })
        ));
    }

    #[test]
    fn best_sample_prefers_feasible_then_h_then_f() {
        let ladder = FidelityLadder::new(vec![1.0]).unwrap();
        let mk = |f: f64, c: f64| EvalOutput {
            f: ExtReal::new(f),
            c: vec![ExtReal::new(c)],
            fidelity: 1.0,
            time: 1.0,
            status: EvalStatus::Complete,
        };
        let samples = SampleSet::from_outputs(
            (0..4).map(|k| pt(&[k as f64])).collect(),
            ladder,
            vec![
                vec![mk(-5.0, 2.0)],
                vec![mk(3.0, -1.0)],
                vec![mk(1.0, 0.0)],
                vec![mk(-9.0, 1.0)],
            ],
        );
        assert_eq!(best_sample(&samples), Some(2));
    }

    #[test]
    fn csv_round_trip() {
        let ladder = FidelityLadder::new(vec![0.0, 1.0]).unwrap();
        let meta = ConstraintMeta::new(2, [0]).unwrap();
        let a = EvalOutput::screened(
            ExtReal::ZERO,
            vec![ExtReal::new(-1.0), ExtReal::ZERO],
            &meta,
            0.0,
            0.1,
        );
        let b = out(1.0, &[-1.0, 2.5], 1.5);
        let samples = SampleSet::from_outputs(vec![pt(&[0.25, 0.5])], ladder, vec![vec![a, b]]);
        let mut buf = Vec::new();
        samples.write_csv(&mut buf).unwrap();
        let back = SampleSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, samples);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_samples() -> impl Strategy<Value = (SampleSet, FidelityLadder, ConstraintMeta)> {
            (1usize..5, 1usize..4, 1usize..12).prop_flat_map(|(levels, m, k)| {
                let values = proptest::collection::vec(-1.0f64..1.0, levels * m * k);
                values.prop_map(move |v| {
                    let ladder = FidelityLadder::new(
                        (1..=levels).map(|i| i as f64 / levels as f64).collect(),
                    )
                    .unwrap();
                    let meta = ConstraintMeta::new(m, []).unwrap();
                    let outputs = (0..k)
                        .map(|p| {
                            (0..levels)
                                .map(|i| {
                                    let c: Vec<f64> =
                                        (0..m).map(|j| v[(p * levels + i) * m + j]).collect();
                                    out(ladder.get(i), &c, (i + 1) as f64)
                                })
                                .collect()
                        })
                        .collect();
                    let points = (0..k).map(|p| pt(&[p as f64])).collect();
                    (
                        SampleSet::from_outputs(points, ladder.clone(), outputs),
                        ladder,
                        meta,
                    )
                })
            })
        }

        proptest! {
            #[test]
            fn r_hat_columns_are_monotone_and_top_is_one((samples, ladder, meta) in arb_samples()) {
                let s = estimate_stats(&samples, &ladder, &meta).unwrap();
                for j in 0..meta.count {
                    prop_assert_eq!(s.r_hat[ladder.top_index()][j], 1.0);
                    for i in 1..ladder.len() {
                        prop_assert!(s.r_hat[i - 1][j] <= s.r_hat[i][j]);
                    }
                }
                for v in s.r_hat.iter().chain(&s.p_hat).flatten() {
                    prop_assert!((0.0..=1.0).contains(v));
                }
            }

            #[test]
            fn estimators_ignore_sample_order((samples, ladder, meta) in arb_samples(), shift in 0usize..12) {
                let mut rotated = samples.clone();
                let k = shift % samples.len();
                rotated.points.rotate_left(k);
                rotated.outputs.rotate_left(k);
                rotated.apriori_pass.rotate_left(k);
                let a = estimate_stats(&samples, &ladder, &meta).unwrap();
                let b = estimate_stats(&rotated, &ladder, &meta).unwrap();
                prop_assert_eq!(&a.r_hat, &b.r_hat);
                prop_assert_eq!(&a.p_hat, &b.p_hat);
                for (x, y) in a.t_hat.iter().zip(&b.t_hat) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
                }
            }

            #[test]
            fn lhs_stratifies_every_coordinate(n in 1usize..5, n_h in 1usize..40, seed in 0u64..1000) {
                let b = BoxBounds::uniform(n, -3.0, 5.0).unwrap();
                let pts = latin_hypercube(&b, n_h, seed);
                for d in 0..n {
                    let mut s: Vec<usize> = pts.iter()
                        .map(|p| (((p[d] + 3.0) / 8.0 * n_h as f64).floor() as usize).min(n_h - 1))
                        .collect();
                    s.sort();
                    prop_assert_eq!(s, (0..n_h).collect::<Vec<_>>());
                }
            }
        }
    }
}
