//! Data profiles over virtual time.
//!
//! A run solves its problem instance at time `T` when its best feasible value
//! at `T` satisfies `f <= f_L + tau (f0 - f_L)`, where `f_L` is the best value
//! any run found on the instance and `f0` the largest first confirmed value
//! among those runs.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Mode, RunRecord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataProfileSpec {
    pub tau: f64,
}

impl DataProfileSpec {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau < 1.0 {
            Ok(DataProfileSpec { tau })
        } else {
            Err(Error::InvalidConfig(format!(
                "tau must lie in (0, 1), got {tau}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub time: f64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub mode: Mode,
    /// Step curve, nondecreasing in both coordinates.
    pub points: Vec<ProfilePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub tau: f64,
    pub curves: Vec<ProfileCurve>,
    /// Instances on which no run found a feasible point.
    pub excluded: Vec<String>,
}

struct Reference {
    f_l: f64,
    f0: f64,
}

pub fn data_profile(records: &[RunRecord], spec: &DataProfileSpec) -> Result<DataProfile> {
    DataProfileSpec::new(spec.tau)?;
    let mut by_instance: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_instance.entry(r.instance_key()).or_default().push(r);
    }

    let mut refs = BTreeMap::new();
    let mut excluded = Vec::new();
    for (key, runs) in &by_instance {
        let f_l = runs
            .iter()
            .filter_map(|r| r.best.as_ref())
            .map(|b| b.f.value())
            .reduce(f64::min);
        let f0 = runs.iter().filter_map(|r| r.f0).reduce(f64::max);
        match (f_l, f0) {
            (Some(f_l), Some(f0)) => {
                refs.insert(key.clone(), Reference { f_l, f0 });
            }
            _ => excluded.push(key.clone()),
        }
    }

    let horizon = records
        .iter()
        .map(RunRecord::final_time)
        .fold(0.0, f64::max);
    let mut solve_times: BTreeMap<Mode, (usize, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let Some(rf) = refs.get(&r.instance_key()) else {
            continue;
        };
        let entry = solve_times.entry(r.mode).or_default();
        entry.0 += 1;
        let target = rf.f_l + spec.tau * (rf.f0 - rf.f_l);
        if let Some(t) = r.time_to_reach(target) {
            entry.1.push(t);
        }
    }

    let curves = solve_times
        .into_iter()
        .map(|(mode, (total, mut times))| {
            times.sort_by(f64::total_cmp);
            let mut points = vec![ProfilePoint {
                time: 0.0,
                fraction: 0.0,
            }];
            for (k, &t) in times.iter().enumerate() {
                let fraction = (k + 1) as f64 / total as f64;
                match points.last_mut() {
                    Some(last) if last.time == t => last.fraction = fraction,
                    _ => points.push(ProfilePoint { time: t, fraction }),
                }
            }
            let end = points.last().copied().expect("starts at the origin");
            if horizon > end.time {
                points.push(ProfilePoint {
                    time: horizon,
                    fraction: end.fraction,
                });
            }
            ProfileCurve { mode, points }
        })
        .collect();

    Ok(DataProfile {
        tau: spec.tau,
        curves,
        excluded,
    })
}

/// Columns: `time_seconds,fraction_solved,mode`.
pub fn write_profile_csv<W: Write>(profile: &DataProfile, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["time_seconds", "fraction_solved", "mode"])?;
    for curve in &profile.curves {
        for p in &curve.points {
            w.write_record([
                p.time.to_string(),
                p.fraction.to_string(),
                curve.mode.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
