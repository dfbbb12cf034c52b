use std::fs;
use std::path::Path;

use ficopt::blackbox::{
    BlackboxDescriptor, ExternalBlackbox, ExternalConfig, MultiFidelityBlackbox,
};
use ficopt::domain::{BoxBounds, ConstraintMeta, EvalStatus, ExtReal, TrialPoint};
use ficopt::harness::{run, Mode, ProblemSource, RunConfig};

fn stub(dir: &Path, name: &str, body: &str, m: usize, a_priori: &[usize]) -> ExternalConfig {
    let path = dir.join(name);
    fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    ExternalConfig {
        command: "sh".into(),
        args: vec![path.to_string_lossy().into_owned()],
        descriptor: BlackboxDescriptor {
            bounds: BoxBounds::uniform(2, -1.0, 1.0).unwrap(),
            constraints: ConstraintMeta::new(m, a_priori.iter().copied()).unwrap(),
            objective_varies_with_fidelity: true,
        },
        workdir: Some(dir.to_path_buf()),
    }
}

#[test]
fn reads_objective_and_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let bb = ExternalBlackbox::new(stub(dir.path(), "ok.sh", "echo 1.0 -1.0", 1, &[]));
    let out = bb.evaluate(&TrialPoint::new(vec![0.0, 0.0]), 1.0);
    assert_eq!(out.status, EvalStatus::Complete);
    assert_eq!(out.f, ExtReal::new(1.0));
    assert_eq!(out.c, vec![ExtReal::new(-1.0)]);
    assert!(out.time >= 0.0);
}

#[test]
fn nonzero_exit_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bb = ExternalBlackbox::new(stub(dir.path(), "bad.sh", "echo 1.0 -1.0\nexit 3", 1, &[]));
    let out = bb.evaluate(&TrialPoint::new(vec![0.0, 0.0]), 0.5);
    assert_eq!(out.status, EvalStatus::Failed);
    assert!(out.f.is_infinite());
    assert!(out.c.iter().all(|c| c.is_infinite()));
}

#[test]
fn inf_tokens_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let bb = ExternalBlackbox::new(stub(dir.path(), "inf.sh", "echo inf -2 2.5", 1, &[]));
    let out = bb.evaluate(&TrialPoint::new(vec![0.0, 0.0]), 1.0);
    assert!(out.f.is_infinite());
    assert_eq!(out.c, vec![ExtReal::new(-2.0)]);
    assert_eq!(out.time, 2.5);
}

#[test]
fn point_file_and_fidelity_reach_the_script() {
    let dir = tempfile::tempdir().unwrap();
    // f = x0 + x1, c = fidelity - 0.75, reported time 1
    let body = r#"a=$(sed -n 1p "$1"); b=$(sed -n 2p "$1")
echo "$(awk "BEGIN{print $a + $b}") $(awk "BEGIN{print $2 - 0.75}") 1""#;
    let bb = ExternalBlackbox::new(stub(dir.path(), "echo.sh", body, 1, &[]));
    let out = bb.evaluate(&TrialPoint::new(vec![0.25, 0.5]), 0.5);
    assert_eq!(out.f, ExtReal::new(0.75));
    assert_eq!(out.c, vec![ExtReal::new(-0.25)]);
    assert_eq!(out.time, 1.0);
    // point files are cleaned up
    let left = fs::read_dir(dir.path()).unwrap().filter(|e| {
        e.as_ref()
            .unwrap()
            .file_name()
            .to_string_lossy()
            .starts_with("ficopt-point")
    });
    assert_eq!(left.count(), 0);
}

#[test]
fn harness_runs_an_external_problem() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"a=$(sed -n 1p "$1"); b=$(sed -n 2p "$1")
echo "$(awk "BEGIN{print ($a-0.5)^2 + ($b+0.25)^2}") $(awk "BEGIN{print $a - 0.8}") 1""#;
    let cfg = stub(dir.path(), "quad.sh", body, 1, &[]);
    let mut rc = RunConfig::new(ProblemSource::External { config: cfg }, Mode::Base, 30.0);
    rc.x0 = Some(vec![0.0, 0.0]);
    let rec = run(&rc).unwrap();
    let best = rec.best.unwrap();
    assert!(best.f.value() < 0.3125, "{:?}", best);
    assert_eq!(rec.evaluations.len(), 30);
}
