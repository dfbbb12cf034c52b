use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ficopt::assignment::{solve_assignment, AssignmentInstance};
use ficopt::blackbox::SyntheticBlackbox;
use ficopt::domain::{FidelityLadder, TrialPoint};
use ficopt::problems;
use ficopt::sampling::{estimate_stats, evaluate_samples, latin_hypercube};
use ficopt::FidelityController;

fn assignment(c: &mut Criterion) {
    let p = problems::solar2_like();
    let bb = SyntheticBlackbox::new(p.spec.clone()).unwrap();
    let ladder = FidelityLadder::reference();
    let samples = evaluate_samples(&bb, latin_hypercube(&p.spec.bounds, 500, 1), &ladder);
    let stats = estimate_stats(&samples, &ladder, &p.spec.meta()).unwrap();
    let inst = AssignmentInstance::from_stats(&stats, 0.05, false).unwrap();
    c.bench_function("solve_assignment/solar2_like", |b| {
        b.iter(|| solve_assignment(black_box(&inst)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let p = problems::mixed2d();
    let bb = SyntheticBlackbox::new(p.spec.clone()).unwrap();
    let ladder = FidelityLadder::reference();
    c.bench_function("latin_hypercube/14d_1000", |b| {
        let bounds = problems::solar2_like().spec.bounds;
        b.iter(|| latin_hypercube(black_box(&bounds), 1000, 3))
    });
    let samples = evaluate_samples(&bb, latin_hypercube(&p.spec.bounds, 2000, 1), &ladder);
    let meta = p.spec.meta();
    c.bench_function("estimate_stats/mixed2d_2000", |b| {
        b.iter(|| estimate_stats(black_box(&samples), &ladder, &meta).unwrap())
    });
}

fn controller(c: &mut Criterion) {
    let p = problems::gated();
    let bb = SyntheticBlackbox::new(p.spec.clone()).unwrap();
    let ladder = FidelityLadder::reference();
    let samples = evaluate_samples(&bb, latin_hypercube(&p.spec.bounds, 500, 1), &ladder);
    let stats = estimate_stats(&samples, &ladder, &p.spec.meta()).unwrap();
    let sol =
        solve_assignment(&AssignmentInstance::from_stats(&stats, 0.05, false).unwrap()).unwrap();
    let points = latin_hypercube(&p.spec.bounds, 256, 9);
    c.bench_function("controlled_evaluate/gated_256", |b| {
        b.iter_batched(
            || FidelityController::new(&bb, sol.matrix.clone(), ladder.clone()).unwrap(),
            |mut ctl| {
                for x in &points {
                    black_box(ctl.controlled_evaluate(black_box(x as &TrialPoint)));
                }
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, assignment, sampling, controller);
criterion_main!(benches);
