//! Independent Monte Carlo oracles for the expected evaluation time, and
//! property checks of the reduced search against random feasible matrices.

use std::collections::BTreeSet;

use ficopt::assignment::{
    expected_eval_time, is_feasible_assignment, no_interrupt_prob, reduce_instance,
    solve_assignment, AssignmentInstance, AssignmentMatrix,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 1_000_000;

/// Simulated cost of one evaluation: rows run in order, each row charges its
/// time, and a violation drawn on an active row stops the run.
fn simulate(
    rows: &[Option<usize>],
    p: &[Vec<f64>],
    t: &[f64],
    force_top: bool,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let levels = t.len();
    let mut time = 0.0;
    for (i, &ti) in t.iter().enumerate() {
        let active: Vec<usize> = (0..rows.len()).filter(|&j| rows[j] == Some(i)).collect();
        if active.is_empty() && !(force_top && i == levels - 1) {
            continue;
        }
        time += ti;
        if active.iter().any(|&j| rng.random_bool(p[i][j])) {
            break;
        }
    }
    time
}

fn mean_and_se(mut draw: impl FnMut() -> f64) -> (f64, f64) {
    let (mut s, mut q) = (0.0, 0.0);
    for _ in 0..DRAWS {
        let v = draw();
        s += v;
        q += v * v;
    }
    let n = DRAWS as f64;
    let m = s / n;
    (m, ((q / n - m * m).max(0.0) / n).sqrt())
}

fn instance(levels: usize, p: Vec<Vec<f64>>, t: Vec<f64>) -> AssignmentInstance {
    let m = p[0].len();
    AssignmentInstance {
        r: vec![vec![1.0; m]; levels],
        p,
        t,
        epsilon: 0.05,
        a_priori: BTreeSet::new(),
        force_top: false,
    }
}

#[test]
fn two_bernoulli_halves_pass_a_quarter_of_the_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (m, se) =
        mean_and_se(|| f64::from(u8::from(!rng.random_bool(0.5) && !rng.random_bool(0.5))));
    assert!((m - 0.25).abs() < 4.0 * se, "{m} +- {se}");
    let b = AssignmentMatrix::new(1, vec![Some(0), Some(0)], false);
    assert_eq!(no_interrupt_prob(&b, &[vec![0.5, 0.5]], 0), 0.25);
}

#[test]
fn two_level_example_costs_six() {
    let p = vec![vec![0.5, 0.0], vec![0.0, 0.0]];
    let t = vec![1.0, 10.0];
    let rows = [Some(0), Some(1)];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (m, se) = mean_and_se(|| simulate(&rows, &p, &t, false, &mut rng));
    assert!((m - 6.0).abs() < 4.0 * se, "{m} +- {se}");
    let inst = instance(2, p, t);
    assert_eq!(
        expected_eval_time(&AssignmentMatrix::new(2, rows.to_vec(), false), &inst),
        6.0
    );
}

#[test]
fn empty_middle_row_costs_three() {
    let p = vec![vec![0.5, 0.0], vec![0.0; 2], vec![0.0; 2]];
    let t = vec![1.0, 2.0, 4.0];
    let rows = [Some(0), Some(2)];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (m, se) = mean_and_se(|| simulate(&rows, &p, &t, false, &mut rng));
    assert!((m - 3.0).abs() < 4.0 * se, "{m} +- {se}");
    let inst = instance(3, p, t);
    assert_eq!(
        expected_eval_time(&AssignmentMatrix::new(3, rows.to_vec(), false), &inst),
        3.0
    );
}

#[test]
fn random_matrices_match_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let levels = rng.random_range(1..=4);
        let m = rng.random_range(1..=3);
        let p: Vec<Vec<f64>> = (0..levels)
            .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let t: Vec<f64> = (0..levels).map(|_| rng.random_range(0.5..3.0)).collect();
        let rows: Vec<Option<usize>> = (0..m).map(|_| Some(rng.random_range(0..levels))).collect();
        let force_top = rng.random_bool(0.5);
        let mut inst = instance(levels, p.clone(), t.clone());
        inst.force_top = force_top;
        let exact = expected_eval_time(
            &AssignmentMatrix::new(levels, rows.clone(), force_top),
            &inst,
        );
        let mut sim_rng = ChaCha8Rng::seed_from_u64(rng.random());
        let (mean, se) = mean_and_se(|| simulate(&rows, &p, &t, force_top, &mut sim_rng));
        assert!(
            (mean - exact).abs() < 4.0 * se + 1e-12,
            "{mean} +- {se} vs {exact}"
        );
    }
}

fn arb_instance() -> impl Strategy<Value = (AssignmentInstance, Vec<usize>)> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(levels, m)| {
        (
            prop::collection::vec(prop::collection::vec(0.8f64..=1.0, levels), m),
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, levels), m),
            prop::collection::vec(0.0f64..2.0, levels),
            prop::collection::vec(any::<prop::sample::Index>(), m),
        )
            .prop_map(move |(mut rc, mut pc, dt, picks)| {
                let mut r = vec![vec![0.0; m]; levels];
                let mut p = vec![vec![0.0; m]; levels];
                for j in 0..m {
                    rc[j].sort_by(f64::total_cmp);
                    rc[j][levels - 1] = 1.0;
                    pc[j].sort_by(|a, b| b.total_cmp(a));
                    for i in 0..levels {
                        r[i][j] = rc[j][i];
                        p[i][j] = pc[j][i];
                    }
                }
                let t = dt
                    .iter()
                    .scan(0.0, |acc, d| {
                        *acc += d;
                        Some(*acc)
                    })
                    .collect();
                let inst = AssignmentInstance {
                    r,
                    p,
                    t,
                    epsilon: 0.05,
                    a_priori: BTreeSet::new(),
                    force_top: false,
                };
                let picks = picks.iter().map(|ix| ix.index(usize::MAX)).collect();
                (inst, picks)
            })
    })
}

proptest! {
    #[test]
    fn solution_beats_any_feasible_matrix((inst, picks) in arb_instance()) {
        let sol = solve_assignment(&inst).unwrap();
        prop_assert!(is_feasible_assignment(&sol.matrix, &inst));
        let red = reduce_instance(&inst).unwrap();
        let levels = inst.levels();
        let rows = (0..inst.constraints())
            .map(|j| {
                let d = red.columns.iter().position(|&c| c == j).unwrap();
                let lo = red.min_rows[d];
                Some(lo + picks[j] % (levels - lo))
            })
            .collect();
        let other = AssignmentMatrix::new(levels, rows, false);
        prop_assert!(is_feasible_assignment(&other, &inst));
        prop_assert!(sol.expected_time <= expected_eval_time(&other, &inst) + 1e-12);
    }
}
