//! Construction of the biadjacency matrix `B` that assigns every constraint
//! to the lowest fidelity trusted to predict its violation.
//!
//! The expected evaluation time of one point under the fidelity controller is
//!
//! ```text
//! f(B) = sum_i t_i y_i(B) prod_{k<i} P_k(B),   P_k(B) = prod_j (1 - p_kj B_kj)
//! ```
//!
//! where `y_i(B) = 1` iff row `i` holds an assignment. A constraint `j` may only
//! go to rows `i >= i(j)`, the first row whose representativity reaches
//! `1 - epsilon`. The search is restricted to the rows `I_F = { i(j) }` and the
//! non-a-priori columns `J_F`, then enumerated exhaustively. Indexes are
//! 0-based throughout.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::FeasibilityStats;

/// Default bound on the misidentification probability.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Default cap on the number of candidate matrices of the reduced search.
pub const DEFAULT_SEARCH_CAP: u128 = 10_000_000;
/// Guard of the unreduced brute-force enumeration.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentInstance {
    /// Representativity, `levels x constraints`.
    pub r: Vec<Vec<f64>>,
    /// Violation probability, `levels x constraints`.
    pub p: Vec<Vec<f64>>,
    /// Expected sub-evaluation time per level.
    pub t: Vec<f64>,
    pub epsilon: f64,
    #[serde(default)]
    pub a_priori: BTreeSet<usize>,
    /// Always run the top fidelity (`y_L = 1`).
    #[serde(default)]
    pub force_top: bool,
}

impl AssignmentInstance {
    pub fn from_stats(stats: &FeasibilityStats, epsilon: f64, force_top: bool) -> Result<Self> {
        let inst = AssignmentInstance {
            r: stats.r_hat.clone(),
            p: stats.p_hat.clone(),
            t: stats.t_hat.clone(),
            epsilon,
            a_priori: stats.a_priori.iter().copied().collect(),
            force_top,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn levels(&self) -> usize {
        self.t.len()
    }

    pub fn constraints(&self) -> usize {
        self.r.first().map_or(0, Vec::len)
    }

    pub fn filtered_columns(&self) -> Vec<usize> {
        (0..self.constraints())
            .filter(|j| !self.a_priori.contains(j))
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.r.iter().map(|row| row[j]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        let levels = self.levels();
        if levels == 0 {
            return bad("no fidelity levels".into());
        }
        let m = self.constraints();
        for (name, tab) in [("r", &self.r), ("p", &self.p)] {
            if tab.len() != levels || tab.iter().any(|row| row.len() != m) {
                return bad(format!("{name} must be {levels} x {m}"));
            }
            if tab.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                return bad(format!("{name} entries must lie in [0, 1]"));
            }
        }
        if self.t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("times must be finite and nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon {} outside [0, 1]", self.epsilon));
        }
        if let Some(&j) = self.a_priori.iter().find(|&&j| j >= m) {
            return bad(format!("a-priori index {j} out of range"));
        }
        for j in self.filtered_columns() {
            if min_assignable_index(&self.column(j), self.epsilon).is_none() {
                return bad(format!(
                    "constraint {j}: representativity never reaches 1 - epsilon"
                ));
            }
        }
        Ok(())
    }
}

/// Binary `levels x constraints` matrix with at most one 1 per column,
/// stored as the row assigned to each column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct AssignmentMatrix {
    levels: usize,
    rows: Vec<Option<usize>>,
    force_top: bool,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    b: Vec<Vec<u8>>,
    y: Vec<u8>,
    #[serde(default)]
    force_top: bool,
}

impl From<AssignmentMatrix> for MatrixRepr {
    fn from(m: AssignmentMatrix) -> Self {
        MatrixRepr {
            b: m.to_rows(),
            y: m.activity().into_iter().map(u8::from).collect(),
            force_top: m.force_top,
        }
    }
}

impl TryFrom<MatrixRepr> for AssignmentMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let levels = repr.b.len();
        let m = repr.b.first().map_or(0, Vec::len);
        if repr.b.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidInstance("ragged B matrix".into()));
        }
        let mut rows = vec![None; m];
        for (j, slot) in rows.iter_mut().enumerate() {
            let ones: Vec<usize> = (0..levels).filter(|&i| repr.b[i][j] != 0).collect();
            match ones.as_slice() {
                [] => {}
                [i] => *slot = Some(*i),
                _ => {
                    return Err(Error::InvalidInstance(format!(
                        "column {j} has several ones"
                    )))
                }
            }
        }
        Ok(AssignmentMatrix {
            levels,
            rows,
            force_top: repr.force_top,
        })
    }
}

impl AssignmentMatrix {
    pub fn new(levels: usize, rows: Vec<Option<usize>>, force_top: bool) -> Self {
        debug_assert!(rows.iter().flatten().all(|&i| i < levels));
        AssignmentMatrix {
            levels,
            rows,
            force_top,
        }
    }

    /// Every listed constraint on the top row, the others unassigned.
    pub fn all_top(
        levels: usize,
        constraints: usize,
        a_priori: &BTreeSet<usize>,
        force_top: bool,
    ) -> Self {
        let rows = (0..constraints)
            .map(|j| (!a_priori.contains(&j)).then_some(levels - 1))
            .collect();
        AssignmentMatrix::new(levels, rows, force_top)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn force_top(&self) -> bool {
        self.force_top
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[j] == Some(i)
    }

    pub fn assigned_row(&self, j: usize) -> Option<usize> {
        self.rows[j]
    }

    pub fn assignments(&self) -> &[Option<usize>] {
        &self.rows
    }

    /// `y_i(B)`: whether the controller runs a sub-evaluation at level `i`.
    /// Under `force_top` the top level is always active.
    pub fn activity(&self) -> Vec<bool> {
        let mut y = vec![false; self.levels];
        for &i in self.rows.iter().flatten() {
            y[i] = true;
        }
        if self.force_top && self.levels > 0 {
            y[self.levels - 1] = true;
        }
        y
    }

    pub fn row_is_empty(&self, i: usize) -> bool {
        !self.rows.contains(&Some(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.levels)
            .map(|i| self.rows.iter().map(|&r| u8::from(r == Some(i))).collect())
            .collect()
    }
}

/// `P_k(B)`: probability that no assigned constraint of row `k` is violated.
pub fn no_interrupt_prob(b: &AssignmentMatrix, p: &[Vec<f64>], k: usize) -> f64 {
    (0..b.constraints())
        .map(|j| if b.get(k, j) { 1.0 - p[k][j] } else { 1.0 })
        .product()
}

/// Contribution `t_i y_i prod_{k<i} P_k(B)` of every level.
pub fn row_costs(b: &AssignmentMatrix, inst: &AssignmentInstance) -> Vec<f64> {
    let y = b.activity();
    let mut reach = 1.0;
    let mut out = Vec::with_capacity(inst.levels());
    for i in 0..inst.levels() {
        out.push(if y[i] { inst.t[i] * reach } else { 0.0 });
        reach *= no_interrupt_prob(b, &inst.p, i);
    }
    out
}

/// Expected time of one controlled evaluation, `f(B)`.
pub fn expected_eval_time(b: &AssignmentMatrix, inst: &AssignmentInstance) -> f64 {
    row_costs(b, inst).into_iter().sum()
}

/// `i(j)`: first level whose representativity is at least `1 - epsilon`.
pub fn min_assignable_index(r_column: &[f64], epsilon: f64) -> Option<usize> {
    let threshold = 1.0 - epsilon;
    r_column.iter().position(|&r| r >= threshold)
}

/// Reduced index sets of the search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    /// `I_F`, ascending. Contains the top level under `force_top`.
    pub rows: Vec<usize>,
    /// `J_F`, ascending.
    pub columns: Vec<usize>,
    /// `i(j)` for every `j` in `J_F`, aligned with `columns`.
    pub min_rows: Vec<usize>,
}

pub fn reduce_instance(inst: &AssignmentInstance) -> Result<Reduction> {
    inst.validate()?;
    let columns = inst.filtered_columns();
    let min_rows: Vec<usize> = columns
        .iter()
        .map(|&j| min_assignable_index(&inst.column(j), inst.epsilon).expect("validated"))
        .collect();
    let mut rows: BTreeSet<usize> = min_rows.iter().copied().collect();
    if inst.force_top {
        // The top level runs anyway, so assigning to it is never dominated.
        rows.insert(inst.levels() - 1);
    }
    Ok(Reduction {
        rows: rows.into_iter().collect(),
        columns,
        min_rows,
    })
}

/// Whether `b` satisfies the partition and threshold constraints:
/// every column of `J_F` assigned exactly once, at a level `>= i(j)`, and
/// a-priori columns left empty.
pub fn is_feasible_assignment(b: &AssignmentMatrix, inst: &AssignmentInstance) -> bool {
    if b.levels() != inst.levels() || b.constraints() != inst.constraints() {
        return false;
    }
    (0..inst.constraints()).all(|j| match (inst.a_priori.contains(&j), b.assigned_row(j)) {
        (true, None) => true,
        (true, Some(_)) | (false, None) => false,
        (false, Some(i)) => {
            min_assignable_index(&inst.column(j), inst.epsilon).is_some_and(|ij| i >= ij)
        }
    })
}

/// Moves every assignment of row `row` down to `row - 1`.
pub fn lower_row(b: &AssignmentMatrix, row: usize) -> AssignmentMatrix {
    assert!(row > 0, "cannot lower the first row");
    let rows = b
        .assignments()
        .iter()
        .map(|&r| if r == Some(row) { Some(row - 1) } else { r })
        .collect();
    AssignmentMatrix::new(b.levels(), rows, b.force_top())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowBreakdown {
    pub level: usize,
    pub active: bool,
    pub assigned: Vec<usize>,
    /// Probability that the walk reaches this level.
    pub reach_probability: f64,
    /// `P_k(B)` of this level.
    pub no_interrupt_probability: f64,
    pub expected_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSolution {
    pub matrix: AssignmentMatrix,
    pub expected_time: f64,
    pub reduction: Reduction,
    /// Size of the reduced search space `|Omega_Q|`.
    pub candidates: u128,
    pub breakdown: Vec<RowBreakdown>,
}

pub fn breakdown(b: &AssignmentMatrix, inst: &AssignmentInstance) -> Vec<RowBreakdown> {
    let costs = row_costs(b, inst);
    let y = b.activity();
    let mut reach = 1.0;
    (0..inst.levels())
        .map(|i| {
            let p_no = no_interrupt_prob(b, &inst.p, i);
            let row = RowBreakdown {
                level: i,
                active: y[i],
                assigned: (0..b.constraints()).filter(|&j| b.get(i, j)).collect(),
                reach_probability: reach,
                no_interrupt_probability: p_no,
                expected_time: costs[i],
            };
            reach *= p_no;
            row
        })
        .collect()
}

pub fn solve_assignment(inst: &AssignmentInstance) -> Result<AssignmentSolution> {
    solve_assignment_with_cap(inst, DEFAULT_SEARCH_CAP)
}

/// Exhaustive search over the reduced space.
///
/// Columns are enumerated depth-first in ascending order, candidate levels
/// ascending, so the first minimizer met is the lexicographically lowest one;
/// later candidates replace it only when strictly better. Subtrees are pruned
/// with a lower bound built from the running per-row products.
pub fn solve_assignment_with_cap(
    inst: &AssignmentInstance,
    cap: u128,
) -> Result<AssignmentSolution> {
    let reduction = reduce_instance(inst)?;
    let levels = inst.levels();
    let top = levels - 1;

    let choices: Vec<Vec<usize>> = reduction
        .min_rows
        .iter()
        .map(|&lo| {
            reduction
                .rows
                .iter()
                .copied()
                .filter(|&i| i >= lo)
                .collect()
        })
        .collect();
    let candidates = choices
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);
    if candidates > cap {
        return Err(Error::SearchSpaceTooLarge { candidates, cap });
    }

    let cols = &reduction.columns;
    let depth = cols.len();
    // slack[d][k]: product of (1 - p_kj) over columns d.. that may use level k
    let mut slack = vec![vec![1.0; levels]; depth + 1];
    for d in (0..depth).rev() {
        slack[d] = slack[d + 1].clone();
        for &k in &choices[d] {
            slack[d][k] *= 1.0 - inst.p[k][cols[d]];
        }
    }

    let mut search = Search {
        inst,
        cols,
        choices: &choices,
        slack: &slack,
        top,
        row_prod: vec![1.0; levels],
        row_count: vec![0usize; levels],
        current: vec![0usize; depth],
        best: None,
    };
    search.descend(0);

    let (value, picks) = search.best.expect("the reduced space is never empty");
    let mut rows = vec![None; inst.constraints()];
    for (d, &j) in cols.iter().enumerate() {
        rows[j] = Some(picks[d]);
    }
    let matrix = AssignmentMatrix::new(levels, rows, inst.force_top);
    debug_assert_eq!(value, expected_eval_time(&matrix, inst));
    Ok(AssignmentSolution {
        breakdown: breakdown(&matrix, inst),
        expected_time: value,
        matrix,
        reduction,
        candidates,
    })
}

struct Search<'a> {
    inst: &'a AssignmentInstance,
    cols: &'a [usize],
    choices: &'a [Vec<usize>],
    slack: &'a [Vec<f64>],
    top: usize,
    row_prod: Vec<f64>,
    row_count: Vec<usize>,
    current: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn active(&self, i: usize) -> bool {
        self.row_count[i] > 0 || (self.inst.force_top && i == self.top)
    }

    // Same accumulation order as `row_costs`, so leaf values match
    // `expected_eval_time` bit for bit.
    fn leaf_value(&self) -> f64 {
        let mut reach = 1.0;
        let mut total = 0.0;
        for i in 0..self.row_prod.len() {
            total += if self.active(i) {
                self.inst.t[i] * reach
            } else {
                0.0
            };
            reach *= self.row_prod[i];
        }
        total
    }

    // Remaining columns can only switch rows on and shrink products.
    fn lower_bound(&self, d: usize) -> f64 {
        let mut reach = 1.0;
        let mut total = 0.0;
        for i in 0..self.row_prod.len() {
            if self.active(i) {
                total += self.inst.t[i] * reach;
            }
            reach *= self.row_prod[i] * self.slack[d][i];
        }
        total
    }

    fn descend(&mut self, d: usize) {
        if d == self.cols.len() {
            let v = self.leaf_value();
            if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
                self.best = Some((v, self.current.clone()));
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            if self.lower_bound(d) > b + 1e-12 * b.abs().max(1.0) {
                return;
            }
        }
        let j = self.cols[d];
        for idx in 0..self.choices[d].len() {
            let i = self.choices[d][idx];
            let saved = self.row_prod[i];
            self.row_prod[i] *= 1.0 - self.inst.p[i][j];
            self.row_count[i] += 1;
            self.current[d] = i;
            self.descend(d + 1);
            self.row_count[i] -= 1;
            self.row_prod[i] = saved;
        }
    }
}

/// Unreduced enumeration of every feasible matrix over all levels, used to
/// check the reductions. A-priori columns stay empty, as in the reduced
/// search. Returns the optimal value and the lexicographically first
/// minimizer.
pub fn brute_force_q1(inst: &AssignmentInstance) -> Result<(f64, AssignmentMatrix)> {
    inst.validate()?;
    let levels = inst.levels();
    let cols = inst.filtered_columns();
    let lows: Vec<usize> = cols
        .iter()
        .map(|&j| min_assignable_index(&inst.column(j), inst.epsilon).expect("validated"))
        .collect();
    let total = (levels as u128)
        .checked_pow(cols.len() as u32)
        .unwrap_or(u128::MAX);
    if total > BRUTE_FORCE_CAP {
        return Err(Error::BruteForceTooLarge {
            candidates: total,
            cap: BRUTE_FORCE_CAP,
        });
    }

    let mut picks = lows.clone();
    let mut best: Option<(f64, AssignmentMatrix)> = None;
    loop {
        let mut rows = vec![None; inst.constraints()];
        for (d, &j) in cols.iter().enumerate() {
            rows[j] = Some(picks[d]);
        }
        let b = AssignmentMatrix::new(levels, rows, inst.force_top);
        let v = expected_eval_time(&b, inst);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, b));
        }
        // odometer, last column fastest, so visits are in lexicographic order
        let mut d = cols.len();
        loop {
            if d == 0 {
                return Ok(best.expect("at least one candidate"));
            }
            d -= 1;
            picks[d] += 1;
            if picks[d] < levels {
                break;
            }
            picks[d] = lows[d];
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `(j, a, b)` with `i(j) <= a < b` and `p_aj < p_bj`.
    pub p_violations: Vec<(usize, usize, usize)>,
    /// `(a, b)` with `a < b` and `t_a > t_b`.
    pub t_violations: Vec<(usize, usize)>,
}

impl AssumptionReport {
    pub fn is_clean(&self) -> bool {
        self.p_violations.is_empty() && self.t_violations.is_empty()
    }
}

/// Lists the violations of the monotonicity assumptions under which the row
/// reduction is exact: violation probabilities nonincreasing from `i(j)` up,
/// and times nondecreasing in the fidelity.
pub fn check_assumptions(inst: &AssignmentInstance) -> AssumptionReport {
    let levels = inst.levels();
    let mut report = AssumptionReport::default();
    for j in inst.filtered_columns() {
        let Some(lo) = min_assignable_index(&inst.column(j), inst.epsilon) else {
            continue;
        };
        for a in lo..levels {
            for b in a + 1..levels {
                if inst.p[a][j] < inst.p[b][j] {
                    report.p_violations.push((j, a, b));
                }
            }
        }
    }
    for a in 0..levels {
        for b in a + 1..levels {
            if inst.t[a] > inst.t[b] {
                report.t_violations.push((a, b));
            }
        }
    }
    report
}
