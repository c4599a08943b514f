//! Incrementally maintained gradient state.
//!
//! A single coordinate step changes the gradient of a doubly sparse
//! quadratic in at most `s` components (and of a composite objective in at
//! most `s_m * s_n`), so the iterate, gradient, heap keys, sampling weights
//! and objective value are all patched in place instead of recomputed.
//! Periodic full refreshes cap floating-point drift and double as a
//! fidelity check of the incremental bookkeeping.

use crate::dense;
use crate::error::{Error, Result};
use crate::heap::{HeapOrder, IndexedHeap};
use crate::problem::{CompositeProblem, QuadraticProblem};
use crate::report::WorkCounters;
use crate::sumtree::SumTree;

/// Incremental fidelity budget checked at every refresh:
/// `||g_inc - g_scratch||_inf <= 1e-9 * (1 + ||g_scratch||_inf)`.
pub const REFRESH_REL_TOL: f64 = 1e-9;

pub struct GradientState {
    x: Vec<f64>,
    g: Vec<f64>,
    /// Composite inner products `u = Ax` (length `m`); empty for quadratics.
    inner: Vec<f64>,
    heap: IndexedHeap,
    tree: Option<SumTree>,
    l1_norm_g: f64,
    g_sq_sum: f64,
    f_value: f64,
    grad_entries_touched: u64,
    full_refreshes: u64,
    refresh_period: u64,
    steps_since_refresh: u64,
    steps_total: u64,
    max_refresh_rel_dev: f64,
    refresh_violations: u64,
}

impl GradientState {
    /// Builds the state for a quadratic problem from scratch: one sparse
    /// product plus `O(n)` index-structure construction.
    pub fn init_quadratic(
        problem: &QuadraticProblem,
        x0: Vec<f64>,
        refresh_period: u64,
        with_tree: bool,
    ) -> Result<Self> {
        let g = problem.gradient(&x0)?;
        Ok(Self::assemble(x0, g, refresh_period, with_tree, problem))
    }

    /// Builds the state around a precomputed gradient, avoiding the sparse
    /// product (used by restarts that already evaluated `A y - b`).
    pub fn from_parts_quadratic(
        problem: &QuadraticProblem,
        x: Vec<f64>,
        g: Vec<f64>,
        refresh_period: u64,
        with_tree: bool,
    ) -> Self {
        Self::assemble(x, g, refresh_period, with_tree, problem)
    }

    fn assemble(
        x: Vec<f64>,
        g: Vec<f64>,
        refresh_period: u64,
        with_tree: bool,
        problem: &QuadraticProblem,
    ) -> Self {
        let keys: Vec<f64> = g.iter().map(|v| v.abs()).collect();
        let tree = with_tree.then(|| SumTree::new(&keys));
        let l1_norm_g = keys.iter().sum();
        let g_sq_sum = dense::norm2_sq(&g);
        let f_value = quadratic_f_from_gradient(&g, &x, problem.b());
        Self {
            x,
            g,
            inner: Vec::new(),
            heap: IndexedHeap::new(keys, HeapOrder::Max),
            tree,
            l1_norm_g,
            g_sq_sum,
            f_value,
            grad_entries_touched: 0,
            full_refreshes: 0,
            refresh_period: refresh_period.max(1),
            steps_since_refresh: 0,
            steps_total: 0,
            max_refresh_rel_dev: 0.0,
            refresh_violations: 0,
        }
    }

    /// Builds composite state: inner products, gradient and objective from
    /// scratch.
    pub fn init_composite(
        problem: &CompositeProblem,
        x0: Vec<f64>,
        refresh_period: u64,
    ) -> Result<Self> {
        let inner = problem.a().apply(&x0)?;
        let (g, f_value) = composite_scratch(problem, &x0, &inner);
        let keys: Vec<f64> = g.iter().map(|v| v.abs()).collect();
        let l1_norm_g = keys.iter().sum();
        let g_sq_sum = dense::norm2_sq(&g);
        Ok(Self {
            x: x0,
            g,
            inner,
            heap: IndexedHeap::new(keys, HeapOrder::Max),
            tree: None,
            l1_norm_g,
            g_sq_sum,
            f_value,
            grad_entries_touched: 0,
            full_refreshes: 0,
            refresh_period: refresh_period.max(1),
            steps_since_refresh: 0,
            steps_total: 0,
            max_refresh_rel_dev: 0.0,
            refresh_violations: 0,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn into_x(self) -> Vec<f64> {
        self.x
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn f_value(&self) -> f64 {
        self.f_value
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm_g
    }

    pub fn grad_norm2(&self) -> f64 {
        self.g_sq_sum.max(0.0).sqrt()
    }

    /// Coordinate with the largest `|g_i|` (smallest index on ties).
    pub fn top_coordinate(&self) -> usize {
        self.heap.top()
    }

    /// `||g||_inf` read off the heap top.
    pub fn grad_inf(&self) -> f64 {
        self.heap.key(self.heap.top())
    }

    /// Draws a coordinate with probability `|g_i| / ||g||_1`.
    ///
    /// Panics when the state was built without a tree.
    pub fn sample_coordinate(&self, u: f64) -> usize {
        self.tree
            .as_ref()
            .expect("gradient state built without a sampling tree")
            .sample(u)
    }

    pub fn steps_total(&self) -> u64 {
        self.steps_total
    }

    pub fn refresh_period(&self) -> u64 {
        self.refresh_period
    }

    pub fn work(&self) -> WorkCounters {
        WorkCounters {
            grad_entries_touched: self.grad_entries_touched,
            heap_ops: self.heap.touched_nodes(),
            tree_ops: self.tree.as_ref().map_or(0, |t| t.touched_nodes()),
            full_refreshes: self.full_refreshes,
        }
    }

    /// Number of heap key updates (not touched nodes) so far.
    pub fn heap_updates(&self) -> u64 {
        self.heap.updates()
    }

    /// Worst observed refresh deviation, relative:
    /// `||g_inc - g_scratch||_inf / (1 + ||g_scratch||_inf)`.
    pub fn max_refresh_rel_dev(&self) -> f64 {
        self.max_refresh_rel_dev
    }

    /// Refreshes whose deviation exceeded [`REFRESH_REL_TOL`].
    pub fn refresh_violations(&self) -> u64 {
        self.refresh_violations
    }

    /// Adds scratch-gradient work (restart checks) to the touched counter.
    pub fn add_scratch_entries(&mut self, entries: u64) {
        self.grad_entries_touched += entries;
    }

    fn write_g(&mut self, j: usize, new: f64) {
        let old = self.g[j];
        self.g[j] = new;
        self.l1_norm_g += new.abs() - old.abs();
        self.g_sq_sum += new * new - old * old;
        self.heap.update(j, new.abs());
        if let Some(tree) = &mut self.tree {
            tree.set(j, new.abs());
        }
        self.grad_entries_touched += 1;
    }

    /// Quadratic coordinate step `x_i += delta`: patches the gradient along
    /// column `i`, touching `nnz(A^(i))` entries.
    pub fn step_quadratic(&mut self, problem: &QuadraticProblem, i: usize, delta: f64) {
        let g_i = self.g[i];
        let a_ii = problem.a().diag(i);
        // f(x + d e_i) = f(x) + d g_i + d^2 A_ii / 2
        self.f_value += delta * g_i + 0.5 * delta * delta * a_ii;
        self.x[i] += delta;
        for &(j, a_ji) in problem.a().col(i) {
            self.write_g(j, self.g[j] + delta * a_ji);
        }
        self.steps_total += 1;
        self.steps_since_refresh += 1;
        if self.steps_since_refresh >= self.refresh_period {
            self.refresh_quadratic(problem);
        }
    }

    /// Composite coordinate step: patches `u_k` for every row in column `i`,
    /// then the gradient of every column in those rows, touching at most
    /// `s_m * s_n` entries.
    pub fn step_composite(&mut self, problem: &CompositeProblem, i: usize, delta: f64) {
        let x_old = self.x[i];
        let x_new = x_old + delta;
        self.x[i] = x_new;
        let sep = problem.separable();
        let mut df = sep.value(i, x_new) - sep.value(i, x_old);
        let sep_slope_delta = sep.deriv(i, x_new) - sep.deriv(i, x_old);
        let col_empty = problem.a().col(i).is_empty();
        if col_empty {
            self.write_g(i, self.g[i] + sep_slope_delta);
        } else {
            // Column i occurs in each affected row, so g_i is rewritten by
            // the row sweeps below; fold the separable slope in beforehand
            // without charging an extra touched entry.
            self.g[i] += sep_slope_delta;
            let outer = problem.outer();
            for &(k, a_ki) in problem.a().col(i) {
                let t_old = self.inner[k];
                let t_new = t_old + delta * a_ki;
                self.inner[k] = t_new;
                df += outer.value(k, t_new) - outer.value(k, t_old);
                let slope_delta = outer.deriv(k, t_new) - outer.deriv(k, t_old);
                for &(j, a_kj) in problem.a().row(k) {
                    self.write_g(j, self.g[j] + a_kj * slope_delta);
                }
            }
        }
        self.f_value += df;
        self.steps_total += 1;
        self.steps_since_refresh += 1;
        if self.steps_since_refresh >= self.refresh_period {
            self.refresh_composite(problem);
        }
    }

    /// Recomputes gradient, objective and index structures from scratch and
    /// records how far the incremental gradient had drifted.
    pub fn refresh_quadratic(&mut self, problem: &QuadraticProblem) {
        let g_scratch = problem
            .gradient(&self.x)
            .expect("state dimensions match the problem");
        self.record_refresh_dev(&g_scratch);
        self.g = g_scratch;
        self.f_value = quadratic_f_from_gradient(&self.g, &self.x, problem.b());
        self.rebuild_indexes();
    }

    /// Composite counterpart of [`Self::refresh_quadratic`].
    pub fn refresh_composite(&mut self, problem: &CompositeProblem) {
        self.inner = problem
            .a()
            .apply(&self.x)
            .expect("state dimensions match the problem");
        let (g_scratch, f_scratch) = composite_scratch(problem, &self.x, &self.inner);
        self.record_refresh_dev(&g_scratch);
        self.g = g_scratch;
        self.f_value = f_scratch;
        self.rebuild_indexes();
    }

    fn record_refresh_dev(&mut self, g_scratch: &[f64]) {
        let mut dev = 0.0f64;
        for (inc, scr) in self.g.iter().zip(g_scratch) {
            dev = dev.max((inc - scr).abs());
        }
        let rel = dev / (1.0 + dense::norm_inf(g_scratch));
        self.max_refresh_rel_dev = self.max_refresh_rel_dev.max(rel);
        if rel > REFRESH_REL_TOL {
            self.refresh_violations += 1;
        }
    }

    fn rebuild_indexes(&mut self) {
        let keys: Vec<f64> = self.g.iter().map(|v| v.abs()).collect();
        self.l1_norm_g = keys.iter().sum();
        self.g_sq_sum = dense::norm2_sq(&self.g);
        self.heap.rebuild(&keys);
        if let Some(tree) = &mut self.tree {
            *tree = SumTree::new(&keys);
        }
        self.full_refreshes += 1;
        self.steps_since_refresh = 0;
    }
}

/// `f(x) = (<g, x> - <b, x>) / 2` given `g = Ax - b` for a symmetric `A`.
fn quadratic_f_from_gradient(g: &[f64], x: &[f64], b: &[f64]) -> f64 {
    0.5 * (dense::dot(g, x) - dense::dot(b, x))
}

fn composite_scratch(problem: &CompositeProblem, x: &[f64], inner: &[f64]) -> (Vec<f64>, f64) {
    let outer = problem.outer();
    let sep = problem.separable();
    let mut f = 0.0;
    let slopes: Vec<f64> = inner
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            f += outer.value(k, t);
            outer.deriv(k, t)
        })
        .collect();
    let mut g = problem
        .a()
        .apply_transpose(&slopes)
        .expect("state dimensions match the problem");
    for (i, gi) in g.iter_mut().enumerate() {
        *gi += sep.deriv(i, x[i]);
        f += sep.value(i, x[i]);
    }
    (g, f)
}

/// Validates scalar-oracle derivatives against central finite differences at
/// the given probe points; returns the worst relative deviation.
pub fn oracle_fd_deviation(family: &dyn ScalarFamilyProbe, k: usize, probes: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &t in probes {
        let h = 1e-6 * (1.0 + t.abs());
        let fd = (family.value_at(k, t + h) - family.value_at(k, t - h)) / (2.0 * h);
        let an = family.deriv_at(k, t);
        worst = worst.max((fd - an).abs() / (1.0 + an.abs()));
    }
    worst
}

/// Object-safe probe view of a [`crate::problem::ScalarFamily`].
pub trait ScalarFamilyProbe {
    fn value_at(&self, k: usize, t: f64) -> f64;
    fn deriv_at(&self, k: usize, t: f64) -> f64;
}

impl<T: crate::problem::ScalarFamily + ?Sized> ScalarFamilyProbe for T {
    fn value_at(&self, k: usize, t: f64) -> f64 {
        self.value(k, t)
    }

    fn deriv_at(&self, k: usize, t: f64) -> f64 {
        self.deriv(k, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{HalfSquare, ZeroFamily};
    use crate::sparse::DualSparseMatrix;

    fn diag21() -> QuadraticProblem {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 2.0), (1, 1, 1.0)], 2, 2, true).unwrap();
        QuadraticProblem::new(a, vec![2.0, 1.0]).unwrap()
    }

    #[test]
    fn init_computes_gradient_and_heap() {
        let p = diag21();
        let st = GradientState::init_quadratic(&p, vec![0.0, 0.0], 1024, false).unwrap();
        assert_eq!(st.g(), &[-2.0, -1.0]);
        assert_eq!(st.top_coordinate(), 0);
        assert_eq!(st.f_value(), 0.0);
    }

    #[test]
    fn init_at_solution_is_stationary() {
        let p = diag21();
        let st = GradientState::init_quadratic(&p, vec![1.0, 1.0], 1024, false).unwrap();
        assert_eq!(st.g(), &[0.0, 0.0]);
        assert_eq!(st.grad_inf(), 0.0);
    }

    #[test]
    fn init_composite_matches_hand_computation() {
        // A = [[1, 1], [0, 1]], f_k(t) = t^2/2, g_i = 0, x0 = (1, 1)
        let a = DualSparseMatrix::from_triples(&[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)], 2, 2, false)
            .unwrap();
        let p = CompositeProblem::new(a, Box::new(HalfSquare), 1.0, Box::new(ZeroFamily), 0.0)
            .unwrap();
        let st = GradientState::init_composite(&p, vec![1.0, 1.0], 1024).unwrap();
        assert_eq!(st.inner, vec![2.0, 1.0]);
        assert_eq!(st.g(), &[2.0, 3.0]);
    }

    #[test]
    fn quadratic_step_touches_column_nnz() {
        let p = diag21();
        let mut st = GradientState::init_quadratic(&p, vec![0.0, 0.0], 1024, false).unwrap();
        st.step_quadratic(&p, 0, 1.0);
        assert_eq!(st.g(), &[0.0, -1.0]);
        assert_eq!(st.work().grad_entries_touched, 1);
        assert_eq!(st.x(), &[1.0, 0.0]);
    }

    #[test]
    fn zero_step_only_moves_counters() {
        let p = diag21();
        let mut st = GradientState::init_quadratic(&p, vec![0.5, 0.5], 1024, false).unwrap();
        let (x, g, f) = (st.x().to_vec(), st.g().to_vec(), st.f_value());
        st.step_quadratic(&p, 1, 0.0);
        assert_eq!(st.x(), &x[..]);
        assert_eq!(st.g(), &g[..]);
        assert_eq!(st.f_value(), f);
        assert_eq!(st.work().grad_entries_touched, 1);
    }

    #[test]
    fn step_counters_equal_column_nnz() {
        // Column 0 has 3 nonzeros.
        let a = DualSparseMatrix::from_triples(
            &[(0, 0, 2.0), (1, 0, 0.5), (2, 0, 0.25), (1, 1, 1.0), (2, 2, 1.0)],
            3,
            3,
            true,
        )
        .unwrap();
        let p = QuadraticProblem::new(a, vec![0.0, 0.0, 0.0]).unwrap();
        let mut st = GradientState::init_quadratic(&p, vec![0.0; 3], 1024, false).unwrap();
        let updates_before = st.heap_updates();
        st.step_quadratic(&p, 0, 1.0);
        assert_eq!(st.work().grad_entries_touched, 3);
        assert_eq!(st.heap_updates() - updates_before, 3);
    }

    #[test]
    fn refresh_reports_no_violation_on_exact_state() {
        let p = diag21();
        let mut st = GradientState::init_quadratic(&p, vec![0.0, 0.0], 4, false).unwrap();
        for _ in 0..10 {
            let i = st.top_coordinate();
            let delta = -st.g()[i] / p.a().max_abs_entry();
            st.step_quadratic(&p, i, delta);
        }
        assert!(st.work().full_refreshes >= 2);
        assert_eq!(st.refresh_violations(), 0);
        assert!(st.max_refresh_rel_dev() <= REFRESH_REL_TOL);
    }

    #[test]
    fn oracle_derivatives_match_finite_differences() {
        let probes = [-2.0, -0.3, 0.0, 0.7, 4.2];
        assert!(oracle_fd_deviation(&HalfSquare, 0, &probes) <= 1e-6);
        assert!(oracle_fd_deviation(&ZeroFamily, 0, &probes) <= 1e-6);
        let shifted = crate::problem::ShiftedHalfSquare {
            shifts: vec![0.5, -1.0],
        };
        assert!(oracle_fd_deviation(&shifted, 1, &probes) <= 1e-6);
        let scaled = crate::problem::ScaledSquare { coeff: 2.5 };
        assert!(oracle_fd_deviation(&scaled, 0, &probes) <= 1e-6);
    }
}
