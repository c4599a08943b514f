//! Greedy coordinate descent in the l1 norm.
//!
//! Every iteration steps on the coordinate with the largest gradient
//! magnitude by `-g_i / L`, where `L = max |A_ij|` for quadratics and
//! `M = L_f * max_i ||A^(i)||_2^2 + L_g` for affine-separable composites.
//! The step decreases the objective by at least `g_i^2 / (2L)`, and the
//! incremental bookkeeping keeps each iteration at `O(s log n)`.

use crate::error::{Error, Result};
use crate::gradient::GradientState;
use crate::problem::{CompositeProblem, QuadraticProblem, SolveOptions, StopRule};
use crate::report::{Method, SolveReport, Status, TraceRow, Tracer};

/// Residual bound `||Ax - b||_2 <= sqrt(2 lambda_max (f(x) - f*))` for a
/// symmetric PSD system.
///
/// Panics on negative input.
pub fn residual_bound(fgap: f64, lambda_max: f64) -> f64 {
    assert!(fgap >= 0.0, "negative function gap {fgap}");
    assert!(lambda_max >= 0.0, "negative eigenvalue bound {lambda_max}");
    (2.0 * lambda_max * fgap).sqrt()
}

/// A-priori iteration count `N = 2 L R1^2 / eps` for a caller-supplied
/// level-set radius `R1` (unobservable in general).
pub fn apriori_iterations(l: f64, r1: f64, eps: f64) -> f64 {
    2.0 * l * r1 * r1 / eps
}

pub fn solve_greedy(
    problem: &QuadraticProblem,
    x0: Vec<f64>,
    stop: &StopRule,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let l = problem.a().max_abs_entry();
    if l <= 0.0 {
        return Err(Error::ZeroStepConstant);
    }
    if stop.fgap_tol.is_some() && problem.known_fstar().is_none() {
        return Err(Error::MissingFstar);
    }
    let state = GradientState::init_quadratic(problem, x0, opts.refresh_period, false)?;
    run_greedy(GreedyDriver::Quadratic(problem), state, l, stop, opts)
}

pub fn solve_greedy_composite(
    problem: &CompositeProblem,
    x0: Vec<f64>,
    stop: &StopRule,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let m = problem.step_constant();
    if m <= 0.0 {
        return Err(Error::ZeroStepConstant);
    }
    if stop.fgap_tol.is_some() {
        return Err(Error::MissingFstar);
    }
    let state = GradientState::init_composite(problem, x0, opts.refresh_period)?;
    run_greedy(GreedyDriver::Composite(problem), state, m, stop, opts)
}

enum GreedyDriver<'a> {
    Quadratic(&'a QuadraticProblem),
    Composite(&'a CompositeProblem),
}

impl GreedyDriver<'_> {
    fn step(&self, state: &mut GradientState, i: usize, delta: f64) {
        match self {
            GreedyDriver::Quadratic(p) => state.step_quadratic(p, i, delta),
            GreedyDriver::Composite(p) => state.step_composite(p, i, delta),
        }
    }

    fn method(&self) -> Method {
        match self {
            GreedyDriver::Quadratic(_) => Method::Greedy,
            GreedyDriver::Composite(_) => Method::GreedyComposite,
        }
    }

    fn known_fstar(&self) -> Option<f64> {
        match self {
            GreedyDriver::Quadratic(p) => p.known_fstar(),
            GreedyDriver::Composite(_) => None,
        }
    }
}

fn run_greedy(
    driver: GreedyDriver<'_>,
    mut state: GradientState,
    step_constant: f64,
    stop: &StopRule,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let fstar = driver.known_fstar();
    let mut tracer = Tracer::new(opts.trace_every);
    let row = |state: &GradientState, k: u64, tracer: &Tracer, sel: Option<(usize, f64)>| {
        let work = state.work();
        TraceRow {
            k,
            f: state.f_value(),
            residual2: state.grad_norm2(),
            gap: fstar.map(|fs| state.f_value() - fs),
            grad_entries_touched: work.grad_entries_touched,
            heap_ops: work.heap_ops,
            tree_ops: work.tree_ops,
            wall_ms: tracer.wall_ms(),
            sel_index: sel.map(|(i, _)| i),
            sel_grad: sel.map(|(_, g)| g),
        }
    };
    tracer.push(row(&state, 0, &tracer, None));

    let mut iters = 0u64;
    let status = loop {
        if !state.f_value().is_finite() {
            return Err(Error::NonFinite { iter: iters });
        }
        let grad_inf = state.grad_inf();
        if let Some(tol) = stop.grad_inf_tol {
            if grad_inf <= tol {
                break Status::Converged;
            }
        }
        if let (Some(tol), Some(fs)) = (stop.fgap_tol, fstar) {
            if state.f_value() - fs <= tol {
                break Status::Converged;
            }
        }
        if grad_inf == 0.0 {
            // Exactly stationary; no tolerance criterion can be waiting.
            break Status::Converged;
        }
        if iters >= stop.max_iters {
            break Status::BudgetExhausted;
        }
        if let Some(limit) = stop.wall_clock_limit {
            if iters % 64 == 0 && tracer.elapsed() >= limit {
                break Status::BudgetExhausted;
            }
        }
        let i = state.top_coordinate();
        let g_i = state.g()[i];
        driver.step(&mut state, i, -g_i / step_constant);
        iters += 1;
        if tracer.due(iters) {
            tracer.push(row(&state, iters, &tracer, Some((i, g_i))));
        }
    };

    let final_row = row(&state, iters, &tracer, None);
    let report = SolveReport {
        method: driver.method(),
        status,
        iterations: iters,
        restarts: 0,
        wall_time: tracer.elapsed(),
        final_f: state.f_value(),
        final_residual2: state.grad_norm2(),
        final_gap: fstar.map(|fs| state.f_value() - fs),
        work: state.work(),
        trace: tracer.finish(final_row),
        notes: Vec::new(),
        x: state.into_x(),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{HalfSquare, ScaledSquare, ZeroFamily};
    use crate::sparse::DualSparseMatrix;

    fn diag21() -> QuadraticProblem {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 2.0), (1, 1, 1.0)], 2, 2, true).unwrap();
        QuadraticProblem::new(a, vec![2.0, 1.0]).unwrap()
    }

    #[test]
    fn hand_trace_on_diagonal_instance() {
        // Iteration 1 picks i = 0 (|g| = 2) and lands on x = (1, 0);
        // iteration 2 picks i = 1 and lands on x = (1, 0.5).
        let p = diag21();
        let stop = StopRule::budget(2);
        let opts = SolveOptions::default().with_trace_every(1);
        let rep = solve_greedy(&p, vec![0.0, 0.0], &stop, &opts).unwrap();
        assert_eq!(rep.trace[1].sel_index, Some(0));
        assert!((rep.x[0] - 1.0).abs() < 1e-15);
        assert!((rep.x[1] - 0.5).abs() < 1e-15);
        assert_eq!(rep.trace[2].sel_index, Some(1));
    }

    #[test]
    fn starts_at_solution_take_zero_iterations() {
        let p = diag21();
        let stop = StopRule::budget(100).with_grad_inf_tol(1e-12);
        let rep = solve_greedy(&p, vec![1.0, 1.0], &stop, &SolveOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.status, Status::Converged);
        assert_eq!(rep.trace.len(), 1);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let a = DualSparseMatrix::from_triples(&[], 2, 2, true).unwrap();
        let p = QuadraticProblem::new(a, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            solve_greedy(&p, vec![0.0, 0.0], &StopRule::budget(1), &SolveOptions::default()),
            Err(Error::ZeroStepConstant)
        ));
    }

    #[test]
    fn fgap_stop_requires_known_fstar() {
        let p = diag21();
        let stop = StopRule::budget(10).with_fgap_tol(1e-6);
        assert!(matches!(
            solve_greedy(&p, vec![0.0, 0.0], &stop, &SolveOptions::default()),
            Err(Error::MissingFstar)
        ));
    }

    #[test]
    fn budget_exhaustion_is_flagged_not_failed() {
        let p = diag21();
        let stop = StopRule::budget(3).with_grad_inf_tol(1e-300);
        let rep = solve_greedy(&p, vec![0.0, 0.0], &stop, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, Status::BudgetExhausted);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn single_row_composite_hand_step() {
        // A = (1 1), f(t) = t^2/2, x0 = (1, 1): g = A^T (A x) = (2, 2),
        // tie breaks to i = 0. Default step constant is
        // max_i ||A^(i)||^2 = 1, so the step is -2 and x becomes (-1, 1).
        let a = DualSparseMatrix::from_triples(&[(0, 0, 1.0), (0, 1, 1.0)], 1, 2, false).unwrap();
        let p = CompositeProblem::new(a, Box::new(HalfSquare), 1.0, Box::new(ZeroFamily), 0.0)
            .unwrap();
        assert_eq!(p.step_constant(), 1.0);
        let stop = StopRule::budget(1);
        let opts = SolveOptions::default().with_trace_every(1);
        let rep = solve_greedy_composite(&p, vec![1.0, 1.0], &stop, &opts).unwrap();
        assert_eq!(rep.trace[1].sel_index, Some(0));
        assert!((rep.x[0] - (-1.0)).abs() < 1e-15);
        assert!((rep.x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_row_composite_with_conservative_override() {
        // Same instance with the step constant overridden to ||A||_2^2 = 2:
        // the step at i = 0 is -1 and x becomes (0, 1).
        let a = DualSparseMatrix::from_triples(&[(0, 0, 1.0), (0, 1, 1.0)], 1, 2, false).unwrap();
        let p = CompositeProblem::new(a, Box::new(HalfSquare), 1.0, Box::new(ZeroFamily), 0.0)
            .unwrap()
            .with_step_constant(2.0);
        let stop = StopRule::budget(1);
        let opts = SolveOptions::default().with_trace_every(1);
        let rep = solve_greedy_composite(&p, vec![1.0, 1.0], &stop, &opts).unwrap();
        assert_eq!(rep.trace[1].sel_index, Some(0));
        assert!((rep.x[0]).abs() < 1e-15);
        assert!((rep.x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separable_quadratic_adds_to_step_constant_and_gradient() {
        let mu = 0.5;
        let a = DualSparseMatrix::from_triples(&[(0, 0, 1.0), (0, 1, 1.0)], 1, 2, false).unwrap();
        let p = CompositeProblem::new(
            a,
            Box::new(HalfSquare),
            1.0,
            Box::new(ScaledSquare { coeff: mu }),
            mu,
        )
        .unwrap();
        assert_eq!(p.step_constant(), 1.0 + mu);
        let g = p.gradient(&[1.0, 1.0]).unwrap();
        assert_eq!(g, vec![2.0 + mu, 2.0 + mu]);
    }

    #[test]
    fn residual_bound_formula() {
        assert!((residual_bound(0.02, 1.0) - 0.2).abs() < 1e-15);
        assert_eq!(residual_bound(0.0, 5.0), 0.0);
    }

    #[test]
    #[should_panic(expected = "negative function gap")]
    fn residual_bound_rejects_negative_gap() {
        residual_bound(-1.0, 1.0);
    }
}
