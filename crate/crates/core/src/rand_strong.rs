//! Randomized coordinate descent for mu-strongly convex quadratics.
//!
//! Each inner iteration samples a coordinate with probability
//! `|g_i| / ||g||_1` and steps by `-(2 / (mu (k + 1))) ||g||_1 sign(g_i)`,
//! so the expected step is the full gradient step of the underlying scheme.
//! The output point is the weighted average `y^N = 2/(N(N+1)) sum k x^k`,
//! tracked lazily as `x^N - E / T_N` with `T_k = k(k+1)/2`. Every `n` inner
//! iterations the gradient at `y` is recomputed: the run stops once
//! `||grad f(y)||_2^2 <= 2 mu eps` (which certifies `f(y) - f* <= eps`) and
//! restarts from `y` once `||grad f(y)||_1^2` has halved.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense;
use crate::error::{Error, Result};
use crate::gradient::GradientState;
use crate::problem::QuadraticProblem;
use crate::report::{Method, SolveReport, Status, TraceRow, Tracer};

#[derive(Clone, Copy, Debug)]
pub struct RscConfig {
    pub eps: f64,
    pub seed: u64,
    /// Total inner-iteration budget.
    pub budget: u64,
    pub trace_every: u64,
    pub refresh_period: u64,
    /// Restart-check cadence; defaults to `n` so the `O(nnz)` check costs
    /// `O(s)` amortized per iteration.
    pub check_every: Option<u64>,
}

impl RscConfig {
    pub fn new(eps: f64, seed: u64, budget: u64) -> Self {
        Self {
            eps,
            seed,
            budget,
            trace_every: 100,
            refresh_period: 16_384,
            check_every: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartDecision {
    Converged,
    Restarted,
    Continue,
}

/// Everything a restart check computes about the averaged iterate.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub decision: RestartDecision,
    pub y: Vec<f64>,
    pub f_y: f64,
    pub grad_norm2_sq: f64,
    pub grad_norm1_sq: f64,
}

pub struct RscState {
    grad: GradientState,
    /// Inner iterate index; the current iterate is `x^k`.
    k: u64,
    /// `E = sum_r T_r d_r` over the displacements since the anchor.
    e_acc: Vec<f64>,
    g1_l1_sq: f64,
    restarts: u64,
    /// Running `max_k ||grad f(x^k)||_1^2` since the anchor.
    max_l1_sq: f64,
}

impl RscState {
    /// Starts the method at `x0` (the paper's anchor is the origin).
    pub fn init(problem: &QuadraticProblem, x0: Vec<f64>, refresh_period: u64) -> Result<Self> {
        if problem.mu().is_none() {
            return Err(Error::MissingMu);
        }
        let grad = GradientState::init_quadratic(problem, x0, refresh_period, true)?;
        let l1 = grad.l1_norm();
        let n = grad.x().len();
        Ok(Self {
            grad,
            k: 1,
            e_acc: vec![0.0; n],
            g1_l1_sq: l1 * l1,
            restarts: 0,
            max_l1_sq: l1 * l1,
        })
    }

    pub fn grad_state(&self) -> &GradientState {
        &self.grad
    }

    pub fn inner_k(&self) -> u64 {
        self.k
    }

    pub fn restarts(&self) -> u64 {
        self.restarts
    }

    pub fn max_l1_sq(&self) -> f64 {
        self.max_l1_sq
    }

    /// One randomized step driven by the uniform draw `u in [0, 1)`.
    ///
    /// Requires `||g||_1 > 0`; the solver treats a vanished gradient as
    /// convergence before calling.
    pub fn step(&mut self, problem: &QuadraticProblem, u: f64) {
        let mu = problem.mu().expect("validated at init");
        let i = self.grad.sample_coordinate(u);
        let g_i = self.grad.g()[i];
        let sign = if g_i > 0.0 { 1.0 } else { -1.0 };
        let l1 = self.grad.l1_norm();
        let delta = -(2.0 / (mu * (self.k as f64 + 1.0))) * l1 * sign;
        self.grad.step_quadratic(problem, i, delta);
        let t_k = triangular(self.k);
        self.e_acc[i] += t_k * delta;
        self.k += 1;
        let l1_new = self.grad.l1_norm();
        self.max_l1_sq = self.max_l1_sq.max(l1_new * l1_new);
    }

    /// Materializes the weighted average `y^k = x^k - E / T_k` in `O(n)`.
    pub fn average(&self) -> Vec<f64> {
        let t_k = triangular(self.k);
        self.grad
            .x()
            .iter()
            .zip(&self.e_acc)
            .map(|(&x, &e)| x - e / t_k)
            .collect()
    }

    /// Evaluates the averaged iterate from scratch and decides between
    /// convergence (`||grad f(y)||_2^2 <= 2 mu eps`), restart
    /// (`||grad f(y)||_1^2 <= g1_l1_sq / 2`, boundary inclusive) and
    /// continuing.
    pub fn check_restart(&mut self, problem: &QuadraticProblem, eps: f64) -> CheckOutcome {
        let mu = problem.mu().expect("validated at init");
        let y = self.average();
        let gy = problem
            .gradient(&y)
            .expect("state dimensions match the problem");
        self.grad.add_scratch_entries(problem.a().nnz() as u64);
        let n2 = dense::norm2_sq(&gy);
        let n1 = dense::norm1(&gy);
        let f_y = 0.5 * (dense::dot(&gy, &y) - dense::dot(problem.b(), &y));
        let decision = if n2 <= 2.0 * mu * eps {
            RestartDecision::Converged
        } else if n1 * n1 <= 0.5 * self.g1_l1_sq {
            // The restart reuses the scratch gradient just computed, so the
            // rebuild costs O(n) on top of the check's O(nnz).
            let period = self.grad.refresh_period();
            self.grad =
                GradientState::from_parts_quadratic(problem, y.clone(), gy.clone(), period, true);
            self.k = 1;
            self.e_acc.fill(0.0);
            self.g1_l1_sq = n1 * n1;
            self.max_l1_sq = n1 * n1;
            self.restarts += 1;
            RestartDecision::Restarted
        } else {
            RestartDecision::Continue
        };
        CheckOutcome {
            decision,
            y,
            f_y,
            grad_norm2_sq: n2,
            grad_norm1_sq: n1 * n1,
        }
    }
}

fn triangular(k: u64) -> f64 {
    (k as f64) * (k as f64 + 1.0) / 2.0
}

/// Full solver: inner steps with restart checks every `n` iterations until
/// the strong-convexity certificate clears `eps` or the budget is spent.
/// Deterministic for a fixed seed.
pub fn rsc_solve(problem: &QuadraticProblem, cfg: &RscConfig) -> Result<SolveReport> {
    let n = problem.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty problem".into()));
    }
    let mut state = RscState::init(problem, vec![0.0; n], cfg.refresh_period)?;
    let check_every = cfg.check_every.unwrap_or(n as u64).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracer = Tracer::new(cfg.trace_every);

    let row = |state: &RscState, k: u64, tracer: &Tracer, f: f64, res: f64| {
        let work = state.grad.work();
        TraceRow {
            k,
            f,
            residual2: res,
            gap: Some(res),
            grad_entries_touched: work.grad_entries_touched,
            heap_ops: work.heap_ops,
            tree_ops: work.tree_ops,
            wall_ms: tracer.wall_ms(),
            sel_index: None,
            sel_grad: None,
        }
    };
    tracer.push(row(
        &state,
        0,
        &tracer,
        state.grad.f_value(),
        state.grad.grad_norm2(),
    ));

    let mut total = 0u64;
    let mut best: Option<(Vec<f64>, f64, f64)> = None; // (y, f_y, ||gy||_2)
    let status = loop {
        if state.grad.l1_norm() <= 0.0 {
            // Exactly stationary iterate: it is the optimum.
            let x = state.grad.x().to_vec();
            let f = state.grad.f_value();
            best = Some((x, f, 0.0));
            break Status::Converged;
        }
        if total >= cfg.budget {
            let out = state.check_restart(problem, cfg.eps);
            let res = out.grad_norm2_sq.sqrt();
            if best.as_ref().map_or(true, |(_, bf, _)| out.f_y < *bf) {
                best = Some((out.y, out.f_y, res));
            }
            break Status::BudgetExhausted;
        }
        let u = rng.random::<f64>();
        state.step(problem, u);
        total += 1;
        if tracer.due(total) {
            tracer.push(row(
                &state,
                total,
                &tracer,
                state.grad.f_value(),
                state.grad.grad_norm2(),
            ));
        }
        if total % check_every == 0 {
            let out = state.check_restart(problem, cfg.eps);
            let res = out.grad_norm2_sq.sqrt();
            if best.as_ref().map_or(true, |(_, bf, _)| out.f_y < *bf) {
                best = Some((out.y.clone(), out.f_y, res));
            }
            if out.decision == RestartDecision::Converged {
                best = Some((out.y, out.f_y, res));
                break Status::Converged;
            }
        }
    };

    let (y, f_y, res) = best.expect("a check ran before termination");
    let final_row = row(&state, total, &tracer, f_y, res);
    Ok(SolveReport {
        method: Method::Rsc,
        status,
        iterations: total,
        restarts: state.restarts,
        wall_time: tracer.elapsed(),
        final_f: f_y,
        final_residual2: res,
        final_gap: Some(res),
        work: state.grad.work(),
        trace: tracer.finish(final_row),
        notes: Vec::new(),
        x: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::DualSparseMatrix;

    fn identity_problem(n: usize, b: Vec<f64>) -> QuadraticProblem {
        let triples: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        let a = DualSparseMatrix::from_triples(&triples, n, n, true).unwrap();
        QuadraticProblem::new(a, b).unwrap().with_mu(1.0).unwrap()
    }

    #[test]
    fn sampling_probabilities_normalize() {
        // g = (-1, 3): probabilities (0.25, 0.75).
        let p = identity_problem(2, vec![1.0, -3.0]);
        let st = RscState::init(&p, vec![0.0, 0.0], 1024).unwrap();
        assert_eq!(st.grad.g(), &[-1.0, 3.0]);
        assert_eq!(st.grad.sample_coordinate(0.2), 0);
        assert_eq!(st.grad.sample_coordinate(0.25), 1);
        assert_eq!(st.grad.sample_coordinate(0.9), 1);
    }

    #[test]
    fn step_magnitude_matches_formula() {
        // g = (-1, 3), mu = 1, k = 1, sampled i = 1:
        // delta = -(2/2) * 4 * sign(3) = -4.
        let p = identity_problem(2, vec![1.0, -3.0]);
        let mut st = RscState::init(&p, vec![0.0, 0.0], 1024).unwrap();
        st.step(&p, 0.5); // 0.5 * 4 = 2 >= 1 -> coordinate 1
        assert_eq!(st.grad.x(), &[0.0, -4.0]);
    }

    #[test]
    fn expected_step_is_unbiased_exactly() {
        // l1 = 4 is a power of two, so p_i * delta_i reproduces
        // -(2/(mu(k+1))) g_i without rounding.
        let g = [-1.0f64, 3.0];
        let mu = 1.0;
        let k = 1u64;
        let l1: f64 = g.iter().map(|v| v.abs()).sum();
        let coeff = 2.0 / (mu * (k as f64 + 1.0));
        for (i, &gi) in g.iter().enumerate() {
            let p_i = gi.abs() / l1;
            let delta_i = -coeff * l1 * gi.signum();
            assert_eq!(p_i * delta_i, -coeff * g[i], "coordinate {i}");
        }
    }

    #[test]
    fn lazy_average_matches_hand_example() {
        // One displacement d1 = +2 on coordinate 0 from x1 = 0: the average
        // of (x1, x2) with weights (1, 2) is (0 + 2 * 2) / 3 = 4/3; lazily,
        // x2 - E/T2 = 2 - 2/3.
        let p = identity_problem(1, vec![-2.0]);
        let mut st = RscState::init(&p, vec![0.0], 1024).unwrap();
        st.grad.step_quadratic(&p, 0, 2.0);
        st.e_acc[0] += triangular(1) * 2.0;
        st.k += 1;
        let y = st.average();
        assert!((y[0] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn average_with_no_steps_is_anchor() {
        let p = identity_problem(2, vec![1.0, 1.0]);
        let st = RscState::init(&p, vec![0.5, -0.5], 1024).unwrap();
        assert_eq!(st.average(), vec![0.5, -0.5]);
    }

    #[test]
    fn restart_boundary_is_inclusive() {
        let p = identity_problem(2, vec![2.0, 0.0]);
        let mut st = RscState::init(&p, vec![0.0, 0.0], 1024).unwrap();
        // ||g(x1)||_1^2 = 4; fake an anchor norm of twice that so the
        // halving test sits exactly on the boundary.
        st.g1_l1_sq = 8.0;
        let out = st.check_restart(&p, 1e-12);
        assert_eq!(out.grad_norm1_sq, 4.0);
        assert_eq!(out.decision, RestartDecision::Restarted);
        assert_eq!(st.restarts(), 1);
        assert_eq!(st.inner_k(), 1);
    }

    #[test]
    fn zero_gradient_converges_at_check() {
        let p = identity_problem(2, vec![1.0, 0.0]);
        let mut st = RscState::init(&p, vec![1.0, 0.0], 1024).unwrap();
        let out = st.check_restart(&p, 1e-9);
        assert_eq!(out.decision, RestartDecision::Converged);
        assert_eq!(out.grad_norm2_sq, 0.0);
    }

    #[test]
    fn identity_instance_reaches_eps() {
        // A = I, b = e_1: x* = e_1, f* = -1/2.
        let p = identity_problem(8, {
            let mut b = vec![0.0; 8];
            b[0] = 1.0;
            b
        });
        let cfg = RscConfig::new(1e-6, 7, 2_000_000);
        let rep = rsc_solve(&p, &cfg).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert!(rep.final_f - (-0.5) <= 1e-6 + 1e-12, "f = {}", rep.final_f);
    }

    #[test]
    fn already_optimal_start_converges_without_restarts() {
        // b = 0: x = 0 is stationary immediately.
        let p = identity_problem(4, vec![0.0; 4]);
        let cfg = RscConfig::new(1e-9, 1, 1000);
        let rep = rsc_solve(&p, &cfg).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.restarts, 0);
    }

    #[test]
    fn identical_seeds_reproduce_traces() {
        let p = identity_problem(16, {
            let mut b = vec![0.0; 16];
            b[0] = 2.0;
            b[5] = -1.0;
            b
        });
        let cfg = RscConfig {
            trace_every: 1,
            ..RscConfig::new(1e-5, 99, 5000)
        };
        let a = rsc_solve(&p, &cfg).unwrap();
        let b2 = rsc_solve(&p, &cfg).unwrap();
        assert_eq!(a.iterations, b2.iterations);
        assert_eq!(a.restarts, b2.restarts);
        assert_eq!(a.x, b2.x);
        for (ra, rb) in a.trace.iter().zip(&b2.trace) {
            assert_eq!(ra.f.to_bits(), rb.f.to_bits());
            assert_eq!(ra.residual2.to_bits(), rb.residual2.to_bits());
        }
    }

    #[test]
    fn missing_mu_is_rejected() {
        let a = DualSparseMatrix::from_triples(&[(0, 0, 1.0)], 1, 1, true).unwrap();
        let p = QuadraticProblem::new(a, vec![1.0]).unwrap();
        assert!(matches!(
            RscState::init(&p, vec![0.0], 1024),
            Err(Error::MissingMu)
        ));
    }
}
