//! Conditional gradient on the scaled corner simplex
//! `S_n(R) = {x >= 0, sum x_i <= R}`.
//!
//! The convex-combination step `x^{k+1} = (1 - gamma_k) x^k + gamma_k y^k`
//! is rewritten through `beta_k = prod_{r<k} (1 - gamma_r)`, `z^k = x^k /
//! beta_k` as the sparse additive update `z^{k+1} = z^k + gamma_k /
//! beta_{k+1} * y^k`, so one iteration touches a single matrix column plus
//! the support of `b`. A running lower bound `max_k {f(x^k) + <grad f(x^k),
//! y^k - x^k>}` certifies the gap without extra passes, and geometric
//! restarts `R <- chi R` handle an unknown radius at a bounded overhead in
//! total iterations.

use std::time::Instant;

use crate::dense;
use crate::error::{Error, Result};
use crate::heap::{HeapOrder, IndexedHeap};
use crate::problem::{LsProblem, QuadraticProblem};
use crate::report::{Method, SolveReport, Status, TraceRow, Tracer, WorkCounters};

/// Renormalize `z <- beta z, beta <- 1` past this magnitude to keep the
/// reparameterization inside comfortable double range.
const Z_RENORM_THRESHOLD: f64 = 1e12;

/// Slack used by the internal convexity diagnostics.
const DIAG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `gamma_k = 2 / (k + 1)`; the first step is handled separately since
    /// `gamma_1 = 1` collapses `beta_2` to zero.
    Classic,
    /// `gamma_k = 2 / (k + 2)`; `beta_k = 2 / (k (k + 1))` in closed form.
    Shifted,
}

impl Schedule {
    pub fn gamma(self, k: u64) -> f64 {
        match self {
            Schedule::Classic => 2.0 / (k as f64 + 1.0),
            Schedule::Shifted => 2.0 / (k as f64 + 2.0),
        }
    }

    /// Gap-bound numerator constant with `R_1^2 = 4 R^2` folded in:
    /// classic `2 L1 (2R)^2 / (k+1) = 8 L1 R^2 / (k+1)`, shifted
    /// `7 L1 (4 R^2) / (k+2) = 28 L1 R^2 / (k+2)`.
    pub fn bound_constant(self) -> f64 {
        match self {
            Schedule::Classic => 8.0,
            Schedule::Shifted => 28.0,
        }
    }

    fn bound_shift(self) -> f64 {
        match self {
            Schedule::Classic => 1.0,
            Schedule::Shifted => 2.0,
        }
    }

    /// Theoretical gap bound after `k` iterations at radius `r`.
    pub fn gap_bound(self, l1: f64, r: f64, k: u64) -> f64 {
        self.bound_constant() * l1 * r * r / (k as f64 + self.bound_shift())
    }
}

#[derive(Clone, Debug)]
pub struct FwConfig {
    pub schedule: Schedule,
    /// Initial radius for the restart procedure.
    pub r0: f64,
    /// Geometric growth factor for restarts; sqrt(2) minimizes the
    /// worst-case total-iteration overhead (factor 4).
    pub chi: f64,
    pub eps: f64,
    pub max_outer_restarts: u32,
    /// Iteration budget of a single fixed-radius run.
    pub max_iters_per_r: u64,
    /// Stop a fixed-radius run as soon as the certificate clears `eps`.
    /// Disable to measure full prescribed budgets.
    pub early_exit: bool,
    pub trace_every: u64,
    /// Keep every materialized iterate (small problems only; used by
    /// equivalence tests).
    pub record_iterates: bool,
}

impl Default for FwConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::Shifted,
            r0: 1.0,
            chi: std::f64::consts::SQRT_2,
            eps: 1e-6,
            max_outer_restarts: 40,
            max_iters_per_r: 10_000_000,
            early_exit: true,
            trace_every: 100,
            record_iterates: false,
        }
    }
}

impl FwConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "chi = {} must be > 1",
                self.chi
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps = {} must be > 0",
                self.eps
            )));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r0 = {} must be > 0",
                self.r0
            )));
        }
        Ok(())
    }
}

/// Solution of the linear minimization oracle over `S_n(R)`: the origin or
/// a scaled axis vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vertex {
    Origin,
    Axis(usize),
}

/// Linear minimization oracle by key inspection: the argmin coordinate
/// (smallest index on ties) gives `R e_i` when its key is strictly
/// negative, otherwise the origin wins.
pub fn lp_vertex(keys: &[f64]) -> Vertex {
    let mut best = 0usize;
    for (i, &k) in keys.iter().enumerate().skip(1) {
        if k < keys[best] {
            best = i;
        }
    }
    if !keys.is_empty() && keys[best] < 0.0 {
        Vertex::Axis(best)
    } else {
        Vertex::Origin
    }
}

/// Certificate-side summary of a fixed-radius run.
#[derive(Clone, Debug)]
pub struct FwOutcome {
    /// `min_k f(x^k) - best_lb`, the observable optimality gap.
    pub gap: f64,
    pub best_lb: f64,
    pub f_min: f64,
    /// Gap cleared `eps`.
    pub certified: bool,
    /// Known-f* stopping path cleared `eps`.
    pub fgap_hit: bool,
    pub iterates: Option<Vec<Vec<f64>>>,
}

impl FwOutcome {
    pub fn success(&self) -> bool {
        self.certified || self.fgap_hit
    }
}

/// Prescribed iteration budget for one fixed-radius stage.
pub fn stage_budget(schedule: Schedule, l1: f64, radius: f64, eps: f64) -> u64 {
    (schedule.bound_constant() * l1 * radius * radius / eps)
        .ceil()
        .max(1.0) as u64
}

/// Fixed-radius Frank-Wolfe for `f(x) = 1/2 <Ax, x> - <b, x>` on `S_n(R)`,
/// started at the origin vertex.
pub fn fw_solve_fixed_r(
    problem: &QuadraticProblem,
    radius: f64,
    cfg: &FwConfig,
) -> Result<(SolveReport, FwOutcome)> {
    cfg.validate()?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius = {radius} must be > 0"
        )));
    }
    let a = problem.a();
    let b = problem.b();
    let n = problem.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty problem".into()));
    }

    let b_support: Vec<usize> = (0..n).filter(|&i| b[i] != 0.0).collect();
    let scan_mode = b_support.len() > a.s_col();
    let bb = dense::norm2_sq(b);

    let mut z = vec![0.0f64; n];
    let mut p_vec = vec![0.0f64; n];
    let mut beta = 1.0f64;
    let mut q = 0.0f64; // <Az, z>
    let mut r_dot = 0.0f64; // <b, z>
    let mut pp = 0.0f64; // <p, p>
    let mut pb = 0.0f64; // <p, b>
    let mut z_inf = 0.0f64;

    let mut heap = (!scan_mode).then(|| {
        let keys: Vec<f64> = (0..n).map(|i| -b[i]).collect();
        IndexedHeap::new(keys, HeapOrder::Min)
    });

    let mut notes = Vec::new();
    if scan_mode {
        notes.push(format!(
            "dense rhs (nnz = {}): full argmin scan per iteration instead of the heap",
            b_support.len()
        ));
    }

    let mut tracer = Tracer::new(cfg.trace_every);
    let mut iterates = cfg.record_iterates.then(|| vec![vec![0.0; n]]);
    let mut grad_entries = 0u64;
    let mut full_refreshes = 0u64;
    let mut best_lb = f64::NEG_INFINITY;
    let mut f_min = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut steps = 0u64;
    let mut fgap_hit = false;
    let mut nonpsd_noted = false;

    let status = loop {
        // Oracle and certificate at the current iterate x = beta z.
        let (i_star, key_star) = if let Some(h) = &heap {
            let t = h.top();
            (t, h.key(t))
        } else {
            let mut best = 0usize;
            let mut best_key = p_vec[0] - b[0] / beta;
            for i in 1..n {
                let key = p_vec[i] - b[i] / beta;
                if key < best_key {
                    best = i;
                    best_key = key;
                }
            }
            (best, best_key)
        };
        let partial = beta * key_star;
        let take_vertex = partial < 0.0;
        let f_now = 0.5 * beta * beta * q - beta * r_dot;
        if !f_now.is_finite() {
            return Err(Error::NonFinite { iter: steps });
        }
        let y_term = if take_vertex { radius * partial } else { 0.0 };
        let lb = y_term - 0.5 * beta * beta * q;
        if lb > best_lb {
            best_lb = lb;
        }
        if f_now < f_min {
            f_min = f_now;
        }
        gap = f_min - best_lb;
        if !nonpsd_noted && (q < -DIAG_TOL * (1.0 + q.abs()) || gap < -DIAG_TOL * (1.0 + f_min.abs()))
        {
            notes.push(format!(
                "non-PSD behavior detected at iteration {steps}: q = {q:e}, gap = {gap:e}"
            ));
            nonpsd_noted = true;
        }

        if steps == 0 || tracer.due(steps) {
            tracer.push(TraceRow {
                k: steps,
                f: f_now,
                residual2: (beta * beta * pp - 2.0 * beta * pb + bb).max(0.0).sqrt(),
                gap: Some(gap),
                grad_entries_touched: grad_entries,
                heap_ops: heap.as_ref().map_or(0, |h| h.touched_nodes()),
                tree_ops: 0,
                wall_ms: tracer.wall_ms(),
                sel_index: take_vertex.then_some(i_star),
                sel_grad: Some(partial),
            });
        }

        if cfg.early_exit && gap <= cfg.eps {
            break Status::Converged;
        }
        if let Some(fs) = problem.known_fstar() {
            if f_now - fs <= cfg.eps {
                fgap_hit = true;
                break Status::Converged;
            }
        }
        if steps >= cfg.max_iters_per_r {
            break Status::BudgetExhausted;
        }

        // Step from iterate k to k + 1.
        let k_iter = steps + 1;
        let gamma = cfg.schedule.gamma(k_iter);
        if cfg.schedule == Schedule::Classic && k_iter == 1 {
            // gamma_1 = 1: x^2 = y^1; restart the product at beta = 1.
            if take_vertex {
                z[i_star] = radius;
                z_inf = radius;
                for &(j, v) in a.col(i_star) {
                    let dp = radius * v;
                    pp += dp * (2.0 * p_vec[j] + dp);
                    pb += dp * b[j];
                    p_vec[j] += dp;
                    grad_entries += 1;
                }
                q = radius * radius * a.diag(i_star);
                r_dot = radius * b[i_star];
                if let Some(h) = &mut heap {
                    for &(j, _) in a.col(i_star) {
                        h.update(j, p_vec[j] - b[j]);
                    }
                }
            }
        } else {
            let beta_next = beta * (1.0 - gamma);
            if take_vertex {
                let t = gamma / beta_next * radius;
                let p_i_old = p_vec[i_star];
                q += 2.0 * t * p_i_old + t * t * a.diag(i_star);
                r_dot += t * b[i_star];
                z[i_star] += t;
                z_inf = z_inf.max(z[i_star]);
                for &(j, v) in a.col(i_star) {
                    let dp = t * v;
                    pp += dp * (2.0 * p_vec[j] + dp);
                    pb += dp * b[j];
                    p_vec[j] += dp;
                    grad_entries += 1;
                }
            }
            beta = beta_next;
            if let Some(h) = &mut heap {
                if take_vertex {
                    for &(j, _) in a.col(i_star) {
                        h.update(j, p_vec[j] - b[j] / beta);
                    }
                }
                for &j in &b_support {
                    h.update(j, p_vec[j] - b[j] / beta);
                    grad_entries += 1;
                }
            }
        }
        steps += 1;

        if z_inf > Z_RENORM_THRESHOLD {
            for v in z.iter_mut() {
                *v *= beta;
            }
            for v in p_vec.iter_mut() {
                *v *= beta;
            }
            q *= beta * beta;
            r_dot *= beta;
            pp *= beta * beta;
            pb *= beta;
            beta = 1.0;
            z_inf = dense::norm_inf(&z);
            if let Some(h) = &mut heap {
                let keys: Vec<f64> = (0..n).map(|i| p_vec[i] - b[i]).collect();
                h.rebuild(&keys);
            }
            full_refreshes += 1;
        }

        if let Some(iters) = &mut iterates {
            iters.push(z.iter().map(|&v| beta * v).collect());
        }
    };

    let x: Vec<f64> = z.iter().map(|&v| beta * v).collect();
    let f_final = 0.5 * beta * beta * q - beta * r_dot;
    let final_row = TraceRow {
        k: steps,
        f: f_final,
        residual2: (beta * beta * pp - 2.0 * beta * pb + bb).max(0.0).sqrt(),
        gap: Some(gap),
        grad_entries_touched: grad_entries,
        heap_ops: heap.as_ref().map_or(0, |h| h.touched_nodes()),
        tree_ops: 0,
        wall_ms: tracer.wall_ms(),
        sel_index: None,
        sel_grad: None,
    };
    let certified = gap <= cfg.eps;
    let report = SolveReport {
        method: Method::Fw,
        status,
        iterations: steps,
        restarts: 0,
        wall_time: tracer.elapsed(),
        final_f: f_final,
        final_residual2: final_row.residual2,
        final_gap: Some(gap),
        work: WorkCounters {
            grad_entries_touched: grad_entries,
            heap_ops: heap.as_ref().map_or(0, |h| h.touched_nodes()),
            tree_ops: 0,
            full_refreshes,
        },
        trace: tracer.finish(final_row),
        notes,
        x,
    };
    let outcome = FwOutcome {
        gap,
        best_lb,
        f_min,
        certified,
        fgap_hit,
        iterates,
    };
    Ok((report, outcome))
}

/// Fixed-radius Frank-Wolfe for `f(x) = 1/2 ||Ax - b||^2` on `S_n(R)` with
/// an `m x n` matrix; gradient `A^T (Ax - b)` maintained through
/// `w = Az` and `c = A^T w`.
pub fn fw_least_squares_fixed_r(
    problem: &LsProblem,
    radius: f64,
    cfg: &FwConfig,
) -> Result<(SolveReport, FwOutcome)> {
    cfg.validate()?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius = {radius} must be > 0"
        )));
    }
    let a = problem.a();
    let b = problem.b();
    let n = a.n_cols();
    let m_rows = a.n_rows();
    if n == 0 || m_rows == 0 {
        return Err(Error::InvalidParameter("empty problem".into()));
    }

    let d = a.apply_transpose(b)?; // A^T b
    let d_support: Vec<usize> = (0..n).filter(|&j| d[j] != 0.0).collect();
    let scan_mode = d_support.len() > a.s_col().saturating_mul(a.s_row());
    let bb = dense::norm2_sq(b);

    let mut z = vec![0.0f64; n];
    let mut w = vec![0.0f64; m_rows]; // Az
    let mut c = vec![0.0f64; n]; // A^T w
    let mut beta = 1.0f64;
    let mut qw = 0.0f64; // <w, w>
    let mut rw = 0.0f64; // <b, w>
    let mut z_inf = 0.0f64;

    let mut heap = (!scan_mode).then(|| {
        let keys: Vec<f64> = (0..n).map(|j| -d[j]).collect();
        IndexedHeap::new(keys, HeapOrder::Min)
    });

    let mut notes = Vec::new();
    if scan_mode {
        notes.push(format!(
            "dense gradient offset (nnz(A^T b) = {}): full argmin scan per iteration",
            d_support.len()
        ));
    }

    let mut tracer = Tracer::new(cfg.trace_every);
    let mut iterates = cfg.record_iterates.then(|| vec![vec![0.0; n]]);
    let mut grad_entries = 0u64;
    let mut full_refreshes = 0u64;
    let mut best_lb = f64::NEG_INFINITY;
    let mut f_min = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut steps = 0u64;
    let mut fgap_hit = false;

    let status = loop {
        let (i_star, key_star) = if let Some(h) = &heap {
            let t = h.top();
            (t, h.key(t))
        } else {
            let mut best = 0usize;
            let mut best_key = c[0] - d[0] / beta;
            for i in 1..n {
                let key = c[i] - d[i] / beta;
                if key < best_key {
                    best = i;
                    best_key = key;
                }
            }
            (best, best_key)
        };
        let partial = beta * key_star;
        let take_vertex = partial < 0.0;
        let f_now = 0.5 * beta * beta * qw - beta * rw + 0.5 * bb;
        if !f_now.is_finite() {
            return Err(Error::NonFinite { iter: steps });
        }
        let y_term = if take_vertex { radius * partial } else { 0.0 };
        let lb = 0.5 * bb - 0.5 * beta * beta * qw + y_term;
        if lb > best_lb {
            best_lb = lb;
        }
        if f_now < f_min {
            f_min = f_now;
        }
        gap = f_min - best_lb;

        if steps == 0 || tracer.due(steps) {
            tracer.push(TraceRow {
                k: steps,
                f: f_now,
                residual2: (2.0 * f_now).max(0.0).sqrt(),
                gap: Some(gap),
                grad_entries_touched: grad_entries,
                heap_ops: heap.as_ref().map_or(0, |h| h.touched_nodes()),
                tree_ops: 0,
                wall_ms: tracer.wall_ms(),
                sel_index: take_vertex.then_some(i_star),
                sel_grad: Some(partial),
            });
        }

        if cfg.early_exit && gap <= cfg.eps {
            break Status::Converged;
        }
        if let Some(fs) = problem.known_fstar() {
            if f_now - fs <= cfg.eps {
                fgap_hit = true;
                break Status::Converged;
            }
        }
        if steps >= cfg.max_iters_per_r {
            break Status::BudgetExhausted;
        }

        let k_iter = steps + 1;
        let gamma = cfg.schedule.gamma(k_iter);
        if cfg.schedule == Schedule::Classic && k_iter == 1 {
            if take_vertex {
                z[i_star] = radius;
                z_inf = radius;
                for &(row, v) in a.col(i_star) {
                    let dw = radius * v;
                    qw += dw * (2.0 * w[row] + dw);
                    rw += b[row] * dw;
                    w[row] += dw;
                    for &(j, vj) in a.row(row) {
                        c[j] += vj * dw;
                        grad_entries += 1;
                        if let Some(h) = &mut heap {
                            h.update(j, c[j] - d[j]);
                        }
                    }
                }
            }
        } else {
            let beta_next = beta * (1.0 - gamma);
            beta = beta_next;
            if take_vertex {
                let t = gamma / beta_next * radius;
                z[i_star] += t;
                z_inf = z_inf.max(z[i_star]);
                for &(row, v) in a.col(i_star) {
                    let dw = t * v;
                    qw += dw * (2.0 * w[row] + dw);
                    rw += b[row] * dw;
                    w[row] += dw;
                    for &(j, vj) in a.row(row) {
                        c[j] += vj * dw;
                        grad_entries += 1;
                        if let Some(h) = &mut heap {
                            h.update(j, c[j] - d[j] / beta);
                        }
                    }
                }
            }
            if let Some(h) = &mut heap {
                for &j in &d_support {
                    h.update(j, c[j] - d[j] / beta);
                    grad_entries += 1;
                }
            }
        }
        steps += 1;

        if z_inf > Z_RENORM_THRESHOLD {
            for v in z.iter_mut() {
                *v *= beta;
            }
            for v in w.iter_mut() {
                *v *= beta;
            }
            for v in c.iter_mut() {
                *v *= beta;
            }
            qw *= beta * beta;
            rw *= beta;
            beta = 1.0;
            z_inf = dense::norm_inf(&z);
            if let Some(h) = &mut heap {
                let keys: Vec<f64> = (0..n).map(|j| c[j] - d[j]).collect();
                h.rebuild(&keys);
            }
            full_refreshes += 1;
        }

        if let Some(iters) = &mut iterates {
            iters.push(z.iter().map(|&v| beta * v).collect());
        }
    };

    let x: Vec<f64> = z.iter().map(|&v| beta * v).collect();
    let f_final = 0.5 * beta * beta * qw - beta * rw + 0.5 * bb;
    let final_row = TraceRow {
        k: steps,
        f: f_final,
        residual2: (2.0 * f_final).max(0.0).sqrt(),
        gap: Some(gap),
        grad_entries_touched: grad_entries,
        heap_ops: heap.as_ref().map_or(0, |h| h.touched_nodes()),
        tree_ops: 0,
        wall_ms: tracer.wall_ms(),
        sel_index: None,
        sel_grad: None,
    };
    let certified = gap <= cfg.eps;
    let report = SolveReport {
        method: Method::FwLs,
        status,
        iterations: steps,
        restarts: 0,
        wall_time: tracer.elapsed(),
        final_f: f_final,
        final_residual2: final_row.residual2,
        final_gap: Some(gap),
        work: WorkCounters {
            grad_entries_touched: grad_entries,
            heap_ops: heap.as_ref().map_or(0, |h| h.touched_nodes()),
            tree_ops: 0,
            full_refreshes,
        },
        trace: tracer.finish(final_row),
        notes,
        x,
    };
    let outcome = FwOutcome {
        gap,
        best_lb,
        f_min,
        certified,
        fgap_hit,
        iterates,
    };
    Ok((report, outcome))
}

/// Restart procedure over the unknown radius: run the prescribed budget at
/// `R`, accept on a cleared certificate (or known-f* gap), otherwise grow
/// `R <- chi R`.
pub fn fw_solve_restarts(problem: &QuadraticProblem, cfg: &FwConfig) -> Result<SolveReport> {
    let l1 = problem.a().max_abs_entry();
    run_restarts(cfg, l1, Method::FwRestarts, |radius, stage_cfg| {
        fw_solve_fixed_r(problem, radius, stage_cfg)
    })
}

/// Least-squares variant of the restart procedure; the l1 curvature
/// constant of `1/2 ||Ax - b||^2` is `max_i ||A^(i)||_2^2`.
pub fn fw_least_squares(problem: &LsProblem, cfg: &FwConfig) -> Result<SolveReport> {
    let l1 = problem.a().max_col_sqnorm();
    run_restarts(cfg, l1, Method::FwLs, |radius, stage_cfg| {
        fw_least_squares_fixed_r(problem, radius, stage_cfg)
    })
}

fn run_restarts(
    cfg: &FwConfig,
    l1: f64,
    method: Method,
    mut run_stage: impl FnMut(f64, &FwConfig) -> Result<(SolveReport, FwOutcome)>,
) -> Result<SolveReport> {
    cfg.validate()?;
    if l1 <= 0.0 {
        return Err(Error::ZeroStepConstant);
    }
    let started = Instant::now();
    let mut radius = cfg.r0;
    let mut total_iters = 0u64;
    let mut work = WorkCounters::default();
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut notes = Vec::new();
    let mut wall_off = 0.0f64;
    let mut last: Option<SolveReport> = None;

    for stage in 0..=cfg.max_outer_restarts {
        let budget = stage_budget(cfg.schedule, l1, radius, cfg.eps).min(cfg.max_iters_per_r);
        let mut stage_cfg = cfg.clone();
        stage_cfg.max_iters_per_r = budget;
        stage_cfg.record_iterates = false;
        let (rep, out) = run_stage(radius, &stage_cfg)?;

        for row in &rep.trace {
            trace.push(TraceRow {
                k: row.k + total_iters,
                grad_entries_touched: row.grad_entries_touched + work.grad_entries_touched,
                heap_ops: row.heap_ops + work.heap_ops,
                tree_ops: row.tree_ops + work.tree_ops,
                wall_ms: row.wall_ms + wall_off,
                ..row.clone()
            });
        }
        total_iters += rep.iterations;
        work.merge(&rep.work);
        wall_off += rep.wall_time.as_secs_f64() * 1e3;
        notes.push(format!(
            "stage {stage}: R = {radius:.6e}, budget {budget}, iterations {}, gap {:.6e}",
            rep.iterations, out.gap
        ));
        notes.extend(rep.notes.iter().cloned());

        if out.success() {
            return Ok(SolveReport {
                method,
                status: Status::Converged,
                iterations: total_iters,
                restarts: stage as u64,
                wall_time: started.elapsed(),
                final_f: rep.final_f,
                final_residual2: rep.final_residual2,
                final_gap: rep.final_gap,
                work,
                trace,
                notes,
                x: rep.x,
            });
        }
        last = Some(rep);
        radius *= cfg.chi;
    }

    notes.push("max outer restarts exceeded without a certificate".into());
    let rep = last.expect("at least one stage ran");
    Ok(SolveReport {
        method,
        status: Status::BudgetExhausted,
        iterations: total_iters,
        restarts: cfg.max_outer_restarts as u64,
        wall_time: started.elapsed(),
        final_f: rep.final_f,
        final_residual2: rep.final_residual2,
        final_gap: rep.final_gap,
        work,
        trace,
        notes,
        x: rep.x,
    })
}
