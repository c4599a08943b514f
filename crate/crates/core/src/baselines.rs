//! Reference solvers and the residual-vs-error experiment.
//!
//! Conjugate gradients and plain simple iteration `x <- A~ x + b` serve as
//! baselines for the sparse methods; the Krasnoselsky-Krein experiment
//! measures how loosely a small stopping residual of simple iteration pins
//! down the actual solution error when the top eigenvalue of `A~` sits
//! close to 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense;
use crate::error::{Error, Result};
use crate::problem::SolveOptions;
use crate::report::{Method, SolveReport, Status, TraceRow, Tracer, WorkCounters};
use crate::sparse::DualSparseMatrix;

/// Standard conjugate gradients on a symmetric PSD system `Ax = b`,
/// started at the origin, stopping at `||Ax - b||_2 <= tol`.
pub fn cg_solve(
    a: &DualSparseMatrix,
    b: &[f64],
    tol: f64,
    max_iters: u64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !a.symmetric() {
        return Err(Error::NotSymmetric);
    }
    if b.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: a.n_cols(),
            got: b.len(),
        });
    }
    let n = b.len();
    let mut x = vec![0.0f64; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs = dense::norm2_sq(&r);
    let nnz = a.nnz() as u64;

    let mut tracer = Tracer::new(opts.trace_every);
    let mut work = WorkCounters::default();
    let mut notes = Vec::new();
    let row = |x: &[f64], r: &[f64], k: u64, work: &WorkCounters, tracer: &Tracer| TraceRow {
        k,
        f: -0.5 * (dense::dot(b, x) + dense::dot(x, r)),
        residual2: dense::norm2(r),
        gap: None,
        grad_entries_touched: work.grad_entries_touched,
        heap_ops: 0,
        tree_ops: 0,
        wall_ms: tracer.wall_ms(),
        sel_index: None,
        sel_grad: None,
    };
    tracer.push(row(&x, &r, 0, &work, &tracer));

    let mut iters = 0u64;
    let status = loop {
        if rs.sqrt() <= tol {
            break Status::Converged;
        }
        if iters >= max_iters {
            break Status::BudgetExhausted;
        }
        let ap = a.apply(&p)?;
        work.grad_entries_touched += nnz;
        let p_ap = dense::dot(&p, &ap);
        if p_ap <= 0.0 {
            notes.push(format!(
                "curvature breakdown at iteration {iters}: <p, Ap> = {p_ap:e}"
            ));
            break Status::Breakdown;
        }
        let alpha = rs / p_ap;
        dense::axpy(&mut x, alpha, &p);
        dense::axpy(&mut r, -alpha, &ap);
        let rs_next = dense::norm2_sq(&r);
        let beta = rs_next / rs;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rs = rs_next;
        iters += 1;
        if tracer.due(iters) {
            tracer.push(row(&x, &r, iters, &work, &tracer));
        }
    };

    let final_row = row(&x, &r, iters, &work, &tracer);
    Ok(SolveReport {
        method: Method::Cg,
        status,
        iterations: iters,
        restarts: 0,
        wall_time: tracer.elapsed(),
        final_f: final_row.f,
        final_residual2: final_row.residual2,
        final_gap: None,
        work,
        trace: tracer.finish(final_row),
        notes,
        x,
    })
}

/// Outcome of simple iteration `x^{k+1} = A~ x^k + b` stopped at the first
/// `||delta^k||_2 <= eps`, where `delta^k = b - (I - A~) x^k`.
#[derive(Clone, Debug)]
pub struct SimpleIterOutcome {
    pub x: Vec<f64>,
    pub hitting_time: u64,
    pub delta_trace: Vec<f64>,
}

/// Runs simple iteration until the controllable residual first enters the
/// eps-ball; convergence needs a spectral radius below 1 (caller contract).
///
/// Exhausting `max_iters` is an error carrying the last residual.
pub fn simple_iteration(
    a_tilde: &DualSparseMatrix,
    b: &[f64],
    eps: f64,
    x0: Vec<f64>,
    max_iters: u64,
) -> Result<SimpleIterOutcome> {
    if b.len() != a_tilde.n_cols() || x0.len() != a_tilde.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: a_tilde.n_cols(),
            got: if b.len() != a_tilde.n_cols() {
                b.len()
            } else {
                x0.len()
            },
        });
    }
    let mut x = x0;
    let mut delta_trace = Vec::new();
    for k in 0..=max_iters {
        let mut next = a_tilde.apply(&x)?;
        for (ni, bi) in next.iter_mut().zip(b) {
            *ni += bi;
        }
        // delta^k = x^{k+1} - x^k = b - A x^k
        let norm = next
            .iter()
            .zip(&x)
            .map(|(n, o)| (n - o) * (n - o))
            .sum::<f64>()
            .sqrt();
        delta_trace.push(norm);
        if norm <= eps {
            return Ok(SimpleIterOutcome {
                x,
                hitting_time: k,
                delta_trace,
            });
        }
        x = next;
    }
    Err(Error::BudgetExhausted {
        iters: max_iters,
        residual: *delta_trace.last().unwrap_or(&f64::NAN),
    })
}

/// Spec of the residual-vs-error experiment: `A~ = diag(eigenvalues)` with
/// the spectrum inside `(0, 1)`, `b = e_1`, and trial starts drawn
/// uniformly from the 2-ball of radius `ball_radius`.
#[derive(Clone, Debug)]
pub struct KkExperimentSpec {
    pub eigenvalues: Vec<f64>,
    pub eps: f64,
    pub ball_radius: f64,
    pub trials: u64,
    pub seed: u64,
}

impl KkExperimentSpec {
    fn validate(&self) -> Result<()> {
        if self.eigenvalues.is_empty() {
            return Err(Error::InvalidParameter("empty spectrum".into()));
        }
        let mut prev = 0.0;
        for &l in &self.eigenvalues {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "eigenvalue {l} outside (0, 1)"
                )));
            }
            if l < prev {
                return Err(Error::InvalidParameter(
                    "eigenvalues must be sorted ascending".into(),
                ));
            }
            prev = l;
        }
        if !(self.eps > 0.0) || !(self.ball_radius > 0.0) || self.trials == 0 {
            return Err(Error::InvalidParameter(
                "eps and ball_radius must be positive, trials >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KkTrial {
    pub hitting_time: u64,
    pub error2: f64,
    pub in_bracket: bool,
    pub above_upper: bool,
}

#[derive(Clone, Debug)]
pub struct KkReport {
    /// `0.999 eps lambda_n / (1 - lambda_n)`
    pub lower: f64,
    /// `eps / (1 - lambda_n)`
    pub upper: f64,
    pub fraction_in_bracket: f64,
    pub upper_violations: u64,
    pub trials: Vec<KkTrial>,
}

const KK_MAX_ITERS: u64 = 10_000_000;

/// Runs the two-sided residual-vs-error bracket experiment. The upper
/// bound `||x^N - x*||_2 <= eps / (1 - lambda_n)` is unconditional; the
/// lower bound `0.999 eps lambda_n / (1 - lambda_n)` holds with probability
/// approaching 1 as the start radius grows.
pub fn kk_experiment(spec: &KkExperimentSpec) -> Result<KkReport> {
    spec.validate()?;
    let n = spec.eigenvalues.len();
    let triples: Vec<_> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (i, i, l))
        .collect();
    let a_tilde = DualSparseMatrix::from_triples(&triples, n, n, true)?;
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    // x* = (I - A~)^{-1} b, available in closed form for a diagonal A~.
    let x_star: Vec<f64> = spec
        .eigenvalues
        .iter()
        .zip(&b)
        .map(|(&l, &bi)| bi / (1.0 - l))
        .collect();
    let lambda_n = *spec.eigenvalues.last().unwrap();
    let lower = 0.999 * spec.eps * lambda_n / (1.0 - lambda_n);
    let upper = spec.eps / (1.0 - lambda_n);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut trials = Vec::with_capacity(spec.trials as usize);
    let mut in_bracket = 0u64;
    let mut upper_violations = 0u64;
    for _ in 0..spec.trials {
        let x0 = ball_uniform(n, spec.ball_radius, &mut rng);
        let out = simple_iteration(&a_tilde, &b, spec.eps, x0, KK_MAX_ITERS)?;
        let error2 = dense::norm2(&dense::sub(&out.x, &x_star));
        let above_upper = error2 > upper;
        let trial = KkTrial {
            hitting_time: out.hitting_time,
            error2,
            in_bracket: error2 >= lower && !above_upper,
            above_upper,
        };
        if trial.in_bracket {
            in_bracket += 1;
        }
        if above_upper {
            upper_violations += 1;
        }
        trials.push(trial);
    }
    Ok(KkReport {
        lower,
        upper,
        fraction_in_bracket: in_bracket as f64 / spec.trials as f64,
        upper_violations,
        trials,
    })
}

/// Uniform draw from the n-ball of the given radius: normalized Gaussian
/// direction scaled by `radius * U^{1/n}`.
fn ball_uniform(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
    let norm = dense::norm2(&v);
    let scale = radius * rng.random::<f64>().powf(1.0 / n as f64) / norm;
    for x in v.iter_mut() {
        *x *= scale;
    }
    v
}

/// Box-Muller transform over the crate's seeded generator.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
