//! Problem descriptions and solver-facing knobs.

use std::time::Duration;

use crate::dense;
use crate::error::{Error, Result};
use crate::sparse::DualSparseMatrix;

/// `f(x) = 1/2 <Ax, x> - <b, x>` with `A` symmetric positive semidefinite.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    a: DualSparseMatrix,
    b: Vec<f64>,
    known_fstar: Option<f64>,
    mu: Option<f64>,
}

impl QuadraticProblem {
    pub fn new(a: DualSparseMatrix, b: Vec<f64>) -> Result<Self> {
        if !a.symmetric() {
            return Err(Error::NotSymmetric);
        }
        if b.len() != a.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: a.n_cols(),
                got: b.len(),
            });
        }
        Ok(Self {
            a,
            b,
            known_fstar: None,
            mu: None,
        })
    }

    pub fn with_known_fstar(mut self, fstar: f64) -> Self {
        self.known_fstar = Some(fstar);
        self
    }

    /// Declares a strong-convexity modulus `0 < mu <= lambda_min(A)`.
    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu = {mu} must be > 0")));
        }
        self.mu = Some(mu);
        Ok(self)
    }

    pub fn a(&self) -> &DualSparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.n_cols()
    }

    pub fn known_fstar(&self) -> Option<f64> {
        self.known_fstar
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    /// Objective value from scratch.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.apply(x)?;
        Ok(0.5 * dense::dot(&ax, x) - dense::dot(&self.b, x))
    }

    /// Gradient `Ax - b` from scratch.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.a.apply(x)?;
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        Ok(g)
    }
}

/// A family of scalar oracles indexed by position: values and first
/// derivatives of `f_k(t)` or `g_i(t)`.
pub trait ScalarFamily: Send + Sync {
    fn value(&self, k: usize, t: f64) -> f64;
    fn deriv(&self, k: usize, t: f64) -> f64;
}

/// `f_k(t) = t^2 / 2` for every `k`; curvature 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct HalfSquare;

impl ScalarFamily for HalfSquare {
    fn value(&self, _k: usize, t: f64) -> f64 {
        0.5 * t * t
    }

    fn deriv(&self, _k: usize, t: f64) -> f64 {
        t
    }
}

/// `f_k(t) = (t - shift_k)^2 / 2`; turns the composite machinery into
/// `1/2 ||Ax - b||^2`. Curvature 1.
#[derive(Clone, Debug)]
pub struct ShiftedHalfSquare {
    pub shifts: Vec<f64>,
}

impl ScalarFamily for ShiftedHalfSquare {
    fn value(&self, k: usize, t: f64) -> f64 {
        let d = t - self.shifts[k];
        0.5 * d * d
    }

    fn deriv(&self, k: usize, t: f64) -> f64 {
        t - self.shifts[k]
    }
}

/// `g_i(t) = coeff * t^2 / 2` for every `i`; curvature `coeff`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledSquare {
    pub coeff: f64,
}

impl ScalarFamily for ScaledSquare {
    fn value(&self, _k: usize, t: f64) -> f64 {
        0.5 * self.coeff * t * t
    }

    fn deriv(&self, _k: usize, t: f64) -> f64 {
        self.coeff * t
    }
}

/// Identically zero family.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroFamily;

impl ScalarFamily for ZeroFamily {
    fn value(&self, _k: usize, _t: f64) -> f64 {
        0.0
    }

    fn deriv(&self, _k: usize, _t: f64) -> f64 {
        0.0
    }
}

/// Affine-separable composite objective
/// `f(x) = sum_k f_k(A_k^T x) + sum_i g_i(x_i)` over an `m x n` matrix.
///
/// The caller warrants the stated curvature bounds hold along the iterate
/// trajectory: `|f_k''| <= outer_curvature`, `|g_i''| <= sep_curvature`.
pub struct CompositeProblem {
    a: DualSparseMatrix,
    outer: Box<dyn ScalarFamily>,
    separable: Box<dyn ScalarFamily>,
    outer_curvature: f64,
    sep_curvature: f64,
    step_constant_override: Option<f64>,
}

impl CompositeProblem {
    pub fn new(
        a: DualSparseMatrix,
        outer: Box<dyn ScalarFamily>,
        outer_curvature: f64,
        separable: Box<dyn ScalarFamily>,
        sep_curvature: f64,
    ) -> Result<Self> {
        if !(outer_curvature >= 0.0) || !(sep_curvature >= 0.0) {
            return Err(Error::InvalidParameter(
                "curvature bounds must be nonnegative".into(),
            ));
        }
        Ok(Self {
            a,
            outer,
            separable,
            outer_curvature,
            sep_curvature,
            step_constant_override: None,
        })
    }

    /// Overrides the default step constant
    /// `M = L_f * max_i ||A^(i)||_2^2 + L_g`.
    pub fn with_step_constant(mut self, m: f64) -> Self {
        self.step_constant_override = Some(m);
        self
    }

    pub fn a(&self) -> &DualSparseMatrix {
        &self.a
    }

    pub fn outer(&self) -> &dyn ScalarFamily {
        self.outer.as_ref()
    }

    pub fn separable(&self) -> &dyn ScalarFamily {
        self.separable.as_ref()
    }

    pub fn n(&self) -> usize {
        self.a.n_cols()
    }

    pub fn m(&self) -> usize {
        self.a.n_rows()
    }

    /// Coordinate curvature bound used as the `1/M` step constant.
    pub fn step_constant(&self) -> f64 {
        self.step_constant_override
            .unwrap_or(self.outer_curvature * self.a.max_col_sqnorm() + self.sep_curvature)
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let u = self.a.apply(x)?;
        let mut f = 0.0;
        for (k, &t) in u.iter().enumerate() {
            f += self.outer.value(k, t);
        }
        for (i, &xi) in x.iter().enumerate() {
            f += self.separable.value(i, xi);
        }
        Ok(f)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.a.apply(x)?;
        let slopes: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(k, &t)| self.outer.deriv(k, t))
            .collect();
        let mut g = self.a.apply_transpose(&slopes)?;
        for (i, gi) in g.iter_mut().enumerate() {
            *gi += self.separable.deriv(i, x[i]);
        }
        Ok(g)
    }
}

/// Least-squares data `f(x) = 1/2 ||Ax - b||^2` on the nonnegative orthant.
#[derive(Clone, Debug)]
pub struct LsProblem {
    a: DualSparseMatrix,
    b: Vec<f64>,
    known_fstar: Option<f64>,
}

impl LsProblem {
    pub fn new(a: DualSparseMatrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: a.n_rows(),
                got: b.len(),
            });
        }
        Ok(Self {
            a,
            b,
            known_fstar: None,
        })
    }

    pub fn with_known_fstar(mut self, fstar: f64) -> Self {
        self.known_fstar = Some(fstar);
        self
    }

    pub fn a(&self) -> &DualSparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.n_cols()
    }

    pub fn known_fstar(&self) -> Option<f64> {
        self.known_fstar
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.apply(x)?;
        let r = dense::sub(&ax, &self.b);
        Ok(0.5 * dense::norm2_sq(&r))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = self.a.apply(x)?;
        let r = dense::sub(&ax, &self.b);
        self.a.apply_transpose(&r)
    }
}

/// Termination criteria; the iteration budget is always present, the
/// tolerance-based criteria are opt-in.
#[derive(Clone, Copy, Debug)]
pub struct StopRule {
    pub max_iters: u64,
    pub grad_inf_tol: Option<f64>,
    pub fgap_tol: Option<f64>,
    pub wall_clock_limit: Option<Duration>,
}

impl StopRule {
    pub fn budget(max_iters: u64) -> Self {
        Self {
            max_iters,
            grad_inf_tol: None,
            fgap_tol: None,
            wall_clock_limit: None,
        }
    }

    pub fn with_grad_inf_tol(mut self, tol: f64) -> Self {
        self.grad_inf_tol = Some(tol);
        self
    }

    /// Stop when `f(x) - f* <= tol`; requires the problem to carry a known
    /// optimal value.
    pub fn with_fgap_tol(mut self, tol: f64) -> Self {
        self.fgap_tol = Some(tol);
        self
    }

    pub fn with_wall_clock_limit(mut self, limit: Duration) -> Self {
        self.wall_clock_limit = Some(limit);
        self
    }
}

/// Solver plumbing knobs shared by the incremental methods.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Record a trace row every this many iterations.
    pub trace_every: u64,
    /// Recompute caches from scratch every this many coordinate steps.
    pub refresh_period: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            trace_every: 100,
            refresh_period: 16_384,
        }
    }
}

impl SolveOptions {
    pub fn with_trace_every(mut self, every: u64) -> Self {
        self.trace_every = every;
        self
    }

    pub fn with_refresh_period(mut self, period: u64) -> Self {
        self.refresh_period = period;
        self
    }
}
