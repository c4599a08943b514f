//! Sparse quadratic and composite optimization built around incremental
//! gradient bookkeeping.
//!
//! The crate provides three solvers that exploit double sparsity (few
//! nonzeros per row *and* per column) to keep the per-iteration cost at
//! `O(s log n)` instead of `O(n)`:
//!
//! * [`greedy::solve_greedy`] — coordinate descent that always steps on the
//!   largest gradient component, with step `1/L`, `L = max |A_ij|`, for
//!   quadratics and affine-separable composite objectives;
//! * [`frank_wolfe`] — conditional gradient on the scaled corner simplex
//!   `{x >= 0, sum x_i <= R}` with a sparse `z = x / beta` reparameterization,
//!   a running duality-gap certificate, and geometric restarts over an
//!   unknown radius `R`;
//! * [`rand_strong::rsc_solve`] — randomized single-coordinate descent for
//!   strongly convex quadratics, sampling coordinates proportionally to
//!   `|g_i|` and restarting when the gradient norm of the averaged iterate
//!   halves.
//!
//! Supporting modules hold the sparse matrix substrate ([`sparse`]), the two
//! log-time index structures the complexity claims rest on ([`heap`],
//! [`sumtree`]), reference solvers and the residual-vs-error experiment
//! ([`baselines`]), seeded problem generators ([`generate`]) and Matrix
//! Market / text-vector exchange ([`io`]).

pub mod baselines;
pub mod dense;
pub mod error;
pub mod frank_wolfe;
pub mod generate;
pub mod gradient;
pub mod greedy;
pub mod heap;
pub mod io;
pub mod problem;
pub mod rand_strong;
pub mod report;
pub mod sparse;
pub mod sumtree;

pub use error::{Error, Result};
pub use gradient::GradientState;
pub use heap::{HeapOrder, IndexedHeap};
pub use problem::{CompositeProblem, LsProblem, QuadraticProblem, SolveOptions, StopRule};
pub use report::{Method, SolveReport, Status, TraceRow, WorkCounters};
pub use sparse::DualSparseMatrix;
pub use sumtree::SumTree;
