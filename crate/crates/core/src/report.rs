//! Solve reports, work counters and iteration traces.
//!
//! Work counters — gradient-cache entries touched, heap/tree nodes touched —
//! are the cross-method cost currency; wall time is recorded but never the
//! basis of a guarantee. Counters track incremental per-step work only: the
//! cost of periodic full recomputations is visible through `full_refreshes`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Greedy,
    GreedyComposite,
    Fw,
    FwRestarts,
    FwLs,
    Rsc,
    Cg,
    SimpleIter,
    Kk,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::GreedyComposite => "greedy_composite",
            Method::Fw => "fw",
            Method::FwRestarts => "fw_restarts",
            Method::FwLs => "fw_ls",
            Method::Rsc => "rsc",
            Method::Cg => "cg",
            Method::SimpleIter => "simple_iter",
            Method::Kk => "kk",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Method::Greedy),
            "greedy_composite" => Ok(Method::GreedyComposite),
            "fw" => Ok(Method::Fw),
            "fw_restarts" => Ok(Method::FwRestarts),
            "fw_ls" => Ok(Method::FwLs),
            "rsc" => Ok(Method::Rsc),
            "cg" => Ok(Method::Cg),
            "simple_iter" => Ok(Method::SimpleIter),
            "kk" => Ok(Method::Kk),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    BudgetExhausted,
    Breakdown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::BudgetExhausted => "budget_exhausted",
            Status::Breakdown => "breakdown",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounters {
    /// Gradient-cache entries written by incremental steps.
    pub grad_entries_touched: u64,
    /// Heap nodes touched by key updates.
    pub heap_ops: u64,
    /// Sum-tree nodes touched by weight updates and samples.
    pub tree_ops: u64,
    /// Full cache recomputations (refreshes, renormalizations, restarts).
    pub full_refreshes: u64,
}

impl WorkCounters {
    pub fn merge(&mut self, other: &WorkCounters) {
        self.grad_entries_touched += other.grad_entries_touched;
        self.heap_ops += other.heap_ops;
        self.tree_ops += other.tree_ops;
        self.full_refreshes += other.full_refreshes;
    }
}

/// One sampled point of a run. Counters are cumulative.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub k: u64,
    pub f: f64,
    pub residual2: f64,
    pub gap: Option<f64>,
    pub grad_entries_touched: u64,
    pub heap_ops: u64,
    pub tree_ops: u64,
    pub wall_ms: f64,
    /// Coordinate stepped on between the previous row and this one.
    pub sel_index: Option<usize>,
    /// Gradient value at that coordinate before the step.
    pub sel_grad: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub status: Status,
    pub iterations: u64,
    pub restarts: u64,
    pub wall_time: Duration,
    pub final_f: f64,
    pub final_residual2: f64,
    /// Duality gap for Frank-Wolfe runs; gradient norm of the averaged
    /// iterate for the randomized strongly convex method.
    pub final_gap: Option<f64>,
    pub work: WorkCounters,
    pub trace: Vec<TraceRow>,
    pub notes: Vec<String>,
    /// Solution iterate the summary fields describe.
    pub x: Vec<f64>,
}

impl SolveReport {
    pub fn met_eps(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Collects trace rows every `every` iterations (the initial and final rows
/// are always kept).
pub struct Tracer {
    every: u64,
    started: Instant,
    rows: Vec<TraceRow>,
}

impl Tracer {
    pub fn new(every: u64) -> Self {
        Self {
            every: every.max(1),
            started: Instant::now(),
            rows: Vec::new(),
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn wall_ms(&self) -> f64 {
        self.started.elapsed().as_secs_f64() * 1e3
    }

    pub fn due(&self, k: u64) -> bool {
        k % self.every == 0
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    /// Appends the final row unless a row for the same iteration was just
    /// recorded, then returns the collected trace.
    pub fn finish(mut self, row: TraceRow) -> Vec<TraceRow> {
        if self.rows.last().map(|r| r.k) != Some(row.k) {
            self.rows.push(row);
        } else {
            *self.rows.last_mut().unwrap() = row;
        }
        self.rows
    }
}
