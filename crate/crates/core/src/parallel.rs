//! Deterministic data-parallel execution.
//!
//! Work is split into contiguous unit ranges that are a pure function of the
//! index-space size and the worker count. Every output element is computed by
//! exactly one task with a fixed operation order, so the result is identical
//! for every worker count.

use std::ops::Range;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Environment variable consulted when no explicit worker count is given.
pub const THREADS_ENV: &str = "PSLQ_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    RowBlock,
    ColumnBlock,
    PairSlot,
    DiagonalSlot,
}

/// Assignment of a `0..len` index space to workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    pub unit: Unit,
    pub worker_count: usize,
    pub assignments: Vec<(Range<usize>, usize)>,
}

impl PartitionPlan {
    /// Splits `0..len` into at most `worker_count` contiguous, nearly equal blocks.
    pub fn new(len: usize, worker_count: usize, unit: Unit) -> Self {
        let workers = worker_count.max(1);
        let blocks = workers.min(len.max(1));
        let base = len / blocks;
        let extra = len % blocks;
        let mut assignments = Vec::with_capacity(blocks);
        let mut start = 0;
        for w in 0..blocks {
            let size = base + usize::from(w < extra);
            assignments.push((start..start + size, w));
            start += size;
        }
        Self {
            unit,
            worker_count: workers,
            assignments,
        }
    }

    pub fn len(&self) -> usize {
        self.assignments.last().map_or(0, |(r, _)| r.end)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A worker pool of fixed size; `workers == 1` runs inline.
#[derive(Clone)]
pub struct Executor {
    workers: usize,
    pool: Option<Arc<ThreadPool>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("workers", &self.workers)
            .finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            workers: 1,
            pool: None,
        }
    }

    pub fn new(workers: usize) -> Result<Self> {
        if workers <= 1 {
            return Ok(Self::sequential());
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("pslq-worker-{i}"))
            .build()
            .map_err(|e| Error::Worker(e.to_string()))?;
        Ok(Self {
            workers,
            pool: Some(Arc::new(pool)),
        })
    }

    /// Worker count from `PSLQ_THREADS`, defaulting to one.
    pub fn from_env() -> Result<Self> {
        let workers = match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse::<usize>().map_err(|_| {
                Error::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a worker count"))
            })?,
            Err(_) => 1,
        };
        Self::new(workers)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        self.pool.is_some()
    }

    pub fn plan(&self, len: usize, unit: Unit) -> PartitionPlan {
        PartitionPlan::new(len, self.workers, unit)
    }

    /// Evaluates `task` on every unit of `plan`, returning results in
    /// ascending unit order.
    pub fn par_map<T, F>(&self, plan: &PartitionPlan, task: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let Some(pool) = &self.pool else {
            return catch_unwind(AssertUnwindSafe(|| (0..plan.len()).map(&task).collect()))
                .map_err(panic_message);
        };
        let blocks: Vec<Vec<T>> = catch_unwind(AssertUnwindSafe(|| {
            pool.install(|| {
                plan.assignments
                    .par_iter()
                    .map(|(range, _)| range.clone().map(&task).collect::<Vec<T>>())
                    .collect()
            })
        }))
        .map_err(panic_message)?;
        Ok(blocks.into_iter().flatten().collect())
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> Error {
    let msg = payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "worker panicked".to_string());
    Error::Worker(format!("{msg}; state poisoned"))
}

/// `left · right` with each output element accumulated as
/// `acc = zero; for k ascending: fma(acc, left[i][k], right[k][j])`.
pub fn par_matmul<L, R, C, F>(
    exec: &Executor,
    left: &Matrix<L>,
    right: &Matrix<R>,
    zero: &C,
    fma: F,
) -> Result<Matrix<C>>
where
    L: Sync,
    R: Sync,
    C: Clone + Send + Sync,
    F: Fn(&mut C, &L, &R) + Sync,
{
    assert_eq!(left.cols(), right.rows(), "non-conformal product");
    let (rows, inner, cols) = (left.rows(), left.cols(), right.cols());
    let element = |i: usize, j: usize| {
        let mut acc = zero.clone();
        for k in 0..inner {
            fma(&mut acc, &left[(i, k)], &right[(k, j)]);
        }
        acc
    };
    if rows > 1 {
        let plan = exec.plan(rows, Unit::RowBlock);
        let out = exec.par_map(&plan, |i| {
            (0..cols).map(|j| element(i, j)).collect::<Vec<C>>()
        })?;
        Ok(Matrix::from_rows(out))
    } else {
        let plan = exec.plan(cols, Unit::ColumnBlock);
        let out = exec.par_map(&plan, |j| element(0, j))?;
        Ok(Matrix::from_rows(vec![out]))
    }
}
