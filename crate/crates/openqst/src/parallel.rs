//! Fans finite-difference probes out over a thread pool.

use std::sync::Arc;

use openqst_core::{Evaluation, Objective, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

pub struct Parallel<O> {
    inner: O,
    pool: Arc<ThreadPool>,
}

impl<O> Parallel<O> {
    pub fn new(inner: O, pool: Arc<ThreadPool>) -> Self {
        Self { inner, pool }
    }
}

impl<O: Objective + Sync> Objective for Parallel<O> {
    fn evaluate(&self, params: &[f64]) -> Result<Evaluation> {
        self.inner.evaluate(params)
    }

    fn evaluate_batch(&self, points: &[Vec<f64>]) -> Vec<Result<Evaluation>> {
        self.pool.install(|| points.par_iter().map(|p| self.inner.evaluate(p)).collect())
    }
}

pub fn pool(workers: usize) -> crate::Result<Arc<ThreadPool>> {
    Ok(Arc::new(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?))
}
