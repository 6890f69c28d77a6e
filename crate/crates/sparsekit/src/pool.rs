use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};
use sparsekit_core::Executor;

/// Runs kernel tasks on a dedicated rayon pool.
pub struct PoolExecutor {
    pool: ThreadPool,
}

impl PoolExecutor {
    /// `None` sizes the pool to the available parallelism.
    pub fn new(threads: Option<usize>) -> Result<Self, ThreadPoolBuildError> {
        let mut b = ThreadPoolBuilder::new().thread_name(|i| format!("sparsekit-{i}"));
        if let Some(n) = threads {
            b = b.num_threads(n.max(1));
        }
        Ok(Self { pool: b.build()? })
    }
}

impl Executor for PoolExecutor {
    fn for_each_task(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        self.pool.install(|| (0..count).into_par_iter().for_each(task));
    }

    fn parallelism(&self) -> usize {
        self.pool.current_num_threads()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn runs_every_task_once() {
        let pool = PoolExecutor::new(Some(3)).unwrap();
        assert_eq!(pool.parallelism(), 3);
        let hits: Vec<AtomicUsize> = (0..1000).map(|_| AtomicUsize::new(0)).collect();
        pool.for_each_task(hits.len(), &|i| {
            hits[i].fetch_add(1, Ordering::Relaxed);
        });
        assert!(hits.iter().all(|h| h.load(Ordering::Relaxed) == 1));
    }
}
