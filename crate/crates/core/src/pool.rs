//! Worker pool shared by grid scans.
//!
//! `LEVILAB_THREADS` caps parallelism; unset or `0` uses the rayon default.
//! All scans map grid items in index order and reduce sequentially, so the
//! thread count never affects results.

use rayon::ThreadPool;
use std::sync::OnceLock;

static POOL: OnceLock<ThreadPool> = OnceLock::new();

pub(crate) fn pool() -> &'static ThreadPool {
    POOL.get_or_init(|| {
        let threads = std::env::var("LEVILAB_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool")
    })
}
