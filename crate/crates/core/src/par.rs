//! Order-preserving maps over independent queries.
//!
//! Oracle recursion is deep, so every worker runs on a large stack. With the
//! `parallel` feature the work is spread over a dedicated rayon pool;
//! otherwise, or through [`map_sequential`], it runs on one big-stack thread.

use std::thread;

/// Stack size of every worker thread.
pub const STACK_SIZE: usize = 256 << 20;

/// Runs `f` on a thread with a [`STACK_SIZE`] stack.
pub fn with_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    thread::scope(|s| {
        thread::Builder::new()
            .stack_size(STACK_SIZE)
            .spawn_scoped(s, f)
            .expect("worker thread spawns")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// `items.iter().map(f)` in order, one item after another.
pub fn map_sequential<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    with_stack(|| items.iter().map(&f).collect())
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    static POOL: std::sync::OnceLock<rayon::ThreadPool> = std::sync::OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .stack_size(STACK_SIZE)
            .thread_name(|i| format!("local-match-{i}"))
            .build()
            .expect("thread pool builds")
    })
}

/// `items.iter().map(f)` in order, spread over the worker pool.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    pool().install(|| items.par_iter().map(&f).collect())
}

/// `items.iter().map(f)` in order.
#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    map_sequential(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let items: Vec<u64> = (0..200).collect();
        let f = |x: &u64| x * x + 1;
        assert_eq!(map(&items, f), map_sequential(&items, f));
    }

    #[test]
    fn deep_recursion_fits() {
        fn depth(n: u64) -> u64 {
            let pad = [n; 64];
            if n == 0 {
                0
            } else {
                1 + depth(n - 1) + pad[(n % 64) as usize] * 0
            }
        }
        assert_eq!(with_stack(|| depth(100_000)), 100_000);
    }
}
