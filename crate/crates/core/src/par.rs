//! Data-parallel map over independent jobs.
//!
//! With the `rayon` feature, [`Execution::Parallel`] runs jobs on the
//! current rayon pool; without it every execution mode is sequential.
//! Results are always returned in job order, so the output never depends
//! on scheduling.

/// How a batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether [`Execution::Parallel`] actually uses more than one thread
    /// in this build.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "rayon")
    }

    /// `(0..n).map(f)` collected in order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel => parallel_map(n, f),
        }
    }
}

#[cfg(feature = "rayon")]
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "rayon"))]
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Runs `f` with parallel work bounded to `threads` workers. `None` uses
/// the global pool.
#[cfg(feature = "rayon")]
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> crate::Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "rayon"))]
pub fn with_threads<T: Send>(
    _threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> crate::Result<T> {
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let f = |i: usize| (i * i) as u64 ^ 0x55;
        let a = Execution::Sequential.map(1000, f);
        let b = Execution::Parallel.map(1000, f);
        assert_eq!(a, b);
        assert_eq!(a[7], 49 ^ 0x55);
        assert!(Execution::Parallel.map(0, f).is_empty());
    }

    #[test]
    fn bounded_pool_runs() {
        let out = with_threads(Some(2), || Execution::Parallel.map(10, |i| i + 1)).unwrap();
        assert_eq!(out, (1..=10).collect::<Vec<_>>());
    }
}
