//! Deterministic fan-out over independent work units.

use std::sync::Once;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

static SEQUENTIAL_KERNELS: Once = Once::new();

/// Runs `work(k)` for `k in 0..count` and returns the results in index order.
///
/// `workers = None` uses the global rayon pool; `Some(w)` builds a pool of `w` threads.
/// Dense kernels inside each unit run sequentially, so the output does not depend on the
/// number of workers. On failure the error of the lowest failing index is returned.
pub fn map_indexed<T, F>(count: usize, workers: Option<usize>, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    SEQUENTIAL_KERNELS.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let run = || (0..count).into_par_iter().map(&work).collect::<Vec<Result<T>>>();
    let results = match workers {
        None => run(),
        Some(0) => return invalid("worker count must be at least 1"),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start {w} workers: {e}")))?
            .install(run),
    };
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_index_order() {
        for workers in [None, Some(1), Some(3)] {
            let v = map_indexed(50, workers, |k| Ok(k * k)).unwrap();
            assert_eq!(v, (0..50).map(|k| k * k).collect::<Vec<_>>());
        }
    }

    #[test]
    fn reports_lowest_failure() {
        let r: Result<Vec<usize>> =
            map_indexed(20, Some(2), |k| if k % 7 == 6 { Err(Error::Eigensolver { realization: k }) } else { Ok(k) });
        assert!(matches!(r, Err(Error::Eigensolver { realization: 6 })));
    }

    #[test]
    fn rejects_zero_workers() {
        assert!(map_indexed(3, Some(0), Ok).is_err());
    }
}
