//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) independent work items are spread
//! over the rayon pool; without it every helper degrades to a plain
//! sequential iterator. Results always come back in input order, so the
//! choice never changes output.

/// How a batch of independent evaluations is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    /// `true` when this build can actually run work concurrently.
    pub fn is_concurrent(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Map `f` over `items`, preserving order.
pub fn map<T, U, F>(items: Vec<T>, exec: Execution, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

/// Apply the `RWA_THREADS` environment variable to the global pool.
///
/// `0` or an unset variable leaves rayon's automatic sizing in place. Returns
/// the thread count that was requested, if any.
pub fn configure_threads_from_env() -> crate::Result<Option<usize>> {
    let raw = match std::env::var("RWA_THREADS") {
        Ok(v) => v,
        Err(_) => return Ok(None),
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| crate::RwaError::invalid(format!("RWA_THREADS must be an integer, got `{raw}`")))?;
    if n == 0 {
        return Ok(None);
    }
    #[cfg(feature = "parallel")]
    {
        // A second call (tests, embedding) finds the pool already built; ignore.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_agree() {
        let items: Vec<u64> = (0..200).collect();
        let a = map(items.clone(), Execution::Serial, |x| x * x + 1);
        let b = map(items, Execution::Parallel, |x| x * x + 1);
        assert_eq!(a, b);
    }
}
