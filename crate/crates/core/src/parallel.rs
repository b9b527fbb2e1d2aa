//! Ordered map over independent work items, parallel when the `parallel`
//! feature is enabled.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon work stealing. Falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
}

/// Maps `f` over `items`; results always come back in input order.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
