//! Batch execution with an optional rayon backend.
//!
//! Every helper here returns results in input order, so callers observe the
//! same output for any worker count. Without the `parallel` feature all work
//! runs on the calling thread.

use std::str::FromStr;

/// How many threads a batch may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// Run on the calling thread.
    Sequential,
    /// Use the global rayon pool.
    #[default]
    Auto,
    /// Use a dedicated pool with this many threads.
    Fixed(usize),
}

impl Workers {
    /// `0` means [`Workers::Auto`], `1` means [`Workers::Sequential`].
    pub fn from_count(n: usize) -> Self {
        match n {
            0 => Workers::Auto,
            1 => Workers::Sequential,
            n => Workers::Fixed(n),
        }
    }
}

impl FromStr for Workers {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Workers::Auto),
            _ => s
                .parse::<usize>()
                .map(Workers::from_count)
                .map_err(|_| format!("invalid worker count `{s}`")),
        }
    }
}

/// Map `f` over `items`, preserving order.
pub fn map<T, R, F>(workers: Workers, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match workers {
        Workers::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        #[cfg(feature = "parallel")]
        Workers::Auto => par_map(items, &f),
        #[cfg(feature = "parallel")]
        Workers::Fixed(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| par_map(items, &f)),
            Err(_) => par_map(items, &f),
        },
        #[cfg(not(feature = "parallel"))]
        _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Like [`map`] over `0..n`.
pub fn map_range<R, F>(workers: Workers, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(workers, &idx, |_, &i| f(i))
}

/// Fallible [`map`]; the error reported is the one at the lowest index.
pub fn try_map<T, R, E, F>(workers: Workers, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(usize, &T) -> Result<R, E> + Sync + Send,
{
    map(workers, items, f).into_iter().collect()
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(items: &[T], f: &F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
