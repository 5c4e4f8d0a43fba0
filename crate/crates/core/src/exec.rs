//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on the rayon
//! pool; without it every call runs sequentially. Results never depend on the
//! mode: searches return the least index in scan order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Least `i < len` with `pred(i)`.
pub fn find_first(exec: Exec, len: u64, pred: impl Fn(u64) -> bool + Sync + Send) -> Option<u64> {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().find_first(|&i| pred(i));
    }
    let _ = exec;
    (0..len).find(|&i| pred(i))
}

/// `f(0), f(1), ..., f(len-1)` in order.
pub fn map_range<T: Send>(exec: Exec, len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// The `Some` results of `f` over `0..len`, in index order.
pub fn filter_map_range<T: Send>(
    exec: Exec,
    len: u64,
    f: impl Fn(u64) -> Option<T> + Sync + Send,
) -> Vec<T> {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().filter_map(f).collect();
    }
    let _ = exec;
    (0..len).filter_map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        for exec in [Exec::Parallel, Exec::Sequential] {
            assert_eq!(find_first(exec, 10_000, |i| i % 977 == 976), Some(976));
            assert_eq!(find_first(exec, 10, |_| false), None);
            assert_eq!(map_range(exec, 5, |i| i * i), vec![0, 1, 4, 9, 16]);
            assert_eq!(
                filter_map_range(exec, 20, |i| (i % 7 == 0).then_some(i)),
                vec![0, 7, 14]
            );
        }
    }
}
