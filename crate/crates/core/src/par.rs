//! Element-wise loops that run on the rayon pool when the `parallel`
//! feature is enabled and sequentially otherwise.
//!
//! Every helper applies a closure to independent elements, so both paths
//! produce bit-identical results. Slices shorter than [`MIN_PARALLEL_LEN`]
//! always run sequentially to avoid scheduling overhead.

/// Below this length loops never leave the calling thread.
pub const MIN_PARALLEL_LEN: usize = 4096;

/// Whether this build was compiled with the rayon backend.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Calls `f(i, &mut dst[i])` for every index.
pub fn for_each_indexed<T, F>(dst: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if dst.len() >= MIN_PARALLEL_LEN {
            use rayon::prelude::*;
            dst.par_iter_mut().enumerate().for_each(|(i, d)| f(i, d));
            return;
        }
    }
    dst.iter_mut().enumerate().for_each(|(i, d)| f(i, d));
}

/// Calls `f(i, &mut a[i], &mut b[i])` for every index of two equal-length
/// slices.
pub fn for_each_indexed2<T, U, F>(a: &mut [T], b: &mut [U], f: F)
where
    T: Send,
    U: Send,
    F: Fn(usize, &mut T, &mut U) + Sync + Send,
{
    assert_eq!(a.len(), b.len(), "for_each_indexed2 requires equal lengths");
    #[cfg(feature = "parallel")]
    {
        if a.len() >= MIN_PARALLEL_LEN {
            use rayon::prelude::*;
            a.par_iter_mut()
                .zip(b.par_iter_mut())
                .enumerate()
                .for_each(|(i, (x, y))| f(i, x, y));
            return;
        }
    }
    a.iter_mut()
        .zip(b.iter_mut())
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
}

/// Maps each input index to an output value, e.g. for independent runs in a
/// parameter sweep.
pub fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sizes the global rayon pool. Without the `parallel` feature this is a
/// no-op that returns `false`; it also returns `false` when the pool was
/// already initialised.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}
