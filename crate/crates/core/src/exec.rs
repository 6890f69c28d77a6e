use core::marker::PhantomData;

/// Runs a batch of independent, index-addressed tasks.
///
/// Implementations may run tasks in any order and on any number of threads,
/// but must run each index in `0..count` exactly once before returning.
/// Kernels guarantee that no two tasks write the same output element, so the
/// result never depends on the executor.
pub trait Executor: Sync {
    fn for_each_task(&self, count: usize, task: &(dyn Fn(usize) + Sync));

    /// Upper bound on concurrently running tasks; informational.
    fn parallelism(&self) -> usize {
        1
    }
}

/// Runs every task in index order on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn for_each_task(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        for i in 0..count {
            task(i);
        }
    }
}

impl<E: Executor + ?Sized> Executor for &E {
    fn for_each_task(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        (**self).for_each_task(count, task)
    }

    fn parallelism(&self) -> usize {
        (**self).parallelism()
    }
}

/// Output buffer shared between tasks that write disjoint ranges.
pub(crate) struct DisjointWriter<'a, T> {
    ptr: *mut T,
    len: usize,
    _borrow: PhantomData<&'a mut [T]>,
}

// SAFETY: tasks only write disjoint ranges (see `write`), so sharing the raw
// pointer across threads cannot produce overlapping accesses.
unsafe impl<T: Send> Send for DisjointWriter<'_, T> {}
unsafe impl<T: Send> Sync for DisjointWriter<'_, T> {}

impl<'a, T: Copy> DisjointWriter<'a, T> {
    pub(crate) fn new(out: &'a mut [T]) -> Self {
        Self {
            ptr: out.as_mut_ptr(),
            len: out.len(),
            _borrow: PhantomData,
        }
    }

    /// Copies `src` to `start..start + src.len()`.
    ///
    /// # Safety
    ///
    /// No other task may read or write any element of that range while the
    /// writer is alive.
    #[inline]
    pub(crate) unsafe fn write(&self, start: usize, src: &[T]) {
        assert!(start <= self.len && src.len() <= self.len - start);
        // SAFETY: bounds checked above; exclusivity is the caller's contract.
        unsafe { core::ptr::copy_nonoverlapping(src.as_ptr(), self.ptr.add(start), src.len()) }
    }

    /// # Safety
    ///
    /// Same contract as [`DisjointWriter::write`] for the single element.
    #[inline]
    pub(crate) unsafe fn write_one(&self, index: usize, value: T) {
        assert!(index < self.len);
        // SAFETY: bounds checked above; exclusivity is the caller's contract.
        unsafe { self.ptr.add(index).write(value) }
    }
}
