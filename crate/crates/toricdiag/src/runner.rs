use rayon::prelude::*;
use toricdiag_core::exact::ChunkRunner;

/// Dispatches chunks (chains or enumeration ranges) to the rayon pool.
/// Results come back in chunk order, so output never depends on scheduling.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl ChunkRunner for Rayon {
    fn map_chunks<T, F>(&self, chunks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..chunks).into_par_iter().map(f).collect()
    }
}

/// Enumeration chunks per worker thread.
pub fn chunks() -> usize {
    4 * rayon::current_num_threads()
}
