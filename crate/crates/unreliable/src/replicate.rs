//! Independent replications on worker threads.
//!
//! Replication `i` of a batch with master seed `s` draws from
//! [`replication_rng`]`(s, i)`: the ChaCha20 key comes from `s` and the
//! stream number is `i`, so streams never overlap and results do not depend
//! on the number of threads or on scheduling.

use std::collections::BTreeMap;
use std::thread;

use rand_chacha::ChaCha20Rng;
use unreliable_core::qbd::StationaryTable;
use unreliable_core::simulate::replication_rng;
use unreliable_core::{Result, ServerStatus};

/// Runs `job(i, rng_i)` for `i in 0..count` on up to `threads` threads and
/// returns the results in index order.
pub fn replicate<T, F>(master_seed: u64, count: usize, threads: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, ChaCha20Rng) -> Result<T> + Sync,
{
    let threads = threads.clamp(1, count.max(1));
    let mut slots: Vec<Option<Result<T>>> = (0..count).map(|_| None).collect();
    thread::scope(|scope| {
        let job = &job;
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t..count)
                        .step_by(threads)
                        .map(|i| (i, job(i as u64, replication_rng(master_seed, i as u64))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("replication thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every index is visited")).collect()
}

/// Cell-wise mean of equally weighted tables, keyed by `(x, y, status)`.
///
/// With equal run lengths this equals the pooled occupation frequency.
pub fn pool_tables(tables: &[StationaryTable]) -> BTreeMap<(i64, i64, ServerStatus), f64> {
    let mut pooled = BTreeMap::new();
    let n = tables.len() as f64;
    for t in tables {
        for (s, v) in t.iter() {
            if v > 0.0 {
                *pooled.entry((s.x, s.y, s.status)).or_insert(0.0) += v / n;
            }
        }
    }
    pooled
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::RngCore;

    #[test]
    fn results_ignore_thread_count() {
        let draw = |_: u64, mut rng: ChaCha20Rng| Ok(rng.next_u64());
        let one = replicate(9, 7, 1, draw).unwrap();
        let four = replicate(9, 7, 4, draw).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.len(), 7);
        let mut distinct = one.clone();
        distinct.dedup();
        assert_eq!(distinct.len(), 7);
    }

    #[test]
    fn errors_propagate() {
        let r = replicate(1, 3, 2, |i, _| {
            if i == 1 {
                Err(unreliable_core::Error::Unsupported("boom"))
            } else {
                Ok(i)
            }
        });
        assert!(r.is_err());
    }
}
