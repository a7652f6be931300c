//! Scoped worker pool for batch evaluations. Results land in slots indexed
//! by input position, so output order never depends on scheduling.

use std::env;
use std::thread;

const ENV_THREADS: &str = "ORTHOWEAK_THREADS";

/// Validate the thread-count override once, up front. `0` and absence both
/// mean auto.
pub fn check_env() -> Result<(), String> {
    match env::var(ENV_THREADS) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(_) => Ok(()),
            Err(_) => Err(format!("{ENV_THREADS}={v:?}: expected a non-negative integer")),
        },
        Err(env::VarError::NotPresent) => Ok(()),
        Err(env::VarError::NotUnicode(_)) => {
            Err(format!("{ENV_THREADS}: expected a non-negative integer"))
        }
    }
}

fn worker_count(items: usize) -> usize {
    let cap = env::var(ENV_THREADS)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let auto = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    cap.unwrap_or(auto).min(items.max(1))
}

pub fn parallel_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = worker_count(items.len());
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut out: Vec<Option<U>> = Vec::with_capacity(items.len());
    out.resize_with(items.len(), || None);
    let chunk = items.len().div_ceil(workers);
    thread::scope(|scope| {
        for (ins, outs) in items.chunks(chunk).zip(out.chunks_mut(chunk)) {
            scope.spawn(|| {
                for (item, slot) in ins.iter().zip(outs.iter_mut()) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    out.into_iter().map(|u| u.expect("every slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_input_order() {
        let items: Vec<usize> = (0..101).collect();
        let squares = parallel_map(&items, |&n| n * n);
        assert_eq!(squares, items.iter().map(|&n| n * n).collect::<Vec<_>>());
    }

    #[test]
    fn singleton_batches_run_inline() {
        assert_eq!(parallel_map(&[7usize], |&n| n + 1), vec![8]);
        assert_eq!(parallel_map::<usize, usize, _>(&[], |&n| n), Vec::<usize>::new());
    }
}
