//! Wall-clock scaling of the solver on random instances.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use spacesched::{spoptn, Process, ProcessSet, Space};
use std::time::Instant;

pub struct BenchRow {
    pub size: usize,
    pub seconds: f64,
}

fn instance(rng: &mut ChaCha8Rng, procs: usize, total: usize) -> ProcessSet {
    let per = (total / procs).max(1);
    ProcessSet::new(
        (0..procs)
            .map(|i| {
                let t: Vec<Space> = (0..per).map(|_| rng.random_range(0..=1000)).collect();
                Process::new(format!("P{i}"), t).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Times the solver only (instance generation excluded); three repetitions,
/// best taken.
pub fn run(sizes: &[usize], procs: usize, seed: u64) -> Vec<BenchRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&size| {
            let set = instance(&mut rng, procs.min(size), size);
            let mut best = f64::INFINITY;
            for _ in 0..3 {
                let t0 = Instant::now();
                let r = spoptn(&set).expect("bench instance solves");
                std::hint::black_box(r.spmin);
                best = best.min(t0.elapsed().as_secs_f64());
            }
            BenchRow {
                size,
                seconds: best,
            }
        })
        .collect()
}

/// Least-squares slope of ln(time) against ln(size). `None` with fewer than
/// two distinct sizes.
pub fn loglog_slope(rows: &[BenchRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.size as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.seconds.max(1e-9).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let denom: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if denom == 0.0 {
        return None;
    }
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(num / denom)
}
