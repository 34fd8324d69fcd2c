//! Randomized differential testing of the solver against the exact oracle,
//! with greedy shrinking of any counterexample found.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use spacesched::{
    oracle_schedule, oracle_spmin, reconstruct_schedule, spoptn, sps, validate_interleaving,
    Process, ProcessSet, Space,
};

pub struct FuzzConfig {
    pub cases: u64,
    pub seed: u64,
    pub max_n: usize,
    pub max_len: usize,
    pub max_val: Space,
    pub budget: usize,
}

fn build_set(traces: &[Vec<Space>]) -> ProcessSet {
    ProcessSet::new(
        traces
            .iter()
            .enumerate()
            .map(|(i, t)| Process::new(format!("P{}", i + 1), t.clone()).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Checks one instance; returns a description of the first discrepancy.
fn check(traces: &[Vec<Space>], budget: usize) -> Option<String> {
    let set = build_set(traces);
    let result = match spoptn(&set) {
        Ok(r) => r,
        Err(e) => return Some(format!("solver failed: {e}")),
    };
    let want = match oracle_spmin(&set, budget) {
        Ok(w) => w.0,
        Err(e) => return Some(format!("oracle failed: {e}")),
    };
    if result.spmin != want {
        return Some(format!("solver says {}, oracle says {want}", result.spmin));
    }
    match reconstruct_schedule(&set, &result) {
        Ok(sched) => {
            if !validate_interleaving(&set, &sched).is_valid() {
                return Some("reconstructed schedule is invalid".to_string());
            }
            match sps(&sched) {
                Ok(s) if s.0 == want => {}
                Ok(s) => return Some(format!("reconstructed schedule uses {} != {want}", s.0)),
                Err(e) => return Some(format!("sps failed: {e}")),
            }
        }
        Err(e) => return Some(format!("reconstruction failed: {e}")),
    }
    match oracle_schedule(&set, budget) {
        Ok(sched) => {
            if !validate_interleaving(&set, &sched).is_valid() {
                return Some("oracle schedule is invalid".to_string());
            }
            if sps(&sched).map(|s| s.0) != Ok(want) {
                return Some("oracle schedule misses its own spmin".to_string());
            }
        }
        Err(e) => return Some(format!("oracle schedule failed: {e}")),
    }
    None
}

/// Greedy shrink: drop processes, drop single elements, then halve values,
/// keeping any mutation that still fails.
fn minimize(mut traces: Vec<Vec<Space>>, budget: usize) -> Vec<Vec<Space>> {
    loop {
        let mut improved = false;
        if traces.len() > 1 {
            for i in 0..traces.len() {
                let mut candidate = traces.clone();
                candidate.remove(i);
                if check(&candidate, budget).is_some() {
                    traces = candidate;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            'outer: for i in 0..traces.len() {
                if traces[i].len() <= 1 {
                    continue;
                }
                for j in 0..traces[i].len() {
                    let mut candidate = traces.clone();
                    candidate[i].remove(j);
                    if check(&candidate, budget).is_some() {
                        traces = candidate;
                        improved = true;
                        break 'outer;
                    }
                }
            }
        }
        if !improved {
            'outer: for i in 0..traces.len() {
                for j in 0..traces[i].len() {
                    if traces[i][j] == 0 {
                        continue;
                    }
                    let mut candidate = traces.clone();
                    candidate[i][j] /= 2;
                    if check(&candidate, budget).is_some() {
                        traces = candidate;
                        improved = true;
                        break 'outer;
                    }
                }
            }
        }
        if !improved {
            return traces;
        }
    }
}

/// Runs the fuzz campaign. Returns `Ok(cases)` or the shrunk reproducer.
pub fn run(config: &FuzzConfig) -> Result<u64, (Vec<Vec<Space>>, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.cases {
        let n = rng.random_range(1..=config.max_n);
        let traces: Vec<Vec<Space>> = (0..n)
            .map(|_| {
                let len = rng.random_range(1..=config.max_len);
                (0..len)
                    .map(|_| rng.random_range(0..=config.max_val))
                    .collect()
            })
            .collect();
        if check(&traces, config.budget).is_some() {
            let shrunk = minimize(traces, config.budget);
            let why = check(&shrunk, config.budget).expect("shrunk case still fails");
            return Err((shrunk, why));
        }
    }
    Ok(config.cases)
}
