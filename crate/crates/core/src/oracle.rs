//! Exact reference solver: bottleneck minimax search over position tuples.
//!
//! The state graph has one node per tuple of 1-based per-process indices; an
//! edge advances a nonempty subset of the unfinished processes by one index.
//! The cost of a path is the maximum tuple sum it visits, and the required
//! space is the minimum such cost from the all-ones tuple to the all-ends
//! tuple. This is the ground truth the scan engine is tested against, so it
//! deliberately shares no code with it.

use crate::error::{checked_sum, Error, Result};
use crate::trace::{Interleaving, ProcessSet, Space, SpaceMeasure};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Default cap on the number of position states the oracle will allocate.
pub const DEFAULT_ORACLE_BUDGET: usize = 2_000_000;

struct StateSpace<'a> {
    set: &'a ProcessSet,
    lens: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl<'a> StateSpace<'a> {
    fn new(set: &'a ProcessSet, budget: usize) -> Result<Self> {
        let lens: Vec<usize> = set.processes().iter().map(|p| p.len()).collect();
        let mut total: u128 = 1;
        for &m in &lens {
            total = total.saturating_mul(m as u128);
        }
        if total > budget as u128 {
            return Err(Error::StateSpaceTooLarge {
                states: total,
                budget,
            });
        }
        let mut strides = vec![1usize; lens.len()];
        for i in 1..lens.len() {
            strides[i] = strides[i - 1] * lens[i - 1];
        }
        Ok(Self {
            set,
            lens,
            strides,
            total: total as usize,
        })
    }

    fn decode(&self, mut code: usize) -> Vec<usize> {
        let mut pos = vec![1usize; self.lens.len()];
        for i in 0..self.lens.len() {
            pos[i] = code % self.lens[i] + 1;
            code /= self.lens[i];
        }
        pos
    }

    fn encode(&self, pos: &[usize]) -> usize {
        pos.iter()
            .zip(&self.strides)
            .map(|(&p, &s)| (p - 1) * s)
            .sum()
    }

    fn sum_at(&self, pos: &[usize]) -> Result<Space> {
        checked_sum(
            pos.iter()
                .enumerate()
                .map(|(i, &p)| self.set.get(i).trace()[p - 1]),
        )
    }
}

fn search(set: &ProcessSet, budget: usize, keep_prev: bool) -> Result<(Space, Option<Vec<u32>>)> {
    let space = StateSpace::new(set, budget)?;
    let n = set.len();
    let goal = space.total - 1;

    let mut dist: Vec<Space> = vec![Space::MAX; space.total];
    let mut prev: Option<Vec<u32>> = keep_prev.then(|| vec![u32::MAX; space.total]);
    let mut heap: BinaryHeap<Reverse<(Space, usize)>> = BinaryHeap::new();

    let start_cost = space.sum_at(&vec![1; n])?;
    dist[0] = start_cost;
    heap.push(Reverse((start_cost, 0)));

    while let Some(Reverse((cost, state))) = heap.pop() {
        if cost > dist[state] {
            continue;
        }
        if state == goal {
            return Ok((cost, prev));
        }
        let pos = space.decode(state);
        let base = space.sum_at(&pos)?;
        let movable: Vec<usize> = (0..n).filter(|&i| pos[i] < space.lens[i]).collect();
        let k = movable.len();
        for mask in 1u32..(1u32 << k) {
            let mut next = pos.clone();
            let mut sum = base as i128;
            for (b, &i) in movable.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    let t = set.get(i).trace();
                    sum += t[next[i]] as i128 - t[next[i] - 1] as i128;
                    next[i] += 1;
                }
            }
            let sum: Space = sum.try_into().map_err(|_| Error::Overflow)?;
            let code = space.encode(&next);
            let edge = cost.max(sum);
            if edge < dist[code] {
                dist[code] = edge;
                if let Some(prev) = prev.as_mut() {
                    prev[code] = state as u32;
                }
                heap.push(Reverse((edge, code)));
            }
        }
    }
    // The goal is always reachable (advance everything each step).
    unreachable!("bottleneck search exhausted without reaching the all-ends state")
}

/// Exact required space of a process set, by bottleneck shortest path.
pub fn oracle_spmin(set: &ProcessSet, budget: usize) -> Result<SpaceMeasure> {
    search(set, budget, false).map(|(cost, _)| SpaceMeasure(cost))
}

/// An interleaving achieving [`oracle_spmin`], reconstructed from the search
/// predecessors.
pub fn oracle_schedule(set: &ProcessSet, budget: usize) -> Result<Interleaving> {
    let (_, prev) = search(set, budget, true)?;
    let prev = prev.unwrap();
    let space = StateSpace::new(set, budget)?;
    let mut chain = vec![space.total - 1];
    while *chain.last().unwrap() != 0 {
        let p = prev[*chain.last().unwrap()];
        debug_assert_ne!(p, u32::MAX);
        chain.push(p as usize);
    }
    chain.reverse();
    let positions: Vec<Vec<usize>> = chain.into_iter().map(|c| space.decode(c)).collect();
    Interleaving::from_positions(set, positions)
}

/// Minimum space usage over every interleaving produced literally by the
/// nondeterministic construction: at each step choose any nonempty subset of
/// the unfinished processes and advance it. Exponential; certifies the
/// bottleneck search on micro instances.
pub fn enumerate_spmin(set: &ProcessSet, limit: u64) -> Result<SpaceMeasure> {
    let n = set.len();
    let lens: Vec<usize> = set.processes().iter().map(|p| p.len()).collect();
    let mut pos = vec![1usize; n];
    let start = checked_sum(set.processes().iter().map(|p| p.first()))?;
    let mut best: Option<Space> = None;
    let mut count: u64 = 0;
    recurse(
        set, &lens, &mut pos, start, &mut best, &mut count, limit,
    )?;
    Ok(SpaceMeasure(best.expect("at least one interleaving exists")))
}

fn recurse(
    set: &ProcessSet,
    lens: &[usize],
    pos: &mut Vec<usize>,
    max_so_far: Space,
    best: &mut Option<Space>,
    count: &mut u64,
    limit: u64,
) -> Result<()> {
    let movable: Vec<usize> = (0..pos.len()).filter(|&i| pos[i] < lens[i]).collect();
    if movable.is_empty() {
        *count += 1;
        if *count > limit {
            return Err(Error::EnumerationLimit(limit));
        }
        *best = Some(best.map_or(max_so_far, |b| b.min(max_so_far)));
        return Ok(());
    }
    let k = movable.len();
    for mask in 1u32..(1u32 << k) {
        let mut sum: i128 = 0;
        for (b, &i) in movable.iter().enumerate() {
            if mask & (1 << b) != 0 {
                pos[i] += 1;
            }
        }
        for i in 0..pos.len() {
            sum += set.get(i).trace()[pos[i] - 1] as i128;
        }
        let sum: Space = sum.try_into().map_err(|_| Error::Overflow)?;
        recurse(set, lens, pos, max_so_far.max(sum), best, count, limit)?;
        for (b, &i) in movable.iter().enumerate() {
            if mask & (1 << b) != 0 {
                pos[i] -= 1;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{make_process, sps, validate_interleaving};

    fn set(traces: &[&[i64]]) -> ProcessSet {
        let processes = traces
            .iter()
            .enumerate()
            .map(|(i, t)| make_process(format!("P{}", i + 1), t).unwrap())
            .collect();
        ProcessSet::new(processes).unwrap()
    }

    #[test]
    fn paper_pair_needs_eleven() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        assert_eq!(oracle_spmin(&s, DEFAULT_ORACLE_BUDGET).unwrap().0, 11);
    }

    #[test]
    fn paper_triple_needs_fifteen() {
        let s = set(&[
            &[10, 1, 12, 5, 7, 1],
            &[3, 11, 2, 10, 3],
            &[1, 2, 3, 4, 3, 2, 1],
        ]);
        assert_eq!(oracle_spmin(&s, DEFAULT_ORACLE_BUDGET).unwrap().0, 15);
    }

    #[test]
    fn crossing_pair_needs_eleven() {
        let s = set(&[&[1, 10], &[10, 1]]);
        assert_eq!(oracle_spmin(&s, DEFAULT_ORACLE_BUDGET).unwrap().0, 11);
    }

    #[test]
    fn budget_is_enforced() {
        let s = set(&[&[0; 200], &[0; 200], &[0; 200]]);
        assert!(matches!(
            oracle_spmin(&s, 1000),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn schedule_achieves_spmin_and_validates() {
        for traces in [
            vec![vec![1i64, 7, 3], vec![2, 10, 4]],
            vec![vec![5]],
            vec![vec![0, 9, 0], vec![9, 0, 9]],
        ] {
            let refs: Vec<&[i64]> = traces.iter().map(|t| t.as_slice()).collect();
            let s = set(&refs);
            let spmin = oracle_spmin(&s, DEFAULT_ORACLE_BUDGET).unwrap();
            let sched = oracle_schedule(&s, DEFAULT_ORACLE_BUDGET).unwrap();
            assert!(validate_interleaving(&s, &sched).is_valid());
            assert_eq!(sps(&sched).unwrap(), spmin);
        }
    }

    #[test]
    fn singleton_schedule_is_the_trace() {
        let s = set(&[&[5]]);
        let sched = oracle_schedule(&s, DEFAULT_ORACLE_BUDGET).unwrap();
        assert_eq!(sched.steps(), &[vec![5]]);
    }

    #[test]
    fn enumerate_matches_oracle_on_examples() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        assert_eq!(enumerate_spmin(&s, 1_000_000).unwrap().0, 11);
        let s = set(&[&[0], &[0]]);
        assert_eq!(enumerate_spmin(&s, 1_000_000).unwrap().0, 0);
    }

    #[test]
    fn enumerate_limit_is_enforced() {
        let s = set(&[&[1, 2, 3, 4], &[1, 2, 3, 4], &[1, 2, 3, 4]]);
        assert!(matches!(
            enumerate_spmin(&s, 10),
            Err(Error::EnumerationLimit(10))
        ));
    }
}
