//! Directional scans over standardized processes and the full required-space
//! computation with certified schedule reconstruction.
//!
//! A scan keeps every process at a local valley and repeatedly advances,
//! across its next peak, the process whose peak is cheapest relative to its
//! current valley, until each process reaches its designated global valley.
//! The running maximum of (valley sum + crossed peak delta) is a lower bound
//! for the required space; the left-to-right and right-to-left maxima
//! together with the start/end/one-element sums are exact.

use crate::error::{checked_add, checked_sum, Error, Result};
use crate::standardize::{is_standardized, standardize, ReductionKind, StandardizedSet};
use crate::trace::{
    sps, validate_interleaving, Interleaving, Process, ProcessSet, Space, SpaceMeasure,
};
use serde::Serialize;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// One accepted scan advancement: the process moved from valley index `from`
/// across the peak at `from + 1` to the valley at `to = from + 2`. Indices
/// are in scan coordinates: for the right-to-left scan they refer to the
/// reversed trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanEvent {
    pub process_id: String,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanResult {
    /// The running maximum `M` at termination.
    pub m: Space,
    /// The final valley sum `S`.
    pub s_final: Space,
    pub events: Vec<ScanEvent>,
    /// Successive values of `M`: the initial sum followed by one entry per
    /// accepted event.
    pub m_trajectory: Vec<Space>,
}

fn rightmost_global_valley(trace: &[Space]) -> usize {
    let lo = *trace.iter().min().unwrap();
    trace.iter().rposition(|&v| v == lo).unwrap() + 1
}

fn leftmost_global_valley(trace: &[Space]) -> usize {
    let lo = *trace.iter().min().unwrap();
    trace.iter().position(|&v| v == lo).unwrap() + 1
}

/// The index at which a scan stops advancing this process: the unique global
/// valley, or the rightmost one if there are two. For the right-to-left
/// direction the rule is applied to the reversed trace and the returned index
/// is in reversed coordinates.
pub fn end_index(process: &Process, direction: Direction) -> usize {
    match direction {
        Direction::LeftToRight => rightmost_global_valley(process.trace()),
        Direction::RightToLeft => {
            let rev: Vec<Space> = process.trace().iter().rev().copied().collect();
            rightmost_global_valley(&rev)
        }
    }
}

/// Runs one directional scan over a standardized set.
pub fn scan(std: &StandardizedSet, direction: Direction) -> Result<ScanResult> {
    for p in std.processes() {
        if !is_standardized(p) {
            return Err(Error::NotStandardized(p.id().to_string()));
        }
    }
    let traces: Vec<Vec<Space>> = std
        .processes()
        .iter()
        .map(|p| match direction {
            Direction::LeftToRight => p.trace().to_vec(),
            Direction::RightToLeft => p.trace().iter().rev().copied().collect(),
        })
        .collect();
    let ends: Vec<usize> = traces
        .iter()
        .map(|t| rightmost_global_valley(t))
        .collect();

    let mut s = checked_sum(traces.iter().map(|t| t[0]))?;
    let mut m = s;
    let mut trajectory = vec![m];
    let mut events = Vec::new();
    let mut pos = vec![1usize; traces.len()];

    // Entries are keyed by (peak delta, process position) so the order is
    // total; equal deltas may be processed in any order without changing M
    // because S never increases between events.
    let mut heap: BinaryHeap<Reverse<(Space, usize)>> = BinaryHeap::new();
    for (i, t) in traces.iter().enumerate() {
        heap.push(Reverse((t[1] - t[0], i)));
    }

    while let Some(Reverse((delta, i))) = heap.pop() {
        if pos[i] + 2 > ends[i] {
            continue;
        }
        let t = &traces[i];
        m = m.max(checked_add(s, delta)?);
        let old_valley = t[pos[i] - 1];
        let new_valley = t[pos[i] + 1];
        debug_assert!(
            new_valley <= old_valley,
            "valleys do not increase before the designated global valley"
        );
        s -= old_valley - new_valley;
        pos[i] += 2;
        events.push(ScanEvent {
            process_id: std.processes()[i].id().to_string(),
            from: pos[i] - 2,
            to: pos[i],
        });
        trajectory.push(m);
        if pos[i] + 2 <= ends[i] {
            heap.push(Reverse((t[pos[i]] - t[pos[i] - 1], i)));
        }
    }
    Ok(ScanResult {
        m,
        s_final: s,
        events,
        m_trajectory: trajectory,
    })
}

/// The required space of a set together with everything needed to explain it
/// and to rebuild an optimal schedule.
#[derive(Debug, Clone, Serialize)]
pub struct SpminResult {
    pub spmin: Space,
    pub m_left: Space,
    pub m_right: Space,
    pub m_start: Space,
    pub m_end: Space,
    pub m_one: Space,
    pub left: ScanResult,
    pub right: ScanResult,
    pub standardized: StandardizedSet,
}

impl SpminResult {
    pub fn spmin(&self) -> SpaceMeasure {
        SpaceMeasure(self.spmin)
    }
}

/// Computes the required space of a process set: standardize, scan in both
/// directions, and combine with the start/end/one-element sums.
pub fn spoptn(set: &ProcessSet) -> Result<SpminResult> {
    let standardized = standardize(set)?;
    let left = scan(&standardized, Direction::LeftToRight)?;
    let right = scan(&standardized, Direction::RightToLeft)?;
    let m_one = standardized.m_one();
    let spmin = checked_add(left.m, m_one)?
        .max(checked_add(right.m, m_one)?)
        .max(standardized.m_start())
        .max(standardized.m_end());
    Ok(SpminResult {
        spmin,
        m_left: left.m,
        m_right: right.m,
        m_start: standardized.m_start(),
        m_end: standardized.m_end(),
        m_one,
        left,
        right,
        standardized,
    })
}

/// The schedule in which every unfinished process advances at every step.
pub fn eager_schedule(set: &ProcessSet) -> Interleaving {
    let horizon = set.processes().iter().map(|p| p.len()).max().unwrap();
    let positions: Vec<Vec<usize>> = (1..=horizon)
        .map(|k| set.processes().iter().map(|p| k.min(p.len())).collect())
        .collect();
    Interleaving::from_positions(set, positions).expect("eager positions are valid by construction")
}

/// Rebuilds a space-optimal interleaving of the original processes from a
/// solver result: replay the left-scan events, splice with the reversed
/// right-scan replay at the matching valley state, then undo every recorded
/// reduction while the other processes hold. Validity and optimality of the
/// result are enforced, not assumed.
pub fn reconstruct_schedule(set: &ProcessSet, result: &SpminResult) -> Result<Interleaving> {
    let std = &result.standardized;
    let stdp = std.processes();
    let n_std = stdp.len();
    let bug = |msg: String| Error::ReconstructionInvariant(msg);

    // Phase 1: glue the two scans into an optimal schedule of the
    // standardized processes. The left scan ends at each process's rightmost
    // global valley; the right part starts at the leftmost one. A process
    // with two global valleys has them adjacent with equal values, so its
    // final left advancement is the mirror image of its final right
    // advancement: dropping it from the left replay makes the two states
    // meet, and the right replay supplies the crossing.
    let v1: Vec<usize> = stdp
        .iter()
        .map(|p| leftmost_global_valley(p.trace()))
        .collect();
    let index_of = |id: &str| -> Result<usize> {
        stdp.iter()
            .position(|p| p.id() == id)
            .ok_or_else(|| bug(format!("unknown standardized process {id}")))
    };

    let mut pos = vec![1usize; n_std];
    let mut sched: Vec<Vec<usize>> = vec![pos.clone()];
    for ev in &result.left.events {
        let i = index_of(&ev.process_id)?;
        if ev.to > v1[i] {
            continue;
        }
        if pos[i] != ev.from {
            return Err(bug(format!(
                "left replay of {} expected position {}, found {}",
                ev.process_id, ev.from, pos[i]
            )));
        }
        for _ in 0..2 {
            pos[i] += 1;
            sched.push(pos.clone());
        }
    }
    for (i, p) in stdp.iter().enumerate() {
        if pos[i] != v1[i] {
            return Err(bug(format!(
                "left replay left {} at {}, expected valley {}",
                p.id(),
                pos[i],
                v1[i]
            )));
        }
    }
    for ev in result.right.events.iter().rev() {
        let i = index_of(&ev.process_id)?;
        let m = stdp[i].len();
        let from = m + 1 - ev.to;
        if pos[i] != from {
            return Err(bug(format!(
                "right replay of {} expected position {}, found {}",
                ev.process_id, from, pos[i]
            )));
        }
        for _ in 0..2 {
            pos[i] += 1;
            sched.push(pos.clone());
        }
    }
    for (i, p) in stdp.iter().enumerate() {
        if pos[i] != p.len() {
            return Err(bug(format!("process {} did not reach its end", p.id())));
        }
    }

    // Phase 2: undo the reduction log, most recent event first. Columns are
    // appended as collapsed processes reappear; `col_of[i]` maps an original
    // set index to its schedule column.
    let mut traces: Vec<Vec<Space>> = stdp.iter().map(|p| p.trace().to_vec()).collect();
    let mut col_of: Vec<Option<usize>> = vec![None; set.len()];
    for (col, &orig) in std.survivors().iter().enumerate() {
        col_of[orig] = Some(col);
    }

    for ev in std.events().iter().rev() {
        let orig = set
            .index_of(&ev.process_id)
            .ok_or_else(|| bug(format!("event for unknown process {}", ev.process_id)))?;
        match ev.kind {
            ReductionKind::OneElement => {
                let col = traces.len();
                traces.push(ev.removed_values.clone());
                col_of[orig] = Some(col);
                for step in sched.iter_mut() {
                    step.push(1);
                }
            }
            ReductionKind::StartPeak => {
                let col = col_of[orig].ok_or_else(|| bug("event before re-add".into()))?;
                traces[col].insert(0, ev.removed_values[0]);
                for step in sched.iter_mut() {
                    step[col] += 1;
                }
                let mut first = sched[0].clone();
                first[col] = 1;
                sched.insert(0, first);
            }
            ReductionKind::EndPeak => {
                let col = col_of[orig].ok_or_else(|| bug("event before re-add".into()))?;
                traces[col].push(ev.removed_values[0]);
                let mut last = sched.last().unwrap().clone();
                last[col] = traces[col].len();
                sched.push(last);
            }
            ReductionKind::M0
            | ReductionKind::M1
            | ReductionKind::M2
            | ReductionKind::M3
            | ReductionKind::M4 => {
                let col = col_of[orig].ok_or_else(|| bug("event before re-add".into()))?;
                let anchor = ev.at;
                let r = ev.removed_values.len();
                let len_after = traces[col].len();
                if anchor > len_after {
                    return Err(bug(format!("anchor {anchor} beyond trace of {len_after}")));
                }
                traces[col].splice(anchor..anchor, ev.removed_values.iter().copied());
                for step in sched.iter_mut() {
                    if step[col] > anchor {
                        step[col] += r;
                    }
                }
                if anchor == len_after {
                    // The removed elements sat at the very end of the trace
                    // (an M0 can drop the last element); walk out to the new
                    // end while everyone else stays at theirs.
                    for j in 1..=r {
                        let mut last = sched.last().unwrap().clone();
                        last[col] = anchor + j;
                        sched.push(last);
                    }
                } else {
                    let t = sched
                        .iter()
                        .position(|step| step[col] > anchor)
                        .ok_or_else(|| bug(format!("no crossing past {anchor} found")))?;
                    if t == 0 || sched[t][col] != anchor + r + 1 || sched[t - 1][col] != anchor {
                        return Err(bug(format!(
                            "unexpected crossing at step {t} while undoing {:?}",
                            ev.kind
                        )));
                    }
                    let hold = sched[t - 1].clone();
                    for j in 1..=r {
                        let mut step = hold.clone();
                        step[col] = anchor + j;
                        sched.insert(t - 1 + j, step);
                    }
                }
            }
        }
    }

    // Phase 3: check the rebuilt traces, reorder columns to set order, and
    // enforce the postconditions.
    for (i, p) in set.processes().iter().enumerate() {
        let col = col_of[i].ok_or_else(|| bug(format!("process {} never re-added", p.id())))?;
        if traces[col] != p.trace() {
            return Err(bug(format!(
                "rebuilt trace for {} does not match the original",
                p.id()
            )));
        }
    }
    let positions: Vec<Vec<usize>> = sched
        .into_iter()
        .map(|step| (0..set.len()).map(|i| step[col_of[i].unwrap()]).collect())
        .collect();
    let interleaving = Interleaving::from_positions(set, positions)?;
    let verdict = validate_interleaving(set, &interleaving);
    if !verdict.is_valid() {
        return Err(bug(format!("reconstructed schedule invalid: {verdict}")));
    }
    let achieved = sps(&interleaving)?;
    if achieved.0 != result.spmin {
        return Err(bug(format!(
            "reconstructed schedule uses {} instead of {}",
            achieved.0, result.spmin
        )));
    }
    Ok(interleaving)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_spmin, DEFAULT_ORACLE_BUDGET};
    use crate::trace::make_process;

    fn set(traces: &[&[i64]]) -> ProcessSet {
        let processes = traces
            .iter()
            .enumerate()
            .map(|(i, t)| make_process(format!("P{}", i + 1), t).unwrap())
            .collect();
        ProcessSet::new(processes).unwrap()
    }

    fn p(values: &[i64]) -> Process {
        make_process("P", values).unwrap()
    }

    #[test]
    fn end_index_examples() {
        assert_eq!(end_index(&p(&[1, 4, 1]), Direction::LeftToRight), 3);
        assert_eq!(end_index(&p(&[1, 4, 1]), Direction::RightToLeft), 3);
        assert_eq!(end_index(&p(&[3, 11, 2, 10, 3]), Direction::LeftToRight), 3);
        assert_eq!(end_index(&p(&[1, 12, 1]), Direction::LeftToRight), 3);
        assert_eq!(end_index(&p(&[1, 7, 3]), Direction::LeftToRight), 1);
        assert_eq!(end_index(&p(&[1, 7, 3]), Direction::RightToLeft), 3);
    }

    #[test]
    fn scan_paper_example_both_directions() {
        let s = set(&[
            &[10, 1, 12, 5, 7, 1],
            &[3, 11, 2, 10, 3],
            &[1, 2, 3, 4, 3, 2, 1],
        ]);
        let std = standardize(&s).unwrap();
        let left = scan(&std, Direction::LeftToRight).unwrap();
        assert_eq!(left.m_trajectory, vec![5, 8, 13, 15]);
        assert_eq!(left.m, 15);
        let right = scan(&std, Direction::RightToLeft).unwrap();
        assert_eq!(right.m_trajectory, vec![5, 8, 12, 15]);
        assert_eq!(right.m, 15);
    }

    #[test]
    fn scan_pair_with_trivial_left() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let std = standardize(&s).unwrap();
        let left = scan(&std, Direction::LeftToRight).unwrap();
        assert_eq!(left.m, 3);
        assert!(left.events.is_empty());
        let right = scan(&std, Direction::RightToLeft).unwrap();
        assert_eq!(right.m, 11);
    }

    #[test]
    fn scan_rejects_unstandardized_input() {
        let fake = crate::standardize::StandardizedSet::fabricate(vec![p(&[1, 2, 3])]);
        assert!(matches!(
            scan(&fake, Direction::LeftToRight),
            Err(Error::NotStandardized(_))
        ));
    }

    #[test]
    fn scan_of_fully_collapsed_set_is_trivial() {
        let std = standardize(&set(&[&[1, 2, 3]])).unwrap();
        assert!(std.processes().is_empty());
        let r = scan(&std, Direction::LeftToRight).unwrap();
        assert_eq!(r.m, 0);
        assert!(r.events.is_empty());
    }

    #[test]
    fn spoptn_paper_examples() {
        let s = set(&[
            &[10, 1, 12, 5, 7, 1],
            &[3, 11, 2, 10, 3],
            &[1, 2, 3, 4, 3, 2, 1],
        ]);
        let r = spoptn(&s).unwrap();
        assert_eq!(r.spmin, 15);
        assert_eq!(r.m_start, 14);

        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let r = spoptn(&s).unwrap();
        assert_eq!(r.spmin, 11);
    }

    #[test]
    fn spmin_consistency_equation_holds() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4], &[5, 5, 5]]);
        let r = spoptn(&s).unwrap();
        assert_eq!(
            r.spmin,
            (r.m_left + r.m_one)
                .max(r.m_right + r.m_one)
                .max(r.m_start)
                .max(r.m_end)
        );
    }

    #[test]
    fn spoptn_singleton() {
        let r = spoptn(&set(&[&[5]])).unwrap();
        assert_eq!(r.spmin, 5);
        assert_eq!(r.m_one, 5);
    }

    #[test]
    fn eager_examples() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let e = eager_schedule(&s);
        assert_eq!(e.steps(), &[vec![1, 2], vec![7, 10], vec![3, 4]]);
        assert_eq!(sps(&e).unwrap().0, 17);

        let s = set(&[&[0, 0], &[0, 0]]);
        assert_eq!(eager_schedule(&s).steps(), &[vec![0, 0], vec![0, 0]]);

        let s = set(&[&[1, 2, 3], &[9]]);
        let e = eager_schedule(&s);
        assert_eq!(e.steps(), &[vec![1, 9], vec![2, 9], vec![3, 9]]);
        assert!(validate_interleaving(&s, &e).is_valid());
    }

    #[test]
    fn reconstruct_paper_pair() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let r = spoptn(&s).unwrap();
        let sched = reconstruct_schedule(&s, &r).unwrap();
        assert!(validate_interleaving(&s, &sched).is_valid());
        assert_eq!(sps(&sched).unwrap().0, 11);
    }

    #[test]
    fn reconstruct_paper_triple() {
        let s = set(&[
            &[10, 1, 12, 5, 7, 1],
            &[3, 11, 2, 10, 3],
            &[1, 2, 3, 4, 3, 2, 1],
        ]);
        let r = spoptn(&s).unwrap();
        let sched = reconstruct_schedule(&s, &r).unwrap();
        assert!(validate_interleaving(&s, &sched).is_valid());
        assert_eq!(sps(&sched).unwrap().0, 15);
    }

    #[test]
    fn reconstruct_singleton() {
        let s = set(&[&[5]]);
        let r = spoptn(&s).unwrap();
        let sched = reconstruct_schedule(&s, &r).unwrap();
        assert_eq!(sched.steps(), &[vec![5]]);
    }

    #[test]
    fn spoptn_matches_oracle_on_edge_shapes() {
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![0]],
            vec![vec![0, 0], vec![0, 0]],
            vec![vec![7, 1, 7]],
            vec![vec![7, 1, 7], vec![3, 9, 2]],
            vec![vec![4, 4, 4], vec![1, 2, 3, 4]],
            vec![vec![1, 10], vec![10, 1]],
            vec![vec![5, 6, 3, 8, 1], vec![1, 8, 3, 6, 5]],
            vec![vec![0, 9, 0], vec![9, 0, 9]],
        ];
        for traces in cases {
            let refs: Vec<&[i64]> = traces.iter().map(|t| t.as_slice()).collect();
            let s = set(&refs);
            let got = spoptn(&s).unwrap().spmin;
            let want = oracle_spmin(&s, DEFAULT_ORACLE_BUDGET).unwrap().0;
            assert_eq!(got, want, "mismatch on {traces:?}");
            let r = spoptn(&s).unwrap();
            let sched = reconstruct_schedule(&s, &r).unwrap();
            assert_eq!(sps(&sched).unwrap().0, want);
        }
    }
}
