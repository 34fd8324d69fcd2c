//! Abstract process/interleaving model and the space measures.
//!
//! A process is one thread's space usage over its local steps, recorded as a
//! nonempty list of non-negative integers. An interleaving is a global
//! schedule of several processes: per global step it records the tuple of
//! current space values, where each step advances a nonempty subset of the
//! processes by one local step and finished processes hold their last value.

use crate::error::{checked_add, checked_sum, Error, Result};
use serde::Serialize;

/// Abstract space cells. Only addition, subtraction and maximum are ever
/// applied; overflow is detected and reported, never wrapped.
pub type Space = u64;

/// A single process trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Process {
    id: String,
    trace: Vec<Space>,
}

impl Process {
    /// Builds a process from already non-negative values.
    pub fn new(id: impl Into<String>, trace: Vec<Space>) -> Result<Self> {
        let id = id.into();
        if trace.is_empty() {
            return Err(Error::EmptyTrace(id));
        }
        Ok(Self { id, trace })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn trace(&self) -> &[Space] {
        &self.trace
    }

    /// Number of local steps, `m` in the usual notation.
    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> Space {
        self.trace[0]
    }

    pub fn last(&self) -> Space {
        *self.trace.last().unwrap()
    }

    pub fn max(&self) -> Space {
        *self.trace.iter().max().unwrap()
    }

    pub fn min(&self) -> Space {
        *self.trace.iter().min().unwrap()
    }
}

/// Validating constructor for raw (possibly signed) input values.
pub fn make_process(id: impl Into<String>, values: &[i64]) -> Result<Process> {
    let id = id.into();
    if values.is_empty() {
        return Err(Error::EmptyTrace(id));
    }
    for (k, &v) in values.iter().enumerate() {
        if v < 0 {
            return Err(Error::NegativeValue {
                id,
                index: k + 1,
                value: v,
            });
        }
    }
    Process::new(id, values.iter().map(|&v| v as Space).collect())
}

/// An ordered set of processes with distinct ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessSet {
    processes: Vec<Process>,
}

impl ProcessSet {
    pub fn new(processes: Vec<Process>) -> Result<Self> {
        if processes.is_empty() {
            return Err(Error::EmptyProcessSet);
        }
        for (k, p) in processes.iter().enumerate() {
            if processes[..k].iter().any(|q| q.id() == p.id()) {
                return Err(Error::DuplicateId(p.id().to_string()));
            }
        }
        Ok(Self { processes })
    }

    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    /// Number of processes, `N`.
    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total element count over all traces, `n`.
    pub fn total_len(&self) -> usize {
        self.processes.iter().map(|p| p.len()).sum()
    }

    pub fn get(&self, index: usize) -> &Process {
        &self.processes[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.processes.iter().position(|p| p.id() == id)
    }
}

/// A non-negative amount of space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SpaceMeasure(pub Space);

impl std::fmt::Display for SpaceMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// A global schedule: per step the tuple of current space values together
/// with the 1-based per-process indices they were read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interleaving {
    steps: Vec<Vec<Space>>,
    positions: Vec<Vec<usize>>,
}

impl Interleaving {
    /// Structural constructor. Semantic checks against a process set are done
    /// by [`validate_interleaving`].
    pub fn new(steps: Vec<Vec<Space>>, positions: Vec<Vec<usize>>) -> Result<Self> {
        if steps.len() != positions.len() {
            return Err(Error::InvalidInput(format!(
                "{} steps but {} position tuples",
                steps.len(),
                positions.len()
            )));
        }
        let arity = steps.first().map(|s| s.len()).unwrap_or(0);
        for (k, step) in steps.iter().enumerate() {
            if step.len() != arity {
                return Err(Error::ArityMismatch {
                    step: k + 1,
                    got: step.len(),
                    want: arity,
                });
            }
        }
        for (k, pos) in positions.iter().enumerate() {
            if pos.len() != arity {
                return Err(Error::ArityMismatch {
                    step: k + 1,
                    got: pos.len(),
                    want: arity,
                });
            }
        }
        Ok(Self { steps, positions })
    }

    /// Builds the steps by reading the elements at the given positions.
    pub fn from_positions(set: &ProcessSet, positions: Vec<Vec<usize>>) -> Result<Self> {
        let mut steps = Vec::with_capacity(positions.len());
        for pos in &positions {
            if pos.len() != set.len() {
                return Err(Error::ArityMismatch {
                    step: steps.len() + 1,
                    got: pos.len(),
                    want: set.len(),
                });
            }
            let mut step = Vec::with_capacity(pos.len());
            for (i, &idx) in pos.iter().enumerate() {
                let p = set.get(i);
                if idx < 1 || idx > p.len() {
                    return Err(Error::InvalidInput(format!(
                        "position {idx} out of range for process {}",
                        p.id()
                    )));
                }
                step.push(p.trace()[idx - 1]);
            }
            steps.push(step);
        }
        Self::new(steps, positions)
    }

    pub fn steps(&self) -> &[Vec<Space>] {
        &self.steps
    }

    pub fn positions(&self) -> &[Vec<usize>] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.steps.first().map(|s| s.len()).unwrap_or(0)
    }
}

/// Result of validating an interleaving against a process set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Valid => write!(f, "ok"),
            Verdict::Invalid(why) => write!(f, "violation: {why}"),
        }
    }
}

/// The space usage of an interleaving: the maximum over all steps of the sum
/// of the step's tuple.
pub fn sps(interleaving: &Interleaving) -> Result<SpaceMeasure> {
    if interleaving.steps.is_empty() {
        return Err(Error::EmptyInterleaving);
    }
    let mut best: Space = 0;
    for step in &interleaving.steps {
        let s = checked_sum(step.iter().copied())?;
        best = best.max(s);
    }
    Ok(SpaceMeasure(best))
}

/// Checks that the steps are exactly the elements at a position sequence that
/// starts all-ones, ends at all process lengths, and advances a nonempty
/// subset of processes by exactly one index per step.
pub fn validate_interleaving(set: &ProcessSet, interleaving: &Interleaving) -> Verdict {
    let n = set.len();
    if interleaving.steps.is_empty() {
        return Verdict::Invalid("empty interleaving".to_string());
    }
    for (k, (step, pos)) in interleaving
        .steps
        .iter()
        .zip(interleaving.positions.iter())
        .enumerate()
    {
        if step.len() != n || pos.len() != n {
            return Verdict::Invalid(format!("step {} does not have arity {}", k + 1, n));
        }
        for i in 0..n {
            let p = set.get(i);
            if pos[i] < 1 || pos[i] > p.len() {
                return Verdict::Invalid(format!(
                    "position {} out of range for process {} at step {}",
                    pos[i],
                    p.id(),
                    k + 1
                ));
            }
            if step[i] != p.trace()[pos[i] - 1] {
                return Verdict::Invalid(format!(
                    "value mismatch for process {} at step {}: got {}, index {} holds {}",
                    p.id(),
                    k + 1,
                    step[i],
                    pos[i],
                    p.trace()[pos[i] - 1]
                ));
            }
        }
    }
    let first = &interleaving.positions[0];
    if first.iter().any(|&x| x != 1) {
        return Verdict::Invalid("first step must hold every process at index 1".to_string());
    }
    let last = interleaving.positions.last().unwrap();
    for i in 0..n {
        if last[i] != set.get(i).len() {
            return Verdict::Invalid(format!(
                "process {} ends at index {} instead of {}",
                set.get(i).id(),
                last[i],
                set.get(i).len()
            ));
        }
    }
    for w in interleaving.positions.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let mut advanced = 0usize;
        for i in 0..n {
            if next[i] < prev[i] {
                return Verdict::Invalid(format!(
                    "position of process {} decreases",
                    set.get(i).id()
                ));
            }
            match next[i] - prev[i] {
                0 => {}
                1 => advanced += 1,
                _ => {
                    return Verdict::Invalid(format!(
                        "skipped index in process {}",
                        set.get(i).id()
                    ));
                }
            }
        }
        if advanced == 0 {
            return Verdict::Invalid("a step advances no process".to_string());
        }
    }
    Verdict::Valid
}

/// Three proven lower bounds on the required space of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LowerBounds {
    /// Sum of all first elements: every interleaving starts with this tuple.
    pub sum_firsts: Space,
    /// Sum of all last elements: every interleaving ends with this tuple.
    pub sum_lasts: Space,
    /// max over i of (max of trace i + sum of the other traces' minima):
    /// while process i shows its peak the others show at least their minima.
    pub peak_plus_valleys: Space,
}

pub fn lower_bounds(set: &ProcessSet) -> Result<LowerBounds> {
    let sum_firsts = checked_sum(set.processes().iter().map(|p| p.first()))?;
    let sum_lasts = checked_sum(set.processes().iter().map(|p| p.last()))?;
    let total_min = checked_sum(set.processes().iter().map(|p| p.min()))?;
    let mut peak_plus_valleys: Space = 0;
    for p in set.processes() {
        let cand = checked_add(p.max(), total_min - p.min())?;
        peak_plus_valleys = peak_plus_valleys.max(cand);
    }
    Ok(LowerBounds {
        sum_firsts,
        sum_lasts,
        peak_plus_valleys,
    })
}

/// Local and global extrema of one trace, as 1-based indices. Boundary
/// elements are compared only against their single neighbor, so a constant
/// trace has every index as both a local peak and a local valley.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extrema {
    pub local_peaks: Vec<usize>,
    pub local_valleys: Vec<usize>,
    pub global_peaks: Vec<usize>,
    pub global_valleys: Vec<usize>,
}

pub fn find_extrema(process: &Process) -> Extrema {
    let t = process.trace();
    let m = t.len();
    let mut local_peaks = Vec::new();
    let mut local_valleys = Vec::new();
    for i in 0..m {
        let left_ok_peak = i == 0 || t[i] >= t[i - 1];
        let right_ok_peak = i + 1 == m || t[i] >= t[i + 1];
        if left_ok_peak && right_ok_peak {
            local_peaks.push(i + 1);
        }
        let left_ok_valley = i == 0 || t[i] <= t[i - 1];
        let right_ok_valley = i + 1 == m || t[i] <= t[i + 1];
        if left_ok_valley && right_ok_valley {
            local_valleys.push(i + 1);
        }
    }
    let hi = *t.iter().max().unwrap();
    let lo = *t.iter().min().unwrap();
    let global_peaks = (0..m).filter(|&i| t[i] == hi).map(|i| i + 1).collect();
    let global_valleys = (0..m).filter(|&i| t[i] == lo).map(|i| i + 1).collect();
    Extrema {
        local_peaks,
        local_valleys,
        global_peaks,
        global_valleys,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(traces: &[&[i64]]) -> ProcessSet {
        let processes = traces
            .iter()
            .enumerate()
            .map(|(i, t)| make_process(format!("P{}", i + 1), t).unwrap())
            .collect();
        ProcessSet::new(processes).unwrap()
    }

    #[test]
    fn make_process_accepts_paper_trace() {
        let p = make_process("P1", &[1, 7, 3]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.trace(), &[1, 7, 3]);
    }

    #[test]
    fn make_process_minimal_trace() {
        let p = make_process("Z", &[0]).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn make_process_rejects_empty_and_negative() {
        assert!(matches!(make_process("B", &[]), Err(Error::EmptyTrace(_))));
        assert!(matches!(
            make_process("B", &[1, -2]),
            Err(Error::NegativeValue { index: 2, .. })
        ));
    }

    #[test]
    fn process_set_rejects_duplicate_ids() {
        let a = make_process("P", &[1]).unwrap();
        let b = make_process("P", &[2]).unwrap();
        assert!(matches!(
            ProcessSet::new(vec![a, b]),
            Err(Error::DuplicateId(_))
        ));
    }

    fn itl(steps: &[&[Space]], positions: &[&[usize]]) -> Interleaving {
        Interleaving::new(
            steps.iter().map(|s| s.to_vec()).collect(),
            positions.iter().map(|p| p.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn sps_of_optimal_and_eager_paper_interleavings() {
        let optimal = itl(
            &[&[1, 2], &[1, 10], &[1, 4], &[7, 4], &[3, 4]],
            &[&[1, 1], &[1, 2], &[1, 3], &[2, 3], &[3, 3]],
        );
        assert_eq!(sps(&optimal).unwrap(), SpaceMeasure(11));

        let eager = itl(
            &[&[1, 2], &[7, 10], &[3, 4]],
            &[&[1, 1], &[2, 2], &[3, 3]],
        );
        assert_eq!(sps(&eager).unwrap(), SpaceMeasure(17));

        let zeros = itl(&[&[0, 0], &[0, 0]], &[&[1, 1], &[2, 2]]);
        assert_eq!(sps(&zeros).unwrap(), SpaceMeasure(0));
    }

    #[test]
    fn sps_rejects_empty() {
        let empty = Interleaving::new(vec![], vec![]).unwrap();
        assert_eq!(sps(&empty), Err(Error::EmptyInterleaving));
    }

    #[test]
    fn sps_reports_overflow() {
        let big = Space::MAX;
        let steps = vec![vec![big, big]];
        let positions = vec![vec![1, 1]];
        let itl = Interleaving::new(steps, positions).unwrap();
        assert_eq!(sps(&itl), Err(Error::Overflow));
    }

    #[test]
    fn validate_accepts_paper_interleaving() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let optimal = itl(
            &[&[1, 2], &[1, 10], &[1, 4], &[7, 4], &[3, 4]],
            &[&[1, 1], &[1, 2], &[1, 3], &[2, 3], &[3, 3]],
        );
        assert!(validate_interleaving(&s, &optimal).is_valid());
    }

    #[test]
    fn validate_reports_skipped_index() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let bad = itl(&[&[1, 2], &[3, 4]], &[&[1, 1], &[3, 3]]);
        match validate_interleaving(&s, &bad) {
            Verdict::Invalid(why) => assert!(why.contains("skipped index in process P1")),
            Verdict::Valid => panic!("expected violation"),
        }
    }

    #[test]
    fn validate_single_one_element_process() {
        let s = set(&[&[5]]);
        let only = itl(&[&[5]], &[&[1]]);
        assert!(validate_interleaving(&s, &only).is_valid());
    }

    #[test]
    fn validate_rejects_idle_step_and_wrong_end() {
        let s = set(&[&[1, 2]]);
        let idle = itl(&[&[1], &[1], &[2]], &[&[1], &[1], &[2]]);
        assert!(!validate_interleaving(&s, &idle).is_valid());
        let short = itl(&[&[1]], &[&[1]]);
        assert!(!validate_interleaving(&s, &short).is_valid());
    }

    #[test]
    fn lower_bounds_paper_pair() {
        let s = set(&[&[1, 7, 3], &[2, 10, 4]]);
        let b = lower_bounds(&s).unwrap();
        assert_eq!((b.sum_firsts, b.sum_lasts, b.peak_plus_valleys), (3, 7, 11));
    }

    #[test]
    fn lower_bounds_singleton_and_triple() {
        let s = set(&[&[5]]);
        let b = lower_bounds(&s).unwrap();
        assert_eq!((b.sum_firsts, b.sum_lasts, b.peak_plus_valleys), (5, 5, 5));

        let s = set(&[
            &[10, 1, 12, 5, 7, 1],
            &[3, 11, 2, 10, 3],
            &[1, 2, 3, 4, 3, 2, 1],
        ]);
        let b = lower_bounds(&s).unwrap();
        assert_eq!(b.peak_plus_valleys, 15);
    }

    #[test]
    fn extrema_examples() {
        let e = find_extrema(&make_process("P", &[1, 7, 3]).unwrap());
        assert_eq!(e.local_peaks, vec![2]);
        assert_eq!(e.local_valleys, vec![1, 3]);
        assert_eq!(e.global_valleys, vec![1]);

        let e = find_extrema(&make_process("P", &[1, 4, 1]).unwrap());
        assert_eq!(e.global_valleys, vec![1, 3]);

        let e = find_extrema(&make_process("P", &[4, 4, 4]).unwrap());
        assert_eq!(e.local_peaks, vec![1, 2, 3]);
        assert_eq!(e.local_valleys, vec![1, 2, 3]);
    }
}
