//! Reduction of process traces to standardized midzz form.
//!
//! Five local rewrite patterns remove elements without changing the required
//! space of the set: M0 drops one of two equal neighbors, M1/M2 drop the
//! middle of a monotone triple, and M3/M4 drop the inner pair of a
//! downstairs/upstairs quadruple. Start and end peaks are stripped while
//! accounting for the sums of first and last elements, and fully collapsed
//! one-element processes are folded into an additive constant. Every removal
//! is logged so optimal schedules can be mapped back to the original traces.

use crate::error::{checked_add, checked_sum, Result};
use crate::trace::{find_extrema, Process, ProcessSet, Space};
use serde::Serialize;

/// The five space-preserving rewrite patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PatternKind {
    M0,
    M1,
    M2,
    M3,
    M4,
}

impl PatternKind {
    /// Number of elements a single application removes.
    pub fn removed_count(self) -> usize {
        match self {
            PatternKind::M0 | PatternKind::M1 | PatternKind::M2 => 1,
            PatternKind::M3 | PatternKind::M4 => 2,
        }
    }
}

/// What a single reduction event did to a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReductionKind {
    M0,
    M1,
    M2,
    M3,
    M4,
    StartPeak,
    EndPeak,
    OneElement,
}

impl From<PatternKind> for ReductionKind {
    fn from(p: PatternKind) -> Self {
        match p {
            PatternKind::M0 => ReductionKind::M0,
            PatternKind::M1 => ReductionKind::M1,
            PatternKind::M2 => ReductionKind::M2,
            PatternKind::M3 => ReductionKind::M3,
            PatternKind::M4 => ReductionKind::M4,
        }
    }
}

/// One logged removal. `at` is the 1-based anchor index in the trace the
/// event was applied to (the pattern index `i`; 1 for a start peak; the last
/// index for an end peak; 1 for a one-element removal), which is what the
/// schedule re-expansion needs. `original_range` locates the removed values
/// in the original trace for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionEvent {
    pub process_id: String,
    pub kind: ReductionKind,
    pub at: usize,
    pub original_range: (usize, usize),
    pub removed_values: Vec<Space>,
}

/// Matches one pattern at 1-based index `i`, with precedence M0 > M1 > M2 >
/// M3 > M4. M0/M1/M2 remove the element after `i`; M3/M4 remove the two
/// elements after `i`.
pub fn match_pattern(trace: &[Space], i: usize) -> Option<PatternKind> {
    let n = trace.len();
    if i == 0 || i > n {
        return None;
    }
    let a = |k: usize| trace[k - 1];
    if i + 1 <= n && a(i) == a(i + 1) {
        return Some(PatternKind::M0);
    }
    if i + 2 <= n {
        if a(i) <= a(i + 1) && a(i + 1) <= a(i + 2) {
            return Some(PatternKind::M1);
        }
        if a(i) >= a(i + 1) && a(i + 1) >= a(i + 2) {
            return Some(PatternKind::M2);
        }
    }
    if i + 3 <= n {
        let (w, x, y, z) = (a(i), a(i + 1), a(i + 2), a(i + 3));
        if w > x && x < y && y > z && w >= y && x >= z {
            return Some(PatternKind::M3);
        }
        if w < x && x > y && y < z && w <= y && x <= z {
            return Some(PatternKind::M4);
        }
    }
    None
}

/// Left-to-right pattern scan with restart: on a match at index `j` the
/// designated elements are removed and the scan resumes at `max(1, j - 3)`,
/// since a removal cannot enable a match further left than that.
fn reduce_to_fixpoint(
    vals: &mut Vec<Space>,
    orig: &mut Vec<usize>,
    id: &str,
    events: &mut Vec<ReductionEvent>,
) {
    let mut j = 1usize;
    while j <= vals.len() {
        if let Some(kind) = match_pattern(vals, j) {
            let r = kind.removed_count();
            let removed: Vec<Space> = vals.drain(j..j + r).collect();
            let removed_orig: Vec<usize> = orig.drain(j..j + r).collect();
            events.push(ReductionEvent {
                process_id: id.to_string(),
                kind: kind.into(),
                at: j,
                original_range: (removed_orig[0], *removed_orig.last().unwrap()),
                removed_values: removed,
            });
            j = if j > 3 { j - 3 } else { 1 };
        } else {
            j += 1;
        }
    }
}

/// Applies the pattern scan to a single process until no pattern matches.
/// The first and last element values are preserved.
pub fn reduce_patterns(process: &Process) -> (Process, Vec<ReductionEvent>) {
    let mut vals = process.trace().to_vec();
    let mut orig: Vec<usize> = (1..=vals.len()).collect();
    let mut events = Vec::new();
    reduce_to_fixpoint(&mut vals, &mut orig, process.id(), &mut events);
    (
        Process::new(process.id(), vals).expect("pattern reduction keeps traces nonempty"),
        events,
    )
}

/// A pattern-reduced, peak-stripped process set together with the scalars
/// needed to recover the required space of the original set:
/// `spmin(original) = max(spmin(std) + m_one, m_start, m_end)`.
#[derive(Debug, Clone, Serialize)]
pub struct StandardizedSet {
    processes: Vec<Process>,
    m_start: Space,
    m_end: Space,
    m_one: Space,
    events: Vec<ReductionEvent>,
    index_maps: Vec<Vec<usize>>,
    survivors: Vec<usize>,
}

impl StandardizedSet {
    /// The surviving standardized processes (possibly none), original ids.
    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    /// Sum of the first elements of the original processes.
    pub fn m_start(&self) -> Space {
        self.m_start
    }

    /// Sum of the last elements of the original processes.
    pub fn m_end(&self) -> Space {
        self.m_end
    }

    /// Sum of the elements of fully collapsed one-element processes.
    pub fn m_one(&self) -> Space {
        self.m_one
    }

    /// All reduction events in application order.
    pub fn events(&self) -> &[ReductionEvent] {
        &self.events
    }

    pub fn events_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a ReductionEvent> + 'a {
        self.events.iter().filter(move |e| e.process_id == id)
    }

    /// For surviving process `i`: 1-based original index of each kept element.
    pub fn index_map(&self, i: usize) -> &[usize] {
        &self.index_maps[i]
    }

    /// Indices into the original set of the surviving processes.
    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    /// Test-only constructor that skips standardization.
    #[cfg(test)]
    pub(crate) fn fabricate(processes: Vec<Process>) -> Self {
        let survivors = (0..processes.len()).collect();
        let index_maps = processes.iter().map(|p| (1..=p.len()).collect()).collect();
        Self {
            processes,
            m_start: 0,
            m_end: 0,
            m_one: 0,
            events: Vec::new(),
            index_maps,
            survivors,
        }
    }
}

/// Runs the full standardization: pattern fixpoint and start/end peak
/// stripping are iterated until nothing changes, then one-element processes
/// are folded into `m_one`. Peak stripping only ever exposes new patterns or
/// new boundary peaks, so the iteration terminates because the total length
/// strictly decreases.
pub fn standardize(set: &ProcessSet) -> Result<StandardizedSet> {
    let m_start = checked_sum(set.processes().iter().map(|p| p.first()))?;
    let m_end = checked_sum(set.processes().iter().map(|p| p.last()))?;
    let mut events = Vec::new();
    let mut kept: Vec<(usize, Vec<Space>, Vec<usize>)> = Vec::new();
    let mut collapsed: Vec<(usize, Space)> = Vec::new();

    for (i, p) in set.processes().iter().enumerate() {
        let mut vals = p.trace().to_vec();
        let mut orig: Vec<usize> = (1..=vals.len()).collect();
        loop {
            reduce_to_fixpoint(&mut vals, &mut orig, p.id(), &mut events);
            let mut changed = false;
            if vals.len() >= 2 && vals[0] > vals[1] {
                events.push(ReductionEvent {
                    process_id: p.id().to_string(),
                    kind: ReductionKind::StartPeak,
                    at: 1,
                    original_range: (orig[0], orig[0]),
                    removed_values: vec![vals[0]],
                });
                vals.remove(0);
                orig.remove(0);
                changed = true;
                reduce_to_fixpoint(&mut vals, &mut orig, p.id(), &mut events);
            }
            if vals.len() >= 2 && vals[vals.len() - 1] > vals[vals.len() - 2] {
                events.push(ReductionEvent {
                    process_id: p.id().to_string(),
                    kind: ReductionKind::EndPeak,
                    at: vals.len(),
                    original_range: (orig[vals.len() - 1], orig[vals.len() - 1]),
                    removed_values: vec![vals[vals.len() - 1]],
                });
                vals.pop();
                orig.pop();
                changed = true;
            }
            if !changed {
                break;
            }
        }
        if vals.len() == 1 {
            collapsed.push((i, vals[0]));
        } else {
            kept.push((i, vals, orig));
        }
    }

    // One-element removals are logged last so that schedule re-expansion,
    // which undoes events in reverse, re-adds them before anything else.
    let mut m_one: Space = 0;
    for &(i, v) in &collapsed {
        m_one = checked_add(m_one, v)?;
        events.push(ReductionEvent {
            process_id: set.get(i).id().to_string(),
            kind: ReductionKind::OneElement,
            at: 1,
            original_range: (1, 1),
            removed_values: vec![v],
        });
    }

    let mut processes = Vec::new();
    let mut index_maps = Vec::new();
    let mut survivors = Vec::new();
    for (i, vals, orig) in kept {
        debug_assert!(vals.len() >= 3);
        processes.push(Process::new(set.get(i).id(), vals)?);
        index_maps.push(orig);
        survivors.push(i);
    }
    Ok(StandardizedSet {
        processes,
        m_start,
        m_end,
        m_one,
        events,
        index_maps,
        survivors,
    })
}

/// Shape classification of a trace against the monotone zig-zag forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MidzzClass {
    /// Valleys strictly decreasing, peaks strictly increasing.
    Mizz,
    /// Valleys strictly increasing, peaks strictly decreasing.
    Mdzz,
    /// A mizz followed by a mdzz, sharing the junction element.
    Midzz,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MidzzShape {
    pub class: MidzzClass,
    pub global_peaks: Vec<usize>,
    pub global_valleys: Vec<usize>,
}

/// Incremental validity check for one zig-zag part in push order: valleys
/// must strictly decrease, peaks strictly increase, and every valley must lie
/// strictly below every peak. This is the mizz profile; a mdzz pushed in
/// reverse order has the same profile.
struct PartCheck {
    ok: bool,
    last_valley: Option<Space>,
    last_peak: Option<Space>,
    max_valley: Option<Space>,
    min_peak: Option<Space>,
}

impl PartCheck {
    fn new() -> Self {
        Self {
            ok: true,
            last_valley: None,
            last_peak: None,
            max_valley: None,
            min_peak: None,
        }
    }

    fn push(&mut self, value: Space, is_valley: bool) {
        if !self.ok {
            return;
        }
        if is_valley {
            if let Some(prev) = self.last_valley {
                if value >= prev {
                    self.ok = false;
                    return;
                }
            }
            self.last_valley = Some(value);
            self.max_valley = Some(self.max_valley.map_or(value, |m| m.max(value)));
        } else {
            if let Some(prev) = self.last_peak {
                if value <= prev {
                    self.ok = false;
                    return;
                }
            }
            self.last_peak = Some(value);
            self.min_peak = Some(self.min_peak.map_or(value, |m| m.min(value)));
        }
        if let (Some(v), Some(p)) = (self.max_valley, self.min_peak) {
            if v >= p {
                self.ok = false;
            }
        }
    }
}

/// Classifies a trace as mizz, mdzz, midzz or none of these, and reports its
/// global extrema.
pub fn classify_midzz(process: &Process) -> MidzzShape {
    let extrema = find_extrema(process);
    let t = process.trace();
    let m = t.len();

    let mut zig_zag = true;
    for i in 1..m {
        if t[i] == t[i - 1] {
            zig_zag = false;
            break;
        }
        if i >= 2 && (t[i] > t[i - 1]) == (t[i - 1] > t[i - 2]) {
            zig_zag = false;
            break;
        }
    }

    let class = if !zig_zag {
        MidzzClass::Other
    } else {
        // Element k is a valley iff it is a local minimum; with strict
        // alternation this is decided by one neighbor.
        let is_valley = |k: usize| -> bool {
            if k + 1 < m {
                t[k] < t[k + 1]
            } else if k >= 1 {
                t[k] < t[k - 1]
            } else {
                true
            }
        };
        // Part validity is prefix-closed, so a forward pass finds the longest
        // mizz prefix and a backward pass the longest mdzz suffix.
        let mut fwd = PartCheck::new();
        let mut mizz_upto = 0usize; // count of elements in the longest valid prefix
        for k in 0..m {
            fwd.push(t[k], is_valley(k));
            if fwd.ok {
                mizz_upto = k + 1;
            } else {
                break;
            }
        }
        let mut bwd = PartCheck::new();
        let mut mdzz_from = m; // smallest start index of a valid suffix
        for k in (0..m).rev() {
            bwd.push(t[k], is_valley(k));
            if bwd.ok {
                mdzz_from = k;
            } else {
                break;
            }
        }
        if mizz_upto == m {
            MidzzClass::Mizz
        } else if mdzz_from == 0 {
            MidzzClass::Mdzz
        } else if mdzz_from < mizz_upto {
            // Some junction element belongs to both parts.
            MidzzClass::Midzz
        } else {
            MidzzClass::Other
        }
    };
    MidzzShape {
        class,
        global_peaks: extrema.global_peaks,
        global_valleys: extrema.global_valleys,
    }
}

/// True iff the trace satisfies all invariants of a standardized process:
/// length at least 3, no pattern matches, and both boundary elements are
/// local valleys. Pattern-freedom plus the boundary condition implies the
/// midzz shape.
pub fn is_standardized(process: &Process) -> bool {
    let t = process.trace();
    if t.len() < 3 {
        return false;
    }
    if t[0] >= t[1] || t[t.len() - 1] >= t[t.len() - 2] {
        return false;
    }
    (1..=t.len()).all(|i| match_pattern(t, i).is_none())
}
