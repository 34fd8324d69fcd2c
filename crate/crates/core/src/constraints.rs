//! Synchronization restrictions between processes and an exact solver for
//! small constrained instances.
//!
//! The basic restrictions align time points of two processes: `simul` forces
//! two actions onto the same global step, `before` orders them, and
//! `starts`/`ends` align one process's first or last action with an index of
//! another. Arbitrary Boolean combinations are allowed, so finding the
//! minimal space is NP-hard in general and the solver is an exact search.
//!
//! Scheduling model: the timeline is a sequence of global steps. Every
//! process enters its index `i` at step `tau(i)`, with `tau` strictly
//! increasing. By default processes behave exactly as in the unconstrained
//! model: they enter index 1 at step 1 and hold their last value to the end
//! of the horizon. A process that is the subject of a `starts` restriction
//! gains a free start (it contributes 0 before entering index 1), and the
//! subject of an `ends` restriction gains a free end (it contributes 0 after
//! the step it enters its last index). This reproduces the unconstrained
//! required space under an empty formula while letting explicitly
//! synchronized processes occupy sub-intervals of the timeline.

use crate::error::{checked_sum, Error, Result};
use crate::trace::{ProcessSet, Space, SpaceMeasure};
use serde::Serialize;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

/// A 1-based index in a named process's trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TimePointRef {
    pub process: String,
    pub index: usize,
}

/// The four fundamental restrictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BasicRestriction {
    /// The actions at `i1` of `p1` and `i2` of `p2` happen at the same step.
    Simul {
        p1: String,
        p2: String,
        i1: usize,
        i2: usize,
    },
    /// `p1` starts at index `i` of `p2`: tau_1(1) = tau_2(i).
    Starts { p1: String, p2: String, i: usize },
    /// `p1` ends at index `i` of `p2`: tau_1(m_1) = tau_2(i).
    Ends { p1: String, p2: String, i: usize },
    /// The action at `i1` of `p1` happens simultaneously or before the
    /// action at `i2` of `p2`.
    Before {
        p1: String,
        p2: String,
        i1: usize,
        i2: usize,
    },
}

/// Boolean combinations of basic restrictions. The empty conjunction is the
/// always-true formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ConstraintFormula {
    Atom(BasicRestriction),
    And(Vec<ConstraintFormula>),
    Or(Vec<ConstraintFormula>),
    Not(Box<ConstraintFormula>),
}

impl ConstraintFormula {
    pub fn truth() -> Self {
        ConstraintFormula::And(Vec::new())
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a BasicRestriction>) {
        match self {
            ConstraintFormula::Atom(a) => {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
            ConstraintFormula::And(children) | ConstraintFormula::Or(children) => {
                for c in children {
                    c.collect_atoms(out);
                }
            }
            ConstraintFormula::Not(c) => c.collect_atoms(out),
        }
    }

    /// The distinct atoms of the formula, in first-occurrence order.
    pub fn atoms(&self) -> Vec<&BasicRestriction> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }
}

/// Processes plus a restriction formula.
#[derive(Debug, Clone, Serialize)]
pub struct ConstrainedProblem {
    pub processes: ProcessSet,
    pub formula: ConstraintFormula,
}

/// A schedule on the global timeline. `tau[j][i-1]` is the step at which
/// process `j` first shows its element at index `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimedSchedule {
    ids: Vec<String>,
    tau: Vec<Vec<usize>>,
    horizon: usize,
    start_flexible: Vec<bool>,
    end_flexible: Vec<bool>,
}

impl TimedSchedule {
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn tau(&self, process: usize) -> &[usize] {
        &self.tau[process]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Step at which process `j` starts.
    pub fn start_step(&self, process: usize) -> usize {
        self.tau[process][0]
    }

    fn resolve(&self, id: &str, index: usize) -> Result<usize> {
        let j = self
            .ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownTimePoint {
                id: id.to_string(),
                index,
            })?;
        if index < 1 || index > self.tau[j].len() {
            return Err(Error::UnknownTimePoint {
                id: id.to_string(),
                index,
            });
        }
        Ok(j)
    }

    fn tau_of(&self, id: &str, index: usize) -> Result<usize> {
        let j = self.resolve(id, index)?;
        Ok(self.tau[j][index - 1])
    }

    /// Whether process `j` occupies the timeline at step `t`: it has started
    /// and, if its end is flexible, has not yet finished.
    pub fn is_active(&self, process: usize, step: usize) -> bool {
        let tau = &self.tau[process];
        step >= tau[0] && (!self.end_flexible[process] || step <= tau[tau.len() - 1])
    }

    /// Space shown by process `j` at global step `t` (1-based).
    pub fn value_at(&self, set: &ProcessSet, process: usize, step: usize) -> Space {
        let tau = &self.tau[process];
        let m = tau.len();
        if step < tau[0] {
            return 0;
        }
        if step >= tau[m - 1] {
            if self.end_flexible[process] && step > tau[m - 1] {
                return 0;
            }
            return set.get(process).trace()[m - 1];
        }
        let i = tau.partition_point(|&s| s <= step);
        set.get(process).trace()[i - 1]
    }

    /// The step tuples over the whole horizon.
    pub fn step_tuples(&self, set: &ProcessSet) -> Vec<Vec<Space>> {
        (1..=self.horizon)
            .map(|t| (0..self.ids.len()).map(|j| self.value_at(set, j, t)).collect())
            .collect()
    }
}

/// Evaluates a restriction formula on a schedule.
pub fn eval_formula(formula: &ConstraintFormula, schedule: &TimedSchedule) -> Result<bool> {
    Ok(match formula {
        ConstraintFormula::Atom(atom) => match atom {
            BasicRestriction::Simul { p1, p2, i1, i2 } => {
                schedule.tau_of(p1, *i1)? == schedule.tau_of(p2, *i2)?
            }
            BasicRestriction::Starts { p1, p2, i } => {
                schedule.tau_of(p1, 1)? == schedule.tau_of(p2, *i)?
            }
            BasicRestriction::Ends { p1, p2, i } => {
                let m1 = schedule.resolve(p1, 1).map(|j| schedule.tau[j].len())?;
                schedule.tau_of(p1, m1)? == schedule.tau_of(p2, *i)?
            }
            BasicRestriction::Before { p1, p2, i1, i2 } => {
                schedule.tau_of(p1, *i1)? <= schedule.tau_of(p2, *i2)?
            }
        },
        ConstraintFormula::And(children) => {
            for c in children {
                if !eval_formula(c, schedule)? {
                    return Ok(false);
                }
            }
            true
        }
        ConstraintFormula::Or(children) => {
            for c in children {
                if eval_formula(c, schedule)? {
                    return Ok(true);
                }
            }
            false
        }
        ConstraintFormula::Not(c) => !eval_formula(c, schedule)?,
    })
}

/// Three-valued truth while atoms are still being decided by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

/// An atom normalized to two resolved time points. `Simul`, `Starts` and
/// `Ends` become equality of entry steps; `Before` becomes less-or-equal.
#[derive(Debug, Clone, Copy)]
struct NormalizedAtom {
    a: (usize, usize),
    b: (usize, usize),
    equality: bool,
}

fn tri_eval(formula: &ConstraintFormula, states: &[Tri], atoms: &[&BasicRestriction]) -> Tri {
    match formula {
        ConstraintFormula::Atom(a) => {
            let k = atoms.iter().position(|x| *x == a).expect("atom indexed");
            states[k]
        }
        ConstraintFormula::And(children) => {
            let mut result = Tri::True;
            for c in children {
                match tri_eval(c, states, atoms) {
                    Tri::False => return Tri::False,
                    Tri::Unknown => result = Tri::Unknown,
                    Tri::True => {}
                }
            }
            result
        }
        ConstraintFormula::Or(children) => {
            let mut result = Tri::False;
            for c in children {
                match tri_eval(c, states, atoms) {
                    Tri::True => return Tri::True,
                    Tri::Unknown => result = Tri::Unknown,
                    Tri::False => {}
                }
            }
            result
        }
        ConstraintFormula::Not(c) => match tri_eval(c, states, atoms) {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        },
    }
}

/// Per-process status in the search: not yet started, at a 1-based index, or
/// finished (only reachable for end-flexible processes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Status {
    Pending,
    Running(usize),
    Done,
}

struct Solver<'a> {
    set: &'a ProcessSet,
    formula: &'a ConstraintFormula,
    atoms: Vec<&'a BasicRestriction>,
    normalized: Vec<NormalizedAtom>,
    start_flexible: Vec<bool>,
    end_flexible: Vec<bool>,
    budget: usize,
}

type StateKey = (Vec<Status>, u64);

impl<'a> Solver<'a> {
    fn new(problem: &'a ConstrainedProblem, budget: usize) -> Result<Self> {
        let set = &problem.processes;
        let atoms = problem.formula.atoms();
        if atoms.len() > 32 {
            return Err(Error::TooManyAtoms(atoms.len()));
        }
        let resolve = |id: &str, index: usize| -> Result<(usize, usize)> {
            let j = set.index_of(id).ok_or_else(|| Error::UnknownTimePoint {
                id: id.to_string(),
                index,
            })?;
            if index < 1 || index > set.get(j).len() {
                return Err(Error::UnknownTimePoint {
                    id: id.to_string(),
                    index,
                });
            }
            Ok((j, index))
        };
        let mut normalized = Vec::with_capacity(atoms.len());
        for atom in &atoms {
            normalized.push(match atom {
                BasicRestriction::Simul { p1, p2, i1, i2 } => NormalizedAtom {
                    a: resolve(p1, *i1)?,
                    b: resolve(p2, *i2)?,
                    equality: true,
                },
                BasicRestriction::Starts { p1, p2, i } => NormalizedAtom {
                    a: resolve(p1, 1)?,
                    b: resolve(p2, *i)?,
                    equality: true,
                },
                BasicRestriction::Ends { p1, p2, i } => {
                    let j = set.index_of(p1).ok_or_else(|| Error::UnknownTimePoint {
                        id: p1.to_string(),
                        index: 1,
                    })?;
                    NormalizedAtom {
                        a: resolve(p1, set.get(j).len())?,
                        b: resolve(p2, *i)?,
                        equality: true,
                    }
                }
                BasicRestriction::Before { p1, p2, i1, i2 } => NormalizedAtom {
                    a: resolve(p1, *i1)?,
                    b: resolve(p2, *i2)?,
                    equality: false,
                },
            });
        }
        let mut start_flexible = vec![false; set.len()];
        let mut end_flexible = vec![false; set.len()];
        for atom in &atoms {
            match atom {
                BasicRestriction::Starts { p1, .. } => {
                    if let Some(j) = set.index_of(p1) {
                        start_flexible[j] = true;
                    }
                }
                BasicRestriction::Ends { p1, .. } => {
                    if let Some(j) = set.index_of(p1) {
                        end_flexible[j] = true;
                    }
                }
                _ => {}
            }
        }
        Ok(Self {
            set,
            formula: &problem.formula,
            atoms,
            normalized,
            start_flexible,
            end_flexible,
            budget,
        })
    }

    fn atom_state(bits: u64, k: usize) -> Tri {
        match (bits >> (2 * k)) & 0b11 {
            0 => Tri::Unknown,
            1 => Tri::True,
            _ => Tri::False,
        }
    }

    fn set_atom(bits: u64, k: usize, t: Tri) -> u64 {
        let code = match t {
            Tri::Unknown => 0u64,
            Tri::True => 1,
            Tri::False => 2,
        };
        (bits & !(0b11 << (2 * k))) | (code << (2 * k))
    }

    /// Updates atom states given the (process, index) entries of one step.
    fn apply_entries(&self, mut bits: u64, entries: &[(usize, usize)]) -> u64 {
        for (k, na) in self.normalized.iter().enumerate() {
            if Self::atom_state(bits, k) != Tri::Unknown {
                continue;
            }
            let ea = entries.contains(&na.a);
            let eb = entries.contains(&na.b);
            let next = if na.equality {
                match (ea, eb) {
                    (true, true) => Tri::True,
                    (true, false) | (false, true) => Tri::False,
                    (false, false) => Tri::Unknown,
                }
            } else {
                // a must happen at or before b. Whichever side happens first
                // settles the atom; if both happen now it holds.
                match (ea, eb) {
                    (true, _) => Tri::True,
                    (false, true) => Tri::False,
                    (false, false) => Tri::Unknown,
                }
            };
            bits = Self::set_atom(bits, k, next);
        }
        bits
    }

    fn states(&self, bits: u64) -> Vec<Tri> {
        (0..self.atoms.len())
            .map(|k| Self::atom_state(bits, k))
            .collect()
    }

    fn value_of(&self, j: usize, status: Status) -> Space {
        match status {
            Status::Pending | Status::Done => 0,
            Status::Running(i) => self.set.get(j).trace()[i - 1],
        }
    }

    fn is_goal(&self, statuses: &[Status]) -> bool {
        statuses.iter().enumerate().all(|(j, s)| match s {
            Status::Done => true,
            Status::Running(i) => *i == self.set.get(j).len(),
            Status::Pending => false,
        })
    }

    /// Options for one process at the next step. The first option is always
    /// "no change" where legal, so successor enumeration can skip the global
    /// no-op by skipping the all-first combination.
    fn options(&self, j: usize, status: Status) -> Vec<Status> {
        let m = self.set.get(j).len();
        match status {
            Status::Pending => vec![Status::Pending, Status::Running(1)],
            Status::Running(i) if i < m => vec![Status::Running(i), Status::Running(i + 1)],
            Status::Running(_) => {
                if self.end_flexible[j] {
                    // The last element occupies exactly its entry step.
                    vec![Status::Done]
                } else {
                    vec![status]
                }
            }
            Status::Done => vec![Status::Done],
        }
    }

    fn solve(&self) -> Result<(Space, TimedSchedule)> {
        let n = self.set.len();
        let initial_statuses: Vec<Status> = (0..n)
            .map(|j| {
                if self.start_flexible[j] {
                    Status::Pending
                } else {
                    Status::Running(1)
                }
            })
            .collect();

        let mut dist: HashMap<StateKey, Space> = HashMap::new();
        let mut prev: HashMap<StateKey, StateKey> = HashMap::new();
        let mut heap: BinaryHeap<Reverse<(Space, StateKey)>> = BinaryHeap::new();

        // The virtual pre-state sits before step 1; anchored processes are
        // already at index 1 but their entries have not been applied yet.
        let pre: StateKey = (initial_statuses, 0);
        let pre_entries: Vec<(usize, usize)> = (0..n)
            .filter(|&j| !self.start_flexible[j])
            .map(|j| (j, 1))
            .collect();
        // Step 1 outcome: anchored processes enter index 1; flexible ones
        // choose to start now or stay out. These are the search roots.
        for mask in 0..(1u64 << self.start_flexible.iter().filter(|&&f| f).count()) {
            let mut statuses = pre.0.clone();
            let mut entries = pre_entries.clone();
            let mut bit = 0;
            for j in 0..n {
                if self.start_flexible[j] {
                    if mask & (1 << bit) != 0 {
                        statuses[j] = Status::Running(1);
                        entries.push((j, 1));
                    }
                    bit += 1;
                }
            }
            let bits = self.apply_entries(0, &entries);
            if tri_eval(self.formula, &self.states(bits), &self.atoms) == Tri::False {
                continue;
            }
            let cost = checked_sum(
                (0..n).map(|j| self.value_of(j, statuses[j])),
            )?;
            let key = (statuses, bits);
            let entry = dist.entry(key.clone()).or_insert(Space::MAX);
            if cost < *entry {
                *entry = cost;
                heap.push(Reverse((cost, key)));
            }
        }

        while let Some(Reverse((cost, key))) = heap.pop() {
            if dist.get(&key).copied().unwrap_or(Space::MAX) < cost {
                continue;
            }
            let (statuses, bits) = &key;
            if self.is_goal(statuses)
                && tri_eval(self.formula, &self.states(*bits), &self.atoms) == Tri::True
            {
                return Ok((cost, self.rebuild(&prev, &key)?));
            }
            // Enumerate per-process option combinations; combo 0 keeps
            // everything unchanged and is skipped.
            let options: Vec<Vec<Status>> =
                (0..n).map(|j| self.options(j, statuses[j])).collect();
            let combos: usize = options.iter().map(|o| o.len()).product();
            for combo in 0..combos {
                let mut idx = combo;
                let mut next = Vec::with_capacity(n);
                let mut entries: Vec<(usize, usize)> = Vec::new();
                let mut changed = false;
                for j in 0..n {
                    let pick = idx % options[j].len();
                    idx /= options[j].len();
                    let s = options[j][pick];
                    if s != statuses[j] {
                        changed = true;
                        if let Status::Running(i) = s {
                            entries.push((j, i));
                        }
                    }
                    next.push(s);
                }
                if !changed {
                    continue;
                }
                let next_bits = self.apply_entries(*bits, &entries);
                if tri_eval(self.formula, &self.states(next_bits), &self.atoms) == Tri::False {
                    continue;
                }
                let step_sum = checked_sum((0..n).map(|j| self.value_of(j, next[j])))?;
                let edge = cost.max(step_sum);
                let next_key = (next, next_bits);
                let entry = dist.entry(next_key.clone()).or_insert(Space::MAX);
                if edge < *entry {
                    *entry = edge;
                    prev.insert(next_key.clone(), key.clone());
                    heap.push(Reverse((edge, next_key)));
                }
            }
            if dist.len() > self.budget {
                return Err(Error::ConstrainedSearchTooLarge {
                    budget: self.budget,
                });
            }
        }
        Err(Error::NoPermittedSchedule)
    }

    /// Rebuilds tau from the chain of states leading to `goal`.
    fn rebuild(
        &self,
        prev: &HashMap<StateKey, StateKey>,
        goal: &StateKey,
    ) -> Result<TimedSchedule> {
        let mut chain = vec![goal.clone()];
        while let Some(p) = prev.get(chain.last().unwrap()) {
            chain.push(p.clone());
        }
        chain.reverse();
        let n = self.set.len();
        let mut tau: Vec<Vec<usize>> = (0..n).map(|_| Vec::new()).collect();
        for (step0, (statuses, _)) in chain.iter().enumerate() {
            let step = step0 + 1;
            for j in 0..n {
                if let Status::Running(i) = statuses[j] {
                    if tau[j].len() < i {
                        debug_assert_eq!(tau[j].len() + 1, i);
                        tau[j].push(step);
                    }
                }
            }
        }
        for (j, t) in tau.iter().enumerate() {
            if t.len() != self.set.get(j).len() {
                return Err(Error::ReconstructionInvariant(format!(
                    "process {} entered {} of {} indices",
                    self.set.get(j).id(),
                    t.len(),
                    self.set.get(j).len()
                )));
            }
        }
        Ok(TimedSchedule {
            ids: self
                .set
                .processes()
                .iter()
                .map(|p| p.id().to_string())
                .collect(),
            tau,
            horizon: chain.len(),
            start_flexible: self.start_flexible.clone(),
            end_flexible: self.end_flexible.clone(),
        })
    }
}

/// Exact minimal peak space over all schedules permitted by the formula,
/// with a witness schedule. Worst-case exponential; `budget` caps the number
/// of distinct search states.
pub fn solve_constrained(
    problem: &ConstrainedProblem,
    budget: usize,
) -> Result<(SpaceMeasure, TimedSchedule)> {
    let solver = Solver::new(problem, budget)?;
    let (cost, schedule) = solver.solve()?;
    debug_assert_eq!(eval_formula(&problem.formula, &schedule), Ok(true));
    Ok((SpaceMeasure(cost), schedule))
}

/// Encodes a partition instance: which splits of `values` into two groups
/// minimize the larger group sum? Each value becomes a process `[0, a, 0, 0]`
/// forced by the formula to overlap the marker process `P0` either before or
/// after its middle step.
pub fn encode_partition(values: &[u64]) -> Result<ConstrainedProblem> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "partition encoding needs at least one value".to_string(),
        ));
    }
    if values.iter().any(|&v| v == 0) {
        return Err(Error::InvalidInput(
            "partition values must be positive".to_string(),
        ));
    }
    let mut processes = vec![crate::trace::Process::new("P0", vec![0, 0, 0, 0])?];
    let mut clauses = Vec::new();
    for (k, &a) in values.iter().enumerate() {
        let id = format!("P{}", k + 1);
        processes.push(crate::trace::Process::new(&id, vec![0, a, 0, 0])?);
        clauses.push(ConstraintFormula::Or(vec![
            ConstraintFormula::Atom(BasicRestriction::Simul {
                p1: "P0".to_string(),
                p2: id.clone(),
                i1: 2,
                i2: 3,
            }),
            ConstraintFormula::Atom(BasicRestriction::Simul {
                p1: "P0".to_string(),
                p2: id.clone(),
                i1: 3,
                i2: 2,
            }),
        ]));
    }
    Ok(ConstrainedProblem {
        processes: ProcessSet::new(processes)?,
        formula: ConstraintFormula::And(clauses),
    })
}

/// Smallest achievable larger-half sum over all two-way partitions, by
/// exhaustive subset enumeration.
pub fn partition_oracle(values: &[u64]) -> Result<SpaceMeasure> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "partition oracle needs at least one value".to_string(),
        ));
    }
    if values.len() > 24 {
        return Err(Error::InvalidInput(format!(
            "partition oracle limited to 24 values, got {}",
            values.len()
        )));
    }
    let total = checked_sum(values.iter().copied())?;
    let mut best = total;
    for mask in 0..(1u32 << (values.len() - 1)) {
        let mut side: Space = 0;
        for (k, &v) in values.iter().enumerate() {
            if k + 1 == values.len() || mask & (1 << k) != 0 {
                side += v;
            }
        }
        best = best.min(side.max(total - side));
    }
    Ok(SpaceMeasure(best))
}

/// The producer/consumer fixture: producer `P1` and consumer `P2` run `n`
/// unit-space steps; each exchanged item is a process `Q_i = [1, 0]` that is
/// started by the producer's step `i`, may be consumed by the consumer at
/// its step `i` or later, and is finished in order.
pub fn gen_producer_consumer(n: usize) -> Result<ConstrainedProblem> {
    if n < 1 {
        return Err(Error::InvalidInput(
            "producer/consumer needs at least one item".to_string(),
        ));
    }
    let mut processes = vec![
        crate::trace::Process::new("P1", vec![1; n])?,
        crate::trace::Process::new("P2", vec![1; n])?,
    ];
    let mut atoms = Vec::new();
    for i in 1..=n {
        processes.push(crate::trace::Process::new(format!("Q{i}"), vec![1, 0])?);
        atoms.push(ConstraintFormula::Atom(BasicRestriction::Starts {
            p1: format!("Q{i}"),
            p2: "P1".to_string(),
            i,
        }));
        atoms.push(ConstraintFormula::Atom(BasicRestriction::Before {
            p1: "P2".to_string(),
            p2: format!("Q{i}"),
            i1: i,
            i2: 2,
        }));
    }
    for i in 1..n {
        atoms.push(ConstraintFormula::Atom(BasicRestriction::Before {
            p1: format!("Q{i}"),
            p2: format!("Q{}", i + 1),
            i1: 2,
            i2: 2,
        }));
    }
    Ok(ConstrainedProblem {
        processes: ProcessSet::new(processes)?,
        formula: ConstraintFormula::And(atoms),
    })
}
