//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values when it completes. Run with
//! `cargo test -p spacesched --test acceptance -- --nocapture`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use spacesched::{
    eager_schedule, encode_partition, enumerate_spmin, gen_producer_consumer, lower_bounds,
    oracle_schedule, oracle_spmin, partition_oracle, reconstruct_schedule, reduce_patterns,
    solve_constrained, spoptn, sps, standardize, validate_interleaving, Process, ProcessSet,
    Space, DEFAULT_ORACLE_BUDGET,
};
use std::time::Instant;

fn build_set(traces: Vec<Vec<Space>>) -> ProcessSet {
    ProcessSet::new(
        traces
            .into_iter()
            .enumerate()
            .map(|(i, t)| Process::new(format!("P{}", i + 1), t).unwrap())
            .collect(),
    )
    .unwrap()
}

fn five_section_set() -> ProcessSet {
    build_set(vec![
        vec![10, 1, 12, 5, 7, 1],
        vec![3, 11, 2, 10, 3],
        vec![1, 2, 3, 4, 3, 2, 1],
    ])
}

fn random_set(rng: &mut ChaCha8Rng, max_n: usize, max_len: usize, max_val: Space) -> ProcessSet {
    let n = rng.random_range(1..=max_n);
    build_set(
        (0..n)
            .map(|_| {
                let len = rng.random_range(1..=max_len);
                (0..len).map(|_| rng.random_range(0..=max_val)).collect()
            })
            .collect(),
    )
}

/// The shared corpus of criterion 4, 6 and 10: 1000 seeded sets with
/// N <= 4, lengths <= 6, values <= 20.
fn corpus() -> Vec<ProcessSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..1000).map(|_| random_set(&mut rng, 4, 6, 20)).collect()
}

#[test]
fn criterion_01_worked_example_with_scan_trajectories() {
    let set = five_section_set();
    let t0 = Instant::now();
    let r = spoptn(&set).unwrap();
    let elapsed = t0.elapsed();
    assert_eq!(r.spmin, 15);
    assert_eq!(r.left.m_trajectory, vec![5, 8, 13, 15]);
    assert_eq!(r.right.m_trajectory, vec![5, 8, 12, 15]);
    assert_eq!(r.m_start, 14);
    assert!(
        elapsed.as_millis() < 10,
        "solver took {elapsed:?}, bound is 10 ms"
    );
    println!(
        "criterion 1: PASS  spmin=15, trajectories 5,8,13,15 / 5,8,12,15, m_start=14, {:?}",
        elapsed
    );
}

#[test]
fn criterion_02_two_process_example_with_schedules() {
    let set = build_set(vec![vec![1, 7, 3], vec![2, 10, 4]]);
    let r = spoptn(&set).unwrap();
    assert_eq!(r.spmin, 11);
    let eager = eager_schedule(&set);
    assert_eq!(sps(&eager).unwrap().0, 17);
    let sched = reconstruct_schedule(&set, &r).unwrap();
    assert!(validate_interleaving(&set, &sched).is_valid());
    assert_eq!(sps(&sched).unwrap().0, 11);
    println!("criterion 2: PASS  spmin=11, eager sps=17, certified schedule sps=11");
}

#[test]
fn criterion_03_standardization_goldens() {
    let (r, _) = reduce_patterns(&Process::new("P3", vec![1, 2, 3, 4, 3, 2, 1]).unwrap());
    assert_eq!(r.trace(), &[1, 4, 1]);

    let std = standardize(&five_section_set()).unwrap();
    let traces: Vec<&[Space]> = std.processes().iter().map(|p| p.trace()).collect();
    assert_eq!(
        traces,
        vec![&[1, 12, 1][..], &[3, 11, 2, 10, 3][..], &[1, 4, 1][..]]
    );
    println!("criterion 3: PASS  [1,4,1] / [1,12,1] / [3,11,2,10,3] as expected");
}

#[test]
fn criterion_04_oracle_equivalence() {
    let t0 = Instant::now();
    let sets = corpus();
    for (k, set) in sets.iter().enumerate() {
        let got = spoptn(set).unwrap().spmin;
        let want = oracle_spmin(set, DEFAULT_ORACLE_BUDGET).unwrap().0;
        assert_eq!(got, want, "case {k}: {set:?}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1042);
    for k in 0..200 {
        let set = random_set(&mut rng, 3, 4, 12);
        let a = oracle_spmin(&set, DEFAULT_ORACLE_BUDGET).unwrap();
        let b = enumerate_spmin(&set, 50_000_000).unwrap();
        assert_eq!(a, b, "micro case {k}: {set:?}");
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "equivalence run took {elapsed:?}, bound is 60 s"
    );
    println!(
        "criterion 4: PASS  1000/1000 solver=oracle, 200/200 enumeration=oracle, {:?}",
        elapsed
    );
}

#[test]
fn criterion_05_pattern_soundness() {
    use spacesched::{match_pattern, PatternKind};
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in [
        PatternKind::M0,
        PatternKind::M1,
        PatternKind::M2,
        PatternKind::M3,
        PatternKind::M4,
    ] {
        let mut done = 0;
        while done < 200 {
            let len = rng.random_range(4..=7);
            let mut t: Vec<Space> = (0..len).map(|_| rng.random_range(0..=12)).collect();
            let at = rng.random_range(0..len - 3);
            let mut vals: Vec<Space> = (0..4).map(|_| rng.random_range(0..=12)).collect();
            vals.sort_unstable();
            match kind {
                PatternKind::M0 => t[at + 1] = t[at],
                PatternKind::M1 => {
                    t[at] = vals[0];
                    t[at + 1] = vals[1];
                    t[at + 2] = vals[2];
                }
                PatternKind::M2 => {
                    t[at] = vals[2];
                    t[at + 1] = vals[1];
                    t[at + 2] = vals[0];
                }
                PatternKind::M3 => {
                    let (d, b, c, a) = (vals[0], vals[1], vals[2], vals[3]);
                    if !(a > b && b < c && c > d && b >= d) {
                        continue;
                    }
                    t[at] = a;
                    t[at + 1] = b;
                    t[at + 2] = c;
                    t[at + 3] = d;
                }
                PatternKind::M4 => {
                    let (a, c, b, d) = (vals[0], vals[1], vals[2], vals[3]);
                    if !(a < b && b > c && c < d && b <= d) {
                        continue;
                    }
                    t[at] = a;
                    t[at + 1] = b;
                    t[at + 2] = c;
                    t[at + 3] = d;
                }
            }
            if match_pattern(&t, at + 1) != Some(kind) {
                continue;
            }
            let mut reduced = t.clone();
            reduced.drain(at + 1..at + 1 + kind.removed_count());

            let mut traces = vec![t];
            for _ in 0..rng.random_range(0..=2usize) {
                let len = rng.random_range(1..=5);
                traces.push((0..len).map(|_| rng.random_range(0..=12)).collect());
            }
            let original = build_set(traces.clone());
            traces[0] = reduced;
            let shortened = build_set(traces);
            assert_eq!(
                oracle_spmin(&original, DEFAULT_ORACLE_BUDGET).unwrap(),
                oracle_spmin(&shortened, DEFAULT_ORACLE_BUDGET).unwrap(),
                "{kind:?} changed the oracle spmin"
            );
            done += 1;
        }
    }
    println!("criterion 5: PASS  5 patterns x 200 single applications preserve oracle spmin");
}

#[test]
fn criterion_06_schedule_certification() {
    let set = build_set(vec![vec![1, 7, 3], vec![2, 10, 4]]);
    let r = spoptn(&set).unwrap();
    let sched = reconstruct_schedule(&set, &r).unwrap();
    assert!(validate_interleaving(&set, &sched).is_valid());
    assert_eq!(sps(&sched).unwrap().0, r.spmin);

    let mut certified = 1usize;
    for set in corpus() {
        let r = spoptn(&set).unwrap();
        let sched = reconstruct_schedule(&set, &r).unwrap();
        assert!(validate_interleaving(&set, &sched).is_valid());
        assert_eq!(sps(&sched).unwrap().0, r.spmin);

        let oracle = oracle_schedule(&set, DEFAULT_ORACLE_BUDGET).unwrap();
        assert!(validate_interleaving(&set, &oracle).is_valid());
        assert_eq!(
            sps(&oracle).unwrap().0,
            oracle_spmin(&set, DEFAULT_ORACLE_BUDGET).unwrap().0
        );
        certified += 2;
    }
    println!("criterion 6: PASS  {certified} schedules validated at their reported spmin");
}

#[test]
fn criterion_07_complexity_at_scale() {
    fn instance(rng: &mut ChaCha8Rng, n_procs: usize, total: usize) -> ProcessSet {
        let per = total / n_procs;
        build_set(
            (0..n_procs)
                .map(|_| (0..per).map(|_| rng.random_range(0..=1000)).collect())
                .collect(),
        )
    }
    fn best_time(set: &ProcessSet) -> f64 {
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let t0 = Instant::now();
            let r = spoptn(set).unwrap();
            let dt = t0.elapsed().as_secs_f64();
            assert!(r.spmin > 0);
            best = best.min(dt);
        }
        best
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sizes = [10_000usize, 100_000, 1_000_000];
    let mut times = Vec::new();
    for &n in &sizes {
        let set = instance(&mut rng, 1000, n);
        times.push(best_time(&set));
    }
    let big = times[2];
    assert!(big < 2.0, "n=10^6 took {big:.3} s, bound is 2 s");

    // Least-squares slope of ln(time) against ln(n).
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|&t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!(slope < 1.2, "fitted slope {slope:.3} exceeds 1.2");
    println!(
        "criterion 7: PASS  times {:?} s for n=10^4..10^6, n=10^6 in {:.3} s, slope {:.3}",
        times.iter().map(|t| (t * 1e3).round() / 1e3).collect::<Vec<_>>(),
        big,
        slope
    );
}

#[test]
fn criterion_08_producer_consumer() {
    for n in 1..=3 {
        let t0 = Instant::now();
        let problem = gen_producer_consumer(n).unwrap();
        let (spmin, sched) = solve_constrained(&problem, 2_000_000).unwrap();
        let elapsed = t0.elapsed();
        assert_eq!(spmin.0, 3, "n = {n}");
        assert_eq!(
            spacesched::eval_formula(&problem.formula, &sched),
            Ok(true)
        );
        assert!(
            elapsed.as_secs() < 10,
            "n = {n} took {elapsed:?}, bound is 10 s"
        );
    }
    println!("criterion 8: PASS  producer/consumer needs 3 units for n = 1, 2, 3");
}

#[test]
fn criterion_09_partition_reduction() {
    assert_eq!(
        solve_constrained(&encode_partition(&[1, 2, 3]).unwrap(), 2_000_000)
            .unwrap()
            .0
             .0,
        3
    );
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for k in 0..50 {
        let n = rng.random_range(1..=6);
        let values: Vec<u64> = (0..n).map(|_| rng.random_range(1..=10)).collect();
        let got = solve_constrained(&encode_partition(&values).unwrap(), 2_000_000)
            .unwrap()
            .0;
        let want = partition_oracle(&values).unwrap();
        assert_eq!(got, want, "case {k}: {values:?}");
    }
    println!("criterion 9: PASS  {{1,2,3}} -> 3 and 50/50 encodings match the subset oracle");
}

#[test]
fn criterion_10_lower_bound_properties() {
    for set in corpus() {
        let spmin = spoptn(&set).unwrap().spmin;
        let b = lower_bounds(&set).unwrap();
        assert!(spmin >= b.sum_firsts);
        assert!(spmin >= b.sum_lasts);
        assert!(spmin >= b.peak_plus_valleys);
        let sum_max: Space = set.processes().iter().map(|p| p.max()).sum();
        assert!(spmin <= sum_max);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..200 {
        let set = random_set(&mut rng, 3, 5, 15);
        let base = spoptn(&set).unwrap().spmin;
        let extra: Vec<Space> = (0..rng.random_range(1..=5))
            .map(|_| rng.random_range(0..=15))
            .collect();
        let q_min = *extra.iter().min().unwrap();
        let mut traces: Vec<Vec<Space>> = set
            .processes()
            .iter()
            .map(|p| p.trace().to_vec())
            .collect();
        traces.push(extra);
        let grown = spoptn(&build_set(traces)).unwrap().spmin;
        assert!(grown >= base + q_min);
    }
    println!("criterion 10: PASS  bounds hold on 1000 sets, 200 paired growth cases");
}
