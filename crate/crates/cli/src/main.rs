//! Command line frontend: solve, oracle, constrained, gen, fuzz, bench and
//! render over JSON problem files.
//!
//! Exit codes: 0 success, 1 fuzz mismatch, 2 input error, 3 arithmetic
//! overflow, 4 budget exceeded, 5 unsatisfiable constraints.

mod bench;
mod fuzz;
mod io;
mod render;

use clap::{Parser, Subcommand};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use spacesched::{
    encode_partition, gen_producer_consumer, oracle_schedule, oracle_spmin, reconstruct_schedule,
    solve_constrained, spoptn, Error, Process, ProcessSet, Space, DEFAULT_ORACLE_BUDGET,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_FUZZ_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_OVERFLOW: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_UNSAT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "spacesched",
    about = "Offline peak-space scheduling for independent process traces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the required space of an unconstrained problem.
    Solve {
        input: PathBuf,
        /// Also emit a certified space-optimal schedule.
        #[arg(long)]
        schedule: bool,
        /// Include standardization events and scan trajectories.
        #[arg(long)]
        explain: bool,
        /// Machine-readable JSON report on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Exact reference solver (bottleneck search over position tuples).
    Oracle {
        input: PathBuf,
        /// Cap on position states (default from SPACESCHED_ORACLE_BUDGET or 2000000).
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        schedule: bool,
        #[arg(long)]
        json: bool,
    },
    /// Solve a problem with synchronization constraints.
    Constrained {
        input: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Generate a problem file on stdout.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Compare the solver against the oracle on random instances.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-n", default_value_t = 4)]
        max_n: usize,
        #[arg(long = "max-len", default_value_t = 6)]
        max_len: usize,
        #[arg(long = "max-val", default_value_t = 20)]
        max_val: Space,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Time the solver across instance sizes and fit a log-log slope.
    Bench {
        /// Comma-separated total element counts.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10_000usize, 100_000, 1_000_000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        procs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Render a problem file or a report as monospace charts.
    Render { input: PathBuf },
}

#[derive(Subcommand)]
enum GenKind {
    /// Partition instance: one process per value plus a marker process.
    Partition {
        /// Comma-separated positive integers, e.g. 1,2,3.
        values: String,
    },
    /// Producer/consumer instance with n exchanged items.
    Prodcons { n: usize },
    /// Random unconstrained instance.
    Random {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        len: usize,
        #[arg(long, default_value_t = 20)]
        max: Space,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Overflow => EXIT_OVERFLOW,
            Error::StateSpaceTooLarge { .. }
            | Error::EnumerationLimit(_)
            | Error::ConstrainedSearchTooLarge { .. } => EXIT_BUDGET,
            Error::NoPermittedSchedule => EXIT_UNSAT,
            Error::ReconstructionInvariant(_) | Error::NotStandardized(_) => 70,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn default_budget(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("SPACESCHED_ORACLE_BUDGET")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

fn read_problem(path: &PathBuf) -> Result<io::ProblemFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    io::parse_problem(&text).map_err(Failure::input)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve {
            input,
            schedule,
            explain,
            json,
        } => cmd_solve(&input, schedule, explain, json),
        Command::Oracle {
            input,
            budget,
            schedule,
            json,
        } => cmd_oracle(&input, default_budget(budget), schedule, json),
        Command::Constrained {
            input,
            budget,
            json,
        } => cmd_constrained(&input, default_budget(budget), json),
        Command::Gen { kind } => cmd_gen(kind),
        Command::Fuzz {
            cases,
            seed,
            max_n,
            max_len,
            max_val,
            budget,
        } => cmd_fuzz(fuzz::FuzzConfig {
            cases,
            seed,
            max_n,
            max_len,
            max_val,
            budget: default_budget(budget),
        }),
        Command::Bench { sizes, procs, seed } => cmd_bench(&sizes, procs, seed),
        Command::Render { input } => cmd_render(&input),
    }
}

fn cmd_solve(path: &PathBuf, schedule: bool, explain: bool, json: bool) -> Result<(), Failure> {
    let problem = read_problem(path)?;
    if problem.constraints.is_some() {
        return Err(Failure::input(
            "problem file has constraints; use the `constrained` subcommand",
        ));
    }
    let set = problem.set;
    let t0 = Instant::now();
    let result = spoptn(&set)?;
    let timing_ms = t0.elapsed().as_secs_f64() * 1e3;
    let sched = if schedule {
        Some(reconstruct_schedule(&set, &result)?)
    } else {
        None
    };

    if json {
        let mut report = json!({
            "spmin": result.spmin,
            "m_left": result.m_left,
            "m_right": result.m_right,
            "m_start": result.m_start,
            "m_end": result.m_end,
            "m_one": result.m_one,
            "timing_ms": timing_ms,
        });
        if let Some(s) = &sched {
            let ids: Vec<&str> = set.processes().iter().map(|p| p.id()).collect();
            report["schedule"] = io::interleaving_to_json(&ids, s);
        }
        if explain {
            report["explain"] = json!({
                "reductions": result.standardized.events(),
                "left": result.left,
                "right": result.right,
            });
        }
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return Ok(());
    }

    println!("spmin = {}", result.spmin);
    if explain {
        println!(
            "components: m_left={} m_right={} m_start={} m_end={} m_one={}",
            result.m_left, result.m_right, result.m_start, result.m_end, result.m_one
        );
        for ev in result.standardized.events() {
            println!(
                "  {:<12} {:?} at index {} removed {:?} (original indices {}..{})",
                ev.process_id,
                ev.kind,
                ev.at,
                ev.removed_values,
                ev.original_range.0,
                ev.original_range.1
            );
        }
        println!("left scan M trajectory:  {:?}", result.left.m_trajectory);
        println!("right scan M trajectory: {:?}", result.right.m_trajectory);
    }
    if let Some(s) = sched {
        let ids: Vec<String> = set.processes().iter().map(|p| p.id().to_string()).collect();
        print!("{}", render::render_schedule_chart(&ids, s.steps(), None));
    }
    println!("solved in {timing_ms:.3} ms");
    Ok(())
}

fn cmd_oracle(path: &PathBuf, budget: usize, schedule: bool, json: bool) -> Result<(), Failure> {
    let problem = read_problem(path)?;
    if problem.constraints.is_some() {
        return Err(Failure::input(
            "problem file has constraints; use the `constrained` subcommand",
        ));
    }
    let set = problem.set;
    let t0 = Instant::now();
    let spmin = oracle_spmin(&set, budget)?;
    let sched = if schedule {
        Some(oracle_schedule(&set, budget)?)
    } else {
        None
    };
    let timing_ms = t0.elapsed().as_secs_f64() * 1e3;
    if json {
        let mut report = json!({"spmin": spmin.0, "timing_ms": timing_ms});
        if let Some(s) = &sched {
            let ids: Vec<&str> = set.processes().iter().map(|p| p.id()).collect();
            report["schedule"] = io::interleaving_to_json(&ids, s);
        }
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("spmin = {spmin} (oracle)");
        if let Some(s) = sched {
            let ids: Vec<String> = set.processes().iter().map(|p| p.id().to_string()).collect();
            print!("{}", render::render_schedule_chart(&ids, s.steps(), None));
        }
        println!("solved in {timing_ms:.3} ms");
    }
    Ok(())
}

fn cmd_constrained(path: &PathBuf, budget: usize, json: bool) -> Result<(), Failure> {
    let problem = read_problem(path)?;
    let formula = problem
        .constraints
        .unwrap_or_else(spacesched::ConstraintFormula::truth);
    let constrained = spacesched::ConstrainedProblem {
        processes: problem.set,
        formula,
    };
    let t0 = Instant::now();
    let (spmin, schedule) = solve_constrained(&constrained, budget)?;
    let timing_ms = t0.elapsed().as_secs_f64() * 1e3;
    if json {
        let report = json!({
            "spmin": spmin.0,
            "schedule": io::timed_schedule_to_json(&constrained.processes, &schedule),
            "timing_ms": timing_ms,
        });
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("spmin = {spmin} (constrained)");
        let set = &constrained.processes;
        let steps = schedule.step_tuples(set);
        let active: Vec<Vec<bool>> = (0..set.len())
            .map(|j| {
                (1..=schedule.horizon())
                    .map(|t| schedule.is_active(j, t))
                    .collect()
            })
            .collect();
        print!(
            "{}",
            render::render_schedule_chart(schedule.ids(), &steps, Some(&active))
        );
        println!("solved in {timing_ms:.3} ms");
    }
    Ok(())
}

fn cmd_gen(kind: GenKind) -> Result<(), Failure> {
    let value = match kind {
        GenKind::Partition { values } => {
            let parsed: Result<Vec<u64>, _> =
                values.split(',').map(|v| v.trim().parse::<u64>()).collect();
            let parsed =
                parsed.map_err(|e| Failure::input(format!("bad partition values: {e}")))?;
            let problem = encode_partition(&parsed)?;
            io::problem_to_json(&problem.processes, Some(&problem.formula))
        }
        GenKind::Prodcons { n } => {
            let problem = gen_producer_consumer(n)?;
            io::problem_to_json(&problem.processes, Some(&problem.formula))
        }
        GenKind::Random { n, len, max, seed } => {
            if n == 0 || len == 0 {
                return Err(Failure::input(
                    "random generation needs n >= 1 and len >= 1",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let processes: Vec<Process> = (0..n)
                .map(|i| {
                    let m = rng.random_range(1..=len);
                    let t: Vec<Space> = (0..m).map(|_| rng.random_range(0..=max)).collect();
                    Process::new(format!("P{}", i + 1), t).unwrap()
                })
                .collect();
            let set = ProcessSet::new(processes)?;
            io::problem_to_json(&set, None)
        }
    };
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    Ok(())
}

fn cmd_fuzz(config: fuzz::FuzzConfig) -> Result<(), Failure> {
    // Refuse bounds whose worst case cannot fit the oracle budget.
    let worst: u128 = (config.max_len as u128).saturating_pow(config.max_n as u32);
    if worst > config.budget as u128 {
        return Err(Failure {
            code: EXIT_BUDGET,
            message: format!(
                "worst case of {worst} states exceeds oracle budget {}",
                config.budget
            ),
        });
    }
    match fuzz::run(&config) {
        Ok(cases) => {
            println!("{cases}/{cases} ok");
            Ok(())
        }
        Err((traces, why)) => {
            let set = ProcessSet::new(
                traces
                    .iter()
                    .enumerate()
                    .map(|(i, t)| Process::new(format!("P{}", i + 1), t.clone()).unwrap())
                    .collect(),
            )?;
            println!("MISMATCH: {why}");
            println!("minimized reproducer:");
            println!(
                "{}",
                serde_json::to_string_pretty(&io::problem_to_json(&set, None)).unwrap()
            );
            Err(Failure {
                code: EXIT_FUZZ_MISMATCH,
                message: why,
            })
        }
    }
}

fn cmd_bench(sizes: &[usize], procs: usize, seed: u64) -> Result<(), Failure> {
    if sizes.is_empty() || procs == 0 {
        return Err(Failure::input(
            "bench needs at least one size and procs >= 1",
        ));
    }
    let rows = bench::run(sizes, procs, seed);
    println!("{:>12}  {:>12}", "size", "seconds");
    for row in &rows {
        println!("{:>12}  {:>12.6}", row.size, row.seconds);
    }
    if let Some(slope) = bench::loglog_slope(&rows) {
        println!("fitted log-log slope: {slope:.3}");
    }
    Ok(())
}

fn cmd_render(path: &PathBuf) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("invalid JSON: {e}")))?;
    if value.get("processes").is_some() {
        let problem = io::parse_problem(&text).map_err(Failure::input)?;
        print!("{}", render::render_curves(&problem.set));
        if problem.constraints.is_some() {
            println!("(constraints present; solve with `constrained` to chart a schedule)");
        }
        return Ok(());
    }
    if let Some(schedule) = value.get("schedule") {
        let ids: Vec<String> = serde_json::from_value(
            schedule
                .get("ids")
                .cloned()
                .ok_or_else(|| Failure::input("schedule lacks ids"))?,
        )
        .map_err(|e| Failure::input(format!("bad schedule ids: {e}")))?;
        let steps: Vec<Vec<Space>> = serde_json::from_value(
            schedule
                .get("steps")
                .cloned()
                .ok_or_else(|| Failure::input("schedule lacks steps"))?,
        )
        .map_err(|e| Failure::input(format!("bad schedule steps: {e}")))?;
        print!("{}", render::render_schedule_chart(&ids, &steps, None));
        return Ok(());
    }
    Err(Failure::input(
        "input is neither a problem file nor a report with a schedule",
    ))
}
