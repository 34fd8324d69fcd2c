//! The JSON problem-file format and report serialization.
//!
//! A problem file looks like:
//!
//! ```json
//! {
//!   "version": 1,
//!   "processes": [{"id": "P1", "trace": [10, 1, 12, 5, 7, 1]}],
//!   "constraints": {"op": "and", "args": [
//!     {"atom": "simul", "p1": "P0", "p2": "P1", "i1": 2, "i2": 3}
//!   ]}
//! }
//! ```
//!
//! Atoms are `simul`/`before` with `i1`,`i2` or `starts`/`ends` with `i`;
//! all indices are 1-based. `constraints` is optional.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use spacesched::{
    make_process, BasicRestriction, ConstraintFormula, Interleaving, ProcessSet, TimedSchedule,
};

#[derive(Debug, Deserialize)]
struct ProblemJson {
    version: u32,
    processes: Vec<ProcessJson>,
    #[serde(default)]
    constraints: Option<FormulaJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProcessJson {
    id: String,
    trace: Vec<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FormulaJson {
    Op {
        op: String,
        #[serde(default)]
        args: Vec<FormulaJson>,
    },
    Atom {
        atom: String,
        p1: String,
        p2: String,
        #[serde(default)]
        i: Option<usize>,
        #[serde(default)]
        i1: Option<usize>,
        #[serde(default)]
        i2: Option<usize>,
    },
}

#[derive(Debug)]
pub struct ProblemFile {
    pub set: ProcessSet,
    pub constraints: Option<ConstraintFormula>,
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, String> {
    let parsed: ProblemJson =
        serde_json::from_str(text).map_err(|e| format!("invalid problem file: {e}"))?;
    if parsed.version != 1 {
        return Err(format!(
            "unsupported problem file version {}",
            parsed.version
        ));
    }
    let mut processes = Vec::with_capacity(parsed.processes.len());
    for p in &parsed.processes {
        processes.push(make_process(&p.id, &p.trace).map_err(|e| e.to_string())?);
    }
    let set = ProcessSet::new(processes).map_err(|e| e.to_string())?;
    let constraints = parsed.constraints.map(convert_formula).transpose()?;
    Ok(ProblemFile { set, constraints })
}

fn convert_formula(f: FormulaJson) -> Result<ConstraintFormula, String> {
    Ok(match f {
        FormulaJson::Op { op, args } => match op.as_str() {
            "and" => ConstraintFormula::And(
                args.into_iter()
                    .map(convert_formula)
                    .collect::<Result<_, _>>()?,
            ),
            "or" => ConstraintFormula::Or(
                args.into_iter()
                    .map(convert_formula)
                    .collect::<Result<_, _>>()?,
            ),
            "not" => {
                if args.len() != 1 {
                    return Err(format!("'not' takes exactly one argument, got {}", args.len()));
                }
                ConstraintFormula::Not(Box::new(convert_formula(
                    args.into_iter().next().unwrap(),
                )?))
            }
            other => return Err(format!("unknown operator '{other}'")),
        },
        FormulaJson::Atom {
            atom,
            p1,
            p2,
            i,
            i1,
            i2,
        } => {
            let pair = |what: &str| -> Result<(usize, usize), String> {
                match (i1, i2) {
                    (Some(a), Some(b)) => Ok((a, b)),
                    _ => Err(format!("atom '{what}' needs i1 and i2")),
                }
            };
            let single = |what: &str| -> Result<usize, String> {
                i.ok_or_else(|| format!("atom '{what}' needs i"))
            };
            ConstraintFormula::Atom(match atom.as_str() {
                "simul" => {
                    let (i1, i2) = pair("simul")?;
                    BasicRestriction::Simul { p1, p2, i1, i2 }
                }
                "before" => {
                    let (i1, i2) = pair("before")?;
                    BasicRestriction::Before { p1, p2, i1, i2 }
                }
                "starts" => BasicRestriction::Starts {
                    p1,
                    p2,
                    i: single("starts")?,
                },
                "ends" => BasicRestriction::Ends {
                    p1,
                    p2,
                    i: single("ends")?,
                },
                other => return Err(format!("unknown atom '{other}'")),
            })
        }
    })
}

pub fn formula_to_json(formula: &ConstraintFormula) -> Value {
    match formula {
        ConstraintFormula::And(args) => json!({
            "op": "and",
            "args": args.iter().map(formula_to_json).collect::<Vec<_>>(),
        }),
        ConstraintFormula::Or(args) => json!({
            "op": "or",
            "args": args.iter().map(formula_to_json).collect::<Vec<_>>(),
        }),
        ConstraintFormula::Not(arg) => json!({
            "op": "not",
            "args": [formula_to_json(arg)],
        }),
        ConstraintFormula::Atom(atom) => match atom {
            BasicRestriction::Simul { p1, p2, i1, i2 } => {
                json!({"atom": "simul", "p1": p1, "p2": p2, "i1": i1, "i2": i2})
            }
            BasicRestriction::Before { p1, p2, i1, i2 } => {
                json!({"atom": "before", "p1": p1, "p2": p2, "i1": i1, "i2": i2})
            }
            BasicRestriction::Starts { p1, p2, i } => {
                json!({"atom": "starts", "p1": p1, "p2": p2, "i": i})
            }
            BasicRestriction::Ends { p1, p2, i } => {
                json!({"atom": "ends", "p1": p1, "p2": p2, "i": i})
            }
        },
    }
}

pub fn problem_to_json(set: &ProcessSet, constraints: Option<&ConstraintFormula>) -> Value {
    let mut root = json!({
        "version": 1,
        "processes": set.processes().iter().map(|p| json!({
            "id": p.id(),
            "trace": p.trace(),
        })).collect::<Vec<_>>(),
    });
    if let Some(f) = constraints {
        root["constraints"] = formula_to_json(f);
    }
    root
}

pub fn interleaving_to_json(ids: &[&str], interleaving: &Interleaving) -> Value {
    json!({
        "ids": ids,
        "steps": interleaving.steps(),
        "positions": interleaving.positions(),
    })
}

pub fn timed_schedule_to_json(set: &ProcessSet, schedule: &TimedSchedule) -> Value {
    json!({
        "ids": schedule.ids(),
        "horizon": schedule.horizon(),
        "tau": (0..set.len()).map(|j| schedule.tau(j).to_vec()).collect::<Vec<_>>(),
        "steps": schedule.step_tuples(set),
    })
}
