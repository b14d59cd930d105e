use std::fs;
use std::io::Write;
use std::path::Path;

use lfr_stoch::mc::{ecdf_against, write_csv};
use lfr_stoch::presets::{self, write_atomic, RegressionCase};
use lfr_stoch::scenario::{GridOverrides, Scenario, SystemDef, Task, ToleranceOverrides};
use lfr_stoch::{
    emit_curve, find_violation, orders, run_case, sample_system, ComponentSet, Constraint, CurveSpec, EvalGrid,
    ParamBox, Relation, SearchSpec, Status, TolerancePolicy,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CompareArgs, InlineSystems, McArgs, NumericArgs, RegressArgs, RunArgs, SearchArgs};

pub const MIN_MC_SIZE: usize = 100;

/// Process exit codes, ordered by severity for multi-task runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Input = 2,
    Violated = 3,
    Inconclusive = 4,
    Exhausted = 5,
}

impl Exit {
    fn rank(self) -> u8 {
        match self {
            Exit::Ok => 0,
            Exit::Exhausted => 1,
            Exit::Inconclusive => 2,
            Exit::Violated => 3,
            Exit::Input => 4,
        }
    }

    fn worst(self, other: Exit) -> Exit {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }

    fn from_status(s: Status) -> Exit {
        match s {
            Status::Holds => Exit::Ok,
            Status::Violated => Exit::Violated,
            Status::Inconclusive => Exit::Inconclusive,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
}

impl From<lfr_stoch::Error> for Failure {
    fn from(e: lfr_stoch::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<Exit, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// A closed pipe on stdout is not an error worth a panic.
fn print_json(value: &impl Serialize) {
    let text = serde_json::to_string_pretty(value).expect("plain data");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(Scenario::from_json(&text)?)
}

/// Grid, tolerance and seed after applying flags over the scenario.
struct Ctx {
    grid: EvalGrid,
    tol: TolerancePolicy,
    seed: u64,
}

impl Ctx {
    fn new(scenario: Option<&Scenario>, flags: &NumericArgs) -> Result<Self, Failure> {
        let (g, t, seed) = match scenario {
            Some(s) => (s.grid.clone(), s.tolerance.clone(), s.seed),
            None => (GridOverrides::default(), ToleranceOverrides::default(), 0),
        };
        Ok(Ctx {
            grid: g.merged(&flags.grid()).build()?,
            tol: t.merged(&flags.tolerance()).build()?,
            seed: flags.seed.unwrap_or(seed),
        })
    }
}

fn inline_set(name: &str, alpha: &Option<Vec<f64>>, beta: &Option<Vec<f64>>) -> Result<ComponentSet, Failure> {
    let (Some(alpha), Some(beta)) = (alpha, beta) else {
        return Err(input(format!("{name}: both alpha and beta lists are required")));
    };
    let beta = if beta.len() == 1 && alpha.len() > 1 {
        vec![beta[0]; alpha.len()]
    } else {
        beta.clone()
    };
    ComponentSet::from_params(alpha, &beta).map_err(|e| input(format!("{name}: {e}")))
}

fn inline_pair(s: &InlineSystems) -> Result<(SystemDef, SystemDef), Failure> {
    let kind = s.kind.into();
    Ok((
        SystemDef {
            kind,
            components: inline_set("system A (--alpha/--beta)", &s.alpha, &s.beta)?,
        },
        SystemDef {
            kind,
            components: inline_set("system B (--alpha-star/--beta-star)", &s.alpha_star, &s.beta_star)?,
        },
    ))
}

fn compare_one(a: &SystemDef, b: &SystemDef, relation: Relation, ctx: &Ctx) -> Result<(Value, Exit), Failure> {
    let v = orders::check(relation, &a.dist(), &b.dist(), &ctx.grid, &ctx.tol)?;
    eprintln!(
        "{relation}: {:?} (margin {:e}, {} witnesses)",
        v.status,
        v.margin,
        v.witnesses.len()
    );
    let exit = Exit::from_status(v.status);
    Ok((json!({ "task": "compare", "a": a, "b": b, "relation": relation, "verdict": v }), exit))
}

pub fn compare(args: &CompareArgs) -> CmdResult {
    let scenario = args.scenario.as_deref().map(load_scenario).transpose()?;
    let ctx = Ctx::new(scenario.as_ref(), &args.numeric)?;
    let mut results = Vec::new();
    match (&scenario, &args.a, &args.b) {
        (Some(s), Some(a), Some(b)) => {
            let relation = args.relation.ok_or_else(|| input("--relation is required"))?;
            results.push(compare_one(s.system(a)?, s.system(b)?, relation, &ctx)?);
        }
        (Some(s), None, None) => {
            for task in &s.tasks {
                if let Task::Compare { a, b, relation } = task {
                    results.push(compare_one(s.system(a)?, s.system(b)?, *relation, &ctx)?);
                }
            }
            if results.is_empty() {
                return Err(input("scenario has no compare tasks; pass --a and --b"));
            }
        }
        (Some(_), _, _) => return Err(input("--a and --b must be given together")),
        (None, _, _) => {
            let relation = args.relation.ok_or_else(|| input("--relation is required"))?;
            let (a, b) = inline_pair(&args.systems)?;
            results.push(compare_one(&a, &b, relation, &ctx)?);
        }
    }
    finish(results)
}

fn finish(results: Vec<(Value, Exit)>) -> CmdResult {
    let exit = results.iter().fold(Exit::Ok, |acc, (_, e)| acc.worst(*e));
    if results.len() == 1 {
        print_json(&results[0].0);
    } else {
        let values: Vec<&Value> = results.iter().map(|r| &r.0).collect();
        print_json(&json!({ "results": values }));
    }
    Ok(exit)
}

pub fn regress(args: &RegressArgs) -> CmdResult {
    if args.dump_presets {
        print_json(&presets::regression_matrix()?);
        return Ok(Exit::Ok);
    }
    let cases: Vec<RegressionCase> = match &args.presets {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let cases: Vec<RegressionCase> =
                serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
            if cases.is_empty() {
                return Err(input(format!("{}: no regression cases", path.display())));
            }
            cases
        }
        None => presets::regression_matrix()?,
    };
    let ctx = Ctx::new(None, &args.numeric)?;
    let summary = presets::write_regression_outputs(&args.out, &cases, &ctx.grid, &ctx.tol)?;
    for r in &summary.records {
        let label = r.label.as_deref().unwrap_or("?");
        let mark = if r.matches_expectation() && r.flag.is_none() {
            "ok"
        } else {
            "MISMATCH"
        };
        match r.expected {
            Some(e) => eprintln!("{mark:>8}  {label:<28} {:?} (expected {e:?})", r.status),
            None => eprintln!("{mark:>8}  {label:<28} {:?}", r.status),
        }
    }
    eprintln!("wrote {}", args.out.display());
    print_json(&summary);
    if summary.mismatch_count > 0 || summary.discrepant_count > 0 {
        eprintln!(
            "{} mismatched, {} discrepant",
            summary.mismatch_count, summary.discrepant_count
        );
        return Ok(Exit::Violated);
    }
    Ok(Exit::Ok)
}

fn parse_constraint(s: &str) -> Result<Constraint, Failure> {
    serde_json::from_value(Value::String(s.trim().to_string())).map_err(|_| {
        input(format!(
            "unknown regime constraint {s:?} (expected alpha_ge, alpha_le, beta_ge, beta_le, beta_common, alpha_common)"
        ))
    })
}

fn search_one(spec: &SearchSpec, ctx: &Ctx) -> Result<(Value, Exit), Failure> {
    let r = find_violation(spec, &ctx.grid, &ctx.tol)?;
    let exit = if r.found {
        eprintln!("violation found after {} trials", r.trials_used);
        Exit::Ok
    } else {
        eprintln!("no violation in {} trials", r.trials_used);
        Exit::Exhausted
    };
    Ok((json!({ "task": "search", "spec": spec, "result": r }), exit))
}

pub fn search(args: &SearchArgs) -> CmdResult {
    if let Some(path) = &args.scenario {
        let s = load_scenario(path)?;
        let ctx = Ctx::new(Some(&s), &args.numeric)?;
        let mut results = Vec::new();
        for task in &s.tasks {
            if let Some(mut spec) = s.search_spec(task) {
                if let Some(seed) = args.numeric.seed {
                    spec.seed = seed;
                }
                results.push(search_one(&spec, &ctx)?);
            }
        }
        if results.is_empty() {
            return Err(input("scenario has no search tasks"));
        }
        return finish(results);
    }
    let ctx = Ctx::new(None, &args.numeric)?;
    let relation = args.relation.ok_or_else(|| input("--relation is required"))?;
    let regime = args
        .regime
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_constraint(s))
        .collect::<Result<Vec<_>, _>>()?;
    let [lo, hi] = args.param_box[..] else {
        return Err(input("--box takes exactly two values: lo,hi"));
    };
    let param_box = ParamBox::uniform(lo, hi)?;
    let spec = SearchSpec {
        n: args.n,
        relation,
        system_kind: args.kind.into(),
        regime,
        param_box,
        budget: args.budget,
        seed: ctx.seed,
    };
    finish(vec![search_one(&spec, &ctx)?])
}

fn mc_one(
    system: &SystemDef,
    against: Option<&SystemDef>,
    size: usize,
    seed: u64,
    samples_out: Option<&Path>,
) -> Result<(Value, Exit), Failure> {
    if size < MIN_MC_SIZE {
        return Err(input(format!("sample size {size} is below the minimum {MIN_MC_SIZE}")));
    }
    let batch = sample_system(&system.components, system.kind, size, seed)?;
    let target = against.unwrap_or(system);
    let report = ecdf_against(&batch, &target.dist())?;
    if let Some(path) = samples_out {
        let mut buf = Vec::new();
        write_csv(&batch, &mut buf).map_err(|e| input(e.to_string()))?;
        write_atomic(path, &buf).map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    eprintln!(
        "KS statistic {:.6} vs threshold {:.6}: {}",
        report.statistic,
        report.threshold,
        if report.passes { "pass" } else { "FAIL" }
    );
    let exit = if report.passes { Exit::Ok } else { Exit::Violated };
    Ok((
        json!({ "task": "mc", "system": system, "against": against, "seed": seed, "report": report }),
        exit,
    ))
}

pub fn mc(args: &McArgs) -> CmdResult {
    match &args.scenario {
        Some(path) => {
            let s = load_scenario(path)?;
            let seed = args.seed.unwrap_or(s.seed);
            let name = args.system.as_deref().ok_or_else(|| input("--system is required with --scenario"))?;
            let against = args.against.as_deref().map(|n| s.system(n)).transpose()?;
            finish(vec![mc_one(
                s.system(name)?,
                against,
                args.size,
                seed,
                args.samples_out.as_deref(),
            )?])
        }
        None => {
            let system = SystemDef {
                kind: args.systems.kind.into(),
                components: inline_set("system (--alpha/--beta)", &args.systems.alpha, &args.systems.beta)?,
            };
            let against = args.against_kind.map(|k| SystemDef {
                kind: k.into(),
                components: system.components.clone(),
            });
            finish(vec![mc_one(
                &system,
                against.as_ref(),
                args.size,
                args.seed.unwrap_or(0),
                args.samples_out.as_deref(),
            )?])
        }
    }
}

pub fn run(args: &RunArgs) -> CmdResult {
    let s = load_scenario(&args.scenario)?;
    if s.tasks.is_empty() {
        return Err(input("scenario has no tasks"));
    }
    let ctx = Ctx::new(Some(&s), &args.numeric)?;
    let mut results = Vec::new();
    for task in &s.tasks {
        let r = match task {
            Task::Compare { a, b, relation } => compare_one(s.system(a)?, s.system(b)?, *relation, &ctx)?,
            Task::Theorem { theorem, x, y } => {
                let (x, y) = (s.system(x)?, s.system(y)?);
                if x.kind != theorem.system_kind() || y.kind != theorem.system_kind() {
                    return Err(input(format!(
                        "{theorem} is about {} systems",
                        theorem.system_kind()
                    )));
                }
                let case = run_case(*theorem, &x.components, &y.components, &ctx.grid, &ctx.tol)?;
                let exit = if case.discrepant {
                    eprintln!("{theorem}: DISCREPANT");
                    Exit::Violated
                } else if case.verdict.status == Status::Inconclusive {
                    Exit::Inconclusive
                } else {
                    Exit::Ok
                };
                eprintln!(
                    "{theorem}: conditions {}, {:?}",
                    if case.conditions_met { "met" } else { "not met" },
                    case.verdict.status
                );
                (json!({ "task": "theorem", "case": case }), exit)
            }
            Task::Search { .. } => {
                let mut spec = s.search_spec(task).expect("search task");
                if let Some(seed) = args.numeric.seed {
                    spec.seed = seed;
                }
                search_one(&spec, &ctx)?
            }
            Task::Mc {
                system,
                size,
                against,
                seed,
            } => {
                let against = against.as_deref().map(|n| s.system(n)).transpose()?;
                let seed = args.numeric.seed.or(*seed).unwrap_or(ctx.seed);
                mc_one(s.system(system)?, against, *size, seed, None)?
            }
            Task::Curve {
                figure_id,
                quantity,
                x,
                y,
            } => {
                let xd = s.system(x)?;
                let spec = CurveSpec {
                    figure_id: figure_id.clone(),
                    quantity: *quantity,
                    kind: xd.kind,
                    x_set: xd.components.clone(),
                    y_set: y.as_deref().map(|n| s.system(n).map(|d| d.components.clone())).transpose()?,
                    grid: ctx.grid.clone(),
                    substitute_params: false,
                };
                let curve = emit_curve(&spec)?;
                fs::create_dir_all(&args.out).map_err(|e| input(format!("{}: {e}", args.out.display())))?;
                let path = args.out.join(format!("{figure_id}.csv"));
                write_atomic(&path, curve.to_csv_string().as_bytes())
                    .map_err(|e| input(format!("{}: {e}", path.display())))?;
                if curve.warnings > 0 {
                    eprintln!("warning: {figure_id}: {} points could not be evaluated", curve.warnings);
                }
                (
                    json!({ "task": "curve", "figure_id": figure_id, "path": path, "rows": curve.rows.len(), "warnings": curve.warnings }),
                    Exit::Ok,
                )
            }
        };
        results.push(r);
    }
    let exit = results.iter().fold(Exit::Ok, |acc, (_, e)| acc.worst(*e));
    let values: Vec<&Value> = results.iter().map(|r| &r.0).collect();
    print_json(&json!({ "results": values }));
    Ok(exit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_order() {
        assert_eq!(Exit::Ok.worst(Exit::Exhausted), Exit::Exhausted);
        assert_eq!(Exit::Violated.worst(Exit::Inconclusive), Exit::Violated);
        assert_eq!(Exit::Inconclusive.worst(Exit::Exhausted), Exit::Inconclusive);
    }

    #[test]
    fn constraint_names() {
        assert_eq!(parse_constraint("alpha_le").unwrap(), Constraint::AlphaLe);
        assert_eq!(parse_constraint(" beta_common ").unwrap(), Constraint::BetaCommon);
        assert!(parse_constraint("gamma_ge").is_err());
    }

    #[test]
    fn inline_beta_broadcast() {
        let set = inline_set("x", &Some(vec![0.1, 0.2, 0.3]), &Some(vec![0.5])).unwrap();
        assert_eq!(set.betas(), vec![0.5; 3]);
        assert!(inline_set("x", &Some(vec![0.1, 0.2]), &Some(vec![0.5, 0.6, 0.7])).is_err());
        assert!(inline_set("x", &None, &Some(vec![0.5])).is_err());
    }
}
