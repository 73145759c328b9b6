//! Command-line front end.

use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::annotated_model::{
    concretize, enumerate_models, ground, most_constrained, most_relaxed, parse_domain,
    parse_problem, parse_selection_text, GroundTask, Selection,
};
use crate::elicitation::{run_queries, ElicitedModel};
use crate::error::Error;
use crate::harness::{
    bundled, mutate_domain, rows_to_csv, run_experiment, ExperimentConfig, BUNDLED,
};
use crate::oracle::{InteractiveOracle, SimulatedOracle};
use crate::planner::{Goal, Planner, DEFAULT_BUDGET};
use crate::planning_graph::OrderBasis;
use crate::query_gen::{generate_all, GenConfig, QueryPlan};

#[derive(Parser, Debug)]
#[command(
    name = "elicit",
    version,
    about = "Ask a teammate questions that pin down their planning model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Node budget for each planner call.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Ground hosts (and template alternatives) tried per condition.
    #[arg(long, default_value_t = GenConfig::default().max_hosts)]
    max_hosts: usize,
    /// Seed for anything randomized.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct TaskFiles {
    /// Annotated domain file.
    domain: PathBuf,
    /// Problem file.
    problem: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a domain (and problem) and report on the candidate models.
    Check {
        domain: PathBuf,
        problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Turn a concrete domain into an annotated one with a hidden truth.
    Annotate {
        #[command(flatten)]
        files: TaskFiles,
        /// Number of possible conditions to create.
        #[arg(long)]
        k: usize,
        /// Where to write the truth selection.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value_t = crate::harness::DEFAULT_REMOVED_SHARE)]
        removed_share: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Print the query plan.
    Queries {
        #[command(flatten)]
        files: TaskFiles,
        /// Order conditions by the all-present model's graph.
        #[arg(long)]
        join_order: bool,
        #[arg(long)]
        no_merge: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a question session.
    Elicit {
        #[command(flatten)]
        files: TaskFiles,
        /// `simulated:<truth file>` or `interactive`.
        #[arg(long)]
        oracle: String,
        /// Machine-readable session log, one JSON object per question.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Mutation-and-recovery experiments; prints CSV.
    Eval {
        /// Bundled domain names; all four benchmark domains when omitted.
        #[arg(long = "bundled", value_delimiter = ',')]
        names: Vec<String>,
        /// A domain file instead of a bundled one.
        #[arg(long, requires = "problem")]
        domain: Option<PathBuf>,
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Condition counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "4,6")]
        k: Vec<usize>,
        /// Seeds per row, starting at --seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &PathBuf) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(files: &TaskFiles) -> anyhow::Result<Arc<GroundTask>> {
    let d =
        parse_domain(&read(&files.domain)?).with_context(|| files.domain.display().to_string())?;
    let p = parse_problem(&read(&files.problem)?, &d)
        .with_context(|| files.problem.display().to_string())?;
    Ok(Arc::new(ground(&d, &p)))
}

fn emit(common: &Common, text: &str, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match &common.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn gen_config(common: &Common) -> GenConfig {
    GenConfig {
        planner: Planner::new(common.budget),
        max_hosts: common.max_hosts,
        ..GenConfig::default()
    }
}

/// Failures that mean the pipeline itself gave a wrong result.
fn is_assertion(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::RecoveryFailed { .. }
                | Error::InconsistentOracle { .. }
                | Error::ConflictingAssignment(_)
        )
    ) || e.downcast_ref::<Mismatch>().is_some()
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Mismatch(String);

fn check(
    domain: &PathBuf,
    problem: &Option<PathBuf>,
    common: &Common,
    stdout: &mut dyn Write,
) -> anyhow::Result<()> {
    let d = parse_domain(&read(domain)?).with_context(|| domain.display().to_string())?;
    let mut s = format!(
        "domain {}: {} actions, {} possible conditions\n",
        d.name,
        d.schemas.len(),
        d.n()
    );
    for c in d.conditions() {
        s.push_str(&format!("  {c}\n"));
    }
    if let Some(problem) = problem {
        let p =
            parse_problem(&read(problem)?, &d).with_context(|| problem.display().to_string())?;
        let t = Arc::new(ground(&d, &p));
        s.push_str(&format!(
            "problem {}: {} objects, {} ground facts, {} ground actions, {} candidate models\n",
            p.name,
            p.objects.len(),
            t.num_facts(),
            t.actions.len(),
            if t.n() < 64 {
                (1u64 << t.n()).to_string()
            } else {
                format!("2^{}", t.n())
            }
        ));
        let planner = Planner::new(common.budget);
        let goal = Goal::positive(t.goal_facts());
        for (label, m) in [
            ("most constrained", most_constrained(&t)),
            ("most relaxed", most_relaxed(&t)),
        ] {
            let cost = planner.optimal_cost(&m, &t.init_state(), &goal)?;
            s.push_str(&format!(
                "  {label}: {}\n",
                cost.map_or_else(|| "unsolvable".to_string(), |c| format!("optimal cost {c}"))
            ));
        }
        if t.n() <= 6 {
            let solvable = enumerate_models(&t)
                .filter(|m| planner.solvable(m, &t.init_state(), &goal).unwrap_or(false))
                .count();
            s.push_str(&format!(
                "  solvable in {solvable} of {} models\n",
                1u64 << t.n()
            ));
        }
    }
    emit(common, &s, stdout)
}

fn elicit(
    files: &TaskFiles,
    oracle: &str,
    log: &Option<PathBuf>,
    common: &Common,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> anyhow::Result<()> {
    let task = load(files)?;
    let cfg = gen_config(common);
    let plan: QueryPlan = generate_all(&task, &task.init_state(), &cfg)?;
    let order: Vec<usize> = (0..plan.queries.len()).collect();
    let (got, truth): (ElicitedModel, Option<Selection>) =
        if let Some(path) = oracle.strip_prefix("simulated:") {
            let map = parse_selection_text(&read(&PathBuf::from(path))?)
                .map_err(|e| anyhow!("{path}: {e}"))?;
            let selection = Selection::from_map(&task, &map)?;
            let mut o = SimulatedOracle {
                truth: concretize(&task, &selection)?,
                planner: cfg.planner,
            };
            (run_queries(&task, &plan, &order, &mut o)?, Some(selection))
        } else if oracle == "interactive" {
            writeln!(
                stdout,
                "{} question(s) about {} possible condition(s).",
                plan.queries.len(),
                task.n()
            )?;
            let mut o = InteractiveOracle {
                task: &task,
                input: stdin,
                output: &mut *stdout,
            };
            (run_queries(&task, &plan, &order, &mut o)?, None)
        } else {
            return Err(anyhow!(
                "unknown oracle `{oracle}`; use simulated:<truth file> or interactive"
            ));
        };
    if let Some(path) = log {
        fs::write(path, got.transcript.to_json_lines(&task))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(common, &got.transcript.to_text(&task), stdout)?;
    if let Some(truth) = truth {
        if &truth != got.selection() {
            return Err(Mismatch("elicited model differs from the truth file".into()).into());
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn eval(
    names: &[String],
    domain: &Option<PathBuf>,
    problem: &Option<PathBuf>,
    k: &[usize],
    seeds: u64,
    common: &Common,
    stdout: &mut dyn Write,
) -> anyhow::Result<()> {
    let mut configs = Vec::new();
    let seed_list: Vec<u64> = (common.seed..common.seed + seeds).collect();
    let gen = gen_config(common);
    if let (Some(d), Some(p)) = (domain, problem) {
        for &k in k {
            configs.push(ExperimentConfig {
                name: d
                    .file_stem()
                    .map_or("domain".into(), |s| s.to_string_lossy().into_owned()),
                domain: read(d)?,
                problem: read(p)?,
                k,
                seeds: seed_list.clone(),
                removed_share: crate::harness::DEFAULT_REMOVED_SHARE,
                gen,
            });
        }
    } else {
        let default = ["blocksworld", "rover", "satellite", "zenotravel"].map(String::from);
        let names = if names.is_empty() {
            &default[..]
        } else {
            names
        };
        for name in names {
            let b = bundled(name).ok_or_else(|| {
                let known: Vec<&str> = BUNDLED.iter().map(|b| b.name).collect();
                anyhow!(
                    "unknown bundled domain `{name}`; known: {}",
                    known.join(", ")
                )
            })?;
            for &k in k {
                configs.push(ExperimentConfig {
                    gen,
                    ..ExperimentConfig::bundled(b, k, seed_list.clone())
                });
            }
        }
    }
    let rows = configs
        .iter()
        .map(|c| run_experiment(c).map(|r| r.row))
        .collect::<Result<Vec<_>, _>>()?;
    emit(common, &rows_to_csv(&rows)?, stdout)
}

fn dispatch(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Check {
            domain,
            problem,
            common,
        } => check(&domain, &problem, &common, stdout),
        Command::Annotate {
            files,
            k,
            truth,
            removed_share,
            common,
        } => {
            let d = parse_domain(&read(&files.domain)?)
                .with_context(|| files.domain.display().to_string())?;
            let p = parse_problem(&read(&files.problem)?, &d)
                .with_context(|| files.problem.display().to_string())?;
            let m = mutate_domain(&d, &p, k, common.seed, removed_share)?;
            let mut truth_text = String::new();
            for (c, v) in &m.truth {
                truth_text.push_str(&format!("{c} {}\n", if *v { "present" } else { "absent" }));
            }
            match truth {
                Some(path) => fs::write(&path, truth_text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => stdout.write_all(
                    format!(
                        "# truth\n{}",
                        truth_text
                            .lines()
                            .map(|l| format!("# {l}\n"))
                            .collect::<String>()
                    )
                    .as_bytes(),
                )?,
            }
            emit(&common, &m.domain.to_string(), stdout)
        }
        Command::Queries {
            files,
            join_order,
            no_merge,
            common,
        } => {
            let task = load(&files)?;
            let mut cfg = gen_config(&common);
            if join_order {
                cfg.basis = OrderBasis::Join;
            }
            cfg.merge = !no_merge;
            let plan = generate_all(&task, &task.init_state(), &cfg)?;
            emit(&common, &plan.to_text(&task), stdout)
        }
        Command::Elicit {
            files,
            oracle,
            log,
            common,
        } => elicit(&files, &oracle, &log, &common, stdin, stdout),
        Command::Eval {
            names,
            domain,
            problem,
            k,
            seeds,
            common,
        } => eval(&names, &domain, &problem, &k, seeds, &common, stdout),
    }
}

/// Runs the tool and returns its exit status: 0 on success, 1 on usage,
/// input, or runtime errors, 2 when a result fails its own check.
pub fn run(
    args: &[String],
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdin, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if is_assertion(&e) {
                2
            } else {
                1
            }
        }
    }
}
