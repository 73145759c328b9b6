//! Mutation-and-recovery experiments over bundled benchmark domains.

mod mutate;

pub use mutate::{mutate_domain, Mutation, DEFAULT_REMOVED_SHARE};

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::annotated_model::concretize;
use crate::annotated_model::{ground, parse_domain, parse_problem, GroundTask, Selection};
use crate::elicitation::run_queries;
use crate::error::{Error, Result};
use crate::oracle::SimulatedOracle;
use crate::query_gen::{generate_all, GenConfig, QueryKind};

#[derive(Clone, Copy, Debug)]
pub struct Bundled {
    pub name: &'static str,
    pub domain: &'static str,
    pub problem: &'static str,
}

pub const BLOCKSWORLD: Bundled = Bundled {
    name: "blocksworld",
    domain: include_str!("../../data/blocksworld.pddl"),
    problem: include_str!("../../data/blocksworld-p01.pddl"),
};

pub const ROVER: Bundled = Bundled {
    name: "rover",
    domain: include_str!("../../data/rover.pddl"),
    problem: include_str!("../../data/rover-p01.pddl"),
};

pub const ROVER_X2: Bundled = Bundled {
    name: "rover-x2",
    domain: include_str!("../../data/rover.pddl"),
    problem: include_str!("../../data/rover-p02.pddl"),
};

pub const ROVER_X3: Bundled = Bundled {
    name: "rover-x3",
    domain: include_str!("../../data/rover.pddl"),
    problem: include_str!("../../data/rover-p03.pddl"),
};

pub const SATELLITE: Bundled = Bundled {
    name: "satellite",
    domain: include_str!("../../data/satellite.pddl"),
    problem: include_str!("../../data/satellite-p01.pddl"),
};

pub const ZENOTRAVEL: Bundled = Bundled {
    name: "zenotravel",
    domain: include_str!("../../data/zenotravel.pddl"),
    problem: include_str!("../../data/zenotravel-p01.pddl"),
};

pub const BUNDLED: [Bundled; 6] = [
    BLOCKSWORLD,
    ROVER,
    ROVER_X2,
    ROVER_X3,
    SATELLITE,
    ZENOTRAVEL,
];

pub fn bundled(name: &str) -> Option<Bundled> {
    BUNDLED.iter().copied().find(|b| b.name == name)
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: String,
    pub problem: String,
    /// Number of possible conditions to create.
    pub k: usize,
    pub seeds: Vec<u64>,
    pub removed_share: f64,
    pub gen: GenConfig,
}

impl ExperimentConfig {
    pub fn bundled(b: Bundled, k: usize, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            name: b.name.to_string(),
            domain: b.domain.to_string(),
            problem: b.problem.to_string(),
            k,
            seeds,
            removed_share: DEFAULT_REMOVED_SHARE,
            gen: GenConfig::default(),
        }
    }
}

/// One seed's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub n: usize,
    pub queries: usize,
    pub validation: usize,
    pub plan: usize,
    pub template: usize,
    pub merges: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub domain: String,
    pub possible_count: usize,
    pub avg_queries: f64,
    pub avg_val: f64,
    pub avg_plan: f64,
    pub avg_template: f64,
    pub avg_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub row: StatsRow,
    pub runs: Vec<SeedRun>,
}

/// Mutates, generates queries (timed), elicits against the hidden truth,
/// and checks exact recovery; one seed.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let base = parse_domain(&cfg.domain)?;
    let problem = parse_problem(&cfg.problem, &base)?;
    let m = mutate_domain(&base, &problem, cfg.k, seed, cfg.removed_share)?;
    let task: Arc<GroundTask> = Arc::new(ground(&m.domain, &problem));
    let truth = concretize(&task, &Selection::from_map(&task, &m.truth)?)?;
    let init = task.init_state();

    let start = Instant::now();
    let plan = generate_all(&task, &init, &cfg.gen)?;
    let seconds = start.elapsed().as_secs_f64();

    let fail = |detail: String| Error::RecoveryFailed { seed, detail };
    if plan.queries.len() > task.n() {
        return Err(fail(format!(
            "{} queries for {} conditions",
            plan.queries.len(),
            task.n()
        )));
    }
    let mut oracle = SimulatedOracle {
        truth: truth.clone(),
        planner: cfg.gen.planner,
    };
    let order: Vec<usize> = (0..plan.queries.len()).collect();
    let got = run_queries(&task, &plan, &order, &mut oracle).map_err(|e| fail(e.to_string()))?;
    if got.model.selection != truth.selection {
        return Err(fail(format!(
            "elicited\n{}differs from truth\n{}",
            got.model.selection.to_text(&task),
            truth.selection.to_text(&task)
        )));
    }
    Ok(SeedRun {
        seed,
        n: task.n(),
        queries: plan.queries.len(),
        validation: plan.count(QueryKind::Validation, false),
        plan: plan.count(QueryKind::Plan, false),
        template: plan.queries.iter().filter(|q| q.is_template()).count(),
        merges: plan.merges,
        seconds,
    })
}

/// Runs every seed in order and averages.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.k == 0 || cfg.seeds.is_empty() {
        return Err(Error::Mutation("need k >= 1 and at least one seed".into()));
    }
    let runs = cfg
        .seeds
        .iter()
        .map(|&s| run_seed(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let avg = |f: fn(&SeedRun) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let row = StatsRow {
        domain: cfg.name.clone(),
        possible_count: cfg.k,
        avg_queries: avg(|r| r.queries as f64),
        avg_val: avg(|r| r.validation as f64),
        avg_plan: avg(|r| r.plan as f64),
        avg_template: avg(|r| r.template as f64),
        avg_seconds: avg(|r| r.seconds),
    };
    Ok(Report { row, runs })
}

/// CSV with a header row.
pub fn rows_to_csv(rows: &[StatsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Mutation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Mutation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
