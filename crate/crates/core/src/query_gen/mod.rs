//! Distinguishing queries: one per possible condition (or per merged group
//! of template conditions), each with an inference table mapping the
//! teammate's answer to condition assignments.

mod certify;
mod generate;
mod qga;
mod templates;

pub use certify::{certify_content, certify_solvability, certify_validity, constraining_presence};
pub use generate::{generate_all, merge_queries, GenConfig, QueryPlan};
pub use qga::{project, qga, qga_with, InitMode, QgaOutcome};
pub use templates::{detect_templates, witnesses, Template};

use std::fmt::Write as _;

use crate::annotated_model::{enumerate_models, CondId, GroundTask};
use crate::error::{Error, Result};
pub use crate::oracle::{simulated_answer, Answer};
use crate::planner::{Goal, Plan, Planner};
use crate::state::{ActionId, FactId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Plan,
    Validation,
}

impl QueryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Plan => "plan",
            QueryKind::Validation => "validation",
        }
    }
}

/// For a plan answer: using any witness action means the target holds its
/// constraining value, using none means it holds its relaxing value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContentRule {
    pub target: CondId,
    pub witnesses: Vec<ActionId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inference {
    /// Solvable means relaxing, unsolvable means constraining.
    Solvability {
        target: CondId,
    },
    /// Valid means relaxing, invalid means constraining.
    Validity {
        target: CondId,
    },
    PlanContent {
        rules: Vec<ContentRule>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub kind: QueryKind,
    pub init: Vec<FactId>,
    pub goal: Goal,
    /// The plan to validate; validation queries only.
    pub plan: Option<Plan>,
    pub targets: Vec<CondId>,
    pub inference: Inference,
    /// Number of templates behind this query; 0 for single-condition PIP queries.
    pub templates: usize,
}

/// Condition value implied by the constraining (`true`) or relaxing reading.
fn presence(task: &GroundTask, c: CondId, constraining: bool) -> bool {
    constraining == constraining_presence(task, c)
}

impl Query {
    pub fn is_template(&self) -> bool {
        self.templates > 0
    }

    /// Maps an answer to assignments. `Ok(None)` when the answer is legal
    /// for the query kind but matches no row of the table.
    pub fn infer(&self, task: &GroundTask, answer: &Answer) -> Result<Option<Vec<(CondId, bool)>>> {
        let illegal = || Error::IllegalAnswer {
            answer: answer.to_string(),
            kind: self.kind.as_str(),
        };
        match (&self.inference, answer) {
            (Inference::Solvability { target }, Answer::YesSolvable(_) | Answer::PlanAnswer(_)) => {
                Ok(Some(vec![(*target, presence(task, *target, false))]))
            }
            (Inference::Solvability { target }, Answer::NoUnsolvable) => {
                Ok(Some(vec![(*target, presence(task, *target, true))]))
            }
            (Inference::Validity { target }, Answer::Valid) => {
                Ok(Some(vec![(*target, presence(task, *target, false))]))
            }
            (Inference::Validity { target }, Answer::Invalid) => {
                Ok(Some(vec![(*target, presence(task, *target, true))]))
            }
            (
                Inference::PlanContent { rules },
                Answer::PlanAnswer(plan) | Answer::YesSolvable(Some(plan)),
            ) => Ok(Some(
                rules
                    .iter()
                    .map(|r| {
                        let used = r.witnesses.iter().any(|&a| plan.contains(a));
                        (r.target, presence(task, r.target, used))
                    })
                    .collect(),
            )),
            (Inference::PlanContent { .. }, Answer::NoUnsolvable | Answer::YesSolvable(None)) => {
                Ok(None)
            }
            _ => Err(illegal()),
        }
    }

    /// Stable structured text record.
    pub fn to_text(&self, task: &GroundTask) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind: {}", self.kind.as_str());
        let _ = writeln!(s, "init: {}", task.fmt_facts(self.init.iter().copied()));
        let mut goal = task.fmt_facts(self.goal.pos.iter().copied());
        for &f in &self.goal.neg {
            if !goal.is_empty() {
                goal.push(' ');
            }
            let _ = write!(goal, "(not {})", task.fact(f));
        }
        if goal.is_empty() {
            goal.push_str("(none)");
        }
        let _ = writeln!(s, "goal: {goal}");
        match &self.plan {
            Some(p) => {
                let _ = writeln!(s, "plan: {}", p.inline(task));
            }
            None => s.push_str("plan: none\n"),
        }
        let targets: Vec<String> = self
            .targets
            .iter()
            .map(|&c| task.conditions[c].to_string())
            .collect();
        let _ = writeln!(s, "targets: {}", targets.join(" "));
        s.push_str("inference:\n");
        let value = |c: CondId, constraining: bool| {
            format!(
                "{}={}",
                task.conditions[c],
                if presence(task, c, constraining) {
                    "present"
                } else {
                    "absent"
                }
            )
        };
        match &self.inference {
            Inference::Solvability { target } => {
                let _ = writeln!(s, "  solvable -> {}", value(*target, false));
                let _ = writeln!(s, "  unsolvable -> {}", value(*target, true));
            }
            Inference::Validity { target } => {
                let _ = writeln!(s, "  valid -> {}", value(*target, false));
                let _ = writeln!(s, "  invalid -> {}", value(*target, true));
            }
            Inference::PlanContent { rules } => {
                for r in rules {
                    let names: Vec<String> = r
                        .witnesses
                        .iter()
                        .map(|&a| task.action(a).to_string())
                        .collect();
                    let _ = writeln!(
                        s,
                        "  plan uses any of {} -> {} else {}",
                        names.join(" "),
                        value(r.target, true),
                        value(r.target, false)
                    );
                }
            }
        }
        s
    }
}

/// Brute force over every concrete model: true iff the simulated answer
/// reads back the model's own value of `cond` in all of them.
pub fn is_distinguishing(
    planner: &Planner,
    query: &Query,
    cond: CondId,
    task: &std::sync::Arc<GroundTask>,
) -> Result<bool> {
    if task.n() > 6 {
        return Err(Error::ScaleExceeded(task.n()));
    }
    for model in enumerate_models(task) {
        let answer = simulated_answer(planner, &model, query)?;
        let Ok(Some(assign)) = query.infer(task, &answer) else {
            return Ok(false);
        };
        match assign.iter().find(|(c, _)| *c == cond) {
            Some(&(_, v)) if v == model.selection.get(cond) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
