//! Running a question session and reading the teammate's model off the answers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::json;

use crate::annotated_model::{concretize, ConcreteModel, CondId, GroundTask, Selection};
use crate::error::{Error, Result};
use crate::oracle::{Answer, Oracle};
use crate::query_gen::{generate_all, GenConfig, Inference, Query, QueryKind, QueryPlan};
use crate::state::State;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exchange {
    /// Position of the query in its query plan, from 1.
    pub index: usize,
    pub query: Query,
    pub answer: Answer,
    pub assignments: Vec<(CondId, bool)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub exchanges: Vec<Exchange>,
    pub selection: BTreeMap<CondId, bool>,
}

impl Transcript {
    pub fn count(&self, kind: QueryKind, template: bool) -> usize {
        self.exchanges
            .iter()
            .filter(|e| e.query.kind == kind && e.query.is_template() == template)
            .count()
    }

    pub fn to_text(&self, task: &GroundTask) -> String {
        let mut s = String::new();
        for e in &self.exchanges {
            let _ = writeln!(s, "question {}", e.index);
            for line in e.query.to_text(task).lines() {
                let _ = writeln!(s, "  {line}");
            }
            let _ = writeln!(s, "answer: {}", e.answer.render(task));
            for &(c, v) in &e.assignments {
                let _ = writeln!(
                    s,
                    "inferred: {} {}",
                    task.conditions[c],
                    if v { "present" } else { "absent" }
                );
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "asked: {} (validation {}, plan {}, template {})",
            self.exchanges.len(),
            self.count(QueryKind::Validation, false),
            self.count(QueryKind::Plan, false),
            self.exchanges
                .iter()
                .filter(|e| e.query.is_template())
                .count()
        );
        s.push_str("elicited:\n");
        for (&c, &v) in &self.selection {
            let _ = writeln!(
                s,
                "{} {}",
                task.conditions[c],
                if v { "present" } else { "absent" }
            );
        }
        s
    }

    /// One JSON object per exchange.
    pub fn to_json_lines(&self, task: &GroundTask) -> String {
        let mut s = String::new();
        for e in &self.exchanges {
            let assignments: BTreeMap<String, &str> = e
                .assignments
                .iter()
                .map(|&(c, v)| {
                    (
                        task.conditions[c].to_string(),
                        if v { "present" } else { "absent" },
                    )
                })
                .collect();
            let record = json!({
                "index": e.index,
                "kind": e.query.kind.as_str(),
                "templates": e.query.templates,
                "init": e.query.init.iter().map(|&f| task.fact(f).to_string()).collect::<Vec<_>>(),
                "goal": e.query.goal.pos.iter().map(|&f| task.fact(f).to_string()).collect::<Vec<_>>(),
                "goal_not": e.query.goal.neg.iter().map(|&f| task.fact(f).to_string()).collect::<Vec<_>>(),
                "plan": e.query.plan.as_ref().map(|p| p.inline(task)),
                "targets": e.query.targets.iter().map(|&c| task.conditions[c].to_string()).collect::<Vec<_>>(),
                "answer": e.answer.render(task),
                "assignments": assignments,
            });
            s.push_str(&record.to_string());
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ElicitedModel {
    pub model: ConcreteModel,
    pub transcript: Transcript,
}

impl ElicitedModel {
    pub fn selection(&self) -> &Selection {
        &self.model.selection
    }
}

/// Answer-table lookup; solvability queries only need yes or no.
pub fn infer(
    task: &GroundTask,
    index: usize,
    query: &Query,
    answer: &Answer,
) -> Result<Vec<(CondId, bool)>> {
    query
        .infer(task, answer)?
        .ok_or_else(|| Error::InconsistentOracle {
            query: index,
            detail: format!("answer `{}` matches no row", answer.render(task)),
        })
}

fn downgrade(query: &Query, answer: Answer) -> Answer {
    match (&query.inference, answer) {
        (Inference::Solvability { .. }, Answer::PlanAnswer(_) | Answer::YesSolvable(_)) => {
            Answer::YesSolvable(None)
        }
        (_, a) => a,
    }
}

/// Asks the queries of `plan` in the given order of indices (0-based).
pub fn run_queries(
    task: &Arc<GroundTask>,
    plan: &QueryPlan,
    order: &[usize],
    oracle: &mut dyn Oracle,
) -> Result<ElicitedModel> {
    let mut transcript = Transcript::default();
    for &i in order {
        let query = &plan.queries[i];
        if query
            .targets
            .iter()
            .all(|c| transcript.selection.contains_key(c))
        {
            continue;
        }
        let answer = downgrade(query, oracle.answer(i + 1, query)?);
        let assignments = infer(task, i + 1, query, &answer)?;
        for &(c, v) in &assignments {
            if transcript
                .selection
                .insert(c, v)
                .is_some_and(|old| old != v)
            {
                return Err(Error::ConflictingAssignment(task.conditions[c].to_string()));
            }
        }
        transcript.exchanges.push(Exchange {
            index: i + 1,
            query: query.clone(),
            answer,
            assignments,
        });
    }
    if let Some(c) = (0..task.n()).find(|c| !transcript.selection.contains_key(c)) {
        return Err(Error::Aborted(format!(
            "no query settled {}",
            task.conditions[c]
        )));
    }
    let selection = Selection::new((0..task.n()).map(|c| transcript.selection[&c]).collect());
    Ok(ElicitedModel {
        model: concretize(task, &selection)?,
        transcript,
    })
}

/// Generates the queries and asks them all in plan order.
pub fn run_session(
    task: &Arc<GroundTask>,
    init_e: &State,
    cfg: &GenConfig,
    oracle: &mut dyn Oracle,
) -> Result<ElicitedModel> {
    let plan = generate_all(task, init_e, cfg)?;
    let order: Vec<usize> = (0..plan.queries.len()).collect();
    run_queries(task, &plan, &order, oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotated_model::*;
    use crate::fixtures::*;
    use crate::oracle::SimulatedOracle;
    use crate::planner::Planner;

    fn fetch(domain: &str) -> Arc<GroundTask> {
        load_task(domain, FETCH_PROBLEM).unwrap()
    }

    #[test]
    fn fetch_recovers_every_truth() {
        for domain in [FETCH_DOMAIN, FETCH_SPLIT_DOMAIN] {
            let t = fetch(domain);
            for truth in enumerate_models(&t) {
                let mut oracle = SimulatedOracle {
                    truth: truth.clone(),
                    planner: Planner::default(),
                };
                let got =
                    run_session(&t, &t.init_state(), &GenConfig::default(), &mut oracle).unwrap();
                assert_eq!(got.model, truth);
                assert!(got.transcript.exchanges.len() <= 2);
            }
        }
    }

    #[test]
    fn split_truth_with_both_flags_needs_one_query() {
        let t = fetch(FETCH_SPLIT_DOMAIN);
        let truth = join_model(&t);
        let mut oracle = SimulatedOracle {
            truth: truth.clone(),
            planner: Planner::default(),
        };
        let got = run_session(&t, &t.init_state(), &GenConfig::default(), &mut oracle).unwrap();
        assert_eq!(got.transcript.exchanges.len(), 1);
        assert_eq!(got.selection(), &truth.selection);
        let text = got.transcript.to_text(&t);
        assert!(text.contains("answer: plan: "));
        assert!(text.ends_with("move:pre:(hand_tucked) present\nmove:pre:(is_crouch) present\n"));
        assert_eq!(got.transcript.to_json_lines(&t).lines().count(), 1);
    }

    #[test]
    fn no_conditions_no_questions() {
        let d = parse_domain(FETCH_DOMAIN).unwrap().without_annotations();
        let p = parse_problem(FETCH_PROBLEM, &d).unwrap();
        let t = Arc::new(ground(&d, &p));
        let mut oracle = SimulatedOracle {
            truth: most_constrained(&t),
            planner: Planner::default(),
        };
        let got = run_session(&t, &t.init_state(), &GenConfig::default(), &mut oracle).unwrap();
        assert!(got.transcript.exchanges.is_empty());
        assert_eq!(got.model, most_constrained(&t));
    }

    struct Fixed(Answer);

    impl Oracle for Fixed {
        fn answer(&mut self, _: usize, _: &Query) -> Result<Answer> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn answers_outside_the_table_halt() {
        let t = fetch(FETCH_SPLIT_DOMAIN);
        let r = run_session(
            &t,
            &t.init_state(),
            &GenConfig::default(),
            &mut Fixed(Answer::NoUnsolvable),
        );
        assert!(matches!(r, Err(Error::InconsistentOracle { query: 1, .. })));
        let r = run_session(
            &t,
            &t.init_state(),
            &GenConfig::default(),
            &mut Fixed(Answer::Valid),
        );
        assert!(matches!(r, Err(Error::IllegalAnswer { .. })));
    }

    #[test]
    fn merged_query_reads_plan_rows() {
        let t = fetch(FETCH_SPLIT_DOMAIN);
        let plan = generate_all(&t, &t.init_state(), &GenConfig::default()).unwrap();
        let q = &plan.queries[0];
        let mv = t
            .action_id("move", &["rooma".into(), "roomb".into()])
            .unwrap();
        let a = infer(
            &t,
            1,
            q,
            &Answer::PlanAnswer(crate::planner::Plan(vec![mv])),
        )
        .unwrap();
        assert!(a.iter().all(|&(_, v)| !v));
        assert_eq!(a.len(), 2);
    }
}
