//! Answering queries: a simulated optimal teammate over a known model, or a
//! person at a terminal.

use std::fmt;
use std::io::{BufRead, Write};

use crate::annotated_model::{ConcreteModel, GroundTask};
use crate::error::{Error, Result};
use crate::planner::{parse_plan, validate, Plan, Planner};
use crate::query_gen::{Inference, Query, QueryKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    YesSolvable(Option<Plan>),
    NoUnsolvable,
    PlanAnswer(Plan),
    Valid,
    Invalid,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::YesSolvable(_) => "yes",
            Answer::NoUnsolvable => "no",
            Answer::PlanAnswer(_) => "plan",
            Answer::Valid => "valid",
            Answer::Invalid => "invalid",
        })
    }
}

impl Answer {
    pub fn render(&self, task: &GroundTask) -> String {
        match self {
            Answer::PlanAnswer(p) | Answer::YesSolvable(Some(p)) => {
                format!("{self}: {}", p.inline(task))
            }
            _ => self.to_string(),
        }
    }
}

/// Something that answers one query at a time.
pub trait Oracle {
    fn answer(&mut self, index: usize, query: &Query) -> Result<Answer>;
}

/// What an optimal teammate holding `truth` would say.
pub fn simulated_answer(planner: &Planner, truth: &ConcreteModel, query: &Query) -> Result<Answer> {
    let init = truth.task.state(query.init.iter().copied());
    match (query.kind, &query.plan) {
        (QueryKind::Validation, Some(plan)) => Ok(if validate(truth, &init, &query.goal, plan) {
            Answer::Valid
        } else {
            Answer::Invalid
        }),
        _ => Ok(match planner.plan_optimal(truth, &init, &query.goal)? {
            Some(plan) => Answer::PlanAnswer(plan),
            None => Answer::NoUnsolvable,
        }),
    }
}

pub struct SimulatedOracle {
    pub truth: ConcreteModel,
    pub planner: Planner,
}

impl Oracle for SimulatedOracle {
    fn answer(&mut self, _index: usize, query: &Query) -> Result<Answer> {
        simulated_answer(&self.planner, &self.truth, query)
    }
}

fn render_query<W: Write>(
    task: &GroundTask,
    index: usize,
    query: &Query,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "\nQuestion {index}")?;
    writeln!(
        out,
        "  Starting from: {}",
        task.fmt_facts(query.init.iter().copied())
    )?;
    let mut goal: Vec<String> = query
        .goal
        .pos
        .iter()
        .map(|&f| task.fact(f).to_string())
        .collect();
    goal.extend(
        query
            .goal
            .neg
            .iter()
            .map(|&f| format!("(not {})", task.fact(f))),
    );
    writeln!(
        out,
        "  Goal: {}",
        if goal.is_empty() {
            "(none)".to_string()
        } else {
            goal.join(" ")
        }
    )?;
    match (&query.plan, &query.inference) {
        (Some(plan), _) => {
            writeln!(out, "  Plan:")?;
            write!(out, "{}", plan.display(task))?;
            writeln!(out, "  Does this plan reach the goal? [yes/no]")
        }
        (None, Inference::Solvability { .. }) => {
            writeln!(out, "  Can the goal be reached? Type yes, no, or your plan (end it with an empty line).")
        }
        (None, _) => writeln!(out, "  Type your shortest plan, one action per line or all on one line, and end it with an empty line. Type no if the goal cannot be reached."),
    }
}

/// Prompts on `out` and reads from `input` until a well-formed answer.
pub fn interactive_answer<R: BufRead, W: Write>(
    task: &GroundTask,
    index: usize,
    query: &Query,
    input: &mut R,
    out: &mut W,
) -> Result<Answer> {
    let io = |e: std::io::Error| Error::Aborted(e.to_string());
    render_query(task, index, query, out).map_err(io)?;
    loop {
        write!(out, "> ").map_err(io)?;
        out.flush().map_err(io)?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io)? == 0 {
            return Err(Error::Aborted("end of input".into()));
        }
        let word = line.trim().to_lowercase();
        let validation = query.kind == QueryKind::Validation;
        let needs_plan = matches!(query.inference, Inference::PlanContent { .. });
        match word.as_str() {
            "" => continue,
            "yes" | "y" if validation => return Ok(Answer::Valid),
            "no" | "n" if validation => return Ok(Answer::Invalid),
            "yes" | "y" if !needs_plan => return Ok(Answer::YesSolvable(None)),
            "no" | "n" => return Ok(Answer::NoUnsolvable),
            "yes" | "y" => {
                writeln!(out, "Please type the plan itself.").map_err(io)?;
                continue;
            }
            _ if validation => {
                writeln!(out, "Please answer yes or no.").map_err(io)?;
                continue;
            }
            _ => {}
        }
        let mut text = line.clone();
        loop {
            let mut next = String::new();
            if input.read_line(&mut next).map_err(io)? == 0 || next.trim().is_empty() {
                break;
            }
            text.push_str(&next);
        }
        let parsed = if text.trim().eq_ignore_ascii_case("empty") {
            Ok(Plan::default())
        } else {
            parse_plan(task, &text)
        };
        match parsed {
            Ok(plan) => {
                writeln!(out, "Read {} action(s): {}", plan.cost(), plan.inline(task))
                    .map_err(io)?;
                return Ok(Answer::PlanAnswer(plan));
            }
            Err(e) => writeln!(out, "Could not read that plan: {e}. Try again.").map_err(io)?,
        }
    }
}

pub struct InteractiveOracle<'t, R, W> {
    pub task: &'t GroundTask,
    pub input: R,
    pub output: W,
}

impl<R: BufRead, W: Write> Oracle for InteractiveOracle<'_, R, W> {
    fn answer(&mut self, index: usize, query: &Query) -> Result<Answer> {
        interactive_answer(self.task, index, query, &mut self.input, &mut self.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotated_model::*;
    use crate::fixtures::*;
    use crate::planner::Goal;

    fn fetch() -> std::sync::Arc<GroundTask> {
        load_task(FETCH_DOMAIN, FETCH_PROBLEM).unwrap()
    }

    fn id(t: &GroundTask, p: &str, a: &[&str]) -> u32 {
        t.fact_id(&Atom::new(p, a)).unwrap()
    }

    fn validation_query(t: &GroundTask) -> Query {
        let mv = t
            .action_id("move", &["rooma".into(), "roomb".into()])
            .unwrap();
        let hand = t
            .condition_id(&"move:pre:(hand_tucked)".parse().unwrap())
            .unwrap();
        Query {
            kind: QueryKind::Validation,
            init: vec![id(t, "is_crouch", &[]), id(t, "robot-at", &["rooma"])],
            goal: Goal::positive(vec![id(t, "robot-at", &["roomb"])]),
            plan: Some(Plan(vec![mv])),
            targets: vec![hand],
            inference: Inference::Validity { target: hand },
            templates: 0,
        }
    }

    fn plan_query(t: &GroundTask) -> Query {
        let hand = t
            .condition_id(&"move:pre:(hand_tucked)".parse().unwrap())
            .unwrap();
        Query {
            kind: QueryKind::Plan,
            init: vec![id(t, "robot-at", &["rooma"])],
            goal: Goal::positive(vec![id(t, "robot-at", &["roomb"])]),
            plan: None,
            targets: vec![hand],
            inference: Inference::PlanContent {
                rules: vec![crate::query_gen::ContentRule {
                    target: hand,
                    witnesses: vec![t.action_id("tuck", &[]).unwrap()],
                }],
            },
            templates: 1,
        }
    }

    #[test]
    fn simulated_answers_follow_the_truth() {
        let t = fetch();
        let p = Planner::default();
        let both = concretize(&t, &Selection::uniform(2, true)).unwrap();
        let plan = simulated_answer(&p, &both, &plan_query(&t)).unwrap();
        assert_eq!(plan.render(&t), "plan: (tuck) (move rooma roomb)");
        let hand_only = concretize(
            &t,
            &Selection::from_fn(&t, |_, c| c.atom.predicate == "hand_tucked"),
        )
        .unwrap();
        assert_eq!(
            simulated_answer(&p, &hand_only, &plan_query(&t))
                .unwrap()
                .render(&t),
            "plan: (tuck) (move rooma roomb)"
        );
        assert_eq!(
            simulated_answer(&p, &hand_only, &validation_query(&t)).unwrap(),
            Answer::Invalid
        );
        let none = concretize(&t, &Selection::uniform(2, false)).unwrap();
        assert_eq!(
            simulated_answer(&p, &none, &validation_query(&t)).unwrap(),
            Answer::Valid
        );
    }

    #[test]
    fn scripted_no_reads_invalid() {
        let t = fetch();
        let mut out = Vec::new();
        let a = interactive_answer(
            &t,
            1,
            &validation_query(&t),
            &mut "no\n".as_bytes(),
            &mut out,
        )
        .unwrap();
        assert_eq!(a, Answer::Invalid);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("1. (move rooma roomb)"));
    }

    #[test]
    fn scripted_plan_is_parsed() {
        let t = fetch();
        let mut out = Vec::new();
        let input = "1. (tuck) 2. (move roomA roomB)\n\n";
        let a =
            interactive_answer(&t, 1, &plan_query(&t), &mut input.as_bytes(), &mut out).unwrap();
        let Answer::PlanAnswer(p) = a else { panic!() };
        assert_eq!(p.cost(), 2);
        let multi = "1. (tuck)\n2. (move roomA roomB)\n\n";
        let b = interactive_answer(
            &t,
            1,
            &plan_query(&t),
            &mut multi.as_bytes(),
            &mut Vec::new(),
        )
        .unwrap();
        assert_eq!(b, Answer::PlanAnswer(p));
    }

    #[test]
    fn malformed_input_reprompts() {
        let t = fetch();
        let mut out = Vec::new();
        let input = "(jump)\n\n(move rooma roomb)\n\n";
        let a =
            interactive_answer(&t, 1, &plan_query(&t), &mut input.as_bytes(), &mut out).unwrap();
        assert_eq!(a.render(&t), "plan: (move rooma roomb)");
        assert!(String::from_utf8(out)
            .unwrap()
            .contains("Could not read that plan"));
        let v = interactive_answer(
            &t,
            1,
            &validation_query(&t),
            &mut "maybe\nyes\n".as_bytes(),
            &mut Vec::new(),
        )
        .unwrap();
        assert_eq!(v, Answer::Valid);
    }

    #[test]
    fn end_of_input_aborts() {
        let t = fetch();
        let r = interactive_answer(
            &t,
            1,
            &validation_query(&t),
            &mut "".as_bytes(),
            &mut Vec::new(),
        );
        assert!(matches!(r, Err(Error::Aborted(_))));
    }
}
