//! Soundness checks run before a query is emitted.
//!
//! Each check evaluates the query on a few extreme models and relies on
//! monotonicity: a more relaxed model solves (and validates) everything a
//! more constrained one does, at no greater cost.

use std::sync::Arc;

use super::ContentRule;
use crate::annotated_model::{concretize, ConcreteModel, CondId, GroundTask, Selection};
use crate::error::Result;
use crate::planner::{validate, Goal, Plan, Planner};
use crate::state::State;

/// Whether `c` is present when at its constraining value.
pub fn constraining_presence(task: &GroundTask, c: CondId) -> bool {
    !task.conditions[c].slot.relaxing_presence()
}

/// `base` (constrained or relaxed) with each `(cond, constraining)` pinned.
fn pinned(task: &Arc<GroundTask>, relaxed: bool, pins: &[(CondId, bool)]) -> Result<ConcreteModel> {
    let mut s = if relaxed {
        Selection::relaxed(task)
    } else {
        Selection::constrained(task)
    };
    for &(c, constraining) in pins {
        s.set(c, constraining == constraining_presence(task, c));
    }
    concretize(task, &s)
}

/// Solvable with `target` relaxing and everything else constraining, and
/// unsolvable with `target` constraining and everything else relaxing.
pub fn certify_solvability(
    planner: &Planner,
    task: &Arc<GroundTask>,
    init: &State,
    goal: &Goal,
    target: CondId,
) -> Result<bool> {
    let low = pinned(task, false, &[(target, false)])?;
    if !planner.solvable(&low, init, goal)? {
        return Ok(false);
    }
    let high = pinned(task, true, &[(target, true)])?;
    Ok(!planner.solvable(&high, init, goal)?)
}

/// Same extremes as [`certify_solvability`], for a fixed plan.
pub fn certify_validity(
    task: &Arc<GroundTask>,
    init: &State,
    goal: &Goal,
    plan: &Plan,
    target: CondId,
) -> Result<bool> {
    let low = pinned(task, false, &[(target, false)])?;
    let high = pinned(task, true, &[(target, true)])?;
    Ok(validate(&low, init, goal, plan) && !validate(&high, init, goal, plan))
}

/// For every assignment of the targets, with the other conditions free:
/// the task is solvable; a constraining target leaves no plan avoiding its
/// witnesses; a relaxing target makes every witness-using plan strictly
/// costlier than the worst-case optimum.
pub fn certify_content(
    planner: &Planner,
    task: &Arc<GroundTask>,
    init: &State,
    goal: &Goal,
    rules: &[ContentRule],
) -> Result<bool> {
    let k = rules.len();
    for sigma in 0..1u32 << k {
        let pins: Vec<(CondId, bool)> = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.target, sigma >> i & 1 == 1))
            .collect();
        let low = pinned(task, false, &pins)?;
        let Some(upper) = planner.optimal_cost(&low, init, goal)? else {
            return Ok(false);
        };
        let high = pinned(task, true, &pins)?;
        for (rule, &(_, constraining)) in rules.iter().zip(&pins) {
            if constraining {
                if planner.solvable(&high.without(&rule.witnesses), init, goal)? {
                    return Ok(false);
                }
            } else if planner
                .plan_optimal_using(&high, init, goal, &rule.witnesses)?
                .is_some_and(|p| p.cost() <= upper)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
