//! Exact action-landmark checks by removal.

use crate::annotated_model::ConcreteModel;
use crate::error::{Error, Result};
use crate::planner::{Goal, Planner};
use crate::state::{ActionId, FactId, State};

/// True iff no plan reaches `goal` once `a` is removed. Errors when the
/// task is unsolvable to begin with.
pub fn is_action_landmark(
    planner: &Planner,
    model: &ConcreteModel,
    init: &State,
    goal: &Goal,
    a: ActionId,
) -> Result<bool> {
    if !planner.solvable(model, init, goal)? {
        return Err(Error::UnsolvableBase);
    }
    Ok(!planner.solvable(&model.without(&[a]), init, goal)?)
}

/// The optimal-landmark form: some optimal plan contains `a`, and removing
/// `a` either makes the task unsolvable or strictly raises the optimal cost.
pub fn is_optimal_landmark(
    planner: &Planner,
    model: &ConcreteModel,
    init: &State,
    goal: &Goal,
    a: ActionId,
) -> Result<bool> {
    let Some(best) = planner.optimal_cost(model, init, goal)? else {
        return Err(Error::UnsolvableBase);
    };
    let with_a = planner.plan_optimal_using(model, init, goal, &[a])?;
    if with_a.is_none_or(|p| p.cost() != best) {
        return Ok(false);
    }
    Ok(planner
        .optimal_cost(&model.without(&[a]), init, goal)?
        .is_none_or(|c| c > best))
}

/// The goal that forces `action` into every plan: its add effects, less the
/// queried atom when that atom is a possible add effect.
pub fn landmark_goal(
    model: &ConcreteModel,
    action: ActionId,
    queried_add: Option<FactId>,
) -> Result<Vec<FactId>> {
    let add = &model.action(action).add;
    let goal: Vec<FactId> = add
        .iter()
        .copied()
        .filter(|&f| Some(f) != queried_add)
        .collect();
    if goal.is_empty() {
        return Err(Error::EmptyAddSet(model.task.action(action).to_string()));
    }
    Ok(goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotated_model::*;
    use crate::fixtures::*;

    fn fid(t: &GroundTask, pred: &str, args: &[&str]) -> FactId {
        t.fact_id(&Atom::new(pred, args)).unwrap()
    }

    #[test]
    fn move_is_landmark_without_tuck() {
        let t = load_task(FETCH_DOMAIN, FETCH_PROBLEM).unwrap();
        let hand = t
            .condition_id(&"move:pre:(hand_tucked)".parse().unwrap())
            .unwrap();
        let tuck = t.action_id("tuck", &[]).unwrap();
        let m = constrained_minus(&t, hand).unwrap().without(&[tuck]);
        let init = t.state([fid(&t, "robot-at", &["rooma"])]);
        let goal = Goal::positive(t.goal_facts());
        let mv = t
            .action_id("move", &["rooma".into(), "roomb".into()])
            .unwrap();
        let p = Planner::default();
        assert!(is_action_landmark(&p, &m, &init, &goal, mv).unwrap());
        assert!(is_optimal_landmark(&p, &m, &init, &goal, mv).unwrap());
        let crouch = t.action_id("crouch", &[]).unwrap();
        assert!(is_action_landmark(&p, &m, &init, &goal, crouch).unwrap());
        let back = t
            .action_id("move", &["roomb".into(), "rooma".into()])
            .unwrap();
        assert!(!is_action_landmark(&p, &m, &init, &goal, back).unwrap());
        assert!(!is_optimal_landmark(&p, &m, &init, &goal, back).unwrap());
    }

    #[test]
    fn satisfied_goal_has_no_landmarks() {
        let t = load_task(FETCH_DOMAIN, FETCH_PROBLEM).unwrap();
        let m = most_relaxed(&t);
        let goal = Goal::positive(vec![fid(&t, "robot-at", &["rooma"])]);
        for a in 0..t.actions.len() as ActionId {
            assert!(
                !is_action_landmark(&Planner::default(), &m, &t.init_state(), &goal, a).unwrap()
            );
        }
    }

    #[test]
    fn parallel_achievers_are_not_landmarks() {
        let t = load_task(FETCH_DOMAIN, FETCH_PROBLEM).unwrap();
        let m = most_relaxed(&t);
        let goal = Goal::positive(vec![fid(&t, "is_crouch", &[])]);
        let p = Planner::default();
        for name in ["tuck", "crouch"] {
            let a = t.action_id(name, &[]).unwrap();
            assert!(!is_action_landmark(&p, &m, &t.init_state(), &goal, a).unwrap());
        }
    }

    #[test]
    fn unsolvable_base_is_an_error() {
        let t = load_task(FETCH_DOMAIN, FETCH_PROBLEM).unwrap();
        let all: Vec<ActionId> = (0..t.actions.len() as ActionId).collect();
        let m = most_relaxed(&t).without(&all);
        let goal = Goal::positive(t.goal_facts());
        assert!(matches!(
            is_action_landmark(&Planner::default(), &m, &t.init_state(), &goal, 0),
            Err(Error::UnsolvableBase)
        ));
    }

    #[test]
    fn landmark_goals() {
        let t = load_task(FETCH_DOMAIN, FETCH_PROBLEM).unwrap();
        let m = most_constrained(&t);
        let mv = t
            .action_id("move", &["rooma".into(), "roomb".into()])
            .unwrap();
        assert_eq!(
            landmark_goal(&m, mv, None).unwrap(),
            vec![fid(&t, "robot-at", &["roomb"])]
        );
        let tuck = t.action_id("tuck", &[]).unwrap();
        let crouch = fid(&t, "is_crouch", &[]);
        assert_eq!(
            landmark_goal(&m, tuck, Some(crouch)).unwrap(),
            vec![fid(&t, "hand_tucked", &[])]
        );
        let c = t.action_id("crouch", &[]).unwrap();
        assert!(matches!(
            landmark_goal(&m, c, Some(crouch)),
            Err(Error::EmptyAddSet(_))
        ));
    }
}
