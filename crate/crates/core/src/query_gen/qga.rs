use std::sync::Arc;

use super::templates::Template;
use crate::annotated_model::{constrained_minus, ConcreteModel, CondId, GroundTask, Slot};
use crate::error::{Error, Result};
use crate::landmarks::landmark_goal;
use crate::planner::{apply, Goal, Plan, Planner};
use crate::planning_graph::build_graph;
use crate::state::{ActionId, FactId, State};

/// Minimal part of `init` the plan relies on: atoms some action needs
/// before any earlier action adds them, plus the `keep` atoms that are in
/// `init` and never added along the plan. Returns `(init_q, init_temp)`.
pub fn project(
    init: &State,
    plan: &Plan,
    model: &ConcreteModel,
    keep: &[FactId],
) -> Result<(State, State)> {
    let mut state = init.clone();
    let mut added = State::empty(model.num_facts());
    let mut needed = State::empty(model.num_facts());
    for &a in &plan.0 {
        for &q in &model.action(a).pre {
            if !added.contains(q) {
                needed.insert(q);
            }
        }
        state = apply(model, &state, a)?;
        for &f in &model.action(a).add {
            added.insert(f);
        }
    }
    for &q in keep {
        if init.contains(q) && !added.contains(q) {
            needed.insert(q);
        }
    }
    Ok((needed.clone(), needed))
}

/// Everything the algorithm produced for one condition on one host.
#[derive(Clone, Debug)]
pub struct QgaOutcome {
    pub cond: CondId,
    pub host: ActionId,
    /// The initial state after threat removal.
    pub init: State,
    pub goal: Goal,
    /// The prefix plan followed by the host.
    pub plan: Plan,
    /// The re-solved plan from `init` to `goal`.
    pub resolved: Option<Plan>,
    pub uses_host: bool,
    /// Some prefix action achieving a goal atom had no usable side effect to negate.
    pub missing_side_effect: bool,
}

fn sorted(mut v: Vec<FactId>) -> Vec<FactId> {
    v.sort_unstable();
    v.dedup();
    v
}

/// How the query's initial state is cut out of the environment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitMode {
    /// Atoms of `init_e` the prefix and host rely on.
    #[default]
    Projected,
    /// The state after the prefix, restricted to the atoms the host and
    /// template support need. Leaves the prefix out of the question.
    Progressed,
}

/// Builds the query task for `cond` on `host`, optionally around a template.
/// `Ok(None)` when the host cannot be made applicable from `init_e`.
pub fn qga(
    planner: &Planner,
    task: &Arc<GroundTask>,
    init_e: &State,
    cond: CondId,
    host: ActionId,
    template: Option<&Template>,
) -> Result<Option<QgaOutcome>> {
    qga_with(
        planner,
        task,
        init_e,
        cond,
        host,
        template,
        InitMode::Projected,
    )
}

pub fn qga_with(
    planner: &Planner,
    task: &Arc<GroundTask>,
    init_e: &State,
    cond: CondId,
    host: ActionId,
    template: Option<&Template>,
    mode: InitMode,
) -> Result<Option<QgaOutcome>> {
    let p = task.possible_fact(host, cond).ok_or_else(|| {
        Error::UnknownCondition(format!(
            "{} on {}",
            task.conditions[cond],
            task.action(host)
        ))
    })?;
    let slot = task.conditions[cond].slot;
    let minus = constrained_minus(task, cond)?;
    let support = template.map(Template::support).unwrap_or_default();

    let mut reach: Vec<FactId> = minus.action(host).pre.clone();
    for &a in &support {
        reach.extend(minus.action(a).pre.iter().copied());
    }
    // with repeated arguments p can coincide with a certain precondition
    if !minus.action(host).pre.contains(&p) {
        reach.retain(|&f| f != p);
    }
    if slot == Slot::Del {
        reach.push(p);
    }
    let reach = sorted(reach);
    // graph mutexes are sound, so this skips hopeless exhaustive searches
    if !build_graph(&minus, init_e).jointly_reachable(&reach) {
        return Ok(None);
    }
    let Some(prefix) = planner.plan_optimal(&minus, init_e, &Goal::positive(reach.clone()))? else {
        return Ok(None);
    };
    let (prefix, init_q, mut init) = match mode {
        InitMode::Projected => {
            let mut plan = prefix.clone();
            plan.0.push(host);
            let (q, temp) = project(init_e, &plan, &minus, &reach)?;
            (prefix, q, temp)
        }
        InitMode::Progressed => {
            let mut state = init_e.clone();
            for &a in &prefix.0 {
                state = apply(&minus, &state, a)?;
            }
            let q = task.state(reach.iter().copied().filter(|&f| state.contains(f)));
            (Plan(Vec::new()), q.clone(), q)
        }
    };
    let mut plan = prefix.clone();
    plan.0.push(host);

    let host_add = &minus.action(host).add;
    let pos = match (slot, template) {
        (Slot::Pre, _) => landmark_goal(&minus, host, None)?,
        (Slot::Add, None) => vec![p],
        (Slot::Add, Some(t)) => {
            let mut g = landmark_goal(&minus, host, Some(p)).unwrap_or_default();
            for a in t.support().into_iter().take(1) {
                g.extend(minus.action(a).add.iter().copied().filter(|&f| f != p));
            }
            if g.is_empty() {
                return Err(Error::EmptyAddSet(task.action(host).to_string()));
            }
            sorted(g)
        }
        (Slot::Del, _) => sorted(host_add.iter().copied().chain([p]).collect()),
    };

    let mut neg = Vec::new();
    let mut missing_side_effect = false;
    for &ax in &prefix.0 {
        let adds = &minus.action(ax).add;
        if !adds.iter().any(|f| pos.contains(f)) {
            continue;
        }
        let side = adds.iter().copied().find(|&f| {
            !host_add.contains(&f)
                && task.effect_certain[f as usize]
                && !init_q.contains(f)
                && !pos.contains(&f)
        });
        match side {
            Some(f) => neg.push(f),
            None => missing_side_effect = true,
        }
    }

    if slot == Slot::Pre {
        let host_pre = &minus.action(host).pre;
        for &ax in &prefix.0 {
            let adds = &minus.action(ax).add;
            if adds.contains(&p) {
                for &q in host_pre.iter().filter(|&&q| q != p && adds.contains(&q)) {
                    init.insert(q);
                }
            }
        }
    }
    neg.retain(|&f| !init.contains(f));
    let mut goal = Goal { pos, neg };
    goal.normalize();

    let resolved = planner.plan_optimal(&minus, &init, &goal)?;
    let uses_host = resolved.as_ref().is_some_and(|r| r.contains(host));
    Ok(Some(QgaOutcome {
        cond,
        host,
        init,
        goal,
        plan,
        resolved,
        uses_host,
        missing_side_effect,
    }))
}
