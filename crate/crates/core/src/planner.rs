//! Optimal planning, validation, and execution over concrete models.
//!
//! Goals may contain negative literals. They are compiled into positive
//! STRIPS before search: each negated fact `f` gets an auxiliary "f is
//! false" atom that every action touching `f` maintains.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotated_model::{ConcreteModel, GroundTask};
use crate::error::{Error, Result};
use crate::state::{ActionId, FactId, State};

pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Conjunctive goal; `neg` facts must be false at the end.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Goal {
    pub pos: Vec<FactId>,
    pub neg: Vec<FactId>,
}

impl Goal {
    pub fn positive(mut facts: Vec<FactId>) -> Self {
        facts.sort_unstable();
        facts.dedup();
        Goal {
            pos: facts,
            neg: Vec::new(),
        }
    }

    pub fn holds(&self, state: &State) -> bool {
        state.contains_all(&self.pos) && self.neg.iter().all(|&f| !state.contains(f))
    }

    pub fn normalize(&mut self) {
        self.pos.sort_unstable();
        self.pos.dedup();
        self.neg.sort_unstable();
        self.neg.dedup();
    }
}

/// A sequence of ground actions; every action costs 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Plan(pub Vec<ActionId>);

impl Plan {
    pub fn cost(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, a: ActionId) -> bool {
        self.0.contains(&a)
    }

    pub fn display<'a>(&'a self, task: &'a GroundTask) -> PlanDisplay<'a> {
        PlanDisplay { plan: self, task }
    }

    /// Space-separated `(name args)` list on one line.
    pub fn inline(&self, task: &GroundTask) -> String {
        let v: Vec<String> = self.0.iter().map(|&a| task.action(a).to_string()).collect();
        v.join(" ")
    }
}

/// Numbered `N. (name args)` lines, one action per line.
pub struct PlanDisplay<'a> {
    plan: &'a Plan,
    task: &'a GroundTask,
}

impl fmt::Display for PlanDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &a) in self.plan.0.iter().enumerate() {
            writeln!(f, "{}. {}", i + 1, self.task.action(a))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Optimistic,
    Pessimistic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    GoalReached,
    ActionInapplicable(usize),
    GoalNotReached,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanOutcome {
    pub status: Status,
    pub state: State,
    /// Indices of actions skipped under optimistic execution.
    pub skipped: Vec<usize>,
}

fn missing_pre(model: &ConcreteModel, state: &State, action: ActionId) -> Vec<FactId> {
    if !model.is_enabled(action) {
        // a removed action is never applicable; report it with no facts
        return vec![FactId::MAX];
    }
    model
        .action(action)
        .pre
        .iter()
        .copied()
        .filter(|&f| !state.contains(f))
        .collect()
}

fn successor(model: &ConcreteModel, state: &State, action: ActionId) -> State {
    let a = model.action(action);
    let mut next = state.clone();
    for &d in &a.del {
        next.remove(d);
    }
    for &f in &a.add {
        next.insert(f);
    }
    next
}

/// Applies `action`: deletes first, then adds.
pub fn apply(model: &ConcreteModel, state: &State, action: ActionId) -> Result<State> {
    let missing = missing_pre(model, state, action);
    if !missing.is_empty() {
        let task = &model.task;
        let names = missing
            .iter()
            .map(|&f| {
                if f == FactId::MAX {
                    "(action removed)".to_string()
                } else {
                    task.fact(f).to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        return Err(Error::Inapplicable {
            action: task.action(action).to_string(),
            missing: names,
        });
    }
    Ok(successor(model, state, action))
}

/// Runs `plan` from `init`. Pessimistic execution stops at the first
/// inapplicable action. Optimistic execution skips an inapplicable action
/// when every missing atom is a possible precondition somewhere in the
/// task, and halts on any other failure.
pub fn execute(
    model: &ConcreteModel,
    init: &State,
    plan: &Plan,
    goal: &Goal,
    semantics: Semantics,
) -> PlanOutcome {
    let mut state = init.clone();
    let mut skipped = Vec::new();
    for (i, &a) in plan.0.iter().enumerate() {
        let missing = missing_pre(model, &state, a);
        if missing.is_empty() {
            state = successor(model, &state, a);
            continue;
        }
        let excusable = semantics == Semantics::Optimistic
            && missing
                .iter()
                .all(|&f| f != FactId::MAX && model.task.possible_pre_facts[f as usize]);
        if excusable {
            skipped.push(i);
        } else {
            return PlanOutcome {
                status: Status::ActionInapplicable(i),
                state,
                skipped,
            };
        }
    }
    let status = if goal.holds(&state) {
        Status::GoalReached
    } else {
        Status::GoalNotReached
    };
    PlanOutcome {
        status,
        state,
        skipped,
    }
}

/// True iff pessimistic execution reaches a goal state.
pub fn validate(model: &ConcreteModel, init: &State, goal: &Goal, plan: &Plan) -> bool {
    execute(model, init, plan, goal, Semantics::Pessimistic).status == Status::GoalReached
}

struct Op {
    id: ActionId,
    pre: Vec<FactId>,
    add: Vec<FactId>,
    del: Vec<FactId>,
}

/// Positive-STRIPS compilation of (model, init, goal, must-use set).
struct Compiled {
    num_facts: usize,
    ops: Vec<Op>,
    init: State,
    goal: Vec<FactId>,
    is_goal: Vec<bool>,
    /// Ops by precondition fact.
    consumers: Vec<Vec<u32>>,
}

fn compile(model: &ConcreteModel, init: &State, goal: &Goal, must_use: &[ActionId]) -> Compiled {
    let base = model.num_facts();
    let neg_aux: Vec<(FactId, FactId)> = goal
        .neg
        .iter()
        .enumerate()
        .map(|(i, &f)| (f, (base + i) as FactId))
        .collect();
    let used_aux = (!must_use.is_empty()).then_some((base + neg_aux.len()) as FactId);
    let num_facts = base + neg_aux.len() + usize::from(used_aux.is_some());

    let mut init_c = State::empty(num_facts);
    for f in init.iter() {
        init_c.insert(f);
    }
    for &(f, nf) in &neg_aux {
        if !init.contains(f) {
            init_c.insert(nf);
        }
    }
    let ops: Vec<Op> = model
        .enabled_actions()
        .map(|id| {
            let a = model.action(id);
            let mut add = a.add.clone();
            let mut del = a.del.clone();
            for &(f, nf) in &neg_aux {
                if a.add.binary_search(&f).is_ok() {
                    del.push(nf);
                } else if a.del.binary_search(&f).is_ok() {
                    add.push(nf);
                }
            }
            if let Some(u) = used_aux {
                if must_use.contains(&id) {
                    add.push(u);
                }
            }
            Op {
                id,
                pre: a.pre.clone(),
                add,
                del,
            }
        })
        .collect();
    let mut goal_c = goal.pos.clone();
    goal_c.extend(neg_aux.iter().map(|&(_, nf)| nf));
    goal_c.extend(used_aux);
    goal_c.sort_unstable();
    goal_c.dedup();
    let mut is_goal = vec![false; num_facts];
    for &g in &goal_c {
        is_goal[g as usize] = true;
    }
    let mut consumers = vec![Vec::new(); num_facts];
    for (i, op) in ops.iter().enumerate() {
        for &p in &op.pre {
            consumers[p as usize].push(i as u32);
        }
    }
    Compiled {
        num_facts,
        ops,
        init: init_c,
        goal: goal_c,
        is_goal,
        consumers,
    }
}

const INF: u32 = u32::MAX;

/// Reusable buffers for h_max.
struct HScratch {
    cost: Vec<u32>,
    waiting: Vec<u32>,
    queue: Vec<FactId>,
}

impl Compiled {
    fn scratch(&self) -> HScratch {
        HScratch {
            cost: vec![INF; self.num_facts],
            waiting: vec![0; self.ops.len()],
            queue: Vec::new(),
        }
    }

    /// Unit-cost h_max by breadth-first relaxed exploration; stops once
    /// every goal atom has been reached.
    fn h_max(&self, state: &State, s: &mut HScratch) -> u32 {
        s.cost.fill(INF);
        s.queue.clear();
        for f in state.iter() {
            s.cost[f as usize] = 0;
            s.queue.push(f);
        }
        for (i, op) in self.ops.iter().enumerate() {
            s.waiting[i] = op.pre.len() as u32;
        }
        let mut open_goals = self
            .goal
            .iter()
            .filter(|&&g| s.cost[g as usize] == INF)
            .count();
        let mut h = 0;
        let fire = |op: &Op,
                    c: u32,
                    s_cost: &mut Vec<u32>,
                    queue: &mut Vec<FactId>,
                    open_goals: &mut usize,
                    h: &mut u32| {
            for &f in &op.add {
                if s_cost[f as usize] == INF {
                    s_cost[f as usize] = c + 1;
                    queue.push(f);
                    if self.is_goal[f as usize] {
                        *open_goals -= 1;
                        *h = c + 1;
                    }
                }
            }
        };
        for op in self.ops.iter().filter(|op| op.pre.is_empty()) {
            if open_goals == 0 {
                break;
            }
            fire(op, 0, &mut s.cost, &mut s.queue, &mut open_goals, &mut h);
        }
        let mut head = 0;
        while open_goals > 0 && head < s.queue.len() {
            let f = s.queue[head];
            head += 1;
            let c = s.cost[f as usize];
            for &oi in &self.consumers[f as usize] {
                let w = &mut s.waiting[oi as usize];
                *w -= 1;
                if *w == 0 {
                    fire(
                        &self.ops[oi as usize],
                        c,
                        &mut s.cost,
                        &mut s.queue,
                        &mut open_goals,
                        &mut h,
                    );
                }
            }
        }
        if open_goals > 0 {
            INF
        } else {
            h
        }
    }

    fn apply(&self, state: &State, op: &Op) -> State {
        let mut next = state.clone();
        for &d in &op.del {
            next.remove(d);
        }
        for &f in &op.add {
            next.insert(f);
        }
        next
    }
}

/// A* over concrete models with the admissible h_max heuristic.
///
/// Ties on f are broken by smaller h, then by generation order; successors
/// are generated in ground-action order, so results are reproducible.
#[derive(Clone, Copy, Debug)]
pub struct Planner {
    pub budget: usize,
}

impl Default for Planner {
    fn default() -> Self {
        Planner {
            budget: DEFAULT_BUDGET,
        }
    }
}

struct Node {
    state: State,
    g: u32,
    parent: usize,
    op: usize,
}

impl Planner {
    pub fn new(budget: usize) -> Self {
        Planner { budget }
    }

    /// A minimum-length plan, `Ok(None)` when the goal is unreachable.
    pub fn plan_optimal(
        &self,
        model: &ConcreteModel,
        init: &State,
        goal: &Goal,
    ) -> Result<Option<Plan>> {
        self.search(&compile(model, init, goal, &[]))
    }

    /// A minimum-length plan among those containing at least one of `must_use`.
    pub fn plan_optimal_using(
        &self,
        model: &ConcreteModel,
        init: &State,
        goal: &Goal,
        must_use: &[ActionId],
    ) -> Result<Option<Plan>> {
        if must_use.is_empty() {
            return Ok(None);
        }
        self.search(&compile(model, init, goal, must_use))
    }

    pub fn solvable(&self, model: &ConcreteModel, init: &State, goal: &Goal) -> Result<bool> {
        Ok(self.plan_optimal(model, init, goal)?.is_some())
    }

    /// Optimal cost, `None` when unsolvable.
    pub fn optimal_cost(
        &self,
        model: &ConcreteModel,
        init: &State,
        goal: &Goal,
    ) -> Result<Option<usize>> {
        Ok(self.plan_optimal(model, init, goal)?.map(|p| p.cost()))
    }

    fn search(&self, task: &Compiled) -> Result<Option<Plan>> {
        let mut scratch = task.scratch();
        let h0 = task.h_max(&task.init, &mut scratch);
        if h0 == INF {
            return Ok(None);
        }
        let mut nodes = vec![Node {
            state: task.init.clone(),
            g: 0,
            parent: usize::MAX,
            op: usize::MAX,
        }];
        let mut best: HashMap<State, u32> = HashMap::new();
        best.insert(task.init.clone(), 0);
        let mut open = BinaryHeap::new();
        let mut seq = 0usize;
        open.push(Reverse((h0, h0, seq, 0usize)));
        let mut expanded = 0usize;
        while let Some(Reverse((_, _, _, idx))) = open.pop() {
            let g = nodes[idx].g;
            if best.get(&nodes[idx].state).is_some_and(|&b| b < g) {
                continue;
            }
            if task.goal.iter().all(|&f| nodes[idx].state.contains(f)) {
                let mut ops = Vec::new();
                let mut cur = idx;
                while nodes[cur].parent != usize::MAX {
                    ops.push(task.ops[nodes[cur].op].id);
                    cur = nodes[cur].parent;
                }
                ops.reverse();
                return Ok(Some(Plan(ops)));
            }
            expanded += 1;
            if expanded > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            for (oi, op) in task.ops.iter().enumerate() {
                if !nodes[idx].state.contains_all(&op.pre) {
                    continue;
                }
                let next = task.apply(&nodes[idx].state, op);
                let ng = g + 1;
                match best.entry(next.clone()) {
                    Entry::Occupied(mut e) => {
                        if *e.get() <= ng {
                            continue;
                        }
                        e.insert(ng);
                    }
                    Entry::Vacant(e) => {
                        e.insert(ng);
                    }
                }
                let h = task.h_max(&next, &mut scratch);
                if h == INF {
                    continue;
                }
                seq += 1;
                nodes.push(Node {
                    state: next,
                    g: ng,
                    parent: idx,
                    op: oi,
                });
                open.push(Reverse((ng + h, h, seq, nodes.len() - 1)));
            }
        }
        Ok(None)
    }
}

/// Parses one `(name args)` action, optionally prefixed by `N.` or `N:`.
pub fn parse_action_line(task: &GroundTask, line: &str) -> std::result::Result<ActionId, String> {
    let mut s = line.trim();
    if let Some((num, rest)) = s.split_once(['.', ':']) {
        if !num.is_empty() && num.trim().chars().all(|c| c.is_ascii_digit()) {
            s = rest.trim();
        }
    }
    let inner = s
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| format!("expected `(name args)`, got `{s}`"))?;
    let mut parts = inner.split_whitespace().map(str::to_lowercase);
    let name = parts.next().ok_or("empty action")?;
    let args: Vec<String> = parts.collect();
    task.action_id(&name, &args)
        .ok_or_else(|| format!("unknown action `{s}`"))
}

/// Parses a plan written as `(a x) (b y)` or as numbered lines.
pub fn parse_plan(task: &GroundTask, text: &str) -> std::result::Result<Plan, String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            ')' => {
                depth = depth.checked_sub(1).ok_or("unbalanced ')'")?;
                if depth == 0 {
                    let s = start.take().expect("opened");
                    out.push(parse_action_line(task, &text[s..=i])?);
                }
            }
            ';' if depth == 0 => break,
            c if depth == 0
                && !(c.is_whitespace() || c.is_ascii_digit() || c == '.' || c == ':') =>
            {
                return Err(format!("unexpected `{c}` outside an action"));
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced '('".into());
    }
    Ok(Plan(out))
}
