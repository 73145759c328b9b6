//! GraphPlan-style leveled planning graph with pairwise mutexes.
//!
//! Fact level `i` holds every fact reachable in `i` parallel steps; action
//! level `i` holds the actions applicable at fact level `i`. The graph is
//! expanded until both the fact set and the fact mutex set stop changing.
//! Action mutexes are derived on demand from the stored fact mutexes.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::annotated_model::{join_model, most_constrained, ConcreteModel, CondId, GroundTask};
use crate::error::{Error, Result};
use crate::state::{ActionId, FactId, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Fact(FactId),
    Action(ActionId),
}

#[derive(Clone, Debug)]
pub struct LeveledGraph {
    model: ConcreteModel,
    pub fact_levels: Vec<State>,
    /// Mutex pairs `(f, g)` with `f < g`, per fact level.
    pub fact_mutex: Vec<HashSet<(FactId, FactId)>>,
    pub action_levels: Vec<Vec<ActionId>>,
    pub fact_first: Vec<Option<usize>>,
    pub action_first: Vec<Option<usize>>,
}

fn key(f: FactId, g: FactId) -> (FactId, FactId) {
    if f < g {
        (f, g)
    } else {
        (g, f)
    }
}

fn intersects(a: &[FactId], b: &[FactId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// An achiever in the graph: a real action or the no-op persisting a fact.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Real(ActionId),
    Noop(FactId),
}

impl LeveledGraph {
    fn mutex_at(&self, level: usize, f: FactId, g: FactId) -> bool {
        f != g && self.fact_mutex[level].contains(&key(f, g))
    }

    fn facts_pairwise_free(&self, level: usize, facts: &[FactId]) -> bool {
        facts
            .iter()
            .enumerate()
            .all(|(i, &f)| facts[i + 1..].iter().all(|&g| !self.mutex_at(level, f, g)))
    }

    fn interferes(&self, a: ActionId, b: ActionId) -> bool {
        let (x, y) = (self.model.action(a), self.model.action(b));
        intersects(&x.del, &y.pre)
            || intersects(&x.del, &y.add)
            || intersects(&y.del, &x.pre)
            || intersects(&y.del, &x.add)
    }

    fn competing(&self, level: usize, a: &[FactId], b: &[FactId]) -> bool {
        a.iter()
            .any(|&p| b.iter().any(|&q| self.mutex_at(level, p, q)))
    }

    fn steps_mutex(&self, level: usize, x: Step, y: Step) -> bool {
        match (x, y) {
            _ if x == y => false,
            (Step::Real(a), Step::Real(b)) => {
                self.interferes(a, b)
                    || self.competing(level, &self.model.action(a).pre, &self.model.action(b).pre)
            }
            (Step::Real(a), Step::Noop(f)) | (Step::Noop(f), Step::Real(a)) => {
                let act = self.model.action(a);
                act.del.binary_search(&f).is_ok() || self.competing(level, &act.pre, &[f])
            }
            (Step::Noop(f), Step::Noop(g)) => self.mutex_at(level, f, g),
        }
    }

    fn achieving_steps(&self, level: usize, f: FactId) -> Vec<Step> {
        let mut out: Vec<Step> = Vec::new();
        if self.fact_levels[level].contains(f) {
            out.push(Step::Noop(f));
        }
        for &a in &self.action_levels[level] {
            if self.model.action(a).add.binary_search(&f).is_ok() {
                out.push(Step::Real(a));
            }
        }
        out
    }

    pub fn levels(&self) -> usize {
        self.fact_levels.len()
    }

    pub fn last_level(&self) -> usize {
        self.fact_levels.len() - 1
    }

    pub fn model(&self) -> &ConcreteModel {
        &self.model
    }

    /// Actions that add `fact`.
    pub fn achievers(&self, fact: FactId) -> Result<Vec<ActionId>> {
        self.check_fact(fact)?;
        Ok(self.model.achievers(fact))
    }

    /// Actions that require `fact`.
    pub fn consumers(&self, fact: FactId) -> Result<Vec<ActionId>> {
        self.check_fact(fact)?;
        Ok(self
            .model
            .enabled_actions()
            .filter(|&a| self.model.action(a).pre.binary_search(&fact).is_ok())
            .collect())
    }

    fn check_fact(&self, fact: FactId) -> Result<()> {
        if (fact as usize) < self.model.num_facts() {
            Ok(())
        } else {
            Err(Error::UnknownFact(format!("#{fact}")))
        }
    }

    fn present(&self, node: Node, level: usize) -> bool {
        match node {
            Node::Fact(f) => self.fact_levels.get(level).is_some_and(|s| s.contains(f)),
            Node::Action(a) => self
                .action_levels
                .get(level)
                .is_some_and(|l| l.contains(&a)),
        }
    }

    /// Pairwise mutex between two facts or two actions at `level`. Levels
    /// past the fixpoint read as the final level.
    pub fn mutex(&self, x: Node, y: Node, level: usize) -> Result<bool> {
        let level = level.min(self.last_level());
        for n in [x, y] {
            if !self.present(n, level) {
                let task = &self.model.task;
                let name = match n {
                    Node::Fact(f) if (f as usize) < task.num_facts() => task.fact(f).to_string(),
                    Node::Action(a) if (a as usize) < task.actions.len() => {
                        task.action(a).to_string()
                    }
                    Node::Fact(f) => format!("fact #{f}"),
                    Node::Action(a) => format!("action #{a}"),
                };
                return Err(Error::UnknownFact(format!("{name} at level {level}")));
            }
        }
        Ok(match (x, y) {
            (Node::Fact(f), Node::Fact(g)) => self.mutex_at(level, f, g),
            (Node::Action(a), Node::Action(b)) => {
                self.steps_mutex(level, Step::Real(a), Step::Real(b))
            }
            _ => false,
        })
    }

    /// True when `facts` all appear in the leveled-off graph and no two are mutex there.
    pub fn jointly_reachable(&self, facts: &[FactId]) -> bool {
        let last = self.last_level();
        facts.iter().all(|&f| self.fact_levels[last].contains(f))
            && self.facts_pairwise_free(last, facts)
    }

    /// Structured text dump of every level.
    pub fn dump(&self) -> String {
        let task = &self.model.task;
        let mut out = String::new();
        for (i, facts) in self.fact_levels.iter().enumerate() {
            let _ = writeln!(out, "fact-level {i}: {}", task.fmt_facts(facts.iter()));
            let mut pairs: Vec<_> = self.fact_mutex[i].iter().copied().collect();
            pairs.sort_unstable();
            for (f, g) in pairs {
                let _ = writeln!(out, "  mutex {} {}", task.fact(f), task.fact(g));
            }
            if let Some(acts) = self.action_levels.get(i) {
                let names: Vec<String> = acts.iter().map(|&a| task.action(a).to_string()).collect();
                let _ = writeln!(out, "action-level {i}: {}", names.join(" "));
            }
        }
        out
    }
}

/// Expands the graph from `init` to its fixpoint.
pub fn build_graph(model: &ConcreteModel, init: &State) -> LeveledGraph {
    let n = model.num_facts();
    let mut g = LeveledGraph {
        model: model.clone(),
        fact_levels: vec![init.clone()],
        fact_mutex: vec![HashSet::new()],
        action_levels: Vec::new(),
        fact_first: vec![None; n],
        action_first: vec![None; model.actions.len()],
    };
    for f in init.iter() {
        g.fact_first[f as usize] = Some(0);
    }
    loop {
        let i = g.fact_levels.len() - 1;
        let acts: Vec<ActionId> = model
            .enabled_actions()
            .filter(|&a| {
                let pre = &model.action(a).pre;
                g.fact_levels[i].contains_all(pre) && g.facts_pairwise_free(i, pre)
            })
            .collect();
        for &a in &acts {
            g.action_first[a as usize].get_or_insert(i);
        }
        g.action_levels.push(acts);

        let mut next = g.fact_levels[i].clone();
        for &a in &g.action_levels[i] {
            for &f in &model.action(a).add {
                next.insert(f);
            }
        }
        let new_facts: Vec<FactId> = next
            .iter()
            .filter(|&f| !g.fact_levels[i].contains(f))
            .collect();
        for &f in &new_facts {
            g.fact_first[f as usize] = Some(i + 1);
        }

        // only pairs mutex before, or pairs touching a new fact, can be mutex now
        let mut candidates: Vec<(FactId, FactId)> = g.fact_mutex[i].iter().copied().collect();
        let all: Vec<FactId> = next.iter().collect();
        for &f in &new_facts {
            for &h in &all {
                if h != f && (!new_facts.contains(&h) || f < h) {
                    candidates.push(key(f, h));
                }
            }
        }
        let mut mutex = HashSet::new();
        for (f, h) in candidates {
            let af = g.achieving_steps(i, f);
            let ah = g.achieving_steps(i, h);
            let free = af
                .iter()
                .any(|&x| ah.iter().any(|&y| x == y || !g.steps_mutex(i, x, y)));
            if !free {
                mutex.insert((f, h));
            }
        }
        let stable = new_facts.is_empty() && mutex == g.fact_mutex[i];
        if stable {
            // the action level at the fixpoint stays as the final one
            g.action_levels.pop();
            break;
        }
        g.fact_levels.push(next);
        g.fact_mutex.push(mutex);
    }
    g
}

/// Which model the unknown ordering is computed over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrderBasis {
    #[default]
    Constrained,
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownOrder {
    pub order: Vec<CondId>,
    /// Conditions whose host schema has no reachable ground action.
    pub unreachable: Vec<CondId>,
}

/// Sorts conditions by the first graph level of any of their host actions,
/// ties broken by condition order; unreachable conditions go last.
pub fn order_unknowns(task: &Arc<GroundTask>, init: &State, basis: OrderBasis) -> UnknownOrder {
    let model = match basis {
        OrderBasis::Constrained => most_constrained(task),
        OrderBasis::Join => join_model(task),
    };
    let graph = build_graph(&model, init);
    let level = |c: CondId| {
        task.hosts(c)
            .filter_map(|a| graph.action_first[a as usize])
            .min()
    };
    let mut keyed: Vec<(Option<usize>, CondId)> = (0..task.n()).map(|c| (level(c), c)).collect();
    keyed.sort_by_key(|&(l, c)| (l.is_none(), l, c));
    UnknownOrder {
        order: keyed.iter().map(|&(_, c)| c).collect(),
        unreachable: keyed
            .iter()
            .filter(|(l, _)| l.is_none())
            .map(|&(_, c)| c)
            .collect(),
    }
}
