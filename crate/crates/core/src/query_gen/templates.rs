use std::sync::Arc;

use crate::annotated_model::{most_constrained, most_relaxed, CondId, GroundTask, Slot};
use crate::planning_graph::{build_graph, LeveledGraph};
use crate::state::{ActionId, FactId, State};

/// A pair of plans that differ exactly when the condition holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Template {
    /// `achiever` adds the possible precondition `fact` of `action`.
    Precondition {
        action: ActionId,
        cond: CondId,
        fact: FactId,
        achiever: ActionId,
    },
    /// `consumer` needs the possible add `fact` of `action`; `producer` is
    /// the other way to get it.
    AddEffect {
        action: ActionId,
        cond: CondId,
        fact: FactId,
        consumer: ActionId,
        producer: ActionId,
    },
}

impl Template {
    pub fn action(&self) -> ActionId {
        match *self {
            Template::Precondition { action, .. } | Template::AddEffect { action, .. } => action,
        }
    }

    pub fn cond(&self) -> CondId {
        match *self {
            Template::Precondition { cond, .. } | Template::AddEffect { cond, .. } => cond,
        }
    }

    pub fn fact(&self) -> FactId {
        match *self {
            Template::Precondition { fact, .. } | Template::AddEffect { fact, .. } => fact,
        }
    }

    /// Actions besides the host that the template plans need.
    pub fn support(&self) -> Vec<ActionId> {
        match *self {
            Template::Precondition { achiever, .. } => vec![achiever],
            Template::AddEffect {
                consumer, producer, ..
            } => vec![consumer, producer],
        }
    }

    pub fn participants(&self) -> Vec<ActionId> {
        let mut v = vec![self.action()];
        v.extend(self.support());
        v.dedup();
        v
    }
}

fn join_adds(task: &GroundTask, a: ActionId, f: FactId) -> bool {
    let act = task.action(a);
    act.add.contains(&f) || act.possible_in(Slot::Add).any(|p| p.fact == f)
}

/// Actions whose use in an answered plan signals the constraining value of
/// `cond` on `host`: producers of the atom, other than the host for adds.
pub fn witnesses(task: &GroundTask, cond: CondId, host: ActionId) -> Vec<ActionId> {
    let Some(p) = task.possible_fact(host, cond) else {
        return Vec::new();
    };
    let slot = task.conditions[cond].slot;
    (0..task.actions.len() as ActionId)
        .filter(|&a| match slot {
            Slot::Pre => join_adds(task, a, p),
            Slot::Add => a != host && join_adds(task, a, p),
            Slot::Del => false,
        })
        .collect()
}

/// Constrained-graph level of an action, unreachable last.
pub(crate) type LevelKey = (bool, usize, ActionId);

pub(crate) struct Graphs {
    pub con: LeveledGraph,
    pub rel: LeveledGraph,
}

impl Graphs {
    pub fn new(task: &Arc<GroundTask>, init: &State) -> Self {
        Graphs {
            con: build_graph(&most_constrained(task), init),
            rel: build_graph(&most_relaxed(task), init),
        }
    }

    /// Sort key: first level in the constrained graph, unreachable last.
    pub fn level_key(&self, a: ActionId) -> LevelKey {
        let l = self.con.action_first[a as usize];
        (l.is_none(), l.unwrap_or(0), a)
    }
}

fn count_shared(task: &GroundTask, from: ActionId, to: ActionId, skip: FactId) -> usize {
    let adds = &task.action(from).add;
    task.action(to)
        .pre
        .iter()
        .filter(|&&q| q != skip && adds.contains(&q))
        .count()
}

/// Templates for `cond` on `host`, best first.
pub(crate) fn templates_for(
    task: &GroundTask,
    graphs: &Graphs,
    cond: CondId,
    host: ActionId,
) -> Vec<Template> {
    let Some(p) = task.possible_fact(host, cond) else {
        return Vec::new();
    };
    let reachable = |a: ActionId| graphs.rel.action_first[a as usize].is_some();
    let compatible = |acts: &[ActionId]| {
        let mut facts: Vec<FactId> = acts
            .iter()
            .flat_map(|&a| task.action(a).pre.iter().copied())
            .filter(|&f| f != p)
            .collect();
        facts.sort_unstable();
        facts.dedup();
        graphs.rel.jointly_reachable(&facts)
    };
    if !reachable(host) {
        return Vec::new();
    }
    let n = task.actions.len() as ActionId;
    let mut out: Vec<(Vec<LevelKey>, Template)> = Vec::new();
    match task.conditions[cond].slot {
        Slot::Pre => {
            for a in (0..n).filter(|&a| a != host && task.action(a).add.contains(&p)) {
                if reachable(a) && compatible(&[host, a]) && count_shared(task, a, host, p) <= 1 {
                    out.push((
                        vec![graphs.level_key(a)],
                        Template::Precondition {
                            action: host,
                            cond,
                            fact: p,
                            achiever: a,
                        },
                    ));
                }
            }
        }
        Slot::Add => {
            let consumers: Vec<ActionId> = (0..n)
                .filter(|&a| a != host && task.action(a).pre.contains(&p))
                .collect();
            let producers: Vec<ActionId> = (0..n)
                .filter(|&a| a != host && task.action(a).add.contains(&p))
                .collect();
            for &c in &consumers {
                for &r in &producers {
                    if c == r || !reachable(c) || !reachable(r) {
                        continue;
                    }
                    if compatible(&[host, c])
                        && compatible(&[host, r])
                        && count_shared(task, r, c, p) <= 1
                    {
                        let key = vec![graphs.level_key(c), graphs.level_key(r)];
                        out.push((
                            key,
                            Template::AddEffect {
                                action: host,
                                cond,
                                fact: p,
                                consumer: c,
                                producer: r,
                            },
                        ));
                    }
                }
            }
        }
        Slot::Del => {}
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, t)| t).collect()
}

/// Every template over every condition and host, in condition then host order.
pub fn detect_templates(task: &Arc<GroundTask>, init: &State) -> Vec<Template> {
    let graphs = Graphs::new(task, init);
    let mut out = Vec::new();
    for c in 0..task.n() {
        for host in task.hosts(c) {
            out.extend(templates_for(task, &graphs, c, host));
        }
    }
    out
}
