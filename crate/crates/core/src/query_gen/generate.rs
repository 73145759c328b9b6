use std::fmt::Write as _;
use std::sync::Arc;

use super::certify::{certify_content, certify_solvability, certify_validity};
use super::qga::{qga, qga_with, InitMode, QgaOutcome};
use super::templates::{templates_for, witnesses, Graphs, Template};
use super::{ContentRule, Inference, Query, QueryKind};
use crate::annotated_model::{constrained_minus, CondId, GroundTask, Slot};
use crate::error::{Error, Result};
use crate::planner::{Goal, Plan, Planner};
use crate::planning_graph::{order_unknowns, Node, OrderBasis};
use crate::state::{ActionId, State};

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub planner: Planner,
    pub basis: OrderBasis,
    /// Ground hosts tried per condition.
    pub max_hosts: usize,
    pub templates: bool,
    pub merge: bool,
    /// Largest number of templates merged into one query.
    pub max_group: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            planner: Planner::default(),
            basis: OrderBasis::Constrained,
            max_hosts: 8,
            templates: true,
            merge: true,
            max_group: 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryPlan {
    pub queries: Vec<Query>,
    /// Upper bound on the number of queries: the number of conditions.
    pub bound: usize,
    /// Conditions no host of which is reachable in the constrained graph.
    pub unreachable: Vec<CondId>,
    /// Conditions no query could be certified for.
    pub unqueryable: Vec<CondId>,
    /// Template queries folded into another query.
    pub merges: usize,
}

impl QueryPlan {
    pub fn count(&self, kind: QueryKind, template: bool) -> usize {
        self.queries
            .iter()
            .filter(|q| q.kind == kind && q.is_template() == template)
            .count()
    }

    pub fn to_text(&self, task: &GroundTask) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "queries: {} (bound {})", self.queries.len(), self.bound);
        for (i, q) in self.queries.iter().enumerate() {
            let _ = writeln!(s, "\nquery {}", i + 1);
            s.push_str(&q.to_text(task));
        }
        let list = |v: &[CondId]| {
            v.iter()
                .map(|&c| task.conditions[c].to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        if !self.unreachable.is_empty() {
            let _ = writeln!(s, "\nunreachable: {}", list(&self.unreachable));
        }
        if !self.unqueryable.is_empty() {
            let _ = writeln!(s, "\nunqueryable: {}", list(&self.unqueryable));
        }
        s
    }
}

/// Budget overruns fail the attempt rather than the whole run.
fn soft<T>(r: Result<T>, fallback: T) -> Result<T> {
    match r {
        Err(Error::BudgetExceeded(_)) | Err(Error::EmptyAddSet(_)) => Ok(fallback),
        other => other,
    }
}

fn hosts_for(task: &GroundTask, graphs: &Graphs, cond: CondId, max: usize) -> Vec<ActionId> {
    // skip instances where the atom coincides with a certain one in the same slot
    let observable = |a: ActionId| {
        let act = task.action(a);
        let certain = match task.conditions[cond].slot {
            Slot::Pre => &act.pre,
            Slot::Add => &act.add,
            Slot::Del => &act.del,
        };
        task.possible_fact(a, cond)
            .is_some_and(|p| !certain.contains(&p))
    };
    let mut hosts: Vec<ActionId> = task.hosts(cond).filter(|&a| observable(a)).collect();
    hosts.sort_by_key(|&a| graphs.level_key(a));
    hosts.truncate(max);
    hosts
}

struct Candidate {
    template: Template,
    query: Query,
    init: State,
    certified: bool,
}

fn content_query(out: &QgaOutcome, witnesses: Vec<ActionId>) -> Query {
    Query {
        kind: QueryKind::Plan,
        init: out.init.to_vec(),
        goal: out.goal.clone(),
        plan: None,
        targets: vec![out.cond],
        inference: Inference::PlanContent {
            rules: vec![ContentRule {
                target: out.cond,
                witnesses,
            }],
        },
        templates: 1,
    }
}

/// The template's own tell-tale action.
fn template_witness(t: &Template) -> ActionId {
    match *t {
        Template::Precondition { achiever, .. } => achiever,
        Template::AddEffect { producer, .. } => producer,
    }
}

/// Template queries for `cond`, certified ones first.
fn template_candidates(
    cfg: &GenConfig,
    task: &Arc<GroundTask>,
    init_e: &State,
    graphs: &Graphs,
    cond: CondId,
    hosts: &[ActionId],
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    // round-robin over hosts, so alternatives spread across ground instances
    let per_host: Vec<Vec<Template>> = hosts
        .iter()
        .map(|&h| templates_for(task, graphs, cond, h))
        .collect();
    let depth = per_host.iter().map(Vec::len).max().unwrap_or(0);
    let templates = (0..depth).flat_map(|i| {
        per_host
            .iter()
            .zip(hosts)
            .filter_map(move |(ts, &h)| ts.get(i).map(|t| (h, t.clone())))
    });
    for (host, t) in templates.take(cfg.max_hosts) {
        for mode in [InitMode::Projected, InitMode::Progressed] {
            let Some(out_q) = soft(
                qga_with(&cfg.planner, task, init_e, cond, host, Some(&t), mode),
                None,
            )?
            else {
                continue;
            };
            if !out_q.uses_host || out_q.missing_side_effect {
                continue;
            }
            let all = witnesses(task, cond, host);
            let own = vec![template_witness(&t)];
            let variants = if all == own {
                vec![all]
            } else {
                vec![all, own]
            };
            for w in variants {
                let query = content_query(&out_q, w);
                let Inference::PlanContent { rules } = &query.inference else {
                    unreachable!()
                };
                let certified = soft(
                    certify_content(&cfg.planner, task, &out_q.init, &out_q.goal, rules),
                    false,
                )?;
                out.push(Candidate {
                    template: t.clone(),
                    query,
                    init: out_q.init.clone(),
                    certified,
                });
            }
        }
    }
    out.sort_by_key(|c| !c.certified);
    Ok(out)
}

/// A yes/no plan query when it certifies, else a validation query over the
/// same plan.
fn plain_query(cfg: &GenConfig, task: &Arc<GroundTask>, out: &QgaOutcome) -> Result<Option<Query>> {
    let c = out.cond;
    if out.uses_host
        && !out.missing_side_effect
        && soft(
            certify_solvability(&cfg.planner, task, &out.init, &out.goal, c),
            false,
        )?
    {
        return Ok(Some(Query {
            kind: QueryKind::Plan,
            init: out.init.to_vec(),
            goal: out.goal.clone(),
            plan: None,
            targets: vec![c],
            inference: Inference::Solvability { target: c },
            templates: 0,
        }));
    }
    let goal = Goal::positive(out.goal.pos.clone());
    if certify_validity(task, &out.init, &goal, &out.plan, c)? {
        return Ok(Some(validation(
            out.init.to_vec(),
            goal,
            out.plan.clone(),
            c,
        )));
    }
    Ok(None)
}

fn validation(init: Vec<u32>, goal: Goal, plan: Plan, target: CondId) -> Query {
    Query {
        kind: QueryKind::Validation,
        init,
        goal,
        plan: Some(plan),
        targets: vec![target],
        inference: Inference::Validity { target },
        templates: 0,
    }
}

/// Validation of the host alone from its own preconditions.
fn trivial_query(task: &Arc<GroundTask>, cond: CondId, host: ActionId) -> Result<Option<Query>> {
    let Some(p) = task.possible_fact(host, cond) else {
        return Ok(None);
    };
    let minus = constrained_minus(task, cond)?;
    let act = minus.action(host);
    let mut init = act.pre.clone();
    let goal = match task.conditions[cond].slot {
        Slot::Pre => act.add.clone(),
        Slot::Add => vec![p],
        Slot::Del => {
            init.push(p);
            act.add.iter().copied().chain([p]).collect()
        }
    };
    // a precondition host without certain adds still tells by executing at all
    if goal.is_empty() && task.conditions[cond].slot != Slot::Pre {
        return Ok(None);
    }
    let init = task.state(init);
    let goal = Goal::positive(goal);
    let plan = Plan(vec![host]);
    if certify_validity(task, &init, &goal, &plan, cond)? {
        return Ok(Some(validation(init.to_vec(), goal, plan, cond)));
    }
    Ok(None)
}

fn join_pre_contains(task: &GroundTask, a: ActionId, f: u32) -> bool {
    let act = task.action(a);
    act.pre.contains(&f) || act.possible_in(Slot::Pre).any(|p| p.fact == f)
}

fn join_adds(task: &GroundTask, a: ActionId, f: u32) -> bool {
    let act = task.action(a);
    act.add.contains(&f) || act.possible_in(Slot::Add).any(|p| p.fact == f)
}

/// No action of one template is mutex with, deletes a precondition of, or
/// achieves the queried atom of the other's.
fn independent(task: &GroundTask, graphs: &Graphs, a: &Template, b: &Template) -> bool {
    let last = graphs.con.last_level();
    for (x_t, y_t) in [(a, b), (b, a)] {
        let ys = y_t.participants();
        for x in x_t.participants().into_iter().filter(|x| !ys.contains(x)) {
            if join_adds(task, x, y_t.fact()) {
                return false;
            }
            let dels = &task.action(x).del;
            for &y in &ys {
                if dels.iter().any(|&f| join_pre_contains(task, y, f)) {
                    return false;
                }
                if graphs
                    .con
                    .mutex(Node::Action(x), Node::Action(y), last)
                    .unwrap_or(false)
                {
                    return false;
                }
            }
        }
    }
    true
}

struct Group {
    templates: Vec<Template>,
    init: State,
    query: Query,
    certified: bool,
    /// Other ways to ask the founding condition, while the group has one member.
    alternatives: Vec<Candidate>,
}

impl Group {
    fn new(mut alts: Vec<Candidate>) -> Option<Group> {
        if alts.is_empty() {
            return None;
        }
        let first = alts.remove(0);
        Some(Group {
            templates: vec![first.template],
            init: first.init,
            query: first.query,
            certified: first.certified,
            alternatives: alts,
        })
    }

    /// The group itself, then its founding alternatives as one-member groups.
    fn bases(&self) -> Vec<(Vec<Template>, State, Query)> {
        let mut v = vec![(
            self.templates.clone(),
            self.init.clone(),
            self.query.clone(),
        )];
        for c in &self.alternatives {
            v.push((vec![c.template.clone()], c.init.clone(), c.query.clone()));
        }
        v
    }
}

fn merged(group_init: &State, group_query: &Query, cand: &Candidate) -> (State, Query) {
    let mut init = group_init.clone();
    init.union_with(&cand.init);
    let mut goal = group_query.goal.clone();
    goal.pos.extend(cand.query.goal.pos.iter().copied());
    goal.neg.extend(cand.query.goal.neg.iter().copied());
    goal.normalize();
    let pos = goal.pos.clone();
    goal.neg.retain(|f| !pos.contains(f) && !init.contains(*f));
    let mut rules = match &group_query.inference {
        Inference::PlanContent { rules } => rules.clone(),
        _ => Vec::new(),
    };
    if let Inference::PlanContent { rules: r } = &cand.query.inference {
        rules.extend(r.iter().cloned());
    }
    let mut targets = group_query.targets.clone();
    targets.extend(cand.query.targets.iter().copied());
    let query = Query {
        kind: QueryKind::Plan,
        init: init.to_vec(),
        goal,
        plan: None,
        targets,
        inference: Inference::PlanContent { rules },
        templates: group_query.templates + cand.query.templates,
    };
    (init, query)
}

/// Each entry holds the alternatives for one condition. An entry joins
/// the first group some alternative certifies with; otherwise its first
/// alternative starts a new group.
fn merge_groups(
    cfg: &GenConfig,
    task: &Arc<GroundTask>,
    graphs: &Graphs,
    per_cond: Vec<Vec<Candidate>>,
) -> Result<(Vec<Group>, usize)> {
    let mut groups: Vec<Group> = Vec::new();
    let mut merges = 0;
    'next: for alts in per_cond {
        if cfg.merge {
            for cand in &alts {
                for g in groups.iter_mut() {
                    if g.templates.len() >= cfg.max_group {
                        continue;
                    }
                    for (templates, base_init, base_query) in g.bases() {
                        if !templates
                            .iter()
                            .all(|t| independent(task, graphs, t, &cand.template))
                        {
                            continue;
                        }
                        let (init, query) = merged(&base_init, &base_query, cand);
                        if !graphs.rel.jointly_reachable(&query.init) {
                            continue;
                        }
                        let Inference::PlanContent { rules } = &query.inference else {
                            unreachable!()
                        };
                        if soft(
                            certify_content(&cfg.planner, task, &init, &query.goal, rules),
                            false,
                        )? {
                            g.templates = templates;
                            g.templates.push(cand.template.clone());
                            g.init = init;
                            g.query = query;
                            g.certified = true;
                            g.alternatives.clear();
                            merges += 1;
                            continue 'next;
                        }
                    }
                }
            }
        }
        groups.extend(Group::new(alts));
    }
    Ok((groups, merges))
}

/// Greedily folds template queries into certified multi-target queries.
/// Single queries that neither merge nor certify alone are dropped.
pub fn merge_queries(
    cfg: &GenConfig,
    task: &Arc<GroundTask>,
    init_e: &State,
    queries: Vec<(Template, Query)>,
) -> Result<Vec<Query>> {
    let graphs = Graphs::new(task, init_e);
    let mut cands = Vec::new();
    for (template, query) in queries {
        let init = task.state(query.init.iter().copied());
        let certified = match &query.inference {
            Inference::PlanContent { rules } => soft(
                certify_content(&cfg.planner, task, &init, &query.goal, rules),
                false,
            )?,
            _ => false,
        };
        cands.push(vec![Candidate {
            template,
            query,
            init,
            certified,
        }]);
    }
    let (groups, _) = merge_groups(cfg, task, &graphs, cands)?;
    Ok(groups
        .into_iter()
        .filter(|g| g.certified)
        .map(|g| g.query)
        .collect())
}

/// Queries for every condition, in graph order.
pub fn generate_all(task: &Arc<GroundTask>, init_e: &State, cfg: &GenConfig) -> Result<QueryPlan> {
    let order = order_unknowns(task, init_e, cfg.basis);
    let graphs = Graphs::new(task, init_e);
    let hosts: Vec<Vec<ActionId>> = (0..task.n())
        .map(|c| hosts_for(task, &graphs, c, cfg.max_hosts))
        .collect();

    let mut cands = Vec::new();
    if cfg.templates {
        for &c in &order.order {
            if task.conditions[c].slot == Slot::Del {
                continue;
            }
            let alts = template_candidates(cfg, task, init_e, &graphs, c, &hosts[c])?;
            if !alts.is_empty() {
                cands.push(alts);
            }
        }
    }
    let (groups, merges) = merge_groups(cfg, task, &graphs, cands)?;
    let mut queries: Vec<Query> = groups
        .into_iter()
        .filter(|g| g.certified)
        .map(|g| g.query)
        .collect();
    let covered: Vec<CondId> = queries
        .iter()
        .flat_map(|q| q.targets.iter().copied())
        .collect();

    let mut unqueryable = Vec::new();
    for &c in order.order.iter().filter(|c| !covered.contains(c)) {
        let mut found = None;
        for &host in &hosts[c] {
            let Some(out) = soft(qga(&cfg.planner, task, init_e, c, host, None), None)? else {
                continue;
            };
            if let Some(q) = plain_query(cfg, task, &out)? {
                found = Some(q);
                break;
            }
        }
        if found.is_none() {
            for &host in &hosts[c] {
                if let Some(q) = trivial_query(task, c, host)? {
                    found = Some(q);
                    break;
                }
            }
        }
        match found {
            Some(q) => queries.push(q),
            None => unqueryable.push(c),
        }
    }
    let rank = |q: &Query| {
        q.targets
            .iter()
            .map(|t| order.order.iter().position(|c| c == t).unwrap())
            .min()
    };
    queries.sort_by_key(rank);
    Ok(QueryPlan {
        queries,
        bound: task.n(),
        unreachable: order.unreachable,
        unqueryable,
        merges,
    })
}
