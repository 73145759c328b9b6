use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::domain::{Atom, Domain, PossibleCondition, Slot};
use super::problem::Problem;
use crate::state::{ActionId, FactId, State};

/// Index into [`GroundTask::conditions`].
pub type CondId = usize;

/// A ground atom that may or may not belong to one slot of an action,
/// tagged with the lifted condition it was instantiated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundPossible {
    pub cond: CondId,
    pub slot: Slot,
    pub fact: FactId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: usize,
    pub name: String,
    pub args: Vec<String>,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub possible: Vec<GroundPossible>,
}

impl GroundAction {
    pub fn possible_in(&self, slot: Slot) -> impl Iterator<Item = &GroundPossible> {
        self.possible.iter().filter(move |p| p.slot == slot)
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// The annotated model instantiated over a problem's objects.
///
/// Facts are every type-consistent ground atom, sorted. Actions are every
/// type-consistent instantiation of every schema (repeated objects
/// included), sorted by name then arguments; that order is the planner's
/// tie-breaking order.
#[derive(Clone, Debug)]
pub struct GroundTask {
    pub domain: Domain,
    pub problem: Problem,
    pub facts: Vec<Atom>,
    index: HashMap<Atom, FactId>,
    pub actions: Vec<GroundAction>,
    action_index: HashMap<(String, Vec<String>), ActionId>,
    pub conditions: Vec<PossibleCondition>,
    /// Facts that are a possible precondition of some ground action.
    pub possible_pre_facts: Vec<bool>,
    /// Facts whose truth no possible add/delete can change.
    pub effect_certain: Vec<bool>,
}

fn tuples<'a>(choices: &[Vec<&'a str>]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for o in c {
                let mut t = prefix.clone();
                t.push(*o);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Enumerates all type-consistent ground atoms and actions.
pub fn ground(domain: &Domain, problem: &Problem) -> GroundTask {
    let mut facts = Vec::new();
    for decl in &domain.predicates {
        let choices: Vec<Vec<&str>> = decl
            .params
            .iter()
            .map(|p| problem.objects_of(domain, &p.ty).collect())
            .collect();
        for t in tuples(&choices) {
            facts.push(Atom {
                predicate: decl.name.clone(),
                args: t.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    facts.sort();
    facts.dedup();
    let index: HashMap<Atom, FactId> = facts
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i as FactId))
        .collect();
    let conditions = domain.conditions();
    let cond_index: HashMap<&PossibleCondition, CondId> =
        conditions.iter().enumerate().map(|(i, c)| (c, i)).collect();

    let mut actions = Vec::new();
    for (si, schema) in domain.schemas.iter().enumerate() {
        let choices: Vec<Vec<&str>> = schema
            .params
            .iter()
            .map(|p| problem.objects_of(domain, &p.ty).collect())
            .collect();
        for t in tuples(&choices) {
            let binding: BTreeMap<&str, &str> = schema
                .params
                .iter()
                .map(|p| p.name.as_str())
                .zip(t.iter().copied())
                .collect();
            let ids = |set: &std::collections::BTreeSet<Atom>| -> Vec<FactId> {
                let mut v: Vec<FactId> =
                    set.iter().map(|a| index[&a.substitute(&binding)]).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            let mut possible = Vec::new();
            for slot in [Slot::Pre, Slot::Add, Slot::Del] {
                for atom in schema.possible(slot) {
                    let cond = PossibleCondition {
                        schema: schema.name.clone(),
                        slot,
                        atom: atom.clone(),
                    };
                    possible.push(GroundPossible {
                        cond: cond_index[&cond],
                        slot,
                        fact: index[&atom.substitute(&binding)],
                    });
                }
            }
            actions.push(GroundAction {
                schema: si,
                name: schema.name.clone(),
                args: t.iter().map(|s| s.to_string()).collect(),
                pre: ids(&schema.pre),
                add: ids(&schema.add),
                del: ids(&schema.del),
                possible,
            });
        }
    }
    actions.sort_by(|a, b| (&a.name, &a.args).cmp(&(&b.name, &b.args)));
    let action_index = actions
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.name.clone(), a.args.clone()), i as ActionId))
        .collect();

    let mut possible_pre_facts = vec![false; facts.len()];
    let mut effect_certain = vec![true; facts.len()];
    for a in &actions {
        for p in &a.possible {
            match p.slot {
                Slot::Pre => possible_pre_facts[p.fact as usize] = true,
                Slot::Add | Slot::Del => effect_certain[p.fact as usize] = false,
            }
        }
    }

    GroundTask {
        domain: domain.clone(),
        problem: problem.clone(),
        facts,
        index,
        actions,
        action_index,
        conditions,
        possible_pre_facts,
        effect_certain,
    }
}

impl GroundTask {
    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn n(&self) -> usize {
        self.conditions.len()
    }

    pub fn fact_id(&self, atom: &Atom) -> Option<FactId> {
        self.index.get(atom).copied()
    }

    pub fn fact(&self, id: FactId) -> &Atom {
        &self.facts[id as usize]
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id as usize]
    }

    pub fn action_id(&self, name: &str, args: &[String]) -> Option<ActionId> {
        self.action_index
            .get(&(name.to_string(), args.to_vec()))
            .copied()
    }

    pub fn condition_id(&self, cond: &PossibleCondition) -> Option<CondId> {
        self.conditions.iter().position(|c| c == cond)
    }

    /// Ground actions instantiated from the schema hosting `cond`.
    pub fn hosts(&self, cond: CondId) -> impl Iterator<Item = ActionId> + '_ {
        self.actions
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.possible.iter().any(|p| p.cond == cond))
            .map(|(i, _)| i as ActionId)
    }

    /// The ground atom `cond` instantiates to on host `action`.
    pub fn possible_fact(&self, action: ActionId, cond: CondId) -> Option<FactId> {
        self.action(action)
            .possible
            .iter()
            .find(|p| p.cond == cond)
            .map(|p| p.fact)
    }

    pub fn state(&self, facts: impl IntoIterator<Item = FactId>) -> State {
        State::from_facts(self.num_facts(), facts)
    }

    /// The problem's initial state as the fully specified environment.
    pub fn init_state(&self) -> State {
        self.state(self.problem.init.iter().map(|a| self.index[a]))
    }

    pub fn goal_facts(&self) -> Vec<FactId> {
        let mut g: Vec<FactId> = self.problem.goal.iter().map(|a| self.index[a]).collect();
        g.sort_unstable();
        g
    }

    /// Looks up ground atoms by name, for tests and scripted answers.
    pub fn facts_named(&self, atoms: &[Atom]) -> Option<Vec<FactId>> {
        atoms.iter().map(|a| self.fact_id(a)).collect()
    }

    pub fn fmt_facts(&self, facts: impl IntoIterator<Item = FactId>) -> String {
        let v: Vec<String> = facts
            .into_iter()
            .map(|f| self.fact(f).to_string())
            .collect();
        v.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotated_model::{parse_domain, parse_problem};
    use crate::fixtures::{FETCH_DOMAIN, FETCH_PROBLEM};

    fn fetch(objects: &str) -> GroundTask {
        let d = parse_domain(FETCH_DOMAIN).unwrap();
        let text = FETCH_PROBLEM.replace("roomA roomB - location", objects);
        let p = parse_problem(&text, &d).unwrap();
        ground(&d, &p)
    }

    #[test]
    fn fetch_two_rooms_has_six_actions() {
        let t = fetch("roomA roomB - location");
        let names: Vec<String> = t.actions.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            names,
            [
                "(crouch)",
                "(move rooma rooma)",
                "(move rooma roomb)",
                "(move roomb rooma)",
                "(move roomb roomb)",
                "(tuck)"
            ]
        );
        assert_eq!(t.n(), 2);
        for m in t.actions.iter().filter(|a| a.name == "move") {
            assert_eq!(m.possible.len(), 2);
        }
    }

    #[test]
    fn three_rooms_nine_moves() {
        let t = fetch("roomA roomB roomC - location");
        assert_eq!(t.actions.iter().filter(|a| a.name == "move").count(), 9);
        assert_eq!(t.actions.iter().filter(|a| a.name == "tuck").count(), 1);
    }

    #[test]
    fn possible_atoms_are_tagged_with_their_lifted_condition() {
        let t = fetch("roomA roomB - location");
        let mv = t
            .action_id("move", &["rooma".into(), "roomb".into()])
            .unwrap();
        let hand = t
            .condition_id(&"move:pre:(hand_tucked)".parse().unwrap())
            .unwrap();
        assert_eq!(
            t.possible_fact(mv, hand),
            t.fact_id(&Atom::new("hand_tucked", &[]))
        );
        assert_eq!(t.hosts(hand).count(), 4);
        let hf = t.fact_id(&Atom::new("hand_tucked", &[])).unwrap();
        assert!(t.possible_pre_facts[hf as usize]);
        assert!(t.effect_certain[hf as usize]);
    }
}
