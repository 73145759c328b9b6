use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annotated_model::{
    ground, most_constrained, Atom, Domain, PossibleCondition, Problem, Slot,
};
use crate::error::{Error, Result};
use crate::planning_graph::build_graph;

/// An annotated domain together with the hidden truth it was made from.
#[derive(Clone, Debug)]
pub struct Mutation {
    pub domain: Domain,
    pub truth: BTreeMap<PossibleCondition, bool>,
}

/// Share of the `k` conditions made by removing certain atoms; the rest
/// are injected. Rounded up.
pub const DEFAULT_REMOVED_SHARE: f64 = 0.5;

fn used_atoms(schema: &crate::annotated_model::ActionSchema) -> BTreeSet<&Atom> {
    [Slot::Pre, Slot::Add, Slot::Del]
        .into_iter()
        .flat_map(|s| schema.certain(s).iter().chain(schema.possible(s)))
        .collect()
}

/// Injective assignments of `vars` to the predicate's typed arguments.
fn assignments(
    domain: &Domain,
    arg_types: &[String],
    vars: &[(String, String)],
) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    fn rec(
        domain: &Domain,
        arg_types: &[String],
        vars: &[(String, String)],
        cur: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        let i = cur.len();
        if i == arg_types.len() {
            out.push(cur.clone());
            return;
        }
        for (name, ty) in vars {
            if !cur.contains(name) && domain.is_subtype(ty, &arg_types[i]) {
                cur.push(name.clone());
                rec(domain, arg_types, vars, cur, out);
                cur.pop();
            }
        }
    }
    rec(domain, arg_types, vars, &mut cur, &mut out);
    out
}

/// Turns `k` atoms of a concrete domain into possible conditions: some are
/// moved out of certain slots (truth: present), the others are new atoms
/// over the schema's parameters (truth: absent). Injected preconditions
/// must leave the action executable in the true model.
pub fn mutate_domain(
    domain: &Domain,
    problem: &Problem,
    k: usize,
    seed: u64,
    removed_share: f64,
) -> Result<Mutation> {
    if domain.n() > 0 {
        return Err(Error::Mutation(
            "domain already has possible conditions".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_remove = ((k as f64) * removed_share).ceil() as usize;
    let n_remove = n_remove.min(k);
    let n_inject = k - n_remove;

    let mut removable: Vec<PossibleCondition> = Vec::new();
    for s in &domain.schemas {
        for slot in [Slot::Pre, Slot::Add, Slot::Del] {
            for a in s.certain(slot) {
                removable.push(PossibleCondition {
                    schema: s.name.clone(),
                    slot,
                    atom: a.clone(),
                });
            }
        }
    }
    if removable.len() < n_remove {
        return Err(Error::Mutation(format!(
            "only {} atoms can be removed, {n_remove} needed",
            removable.len()
        )));
    }
    removable.shuffle(&mut rng);
    let mut out = domain.clone();
    let mut truth = BTreeMap::new();
    for c in removable.into_iter().take(n_remove) {
        let s = out
            .schemas
            .iter_mut()
            .find(|s| s.name == c.schema)
            .expect("schema from the same domain");
        s.certain_mut(c.slot).remove(&c.atom);
        s.possible_mut(c.slot).insert(c.atom.clone());
        truth.insert(c, true);
    }

    if n_inject > 0 {
        let task = Arc::new(ground(domain, problem));
        let graph = build_graph(&most_constrained(&task), &task.init_state());
        let mut injectable = Vec::new();
        for (si, s) in out.schemas.iter().enumerate() {
            let used = used_atoms(s);
            let vars: Vec<(String, String)> = s
                .params
                .iter()
                .map(|p| (p.name.clone(), p.ty.clone()))
                .collect();
            for decl in &domain.predicates {
                let arg_types: Vec<String> = decl.params.iter().map(|p| p.ty.clone()).collect();
                for args in assignments(domain, &arg_types, &vars) {
                    let atom = Atom {
                        predicate: decl.name.clone(),
                        args,
                    };
                    if used.contains(&atom) {
                        continue;
                    }
                    for slot in [Slot::Pre, Slot::Add, Slot::Del] {
                        injectable.push((si, slot, atom.clone()));
                    }
                }
            }
        }
        // keeps the action executable: some ground instance has the new atom
        // jointly reachable with its preconditions
        let executable = |si: usize, atom: &Atom| {
            let schema = &domain.schemas[si];
            task.actions.iter().filter(|a| a.schema == si).any(|a| {
                let binding: BTreeMap<&str, &str> = schema
                    .params
                    .iter()
                    .map(|p| p.name.as_str())
                    .zip(a.args.iter().map(String::as_str))
                    .collect();
                let Some(f) = task.fact_id(&atom.substitute(&binding)) else {
                    return false;
                };
                let mut facts = a.pre.clone();
                facts.push(f);
                facts.sort_unstable();
                facts.dedup();
                graph.jointly_reachable(&facts)
            })
        };
        injectable.shuffle(&mut rng);
        let mut injected = 0;
        for (si, slot, atom) in injectable {
            if injected == n_inject {
                break;
            }
            if used_atoms(&out.schemas[si]).contains(&atom) {
                continue;
            }
            if slot == Slot::Pre && !executable(si, &atom) {
                continue;
            }
            out.schemas[si].possible_mut(slot).insert(atom.clone());
            truth.insert(
                PossibleCondition {
                    schema: out.schemas[si].name.clone(),
                    slot,
                    atom,
                },
                false,
            );
            injected += 1;
        }
        if injected < n_inject {
            return Err(Error::Mutation(format!(
                "only {injected} atoms can be injected, {n_inject} needed"
            )));
        }
    }
    for s in &out.schemas {
        s.check_overlaps()
            .map_err(|e| Error::Mutation(e.to_string()))?;
    }
    Ok(Mutation { domain: out, truth })
}
