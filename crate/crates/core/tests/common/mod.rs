//! Test-side reference implementations. Nothing here calls the library's
//! planner, validator, or graph code; only model data is shared.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use elicit::annotated_model::{load_task, ConcreteModel, GroundTask};
use elicit::planner::Goal;
use elicit::state::State;
use rand::Rng;

pub type Facts = Vec<u32>;

pub fn facts_of(state: &State) -> Facts {
    state.iter().collect()
}

pub fn applicable(m: &ConcreteModel, s: &[u32], a: u32) -> bool {
    m.enabled[a as usize] && m.action(a).pre.iter().all(|p| s.binary_search(p).is_ok())
}

/// Deletes first, then adds.
pub fn step(m: &ConcreteModel, s: &[u32], a: u32) -> Facts {
    let act = m.action(a);
    let mut next: Vec<u32> = s.iter().copied().filter(|f| !act.del.contains(f)).collect();
    next.extend(act.add.iter().copied());
    next.sort_unstable();
    next.dedup();
    next
}

pub fn satisfies(s: &[u32], goal: &Goal) -> bool {
    goal.pos.iter().all(|f| s.binary_search(f).is_ok())
        && goal.neg.iter().all(|f| s.binary_search(f).is_err())
}

pub fn valid(m: &ConcreteModel, init: &[u32], goal: &Goal, plan: &[u32]) -> bool {
    let mut s = init.to_vec();
    for &a in plan {
        if !applicable(m, &s, a) {
            return false;
        }
        s = step(m, &s, a);
    }
    satisfies(&s, goal)
}

pub fn num_actions(m: &ConcreteModel) -> u32 {
    m.actions.len() as u32
}

/// Breadth-first distances from `init`, up to `limit` states.
pub fn bfs_all(m: &ConcreteModel, init: &[u32], limit: usize) -> Option<HashMap<Facts, usize>> {
    let mut dist = HashMap::new();
    dist.insert(init.to_vec(), 0);
    let mut queue = VecDeque::from([init.to_vec()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for a in 0..num_actions(m) {
            if applicable(m, &s, a) {
                let n = step(m, &s, a);
                if !dist.contains_key(&n) {
                    if dist.len() >= limit {
                        return None;
                    }
                    dist.insert(n.clone(), d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    Some(dist)
}

/// Optimal plan length, `None` when unreachable.
pub fn bfs_cost(m: &ConcreteModel, init: &[u32], goal: &Goal) -> Option<usize> {
    if satisfies(init, goal) {
        return Some(0);
    }
    let mut seen = HashSet::from([init.to_vec()]);
    let mut frontier = vec![init.to_vec()];
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..num_actions(m) {
                if applicable(m, s, a) {
                    let n = step(m, s, a);
                    if satisfies(&n, goal) {
                        return Some(d);
                    }
                    if seen.insert(n.clone()) {
                        next.push(n);
                    }
                }
            }
        }
        frontier = next;
    }
    None
}

/// Optimal cost restricted to plans that use an action of `must`.
pub fn bfs_cost_using(m: &ConcreteModel, init: &[u32], goal: &Goal, must: &[u32]) -> Option<usize> {
    let start = (init.to_vec(), false);
    let mut seen = HashSet::from([start.clone()]);
    let mut frontier = vec![start];
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for (s, used) in &frontier {
            for a in 0..num_actions(m) {
                if applicable(m, s, a) {
                    let n = (step(m, s, a), *used || must.contains(&a));
                    if n.1 && satisfies(&n.0, goal) {
                        return Some(d);
                    }
                    if seen.insert(n.clone()) {
                        next.push(n);
                    }
                }
            }
        }
        frontier = next;
    }
    None
}

/// Every optimal plan, by depth-first enumeration along BFS layers;
/// `None` when there are more than `cap`.
pub fn all_optimal_plans(
    m: &ConcreteModel,
    init: &[u32],
    goal: &Goal,
    cap: usize,
) -> Option<Vec<Vec<u32>>> {
    let Some(cost) = bfs_cost(m, init, goal) else {
        return Some(Vec::new());
    };
    let mut walk = Walk {
        m,
        goal,
        cap,
        prefix: Vec::new(),
        out: Vec::new(),
        dead: HashSet::new(),
    };
    walk.rec(init, cost).then_some(walk.out)
}

struct Walk<'a> {
    m: &'a ConcreteModel,
    goal: &'a Goal,
    cap: usize,
    prefix: Vec<u32>,
    out: Vec<Vec<u32>>,
    /// (state, steps left) pairs that lead nowhere
    dead: HashSet<(Facts, usize)>,
}

impl Walk<'_> {
    /// False once the cap is exceeded.
    fn rec(&mut self, s: &[u32], left: usize) -> bool {
        if left == 0 {
            if satisfies(s, self.goal) {
                self.out.push(self.prefix.clone());
                return self.out.len() <= self.cap;
            }
            return true;
        }
        if self.dead.contains(&(s.to_vec(), left)) {
            return true;
        }
        let before = self.out.len();
        for a in 0..num_actions(self.m) {
            if applicable(self.m, s, a) {
                let n = step(self.m, s, a);
                self.prefix.push(a);
                let ok = self.rec(&n, left - 1);
                self.prefix.pop();
                if !ok {
                    return false;
                }
            }
        }
        if self.out.len() == before {
            self.dead.insert((s.to_vec(), left));
        }
        true
    }
}

/// Codes for one random propositional action: per fact, the precondition
/// code (0 none, 1 certain, 2 possible) and the effect code (0 none,
/// 1 add, 2 delete, 3 possible add, 4 possible delete).
#[derive(Clone, Debug)]
pub struct RandomTask {
    pub facts: usize,
    pub actions: Vec<Vec<(u8, u8)>>,
    pub init: Vec<bool>,
    pub goal: Vec<bool>,
}

impl RandomTask {
    pub fn sample(rng: &mut impl Rng, facts: usize, actions: usize) -> Self {
        RandomTask {
            facts,
            actions: (0..actions)
                .map(|_| {
                    (0..facts)
                        .map(|_| {
                            let pre = [0, 0, 0, 1, 1, 2][rng.gen_range(0..6)];
                            let eff = [0, 0, 0, 1, 1, 2, 3, 4][rng.gen_range(0..8)];
                            (pre, eff)
                        })
                        .collect()
                })
                .collect(),
            init: (0..facts).map(|_| rng.gen_bool(0.4)).collect(),
            goal: (0..facts).map(|_| rng.gen_bool(0.3)).collect(),
        }
    }

    /// Domain and problem text. Possible annotations beyond `max_possible`
    /// are dropped, as are effects contradicting the overlap rules.
    pub fn to_pddl(&self, max_possible: usize) -> (String, String) {
        let mut budget = max_possible;
        let mut d = String::from("(define (domain rnd)\n(:requirements :strips)\n(:predicates");
        for f in 0..self.facts {
            let _ = write!(d, " (f{f})");
        }
        d.push_str(")\n");
        for (i, codes) in self.actions.iter().enumerate() {
            let mut pre = Vec::new();
            let mut ppre = Vec::new();
            let mut eff = Vec::new();
            let mut peff = Vec::new();
            for (f, &(p, e)) in codes.iter().enumerate() {
                match p {
                    1 => pre.push(format!("(f{f})")),
                    2 if budget > 0 => {
                        budget -= 1;
                        ppre.push(format!("(f{f})"));
                    }
                    _ => {}
                }
                match e {
                    1 => eff.push(format!("(f{f})")),
                    2 => eff.push(format!("(not (f{f}))")),
                    3 if budget > 0 => {
                        budget -= 1;
                        peff.push(format!("(f{f})"));
                    }
                    4 if budget > 0 => {
                        budget -= 1;
                        peff.push(format!("(not (f{f}))"));
                    }
                    _ => {}
                }
            }
            let and = |v: &[String]| format!("(and {})", v.join(" "));
            let _ = writeln!(
                d,
                "(:action a{i}\n :parameters ()\n :precondition {}\n :possible-precondition {}\n :effect {}\n :possible-effect {})",
                and(&pre),
                and(&ppre),
                and(&eff),
                and(&peff)
            );
        }
        d.push(')');
        let mut p = String::from("(define (problem rnd-p)\n(:domain rnd)\n(:init");
        for f in (0..self.facts).filter(|&f| self.init[f]) {
            let _ = write!(p, " (f{f})");
        }
        p.push_str(")\n(:goal (and");
        for f in (0..self.facts).filter(|&f| self.goal[f]) {
            let _ = write!(p, " (f{f})");
        }
        p.push_str(")))");
        (d, p)
    }

    pub fn task(&self, max_possible: usize) -> Arc<GroundTask> {
        let (d, p) = self.to_pddl(max_possible);
        load_task(&d, &p).unwrap_or_else(|e| panic!("{e}\n{d}\n{p}"))
    }
}

/// Stdin lines that make the interactive oracle give the answers recorded
/// in a transcript.
pub fn script_for(transcript: &str) -> String {
    let mut out = String::new();
    for line in transcript.lines() {
        let Some(ans) = line.strip_prefix("answer: ") else {
            continue;
        };
        match ans {
            "yes" | "valid" => out.push_str("yes\n"),
            "no" | "invalid" => out.push_str("no\n"),
            _ => {
                let plan = ans.strip_prefix("plan:").expect("plan answer").trim();
                out.push_str(if plan.is_empty() { "empty" } else { plan });
                out.push_str("\n\n");
            }
        }
    }
    out
}
