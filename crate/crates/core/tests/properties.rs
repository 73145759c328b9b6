mod common;

use common::*;
use elicit::annotated_model::{concretize, most_constrained, most_relaxed, Selection};
use elicit::landmarks::{is_action_landmark, is_optimal_landmark};
use elicit::planner::{validate, Goal, Planner};
use elicit::planning_graph::{build_graph, Node};
use elicit::query_gen::{generate_all, GenConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tasks(max_facts: usize, max_actions: usize) -> impl Strategy<Value = RandomTask> {
    (any::<u64>(), 2..=max_facts, 1..=max_actions)
        .prop_map(|(seed, f, a)| RandomTask::sample(&mut ChaCha8Rng::seed_from_u64(seed), f, a))
}

fn pick(n: usize, raw: u64) -> Selection {
    Selection::nth(n, raw % (1u64 << n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn planner_cost_matches_bfs(s in tasks(6, 6), raw in any::<u64>(), neg_mask in any::<u8>()) {
        let task = s.task(4);
        let model = concretize(&task, &pick(task.n(), raw)).unwrap();
        let init = task.init_state();
        let mut goal = Goal::positive(task.goal_facts());
        goal.neg = (0..task.num_facts() as u32)
            .filter(|&f| neg_mask >> (f % 8) & 1 == 1 && !goal.pos.contains(&f))
            .collect();
        goal.normalize();
        let got = Planner::default().plan_optimal(&model, &init, &goal).unwrap();
        let want = bfs_cost(&model, &facts_of(&init), &goal);
        prop_assert_eq!(got.as_ref().map(|p| p.cost()), want);
        if let Some(p) = got {
            prop_assert!(valid(&model, &facts_of(&init), &goal, &p.0));
        }
    }

    #[test]
    fn graph_levels_and_mutexes_are_sound(s in tasks(6, 6), raw in any::<u64>()) {
        let task = s.task(4);
        let model = concretize(&task, &pick(task.n(), raw)).unwrap();
        let init = task.init_state();
        let graph = build_graph(&model, &init);
        let dist = bfs_all(&model, &facts_of(&init), 1 << 12).unwrap();
        for (state, &d) in &dist {
            for (i, &f) in state.iter().enumerate() {
                prop_assert!(graph.fact_first[f as usize].is_some_and(|l| l <= d));
                for &g in &state[i + 1..] {
                    prop_assert!(!graph.mutex(Node::Fact(f), Node::Fact(g), d).unwrap());
                }
            }
            for a in 0..num_actions(&model) {
                if applicable(&model, state, a) {
                    prop_assert!(graph.action_first[a as usize].is_some_and(|l| l <= d));
                }
            }
        }
    }

    #[test]
    fn extremes_bound_every_model(s in tasks(5, 5), raw in any::<u64>()) {
        let task = s.task(5);
        let planner = Planner::default();
        let model = concretize(&task, &pick(task.n(), raw)).unwrap();
        let (con, rel) = (most_constrained(&task), most_relaxed(&task));
        let init = task.init_state();
        let goal = Goal::positive(task.goal_facts());
        let cost = |m| planner.optimal_cost(m, &init, &goal).unwrap();
        // unsolvable reads as infinite cost
        let key = |c: Option<usize>| c.unwrap_or(usize::MAX);
        prop_assert!(key(cost(&rel)) <= key(cost(&model)));
        prop_assert!(key(cost(&model)) <= key(cost(&con)));
        if let Some(p) = planner.plan_optimal(&con, &init, &goal).unwrap() {
            prop_assert!(validate(&model, &init, &goal, &p));
            prop_assert!(validate(&rel, &init, &goal, &p));
        }
    }

    #[test]
    fn landmarks_match_plan_enumeration(s in tasks(4, 5), raw in any::<u64>()) {
        let task = s.task(3);
        let model = concretize(&task, &pick(task.n(), raw)).unwrap();
        let init = task.init_state();
        let goal = Goal::positive(task.goal_facts());
        let planner = Planner::default();
        let Some(plans) = all_optimal_plans(&model, &facts_of(&init), &goal, 10_000) else {
            return Ok(());
        };
        for a in 0..num_actions(&model) {
            let action = is_action_landmark(&planner, &model, &init, &goal, a);
            let optimal = is_optimal_landmark(&planner, &model, &init, &goal, a);
            if plans.is_empty() {
                prop_assert!(action.is_err() && optimal.is_err());
                continue;
            }
            let avoidable = bfs_cost(&model.without(&[a]), &facts_of(&init), &goal).is_some();
            prop_assert_eq!(action.unwrap(), !avoidable);
            prop_assert_eq!(optimal.unwrap(), plans.iter().all(|p| p.contains(&a)));
        }
    }

    #[test]
    fn generation_is_deterministic(s in tasks(5, 4)) {
        let task = s.task(4);
        let cfg = GenConfig::default();
        let a = generate_all(&task, &task.init_state(), &cfg).unwrap();
        let b = generate_all(&task, &task.init_state(), &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
