use std::sync::Arc;

use super::*;
use crate::annotated_model::*;
use crate::fixtures::*;
use crate::state::State;

fn task(domain: &str) -> Arc<GroundTask> {
    load_task(domain, FETCH_PROBLEM).unwrap()
}

fn f(t: &GroundTask, p: &str, a: &[&str]) -> FactId {
    t.fact_id(&Atom::new(p, a)).unwrap()
}

fn cond(t: &GroundTask, s: &str) -> CondId {
    t.condition_id(&s.parse().unwrap()).unwrap()
}

fn mv(t: &GroundTask) -> ActionId {
    t.action_id("move", &["rooma".into(), "roomb".into()])
        .unwrap()
}

fn crouched_start(t: &GroundTask) -> State {
    t.state([f(t, "is_crouch", &[]), f(t, "robot-at", &["rooma"])])
}

fn names(t: &GroundTask, s: &State) -> String {
    t.fmt_facts(s.iter())
}

#[test]
fn project_keeps_what_the_plan_needs() {
    let t = task(FETCH_DOMAIN);
    let junk = f(&t, "robot-at", &["roomb"]);
    let init = t.state([
        f(&t, "is_crouch", &[]),
        f(&t, "hand_tucked", &[]),
        f(&t, "robot-at", &["rooma"]),
        junk,
    ]);
    let m = most_constrained(&t);
    let (q, temp) = project(&init, &Plan(vec![mv(&t)]), &m, &[]).unwrap();
    assert_eq!(names(&t, &q), "(hand_tucked) (is_crouch) (robot-at rooma)");
    assert_eq!(q, temp);
    let (empty, _) = project(&init, &Plan::default(), &m, &[]).unwrap();
    assert!(empty.is_empty());
    let tuck = t.action_id("tuck", &[]).unwrap();
    let (first, _) = project(&init, &Plan(vec![tuck, mv(&t)]), &m, &[]).unwrap();
    assert_eq!(names(&t, &first), "(robot-at rooma)");
    assert!(project(&t.init_state(), &Plan(vec![mv(&t)]), &m, &[]).is_err());
}

#[test]
fn plan_query_without_tuck() {
    let t = task(FETCH_NO_TUCK_DOMAIN);
    let c = cond(&t, "move:pre:(hand_tucked)");
    let p = Planner::default();
    let out = qga(&p, &t, &crouched_start(&t), c, mv(&t), None)
        .unwrap()
        .unwrap();
    assert!(out.uses_host);
    assert_eq!(names(&t, &out.init), "(is_crouch) (robot-at rooma)");
    assert_eq!(
        t.fmt_facts(out.goal.pos.iter().copied()),
        "(robot-at roomb)"
    );
    assert!(certify_solvability(&p, &t, &out.init, &out.goal, c).unwrap());
    let q = Query {
        kind: QueryKind::Plan,
        init: out.init.to_vec(),
        goal: out.goal.clone(),
        plan: None,
        targets: vec![c],
        inference: Inference::Solvability { target: c },
        templates: 0,
    };
    assert_eq!(
        q.infer(&t, &Answer::YesSolvable(None)).unwrap(),
        Some(vec![(c, false)])
    );
    assert_eq!(
        q.infer(&t, &Answer::NoUnsolvable).unwrap(),
        Some(vec![(c, true)])
    );
    assert!(q.infer(&t, &Answer::Valid).is_err());
    assert!(is_distinguishing(&p, &q, c, &t).unwrap());
    let mut goal_in_init = q.clone();
    goal_in_init.goal = Goal::positive(vec![f(&t, "robot-at", &["rooma"])]);
    assert!(!is_distinguishing(&p, &goal_in_init, c, &t).unwrap());
}

#[test]
fn tuck_forces_validation() {
    let t = task(FETCH_DOMAIN);
    let c = cond(&t, "move:pre:(hand_tucked)");
    let p = Planner::default();
    let out = qga(&p, &t, &crouched_start(&t), c, mv(&t), None)
        .unwrap()
        .unwrap();
    assert!(!certify_solvability(&p, &t, &out.init, &out.goal, c).unwrap());
    let plan_form = Query {
        kind: QueryKind::Plan,
        init: out.init.to_vec(),
        goal: out.goal.clone(),
        plan: None,
        targets: vec![c],
        inference: Inference::Solvability { target: c },
        templates: 0,
    };
    assert!(!is_distinguishing(&p, &plan_form, c, &t).unwrap());
    assert_eq!(out.plan.inline(&t), "(move rooma roomb)");
    assert!(certify_validity(&t, &out.init, &out.goal, &out.plan, c).unwrap());
    let v = Query {
        kind: QueryKind::Validation,
        plan: Some(out.plan.clone()),
        inference: Inference::Validity { target: c },
        ..plan_form
    };
    assert!(is_distinguishing(&p, &v, c, &t).unwrap());
    assert_eq!(v.infer(&t, &Answer::Valid).unwrap(), Some(vec![(c, false)]));
    assert_eq!(
        v.infer(&t, &Answer::Invalid).unwrap(),
        Some(vec![(c, true)])
    );
}

#[test]
fn precondition_template_plans_differ() {
    let t = task(FETCH_DOMAIN);
    let c = cond(&t, "move:pre:(hand_tucked)");
    let tuck = t.action_id("tuck", &[]).unwrap();
    let templates = detect_templates(&t, &t.init_state());
    let on_move: Vec<&Template> = templates
        .iter()
        .filter(|x| x.cond() == c && x.action() == mv(&t))
        .collect();
    assert_eq!(
        on_move,
        [&Template::Precondition {
            action: mv(&t),
            cond: c,
            fact: f(&t, "hand_tucked", &[]),
            achiever: tuck
        }]
    );

    // with the torso already crouched the two answers are <tuck, move> and <move>
    let p = Planner::default();
    let out = qga(&p, &t, &crouched_start(&t), c, mv(&t), Some(on_move[0]))
        .unwrap()
        .unwrap();
    let present = concretize(&t, &Selection::constrained(&t)).unwrap();
    let absent = constrained_minus(&t, c).unwrap();
    let a = p
        .plan_optimal(&present, &out.init, &out.goal)
        .unwrap()
        .unwrap();
    let b = p
        .plan_optimal(&absent, &out.init, &out.goal)
        .unwrap()
        .unwrap();
    assert_eq!(a.inline(&t), "(tuck) (move rooma roomb)");
    assert_eq!(b.inline(&t), "(move rooma roomb)");
}

#[test]
fn template_filters() {
    // an add effect nobody consumes has no template
    let text = FETCH_DOMAIN.replace(
        ":effect                 (and    (is_crouch))\n:possible-effect        ()",
        ":effect                 (and    (is_crouch))\n:possible-effect        (and (hand_tucked))",
    );
    let t = load_task(&text, FETCH_PROBLEM).unwrap();
    let add = cond(&t, "crouch:add:(hand_tucked)");
    assert!(detect_templates(&t, &t.init_state())
        .iter()
        .all(|x| x.cond() != add));

    // an achiever whose preconditions can never hold together with the host's is dropped
    let mutex = FETCH_DOMAIN
        .replace(
            "(:types location)",
            "(:types location)\n(:constants roomc - location)",
        )
        .replace(
            "(:action tuck\n:parameter              ()\n:precondition           ()",
            "(:action tuck\n:parameter              ()\n:precondition           (robot-at roomc)",
        );
    let t = load_task(&mutex, FETCH_PROBLEM).unwrap();
    let c = cond(&t, "move:pre:(hand_tucked)");
    let from_a = |x: &&Template| x.cond() == c && x.action() == mv(&t);
    assert_eq!(
        detect_templates(&t, &t.init_state())
            .iter()
            .filter(from_a)
            .count(),
        0
    );
}

#[test]
fn add_effect_template() {
    let text = FETCH_SPLIT_DOMAIN
        .replace(
            ":effect (hand_tucked))\n(:action crouch",
            ":effect ()\n:possible-effect (hand_tucked))\n(:action crouch",
        )
        .replace(
            ":effect (is_crouch))",
            ":effect (and (is_crouch) (hand_tucked)))",
        )
        .replace(
            ":possible-precondition (and (is_crouch) (hand_tucked))",
            ":precondition (and (robot-at ?from) (hand_tucked))\n:possible-precondition ()",
        )
        .replace(
            ":precondition (robot-at ?from)\n:precondition",
            ":precondition",
        );
    let t = load_task(&text, FETCH_PROBLEM).unwrap();
    assert_eq!(t.n(), 1);
    let c = cond(&t, "tuck:add:(hand_tucked)");
    let templates = detect_templates(&t, &t.init_state());
    let crouch = t.action_id("crouch", &[]).unwrap();
    assert!(templates.iter().any(|x| matches!(x, Template::AddEffect { cond, producer, .. } if *cond == c && *producer == crouch)));
}

#[test]
fn fetch_needs_two_queries() {
    let t = task(FETCH_DOMAIN);
    let qp = generate_all(&t, &t.init_state(), &GenConfig::default()).unwrap();
    assert_eq!(qp.queries.len(), 2);
    assert_eq!(qp.merges, 0);
    assert!(qp.unqueryable.is_empty());
    let p = Planner::default();
    for q in &qp.queries {
        for &c in &q.targets {
            assert!(
                is_distinguishing(&p, q, c, &t).unwrap(),
                "{}",
                q.to_text(&t)
            );
        }
    }
    let hand = cond(&t, "move:pre:(hand_tucked)");
    let crouch = cond(&t, "move:pre:(is_crouch)");
    let by_target = |c| qp.queries.iter().find(|q| q.targets.contains(&c)).unwrap();
    assert!(by_target(hand).is_template());
    assert!(by_target(crouch).is_template());
    assert_eq!(
        names(&t, &t.state(by_target(hand).init.iter().copied())),
        "(is_crouch) (robot-at rooma)"
    );
}

#[test]
fn split_domain_merges_into_one_query() {
    let t = task(FETCH_SPLIT_DOMAIN);
    let qp = generate_all(&t, &t.init_state(), &GenConfig::default()).unwrap();
    assert_eq!(qp.queries.len(), 1, "{}", qp.to_text(&t));
    assert_eq!(qp.merges, 1);
    let q = &qp.queries[0];
    assert_eq!(q.templates, 2);
    assert_eq!(t.fmt_facts(q.init.iter().copied()), "(robot-at rooma)");
    assert_eq!(t.fmt_facts(q.goal.pos.iter().copied()), "(robot-at roomb)");
    let p = Planner::default();
    let mut plans = Vec::new();
    for m in enumerate_models(&t) {
        let a = simulated_answer(&p, &m, q).unwrap();
        let assign = q.infer(&t, &a).unwrap().unwrap();
        for (c, v) in assign {
            assert_eq!(v, m.selection.get(c));
        }
        plans.push(a.render(&t));
    }
    plans.sort();
    plans.dedup();
    assert_eq!(plans.len(), 4);
    let text = qp.to_text(&t);
    assert!(text.contains("inference:\n  plan uses any of"));
}

#[test]
fn no_conditions_no_queries() {
    let d = parse_domain(FETCH_DOMAIN).unwrap().without_annotations();
    let p = parse_problem(FETCH_PROBLEM, &d).unwrap();
    let t = Arc::new(ground(&d, &p));
    let qp = generate_all(&t, &t.init_state(), &GenConfig::default()).unwrap();
    assert!(qp.queries.is_empty());
    assert_eq!(qp.bound, 0);
}

#[test]
fn merge_rejects_destructive_pairs() {
    let t = task(FETCH_DOMAIN);
    let cfg = GenConfig::default();
    let hand = cond(&t, "move:pre:(hand_tucked)");
    let crouch = cond(&t, "move:pre:(is_crouch)");
    let tuck = t.action_id("tuck", &[]).unwrap();
    let crouch_a = t.action_id("crouch", &[]).unwrap();
    let mk = |c, fact, achiever| {
        let tpl = Template::Precondition {
            action: mv(&t),
            cond: c,
            fact,
            achiever,
        };
        let q = Query {
            kind: QueryKind::Plan,
            init: vec![f(&t, "robot-at", &["rooma"])],
            goal: Goal::positive(vec![f(&t, "robot-at", &["roomb"])]),
            plan: None,
            targets: vec![c],
            inference: Inference::PlanContent {
                rules: vec![ContentRule {
                    target: c,
                    witnesses: witnesses(&t, c, mv(&t)),
                }],
            },
            templates: 1,
        };
        (tpl, q)
    };
    // tuck achieves both flags, so the pair is not independent
    let qs = vec![
        mk(hand, f(&t, "hand_tucked", &[]), tuck),
        mk(crouch, f(&t, "is_crouch", &[]), crouch_a),
    ];
    let merged = merge_queries(&cfg, &t, &t.init_state(), qs).unwrap();
    assert!(merged.iter().all(|q| q.targets.len() == 1));
}

#[test]
fn unreachable_hosts_are_reported() {
    let text = FETCH_DOMAIN
        .replace("(hand_tucked))\n(:action", "(hand_tucked) (broken))\n(:action")
        .replace(
            "(:action crouch",
            "(:action jump :parameters () :precondition (broken) :possible-precondition (is_crouch) :effect (hand_tucked))\n(:action crouch",
        );
    let t = load_task(&text, FETCH_PROBLEM).unwrap();
    let qp = generate_all(&t, &t.init_state(), &GenConfig::default()).unwrap();
    let jump = cond(&t, "jump:pre:(is_crouch)");
    assert_eq!(qp.unreachable, vec![jump]);
    assert!(qp.queries.len() <= t.n());
}
