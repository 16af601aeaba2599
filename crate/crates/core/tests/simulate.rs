mod common;

use plandiv::ground::{self, CausalLink, LinkEnd, PlanFailure};
use plandiv::pddl::{Atom, Plan, Task};

#[test]
fn depots_plan_grounds_and_reaches_the_goal() {
    let t = common::depots();
    let p = common::plan(&t, "depots/plans/truck0.plan");
    let acts = ground::ground(&p, &t).unwrap();
    assert_eq!(acts.len(), 15);
    assert_eq!(acts[2].signature, "drive(truck0,depot0,distributor1)");
    let distinct: std::collections::BTreeSet<_> = acts.iter().map(|a| &a.signature).collect();
    assert!(distinct.len() <= 15);

    let traj = ground::simulate(&p, &t).unwrap();
    assert_eq!(traj.post_states.len(), 15);
    for g in &t.problem.goal {
        assert!(traj.final_state().contains(g), "{g}");
    }
    assert!(ground::validate(&p, &t).valid);
}

#[test]
fn every_fixture_plan_is_valid() {
    let dirs = [
        ("rover", "problem.pddl"),
        ("depots", "pfile2.pddl"),
        ("logistics", "problem.pddl"),
    ];
    for (dir, prob) in dirs {
        let t = common::task(dir, prob);
        for e in std::fs::read_dir(common::fixture(&format!("{dir}/plans"))).unwrap() {
            let path = e.unwrap().path();
            let p =
                plandiv::pddl::parse_plan_for_task(&std::fs::read_to_string(&path).unwrap(), &t)
                    .unwrap();
            let r = ground::validate(&p, &t);
            assert!(r.valid, "{}: {:?}", path.display(), r.failure);
        }
    }
}

#[test]
fn static_equality_violation() {
    let t = common::logistics();
    let e =
        ground::ground_action(&t, "drive", &["t1".into(), "l1".into(), "l1".into()]).unwrap_err();
    assert!(e.to_string().contains("static equality violated"), "{e}");
}

#[test]
fn inapplicable_step_is_located() {
    let t = common::logistics();
    // third step drives a truck that is not at l1
    let p = common::plan_text(
        &t,
        "(wrap p1 depot)\n(load p1 t1 depot)\n(drive t1 l1 l2)\n",
    );
    let r = ground::validate(&p, &t);
    assert!(!r.valid);
    assert_eq!(r.failing_step(), Some(2));
    assert!(matches!(
        r.failure,
        Some(PlanFailure::Inapplicable { step: 2, .. })
    ));
}

#[test]
fn missing_goal_is_reported() {
    let t = common::logistics();
    let p = common::plan_text(
        &t,
        "(wrap p1 depot)\n(load p1 t1 depot)\n(drive t1 depot l1)\n(unload p1 t1 l1)\n",
    );
    match ground::validate(&p, &t).failure {
        Some(PlanFailure::GoalsUnmet { missing }) => {
            assert_eq!(missing, [Atom::new("pkg-at", ["p2", "l1"])])
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_plan_trajectory() {
    let t = common::switches();
    let traj = ground::simulate(&Plan::default(), &t).unwrap();
    assert!(traj.post_states.is_empty());
    assert_eq!(traj.initial, ground::initial_state(&t));
    assert_eq!(traj.final_state(), &traj.initial);
}

#[test]
fn negative_preconditions_are_enforced() {
    let t = common::switches();
    // s1 is already on
    let p = common::plan_text(&t, "(restore-power)\n(turn-on s1)\n");
    assert_eq!(ground::validate(&p, &t).failing_step(), Some(1));
    let ok = common::plan_text(
        &t,
        "(restore-power)\n(turn-on s2)\n(turn-on s3)\n(lock s2)\n(lock s1)\n",
    );
    assert!(ground::validate(&ok, &t).valid);
}

fn tiny(domain_actions: &str, init: &str, goal: &str) -> Task {
    Task::parse(
        &format!("(define (domain t) (:predicates (p) (q) (r) (g)) {domain_actions})"),
        &format!("(define (problem t1) (:domain t) (:init {init}) (:goal (and {goal})))"),
    )
    .unwrap()
}

fn link(p: LinkEnd, atom: &str, c: LinkEnd) -> CausalLink {
    CausalLink {
        producer: p,
        atom: Atom::new(atom, Vec::<String>::new()),
        consumer: c,
    }
}

fn act(s: &str) -> LinkEnd {
    LinkEnd::Action(s.into())
}

#[test]
fn causal_links_single_action() {
    let t = tiny("(:action a :precondition (p) :effect (g))", "(p)", "(g)");
    let p = common::plan_text(&t, "(a)");
    let links = ground::causal_links(&p, &t).unwrap();
    let expected = [
        link(LinkEnd::Init, "p", act("a()")),
        link(act("a()"), "g", LinkEnd::Goal),
    ];
    assert_eq!(links, expected.into_iter().collect());
}

#[test]
fn causal_link_producer_is_latest_adder() {
    let t = tiny(
        "(:action a1 :effect (q)) (:action a2 :effect (q)) (:action b :precondition (q) :effect (g))",
        "",
        "(g)",
    );
    let p = common::plan_text(&t, "(a1)\n(a2)\n(b)\n");
    let links = ground::causal_links(&p, &t).unwrap();
    let acts = ground::ground(&p, &t).unwrap();
    for l in &links {
        if let (LinkEnd::Action(prod), LinkEnd::Action(cons)) = (&l.producer, &l.consumer) {
            let pi = acts.iter().rposition(|a| &a.signature == prod).unwrap();
            let ci = acts.iter().position(|a| &a.signature == cons).unwrap();
            // brute force: no adder of the atom strictly between producer and consumer
            assert!(!acts[pi + 1..ci].iter().any(|a| a.add.contains(&l.atom)));
        }
    }
    assert!(links.contains(&link(act("a2()"), "q", act("b()"))));
    assert!(!links.contains(&link(act("a1()"), "q", act("b()"))));
}

#[test]
fn causal_links_require_a_valid_plan() {
    let t = tiny("(:action a :precondition (p) :effect (g))", "", "(g)");
    let p = common::plan_text(&t, "(a)");
    assert!(ground::causal_links(&p, &t).is_err());
}
