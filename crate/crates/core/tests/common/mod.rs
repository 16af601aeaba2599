//! Helpers shared by the integration tests: fixture loading, exhaustive
//! action grounding, random valid-plan generation and brute-force oracles.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use plandiv::ground::{self, GroundedAction, State};
use plandiv::pddl::{self, Plan, Task};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn task(dir: &str, problem: &str) -> Task {
    Task::parse(
        &read(&format!("{dir}/domain.pddl")),
        &read(&format!("{dir}/{problem}")),
    )
    .unwrap()
}

pub fn rover() -> Task {
    task("rover", "problem.pddl")
}

pub fn depots() -> Task {
    task("depots", "pfile2.pddl")
}

pub fn logistics() -> Task {
    task("logistics", "problem.pddl")
}

pub fn blocks() -> Task {
    task("blocks", "problem.pddl")
}

pub fn switches() -> Task {
    task("switches", "problem.pddl")
}

pub fn plan(task: &Task, rel: &str) -> Plan {
    pddl::parse_plan_for_task(&read(rel), task).unwrap()
}

pub fn plan_text(task: &Task, text: &str) -> Plan {
    pddl::parse_plan_for_task(text, task).unwrap()
}

/// Small tasks used for randomised testing.
pub fn toy_tasks() -> Vec<(&'static str, Task)> {
    vec![
        ("blocks", blocks()),
        ("logistics", logistics()),
        ("switches", switches()),
        ("rover", rover()),
    ]
}

/// Every ground action of the task whose static equality constraints hold.
pub fn all_actions(task: &Task) -> Vec<GroundedAction> {
    let mut out = Vec::new();
    for schema in &task.domain.schemas {
        let domains: Vec<Vec<&str>> = schema
            .params
            .iter()
            .map(|p| task.objects_of_type(&p.ty))
            .collect();
        let mut idx = vec![0usize; domains.len()];
        if domains.iter().any(|d| d.is_empty()) {
            continue;
        }
        loop {
            let args: Vec<String> = idx
                .iter()
                .zip(&domains)
                .map(|(&i, d)| d[i].to_string())
                .collect();
            if let Ok(a) = ground::ground_action(task, &schema.name, &args) {
                out.push(a);
            }
            // odometer increment
            let mut k = domains.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

pub fn applicable<'a>(s: &State, actions: &'a [GroundedAction]) -> Vec<&'a GroundedAction> {
    actions
        .iter()
        .filter(|a| ground::apply(s, a).is_ok())
        .collect()
}

pub fn goal_reached(task: &Task, s: &State) -> bool {
    task.problem.goal.iter().all(|g| s.contains(g))
}

/// Shortest action sequence from `start` to a goal state, if one exists
/// within `max_states` expansions.
pub fn bfs(
    task: &Task,
    actions: &[GroundedAction],
    start: &State,
    max_states: usize,
) -> Option<Vec<GroundedAction>> {
    let mut parent: HashMap<State, Option<(State, usize)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(s) = queue.pop_front() {
        if goal_reached(task, &s) {
            let mut path = Vec::new();
            let mut cur = s;
            while let Some(Some((prev, ai))) = parent.get(&cur).cloned() {
                path.push(actions[ai].clone());
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        if parent.len() > max_states {
            return None;
        }
        for (ai, a) in actions.iter().enumerate() {
            if let Ok(next) = ground::apply(&s, a) {
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((s.clone(), ai)));
                    queue.push_back(next);
                }
            }
        }
    }
    None
}

pub fn plan_of(actions: &[GroundedAction]) -> Plan {
    Plan::from_steps(actions.iter().map(|a| (a.name.clone(), a.args.clone())))
}

/// A valid plan: a random walk of up to `max_walk` steps followed by a
/// shortest completion found by BFS.
pub fn random_valid_plan(
    task: &Task,
    actions: &[GroundedAction],
    rng: &mut ChaCha8Rng,
    max_walk: usize,
) -> Plan {
    loop {
        let mut s = ground::initial_state(task);
        let mut steps = Vec::new();
        for _ in 0..rng.gen_range(0..=max_walk) {
            let app = applicable(&s, actions);
            let Some(a) = app.choose(rng) else { break };
            s = ground::apply(&s, a).unwrap();
            steps.push((*a).clone());
        }
        if let Some(rest) = bfs(task, actions, &s, 20_000) {
            steps.extend(rest);
            return plan_of(&steps);
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` valid plans for `task` with distinct labels `p00`, `p01`, ...
pub fn random_plans(task: &Task, n: usize, seed: u64, max_walk: usize) -> (Vec<Plan>, Vec<String>) {
    let actions = all_actions(task);
    let mut r = rng(seed);
    let plans: Vec<Plan> = (0..n)
        .map(|_| random_valid_plan(task, &actions, &mut r, max_walk))
        .collect();
    let labels = (0..n).map(|i| format!("p{i:02}")).collect();
    (plans, labels)
}

/// Every topological order of the DAG given by `edges` over `n` nodes.
pub fn linearizations(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    fn go(
        n: usize,
        edges: &BTreeSet<(usize, usize)>,
        placed: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if placed.len() == n {
            out.push(placed.clone());
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            let ready = edges
                .iter()
                .filter(|&&(_, j)| j == v)
                .all(|&(i, _)| used[i]);
            if ready {
                used[v] = true;
                placed.push(v);
                go(n, edges, placed, used, out);
                placed.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, edges, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum pairwise dissimilarity of `subset` under `d`.
pub fn min_pairwise(subset: &[usize], d: impl Fn(usize, usize) -> f64) -> f64 {
    let mut m = f64::INFINITY;
    for (x, &i) in subset.iter().enumerate() {
        for &j in &subset[x + 1..] {
            m = m.min(d(i, j));
        }
    }
    m
}

/// The best achievable minimum pairwise dissimilarity over all `k`-subsets.
pub fn exhaustive_best(n: usize, k: usize, d: impl Fn(usize, usize) -> f64) -> f64 {
    subsets(n, k)
        .iter()
        .map(|s| min_pairwise(s, &d))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    v.shuffle(rng);
}

/// Every valid plan of at most `max_len` steps (depth-first, in ground-action
/// order), stopping after `cap` plans.
pub fn all_plans_up_to(
    task: &Task,
    actions: &[GroundedAction],
    max_len: usize,
    cap: usize,
) -> Vec<Plan> {
    fn go(
        task: &Task,
        actions: &[GroundedAction],
        s: &State,
        prefix: &mut Vec<GroundedAction>,
        max_len: usize,
        cap: usize,
        out: &mut Vec<Plan>,
    ) {
        if out.len() >= cap {
            return;
        }
        if goal_reached(task, s) {
            out.push(plan_of(prefix));
        }
        if prefix.len() == max_len {
            return;
        }
        for a in actions {
            if let Ok(next) = ground::apply(s, a) {
                prefix.push(a.clone());
                go(task, actions, &next, prefix, max_len, cap, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(
        task,
        actions,
        &ground::initial_state(task),
        &mut Vec::new(),
        max_len,
        cap,
        &mut out,
    );
    out
}

/// The logistics domain with a single package to deliver.
pub fn logistics_one_package() -> Task {
    Task::parse(
        &read("logistics/domain.pddl"),
        "(define (problem one-package) (:domain logistics-lite)
           (:objects t1 t2 - truck depot l1 - location p1 - package)
           (:init (truck-at t1 depot) (truck-at t2 depot) (pkg-at p1 depot))
           (:goal (pkg-at p1 l1)))",
    )
    .unwrap()
}
