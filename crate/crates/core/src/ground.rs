//! Grounding, STRIPS state simulation, plan validation and causal links.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{ApplyError, Error, GroundError, Result};
use crate::pddl::{Atom, AtomSchema, Condition, Literal, Plan, Task, Term};

/// A fully instantiated action. The signature `name(arg1,...,argk)` is its
/// identity: repeated occurrences of one ground action share it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedAction {
    pub signature: String,
    pub name: String,
    pub args: Vec<String>,
    /// Preconditions in source order, equality literals already resolved.
    pub pre: Vec<Literal>,
    pub add: BTreeSet<Atom>,
    pub del: BTreeSet<Atom>,
}

impl GroundedAction {
    pub fn positive_pre(&self) -> impl Iterator<Item = &Atom> {
        self.pre.iter().filter(|l| l.positive).map(|l| &l.atom)
    }

    pub fn negative_pre(&self) -> impl Iterator<Item = &Atom> {
        self.pre.iter().filter(|l| !l.positive).map(|l| &l.atom)
    }
}

pub fn signature(name: &str, args: &[String]) -> String {
    format!("{name}({})", args.join(","))
}

fn substitute(atom: &AtomSchema, binding: &BTreeMap<&str, &str>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .terms
            .iter()
            .map(|t| resolve(t, binding).to_string())
            .collect(),
    }
}

fn resolve<'a>(t: &'a Term, binding: &BTreeMap<&str, &'a str>) -> &'a str {
    match t {
        Term::Var(v) => binding[v.as_str()],
        Term::Const(c) => c,
    }
}

/// Instantiates the schema `name` with `args`.
pub fn ground_action(
    task: &Task,
    name: &str,
    args: &[String],
) -> Result<GroundedAction, GroundError> {
    let schema = task
        .domain
        .schema(name)
        .ok_or_else(|| GroundError::UnknownAction(name.to_string()))?;
    if schema.params.len() != args.len() {
        return Err(GroundError::Arity {
            name: name.to_string(),
            expected: schema.params.len(),
            found: args.len(),
        });
    }
    let mut binding = BTreeMap::new();
    for (p, a) in schema.params.iter().zip(args) {
        task.check_argument(a, &p.ty)?;
        binding.insert(p.name.as_str(), a.as_str());
    }

    let mut pre: Vec<Literal> = Vec::new();
    for c in &schema.precond {
        match c {
            Condition::Atom { atom, positive } => {
                let lit = Literal {
                    atom: substitute(atom, &binding),
                    positive: *positive,
                };
                if !pre.contains(&lit) {
                    pre.push(lit);
                }
            }
            Condition::Equality {
                left,
                right,
                positive,
            } => {
                let (l, r) = (resolve(left, &binding), resolve(right, &binding));
                if (l == r) != *positive {
                    let shown = if *positive {
                        format!("(= {l} {r})")
                    } else {
                        format!("(not (= {l} {r}))")
                    };
                    return Err(GroundError::StaticEquality(shown));
                }
            }
        }
    }
    let add: BTreeSet<Atom> = schema.add.iter().map(|a| substitute(a, &binding)).collect();
    let del = schema
        .del
        .iter()
        .map(|a| substitute(a, &binding))
        .filter(|a| !add.contains(a))
        .collect();
    Ok(GroundedAction {
        signature: signature(name, args),
        name: name.to_string(),
        args: args.to_vec(),
        pre,
        add,
        del,
    })
}

/// Grounds every step of `plan`.
pub fn ground(plan: &Plan, task: &Task) -> Result<Vec<GroundedAction>> {
    plan.steps
        .iter()
        .map(|s| {
            ground_action(task, &s.name, &s.args).map_err(|source| Error::Ground {
                step: s.index,
                source,
            })
        })
        .collect()
}

/// A set of true ground atoms (closed world).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State(BTreeSet<Atom>);

impl State {
    pub fn new(atoms: BTreeSet<Atom>) -> Self {
        State(atoms)
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn satisfies(&self, lit: &Literal) -> bool {
        self.contains(&lit.atom) == lit.positive
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// Applies `a` to `s`: `(s \ del) ∪ add`, after checking preconditions.
pub fn apply(s: &State, a: &GroundedAction) -> Result<State, ApplyError> {
    if let Some(l) = a.pre.iter().find(|l| !s.satisfies(l)) {
        return Err(ApplyError::PreconditionUnsatisfied(l.clone()));
    }
    let mut next = s.0.clone();
    for d in &a.del {
        next.remove(d);
    }
    next.extend(a.add.iter().cloned());
    Ok(State(next))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub initial: State,
    /// One state per plan step, the state after that step.
    pub post_states: Vec<State>,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.post_states.last().unwrap_or(&self.initial)
    }
}

pub fn initial_state(task: &Task) -> State {
    State(task.problem.init.clone())
}

/// Simulates already grounded actions from `initial`.
pub fn simulate_actions(initial: State, actions: &[GroundedAction]) -> Result<Trajectory> {
    let mut post_states: Vec<State> = Vec::with_capacity(actions.len());
    for (step, a) in actions.iter().enumerate() {
        let cur = post_states.last().unwrap_or(&initial);
        let next = apply(cur, a).map_err(|source| Error::Apply { step, source })?;
        post_states.push(next);
    }
    Ok(Trajectory {
        initial,
        post_states,
    })
}

/// Simulates `plan` from the task's initial state. Goal satisfaction is not
/// checked here; see [`validate`].
pub fn simulate(plan: &Plan, task: &Task) -> Result<Trajectory> {
    simulate_actions(initial_state(task), &ground(plan, task)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanFailure {
    Ground { step: usize, error: GroundError },
    Inapplicable { step: usize, error: ApplyError },
    GoalsUnmet { missing: Vec<Atom> },
}

impl fmt::Display for PlanFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanFailure::Ground { step, error } => write!(f, "step {step}: {error}"),
            PlanFailure::Inapplicable { step, error } => write!(f, "step {step}: {error}"),
            PlanFailure::GoalsUnmet { missing } => {
                f.write_str("goal atoms not achieved:")?;
                for m in missing {
                    write!(f, " {m}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub failure: Option<PlanFailure>,
}

impl ValidationReport {
    /// Index of the failing step, when the failure is tied to one.
    pub fn failing_step(&self) -> Option<usize> {
        match self.failure {
            Some(PlanFailure::Ground { step, .. } | PlanFailure::Inapplicable { step, .. }) => {
                Some(step)
            }
            _ => None,
        }
    }
}

fn fail(f: PlanFailure) -> ValidationReport {
    ValidationReport {
        valid: false,
        failure: Some(f),
    }
}

pub(crate) fn missing_goals<'a>(task: &'a Task, state: &State) -> Vec<&'a Atom> {
    task.problem
        .goal
        .iter()
        .filter(|g| !state.contains(g))
        .collect()
}

/// Checks that every step applies and the final state satisfies the goal.
/// Step indices in the report are 0-based.
pub fn validate(plan: &Plan, task: &Task) -> ValidationReport {
    let actions = match ground(plan, task) {
        Ok(a) => a,
        Err(Error::Ground { step, source }) => {
            return fail(PlanFailure::Ground {
                step,
                error: source,
            })
        }
        Err(e) => unreachable!("grounding only fails per step: {e}"),
    };
    let traj = match simulate_actions(initial_state(task), &actions) {
        Ok(t) => t,
        Err(Error::Apply { step, source }) => {
            return fail(PlanFailure::Inapplicable {
                step,
                error: source,
            })
        }
        Err(e) => unreachable!("simulation only fails per step: {e}"),
    };
    let missing = missing_goals(task, traj.final_state());
    if missing.is_empty() {
        ValidationReport {
            valid: true,
            failure: None,
        }
    } else {
        fail(PlanFailure::GoalsUnmet {
            missing: missing.into_iter().cloned().collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkEnd {
    Init,
    Action(String),
    Goal,
}

impl fmt::Display for LinkEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkEnd::Init => f.write_str("INIT"),
            LinkEnd::Action(s) => f.write_str(s),
            LinkEnd::Goal => f.write_str("GOAL"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CausalLink {
    pub producer: LinkEnd,
    pub atom: Atom,
    pub consumer: LinkEnd,
}

impl fmt::Display for CausalLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} --{}--> {}", self.producer, self.atom, self.consumer)
    }
}

/// Causal links of a validated, grounded plan. Each positive precondition
/// (and each goal atom) is supported by the latest earlier step adding it,
/// or by the initial state.
pub(crate) fn links_from_actions(
    task: &Task,
    actions: &[GroundedAction],
) -> Result<BTreeSet<CausalLink>> {
    let init = &task.problem.init;
    let mut latest: BTreeMap<&Atom, usize> = BTreeMap::new();
    let mut links = BTreeSet::new();
    let producer = |latest: &BTreeMap<&Atom, usize>, p: &Atom, consumer: &str| -> Result<LinkEnd> {
        match latest.get(p) {
            Some(&i) => Ok(LinkEnd::Action(actions[i].signature.clone())),
            None if init.contains(p) => Ok(LinkEnd::Init),
            None => Err(Error::InvalidPlan(format!(
                "no support for {p} needed by {consumer}"
            ))),
        }
    };
    for (j, a) in actions.iter().enumerate() {
        for p in a.positive_pre() {
            links.insert(CausalLink {
                producer: producer(&latest, p, &a.signature)?,
                atom: p.clone(),
                consumer: LinkEnd::Action(a.signature.clone()),
            });
        }
        for added in &a.add {
            latest.insert(added, j);
        }
    }
    for g in &task.problem.goal {
        links.insert(CausalLink {
            producer: producer(&latest, g, "GOAL")?,
            atom: g.clone(),
            consumer: LinkEnd::Goal,
        });
    }
    Ok(links)
}

/// Extracts the causal links of `plan`. The plan must be valid.
pub fn causal_links(plan: &Plan, task: &Task) -> Result<BTreeSet<CausalLink>> {
    let report = validate(plan, task);
    if let Some(f) = report.failure {
        return Err(Error::InvalidPlan(f.to_string()));
    }
    links_from_actions(task, &ground(plan, task)?)
}
