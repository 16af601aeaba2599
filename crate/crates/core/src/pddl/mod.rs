//! Parsed PDDL models: domains, problems and IPC-format plans.
//!
//! The supported fragment is STRIPS with `:typing`, `:equality` and
//! `:negative-preconditions`. All identifiers are lower-cased.

mod domain;
mod plan;
mod problem;
pub mod sexpr;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use domain::parse_domain;
pub use plan::{parse_plan, parse_plan_for_task};
pub use problem::parse_problem;

use crate::error::GroundError;

pub const OBJECT_TYPE: &str = "object";

/// A ground proposition such as `(on crate0 pallet2)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(
        predicate: impl Into<String>,
        args: impl IntoIterator<Item = S>,
    ) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A ground atom or its negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    fn name(&self) -> &str {
        match self {
            Term::Var(v) | Term::Const(v) => v,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An atom over schema variables and domain constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomSchema {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl fmt::Display for AtomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom {
        atom: AtomSchema,
        positive: bool,
    },
    Equality {
        left: Term,
        right: Term,
        positive: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    /// Parameter names keep their leading `?`.
    pub params: Vec<TypedName>,
    pub precond: Vec<Condition>,
    pub add: Vec<AtomSchema>,
    pub del: Vec<AtomSchema>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requirement {
    Strips,
    Typing,
    Equality,
    NegativePreconditions,
}

impl Requirement {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            ":strips" => Requirement::Strips,
            ":typing" => Requirement::Typing,
            ":equality" => Requirement::Equality,
            ":negative-preconditions" => Requirement::NegativePreconditions,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::Equality => ":equality",
            Requirement::NegativePreconditions => ":negative-preconditions",
        }
    }
}

/// Type hierarchy rooted at `object`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeHierarchy {
    parents: BTreeMap<String, String>,
}

impl TypeHierarchy {
    pub fn contains(&self, ty: &str) -> bool {
        ty == OBJECT_TYPE || self.parents.contains_key(ty)
    }

    pub fn parent(&self, ty: &str) -> Option<&str> {
        self.parents.get(ty).map(String::as_str)
    }

    /// Declared types other than `object`, with their parents.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parents.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        // the hierarchy is validated acyclic at parse time; the bound is a
        // second guard against a malformed hand-built value
        for _ in 0..=self.parents.len() {
            if cur == ancestor || ancestor == OBJECT_TYPE {
                return true;
            }
            match self.parents.get(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }

    fn compatible(&self, a: &str, b: &str) -> bool {
        self.is_subtype(a, b) || self.is_subtype(b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainModel {
    pub name: String,
    pub requirements: Vec<Requirement>,
    pub types: TypeHierarchy,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDef>,
    pub schemas: Vec<ActionSchema>,
}

impl DomainModel {
    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_requirement(&self, r: Requirement) -> bool {
        self.requirements.contains(&r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemModel {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: std::collections::BTreeSet<Atom>,
    /// Goal conjuncts in source order, duplicates removed.
    pub goal: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PlanStep {
    pub index: usize,
    pub name: String,
    pub args: Vec<String>,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A total-order plan.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub source: Option<std::path::PathBuf>,
}

impl Plan {
    pub fn from_steps<I, S>(steps: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<S>)>,
        S: Into<String>,
    {
        Plan {
            steps: steps
                .into_iter()
                .enumerate()
                .map(|(index, (name, args))| PlanStep {
                    index,
                    name: name.into(),
                    args: args.into_iter().map(Into::into).collect(),
                })
                .collect(),
            source: None,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Renders the plan in IPC format, one action per line plus a cost comment.
    pub fn to_ipc(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out.push_str(&format!("; cost = {} (unit cost)\n", self.steps.len()));
        out
    }
}

/// A domain and one of its problems, with the object table resolved.
#[derive(Debug, Clone)]
pub struct Task {
    pub domain: DomainModel,
    pub problem: ProblemModel,
    object_types: BTreeMap<String, String>,
}

impl Task {
    /// Pairs a domain with a problem parsed against it.
    pub fn new(domain: DomainModel, problem: ProblemModel) -> Self {
        let object_types = domain
            .constants
            .iter()
            .chain(&problem.objects)
            .map(|o| (o.name.clone(), o.ty.clone()))
            .collect();
        Task {
            domain,
            problem,
            object_types,
        }
    }

    pub fn parse(domain_text: &str, problem_text: &str) -> Result<Self, crate::error::ParseError> {
        let domain = parse_domain(domain_text)?;
        let problem = parse_problem(problem_text, &domain)?;
        Ok(Task::new(domain, problem))
    }

    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.object_types.get(name).map(String::as_str)
    }

    /// All objects (domain constants included) whose type is `ty` or a subtype.
    pub fn objects_of_type(&self, ty: &str) -> Vec<&str> {
        self.object_types
            .iter()
            .filter(|(_, t)| self.domain.types.is_subtype(t, ty))
            .map(|(o, _)| o.as_str())
            .collect()
    }

    pub(crate) fn check_argument(&self, object: &str, expected: &str) -> Result<(), GroundError> {
        let actual = self
            .object_type(object)
            .ok_or_else(|| GroundError::UnknownConstant(object.to_string()))?;
        if self.domain.types.is_subtype(actual, expected) {
            Ok(())
        } else {
            Err(GroundError::TypeMismatch {
                object: object.to_string(),
                actual: actual.to_string(),
                expected: expected.to_string(),
            })
        }
    }
}
