//! Subgoal traces: which goal conjunct each plan step newly achieves.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{self, Trajectory};
use crate::pddl::{Atom, Plan, Task};

/// Letters assigned to goals, in goal order. `X` is reserved for "no
/// subgoal", so it is skipped.
const LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWYZ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    /// The goal with this 0-based index in the goal list.
    Goal(usize),
    /// No subgoal newly achieved at this step.
    None,
    /// Padding used when comparing traces of different length.
    Pad,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Token::Goal(i) if i < LETTERS.len() => write!(f, "{}", LETTERS[i] as char),
            Token::Goal(i) => write!(f, "G{}", i + 1),
            Token::None => f.write_str("X"),
            Token::Pad => f.write_str("#"),
        }
    }
}

/// Bijection between goal atoms and their symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgoalAlphabet {
    goals: Vec<Atom>,
}

impl SubgoalAlphabet {
    pub fn new(task: &Task) -> Self {
        SubgoalAlphabet {
            goals: task.problem.goal.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn token(&self, goal: &Atom) -> Option<Token> {
        self.goals.iter().position(|g| g == goal).map(Token::Goal)
    }

    pub fn atom(&self, token: Token) -> Option<&Atom> {
        match token {
            Token::Goal(i) => self.goals.get(i),
            _ => None,
        }
    }

    /// `(symbol, atom)` pairs in goal order.
    pub fn entries(&self) -> impl Iterator<Item = (String, &Atom)> {
        self.goals
            .iter()
            .enumerate()
            .map(|(i, g)| (Token::Goal(i).to_string(), g))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SubgoalTrace {
    pub tokens: Vec<Token>,
}

impl SubgoalTrace {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Parses the rendered form. Only single-letter symbols are accepted;
    /// `X` is "no subgoal".
    pub fn parse(s: &str) -> Option<Self> {
        s.bytes()
            .map(|b| match b {
                b'X' => Some(Token::None),
                b'#' => Some(Token::Pad),
                _ => LETTERS.iter().position(|&l| l == b).map(Token::Goal),
            })
            .collect::<Option<Vec<_>>>()
            .map(|tokens| SubgoalTrace { tokens })
    }
}

impl fmt::Display for SubgoalTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tokens {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Builds the trace from a simulated trajectory.
///
/// Goals already true initially are never reported. After each step the
/// newly true, not yet reported goal with the lowest goal index is emitted;
/// any others achieved at the same step wait for the following steps. A
/// goal is reported at most once, even if later undone and re-achieved.
pub fn trace_of(task: &Task, trajectory: &Trajectory) -> SubgoalTrace {
    let goals = &task.problem.goal;
    let mut reported: BTreeSet<usize> = goals
        .iter()
        .enumerate()
        .filter(|(_, g)| trajectory.initial.contains(g))
        .map(|(i, _)| i)
        .collect();
    let tokens = trajectory
        .post_states
        .iter()
        .map(|state| {
            let next = goals
                .iter()
                .enumerate()
                .find(|(i, g)| !reported.contains(i) && state.contains(g));
            match next {
                Some((i, _)) => {
                    reported.insert(i);
                    Token::Goal(i)
                }
                None => Token::None,
            }
        })
        .collect();
    SubgoalTrace { tokens }
}

/// The subgoal trace of a valid plan.
pub fn subgoal_trace(plan: &Plan, task: &Task) -> Result<SubgoalTrace> {
    let report = ground::validate(plan, task);
    if let Some(f) = report.failure {
        return Err(Error::InvalidPlan(f.to_string()));
    }
    Ok(trace_of(task, &ground::simulate(plan, task)?))
}

/// Positional mismatches after padding the shorter trace with [`Token::Pad`].
pub fn hamming(a: &SubgoalTrace, b: &SubgoalTrace) -> usize {
    let n = a.len().max(b.len());
    let at = |t: &SubgoalTrace, i: usize| t.tokens.get(i).copied().unwrap_or(Token::Pad);
    (0..n).filter(|&i| at(a, i) != at(b, i)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> SubgoalTrace {
        SubgoalTrace::parse(s).unwrap()
    }

    #[test]
    fn worked_example_distance() {
        assert_eq!(hamming(&t("XXBXXXXAXC"), &t("XXXCBXXXXA")), 5);
    }

    #[test]
    fn identical_and_padded() {
        assert_eq!(hamming(&t("XXBXXXXAXC"), &t("XXBXXXXAXC")), 0);
        assert_eq!(hamming(&t("XA"), &t("XAXX")), 2);
        assert_eq!(hamming(&t(""), &t("")), 0);
    }

    #[test]
    fn x_is_never_a_goal_symbol() {
        let rendered: Vec<String> = (0..30).map(|i| Token::Goal(i).to_string()).collect();
        assert!(!rendered.iter().any(|s| s == "X" || s == "#"));
        assert_eq!(rendered[0], "A");
        assert_eq!(rendered[23], "Y");
        assert_eq!(rendered[24], "Z");
        assert_eq!(rendered[25], "G26");
        let unique: BTreeSet<_> = rendered.iter().collect();
        assert_eq!(unique.len(), 30);
    }

    #[test]
    fn render_parse_round_trip() {
        let s = "XXBXXXXAXC";
        assert_eq!(t(s).to_string(), s);
    }
}
