//! Deordering of total-order plans into layered partial-order plans.
//!
//! Two steps `i < j` are ordered when one supplies, threatens or clobbers
//! something the other uses. Layers come from longest-path layering of the
//! resulting DAG, and a layer's signatures form one block.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ground::{self, GroundedAction};
use crate::pddl::{Plan, Task};

/// Necessary orderings between plan occurrences; every edge `(i, j)` has `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceGraph {
    len: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl PrecedenceGraph {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn predecessors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == j).map(|e| e.0)
    }
}

fn intersects<'a, T: Ord + 'a>(a: impl IntoIterator<Item = &'a T>, b: &BTreeSet<T>) -> bool {
    a.into_iter().any(|x| b.contains(x))
}

/// Whether `earlier` must stay before `later`.
fn must_precede(earlier: &GroundedAction, later: &GroundedAction) -> bool {
    let later_pos: BTreeSet<_> = later.positive_pre().cloned().collect();
    let earlier_pos: BTreeSet<_> = earlier.positive_pre().cloned().collect();
    let later_neg: BTreeSet<_> = later.negative_pre().cloned().collect();
    let earlier_neg: BTreeSet<_> = earlier.negative_pre().cloned().collect();
    // producer, threat and effect interference on positive preconditions
    intersects(&earlier.add, &later_pos)
        || intersects(&earlier.del, &later_pos)
        || intersects(&later.del, &earlier_pos)
        || intersects(&earlier.add, &later.del)
        || intersects(&earlier.del, &later.add)
        // the mirror image for negative preconditions
        || intersects(&earlier.del, &later_neg)
        || intersects(&earlier.add, &later_neg)
        || intersects(&later.add, &earlier_neg)
}

pub fn precedence_graph_of(actions: &[GroundedAction]) -> PrecedenceGraph {
    let mut edges = BTreeSet::new();
    for (j, later) in actions.iter().enumerate() {
        for (i, earlier) in actions[..j].iter().enumerate() {
            if must_precede(earlier, later) {
                edges.insert((i, j));
            }
        }
    }
    PrecedenceGraph {
        len: actions.len(),
        edges,
    }
}

fn grounded_valid(plan: &Plan, task: &Task) -> Result<Vec<GroundedAction>> {
    let report = ground::validate(plan, task);
    if let Some(f) = report.failure {
        return Err(Error::InvalidPlan(f.to_string()));
    }
    ground::ground(plan, task)
}

/// Builds the precedence graph of a valid plan.
pub fn precedence_graph(plan: &Plan, task: &Task) -> Result<PrecedenceGraph> {
    Ok(precedence_graph_of(&grounded_valid(plan, task)?))
}

/// A plan as a sequence of layers of mutually unordered actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialOrderPlan {
    /// Signatures per layer, layer 0 first.
    pub layers: Vec<BTreeSet<String>>,
    /// Layer index of each plan occurrence.
    pub layer_of: Vec<usize>,
}

impl PartialOrderPlan {
    /// The layers as a set of blocks; identical blocks collapse.
    pub fn blocks(&self) -> BTreeSet<BTreeSet<String>> {
        self.layers.iter().cloned().collect()
    }
}

pub fn layer(graph: &PrecedenceGraph, actions: &[GroundedAction]) -> PartialOrderPlan {
    let mut layer_of = vec![0usize; graph.len()];
    // edges are ordered (i, j) lexicographically; a node's predecessors are
    // all lower-indexed so a forward sweep sees them finalised
    for j in 0..graph.len() {
        layer_of[j] = graph
            .predecessors(j)
            .map(|i| layer_of[i] + 1)
            .max()
            .unwrap_or(0);
    }
    let depth = layer_of.iter().max().map_or(0, |m| m + 1);
    let mut layers = vec![BTreeSet::new(); depth];
    for (j, &l) in layer_of.iter().enumerate() {
        layers[l].insert(actions[j].signature.clone());
    }
    PartialOrderPlan { layers, layer_of }
}

pub fn pop_of(actions: &[GroundedAction]) -> PartialOrderPlan {
    layer(&precedence_graph_of(actions), actions)
}

/// Extracts the layered partial-order plan of a valid plan.
pub fn extract_pop(plan: &Plan, task: &Task) -> Result<PartialOrderPlan> {
    Ok(pop_of(&grounded_valid(plan, task)?))
}
