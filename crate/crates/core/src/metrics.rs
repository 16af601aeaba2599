//! Pairwise plan similarity metrics. Every metric maps a plan pair to
//! `[0, 1]`, with 1 meaning identical.
//!
//! | id     | compares                                              |
//! |--------|-------------------------------------------------------|
//! | `a`    | sets of grounded-action signatures (Jaccard)          |
//! | `s`    | sets of states reached after each step (Jaccard)      |
//! | `c`    | sets of causal links (Jaccard)                        |
//! | `u`    | 1 if the first plan's actions are a subset, else 0    |
//! | `flex` | sets of partial-order blocks (Jaccard)                |
//! | `sgo`  | 1 − normalised Hamming distance of subgoal traces     |

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{self, CausalLink, State};
use crate::pddl::{Plan, Task};
use crate::pop;
use crate::subgoal::{self, SubgoalTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MetricId {
    Actions,
    States,
    Causal,
    Uniqueness,
    Flex,
    Sgo,
}

impl MetricId {
    pub const ALL: [MetricId; 6] = [
        MetricId::Actions,
        MetricId::States,
        MetricId::Causal,
        MetricId::Uniqueness,
        MetricId::Flex,
        MetricId::Sgo,
    ];

    /// Short identifier used on the command line and in reports.
    pub fn key(self) -> &'static str {
        match self {
            MetricId::Actions => "a",
            MetricId::States => "s",
            MetricId::Causal => "c",
            MetricId::Uniqueness => "u",
            MetricId::Flex => "flex",
            MetricId::Sgo => "sgo",
        }
    }

    pub fn is_symmetric(self) -> bool {
        self != MetricId::Uniqueness
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "a" | "actions" | "stability" => MetricId::Actions,
            "s" | "states" => MetricId::States,
            "c" | "causal" => MetricId::Causal,
            "u" | "uniqueness" => MetricId::Uniqueness,
            "flex" | "flexibility" => MetricId::Flex,
            "sgo" | "subgoals" => MetricId::Sgo,
            _ => return Err(Error::UnknownMetric(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValue {
    pub value: f64,
    pub compute_time: Duration,
}

/// `|A ∩ B|` and `|A ∪ B|` of two finite sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    pub shared: usize,
    pub total: usize,
}

impl Overlap {
    /// The Jaccard index; two empty sets count as identical.
    pub fn value(self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.shared as f64 / self.total as f64
        }
    }

    /// The Jaccard index as a reduced fraction.
    pub fn fraction(self) -> (usize, usize) {
        if self.total == 0 {
            return (1, 1);
        }
        let g = gcd(self.shared, self.total);
        (self.shared / g, self.total / g)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn overlap<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Overlap {
    let shared = a.intersection(b).count();
    Overlap {
        shared,
        total: a.len() + b.len() - shared,
    }
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    overlap(a, b).value()
}

/// Three-case uniqueness: 1 when `a ∖ b = ∅` (which covers `a ⊂ b`), else 0.
/// Not symmetric.
pub fn uniqueness<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_subset(b) {
        1.0
    } else {
        0.0
    }
}

/// `1 − hamming / max(len)`; 1 for two empty traces.
pub fn sgo_similarity(a: &SubgoalTrace, b: &SubgoalTrace) -> f64 {
    let n = a.len().max(b.len());
    if n == 0 {
        1.0
    } else {
        1.0 - subgoal::hamming(a, b) as f64 / n as f64
    }
}

/// Everything the metrics need from one plan, with sets interned into
/// sorted id vectors shared across a [`ProfileSet`].
#[derive(Debug, Clone, Default)]
pub struct PlanProfile {
    actions: Vec<u32>,
    states: Vec<u32>,
    links: Vec<u32>,
    blocks: Vec<u32>,
    trace: SubgoalTrace,
    /// Per-metric preparation cost, indexed like [`MetricId::ALL`].
    prep: [Duration; 6],
}

impl PlanProfile {
    pub fn trace(&self) -> &SubgoalTrace {
        &self.trace
    }

    pub fn prep_time(&self, m: MetricId) -> Duration {
        self.prep[m as usize]
    }
}

fn sorted_overlap(a: &[u32], b: &[u32]) -> Overlap {
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Overlap {
        shared,
        total: a.len() + b.len() - shared,
    }
}

fn sorted_subset(a: &[u32], b: &[u32]) -> bool {
    sorted_overlap(a, b).shared == a.len()
}

/// Compares two profiles under one metric.
pub fn compare(m: MetricId, a: &PlanProfile, b: &PlanProfile) -> f64 {
    match m {
        MetricId::Actions => sorted_overlap(&a.actions, &b.actions).value(),
        MetricId::States => sorted_overlap(&a.states, &b.states).value(),
        MetricId::Causal => sorted_overlap(&a.links, &b.links).value(),
        MetricId::Uniqueness => {
            if sorted_subset(&a.actions, &b.actions) {
                1.0
            } else {
                0.0
            }
        }
        MetricId::Flex => sorted_overlap(&a.blocks, &b.blocks).value(),
        MetricId::Sgo => sgo_similarity(&a.trace, &b.trace),
    }
}

/// Raw per-plan analysis before interning.
struct RawProfile {
    actions: BTreeSet<String>,
    states: BTreeSet<State>,
    links: BTreeSet<CausalLink>,
    blocks: BTreeSet<BTreeSet<String>>,
    trace: SubgoalTrace,
    prep: [Duration; 6],
}

fn analyse(plan: &Plan, task: &Task, metrics: &[MetricId]) -> Result<RawProfile> {
    let wants = |m| metrics.contains(&m);
    let t0 = Instant::now();
    let actions = ground::ground(plan, task)?;
    let traj = ground::simulate_actions(ground::initial_state(task), &actions)?;
    let missing = ground::missing_goals(task, traj.final_state());
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(|a| a.to_string()).collect();
        return Err(Error::InvalidPlan(format!(
            "goal atoms not achieved: {}",
            list.join(" ")
        )));
    }
    let base = t0.elapsed();

    let mut raw = RawProfile {
        actions: BTreeSet::new(),
        states: BTreeSet::new(),
        links: BTreeSet::new(),
        blocks: BTreeSet::new(),
        trace: SubgoalTrace::default(),
        prep: [base; 6],
    };
    if wants(MetricId::Actions) || wants(MetricId::Uniqueness) {
        let t = Instant::now();
        raw.actions = actions.iter().map(|a| a.signature.clone()).collect();
        let d = t.elapsed();
        raw.prep[MetricId::Actions as usize] += d;
        raw.prep[MetricId::Uniqueness as usize] += d;
    }
    if wants(MetricId::States) {
        let t = Instant::now();
        raw.states = traj.post_states.iter().cloned().collect();
        raw.prep[MetricId::States as usize] += t.elapsed();
    }
    if wants(MetricId::Causal) {
        let t = Instant::now();
        raw.links = ground::links_from_actions(task, &actions)?;
        raw.prep[MetricId::Causal as usize] += t.elapsed();
    }
    if wants(MetricId::Flex) {
        let t = Instant::now();
        raw.blocks = pop::pop_of(&actions).blocks();
        raw.prep[MetricId::Flex as usize] += t.elapsed();
    }
    if wants(MetricId::Sgo) {
        let t = Instant::now();
        raw.trace = subgoal::trace_of(task, &traj);
        raw.prep[MetricId::Sgo as usize] += t.elapsed();
    }
    Ok(raw)
}

struct Interner<T> {
    ids: HashMap<T, u32>,
}

impl<T> Default for Interner<T> {
    fn default() -> Self {
        Interner {
            ids: HashMap::new(),
        }
    }
}

impl<T: Hash + Eq> Interner<T> {
    fn intern_all(&mut self, items: BTreeSet<T>) -> Vec<u32> {
        let mut v: Vec<u32> = items
            .into_iter()
            .map(|x| {
                let next = self.ids.len() as u32;
                *self.ids.entry(x).or_insert(next)
            })
            .collect();
        v.sort_unstable();
        v
    }
}

/// Profiles for a list of plans, sharing one id space.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    pub profiles: Vec<PlanProfile>,
}

impl ProfileSet {
    /// Validates and analyses every plan. The first invalid plan (by
    /// position) aborts with an error naming `labels[i]`.
    pub fn build(
        plans: &[Plan],
        labels: &[String],
        task: &Task,
        metrics: &[MetricId],
    ) -> Result<Self> {
        let raws: Vec<Result<RawProfile>> = plans
            .par_iter()
            .map(|p| analyse(p, task, metrics))
            .collect();
        let mut actions = Interner::default();
        let mut states = Interner::default();
        let mut links = Interner::default();
        let mut blocks = Interner::default();
        let mut profiles = Vec::with_capacity(plans.len());
        for (i, raw) in raws.into_iter().enumerate() {
            let raw = raw.map_err(|e| match labels.get(i) {
                Some(l) => e.in_plan(l),
                None => e,
            })?;
            profiles.push(PlanProfile {
                actions: actions.intern_all(raw.actions),
                states: states.intern_all(raw.states),
                links: links.intern_all(raw.links),
                blocks: blocks.intern_all(raw.blocks),
                trace: raw.trace,
                prep: raw.prep,
            });
        }
        Ok(ProfileSet { profiles })
    }
}

fn pair_profiles(a: &Plan, b: &Plan, task: &Task, m: MetricId) -> Result<ProfileSet> {
    ProfileSet::build(
        &[a.clone(), b.clone()],
        &["first".to_string(), "second".to_string()],
        task,
        &[m],
    )
}

/// Evaluates metric `m` on one plan pair. Both plans must be valid.
pub fn delta(m: MetricId, a: &Plan, b: &Plan, task: &Task) -> Result<MetricValue> {
    let start = Instant::now();
    let set = pair_profiles(a, b, task, m)?;
    let value = compare(m, &set.profiles[0], &set.profiles[1]);
    Ok(MetricValue {
        value,
        compute_time: start.elapsed(),
    })
}

pub fn delta_actions(a: &Plan, b: &Plan, task: &Task) -> Result<MetricValue> {
    delta(MetricId::Actions, a, b, task)
}

pub fn delta_states(a: &Plan, b: &Plan, task: &Task) -> Result<MetricValue> {
    delta(MetricId::States, a, b, task)
}

pub fn delta_causal(a: &Plan, b: &Plan, task: &Task) -> Result<MetricValue> {
    delta(MetricId::Causal, a, b, task)
}

pub fn delta_flex(a: &Plan, b: &Plan, task: &Task) -> Result<MetricValue> {
    delta(MetricId::Flex, a, b, task)
}

pub fn delta_sgo(a: &Plan, b: &Plan, task: &Task) -> Result<MetricValue> {
    delta(MetricId::Sgo, a, b, task)
}

/// Uniqueness over the plans' action signature sets. Needs no task: the
/// signatures come straight from the plan steps.
pub fn delta_uniqueness(a: &Plan, b: &Plan) -> MetricValue {
    let start = Instant::now();
    let sigs = |p: &Plan| -> BTreeSet<String> {
        p.steps
            .iter()
            .map(|s| ground::signature(&s.name, &s.args))
            .collect()
    };
    MetricValue {
        value: uniqueness(&sigs(a), &sigs(b)),
        compute_time: start.elapsed(),
    }
}

/// `D = 1 − δ`.
pub fn dissimilarity(m: MetricId, a: &Plan, b: &Plan, task: &Task) -> Result<f64> {
    Ok(1.0 - delta(m, a, b, task)?.value)
}

/// Weighted arithmetic mean of `(value, weight)` pairs.
pub fn aggregate(values: &[(f64, f64)]) -> Result<f64> {
    if values.iter().any(|&(_, w)| !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidWeights);
    }
    let total: f64 = values.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeights);
    }
    let sum: f64 = values.iter().map(|&(v, w)| v * w).sum();
    Ok((sum / total).clamp(0.0, 1.0))
}

/// A single metric or a weighted combination of several.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MetricSpec {
    Single(MetricId),
    Weighted(Vec<(MetricId, f64)>),
}

impl MetricSpec {
    pub fn weighted(weights: Vec<(MetricId, f64)>) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = weights.iter().map(|&(_, w)| (0.0, w)).collect();
        aggregate(&pairs)?;
        Ok(MetricSpec::Weighted(weights))
    }

    pub fn metrics(&self) -> Vec<MetricId> {
        match self {
            MetricSpec::Single(m) => vec![*m],
            MetricSpec::Weighted(ws) => {
                let mut ms: Vec<MetricId> = ws.iter().map(|&(m, _)| m).collect();
                ms.sort();
                ms.dedup();
                ms
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.metrics().iter().all(|m| m.is_symmetric())
    }

    pub fn label(&self) -> String {
        match self {
            MetricSpec::Single(m) => m.key().to_string(),
            MetricSpec::Weighted(_) => "aggregate".to_string(),
        }
    }

    pub fn evaluate(&self, a: &PlanProfile, b: &PlanProfile) -> f64 {
        match self {
            MetricSpec::Single(m) => compare(*m, a, b),
            MetricSpec::Weighted(ws) => {
                let vals: Vec<(f64, f64)> =
                    ws.iter().map(|&(m, w)| (compare(m, a, b), w)).collect();
                aggregate(&vals).expect("weights validated at construction")
            }
        }
    }

    /// Preparation cost attributable to this spec for one plan.
    pub fn prep_time(&self, p: &PlanProfile) -> Duration {
        self.metrics().iter().map(|&m| p.prep_time(m)).sum()
    }
}

/// Parses `metric=weight` pairs separated by commas, e.g. `sgo=0.5,a=0.5`.
pub fn parse_weights(s: &str) -> Result<Vec<(MetricId, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|part| {
            let (id, w) = part.split_once('=').ok_or_else(|| {
                Error::Config(format!("weight {part:?} is not of the form metric=value"))
            })?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("weight {w:?} is not a number")))?;
            Ok((id.parse()?, w))
        })
        .collect()
}

/// `sgo` parses to a single metric; `sgo=0.5,a=0.5` to a weighted one.
impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains('=') {
            MetricSpec::weighted(parse_weights(s)?)
        } else {
            Ok(MetricSpec::Single(s.parse()?))
        }
    }
}
