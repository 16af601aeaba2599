//! Similarity matrices over plan sets and greedy max-min diverse selection.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{MetricSpec, ProfileSet};
use crate::pddl::{Plan, Task};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub spec: MetricSpec,
    /// `values[i][j]` is δ(plan i, plan j).
    pub values: Vec<Vec<f64>>,
    pub timings: Vec<Vec<Duration>>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Dissimilarity of an unordered pair. For an asymmetric metric the
    /// cell with the lower index first is used.
    pub fn dissimilarity(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        1.0 - self.values[a][b]
    }

    /// Builds a matrix from precomputed profiles.
    pub fn from_profiles(profiles: &ProfileSet, labels: &[String], spec: &MetricSpec) -> Self {
        let ps = &profiles.profiles;
        let n = ps.len();
        let symmetric = spec.is_symmetric();
        let cells: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !symmetric || i <= j)
            .collect();
        let computed: Vec<(f64, Duration)> = cells
            .par_iter()
            .map(|&(i, j)| {
                let t = Instant::now();
                let v = spec.evaluate(&ps[i], &ps[j]);
                (
                    v,
                    t.elapsed() + spec.prep_time(&ps[i]) + spec.prep_time(&ps[j]),
                )
            })
            .collect();
        let mut values = vec![vec![0.0; n]; n];
        let mut timings = vec![vec![Duration::ZERO; n]; n];
        for (&(i, j), &(v, t)) in cells.iter().zip(&computed) {
            values[i][j] = v;
            timings[i][j] = t;
            if symmetric {
                values[j][i] = v;
                timings[j][i] = t;
            }
        }
        SimilarityMatrix {
            labels: labels.to_vec(),
            spec: spec.clone(),
            values,
            timings,
        }
    }
}

fn check_labels(plans: &[Plan], labels: &[String]) -> Result<()> {
    if plans.len() != labels.len() {
        return Err(Error::Config(format!(
            "{} plans but {} labels",
            plans.len(),
            labels.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// One matrix per spec, sharing the per-plan analysis.
pub fn pairwise_matrices(
    plans: &[Plan],
    labels: &[String],
    task: &Task,
    specs: &[MetricSpec],
) -> Result<Vec<SimilarityMatrix>> {
    check_labels(plans, labels)?;
    let mut metrics: Vec<_> = specs.iter().flat_map(MetricSpec::metrics).collect();
    metrics.sort();
    metrics.dedup();
    let profiles = ProfileSet::build(plans, labels, task, &metrics)?;
    Ok(specs
        .iter()
        .map(|s| SimilarityMatrix::from_profiles(&profiles, labels, s))
        .collect())
}

/// The full pairwise matrix of `plans` under `spec`.
pub fn pairwise_matrix(
    plans: &[Plan],
    labels: &[String],
    task: &Task,
    spec: &MetricSpec,
) -> Result<SimilarityMatrix> {
    Ok(
        pairwise_matrices(plans, labels, task, std::slice::from_ref(spec))?
            .pop()
            .expect("one spec in, one matrix out"),
    )
}

/// Runs `f` on a dedicated rayon pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiversityMode {
    #[default]
    Average,
    Minimum,
}

impl FromStr for DiversityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "average" | "avg" | "mean" => Ok(DiversityMode::Average),
            "minimum" | "min" => Ok(DiversityMode::Minimum),
            other => Err(Error::Config(format!("unknown diversity mode {other}"))),
        }
    }
}

impl fmt::Display for DiversityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiversityMode::Average => "average",
            DiversityMode::Minimum => "minimum",
        })
    }
}

/// Average or minimum dissimilarity over unordered pairs of `subset`.
pub fn subset_diversity(
    m: &SimilarityMatrix,
    subset: &[usize],
    mode: DiversityMode,
) -> Result<f64> {
    if subset.len() < 2 {
        return Err(Error::TooFewPlans {
            needed: 2,
            found: subset.len(),
        });
    }
    let mut ds = Vec::new();
    for (x, &i) in subset.iter().enumerate() {
        for &j in &subset[x + 1..] {
            ds.push(m.dissimilarity(i, j));
        }
    }
    Ok(match mode {
        DiversityMode::Average => ds.iter().sum::<f64>() / ds.len() as f64,
        DiversityMode::Minimum => ds.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub fn matrix_diversity(m: &SimilarityMatrix, mode: DiversityMode) -> Result<f64> {
    let all: Vec<usize> = (0..m.len()).collect();
    subset_diversity(m, &all, mode)
}

pub fn diversity_score(
    plans: &[Plan],
    labels: &[String],
    task: &Task,
    spec: &MetricSpec,
    mode: DiversityMode,
) -> Result<f64> {
    if plans.len() < 2 {
        return Err(Error::TooFewPlans {
            needed: 2,
            found: plans.len(),
        });
    }
    matrix_diversity(&pairwise_matrix(plans, labels, task, spec)?, mode)
}

/// Greedy max-min selection of `k` plan indices, in pick order.
///
/// The seed is the pair with the largest dissimilarity; each further pick
/// maximises its minimum dissimilarity to the plans already chosen. Ties go
/// to the lexicographically smallest label (pair). With `k = 1` the plan
/// with the smallest label is returned.
pub fn select_from_matrix(m: &SimilarityMatrix, k: usize) -> Result<Vec<usize>> {
    let n = m.len();
    if k == 0 || k > n {
        return Err(Error::SelectionSize { k, n });
    }
    let label = |i: usize| m.labels[i].as_str();
    if k == 1 {
        let first = (0..n).min_by(|&a, &b| label(a).cmp(label(b))).unwrap();
        return Ok(vec![first]);
    }

    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = if label(i) <= label(j) { (i, j) } else { (j, i) };
            let d = m.dissimilarity(i, j);
            let better = match best {
                None => true,
                Some((bd, ba, bb)) => {
                    d > bd || (d == bd && (label(a), label(b)) < (label(ba), label(bb)))
                }
            };
            if better {
                best = Some((d, a, b));
            }
        }
    }
    let (_, a, b) = best.expect("n >= 2");
    let mut chosen = vec![a, b];
    let mut in_set = vec![false; n];
    in_set[a] = true;
    in_set[b] = true;

    while chosen.len() < k {
        let mut pick: Option<(f64, usize)> = None;
        for c in (0..n).filter(|&c| !in_set[c]) {
            let score = chosen
                .iter()
                .map(|&s| m.dissimilarity(c, s))
                .fold(f64::INFINITY, f64::min);
            let better = match pick {
                None => true,
                Some((ps, pc)) => score > ps || (score == ps && label(c) < label(pc)),
            };
            if better {
                pick = Some((score, c));
            }
        }
        let (_, c) = pick.expect("k <= n");
        in_set[c] = true;
        chosen.push(c);
    }
    Ok(chosen)
}

/// Greedy max-min selection returning plan labels.
pub fn select_diverse(
    plans: &[Plan],
    labels: &[String],
    task: &Task,
    spec: &MetricSpec,
    k: usize,
) -> Result<Vec<String>> {
    if k == 0 || k > plans.len() {
        return Err(Error::SelectionSize { k, n: plans.len() });
    }
    let m = pairwise_matrix(plans, labels, task, spec)?;
    Ok(select_from_matrix(&m, k)?
        .into_iter()
        .map(|i| labels[i].clone())
        .collect())
}
