//! Command-line front-end: `score`, `select` and `trace`.
//!
//! Reports are JSON (default) or CSV. Matrix values are printed with six
//! decimals so output is byte-stable for identical inputs; timings are not.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::ground::{self, PlanFailure};
use crate::metrics::{self, MetricId, MetricSpec};
use crate::pddl::{self, Plan, Task};
use crate::selection::{self, DiversityMode, SimilarityMatrix};
use crate::subgoal::{self, SubgoalAlphabet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "plandiv",
    version,
    about = "Compare and select diverse plans for a PDDL task"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate plans and print pairwise similarity matrices.
    Score(RunArgs),
    /// Greedily select the k most diverse plans.
    Select(RunArgs),
    /// Print each plan's subgoal trace.
    Trace(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// PDDL domain file.
    #[arg(long)]
    pub domain: PathBuf,
    /// PDDL problem file.
    #[arg(long)]
    pub problem: PathBuf,
    /// Plan files or directories of plan files.
    #[arg(long, num_args = 1.., required = true)]
    pub plans: Vec<PathBuf>,
    /// Comma-separated metric ids: a, s, c, u, flex, sgo.
    #[arg(long, value_delimiter = ',', default_value = "a,s,c,u,flex,sgo")]
    pub metrics: Vec<String>,
    /// Aggregate weights, e.g. `sgo=0.5,a=0.5`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Number of plans to select.
    #[arg(long)]
    pub select_k: Option<usize>,
    /// `average` or `minimum` pairwise dissimilarity.
    #[arg(long, default_value = "average")]
    pub diversity_mode: String,
    /// Include per-pair computation times (milliseconds).
    #[arg(long)]
    pub timing: bool,
    /// Output file, or `-`/`stdout`.
    #[arg(long, default_value = "-")]
    pub output: String,
}

/// Resolved, validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: PathBuf,
    pub problem: PathBuf,
    /// Plan files, sorted lexicographically.
    pub plans: Vec<PathBuf>,
    pub metrics: Vec<MetricId>,
    pub weights: Option<Vec<(MetricId, f64)>>,
    pub format: Format,
    pub select_k: Option<usize>,
    pub diversity_mode: DiversityMode,
    pub timing: bool,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
}

fn expand_plan_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        let meta = fs::metadata(p).map_err(|source| Error::Io {
            path: p.clone(),
            source,
        })?;
        if meta.is_dir() {
            let entries = fs::read_dir(p).map_err(|source| Error::Io {
                path: p.clone(),
                source,
            })?;
            for e in entries {
                let e = e.map_err(|source| Error::Io {
                    path: p.clone(),
                    source,
                })?;
                let path = e.path();
                let hidden = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with('.'));
                if path.is_file() && !hidden {
                    out.push(path);
                }
            }
        } else {
            out.push(p.clone());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let mut metrics = Vec::new();
        for m in &args.metrics {
            if m.trim().is_empty() {
                continue;
            }
            let id: MetricId = m.parse()?;
            if !metrics.contains(&id) {
                metrics.push(id);
            }
        }
        if metrics.is_empty() {
            return Err(Error::Config("at least one metric is required".into()));
        }
        let weights = match &args.weights {
            Some(w) => {
                let ws = metrics::parse_weights(w)?;
                if let Some((m, _)) = ws.iter().find(|(m, _)| !metrics.contains(m)) {
                    return Err(Error::Config(format!(
                        "weight given for metric {m} which was not requested"
                    )));
                }
                MetricSpec::weighted(ws.clone())?;
                Some(ws)
            }
            None => None,
        };
        let output = match args.output.as_str() {
            "-" | "stdout" => None,
            p => Some(PathBuf::from(p)),
        };
        Ok(RunConfig {
            domain: args.domain.clone(),
            problem: args.problem.clone(),
            plans: expand_plan_paths(&args.plans)?,
            metrics,
            weights,
            format: args.format,
            select_k: args.select_k,
            diversity_mode: args.diversity_mode.parse()?,
            timing: args.timing,
            output,
        })
    }

    /// The spec used for selection: the weighted aggregate when weights are
    /// given, the single metric when only one is requested, otherwise an
    /// equal-weight aggregate of all requested metrics.
    pub fn selection_spec(&self) -> MetricSpec {
        match (&self.weights, self.metrics.as_slice()) {
            (Some(ws), _) => MetricSpec::Weighted(ws.clone()),
            (None, [m]) => MetricSpec::Single(*m),
            (None, ms) => MetricSpec::Weighted(ms.iter().map(|&m| (m, 1.0)).collect()),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: Box::new(Error::Config(format!("invalid UTF-8: {e}"))),
    })
}

fn in_file(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    }
}

pub fn plan_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// A task plus its validated plans, ready for scoring.
pub struct Loaded {
    pub task: Task,
    pub plans: Vec<Plan>,
    pub labels: Vec<String>,
}

/// Parses the task and every plan, and validates each plan.
pub fn load(cfg: &RunConfig) -> Result<Loaded> {
    let domain = pddl::parse_domain(&read(&cfg.domain)?)
        .map_err(Error::from)
        .map_err(in_file(&cfg.domain))?;
    let problem = pddl::parse_problem(&read(&cfg.problem)?, &domain)
        .map_err(Error::from)
        .map_err(in_file(&cfg.problem))?;
    let task = Task::new(domain, problem);

    let mut plans = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for path in &cfg.plans {
        let mut plan = pddl::parse_plan_for_task(&read(path)?, &task)
            .map_err(Error::from)
            .map_err(in_file(path))?;
        plan.source = Some(path.clone());
        let report = ground::validate(&plan, &task);
        if let Some(f) = report.failure {
            let msg = match &f {
                PlanFailure::Ground { step, error } => {
                    format!("step {} {}: {error}", step + 1, plan.steps[*step])
                }
                PlanFailure::Inapplicable { step, error } => {
                    format!("step {} {}: {error}", step + 1, plan.steps[*step])
                }
                PlanFailure::GoalsUnmet { .. } => f.to_string(),
            };
            return Err(in_file(path)(Error::InvalidPlan(msg)));
        }
        let label = plan_label(path);
        if labels.contains(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        labels.push(label);
        plans.push(plan);
    }
    Ok(Loaded {
        task,
        plans,
        labels,
    })
}

/// A number printed with exactly six decimals.
fn fixed(v: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.6}")).expect("formatted float is valid JSON")
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Serialises as a JSON object while keeping insertion order.
struct Ordered<T>(Vec<(String, T)>);

impl<T: Serialize> Serialize for Ordered<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct MatrixJson {
    matrix: Vec<Vec<Box<RawValue>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<Vec<Vec<Box<RawValue>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Ordered<Box<RawValue>>>,
}

#[derive(Serialize)]
struct SelectionJson {
    k: usize,
    metric: String,
    mode: String,
    labels: Vec<String>,
    diversity: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct ScoreReport {
    schema: u32,
    plans: Vec<String>,
    metrics: Ordered<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<SelectionJson>,
}

fn matrix_json(m: &SimilarityMatrix, timing: bool) -> MatrixJson {
    let grid = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<Box<RawValue>>> {
        (0..m.len())
            .map(|i| (0..m.len()).map(|j| fixed(f(i, j))).collect())
            .collect()
    };
    MatrixJson {
        matrix: grid(&|i, j| m.values[i][j]),
        timings_ms: timing.then(|| grid(&|i, j| ms(m.timings[i][j]))),
        weights: match &m.spec {
            MetricSpec::Weighted(ws) => Some(Ordered(
                ws.iter()
                    .map(|(id, w)| (id.key().to_string(), fixed(*w)))
                    .collect(),
            )),
            MetricSpec::Single(_) => None,
        },
    }
}

struct Selection {
    k: usize,
    spec: MetricSpec,
    labels: Vec<String>,
    diversity: Option<f64>,
}

fn output(cfg: &RunConfig, body: &[u8], out: &mut dyn Write) -> Result<()> {
    match &cfg.output {
        Some(path) => fs::write(path, body).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => out.write_all(body).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn csv_matrix(
    w: &mut csv::Writer<Vec<u8>>,
    title: &str,
    m: &SimilarityMatrix,
    f: &dyn Fn(usize, usize) -> f64,
) -> Result<()> {
    let mut header = vec![title.to_string()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..m.len() {
        let mut row = vec![m.labels[i].clone()];
        row.extend((0..m.len()).map(|j| format!("{:.6}", f(i, j))));
        w.write_record(&row).map_err(csv_err)?;
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))
}

fn render_score(
    cfg: &RunConfig,
    labels: &[String],
    matrices: &[SimilarityMatrix],
    selection: Option<&Selection>,
) -> Result<Vec<u8>> {
    match cfg.format {
        Format::Json => {
            let report = ScoreReport {
                schema: SCHEMA_VERSION,
                plans: labels.to_vec(),
                metrics: Ordered(
                    matrices
                        .iter()
                        .map(|m| (m.spec.label(), matrix_json(m, cfg.timing)))
                        .collect(),
                ),
                selection: selection.map(|s| SelectionJson {
                    k: s.k,
                    metric: s.spec.label(),
                    mode: cfg.diversity_mode.to_string(),
                    labels: s.labels.clone(),
                    diversity: s.diversity.map(fixed),
                }),
            };
            let mut body = serde_json::to_vec_pretty(&report)
                .map_err(|e| Error::Config(format!("json: {e}")))?;
            body.push(b'\n');
            Ok(body)
        }
        Format::Csv => {
            let mut body = Vec::new();
            for m in matrices {
                let mut w = csv::WriterBuilder::new()
                    .flexible(true)
                    .from_writer(Vec::new());
                csv_matrix(&mut w, &m.spec.label(), m, &|i, j| m.values[i][j])?;
                if cfg.timing {
                    csv_matrix(
                        &mut w,
                        &format!("{}:timings_ms", m.spec.label()),
                        m,
                        &|i, j| ms(m.timings[i][j]),
                    )?;
                }
                body.extend(csv_finish(w)?);
                body.push(b'\n');
            }
            if let Some(s) = selection {
                let mut w = csv::WriterBuilder::new()
                    .flexible(true)
                    .from_writer(Vec::new());
                let mut row = vec!["selected".to_string()];
                row.extend(s.labels.iter().cloned());
                w.write_record(&row).map_err(csv_err)?;
                w.write_record(["metric", &s.spec.label()])
                    .map_err(csv_err)?;
                w.write_record(["mode", &cfg.diversity_mode.to_string()])
                    .map_err(csv_err)?;
                let d = s.diversity.map(|d| format!("{d:.6}")).unwrap_or_default();
                w.write_record(["diversity", &d]).map_err(csv_err)?;
                body.extend(csv_finish(w)?);
            }
            Ok(body)
        }
    }
}

fn specs_for_score(cfg: &RunConfig) -> Vec<MetricSpec> {
    let mut specs: Vec<MetricSpec> = cfg.metrics.iter().map(|&m| MetricSpec::Single(m)).collect();
    if let Some(ws) = &cfg.weights {
        specs.push(MetricSpec::Weighted(ws.clone()));
    }
    specs
}

fn select_with(cfg: &RunConfig, matrix: &SimilarityMatrix, k: usize) -> Result<Selection> {
    let picked = selection::select_from_matrix(matrix, k)?;
    let diversity = if picked.len() >= 2 {
        Some(selection::subset_diversity(
            matrix,
            &picked,
            cfg.diversity_mode,
        )?)
    } else {
        None
    };
    Ok(Selection {
        k,
        spec: matrix.spec.clone(),
        labels: picked.iter().map(|&i| matrix.labels[i].clone()).collect(),
        diversity,
    })
}

/// Validates all plans and writes one matrix per requested metric (plus the
/// weighted aggregate when weights are given).
pub fn cmd_score(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let loaded = load(cfg)?;
    let specs = specs_for_score(cfg);
    let matrices =
        selection::pairwise_matrices(&loaded.plans, &loaded.labels, &loaded.task, &specs)?;
    let sel = match cfg.select_k {
        Some(k) => {
            let spec = cfg.selection_spec();
            let m = match matrices.iter().find(|m| m.spec == spec) {
                Some(m) => m.clone(),
                None => {
                    selection::pairwise_matrix(&loaded.plans, &loaded.labels, &loaded.task, &spec)?
                }
            };
            Some(select_with(cfg, &m, k)?)
        }
        None => None,
    };
    output(
        cfg,
        &render_score(cfg, &loaded.labels, &matrices, sel.as_ref())?,
        out,
    )
}

/// Selects `select_k` plans and writes the labels, their diversity and the
/// matrix used.
pub fn cmd_select(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let k = cfg
        .select_k
        .ok_or_else(|| Error::Config("select requires --select-k".into()))?;
    if k == 0 || k > cfg.plans.len() {
        return Err(Error::SelectionSize {
            k,
            n: cfg.plans.len(),
        });
    }
    let loaded = load(cfg)?;
    let spec = cfg.selection_spec();
    let m = selection::pairwise_matrix(&loaded.plans, &loaded.labels, &loaded.task, &spec)?;
    let sel = select_with(cfg, &m, k)?;
    output(
        cfg,
        &render_score(cfg, &loaded.labels, std::slice::from_ref(&m), Some(&sel))?,
        out,
    )
}

#[derive(Serialize)]
struct AlphabetEntry {
    symbol: String,
    atom: String,
}

#[derive(Serialize)]
struct TraceEntry {
    plan: String,
    trace: String,
    tokens: Vec<String>,
}

#[derive(Serialize)]
struct TraceReport {
    schema: u32,
    alphabet: Vec<AlphabetEntry>,
    traces: Vec<TraceEntry>,
}

/// Writes the subgoal alphabet and each plan's rendered trace.
pub fn cmd_trace(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let loaded = load(cfg)?;
    let alphabet = SubgoalAlphabet::new(&loaded.task);
    let mut traces = Vec::new();
    for (plan, label) in loaded.plans.iter().zip(&loaded.labels) {
        let t = subgoal::subgoal_trace(plan, &loaded.task).map_err(|e| e.in_plan(label))?;
        traces.push(TraceEntry {
            plan: label.clone(),
            trace: t.to_string(),
            tokens: t.tokens.iter().map(|x| x.to_string()).collect(),
        });
    }
    let alphabet: Vec<AlphabetEntry> = alphabet
        .entries()
        .map(|(symbol, atom)| AlphabetEntry {
            symbol,
            atom: atom.to_string(),
        })
        .collect();
    let body = match cfg.format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&TraceReport {
                schema: SCHEMA_VERSION,
                alphabet,
                traces,
            })
            .map_err(|e| Error::Config(format!("json: {e}")))?;
            b.push(b'\n');
            b
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(Vec::new());
            w.write_record(["symbol", "atom"]).map_err(csv_err)?;
            for a in &alphabet {
                w.write_record([&a.symbol, &a.atom]).map_err(csv_err)?;
            }
            let mut b = csv_finish(w)?;
            b.push(b'\n');
            let mut w = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(Vec::new());
            w.write_record(["plan", "trace"]).map_err(csv_err)?;
            for t in &traces {
                w.write_record([&t.plan, &t.trace]).map_err(csv_err)?;
            }
            b.extend(csv_finish(w)?);
            b
        }
    };
    output(cfg, &body, out)
}

/// Runs a parsed command line, writing reports to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Score(a) => cmd_score(&RunConfig::from_args(a)?, out),
        Command::Select(a) => cmd_select(&RunConfig::from_args(a)?, out),
        Command::Trace(a) => cmd_trace(&RunConfig::from_args(a)?, out),
    }
}
