//! C ABI for plandiv.
//!
//! Tasks and plans are opaque heap handles created by `pd_task_*` /
//! `pd_plan_*` and released with the matching `*_free` function. Every
//! fallible call returns a [`PdStatus`]; on failure a human-readable message
//! is available from [`pd_last_error_message`] on the same thread.
//!
//! Strings passed in must be NUL-terminated UTF-8. Strings handed out by the
//! library must be released with [`pd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plandiv::ground;
use plandiv::metrics::MetricSpec;
use plandiv::pddl::{self, Plan, Task};
use plandiv::selection;
use plandiv::subgoal;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidPlan = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// A parsed domain + problem.
pub struct PdTask {
    task: Task,
}

/// A parsed plan, bound to the task it was parsed against.
pub struct PdPlan {
    plan: Plan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(PdStatus, String);

impl From<plandiv::Error> for Failure {
    fn from(e: plandiv::Error) -> Self {
        let status = match &e {
            plandiv::Error::Parse(_) => PdStatus::ParseError,
            plandiv::Error::Ground { .. }
            | plandiv::Error::Apply { .. }
            | plandiv::Error::InvalidPlan(_)
            | plandiv::Error::Plan { .. } => PdStatus::InvalidPlan,
            _ => PdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<plandiv::ParseError> for Failure {
    fn from(e: plandiv::ParseError) -> Self {
        Failure(PdStatus::ParseError, e.to_string())
    }
}

/// Runs `f`, recording any error or panic for `pd_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PdStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(PdStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn plan_list<'a>(plans: *const *const PdPlan, n: usize) -> Result<Vec<&'a Plan>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if plans.is_null() {
        return Err(null("plans"));
    }
    std::slice::from_raw_parts(plans, n)
        .iter()
        .enumerate()
        .map(|(i, &p)| ref_arg(p, &format!("plans[{i}]")).map(|p| &p.plan))
        .collect()
}

fn spec_arg(s: &str) -> Result<MetricSpec, Failure> {
    s.parse::<MetricSpec>().map_err(Failure::from)
}

fn labels(n: usize) -> Vec<String> {
    // zero-padded so lexicographic tie-breaking follows input order
    (0..n).map(|i| format!("{i:020}")).collect()
}

/// Parses a domain and problem. On success `*out` owns a new task.
///
/// # Safety
/// `domain` and `problem` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pd_task_from_strings(
    domain: *const c_char,
    problem: *const c_char,
    out: *mut *mut PdTask,
) -> PdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let task = Task::parse(str_arg(domain, "domain")?, str_arg(problem, "problem")?)?;
        *out = Box::into_raw(Box::new(PdTask { task }));
        Ok(())
    })
}

/// Releases a task. Null is ignored.
///
/// # Safety
/// `task` must come from `pd_task_from_strings` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_task_free(task: *mut PdTask) {
    if !task.is_null() {
        drop(Box::from_raw(task));
    }
}

/// Number of goal atoms of the task, or 0 for null.
///
/// # Safety
/// `task` must be null or a live task handle.
#[no_mangle]
pub unsafe extern "C" fn pd_task_goal_count(task: *const PdTask) -> usize {
    task.as_ref().map_or(0, |t| t.task.problem.goal.len())
}

/// Parses IPC plan text against `task` (action names, arity, objects and
/// types are checked, applicability is not).
///
/// # Safety
/// `task` must be a live task, `text` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pd_plan_parse(
    task: *const PdTask,
    text: *const c_char,
    out: *mut *mut PdPlan,
) -> PdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let task = ref_arg(task, "task")?;
        let plan = pddl::parse_plan_for_task(str_arg(text, "text")?, &task.task)?;
        *out = Box::into_raw(Box::new(PdPlan { plan }));
        Ok(())
    })
}

/// Releases a plan. Null is ignored.
///
/// # Safety
/// `plan` must come from `pd_plan_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_plan_free(plan: *mut PdPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Number of steps, or 0 for null.
///
/// # Safety
/// `plan` must be null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn pd_plan_len(plan: *const PdPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.len())
}

/// Simulates the plan. `*valid` is set to whether it applies and reaches the
/// goal; `*failing_step` to the 0-based failing step or -1 (also -1 when only
/// goals are missing). Validation failures are not errors: the call returns
/// `PD_STATUS_OK` and the reason is left in `pd_last_error_message`.
///
/// # Safety
/// Handles must be live; `valid` and `failing_step` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_plan_validate(
    task: *const PdTask,
    plan: *const PdPlan,
    valid: *mut bool,
    failing_step: *mut i64,
) -> PdStatus {
    let mut reason = None;
    let status = guard(|| {
        let (task, plan) = (ref_arg(task, "task")?, ref_arg(plan, "plan")?);
        let (valid, failing_step) = (
            out_arg(valid, "valid")?,
            out_arg(failing_step, "failing_step")?,
        );
        let report = ground::validate(&plan.plan, &task.task);
        *valid = report.valid;
        *failing_step = report.failing_step().map_or(-1, |s| s as i64);
        reason = report.failure.map(|f| f.to_string());
        Ok(())
    });
    if let Some(r) = reason {
        set_error(r);
    }
    status
}

/// Similarity in [0, 1] of two valid plans. `metric` is a metric id
/// (`a`, `s`, `c`, `u`, `flex`, `sgo`) or weights such as `sgo=0.5,a=0.5`.
///
/// # Safety
/// Handles must be live, `metric` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_similarity(
    task: *const PdTask,
    a: *const PdPlan,
    b: *const PdPlan,
    metric: *const c_char,
    out: *mut f64,
) -> PdStatus {
    guard(|| {
        let task = ref_arg(task, "task")?;
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        let spec = spec_arg(str_arg(metric, "metric")?)?;
        let out = out_arg(out, "out")?;
        let plans = [a.plan.clone(), b.plan.clone()];
        let m = selection::pairwise_matrix(&plans, &labels(2), &task.task, &spec)?;
        *out = m.values[0][1];
        Ok(())
    })
}

/// Renders the plan's subgoal trace (e.g. `XXBXXXXAXC`) into a new string
/// owned by the caller.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_subgoal_trace(
    task: *const PdTask,
    plan: *const PdPlan,
    out: *mut *mut c_char,
) -> PdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let (task, plan) = (ref_arg(task, "task")?, ref_arg(plan, "plan")?);
        let trace = subgoal::subgoal_trace(&plan.plan, &task.task)?;
        let s = CString::new(trace.to_string()).expect("traces contain no NUL");
        *out = s.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fills `out` (row-major, `n * n` doubles) with the pairwise similarity
/// matrix of `plans` under `metric`.
///
/// # Safety
/// `plans` must point to `n` live plan handles and `out` to `n * n`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pd_pairwise(
    task: *const PdTask,
    plans: *const *const PdPlan,
    n: usize,
    metric: *const c_char,
    out: *mut f64,
) -> PdStatus {
    guard(|| {
        let task = ref_arg(task, "task")?;
        let plans: Vec<Plan> = plan_list(plans, n)?.into_iter().cloned().collect();
        let spec = spec_arg(str_arg(metric, "metric")?)?;
        if n == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let m = selection::pairwise_matrix(&plans, &labels(n), &task.task, &spec)?;
        let out = std::slice::from_raw_parts_mut(out, n * n);
        for (i, row) in m.values.iter().enumerate() {
            out[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Greedy max-min selection of `k` plans. Writes the chosen input indices,
/// in pick order, to `out_indices` (`k` entries). Ties go to the lower index.
///
/// # Safety
/// `plans` must point to `n` live plan handles and `out_indices` to `k`
/// writable entries.
#[no_mangle]
pub unsafe extern "C" fn pd_select(
    task: *const PdTask,
    plans: *const *const PdPlan,
    n: usize,
    metric: *const c_char,
    k: usize,
    out_indices: *mut usize,
) -> PdStatus {
    guard(|| {
        let task = ref_arg(task, "task")?;
        let plans: Vec<Plan> = plan_list(plans, n)?.into_iter().cloned().collect();
        let spec = spec_arg(str_arg(metric, "metric")?)?;
        if out_indices.is_null() {
            return Err(null("out_indices"));
        }
        let m = selection::pairwise_matrix(&plans, &labels(n), &task.task, &spec)?;
        let picked = selection::select_from_matrix(&m, k)?;
        std::slice::from_raw_parts_mut(out_indices, k).copy_from_slice(&picked);
        Ok(())
    })
}

/// Dissimilarity `1 - similarity`, for convenience.
#[no_mangle]
pub extern "C" fn pd_dissimilarity(similarity: f64) -> f64 {
    1.0 - similarity
}

/// Message describing the last failure on this thread, or null if the last
/// call succeeded. The pointer stays valid until the next call on this
/// thread; do not free it.
#[no_mangle]
pub extern "C" fn pd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_metric_strings() {
        assert!(spec_arg("sgo=0.5,a=0.5").is_ok());
        assert!(spec_arg("bogus").is_err());
    }

    #[test]
    fn labels_sort_in_input_order() {
        let l = labels(12);
        let mut sorted = l.clone();
        sorted.sort();
        assert_eq!(l, sorted);
    }

    #[test]
    fn dissimilarity_is_complement() {
        assert_eq!(pd_dissimilarity(0.25), 0.75);
    }
}
