#ifndef PLANDIV_H
#define PLANDIV_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_NULL_ARGUMENT = 1,
  PD_STATUS_INVALID_UTF8 = 2,
  PD_STATUS_PARSE_ERROR = 3,
  PD_STATUS_INVALID_PLAN = 4,
  PD_STATUS_INVALID_ARGUMENT = 5,
  PD_STATUS_PANIC = 6,
} PdStatus;

/**
 * A parsed plan, bound to the task it was parsed against.
 */
typedef struct PdPlan PdPlan;

/**
 * A parsed domain + problem.
 */
typedef struct PdTask PdTask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a domain and problem. On success `*out` owns a new task.
 *
 * # Safety
 * `domain` and `problem` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum PdStatus pd_task_from_strings(const char *domain, const char *problem, struct PdTask **out);

/**
 * Releases a task. Null is ignored.
 *
 * # Safety
 * `task` must come from `pd_task_from_strings` and not be used afterwards.
 */
void pd_task_free(struct PdTask *task);

/**
 * Number of goal atoms of the task, or 0 for null.
 *
 * # Safety
 * `task` must be null or a live task handle.
 */
size_t pd_task_goal_count(const struct PdTask *task);

/**
 * Parses IPC plan text against `task` (action names, arity, objects and
 * types are checked, applicability is not).
 *
 * # Safety
 * `task` must be a live task, `text` a NUL-terminated string and `out`
 * writable.
 */
enum PdStatus pd_plan_parse(const struct PdTask *task, const char *text, struct PdPlan **out);

/**
 * Releases a plan. Null is ignored.
 *
 * # Safety
 * `plan` must come from `pd_plan_parse` and not be used afterwards.
 */
void pd_plan_free(struct PdPlan *plan);

/**
 * Number of steps, or 0 for null.
 *
 * # Safety
 * `plan` must be null or a live plan handle.
 */
size_t pd_plan_len(const struct PdPlan *plan);

/**
 * Simulates the plan. `*valid` is set to whether it applies and reaches the
 * goal; `*failing_step` to the 0-based failing step or -1 (also -1 when only
 * goals are missing). Validation failures are not errors: the call returns
 * `PD_STATUS_OK` and the reason is left in `pd_last_error_message`.
 *
 * # Safety
 * Handles must be live; `valid` and `failing_step` writable.
 */
enum PdStatus pd_plan_validate(const struct PdTask *task,
                               const struct PdPlan *plan,
                               bool *valid,
                               int64_t *failing_step);

/**
 * Similarity in [0, 1] of two valid plans. `metric` is a metric id
 * (`a`, `s`, `c`, `u`, `flex`, `sgo`) or weights such as `sgo=0.5,a=0.5`.
 *
 * # Safety
 * Handles must be live, `metric` NUL-terminated and `out` writable.
 */
enum PdStatus pd_similarity(const struct PdTask *task,
                            const struct PdPlan *a,
                            const struct PdPlan *b,
                            const char *metric,
                            double *out);

/**
 * Renders the plan's subgoal trace (e.g. `XXBXXXXAXC`) into a new string
 * owned by the caller.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum PdStatus pd_subgoal_trace(const struct PdTask *task, const struct PdPlan *plan, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void pd_string_free(char *s);

/**
 * Fills `out` (row-major, `n * n` doubles) with the pairwise similarity
 * matrix of `plans` under `metric`.
 *
 * # Safety
 * `plans` must point to `n` live plan handles and `out` to `n * n`
 * writable doubles.
 */
enum PdStatus pd_pairwise(const struct PdTask *task,
                          const struct PdPlan *const *plans,
                          size_t n,
                          const char *metric,
                          double *out);

/**
 * Greedy max-min selection of `k` plans. Writes the chosen input indices,
 * in pick order, to `out_indices` (`k` entries). Ties go to the lower index.
 *
 * # Safety
 * `plans` must point to `n` live plan handles and `out_indices` to `k`
 * writable entries.
 */
enum PdStatus pd_select(const struct PdTask *task,
                        const struct PdPlan *const *plans,
                        size_t n,
                        const char *metric,
                        size_t k,
                        size_t *out_indices);

/**
 * Dissimilarity `1 - similarity`, for convenience.
 */
double pd_dissimilarity(double similarity);

/**
 * Message describing the last failure on this thread, or null if the last
 * call succeeded. The pointer stays valid until the next call on this
 * thread; do not free it.
 */
const char *pd_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *pd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLANDIV_H */
