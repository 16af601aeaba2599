//! Plan similarity and diversity toolkit for classical (STRIPS) planning.
//!
//! Parses PDDL tasks and IPC-format plans, validates plans by simulation,
//! compares plan pairs with six similarity metrics, and greedily selects
//! maximally diverse plan subsets.
//!
//! ```
//! use plandiv::{metrics, pddl::{parse_plan, Task}};
//!
//! let task = Task::parse(
//!     "(define (domain d) (:predicates (p) (q))
//!        (:action a :effect (p)) (:action b :effect (q)))",
//!     "(define (problem x) (:domain d) (:init) (:goal (and (p) (q))))",
//! ).unwrap();
//! let ab = parse_plan("(a)\n(b)\n", &task.domain).unwrap();
//! let ba = parse_plan("(b)\n(a)\n", &task.domain).unwrap();
//! assert_eq!(metrics::delta_actions(&ab, &ba, &task).unwrap().value, 1.0);
//! assert_eq!(metrics::delta_sgo(&ab, &ba, &task).unwrap().value, 0.0);
//! ```

pub mod cli;
pub mod error;
pub mod ground;
pub mod metrics;
pub mod pddl;
pub mod pop;
pub mod selection;
pub mod subgoal;

pub use error::{Error, ParseError, Result};
pub use metrics::{MetricId, MetricSpec, MetricValue};
pub use pddl::{DomainModel, Plan, ProblemModel, Task};
pub use selection::{DiversityMode, SimilarityMatrix};
