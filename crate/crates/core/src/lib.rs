//! Diagnosis of over-constrained configuration problems.
//!
//! Given a consistent knowledge base and a list of customer requirements
//! that cannot be satisfied together, the crate computes which requirements
//! to give up. [`fastdiag::fast_diag`] finds the preferred minimal diagnosis
//! directly by divide and conquer, without computing conflicts first.
//! [`enumeration`] extends it to the topmost-n diagnoses and provides the
//! conflict-driven hitting-set baselines built on [`quickxplain`].
//!
//! ```
//! use diag_core::{car, enumeration::{enumerate, Algorithm, EnumerationOptions, Limit}};
//!
//! let problem = car::problem();
//! let r = enumerate(&problem, Algorithm::FastDiagTree, &EnumerationOptions::new(Limit::Count(1)));
//! assert_eq!(problem.ids(&r.diagnoses[0]), ["c5", "c6"]);
//! ```

pub mod analysis;
pub mod car;
pub mod consistency;
pub mod enumeration;
pub mod error;
pub mod fastdiag;
pub mod model;
pub mod parse;
pub mod quickxplain;

pub use consistency::{CheckStats, ProblemOracle, RequirementOracle};
pub use error::{DiagnosisError, ModelError};
pub use model::{
    compare_sets, lex_preferred, Configuration, ConflictSet, Constraint, Diagnosis,
    DiagnosisProblem, Expr, KnowledgeBase, Origin, Preference, PreferenceOrder, ReqSet, Variable,
};
