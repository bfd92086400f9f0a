//! Simultaneous lower bounds on the number of true discoveries in any
//! user-chosen set of hypotheses.
//!
//! Start from a [`PValueStudy`] (one p-value per hypothesis) and pick a route:
//!
//! - [`full_closure`] runs exact closed testing over all `2^m - 1`
//!   intersection hypotheses (Simes or Fisher local tests, `m <= 25`).
//!   [`ClosureMap::discovery_bound`] then answers `d(R)`, a lower bound on the
//!   number of false nulls in `R` that holds simultaneously for every `R`.
//! - [`preprocess`] builds the Simes shortcut, which answers the same queries
//!   exactly for Simes local tests at any scale.
//!
//! A closure summarizes into its defining family ([`ClosureMap::defining_family`]);
//! [`minimal_transversals`] turns it into the dual view, in which at least
//! one listed set consists entirely of false nulls, and
//! [`condition_on_nulls`] prunes that view when some hypotheses are known
//! to be true nulls.
//!
//! The [`global`] module holds the comparison baselines and [`experiments`]
//! the power and timing harnesses. See the crate's `examples/` directory for
//! one runnable program per capability.

pub mod closure;
pub mod dual;
pub mod error;
pub mod experiments;
pub mod family;
pub mod global;
pub mod rng;
pub mod shortcut;
pub mod study;
pub mod threshold;

pub use closure::{bound_from_defining, full_closure, BoundResult, ClosureMap};
pub use dual::{condition_on_nulls, minimal_transversals, minimal_transversals_capped, verify_duality};
pub use error::{Error, Result};
pub use family::SetFamily;
pub use global::{
    calibrate_lambda, hc_critical_value, higher_criticism, mr_lower_bound, BoundingFunctionConfig, CalibrationCache,
};
pub use local_tests::{chisq_even_df_survival, fisher_local, simes_local, LocalTestDecision};
pub use rng::{derive_stream, RngStream};
pub use shortcut::{preprocess, SimesShortcutState};
pub use study::{load_study, write_study, AnalysisConfig, HypothesisSet, LocalTest, PValueStudy};
