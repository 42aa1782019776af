//! Procrustean filters.
//!
//! A filter is a finite transition system whose edges carry observation
//! symbols and whose states carry nonempty sets of output colors. Filters are
//! used as incremental stream transducers: a stream of observations is traced
//! through the graph and the colors of the currently reached states are the
//! output.
//!
//! This crate provides:
//!
//! - the data model and structural transforms ([`filter`]),
//! - string semantics and an incremental marker-set tracer ([`trace`]),
//! - reachable tensor products and graph unions ([`product`]),
//! - decision procedures for string single-output membership, language
//!   inclusion, output compatibility and output simulation ([`check`]),
//! - exact minimization towards tracing-deterministic, string single-output
//!   and general nondeterministic targets ([`minimize`]),
//! - hardness-reduction instance generators and a seeded random filter
//!   generator ([`reduce`]),
//! - the JSON document format ([`io`]) and Graphviz output ([`dot`]).

pub mod check;
pub mod dot;
pub mod filter;
pub mod io;
pub mod limits;
pub mod minimize;
pub mod product;
pub mod reduce;
mod search;
pub mod trace;

pub use check::{FailureReason, SimVerdict};
pub use filter::{
    ClassReport, Color, ColorSet, Filter, FilterBuilder, FilterError, SelectionPolicy, StateRecord,
    StateSet, Symbol, Violation,
};
pub use limits::{Budget, Exhausted};
pub use minimize::{SynthesisResult, TargetClass};
pub use product::ProductGraph;
pub use trace::{ObservationString, TraceError, Tracer};
