//! Distributed approximation of minimum 2-spanners and dominating sets on a
//! deterministic round-synchronous simulator, a local (1+ε) scheme for
//! k-spanners, exact oracles, and lower-bound gadget generators.

pub mod densest;
pub mod density;
pub mod error;
pub mod flow;
pub mod gadget;
pub mod generate;
pub mod graph;
pub mod mds;
pub mod oracle;
pub mod par;
pub mod ptas;
pub mod sim;
pub mod spanner;
pub mod star;

pub use density::{Ratio, Rounded};
pub use error::{GraphError, ParseError};
pub use graph::{
    format_graph, parse_graph, spanner_cost, verify_spanner, EdgeId, EdgeSubset, Graph, GraphBuilder, SpannerMode,
    VertexId,
};
pub use par::Execution;
pub use star::{Star, Variant};
