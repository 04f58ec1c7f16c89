//! A compiler-style toolkit for similarity networks: validate them, build
//! global belief networks by graph union, synthesize noisy-OR tables from
//! single-fault assessments, and transform similarity networks (or plain
//! single-fault belief networks) into multiple-fault belief networks — with
//! a brute-force exact-inference oracle verifying every construction.

pub mod causal;
pub mod cli;
pub mod document;
pub mod graphs;
pub mod model;
pub mod oracle;
pub mod simnet;
pub mod transform;

pub use causal::{CausalError, NoisyOrSpec};
pub use document::{DocumentError, NetworkDocument, FORMAT_VERSION};
pub use graphs::{DiGraph, GraphError, SimilarityGraph, SimilarityHypergraph, SimilarityStructure};
pub use model::{
    validate_network, BeliefNetwork, Cpt, Finding, ParentConfig, Severity, ValidationReport,
    Variable, ABSENT, PRESENT,
};
pub use oracle::{JointTable, OracleError};
pub use simnet::{LocalBeliefNetwork, SimilarityNetwork, SimnetError, SubsetIndependenceAssertion};
pub use transform::{
    AddedIndependence, FaultDependencies, MultiFaultNetwork, NoisyOrProvenance, TransformError,
    TransformOptions, TransformReport,
};
