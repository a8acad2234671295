pub mod annotation;
pub mod audit;
pub mod cli;
pub mod disjointness;
pub mod ingest;
pub mod kg_store;
pub mod query_gen;
pub mod report;
pub mod service;
pub mod snapshot;
pub mod synth;
pub mod violations;
pub mod whatif;
