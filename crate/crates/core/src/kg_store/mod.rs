//! Frozen knowledge graph with subclass/instance closure queries.

mod entity;
mod graph;
mod index;

pub use entity::{EntityId, EntityKind, ParseEntityIdError, ParseRankError, Rank, ENTITY_IRI_PREFIX};
pub use graph::{
    BuildStats, Condensation, GraphBuilder, GraphStats, KnowledgeGraph, EMPTY_CLASS_CLASS,
    THE_EMPTY_CLASS,
};
pub use index::{Csr, Scratch, Taxonomy};
