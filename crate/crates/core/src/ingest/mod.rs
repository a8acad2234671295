//! Building graphs from N-Triples dumps, TSV fixtures and SPARQL endpoints.

pub mod fixture;
pub mod ntriples;
pub mod rdf;
pub mod sparql;

pub use fixture::{load_native_fixture, write_native_fixture, FixtureError, FIXTURE_FILES};
pub use ntriples::{parse_line, parse_ntriples, NTriplesReader, ParseError, ParseMode, ReadError, Term, Triple};
pub use rdf::{build_graph_from_rdf, load_ntriples, write_ntriples, IngestReport, RdfGraphBuilder};
pub use sparql::{fetch_sparql, EndpointConfig, SparqlClient, SparqlError, SparqlTable};
