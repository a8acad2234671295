//! Mapping of Wikidata RDF triples onto a [`KnowledgeGraph`].

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::io::{self, BufRead, Write};

use serde::Serialize;

use super::ntriples::{NTriplesReader, ParseError, ParseMode, ReadError, Term, Triple};
use crate::disjointness::DisjointUnion;
use crate::kg_store::{EntityId, GraphBuilder, KnowledgeGraph, Rank, EMPTY_CLASS_CLASS};

pub const WDT_P279: &str = "http://www.wikidata.org/prop/direct/P279";
pub const WDT_P31: &str = "http://www.wikidata.org/prop/direct/P31";
pub const P_P2738: &str = "http://www.wikidata.org/prop/P2738";
pub const PQ_P11260: &str = "http://www.wikidata.org/prop/qualifier/P11260";
pub const WIKIBASE_RANK: &str = "http://wikiba.se/ontology#rank";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const STATEMENT_IRI_PREFIX: &str = "http://www.wikidata.org/entity/statement/";

/// Counters collected while mapping triples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub lines: u64,
    pub triples: u64,
    pub malformed_lines: u64,
    #[serde(skip)]
    pub malformed_samples: Vec<ParseError>,
    pub subclass_triples: u64,
    pub instance_triples: u64,
    pub label_triples: u64,
    pub union_statements: u64,
    /// Union statements without any P11260 qualifier.
    pub degenerate_unions: u64,
    /// Qualifier or rank triples on a P2738 statement node that never
    /// appeared, or P2738 objects that are not statement nodes.
    pub unresolved_statements: u64,
    /// Triples with a predicate outside the ingested set.
    pub skipped_triples: u64,
    /// Ingested predicates whose subject or object is not an entity.
    pub non_entity_terms: u64,
    pub dropped_empty_class_edges: u64,
    pub dropped_union_duplicates: u64,
}

fn statement_local<'t>(term: &'t Term<'_>) -> Option<&'t str> {
    term.iri()?.strip_prefix(STATEMENT_IRI_PREFIX).filter(|s| !s.is_empty())
}

fn entity(term: &Term<'_>) -> Option<EntityId> {
    EntityId::from_iri(term.iri()?)
}

fn key(statement: &str) -> u64 {
    let mut h = DefaultHasher::new();
    statement.hash(&mut h);
    h.finish()
}

/// Accumulates triples in any order.
///
/// Rank triples are only remembered when the rank is not normal, keyed by
/// a hash of the statement name, so memory grows with the number of
/// disjoint-union statements and non-normal ranks rather than with the
/// size of the dump.
#[derive(Default)]
pub struct RdfGraphBuilder {
    graph: GraphBuilder,
    unions: Vec<(EntityId, String)>,
    qualifiers: HashMap<String, Vec<EntityId>>,
    ranks: HashMap<u64, Rank>,
    report: IngestReport,
}

impl RdfGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, t: &Triple<'_>) {
        self.report.triples += 1;
        let Some(pred) = t.predicate.iri() else {
            self.report.skipped_triples += 1;
            return;
        };
        match pred {
            WDT_P279 | WDT_P31 => {
                let (Some(s), Some(o)) = (entity(&t.subject), entity(&t.object)) else {
                    self.report.non_entity_terms += 1;
                    return;
                };
                if pred == WDT_P279 {
                    self.report.subclass_triples += 1;
                    self.graph.add_subclass(s, o);
                } else {
                    self.report.instance_triples += 1;
                    self.graph.add_instance(s, o);
                }
            }
            RDFS_LABEL => {
                let Term::Literal {
                    value,
                    lang: Some(lang),
                    ..
                } = &t.object
                else {
                    self.report.skipped_triples += 1;
                    return;
                };
                if lang != "en" {
                    self.report.skipped_triples += 1;
                    return;
                }
                let Some(s) = entity(&t.subject) else {
                    self.report.non_entity_terms += 1;
                    return;
                };
                self.report.label_triples += 1;
                self.graph.add_label(s, value);
            }
            P_P2738 => match (entity(&t.subject), statement_local(&t.object)) {
                (Some(class), Some(stmt)) => {
                    self.report.union_statements += 1;
                    self.unions.push((class, stmt.to_owned()));
                }
                _ => self.report.unresolved_statements += 1,
            },
            PQ_P11260 => match (statement_local(&t.subject), entity(&t.object)) {
                (Some(stmt), Some(member)) => {
                    self.qualifiers.entry(stmt.to_owned()).or_default().push(member);
                }
                _ => self.report.non_entity_terms += 1,
            },
            WIKIBASE_RANK => {
                let (Some(stmt), Some(rank)) = (
                    statement_local(&t.subject),
                    t.object.iri().and_then(Rank::from_iri),
                ) else {
                    self.report.skipped_triples += 1;
                    return;
                };
                if rank != Rank::Normal {
                    self.ranks.insert(key(stmt), rank);
                }
            }
            _ => self.report.skipped_triples += 1,
        }
    }

    pub fn finish(self) -> (KnowledgeGraph, IngestReport) {
        let RdfGraphBuilder {
            mut graph,
            mut unions,
            mut qualifiers,
            ranks,
            mut report,
        } = self;
        unions.sort();
        unions.dedup();
        for (class, stmt) in unions {
            let members = qualifiers.remove(&stmt).unwrap_or_default();
            if members.is_empty() {
                report.degenerate_unions += 1;
            }
            let rank = ranks.get(&key(&stmt)).copied().unwrap_or(Rank::Normal);
            graph.add_union(DisjointUnion::new(stmt, class, members, rank));
        }
        // Qualifier sets whose statement carried no P2738 link.
        report.unresolved_statements += qualifiers.len() as u64;
        let (kg, stats) = graph.build_with_stats();
        report.dropped_empty_class_edges = stats.dropped_empty_class_edges as u64;
        report.dropped_union_duplicates = stats.dropped_union_duplicates as u64;
        (kg, report)
    }
}

/// Builds a graph from triples in any order.
pub fn build_graph_from_rdf<'a, I>(triples: I) -> (KnowledgeGraph, IngestReport)
where
    I: IntoIterator<Item = Triple<'a>>,
{
    let mut b = RdfGraphBuilder::new();
    for t in triples {
        b.add(&t);
    }
    b.finish()
}

/// Streams an N-Triples dump into a graph.
pub fn load_ntriples<R: BufRead>(input: R, mode: ParseMode) -> Result<(KnowledgeGraph, IngestReport), ReadError> {
    let mut reader = NTriplesReader::new(input, mode);
    let mut b = RdfGraphBuilder::new();
    reader.for_each_triple(|t| b.add(&t))?;
    let (kg, mut report) = b.finish();
    report.lines = reader.lines_read();
    report.malformed_lines = reader.skipped();
    report.malformed_samples = reader.skip_samples().to_vec();
    Ok((kg, report))
}

/// Writes `kg` as N-Triples that [`load_ntriples`] maps back to an equal
/// graph. Marked-empty classes are written as instances of "empty class".
pub fn write_ntriples<W: Write>(kg: &KnowledgeGraph, mut w: W) -> io::Result<()> {
    let iri = |id: EntityId| Term::Iri(id.iri().into());
    let pred = |p: &'static str| Term::Iri(p.into());
    let mut emit = |s: Term<'_>, p: Term<'_>, o: Term<'_>| {
        writeln!(
            w,
            "{}",
            Triple {
                subject: s,
                predicate: p,
                object: o
            }
        )
    };
    for (id, label) in kg.labels() {
        emit(
            iri(id),
            pred(RDFS_LABEL),
            Term::Literal {
                value: label.into(),
                lang: Some("en".into()),
                datatype: None,
            },
        )?;
    }
    for (c, p) in kg.subclass_edges() {
        emit(iri(c), pred(WDT_P279), iri(p))?;
    }
    for (i, c) in kg.instance_edges() {
        emit(iri(i), pred(WDT_P31), iri(c))?;
    }
    for c in kg.empty_classes() {
        emit(iri(c), pred(WDT_P31), iri(EMPTY_CLASS_CLASS))?;
    }
    for u in kg.disjoint_unions() {
        let stmt = Term::Iri(format!("{STATEMENT_IRI_PREFIX}{}", u.statement_id).into());
        emit(iri(u.union_class), pred(P_P2738), stmt.clone())?;
        for &m in u.members() {
            emit(stmt.clone(), pred(PQ_P11260), iri(m))?;
        }
        emit(stmt, pred(WIKIBASE_RANK), Term::Iri(u.rank.iri().into()))?;
    }
    Ok(())
}
