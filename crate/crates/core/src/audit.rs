//! Endpoint-side audit: pairs and per-pair counts computed entirely by
//! generated SPARQL against a remote service.

use std::collections::HashMap;

use crate::disjointness::{merge_pairs, pair_order, DisjointPair};
use crate::ingest::sparql::{SparqlClient, SparqlError, SparqlTable};
use crate::kg_store::EntityId;
use crate::query_gen::{culprit_count_query_with, pair_extraction_query_with, violation_count_queries_with, QueryError, QueryOptions};
use crate::violations::ViolationSummary;

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error(transparent)]
    Endpoint(#[from] SparqlError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("unexpected result shape: {0}")]
    Shape(String),
}

#[derive(Clone, Debug, Default)]
pub struct RemoteAudit {
    /// Every non-deprecated pair, in pair order.
    pub pairs: Vec<DisjointPair>,
    /// One summary per pair, sorted like the engine's: descending total,
    /// then pair order. `n_exempted` is always zero.
    pub summaries: Vec<ViolationSummary>,
    /// English labels seen in the extraction results.
    pub labels: HashMap<EntityId, String>,
}

fn entity(table: &SparqlTable, row: usize, var: &str) -> Result<EntityId, AuditError> {
    table
        .entity(row, var)
        .ok_or_else(|| AuditError::Shape(format!("row {row}: `{var}` is not an entity")))
}

fn single_count(table: &SparqlTable) -> Result<usize, AuditError> {
    match table.rows.len() {
        0 => Ok(0),
        1 => table
            .count(0, "count")
            .map(|c| c as usize)
            .ok_or_else(|| AuditError::Shape("count is not an integer".into())),
        n => Err(AuditError::Shape(format!("expected one count row, got {n}"))),
    }
}

/// Runs the pair extraction query and merges rows into pairs.
pub fn extract_pairs(client: &SparqlClient, prefixes: bool) -> Result<(Vec<DisjointPair>, HashMap<EntityId, String>), AuditError> {
    let q = pair_extraction_query_with(QueryOptions { labels: true, prefixes });
    let table = client.select(&q)?;
    let mut labels = HashMap::new();
    let mut raw = Vec::with_capacity(table.len());
    for row in 0..table.len() {
        let class = entity(&table, row, "class")?;
        let e1 = entity(&table, row, "e1")?;
        let e2 = entity(&table, row, "e2")?;
        for (id, var) in [(class, "classLabel"), (e1, "e1Label"), (e2, "e2Label")] {
            if let Some(l) = table.rows[row].get(var) {
                labels.entry(id).or_insert_with(|| l.clone());
            }
        }
        raw.extend(DisjointPair::new(e1, e2, class));
    }
    Ok((merge_pairs(raw), labels))
}

/// Counts culprits, subclass and instance violations of one pair.
pub fn count_pair(client: &SparqlClient, pair: &DisjointPair, prefixes: bool) -> Result<ViolationSummary, AuditError> {
    let opts = QueryOptions { labels: false, prefixes };
    let culprits = single_count(&client.select(&culprit_count_query_with(pair.a, pair.b, opts)?)?)?;
    let (sub_q, inst_q) = violation_count_queries_with(pair.a, pair.b, opts)?;
    let subclass = single_count(&client.select(&sub_q)?)?;
    let instance = single_count(&client.select(&inst_q)?)?;
    Ok(ViolationSummary {
        pair: pair.clone(),
        n_culprits: culprits,
        n_subclass_violations: subclass,
        n_instance_violations: instance,
        n_total: subclass + instance,
        n_exempted: 0,
    })
}

/// Extraction followed by three count queries per pair.
pub fn run_remote_audit(client: &SparqlClient, prefixes: bool) -> Result<RemoteAudit, AuditError> {
    let (pairs, labels) = extract_pairs(client, prefixes)?;
    let mut summaries = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        log::info!("pair {}/{}: {} {}", i + 1, pairs.len(), pair.a, pair.b);
        summaries.push(count_pair(client, pair, prefixes)?);
    }
    summaries.sort_by(|x, y| y.n_total.cmp(&x.n_total).then_with(|| pair_order(&x.pair.key(), &y.pair.key())));
    Ok(RemoteAudit {
        pairs,
        summaries,
        labels,
    })
}
