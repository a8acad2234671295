//! Pairwise disjointness constraints induced by disjoint-union statements.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kg_store::{EntityId, KnowledgeGraph, Rank};

/// One "disjoint union of" (P2738) statement: `union_class` is the
/// pairwise disjoint union of `members` (the P11260 qualifier values).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointUnion {
    pub statement_id: String,
    pub union_class: EntityId,
    members: Vec<EntityId>,
    pub rank: Rank,
    duplicates_dropped: usize,
}

impl DisjointUnion {
    /// Members are stored sorted; repeated members are dropped and counted.
    pub fn new(
        statement_id: impl Into<String>,
        union_class: EntityId,
        members: impl IntoIterator<Item = EntityId>,
        rank: Rank,
    ) -> Self {
        let mut kept: Vec<EntityId> = members.into_iter().collect();
        kept.sort_unstable();
        let before = kept.len();
        kept.dedup();
        let duplicates_dropped = before - kept.len();
        DisjointUnion {
            statement_id: statement_id.into(),
            union_class,
            members: kept,
            rank,
            duplicates_dropped,
        }
    }

    pub fn members(&self) -> &[EntityId] {
        &self.members
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    /// A statement without any list-item qualifier.
    pub fn is_degenerate(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_active(&self) -> bool {
        self.rank != Rank::Deprecated
    }

    pub(crate) fn remove_member(&mut self, member: EntityId) {
        self.members.retain(|&m| m != member);
    }

    pub(crate) fn cmp_key(&self, other: &Self) -> Ordering {
        (self.union_class, self.rank, &self.members).cmp(&(other.union_class, other.rank, &other.members))
    }
}

/// Two classes stated to be disjoint, ordered so that `a` renders before
/// `b`, with the union classes whose statements induce the constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisjointPair {
    pub a: EntityId,
    pub b: EntityId,
    pub provenance: Vec<EntityId>,
}

impl DisjointPair {
    /// Orders the two classes; returns `None` when they are equal.
    pub fn new(x: EntityId, y: EntityId, union_class: EntityId) -> Option<Self> {
        let (a, b) = ordered(x, y)?;
        Some(DisjointPair {
            a,
            b,
            provenance: vec![union_class],
        })
    }

    pub fn key(&self) -> (EntityId, EntityId) {
        (self.a, self.b)
    }

    pub fn matches(&self, x: EntityId, y: EntityId) -> bool {
        ordered(x, y) == Some((self.a, self.b))
    }
}

/// Orders two distinct classes by their rendered ids.
pub fn ordered(x: EntityId, y: EntityId) -> Option<(EntityId, EntityId)> {
    match x.render_cmp(&y) {
        Ordering::Less => Some((x, y)),
        Ordering::Greater => Some((y, x)),
        Ordering::Equal => None,
    }
}

/// Compares pairs by `a`, then `b`, on rendered ids.
pub fn pair_order(x: &(EntityId, EntityId), y: &(EntityId, EntityId)) -> Ordering {
    x.0.render_cmp(&y.0).then_with(|| x.1.render_cmp(&y.1))
}

impl Ord for DisjointPair {
    fn cmp(&self, other: &Self) -> Ordering {
        pair_order(&self.key(), &other.key()).then_with(|| self.provenance.cmp(&other.provenance))
    }
}

impl PartialOrd for DisjointPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All `n(n-1)/2` pairs of one statement, regardless of its rank.
pub fn expand_pairs(union: &DisjointUnion) -> Vec<DisjointPair> {
    let m = union.members();
    let mut out = Vec::with_capacity(m.len() * m.len().saturating_sub(1) / 2);
    for (i, &x) in m.iter().enumerate() {
        for &y in &m[i + 1..] {
            out.extend(DisjointPair::new(x, y, union.union_class));
        }
    }
    out.sort();
    out
}

/// Pairs from every non-deprecated statement, merged across statements.
/// The provenance of a merged pair lists each distinct union class once.
pub fn all_disjoint_pairs(kg: &KnowledgeGraph) -> Vec<DisjointPair> {
    merge_pairs(
        kg.disjoint_unions()
            .iter()
            .filter(|u| u.is_active())
            .flat_map(expand_pairs),
    )
}

/// Merges identical `(a, b)` pairs, concatenating provenance.
pub fn merge_pairs(pairs: impl IntoIterator<Item = DisjointPair>) -> Vec<DisjointPair> {
    let mut merged: BTreeMap<(EntityId, EntityId), Vec<EntityId>> = BTreeMap::new();
    for p in pairs {
        merged.entry(p.key()).or_default().extend(p.provenance);
    }
    let mut out: Vec<DisjointPair> = merged
        .into_iter()
        .map(|((a, b), mut provenance)| {
            provenance.sort_by(|x, y| x.render_cmp(y));
            provenance.dedup();
            DisjointPair { a, b, provenance }
        })
        .collect();
    out.sort();
    out
}

/// Statement and pair counts of a graph's disjointness information.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    /// Non-deprecated statements.
    pub statements: usize,
    /// Distinct classes carrying a non-deprecated statement.
    pub union_classes: usize,
    /// Deprecated statements, excluded from pairs.
    pub deprecated_statements: usize,
    /// Statements without members.
    pub degenerate_statements: usize,
    /// Pairs counted per statement, before merging.
    pub raw_pairs: usize,
    /// Distinct pairs after merging.
    pub merged_pairs: usize,
}

pub fn pair_counts(kg: &KnowledgeGraph) -> PairCounts {
    let unions = kg.disjoint_unions();
    let active: Vec<&DisjointUnion> = unions.iter().filter(|u| u.is_active()).collect();
    let mut classes: Vec<EntityId> = active.iter().map(|u| u.union_class).collect();
    classes.sort_unstable();
    classes.dedup();
    PairCounts {
        statements: active.len(),
        union_classes: classes.len(),
        deprecated_statements: unions.len() - active.len(),
        degenerate_statements: unions.iter().filter(|u| u.is_degenerate()).count(),
        raw_pairs: active
            .iter()
            .map(|u| u.members().len() * u.members().len().saturating_sub(1) / 2)
            .sum(),
        merged_pairs: all_disjoint_pairs(kg).len(),
    }
}
