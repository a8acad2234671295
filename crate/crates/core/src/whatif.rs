//! Candidate fixes applied as an overlay on a frozen graph, and the
//! violations and culprits they eliminate.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disjointness::pair_order;
use crate::kg_store::{EntityId, KnowledgeGraph};
use crate::violations::{analyze_all, Culprit, PairAnalysis};

/// One candidate change to the graph.
///
/// Serialized as `{"kind": "...", "args": [...]}`, e.g.
/// `{"kind": "remove_subclass_edge", "args": ["Q7187", "Q4406616"]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawEdit", into = "RawEdit")]
pub enum Edit {
    RemoveSubclassEdge { child: EntityId, parent: EntityId },
    AddSubclassEdge { child: EntityId, parent: EntityId },
    RemoveInstanceEdge { item: EntityId, class: EntityId },
    MarkEmptyClass { class: EntityId },
    RemoveUnionMember { statement_id: String, member: EntityId },
    RemoveUnion { statement_id: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawEdit {
    kind: String,
    #[serde(default)]
    args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditParseError {
    #[error("unknown edit kind `{0}`")]
    UnknownKind(String),
    #[error("edit `{kind}` takes {expected} argument(s), got {got}")]
    Arity {
        kind: String,
        expected: usize,
        got: usize,
    },
    #[error("edit `{kind}`: {source}")]
    BadEntity {
        kind: String,
        source: crate::kg_store::ParseEntityIdError,
    },
}

impl Edit {
    pub fn kind(&self) -> &'static str {
        match self {
            Edit::RemoveSubclassEdge { .. } => "remove_subclass_edge",
            Edit::AddSubclassEdge { .. } => "add_subclass_edge",
            Edit::RemoveInstanceEdge { .. } => "remove_instance_edge",
            Edit::MarkEmptyClass { .. } => "mark_empty_class",
            Edit::RemoveUnionMember { .. } => "remove_union_member",
            Edit::RemoveUnion { .. } => "remove_union",
        }
    }
}

impl TryFrom<RawEdit> for Edit {
    type Error = EditParseError;

    fn try_from(raw: RawEdit) -> Result<Self, Self::Error> {
        let expected = match raw.kind.as_str() {
            "remove_subclass_edge" | "add_subclass_edge" | "remove_instance_edge"
            | "remove_union_member" => 2,
            "mark_empty_class" | "remove_union" => 1,
            _ => return Err(EditParseError::UnknownKind(raw.kind)),
        };
        if raw.args.len() != expected {
            return Err(EditParseError::Arity {
                kind: raw.kind,
                expected,
                got: raw.args.len(),
            });
        }
        let id = |s: &str| {
            s.parse::<EntityId>().map_err(|source| EditParseError::BadEntity {
                kind: raw.kind.clone(),
                source,
            })
        };
        let a = &raw.args;
        Ok(match raw.kind.as_str() {
            "remove_subclass_edge" => Edit::RemoveSubclassEdge {
                child: id(&a[0])?,
                parent: id(&a[1])?,
            },
            "add_subclass_edge" => Edit::AddSubclassEdge {
                child: id(&a[0])?,
                parent: id(&a[1])?,
            },
            "remove_instance_edge" => Edit::RemoveInstanceEdge {
                item: id(&a[0])?,
                class: id(&a[1])?,
            },
            "mark_empty_class" => Edit::MarkEmptyClass { class: id(&a[0])? },
            "remove_union_member" => Edit::RemoveUnionMember {
                statement_id: a[0].clone(),
                member: id(&a[1])?,
            },
            _ => Edit::RemoveUnion {
                statement_id: a[0].clone(),
            },
        })
    }
}

impl From<Edit> for RawEdit {
    fn from(e: Edit) -> Self {
        let kind = e.kind().to_owned();
        let args = match e {
            Edit::RemoveSubclassEdge { child, parent } | Edit::AddSubclassEdge { child, parent } => {
                vec![child.to_string(), parent.to_string()]
            }
            Edit::RemoveInstanceEdge { item, class } => vec![item.to_string(), class.to_string()],
            Edit::MarkEmptyClass { class } => vec![class.to_string()],
            Edit::RemoveUnionMember {
                statement_id,
                member,
            } => vec![statement_id, member.to_string()],
            Edit::RemoveUnion { statement_id } => vec![statement_id],
        };
        RawEdit { kind, args }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let raw = RawEdit::from(self.clone());
        write!(f, "{}({})", raw.kind, raw.args.join(", "))
    }
}

/// Parses a JSON array of edits.
pub fn parse_edits(json: &str) -> Result<Vec<Edit>, serde_json::Error> {
    serde_json::from_str(json)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WhatIfError {
    #[error("edit {index} ({edit}): unknown entity {entity}")]
    UnknownEntity {
        index: usize,
        edit: String,
        entity: EntityId,
    },
    #[error("edit {index} ({edit}): unknown disjoint-union statement `{statement_id}`")]
    UnknownStatement {
        index: usize,
        edit: String,
        statement_id: String,
    },
}

/// Applies `edits` left to right and returns the edited graph. The base
/// graph is untouched; entity table and labels stay shared with it.
pub fn apply_edits(kg: &KnowledgeGraph, edits: &[Edit]) -> Result<KnowledgeGraph, WhatIfError> {
    let mut sub_removed: HashSet<(u32, u32)> = HashSet::new();
    let mut sub_added: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut inst_removed: HashSet<(u32, u32)> = HashSet::new();
    let mut empty_added: BTreeSet<u32> = BTreeSet::new();
    let mut unions = None;

    for (index, edit) in edits.iter().enumerate() {
        let node = |entity: EntityId| {
            kg.node(entity).ok_or_else(|| WhatIfError::UnknownEntity {
                index,
                edit: edit.to_string(),
                entity,
            })
        };
        match edit {
            Edit::RemoveSubclassEdge { child, parent } => {
                let key = (node(*child)?, node(*parent)?);
                if !sub_added.remove(&key) && kg.subclass_pairs().binary_search(&key).is_ok() {
                    sub_removed.insert(key);
                }
            }
            Edit::AddSubclassEdge { child, parent } => {
                let key = (node(*child)?, node(*parent)?);
                if !sub_removed.remove(&key) && kg.subclass_pairs().binary_search(&key).is_err() {
                    sub_added.insert(key);
                }
            }
            Edit::RemoveInstanceEdge { item, class } => {
                let key = (node(*item)?, node(*class)?);
                if kg.instance_pairs().binary_search(&key).is_ok() {
                    inst_removed.insert(key);
                }
            }
            Edit::MarkEmptyClass { class } => {
                let n = node(*class)?;
                if kg.empty_nodes().binary_search(&n).is_err() {
                    empty_added.insert(n);
                }
            }
            Edit::RemoveUnionMember {
                statement_id,
                member,
            } => {
                node(*member)?;
                let list = unions.get_or_insert_with(|| kg.disjoint_unions().to_vec());
                let mut found = false;
                for u in list.iter_mut().filter(|u| &u.statement_id == statement_id) {
                    u.remove_member(*member);
                    found = true;
                }
                if !found {
                    return Err(WhatIfError::UnknownStatement {
                        index,
                        edit: edit.to_string(),
                        statement_id: statement_id.clone(),
                    });
                }
            }
            Edit::RemoveUnion { statement_id } => {
                let list = unions.get_or_insert_with(|| kg.disjoint_unions().to_vec());
                let before = list.len();
                list.retain(|u| &u.statement_id != statement_id);
                if list.len() == before {
                    return Err(WhatIfError::UnknownStatement {
                        index,
                        edit: edit.to_string(),
                        statement_id: statement_id.clone(),
                    });
                }
            }
        }
    }

    let subclass = (!sub_removed.is_empty() || !sub_added.is_empty()).then(|| {
        let mut edges: Vec<(u32, u32)> = kg
            .subclass_pairs()
            .iter()
            .copied()
            .filter(|e| !sub_removed.contains(e))
            .chain(sub_added.iter().copied())
            .collect();
        edges.sort_unstable();
        edges
    });
    let instance = (!inst_removed.is_empty()).then(|| {
        kg.instance_pairs()
            .iter()
            .copied()
            .filter(|e| !inst_removed.contains(e))
            .collect()
    });
    let empty = (!empty_added.is_empty()).then(|| {
        let mut all: Vec<u32> = kg.empty_nodes().iter().copied().chain(empty_added).collect();
        all.sort_unstable();
        all
    });
    if subclass.is_none() && instance.is_none() && empty.is_none() && unions.is_none() {
        return Ok(kg.clone());
    }
    Ok(kg.with_relations(subclass, instance, unions, empty))
}

/// Effect of a set of edits on one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairDelta {
    pub a: EntityId,
    pub b: EntityId,
    #[serde(flatten)]
    pub counts: DeltaCounts,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DeltaCounts {
    pub culprits_before: usize,
    pub culprits_after: usize,
    /// Culprits that are no longer active subclass violations.
    pub culprits_eliminated: usize,
    /// Culprits after the edits that were not culprits before.
    pub culprits_introduced: usize,
    pub subclass_before: usize,
    pub subclass_after: usize,
    pub subclass_violations_eliminated: usize,
    pub subclass_violations_introduced: usize,
    pub instance_before: usize,
    pub instance_after: usize,
    pub instance_violations_eliminated: usize,
    pub instance_violations_introduced: usize,
    pub exempted_before: usize,
    pub exempted_after: usize,
}

impl DeltaCounts {
    fn add(&mut self, o: &DeltaCounts) {
        self.culprits_before += o.culprits_before;
        self.culprits_after += o.culprits_after;
        self.culprits_eliminated += o.culprits_eliminated;
        self.culprits_introduced += o.culprits_introduced;
        self.subclass_before += o.subclass_before;
        self.subclass_after += o.subclass_after;
        self.subclass_violations_eliminated += o.subclass_violations_eliminated;
        self.subclass_violations_introduced += o.subclass_violations_introduced;
        self.instance_before += o.instance_before;
        self.instance_after += o.instance_after;
        self.instance_violations_eliminated += o.instance_violations_eliminated;
        self.instance_violations_introduced += o.instance_violations_introduced;
        self.exempted_before += o.exempted_before;
        self.exempted_after += o.exempted_after;
    }

    pub fn is_zero_change(&self) -> bool {
        self.culprits_eliminated == 0
            && self.culprits_introduced == 0
            && self.subclass_violations_eliminated == 0
            && self.subclass_violations_introduced == 0
            && self.instance_violations_eliminated == 0
            && self.instance_violations_introduced == 0
            && self.exempted_before == self.exempted_after
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    /// Pairs with any violation before or after, in pair order.
    pub pairs: Vec<PairDelta>,
    /// Counts summed over `pairs`.
    pub totals: DeltaCounts,
    /// Culprits from before the edits that are still active violations.
    pub residual_culprits: Vec<Culprit>,
}

/// Compares two full analyses of the same pair universe.
pub fn delta_between(before: &[PairAnalysis], after: &[PairAnalysis]) -> DeltaReport {
    let after_by_key: HashMap<(EntityId, EntityId), &PairAnalysis> =
        after.iter().map(|p| (p.pair.key(), p)).collect();
    let before_keys: HashSet<(EntityId, EntityId)> = before.iter().map(|p| p.pair.key()).collect();
    let empty = |key: (EntityId, EntityId)| PairAnalysis {
        pair: crate::disjointness::DisjointPair {
            a: key.0,
            b: key.1,
            provenance: Vec::new(),
        },
        active: Vec::new(),
        exempted: Vec::new(),
        culprits: Vec::new(),
        exempted_culprits: Vec::new(),
        instance: Vec::new(),
    };

    let mut pairs = Vec::new();
    let mut residual_culprits = Vec::new();
    let mut visit = |old: &PairAnalysis, new: &PairAnalysis| {
        let new_active: HashSet<EntityId> = new.active.iter().copied().collect();
        let old_active: HashSet<EntityId> = old.active.iter().copied().collect();
        let old_culprits: HashSet<EntityId> = old.culprits.iter().map(|c| c.class).collect();
        let new_instance: HashSet<EntityId> = new.instance.iter().copied().collect();
        let old_instance: HashSet<EntityId> = old.instance.iter().copied().collect();
        let mut eliminated = 0;
        for c in &old.culprits {
            if new_active.contains(&c.class) {
                residual_culprits.push(c.clone());
            } else {
                eliminated += 1;
            }
        }
        let d = DeltaCounts {
            culprits_before: old.culprits.len(),
            culprits_after: new.culprits.len(),
            culprits_eliminated: eliminated,
            culprits_introduced: new
                .culprits
                .iter()
                .filter(|c| !old_culprits.contains(&c.class))
                .count(),
            subclass_before: old.active.len(),
            subclass_after: new.active.len(),
            subclass_violations_eliminated: old_active.difference(&new_active).count(),
            subclass_violations_introduced: new_active.difference(&old_active).count(),
            instance_before: old.instance.len(),
            instance_after: new.instance.len(),
            instance_violations_eliminated: old_instance.difference(&new_instance).count(),
            instance_violations_introduced: new_instance.difference(&old_instance).count(),
            exempted_before: old.exempted.len(),
            exempted_after: new.exempted.len(),
        };
        let any = d.culprits_before + d.culprits_after + d.subclass_before + d.subclass_after
            + d.instance_before + d.instance_after + d.exempted_before + d.exempted_after;
        if any > 0 {
            pairs.push(PairDelta {
                a: old.pair.a,
                b: old.pair.b,
                counts: d,
            });
        }
    };
    for old in before {
        match after_by_key.get(&old.pair.key()) {
            Some(new) => visit(old, new),
            None => visit(old, &empty(old.pair.key())),
        }
    }
    for new in after.iter().filter(|p| !before_keys.contains(&p.pair.key())) {
        let mut old = empty(new.pair.key());
        old.pair = new.pair.clone();
        visit(&old, new);
    }

    pairs.sort_by(|x, y| pair_order(&(x.a, x.b), &(y.a, y.b)));
    residual_culprits.sort_by(|x, y| pair_order(&x.pair, &y.pair).then(x.class.cmp(&y.class)));
    let mut totals = DeltaCounts::default();
    for d in &pairs {
        totals.add(&d.counts);
    }
    DeltaReport {
        pairs,
        totals,
        residual_culprits,
    }
}

/// Full recomputation of the graph with and without `edits`.
pub fn delta_report(kg: &KnowledgeGraph, edits: &[Edit]) -> Result<DeltaReport, WhatIfError> {
    let overlay = apply_edits(kg, edits)?;
    Ok(delta_between(&analyze_all(kg), &analyze_all(&overlay)))
}

/// Same as [`delta_report`] with a precomputed analysis of `kg`.
pub fn delta_report_from(
    kg: &KnowledgeGraph,
    base: &[PairAnalysis],
    edits: &[Edit],
) -> Result<DeltaReport, WhatIfError> {
    let overlay = apply_edits(kg, edits)?;
    Ok(delta_between(base, &analyze_all(&overlay)))
}
