//! Subclass and instance violations of disjoint pairs, their culprits, and
//! the empty-class exemption.
//!
//! For a pair `(a, b)`:
//!
//! * subclass violations are the classes below both `a` and `b` by one or
//!   more subclass edges;
//! * instance violations are the items stated (P31) to be instances of a
//!   class at or below `a` and of a class at or below `b`;
//! * culprits are the subclass violations none of whose direct parents is
//!   itself a violation. On cyclic taxonomies the check runs on the
//!   condensation: a violating component whose parent components are all
//!   non-violating contributes every member as a culprit.
//!
//! Violations at or below a class marked empty are exempted: they are
//! reported separately and excluded from the active counts.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::disjointness::{all_disjoint_pairs, pair_order, DisjointPair};
use crate::kg_store::{EntityId, KnowledgeGraph, Scratch, Taxonomy};

/// A most-general subclass violation of a pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Culprit {
    pub class: EntityId,
    /// The pair as `(a, b)`.
    pub pair: (EntityId, EntityId),
    /// Smallest member of the subclass cycle this culprit belongs to, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_group: Option<EntityId>,
}

/// Per-pair counts. Subclass and culprit counts exclude exempted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationSummary {
    pub pair: DisjointPair,
    pub n_culprits: usize,
    pub n_subclass_violations: usize,
    pub n_instance_violations: usize,
    pub n_total: usize,
    pub n_exempted: usize,
}

impl ViolationSummary {
    pub fn has_violations(&self) -> bool {
        self.n_total + self.n_exempted > 0
    }
}

/// Full violation sets of one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairAnalysis {
    pub pair: DisjointPair,
    /// Subclass violations not exempted, sorted.
    pub active: Vec<EntityId>,
    /// Subclass violations at or below a marked-empty class, sorted.
    pub exempted: Vec<EntityId>,
    /// Culprits among `active`, sorted by class.
    pub culprits: Vec<Culprit>,
    /// Culprits among `exempted`, sorted by class.
    pub exempted_culprits: Vec<Culprit>,
    /// Instance violations, sorted.
    pub instance: Vec<EntityId>,
}

impl PairAnalysis {
    pub fn summary(&self) -> ViolationSummary {
        ViolationSummary {
            pair: self.pair.clone(),
            n_culprits: self.culprits.len(),
            n_subclass_violations: self.active.len(),
            n_instance_violations: self.instance.len(),
            n_total: self.active.len() + self.instance.len(),
            n_exempted: self.exempted.len(),
        }
    }

    /// Active and exempted subclass violations together.
    pub fn all_subclass_violations(&self) -> BTreeSet<EntityId> {
        self.active.iter().chain(&self.exempted).copied().collect()
    }
}

/// Summary plus culprit lists of a pair that has violations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairFindings {
    pub summary: ViolationSummary,
    pub culprits: Vec<Culprit>,
    pub exempted_culprits: Vec<Culprit>,
}

/// Grand totals over all pairs. Per-pair counts are summed, so a class
/// violating two pairs counts twice; the `distinct_*` fields count once.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GlobalTotals {
    pub pairs: usize,
    pub pairs_with_violations: usize,
    pub pairs_with_subclass_violations: usize,
    pub culprits: usize,
    pub subclass_violations: usize,
    pub instance_violations: usize,
    pub total_violations: usize,
    pub exempted: usize,
    pub distinct_culprit_classes: usize,
    pub distinct_violating_classes: usize,
    pub distinct_violating_items: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    /// Pairs with violations, descending by `n_total`, then by pair.
    pub findings: Vec<PairFindings>,
    /// Pairs without any violation, in pair order.
    pub clean_pairs: Vec<DisjointPair>,
    pub totals: GlobalTotals,
}

impl AuditSummary {
    pub fn summaries(&self) -> impl Iterator<Item = &ViolationSummary> {
        self.findings.iter().map(|f| &f.summary)
    }

    pub fn find(&self, a: EntityId, b: EntityId) -> Option<&PairFindings> {
        self.findings.iter().find(|f| f.summary.pair.matches(a, b))
    }
}

/// Node-level result of one pair computation.
struct RawPair {
    subclass: Vec<u32>,
    culprit_components: Vec<u32>,
    instance: Vec<u32>,
}

fn compute_raw(t: &Taxonomy, a: u32, b: u32, scratch: &mut Scratch) -> RawPair {
    let (ca, cb) = (t.component_of(a), t.component_of(b));
    let (sa, sb, sv) = scratch.stamps3();
    let (marks, item_marks) = scratch.both(t.component_count(), t.node_count());

    // components strictly below a
    let mut below_a: Vec<u32> = Vec::new();
    if t.is_cyclic(ca) {
        marks[ca as usize] = sa;
        below_a.push(ca);
    }
    for &c in t.component_children(ca) {
        if marks[c as usize] != sa {
            marks[c as usize] = sa;
            below_a.push(c);
        }
    }
    let mut head = 0;
    while head < below_a.len() {
        let v = below_a[head];
        head += 1;
        for &c in t.component_children(v) {
            if marks[c as usize] != sa {
                marks[c as usize] = sa;
                below_a.push(c);
            }
        }
    }

    // components strictly below b; those also below a form the violations
    let mut below_b: Vec<u32> = Vec::new();
    let mut violating: Vec<u32> = Vec::new();
    let visit = |c: u32, marks: &mut [u32], below_b: &mut Vec<u32>, violating: &mut Vec<u32>| {
        let m = marks[c as usize];
        if m == sb || m == sv {
            return;
        }
        if m == sa {
            marks[c as usize] = sv;
            violating.push(c);
        } else {
            marks[c as usize] = sb;
        }
        below_b.push(c);
    };
    if t.is_cyclic(cb) {
        visit(cb, marks, &mut below_b, &mut violating);
    }
    for &c in t.component_children(cb) {
        visit(c, marks, &mut below_b, &mut violating);
    }
    let mut head = 0;
    while head < below_b.len() {
        let v = below_b[head];
        head += 1;
        for &c in t.component_children(v) {
            visit(c, marks, &mut below_b, &mut violating);
        }
    }

    let culprit_components: Vec<u32> = violating
        .iter()
        .copied()
        .filter(|&c| !t.component_parents(c).iter().any(|&p| marks[p as usize] == sv))
        .collect();

    let mut subclass: Vec<u32> = violating
        .iter()
        .flat_map(|&c| t.component_members(c).iter().copied())
        .collect();
    subclass.sort_unstable();

    // items at or below a, then at or below b
    let mut instance: Vec<u32> = Vec::new();
    let reflexive_a = std::iter::once(ca).filter(|&c| !t.is_cyclic(c)).chain(below_a.iter().copied());
    for c in reflexive_a {
        for &class in t.component_members(c) {
            for &item in t.stated_items(class) {
                item_marks[item as usize] = sa;
            }
        }
    }
    let reflexive_b = std::iter::once(cb).filter(|&c| !t.is_cyclic(c)).chain(below_b.iter().copied());
    for c in reflexive_b {
        for &class in t.component_members(c) {
            for &item in t.stated_items(class) {
                if item_marks[item as usize] == sa {
                    item_marks[item as usize] = sv;
                    instance.push(item);
                }
            }
        }
    }
    instance.sort_unstable();

    RawPair {
        subclass,
        culprit_components,
        instance,
    }
}

fn raw_for(kg: &KnowledgeGraph, pair: &DisjointPair, scratch: &mut Scratch) -> RawPair {
    match (kg.node(pair.a), kg.node(pair.b)) {
        (Some(a), Some(b)) => compute_raw(kg.taxonomy(), a, b, scratch),
        _ => RawPair {
            subclass: Vec::new(),
            culprit_components: Vec::new(),
            instance: Vec::new(),
        },
    }
}

fn culprits_of(kg: &KnowledgeGraph, pair: &DisjointPair, raw: &RawPair) -> Vec<Culprit> {
    let t = kg.taxonomy();
    let mut out: Vec<Culprit> = Vec::new();
    for &c in &raw.culprit_components {
        let members = t.component_members(c);
        let cycle_group = t.is_cyclic(c).then(|| kg.entity(members[0]));
        out.extend(members.iter().map(|&m| Culprit {
            class: kg.entity(m),
            pair: pair.key(),
            cycle_group,
        }));
    }
    out.sort_by_key(|c| c.class);
    out
}

fn analysis_from_raw(kg: &KnowledgeGraph, pair: &DisjointPair, raw: RawPair) -> PairAnalysis {
    let t = kg.taxonomy();
    let (mut active, mut exempted) = (Vec::new(), Vec::new());
    for &v in &raw.subclass {
        if t.is_implied_empty(v) {
            exempted.push(kg.entity(v));
        } else {
            active.push(kg.entity(v));
        }
    }
    let (exempted_culprits, culprits): (Vec<Culprit>, Vec<Culprit>) = culprits_of(kg, pair, &raw)
        .into_iter()
        .partition(|c| kg.is_implied_empty(c.class));
    PairAnalysis {
        pair: pair.clone(),
        active,
        exempted,
        culprits,
        exempted_culprits,
        instance: raw.instance.iter().map(|&i| kg.entity(i)).collect(),
    }
}

/// Classes below both classes of the pair, exempted or not.
pub fn subclass_violations(kg: &KnowledgeGraph, pair: &DisjointPair) -> BTreeSet<EntityId> {
    let raw = raw_for(kg, pair, &mut Scratch::new());
    raw.subclass.iter().map(|&v| kg.entity(v)).collect()
}

/// Items that are instances of both classes of the pair.
pub fn instance_violations(kg: &KnowledgeGraph, pair: &DisjointPair) -> BTreeSet<EntityId> {
    let raw = raw_for(kg, pair, &mut Scratch::new());
    raw.instance.iter().map(|&v| kg.entity(v)).collect()
}

/// Most-general subclass violations of the pair, exempted or not.
pub fn culprits(kg: &KnowledgeGraph, pair: &DisjointPair) -> Vec<Culprit> {
    let raw = raw_for(kg, pair, &mut Scratch::new());
    culprits_of(kg, pair, &raw)
}

/// Splits violations into `(active, exempted)`. A violation is exempted
/// when it is marked empty or is a subclass of a marked-empty class.
pub fn exempt_empty(
    kg: &KnowledgeGraph,
    violations: &BTreeSet<EntityId>,
) -> (BTreeSet<EntityId>, BTreeSet<EntityId>) {
    violations.iter().copied().partition(|&v| !kg.is_implied_empty(v))
}

pub fn analyze_pair(kg: &KnowledgeGraph, pair: &DisjointPair) -> PairAnalysis {
    let raw = raw_for(kg, pair, &mut Scratch::new());
    analysis_from_raw(kg, pair, raw)
}

/// Full analyses of the given pairs, in input order.
pub fn analyze_pairs(kg: &KnowledgeGraph, pairs: &[DisjointPair]) -> Vec<PairAnalysis> {
    pairs
        .par_iter()
        .map_init(Scratch::new, |scratch, pair| {
            let raw = raw_for(kg, pair, scratch);
            analysis_from_raw(kg, pair, raw)
        })
        .collect()
}

/// Full analyses of every disjoint pair of the graph, in pair order.
pub fn analyze_all(kg: &KnowledgeGraph) -> Vec<PairAnalysis> {
    analyze_pairs(kg, &all_disjoint_pairs(kg))
}

struct AtomicBits(Vec<AtomicU64>);

impl AtomicBits {
    fn new(n: usize) -> Self {
        AtomicBits((0..n.div_ceil(64)).map(|_| AtomicU64::new(0)).collect())
    }

    fn set(&self, i: u32) {
        self.0[i as usize / 64].fetch_or(1 << (i % 64), Ordering::Relaxed);
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.load(Ordering::Relaxed).count_ones() as usize).sum()
    }
}

/// Counts for every pair of the graph.
pub fn summarize_all(kg: &KnowledgeGraph) -> AuditSummary {
    summarize_pairs(kg, &all_disjoint_pairs(kg))
}

/// Counts for the given pairs only.
pub fn summarize_pairs(kg: &KnowledgeGraph, pairs: &[DisjointPair]) -> AuditSummary {
    let n = kg.entities().len();
    let (culprit_bits, class_bits, item_bits) =
        (AtomicBits::new(n), AtomicBits::new(n), AtomicBits::new(n));
    let t = kg.taxonomy();

    let results: Vec<PairFindings> = pairs
        .par_iter()
        .map_init(Scratch::new, |scratch, pair| {
            let raw = raw_for(kg, pair, scratch);
            for &v in &raw.subclass {
                if !t.is_implied_empty(v) {
                    class_bits.set(v);
                }
            }
            for &i in &raw.instance {
                item_bits.set(i);
            }
            let exempted = raw.subclass.iter().filter(|&&v| t.is_implied_empty(v)).count();
            let (exempted_culprits, culprits): (Vec<Culprit>, Vec<Culprit>) =
                culprits_of(kg, pair, &raw)
                    .into_iter()
                    .partition(|c| kg.is_implied_empty(c.class));
            for c in &culprits {
                culprit_bits.set(kg.node(c.class).expect("culprit is a node"));
            }
            let active = raw.subclass.len() - exempted;
            PairFindings {
                summary: ViolationSummary {
                    pair: pair.clone(),
                    n_culprits: culprits.len(),
                    n_subclass_violations: active,
                    n_instance_violations: raw.instance.len(),
                    n_total: active + raw.instance.len(),
                    n_exempted: exempted,
                },
                culprits,
                exempted_culprits,
            }
        })
        .collect();

    let mut totals = GlobalTotals {
        pairs: pairs.len(),
        distinct_culprit_classes: culprit_bits.count(),
        distinct_violating_classes: class_bits.count(),
        distinct_violating_items: item_bits.count(),
        ..GlobalTotals::default()
    };
    let mut findings = Vec::new();
    let mut clean_pairs = Vec::new();
    for f in results {
        let s = &f.summary;
        if !s.has_violations() {
            clean_pairs.push(s.pair.clone());
            continue;
        }
        totals.pairs_with_violations += 1;
        if s.n_subclass_violations > 0 {
            totals.pairs_with_subclass_violations += 1;
        }
        totals.culprits += s.n_culprits;
        totals.subclass_violations += s.n_subclass_violations;
        totals.instance_violations += s.n_instance_violations;
        totals.total_violations += s.n_total;
        totals.exempted += s.n_exempted;
        findings.push(f);
    }
    findings.sort_by(|x, y| {
        y.summary
            .n_total
            .cmp(&x.summary.n_total)
            .then_with(|| pair_order(&x.summary.pair.key(), &y.summary.pair.key()))
    });
    clean_pairs.sort();
    AuditSummary {
        findings,
        clean_pairs,
        totals,
    }
}
