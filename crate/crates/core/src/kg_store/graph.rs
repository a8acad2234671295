use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use super::entity::EntityId;
use super::index::{Scratch, Taxonomy};
use crate::disjointness::DisjointUnion;

/// "empty class": the class whose instances are the empty classes.
pub const EMPTY_CLASS_CLASS: EntityId = EntityId::item(128139417);
/// "the empty class": a subclass of every class, kept out of all closures.
pub const THE_EMPTY_CLASS: EntityId = EntityId::item(126726396);

/// Vector that keeps itself sorted and deduplicated in amortised batches,
/// so repeated input does not grow memory.
#[derive(Debug, Clone)]
struct DedupVec<T> {
    items: Vec<T>,
    compact_at: usize,
}

impl<T: Ord + Copy> DedupVec<T> {
    const MIN_COMPACT: usize = 1 << 20;

    fn new() -> Self {
        DedupVec {
            items: Vec::new(),
            compact_at: Self::MIN_COMPACT,
        }
    }

    fn push(&mut self, value: T) {
        self.items.push(value);
        if self.items.len() >= self.compact_at {
            self.compact();
            self.compact_at = (self.items.len() * 2).max(Self::MIN_COMPACT);
        }
    }

    fn compact(&mut self) {
        self.items.sort_unstable();
        self.items.dedup();
    }

    fn into_sorted(mut self) -> Vec<T> {
        self.compact();
        self.items.shrink_to_fit();
        self.items
    }
}

/// Counters kept while building a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Edges touching "the empty class", which never enter the graph.
    pub dropped_empty_class_edges: usize,
    /// Duplicate members removed from disjoint-union statements.
    pub dropped_union_duplicates: usize,
}

/// Single-writer accumulator for a [`KnowledgeGraph`].
#[derive(Debug)]
pub struct GraphBuilder {
    subclass: DedupVec<(EntityId, EntityId)>,
    instance: DedupVec<(EntityId, EntityId)>,
    labels: HashMap<EntityId, String>,
    unions: Vec<DisjointUnion>,
    empty: HashSet<EntityId>,
    extra_nodes: HashSet<EntityId>,
    stats: BuildStats,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder {
            subclass: DedupVec::new(),
            instance: DedupVec::new(),
            labels: HashMap::new(),
            unions: Vec::new(),
            empty: HashSet::new(),
            extra_nodes: HashSet::new(),
            stats: BuildStats::default(),
        }
    }

    /// Adds `child ⊂ parent`. A subclass link to "the empty class" marks
    /// the child empty instead.
    pub fn add_subclass(&mut self, child: EntityId, parent: EntityId) {
        if parent == THE_EMPTY_CLASS && child != THE_EMPTY_CLASS {
            self.stats.dropped_empty_class_edges += 1;
            self.mark_empty(child);
            return;
        }
        if child == THE_EMPTY_CLASS || parent == THE_EMPTY_CLASS {
            self.stats.dropped_empty_class_edges += 1;
            return;
        }
        self.subclass.push((child, parent));
    }

    /// Adds `item ∈ class`. Membership in "empty class" marks the item as
    /// an empty class instead of creating an instance edge.
    pub fn add_instance(&mut self, item: EntityId, class: EntityId) {
        if class == EMPTY_CLASS_CLASS {
            self.mark_empty(item);
            return;
        }
        if item == THE_EMPTY_CLASS || class == THE_EMPTY_CLASS {
            self.stats.dropped_empty_class_edges += 1;
            return;
        }
        self.instance.push((item, class));
    }

    /// Sets the English label. Conflicting labels resolve to the smallest.
    pub fn add_label(&mut self, id: EntityId, label: &str) {
        match self.labels.get_mut(&id) {
            Some(existing) if existing.as_str() <= label => {}
            Some(existing) => *existing = label.to_owned(),
            None => {
                self.labels.insert(id, label.to_owned());
            }
        }
    }

    pub fn mark_empty(&mut self, class: EntityId) {
        if class != THE_EMPTY_CLASS {
            self.empty.insert(class);
        }
    }

    pub fn add_union(&mut self, union: DisjointUnion) {
        self.stats.dropped_union_duplicates += union.duplicates_dropped();
        self.unions.push(union);
    }

    /// Registers a node that has no edges.
    pub fn add_node(&mut self, id: EntityId) {
        self.extra_nodes.insert(id);
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    pub fn build(self) -> KnowledgeGraph {
        self.build_with_stats().0
    }

    pub fn build_with_stats(self) -> (KnowledgeGraph, BuildStats) {
        let GraphBuilder {
            subclass,
            instance,
            labels,
            mut unions,
            empty,
            extra_nodes,
            stats,
        } = self;
        let subclass = subclass.into_sorted();
        let instance = instance.into_sorted();

        let mut nodes: Vec<EntityId> =
            Vec::with_capacity(subclass.len() + instance.len() + labels.len());
        for &(a, b) in subclass.iter().chain(instance.iter()) {
            nodes.push(a);
            nodes.push(b);
        }
        nodes.extend(labels.keys().copied());
        nodes.extend(empty.iter().copied());
        nodes.extend(extra_nodes);
        for u in &unions {
            nodes.push(u.union_class);
            nodes.extend(u.members().iter().copied());
        }
        nodes.sort_unstable();
        nodes.dedup();
        nodes.shrink_to_fit();

        let lookup = |id: &EntityId| nodes.binary_search(id).expect("node interned") as u32;
        let mut sub_idx: Vec<(u32, u32)> =
            subclass.iter().map(|(c, p)| (lookup(c), lookup(p))).collect();
        drop(subclass);
        sub_idx.sort_unstable();
        let mut inst_idx: Vec<(u32, u32)> =
            instance.iter().map(|(i, c)| (lookup(i), lookup(c))).collect();
        drop(instance);
        inst_idx.sort_unstable();
        let label_idx: HashMap<u32, Box<str>> = labels
            .into_iter()
            .map(|(id, l)| (lookup(&id), l.into_boxed_str()))
            .collect();
        let mut empty_idx: Vec<u32> = empty.iter().map(lookup).collect();
        empty_idx.sort_unstable();
        unions.sort_by(|a, b| a.statement_id.cmp(&b.statement_id).then_with(|| a.cmp_key(b)));

        let graph = KnowledgeGraph::from_parts(
            Arc::new(nodes),
            Arc::new(label_idx),
            Arc::new(sub_idx),
            Arc::new(inst_idx),
            Arc::new(unions),
            Arc::new(empty_idx),
        );
        (graph, stats)
    }
}

/// Frozen in-memory knowledge graph: subclass (P279) and instance (P31)
/// edges, English labels, disjoint-union statements and empty-class marks.
///
/// Cloning is cheap; all parts are shared. Overlays produced by
/// [`crate::whatif::apply_edits`] share the entity table and labels with
/// their base.
#[derive(Clone)]
pub struct KnowledgeGraph {
    nodes: Arc<Vec<EntityId>>,
    labels: Arc<HashMap<u32, Box<str>>>,
    subclass: Arc<Vec<(u32, u32)>>,
    instance: Arc<Vec<(u32, u32)>>,
    unions: Arc<Vec<DisjointUnion>>,
    empty: Arc<Vec<u32>>,
    index: Arc<Taxonomy>,
}

/// Node and edge counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub subclass_edges: usize,
    pub instance_edges: usize,
    pub labels: usize,
    pub disjoint_unions: usize,
    pub empty_classes: usize,
}

/// Strongly connected components of the subclass relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Members of each component, sorted.
    pub components: Vec<Vec<EntityId>>,
    /// Component id for every entity of the graph.
    pub component_of: HashMap<EntityId, usize>,
    /// Edges `(child component, parent component)` of the acyclic quotient.
    pub edges: Vec<(usize, usize)>,
}

impl KnowledgeGraph {
    pub(crate) fn from_parts(
        nodes: Arc<Vec<EntityId>>,
        labels: Arc<HashMap<u32, Box<str>>>,
        subclass: Arc<Vec<(u32, u32)>>,
        instance: Arc<Vec<(u32, u32)>>,
        unions: Arc<Vec<DisjointUnion>>,
        empty: Arc<Vec<u32>>,
    ) -> Self {
        let index = Taxonomy::build(nodes.len(), &subclass, &instance, &empty);
        KnowledgeGraph {
            nodes,
            labels,
            subclass,
            instance,
            unions,
            empty,
            index: Arc::new(index),
        }
    }

    /// Same entities and labels with replaced relations. Unchanged parts
    /// keep sharing storage with `self`.
    pub(crate) fn with_relations(
        &self,
        subclass: Option<Vec<(u32, u32)>>,
        instance: Option<Vec<(u32, u32)>>,
        unions: Option<Vec<DisjointUnion>>,
        empty: Option<Vec<u32>>,
    ) -> Self {
        let reindex = subclass.is_some() || instance.is_some() || empty.is_some();
        let subclass = subclass.map(Arc::new).unwrap_or_else(|| self.subclass.clone());
        let instance = instance.map(Arc::new).unwrap_or_else(|| self.instance.clone());
        let unions = unions.map(Arc::new).unwrap_or_else(|| self.unions.clone());
        let empty = empty.map(Arc::new).unwrap_or_else(|| self.empty.clone());
        let index = if reindex {
            Arc::new(Taxonomy::build(self.nodes.len(), &subclass, &instance, &empty))
        } else {
            self.index.clone()
        };
        KnowledgeGraph {
            nodes: self.nodes.clone(),
            labels: self.labels.clone(),
            subclass,
            instance,
            unions,
            empty,
            index,
        }
    }

    pub fn empty() -> Self {
        GraphBuilder::new().build()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            nodes: self.nodes.len(),
            subclass_edges: self.subclass.len(),
            instance_edges: self.instance.len(),
            labels: self.labels.len(),
            disjoint_unions: self.unions.len(),
            empty_classes: self.empty.len(),
        }
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.index
    }

    /// All entities, sorted; position is the node id.
    pub fn entities(&self) -> &[EntityId] {
        &self.nodes
    }

    pub fn node(&self, id: EntityId) -> Option<u32> {
        self.nodes.binary_search(&id).ok().map(|i| i as u32)
    }

    #[inline]
    pub fn entity(&self, node: u32) -> EntityId {
        self.nodes[node as usize]
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.node(id).is_some()
    }

    pub fn label(&self, id: EntityId) -> Option<&str> {
        self.node(id).and_then(|n| self.labels.get(&n)).map(|l| &**l)
    }

    /// Labels sorted by entity.
    pub fn labels(&self) -> Vec<(EntityId, &str)> {
        let mut out: Vec<(EntityId, &str)> =
            self.labels.iter().map(|(&n, l)| (self.entity(n), &**l)).collect();
        out.sort_unstable();
        out
    }

    pub(crate) fn subclass_pairs(&self) -> &[(u32, u32)] {
        &self.subclass
    }

    pub(crate) fn instance_pairs(&self) -> &[(u32, u32)] {
        &self.instance
    }

    pub(crate) fn empty_nodes(&self) -> &[u32] {
        &self.empty
    }

    pub(crate) fn label_map(&self) -> &Arc<HashMap<u32, Box<str>>> {
        &self.labels
    }

    /// `(child, parent)` pairs in node order.
    pub fn subclass_edges(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        self.subclass.iter().map(|&(c, p)| (self.entity(c), self.entity(p)))
    }

    /// `(item, class)` pairs in node order.
    pub fn instance_edges(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        self.instance.iter().map(|&(i, c)| (self.entity(i), self.entity(c)))
    }

    pub fn disjoint_unions(&self) -> &[DisjointUnion] {
        &self.unions
    }

    /// Classes stated to be instances of "empty class".
    pub fn empty_classes(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.empty.iter().map(|&n| self.entity(n))
    }

    pub fn is_marked_empty(&self, id: EntityId) -> bool {
        self.node(id).is_some_and(|n| self.empty.binary_search(&n).is_ok())
    }

    /// Marked empty, or a subclass of a marked-empty class.
    pub fn is_implied_empty(&self, id: EntityId) -> bool {
        self.node(id).is_some_and(|n| self.index.is_implied_empty(n))
    }

    fn to_set(&self, nodes: impl IntoIterator<Item = u32>) -> BTreeSet<EntityId> {
        nodes.into_iter().map(|n| self.entity(n)).collect()
    }

    /// Parents `p` with `c ⊂ p`.
    pub fn direct_superclasses(&self, c: EntityId) -> BTreeSet<EntityId> {
        match self.node(c) {
            Some(n) => self.to_set(self.index.parents(n).iter().copied()),
            None => BTreeSet::new(),
        }
    }

    /// Children `d` with `d ⊂ c`.
    pub fn direct_subclasses(&self, c: EntityId) -> BTreeSet<EntityId> {
        match self.node(c) {
            Some(n) => self.to_set(self.index.children(n).iter().copied()),
            None => BTreeSet::new(),
        }
    }

    /// Every class reachable from `c` by one or more subclass edges. `c`
    /// itself is included only when it lies on a cycle.
    pub fn superclass_closure(&self, c: EntityId) -> BTreeSet<EntityId> {
        self.strict_closure(c, true)
    }

    /// Every class that reaches `c` by one or more subclass edges.
    pub fn subclass_closure(&self, c: EntityId) -> BTreeSet<EntityId> {
        self.strict_closure(c, false)
    }

    fn strict_closure(&self, c: EntityId, upward: bool) -> BTreeSet<EntityId> {
        let Some(n) = self.node(c) else {
            return BTreeSet::new();
        };
        let mut scratch = Scratch::new();
        let mut comps = Vec::new();
        self.index
            .strict_reach(self.index.component_of(n), upward, &mut scratch, &mut comps);
        self.to_set(
            comps
                .iter()
                .flat_map(|&k| self.index.component_members(k).iter().copied()),
        )
    }

    /// Items stated (P31) to be instances of `c` or of any subclass of it.
    pub fn instance_members(&self, c: EntityId) -> BTreeSet<EntityId> {
        let Some(n) = self.node(c) else {
            return BTreeSet::new();
        };
        let mut scratch = Scratch::new();
        let mut comps = Vec::new();
        let root = self.index.component_of(n);
        self.index.strict_reach(root, false, &mut scratch, &mut comps);
        if !self.index.is_cyclic(root) {
            comps.push(root);
        }
        let mut out = BTreeSet::new();
        for &k in &comps {
            for &class in self.index.component_members(k) {
                out.extend(self.index.stated_items(class).iter().map(|&i| self.entity(i)));
            }
        }
        out
    }

    /// Strongly connected components of the subclass relation and the
    /// acyclic quotient graph over them.
    pub fn condense_sccs(&self) -> Condensation {
        let t = &self.index;
        let components: Vec<Vec<EntityId>> = (0..t.component_count() as u32)
            .map(|k| t.component_members(k).iter().map(|&n| self.entity(n)).collect())
            .collect();
        let component_of = (0..self.nodes.len() as u32)
            .map(|n| (self.entity(n), t.component_of(n) as usize))
            .collect();
        let edges = (0..t.component_count() as u32)
            .flat_map(|k| t.component_parents(k).iter().map(move |&p| (k as usize, p as usize)))
            .collect();
        Condensation {
            components,
            component_of,
            edges,
        }
    }

    /// One shortest upward path `from ⊂ … ⊂ to` with at least one edge.
    /// Among shortest paths, each step takes the smallest next id.
    pub fn shortest_superclass_path(&self, from: EntityId, to: EntityId) -> Option<Vec<EntityId>> {
        let (src, dst) = (self.node(from)?, self.node(to)?);
        let t = &self.index;
        let mut dist: HashMap<u32, u32> = HashMap::new();
        let mut levels: Vec<Vec<u32>> = vec![vec![src]];
        let mut found = false;
        while !found {
            let mut next = Vec::new();
            let depth = levels.len() as u32;
            for &v in levels.last().expect("non-empty") {
                for &p in t.parents(v) {
                    if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(p) {
                        e.insert(depth);
                        next.push(p);
                        found |= p == dst;
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            levels.push(next);
        }
        let depth = levels.len() - 1;
        // nodes on some shortest path, per level
        let mut on_path: Vec<HashSet<u32>> = vec![HashSet::new(); depth + 1];
        on_path[depth].insert(dst);
        for k in (1..depth).rev() {
            let (lower, upper) = on_path.split_at_mut(k + 1);
            for &v in &levels[k] {
                if t.parents(v).iter().any(|p| upper[0].contains(p)) {
                    lower[k].insert(v);
                }
            }
        }
        let mut path = vec![from];
        let mut cur = src;
        for level in on_path.iter().skip(1) {
            cur = *t
                .parents(cur)
                .iter()
                .find(|p| level.contains(p))
                .expect("shortest path continues");
            path.push(self.entity(cur));
        }
        Some(path)
    }
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.labels == other.labels
            && self.subclass == other.subclass
            && self.instance == other.instance
            && self.unions == other.unions
            && self.empty == other.empty
    }
}

impl Eq for KnowledgeGraph {}

impl std::fmt::Debug for KnowledgeGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KnowledgeGraph").field("stats", &self.stats()).finish()
    }
}
