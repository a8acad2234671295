//! Deterministic synthetic taxonomies for load testing.
//!
//! Classes form a 4-ary tree (class `i` has primary parent `(i - 1) / 4`)
//! with extra parents drawn from a small window around the primary parent
//! on the same level, so closures stay local. Items carry a fixed number of
//! instance edges to uniformly chosen classes. Disjoint unions group the
//! children of one class, sized greedily so that exactly the requested
//! number of pairs is induced.
//!
//! The same fact stream feeds [`build_graph`] and [`SyntheticDump`], an
//! N-Triples reader that never materialises its output.

use std::io::{self, BufRead, Read};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disjointness::DisjointUnion;
use crate::ingest::rdf::{PQ_P11260, P_P2738, RDFS_LABEL, STATEMENT_IRI_PREFIX, WDT_P279, WDT_P31, WIKIBASE_RANK};
use crate::kg_store::{EntityId, GraphBuilder, KnowledgeGraph, Rank};

const CLASS_BASE: u32 = 1_000_000;
const UNION_BASE: u32 = 900_000;
const ITEM_BASE: u32 = 20_000_000;
const FANOUT: u64 = 4;

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub classes: u32,
    /// Extra parents added per two classes below the second level.
    pub extra_parents_per_two: u32,
    /// Half-width of the window extra parents are drawn from.
    pub window: u32,
    pub items: u32,
    pub instances_per_item: u32,
    pub pairs: u32,
    pub labels: bool,
    pub seed: u64,
}

impl SynthConfig {
    /// About 5M subclass edges, 20M instance edges and 1,000 pairs.
    pub fn large() -> Self {
        SynthConfig {
            classes: 2_000_004,
            extra_parents_per_two: 3,
            window: 6,
            items: 10_000_000,
            instances_per_item: 2,
            pairs: 1000,
            labels: false,
            seed: 7,
        }
    }

    pub fn small() -> Self {
        SynthConfig {
            classes: 20_000,
            items: 50_000,
            pairs: 100,
            labels: true,
            ..Self::large()
        }
    }

    /// Union sizes, largest first, inducing exactly `pairs` pairs.
    pub fn union_sizes(&self) -> Vec<u32> {
        let mut left = self.pairs;
        let mut sizes = Vec::new();
        for k in (2..=FANOUT as u32).rev() {
            let per = k * (k - 1) / 2;
            while left >= per {
                sizes.push(k);
                left -= per;
            }
        }
        sizes
    }
}

pub fn class_id(i: u32) -> EntityId {
    EntityId::item(CLASS_BASE + i)
}

pub fn item_id(j: u32) -> EntityId {
    EntityId::item(ITEM_BASE + j)
}

pub fn union_id(u: u32) -> EntityId {
    EntityId::item(UNION_BASE + u)
}

/// First index of tree level `d`.
fn level_start(d: u32) -> u64 {
    (FANOUT.pow(d) - 1) / (FANOUT - 1)
}

fn level_of(i: u64) -> u32 {
    let mut d = 0;
    while level_start(d + 1) <= i {
        d += 1;
    }
    d
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    Label(EntityId, String),
    Subclass(EntityId, EntityId),
    Instance(EntityId, EntityId),
    Union {
        statement: String,
        class: EntityId,
        members: Vec<EntityId>,
    },
}

enum Phase {
    Classes(u32),
    Items(u32),
    Unions(usize),
    Done,
}

/// Lazy, seeded stream of every fact of a synthetic graph.
pub struct Facts {
    cfg: SynthConfig,
    rng: ChaCha8Rng,
    phase: Phase,
    pending: Vec<Fact>,
    sizes: Vec<u32>,
    union_parents: Vec<u32>,
}

impl Facts {
    pub fn new(cfg: SynthConfig) -> Self {
        assert!(cfg.classes >= 1, "at least one class");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let sizes = cfg.union_sizes();
        let union_parents = pick_union_parents(&cfg, &sizes, &mut rng);
        Facts {
            cfg,
            rng,
            phase: Phase::Classes(0),
            pending: Vec::new(),
            sizes,
            union_parents,
        }
    }

    fn class_facts(&mut self, i: u32) {
        let id = class_id(i);
        if i > 0 {
            let p = (i as u64 - 1) / FANOUT;
            self.pending.push(Fact::Subclass(id, class_id(p as u32)));
            let extras = extras_for(&self.cfg, i);
            let d = level_of(p);
            let (lo, hi) = (level_start(d), level_start(d + 1).min(self.cfg.classes as u64));
            let w = self.cfg.window as u64;
            let (from, to) = (p.saturating_sub(w).max(lo), (p + w + 1).min(hi));
            let span = (to - from) as usize;
            if extras > 0 && span > 1 {
                let want = (extras as usize).min(span - 1);
                let mut chosen = 0;
                for k in sample(&mut self.rng, span, (want + 1).min(span)) {
                    let q = from + k as u64;
                    if q != p && chosen < want {
                        self.pending.push(Fact::Subclass(id, class_id(q as u32)));
                        chosen += 1;
                    }
                }
            }
        }
        if self.cfg.labels {
            self.pending.push(Fact::Label(id, format!("class {i}")));
        }
    }

    fn item_facts(&mut self, j: u32) {
        let id = item_id(j);
        let n = self.cfg.classes as usize;
        let k = (self.cfg.instances_per_item as usize).min(n);
        for c in sample(&mut self.rng, n, k) {
            self.pending.push(Fact::Instance(id, class_id(c as u32)));
        }
    }

    fn union_fact(&mut self, u: usize) {
        let p = self.union_parents[u] as u64;
        let size = self.sizes[u] as u64;
        let members = (1..=size).map(|k| class_id((FANOUT * p + k) as u32)).collect();
        self.pending.push(Fact::Union {
            statement: format!("Q{}-synth-{u}", UNION_BASE + u as u32),
            class: union_id(u as u32),
            members,
        });
        if self.cfg.labels {
            self.pending.push(Fact::Label(union_id(u as u32), format!("union {u}")));
        }
    }
}

/// Extra parents of class `i`: none on the first two levels, otherwise
/// alternating so that every two classes get `extra_parents_per_two`.
fn extras_for(cfg: &SynthConfig, i: u32) -> u32 {
    if (i as u64) < level_start(2) {
        return 0;
    }
    let half = cfg.extra_parents_per_two / 2;
    half + if i.is_multiple_of(2) { cfg.extra_parents_per_two % 2 } else { 0 }
}

/// Distinct parents with a full set of children, spread over the
/// shallowest level that has room for four times as many.
fn pick_union_parents(cfg: &SynthConfig, sizes: &[u32], rng: &mut ChaCha8Rng) -> Vec<u32> {
    if sizes.is_empty() {
        return Vec::new();
    }
    let n = cfg.classes as u64;
    assert!(n > FANOUT, "too few classes for unions");
    // parents p with all children 4p+1..=4p+4 present
    let full = (n - 1 - FANOUT) / FANOUT + 1;
    let want = sizes.len() as u64;
    let (lo, hi) = (1..)
        .map(|d| (level_start(d), level_start(d + 1).min(full)))
        .take_while(|&(lo, _)| lo < full)
        .find(|&(lo, hi)| hi - lo >= 4 * want)
        .unwrap_or((0, full));
    assert!(hi - lo >= want, "too few classes for {want} unions");
    sample(rng, (hi - lo) as usize, want as usize)
        .into_iter()
        .map(|k| (lo + k as u64) as u32)
        .collect()
}

impl Iterator for Facts {
    type Item = Fact;

    fn next(&mut self) -> Option<Fact> {
        loop {
            if let Some(f) = self.pending.pop() {
                return Some(f);
            }
            match self.phase {
                Phase::Classes(i) if i < self.cfg.classes => {
                    self.class_facts(i);
                    self.phase = Phase::Classes(i + 1);
                }
                Phase::Classes(_) => self.phase = Phase::Items(0),
                Phase::Items(j) if j < self.cfg.items => {
                    self.item_facts(j);
                    self.phase = Phase::Items(j + 1);
                }
                Phase::Items(_) => self.phase = Phase::Unions(0),
                Phase::Unions(u) if u < self.sizes.len() => {
                    self.union_fact(u);
                    self.phase = Phase::Unions(u + 1);
                }
                Phase::Unions(_) => self.phase = Phase::Done,
                Phase::Done => return None,
            }
        }
    }
}

pub fn build_graph(cfg: &SynthConfig) -> KnowledgeGraph {
    let mut b = GraphBuilder::new();
    for fact in Facts::new(cfg.clone()) {
        match fact {
            Fact::Label(id, l) => b.add_label(id, &l),
            Fact::Subclass(c, p) => b.add_subclass(c, p),
            Fact::Instance(i, c) => b.add_instance(i, c),
            Fact::Union {
                statement,
                class,
                members,
            } => b.add_union(DisjointUnion::new(statement, class, members, Rank::Normal)),
        }
    }
    b.build()
}

/// An N-Triples rendering of a synthetic graph, padded to an exact line
/// count with lines the loader ignores or has already seen: other
/// predicates, literal objects, comments and repeated subclass edges.
///
/// If `lines` is smaller than the graph's own line count the graph is
/// truncated.
pub struct SyntheticDump {
    facts: Facts,
    classes: u32,
    remaining: u64,
    noise_every: u64,
    emitted: u64,
    rng: ChaCha8Rng,
    buf: Vec<u8>,
    pos: usize,
}

impl SyntheticDump {
    /// `noise_every`: one padding line after every so many graph lines, in
    /// addition to the padding at the end.
    pub fn new(cfg: SynthConfig, lines: u64, noise_every: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        SyntheticDump {
            classes: cfg.classes,
            facts: Facts::new(cfg),
            remaining: lines,
            noise_every: noise_every.max(1),
            emitted: 0,
            rng,
            buf: Vec::with_capacity(1 << 16),
            pos: 0,
        }
    }

    fn push_line(&mut self, line: std::fmt::Arguments<'_>) {
        use std::io::Write;
        if self.remaining == 0 {
            return;
        }
        self.buf.write_fmt(line).expect("write to vec");
        self.buf.push(b'\n');
        self.remaining -= 1;
        self.emitted += 1;
    }

    fn push_noise(&mut self) {
        let i = self.rng.gen_range(0..self.classes);
        let c = class_id(i).iri();
        match self.rng.gen_range(0..4) {
            0 if i > 0 => {
                let p = class_id((i - 1) / FANOUT as u32).iri();
                self.push_line(format_args!("<{c}> <{WDT_P279}> <{p}> ."))
            }
            1 => self.push_line(format_args!("<{c}> <http://schema.org/description> \"synthetic class {i}\"@en .")),
            2 => self.push_line(format_args!("<{c}> <{WDT_P31}> \"not an entity\" .")),
            _ => {
                let e = self.emitted;
                self.push_line(format_args!("# padding {e}"))
            }
        }
    }

    fn push_fact(&mut self, f: Fact) {
        match f {
            Fact::Label(id, l) => self.push_line(format_args!("<{}> <{RDFS_LABEL}> \"{l}\"@en .", id.iri())),
            Fact::Subclass(c, p) => self.push_line(format_args!("<{}> <{WDT_P279}> <{}> .", c.iri(), p.iri())),
            Fact::Instance(i, c) => self.push_line(format_args!("<{}> <{WDT_P31}> <{}> .", i.iri(), c.iri())),
            Fact::Union {
                statement,
                class,
                members,
            } => {
                let s = format!("{STATEMENT_IRI_PREFIX}{statement}");
                self.push_line(format_args!("<{}> <{P_P2738}> <{s}> .", class.iri()));
                self.push_line(format_args!("<{s}> <{WIKIBASE_RANK}> <{}> .", Rank::Normal.iri()));
                for m in members {
                    self.push_line(format_args!("<{s}> <{PQ_P11260}> <{}> .", m.iri()));
                }
            }
        }
    }

    fn refill(&mut self) {
        self.buf.clear();
        self.pos = 0;
        while self.buf.len() < (1 << 16) - 512 && self.remaining > 0 {
            match self.facts.next() {
                Some(f) => {
                    self.push_fact(f);
                    if self.emitted.is_multiple_of(self.noise_every) {
                        self.push_noise();
                    }
                }
                None => self.push_noise(),
            }
        }
    }
}

impl Read for SyntheticDump {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        let avail = self.fill_buf()?;
        let n = avail.len().min(out.len());
        out[..n].copy_from_slice(&avail[..n]);
        self.consume(n);
        Ok(n)
    }
}

impl BufRead for SyntheticDump {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        if self.pos >= self.buf.len() {
            self.refill();
        }
        Ok(&self.buf[self.pos..])
    }

    fn consume(&mut self, amt: usize) {
        self.pos = (self.pos + amt).min(self.buf.len());
    }
}
