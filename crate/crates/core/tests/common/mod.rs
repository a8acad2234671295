//! Shared test support: a plain-data graph description, a random
//! generator for it, a brute-force oracle and a local SPARQL endpoint.

#![allow(dead_code)]

pub mod endpoint;
pub mod oracle;

use std::path::PathBuf;

use disjoint_audit::disjointness::DisjointUnion;
use disjoint_audit::kg_store::{EntityId, GraphBuilder, KnowledgeGraph, Rank};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ITEM_BASE: u32 = 100_000;
pub const UNION_BASE: u32 = 900_000;

pub fn q(n: u32) -> EntityId {
    EntityId::item(n)
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden")
}

pub fn edits_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/edits")
}

#[derive(Clone, Debug)]
pub struct RawUnion {
    pub class: u32,
    pub members: Vec<u32>,
    pub deprecated: bool,
}

/// A graph as plain numbers. Classes are `1..=classes`, items start at
/// `ITEM_BASE`, union classes at `UNION_BASE`.
#[derive(Clone, Debug, Default)]
pub struct RawGraph {
    pub classes: u32,
    pub subclass: Vec<(u32, u32)>,
    pub instance: Vec<(u32, u32)>,
    pub unions: Vec<RawUnion>,
    pub empty: Vec<u32>,
}

impl RawGraph {
    pub fn build(&self) -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for c in 1..=self.classes {
            b.add_node(q(c));
        }
        for &(c, p) in &self.subclass {
            b.add_subclass(q(c), q(p));
        }
        for &(i, c) in &self.instance {
            b.add_instance(q(i), q(c));
        }
        for &e in &self.empty {
            b.mark_empty(q(e));
        }
        for (k, u) in self.unions.iter().enumerate() {
            let rank = if u.deprecated { Rank::Deprecated } else { Rank::Normal };
            b.add_union(DisjointUnion::new(
                format!("S{k}"),
                q(u.class),
                u.members.iter().map(|&m| q(m)),
                rank,
            ));
        }
        b.build()
    }

    pub fn without_subclass_edge(&self, edge: (u32, u32)) -> RawGraph {
        let mut g = self.clone();
        g.subclass.retain(|&e| e != edge);
        g
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub max_classes: u32,
    pub max_subclass: usize,
    pub max_instance: usize,
    pub cycles: bool,
    pub empties: bool,
}

impl GenParams {
    pub const ACCEPTANCE: GenParams = GenParams {
        max_classes: 2000,
        max_subclass: 10_000,
        max_instance: 5000,
        cycles: false,
        empties: true,
    };

    pub const SMALL: GenParams = GenParams {
        max_classes: 60,
        max_subclass: 200,
        max_instance: 80,
        cycles: false,
        empties: true,
    };

    pub fn with_cycles(self) -> Self {
        GenParams { cycles: true, ..self }
    }
}

/// Random layered graph. Edges point from a higher class number to a
/// lower one unless cycles are requested, in which case a few ancestors
/// are made subclasses of their descendants. Union members favour low
/// numbers so that they have large subclass trees.
pub fn random_graph(seed: u64, p: GenParams) -> RawGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(8.min(p.max_classes)..=p.max_classes);
    // leave room for the injected back edges so truncation never drops them
    let reserve = if p.cycles { 5 } else { 0 };
    let max_edges = (p.max_subclass - reserve).min((n as usize) * 5);
    let n_edges = rng.gen_range(n as usize - 1..=max_edges.max(n as usize - 1));
    let mut subclass = Vec::with_capacity(n_edges);
    // primary[c] is the first parent of c; every class but 1 has one
    let mut primary = vec![0u32; n as usize + 1];
    for c in 2..=n {
        primary[c as usize] = rng.gen_range(1..c);
        subclass.push((c, primary[c as usize]));
    }
    while subclass.len() < n_edges {
        let c = rng.gen_range(2..=n);
        subclass.push((c, rng.gen_range(1..c)));
    }
    if p.cycles {
        // an ancestor made a subclass of its descendant closes a cycle
        for _ in 0..rng.gen_range(1..=4) {
            let low = rng.gen_range(2..=n);
            let mut up = primary[low as usize];
            while up > 1 && rng.gen_bool(0.5) {
                up = primary[up as usize];
            }
            subclass.push((up, low));
        }
        if rng.gen_bool(0.3) {
            let c = rng.gen_range(1..=n);
            subclass.push((c, c));
        }
    }
    subclass.sort_unstable();
    subclass.dedup();
    subclass.truncate(p.max_subclass);

    let n_items = rng.gen_range(1..=(p.max_instance as u32 / 2).max(1));
    let n_inst = rng.gen_range(0..=p.max_instance);
    let instance = (0..n_inst)
        .map(|_| (ITEM_BASE + rng.gen_range(0..n_items), rng.gen_range(1..=n)))
        .collect();

    let head = (n / 8).max(6).min(n);
    let unions = (0..rng.gen_range(1..=5))
        .map(|u| {
            let size = rng.gen_range(2..=6usize).min(head as usize);
            let mut pool: Vec<u32> = (1..=head).collect();
            pool.shuffle(&mut rng);
            pool.truncate(size);
            RawUnion {
                class: UNION_BASE + u,
                members: pool,
                deprecated: rng.gen_bool(0.1),
            }
        })
        .collect();

    let empty = if p.empties {
        (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(1..=n)).collect()
    } else {
        Vec::new()
    };

    RawGraph {
        classes: n,
        subclass,
        instance,
        unions,
        empty,
    }
}

/// Checks pairs, violations, exemption, instance violations and culprits
/// of every pair against the oracle. Returns the number of pairs checked.
pub fn compare_with_oracle(g: &RawGraph) -> Result<usize, String> {
    use disjoint_audit::disjointness::all_disjoint_pairs;
    use disjoint_audit::violations::{analyze_all, culprits, instance_violations, subclass_violations};

    let kg = g.build();
    let o = oracle::Oracle::new(g);
    let pairs = all_disjoint_pairs(&kg);
    let keys: Vec<_> = pairs.iter().map(|p| p.key()).collect();
    let mut want_keys: Vec<_> = o.pairs.keys().copied().collect();
    want_keys.sort_by(disjoint_audit::disjointness::pair_order);
    if keys != want_keys {
        return Err(format!("pairs differ: engine {keys:?}, oracle {want_keys:?}"));
    }
    for p in &pairs {
        let prov: std::collections::BTreeSet<_> = p.provenance.iter().copied().collect();
        if prov != o.pairs[&p.key()] || prov.len() != p.provenance.len() {
            return Err(format!("provenance of {}-{}: {:?}", p.a, p.b, p.provenance));
        }
    }
    for an in analyze_all(&kg) {
        let e = o.expected(an.pair.a, an.pair.b);
        let tag = format!("pair {}-{}", an.pair.a, an.pair.b);
        let all = subclass_violations(&kg, &an.pair);
        if all != e.violations {
            return Err(format!("{tag}: subclass violations {all:?} != {:?}", e.violations));
        }
        let active: std::collections::BTreeSet<_> = an.active.iter().copied().collect();
        let exempted: std::collections::BTreeSet<_> = an.exempted.iter().copied().collect();
        if active != e.active || exempted != e.exempted {
            return Err(format!("{tag}: active/exempted split differs"));
        }
        let inst = instance_violations(&kg, &an.pair);
        let inst2: std::collections::BTreeSet<_> = an.instance.iter().copied().collect();
        if inst != e.instance || inst2 != e.instance {
            return Err(format!("{tag}: instance violations {inst:?} != {:?}", e.instance));
        }
        let got: std::collections::BTreeMap<_, _> =
            culprits(&kg, &an.pair).iter().map(|c| (c.class, c.cycle_group)).collect();
        if got != e.culprits {
            return Err(format!("{tag}: culprits {got:?} != {:?}", e.culprits));
        }
        let active_culprits: std::collections::BTreeSet<_> = an.culprits.iter().map(|c| c.class).collect();
        if active_culprits != e.active_culprits {
            return Err(format!("{tag}: active culprits differ"));
        }
    }
    Ok(pairs.len())
}

/// Every violation sits at or below some culprit, no culprit sits strictly
/// below another, and the violations are exactly the culprits together with
/// their violating subclasses.
pub fn check_coverage(g: &RawGraph) -> Result<(), String> {
    use disjoint_audit::disjointness::all_disjoint_pairs;
    use disjoint_audit::violations::{culprits, subclass_violations};
    use std::collections::BTreeSet;

    let kg = g.build();
    let o = oracle::Oracle::new(g);
    for p in all_disjoint_pairs(&kg) {
        let v = subclass_violations(&kg, &p);
        let cs: Vec<u32> = culprits(&kg, &p).iter().map(|c| c.class.numeric_id()).collect();
        for x in &v {
            let x = x.numeric_id();
            if !cs.iter().any(|&c| c == x || o.below(x, c)) {
                return Err(format!("{} has no culprit at or above it", q(x)));
            }
        }
        // minimal: dropping any culprit would leave its own class uncovered
        for &c in &cs {
            if let Some(&d) = cs.iter().find(|&&d| d != c && o.below(c, d) && !o.below(d, c)) {
                return Err(format!("culprit {} lies strictly below culprit {}", q(c), q(d)));
            }
        }
        let mut union: BTreeSet<EntityId> = BTreeSet::new();
        for &c in &cs {
            union.insert(q(c));
            union.extend(o.subclasses(c).into_iter().map(q).filter(|s| v.contains(s)));
        }
        if union != v {
            return Err(format!("pair {}-{}: culprit cover {union:?} != {v:?}", p.a, p.b));
        }
    }
    Ok(())
}

/// Delta expected for removing `edge`, from two oracle runs, keyed by pair
/// and listing only pairs with violations before or after.
pub fn oracle_delta(
    g: &RawGraph,
    edge: (u32, u32),
) -> std::collections::BTreeMap<(EntityId, EntityId), disjoint_audit::whatif::DeltaCounts> {
    let before = oracle::Oracle::new(g);
    let after = oracle::Oracle::new(&g.without_subclass_edge(edge));
    let mut out = std::collections::BTreeMap::new();
    for &(a, b) in before.pairs.keys() {
        let (x, y) = (before.expected(a, b), after.expected(a, b));
        let d = disjoint_audit::whatif::DeltaCounts {
            culprits_before: x.active_culprits.len(),
            culprits_after: y.active_culprits.len(),
            culprits_eliminated: x.active_culprits.iter().filter(|c| !y.active.contains(c)).count(),
            culprits_introduced: y.active_culprits.difference(&x.active_culprits).count(),
            subclass_before: x.active.len(),
            subclass_after: y.active.len(),
            subclass_violations_eliminated: x.active.difference(&y.active).count(),
            subclass_violations_introduced: y.active.difference(&x.active).count(),
            instance_before: x.instance.len(),
            instance_after: y.instance.len(),
            instance_violations_eliminated: x.instance.difference(&y.instance).count(),
            instance_violations_introduced: y.instance.difference(&x.instance).count(),
            exempted_before: x.exempted.len(),
            exempted_after: y.exempted.len(),
        };
        let any = d.culprits_before + d.culprits_after + d.subclass_before + d.subclass_after
            + d.instance_before + d.instance_after + d.exempted_before + d.exempted_after;
        if any > 0 {
            out.insert((a, b), d);
        }
    }
    out
}

/// Checks `delta_report` for removing `edge` against the oracle and
/// against two independent `summarize_all` runs.
pub fn check_removal(g: &RawGraph, edge: (u32, u32)) -> Result<(), String> {
    use disjoint_audit::violations::summarize_all;
    use disjoint_audit::whatif::{delta_report, Edit};

    let kg = g.build();
    let edit = Edit::RemoveSubclassEdge { child: q(edge.0), parent: q(edge.1) };
    let report = delta_report(&kg, &[edit]).map_err(|e| e.to_string())?;
    let got: std::collections::BTreeMap<_, _> = report.pairs.iter().map(|p| ((p.a, p.b), p.counts.clone())).collect();
    let want = oracle_delta(g, edge);
    if got != want {
        return Err(format!("removing {edge:?}: delta {got:?} != oracle {want:?}"));
    }
    let s0 = summarize_all(&kg);
    let s1 = summarize_all(&g.without_subclass_edge(edge).build());
    for p in &report.pairs {
        let count = |s: &disjoint_audit::violations::AuditSummary| {
            s.find(p.a, p.b)
                .map(|f| (f.summary.n_culprits, f.summary.n_subclass_violations, f.summary.n_instance_violations))
                .unwrap_or((0, 0, 0))
        };
        let c = &p.counts;
        if count(&s0) != (c.culprits_before, c.subclass_before, c.instance_before)
            || count(&s1) != (c.culprits_after, c.subclass_after, c.instance_after)
        {
            return Err(format!("removing {edge:?}: pair {}-{} disagrees with summarize_all", p.a, p.b));
        }
    }
    let t = &report.totals;
    if (t.culprits_before, t.subclass_before, t.instance_before)
        != (s0.totals.culprits, s0.totals.subclass_violations, s0.totals.instance_violations)
        || (t.culprits_after, t.subclass_after, t.instance_after)
            != (s1.totals.culprits, s1.totals.subclass_violations, s1.totals.instance_violations)
    {
        return Err(format!("removing {edge:?}: totals disagree with summarize_all"));
    }
    Ok(())
}

/// Marks one active culprit empty and checks that the pair's subclass
/// violations split into active and exempted exactly along the culprit's
/// downward closure. Returns `Ok(false)` when the graph has no culprit.
pub fn check_exemption(g: &RawGraph, pick: usize) -> Result<bool, String> {
    use disjoint_audit::violations::analyze_all;
    use std::collections::BTreeSet;

    let with_culprits: Vec<_> = analyze_all(&g.build()).into_iter().filter(|a| !a.culprits.is_empty()).collect();
    if with_culprits.is_empty() {
        return Ok(false);
    }
    let an = &with_culprits[pick % with_culprits.len()];
    let culprit = an.culprits[pick % an.culprits.len()].class;
    let before: BTreeSet<_> = an.active.iter().copied().collect();

    let mut marked = g.clone();
    marked.empty.push(culprit.numeric_id());
    let after = analyze_all(&marked.build())
        .into_iter()
        .find(|a| a.pair == an.pair)
        .ok_or("pair vanished after marking a class empty")?;
    let active: BTreeSet<_> = after.active.iter().copied().collect();
    let exempted: BTreeSet<_> = after.exempted.iter().copied().collect();
    let ctx = format!("pair {} {} culprit {culprit}", an.pair.a, an.pair.b);
    if !active.is_disjoint(&exempted) {
        return Err(format!("{ctx}: active and exempted overlap"));
    }
    if active.union(&exempted).copied().collect::<BTreeSet<_>>() != before {
        return Err(format!("{ctx}: active + exempted differs from the unmarked violations"));
    }
    let o = oracle::Oracle::new(&marked);
    for v in &before {
        let below = *v == culprit || o.below(v.numeric_id(), culprit.numeric_id());
        if exempted.contains(v) != below {
            return Err(format!("{ctx}: {v} exempted = {}, below culprit = {below}", exempted.contains(v)));
        }
    }
    if !after.exempted_culprits.iter().any(|c| c.class == culprit) {
        return Err(format!("{ctx}: culprit not listed as exempted"));
    }
    if after.instance != an.instance {
        return Err(format!("{ctx}: instance violations changed"));
    }
    Ok(true)
}

/// The pair extraction listing, trailing blanks included.
pub const PAIR_EXTRACTION_LISTING: &str = "SELECT DISTINCT ?class ?e1 ?e2 WHERE {
  ?class p:P2738 ?l .
  MINUS { ?l wikibase:rank wikibase:DeprecatedRank . }
  ?l pq:P11260 ?e1 .
  ?l pq:P11260 ?e2 .
  FILTER ( ( str(?e1) < str(?e2) ) )
} ORDER BY ?class\x20\x20\x20
";

/// The culprit count listing for gene / abstract object.
pub const CULPRIT_COUNT_GENE_LISTING: &str = "SELECT (COUNT(DISTINCT ?class) AS ?count) WHERE {
  { SELECT  ?class WHERE {
      ?class wdt:P279+ wd:Q7187 .
      ?class wdt:P279+ wd:Q4406616 .
  } }
  MINUS {
    ?class wdt:P279 ?parent .
    ?parent wdt:P279+ wd:Q7187 .
    ?parent wdt:P279+ wd:Q4406616 .
} }\x20\x20
";
