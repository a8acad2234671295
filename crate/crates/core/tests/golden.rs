//! Byte-exact report goldens for the shipped fixture.
//!
//! The checked-in files come from the oracle, not from the engine. Set
//! `UPDATE_GOLDEN=1` to rewrite them from the oracle after reviewing a
//! fixture change.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use common::oracle::Oracle;
use common::{golden_dir, RawGraph, RawUnion};
use disjoint_audit::disjointness::{pair_order, DisjointPair};
use disjoint_audit::ingest::load_native_fixture;
use disjoint_audit::kg_store::EntityId;
use disjoint_audit::report::{emit_all_culprits, emit_all_disjoints, emit_all_numbers};
use disjoint_audit::violations::{summarize_all, Culprit, ViolationSummary};

const FILES: [&str; 3] = ["all_culprits.csv", "all_numbers.csv", "all_disjoints.csv"];

fn id(s: &str) -> EntityId {
    s.trim().parse().unwrap()
}

/// Reads the fixture TSVs directly and computes the three reports with the
/// oracle.
fn oracle_reports(dir: &Path) -> [Vec<u8>; 3] {
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    let rows = |text: &str| -> Vec<Vec<String>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split('\t').map(str::to_owned).collect())
            .collect()
    };
    let labels: HashMap<EntityId, String> = rows(&read("labels.tsv"))
        .into_iter()
        .map(|r| (id(&r[0]), r[1..].join("\t")))
        .collect();
    let subclass: Vec<(EntityId, EntityId)> = rows(&read("subclass.tsv")).iter().map(|r| (id(&r[0]), id(&r[1]))).collect();
    let instance: Vec<(EntityId, EntityId)> = rows(&read("instance.tsv")).iter().map(|r| (id(&r[0]), id(&r[1]))).collect();
    let unions: Vec<(EntityId, bool, Vec<EntityId>)> = rows(&read("disjoint_unions.tsv"))
        .iter()
        .map(|r| (id(&r[1]), r[2] == "deprecated", r[3].split(',').map(id).collect()))
        .collect();
    assert!(read("empty.tsv").trim().is_empty(), "the oracle reports assume no empty classes");

    // compact class numbering for the oracle
    let mut classes: BTreeSet<EntityId> = BTreeSet::new();
    for &(c, p) in &subclass {
        classes.insert(c);
        classes.insert(p);
    }
    classes.extend(instance.iter().map(|&(_, c)| c));
    for (_, _, m) in &unions {
        classes.extend(m.iter().copied());
    }
    let index: BTreeMap<EntityId, u32> = classes.iter().enumerate().map(|(i, &c)| (c, i as u32 + 1)).collect();
    let back: BTreeMap<u32, EntityId> = index.iter().map(|(&c, &i)| (i, c)).collect();
    let items: BTreeMap<EntityId, u32> = instance
        .iter()
        .map(|&(i, _)| i)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, i)| (i, common::ITEM_BASE + k as u32))
        .collect();
    let raw = RawGraph {
        classes: classes.len() as u32,
        subclass: subclass.iter().map(|(c, p)| (index[c], index[p])).collect(),
        instance: instance.iter().map(|(i, c)| (items[i], index[c])).collect(),
        unions: Vec::<RawUnion>::new(),
        empty: Vec::new(),
    };
    let oracle = Oracle::new(&raw);

    let mut pairs: BTreeMap<(EntityId, EntityId), BTreeSet<EntityId>> = BTreeMap::new();
    for (class, deprecated, members) in &unions {
        if *deprecated {
            continue;
        }
        for &x in members {
            for &y in members {
                if x.to_string() < y.to_string() {
                    pairs.entry((x, y)).or_default().insert(*class);
                }
            }
        }
    }
    let mut keys: Vec<_> = pairs.keys().copied().collect();
    keys.sort_by(pair_order);

    let mut disjoint_pairs = Vec::new();
    let mut summaries = Vec::new();
    let mut culprit_rows: Vec<(DisjointPair, Vec<Culprit>)> = Vec::new();
    for key in keys {
        let pair = DisjointPair {
            a: key.0,
            b: key.1,
            provenance: pairs[&key].iter().copied().collect(),
        };
        let e = oracle.expected(common::q(index[&key.0]), common::q(index[&key.1]));
        let culprits: Vec<Culprit> = e
            .culprits
            .iter()
            .map(|(c, group)| Culprit {
                class: back[&c.numeric_id()],
                pair: key,
                cycle_group: group.map(|g| back[&g.numeric_id()]),
            })
            .collect();
        summaries.push(ViolationSummary {
            pair: pair.clone(),
            n_culprits: culprits.len(),
            n_subclass_violations: e.active.len(),
            n_instance_violations: e.instance.len(),
            n_total: e.active.len() + e.instance.len(),
            n_exempted: e.exempted.len(),
        });
        culprit_rows.push((pair.clone(), culprits));
        disjoint_pairs.push(pair);
    }
    summaries.sort_by(|x, y| y.n_total.cmp(&x.n_total).then_with(|| pair_order(&x.pair.key(), &y.pair.key())));

    let mut out: [Vec<u8>; 3] = Default::default();
    emit_all_culprits(culprit_rows.iter().map(|(p, c)| (p, c.as_slice())), &labels, &mut out[0]).unwrap();
    emit_all_numbers(&summaries, &labels, &mut out[1], true).unwrap();
    emit_all_disjoints(&disjoint_pairs, &labels, &mut out[2]).unwrap();
    out
}

fn engine_reports(dir: &Path) -> [Vec<u8>; 3] {
    let kg = load_native_fixture(dir).unwrap();
    let s = summarize_all(&kg);
    let mut out: [Vec<u8>; 3] = Default::default();
    let rows = s.findings.iter().map(|f| (&f.summary.pair, f.culprits.as_slice()));
    emit_all_culprits(rows, &kg, &mut out[0]).unwrap();
    emit_all_numbers(s.summaries(), &kg, &mut out[1], true).unwrap();
    emit_all_disjoints(&disjoint_audit::disjointness::all_disjoint_pairs(&kg), &kg, &mut out[2]).unwrap();
    out
}

fn expected(name: &str) -> Vec<u8> {
    std::fs::read(golden_dir().join("expected").join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn oracle_reproduces_checked_in_goldens() {
    let dir = golden_dir();
    let reports = oracle_reports(&dir);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        for (name, bytes) in FILES.iter().zip(&reports) {
            std::fs::write(dir.join("expected").join(name), bytes).unwrap();
        }
    }
    for (name, bytes) in FILES.iter().zip(&reports) {
        assert_eq!(String::from_utf8_lossy(bytes), String::from_utf8_lossy(&expected(name)), "{name}");
    }
}

#[test]
fn engine_reports_match_goldens_byte_for_byte() {
    let reports = engine_reports(&golden_dir());
    for (name, bytes) in FILES.iter().zip(&reports) {
        assert_eq!(String::from_utf8_lossy(bytes), String::from_utf8_lossy(&expected(name)), "{name}");
        assert_eq!(bytes, &expected(name), "{name}");
    }
}

#[test]
fn bow_pair_has_one_culprit_and_27_violations() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let s = summarize_all(&kg);
    let bow = s.find(id("Q9000101"), id("Q9000102")).expect("gun / draft weapon pair");
    assert_eq!(bow.summary.n_culprits, 1);
    assert_eq!(bow.summary.n_subclass_violations, 27);
    assert_eq!(bow.culprits[0].class, id("Q9000104"));
    assert_eq!(kg.subclass_closure(id("Q9000104")).len(), 26);
}

#[test]
fn fixture_shape() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let s = summarize_all(&kg);
    assert_eq!(s.totals.pairs, 10);
    assert_eq!(s.totals.pairs_with_violations, 3);
    assert_eq!(s.totals.culprits, 13);
    assert_eq!(s.totals.subclass_violations, 42);
    assert_eq!(s.totals.instance_violations, 3);
    // the gene miniature has 20 classes
    let gene_classes: BTreeSet<EntityId> = kg
        .subclass_edges()
        .flat_map(|(c, p)| [c, p])
        .filter(|e| e.numeric_id() < 9_000_100)
        .collect();
    assert_eq!(gene_classes.len(), 20);
    let vehicle = kg.disjoint_unions().iter().find(|u| u.union_class == id("Q9000200") && u.is_active()).unwrap();
    assert_eq!(vehicle.members().len(), 4);
}
