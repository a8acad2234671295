mod common;

use common::{check_removal, golden_dir, edits_dir, q, random_graph, GenParams};
use disjoint_audit::ingest::load_native_fixture;
use disjoint_audit::violations::analyze_all;
use disjoint_audit::whatif::{apply_edits, delta_report, parse_edits, Edit, WhatIfError};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_removal_matches_oracle(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let g = random_graph(seed, GenParams::SMALL);
        prop_assume!(!g.subclass.is_empty());
        let edge = *pick.get(&g.subclass);
        check_removal(&g, edge).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn remove_then_add_is_identity(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let g = random_graph(seed, GenParams::SMALL.with_cycles());
        let kg = g.build();
        let (c, p) = *pick.get(&g.subclass);
        let edits = [
            Edit::RemoveSubclassEdge { child: q(c), parent: q(p) },
            Edit::AddSubclassEdge { child: q(c), parent: q(p) },
        ];
        let overlay = apply_edits(&kg, &edits).unwrap();
        prop_assert!(overlay == kg);
        prop_assert!(delta_report(&kg, &edits).unwrap().totals.is_zero_change());
    }

    #[test]
    fn removal_is_idempotent(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let g = random_graph(seed, GenParams::SMALL);
        let kg = g.build();
        let (c, p) = *pick.get(&g.subclass);
        let once = Edit::RemoveSubclassEdge { child: q(c), parent: q(p) };
        let a = delta_report(&kg, std::slice::from_ref(&once)).unwrap();
        let b = delta_report(&kg, &[once.clone(), once]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn base_graph_is_untouched(seed in any::<u64>()) {
        let g = random_graph(seed, GenParams::SMALL);
        let kg = g.build();
        let before = analyze_all(&kg);
        let edits: Vec<Edit> = g.subclass.iter().take(5).map(|&(c, p)| Edit::RemoveSubclassEdge { child: q(c), parent: q(p) }).collect();
        let _ = apply_edits(&kg, &edits).unwrap();
        prop_assert_eq!(analyze_all(&kg), before);
    }
}

#[test]
fn empty_edit_list_changes_nothing() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let report = delta_report(&kg, &[]).unwrap();
    assert!(report.totals.is_zero_change());
    assert!(report.pairs.iter().all(|p| p.counts.is_zero_change()));
    assert_eq!(report.totals.culprits_before, report.totals.culprits_after);
}

#[test]
fn gene_fix_eliminates_the_gene_culprits() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let text = std::fs::read_to_string(edits_dir().join("gene_fix.json")).unwrap();
    let edits = parse_edits(&text).unwrap();
    let report = delta_report(&kg, &edits).unwrap();
    let gene_pair = report.pairs.iter().find(|p| p.a == q(9000001) && p.b == q(9000002)).unwrap();
    assert_eq!(gene_pair.counts.culprits_before, 11);
    assert_eq!(gene_pair.counts.culprits_eliminated, 11);
    assert_eq!(gene_pair.counts.subclass_violations_eliminated, 12);
    assert_eq!(gene_pair.counts.instance_violations_eliminated, 2);
    assert_eq!(report.totals.culprits_introduced, 0);
    assert_eq!(report.totals.culprits_after, 2);
    assert!(report.residual_culprits.iter().all(|c| c.class == q(9000104) || c.class == q(9000205)));
}

#[test]
fn marking_the_bow_empty_moves_violations_to_exempted() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let report = delta_report(&kg, &[Edit::MarkEmptyClass { class: q(9000104) }]).unwrap();
    let bow_pair = report.pairs.iter().find(|p| p.a == q(9000101)).unwrap();
    let c = &bow_pair.counts;
    assert_eq!((c.subclass_before, c.subclass_after), (27, 0));
    assert_eq!((c.exempted_before, c.exempted_after), (0, 27));
    assert_eq!(c.culprits_eliminated, 1);
    assert_eq!(c.instance_after, 1, "instance violations are never exempted");
}

#[test]
fn union_edits() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let drop_bow = [Edit::RemoveUnionMember { statement_id: "Q9000100-8d0b3c41".into(), member: q(9000102) }];
    let report = delta_report(&kg, &drop_bow).unwrap();
    assert_eq!(report.totals.subclass_violations_eliminated, 27);
    let gone = delta_report(&kg, &[Edit::RemoveUnion { statement_id: "Q35120-5c1f0a2e".into() }]).unwrap();
    assert_eq!(gone.totals.culprits_eliminated, 11);
}

#[test]
fn unknown_references_are_reported_with_their_index() {
    let kg = load_native_fixture(golden_dir()).unwrap();
    let edits = [
        Edit::MarkEmptyClass { class: q(9000104) },
        Edit::RemoveSubclassEdge { child: q(1), parent: q(2) },
    ];
    match apply_edits(&kg, &edits) {
        Err(WhatIfError::UnknownEntity { index: 1, .. }) => {}
        other => panic!("unexpected {:?}", other.map(|_| ())),
    }
    let bad = [Edit::RemoveUnion { statement_id: "nope".into() }];
    assert!(matches!(apply_edits(&kg, &bad), Err(WhatIfError::UnknownStatement { index: 0, .. })));
}
