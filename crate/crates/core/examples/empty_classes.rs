//! Shows how marking a class empty exempts it and everything below it from
//! subclass violations, while instance violations stay.
//!
//! ```text
//! cargo run --example empty_classes
//! ```

use disjoint_audit::disjointness::DisjointUnion;
use disjoint_audit::kg_store::{EntityId, GraphBuilder, Rank};
use disjoint_audit::violations::analyze_all;

fn main() {
    let q = |n: u32| EntityId::item(n);
    let build = |mark_empty: bool| {
        let mut b = GraphBuilder::new();
        // 3 sits under both disjoint classes 1 and 2; 4 and 5 inherit that
        b.add_subclass(q(3), q(1));
        b.add_subclass(q(3), q(2));
        b.add_subclass(q(4), q(3));
        b.add_subclass(q(5), q(4));
        b.add_instance(q(10), q(5));
        b.add_union(DisjointUnion::new("Q9-u", q(9), [q(1), q(2)], Rank::Normal));
        if mark_empty {
            b.mark_empty(q(3));
        }
        b.build()
    };
    for mark in [false, true] {
        let an = &analyze_all(&build(mark))[0];
        let ids = |v: &[EntityId]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
        println!("Q3 marked empty: {mark}");
        println!("  active    {}", ids(&an.active));
        println!("  exempted  {}", ids(&an.exempted));
        println!("  instance  {}", ids(&an.instance));
        println!("  culprits  {}", an.culprits.iter().map(|c| c.class.to_string()).collect::<Vec<_>>().join(" "));
    }
}
