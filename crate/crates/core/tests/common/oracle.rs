//! Brute-force reference answers computed straight from edge lists with
//! plain depth-first search over dense bitsets. Shares nothing with the
//! engine beyond the entity id type.

use std::collections::{BTreeMap, BTreeSet};

use disjoint_audit::kg_store::EntityId;

use super::{q, RawGraph};

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n / 64 + 1])
    }
    fn get(&self, i: u32) -> bool {
        self.0[i as usize / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: u32) {
        self.0[i as usize / 64] |= 1 << (i % 64);
    }
    fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| (w * 64 + b) as u32)
        })
    }
}

pub struct Oracle {
    n: u32,
    /// `up[v]`: classes reachable from `v` by one or more subclass edges.
    up: Vec<Bits>,
    /// Direct classes of each item.
    item_classes: BTreeMap<u32, BTreeSet<u32>>,
    empty: BTreeSet<u32>,
    pub pairs: BTreeMap<(EntityId, EntityId), BTreeSet<EntityId>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expected {
    pub violations: BTreeSet<EntityId>,
    pub active: BTreeSet<EntityId>,
    pub exempted: BTreeSet<EntityId>,
    pub instance: BTreeSet<EntityId>,
    /// Every culprit with its cycle group.
    pub culprits: BTreeMap<EntityId, Option<EntityId>>,
    pub active_culprits: BTreeSet<EntityId>,
}

fn render_key(x: EntityId, y: EntityId) -> Option<(EntityId, EntityId)> {
    use std::cmp::Ordering::*;
    match x.to_string().cmp(&y.to_string()) {
        Less => Some((x, y)),
        Greater => Some((y, x)),
        Equal => None,
    }
}

impl Oracle {
    pub fn new(g: &RawGraph) -> Self {
        let n = g.classes;
        let mut parents: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
        for &(c, p) in &g.subclass {
            parents[c as usize].push(p);
        }
        let mut up = Vec::with_capacity(n as usize + 1);
        for v in 0..=n {
            let mut seen = Bits::new(n as usize + 1);
            let mut stack: Vec<u32> = parents[v as usize].clone();
            while let Some(x) = stack.pop() {
                if !seen.get(x) {
                    seen.set(x);
                    stack.extend(&parents[x as usize]);
                }
            }
            up.push(seen);
        }
        let mut item_classes: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for &(i, c) in &g.instance {
            item_classes.entry(i).or_default().insert(c);
        }
        let mut pairs: BTreeMap<(EntityId, EntityId), BTreeSet<EntityId>> = BTreeMap::new();
        for u in g.unions.iter().filter(|u| !u.deprecated) {
            for &x in &u.members {
                for &y in &u.members {
                    if let Some(k) = render_key(q(x), q(y)) {
                        pairs.entry(k).or_default().insert(q(u.class));
                    }
                }
            }
        }
        Oracle {
            n,
            up,
            item_classes,
            empty: g.empty.iter().copied().collect(),
            pairs,
        }
    }

    /// `v` reaches `c` by one or more subclass edges.
    pub fn below(&self, v: u32, c: u32) -> bool {
        v <= self.n && c <= self.n && self.up[v as usize].get(c)
    }

    pub fn superclasses(&self, v: u32) -> BTreeSet<u32> {
        self.up[v as usize].ones().collect()
    }

    /// Strict subclasses of `c`.
    pub fn subclasses(&self, c: u32) -> BTreeSet<u32> {
        (1..=self.n).filter(|&v| self.below(v, c)).collect()
    }

    pub fn implied_empty(&self, v: u32) -> bool {
        self.empty.contains(&v) || self.empty.iter().any(|&e| self.below(v, e))
    }

    /// Items with a direct class at or below `c`.
    pub fn members(&self, c: u32) -> BTreeSet<u32> {
        self.item_classes
            .iter()
            .filter(|(_, cs)| cs.iter().any(|&d| d == c || self.below(d, c)))
            .map(|(&i, _)| i)
            .collect()
    }

    pub fn expected(&self, a: EntityId, b: EntityId) -> Expected {
        let (a, b) = (a.numeric_id(), b.numeric_id());
        let mut v = Bits::new(self.n as usize + 1);
        for x in 1..=self.n {
            if self.below(x, a) && self.below(x, b) {
                v.set(x);
            }
        }
        let mut e = Expected::default();
        for x in v.ones() {
            let id = q(x);
            e.violations.insert(id);
            let exempt = self.implied_empty(x);
            if exempt {
                e.exempted.insert(id);
            } else {
                e.active.insert(id);
            }
            // most general: no violating class strictly above it
            let up = &self.up[x as usize];
            let strictly_above = up
                .0
                .iter()
                .zip(&v.0)
                .enumerate()
                .flat_map(|(w, (&u, &vv))| {
                    let word = u & vv;
                    (0..64).filter(move |bit| word >> bit & 1 == 1).map(move |bit| (w * 64 + bit) as u32)
                })
                .any(|u| !self.below(u, x));
            if !strictly_above {
                let cyclic = self.below(x, x);
                let group = (1..=self.n).find(|&u| u == x || (self.below(x, u) && self.below(u, x)));
                e.culprits.insert(id, cyclic.then(|| q(group.unwrap_or(x))));
                if !exempt {
                    e.active_culprits.insert(id);
                }
            }
        }
        let ma = self.members(a);
        let mb = self.members(b);
        e.instance = ma.intersection(&mb).map(|&i| q(i)).collect();
        e
    }
}
