//! Compressed adjacency and the strongly-connected-component condensation
//! of the subclass relation.
//!
//! Node ids are dense `u32` indices into the graph's sorted entity table.
//! Component ids are assigned in Tarjan emission order, so every parent
//! component has a smaller id than its child components.

/// Compressed sparse rows: `targets[offsets[v]..offsets[v + 1]]` are the
/// neighbours of `v`, sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Csr {
    /// Builds from `(source, target)` pairs. Duplicates are kept as given.
    pub fn from_pairs(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for (s, _) in pairs.clone() {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n] as usize];
        for (s, t) in pairs {
            let slot = &mut fill[s as usize];
            targets[*slot as usize] = t;
            *slot += 1;
        }
        for v in 0..n {
            targets[offsets[v] as usize..offsets[v + 1] as usize].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }
}

/// Read-only closure index over one frozen edge set.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    /// child -> direct parents
    pub(crate) up: Csr,
    /// parent -> direct children
    pub(crate) down: Csr,
    /// node -> component
    pub(crate) comp: Vec<u32>,
    /// component -> member nodes
    pub(crate) members: Csr,
    /// component lies on a cycle (size > 1 or self loop)
    pub(crate) cyclic: Vec<bool>,
    /// condensed DAG, no self loops, no duplicate edges
    pub(crate) comp_up: Csr,
    pub(crate) comp_down: Csr,
    /// class -> items stated as instances (P31)
    pub(crate) class_items: Csr,
    /// node is marked empty or lies below a marked-empty class
    pub(crate) implied_empty: Vec<bool>,
}

impl Taxonomy {
    pub fn build(n: usize, subclass: &[(u32, u32)], instance: &[(u32, u32)], empty: &[u32]) -> Self {
        let up = Csr::from_pairs(n, subclass.iter().copied());
        let down = Csr::from_pairs(n, subclass.iter().map(|&(c, p)| (p, c)));
        let comp = tarjan(&up);
        let n_comp = comp.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let members = Csr::from_pairs(n_comp, (0..n as u32).map(|v| (comp[v as usize], v)));

        let mut cyclic = vec![false; n_comp];
        for c in 0..n_comp as u32 {
            if members.neighbors(c).len() > 1 {
                cyclic[c as usize] = true;
            }
        }
        let mut comp_edges: Vec<(u32, u32)> = Vec::with_capacity(subclass.len());
        for &(child, parent) in subclass {
            let (cc, cp) = (comp[child as usize], comp[parent as usize]);
            if cc == cp {
                cyclic[cc as usize] = true;
            } else {
                comp_edges.push((cc, cp));
            }
        }
        comp_edges.sort_unstable();
        comp_edges.dedup();
        let comp_up = Csr::from_pairs(n_comp, comp_edges.iter().copied());
        let comp_down = Csr::from_pairs(n_comp, comp_edges.iter().map(|&(c, p)| (p, c)));
        drop(comp_edges);

        let class_items = Csr::from_pairs(n, instance.iter().map(|&(i, c)| (c, i)));

        let mut implied_empty = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        for &e in empty {
            if !implied_empty[e as usize] {
                implied_empty[e as usize] = true;
                stack.push(e);
            }
        }
        while let Some(v) = stack.pop() {
            for &c in down.neighbors(v) {
                if !implied_empty[c as usize] {
                    implied_empty[c as usize] = true;
                    stack.push(c);
                }
            }
        }

        Taxonomy {
            up,
            down,
            comp,
            members,
            cyclic,
            comp_up,
            comp_down,
            class_items,
            implied_empty,
        }
    }

    pub fn node_count(&self) -> usize {
        self.comp.len()
    }

    pub fn component_count(&self) -> usize {
        self.cyclic.len()
    }

    #[inline]
    pub fn component_of(&self, v: u32) -> u32 {
        self.comp[v as usize]
    }

    pub fn component_members(&self, c: u32) -> &[u32] {
        self.members.neighbors(c)
    }

    pub fn is_cyclic(&self, c: u32) -> bool {
        self.cyclic[c as usize]
    }

    pub fn parents(&self, v: u32) -> &[u32] {
        self.up.neighbors(v)
    }

    pub fn children(&self, v: u32) -> &[u32] {
        self.down.neighbors(v)
    }

    pub fn component_parents(&self, c: u32) -> &[u32] {
        self.comp_up.neighbors(c)
    }

    pub fn component_children(&self, c: u32) -> &[u32] {
        self.comp_down.neighbors(c)
    }

    pub fn stated_items(&self, class: u32) -> &[u32] {
        self.class_items.neighbors(class)
    }

    pub fn is_implied_empty(&self, v: u32) -> bool {
        self.implied_empty[v as usize]
    }

    /// Components reachable from `c` by one or more steps of `adj`, plus
    /// `c` itself when it is cyclic. Written into `out` (cleared first).
    pub(crate) fn strict_reach(&self, c: u32, upward: bool, scratch: &mut Scratch, out: &mut Vec<u32>) {
        let adj = if upward { &self.comp_up } else { &self.comp_down };
        out.clear();
        let stamp = scratch.next_stamp();
        let marks = scratch.marks(self.component_count());
        if self.cyclic[c as usize] {
            marks[c as usize] = stamp;
            out.push(c);
        }
        let mut head = out.len();
        for &n in adj.neighbors(c) {
            if marks[n as usize] != stamp {
                marks[n as usize] = stamp;
                out.push(n);
            }
        }
        while head < out.len() {
            let v = out[head];
            head += 1;
            for &n in adj.neighbors(v) {
                if marks[n as usize] != stamp {
                    marks[n as usize] = stamp;
                    out.push(n);
                }
            }
        }
    }
}

/// Per-thread epoch-stamped mark arrays, reused across queries.
#[derive(Debug, Default)]
pub struct Scratch {
    marks: Vec<u32>,
    item_marks: Vec<u32>,
    stamp: u32,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn next_stamp(&mut self) -> u32 {
        if self.stamp >= u32::MAX - 4 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.item_marks.iter_mut().for_each(|m| *m = 0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }

    /// Three consecutive stamps, none of which is present in the arrays.
    pub(crate) fn stamps3(&mut self) -> (u32, u32, u32) {
        let a = self.next_stamp();
        if a >= u32::MAX - 8 {
            self.stamp = u32::MAX - 4;
            let a = self.next_stamp();
            return (a, self.next_stamp(), self.next_stamp());
        }
        (a, self.next_stamp(), self.next_stamp())
    }

    pub(crate) fn marks(&mut self, len: usize) -> &mut [u32] {
        if self.marks.len() < len {
            self.marks.resize(len, 0);
        }
        &mut self.marks[..len]
    }

    pub(crate) fn both(&mut self, comp_len: usize, node_len: usize) -> (&mut [u32], &mut [u32]) {
        if self.marks.len() < comp_len {
            self.marks.resize(comp_len, 0);
        }
        if self.item_marks.len() < node_len {
            self.item_marks.resize(node_len, 0);
        }
        (&mut self.marks[..comp_len], &mut self.item_marks[..node_len])
    }
}

/// Iterative Tarjan over `adj`; returns the component of every node.
fn tarjan(adj: &Csr) -> Vec<u32> {
    const UNVISITED: u32 = u32::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, next neighbour position)
    let mut call: Vec<(u32, u32)> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let neigh = adj.neighbors(v);
            if (*pos as usize) < neigh.len() {
                let w = neigh[*pos as usize];
                *pos += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp[w as usize] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}
