//! Index-level mixed graph shared by ADMGs, SWIGs and fixing states.
//!
//! Nodes are plain indices. A node may be absent (removed), and a present
//! node may be fixed: fixed nodes carry only outgoing directed edges.

use std::collections::{BTreeSet, VecDeque};

/// Sorted set of node indices.
pub type VSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mixed {
    present: Vec<bool>,
    fixed: Vec<bool>,
    pa: Vec<Vec<usize>>,
    ch: Vec<Vec<usize>>,
    sib: Vec<Vec<usize>>,
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) -> bool {
    match v.binary_search(&x) {
        Ok(_) => false,
        Err(i) => {
            v.insert(i, x);
            true
        }
    }
}

fn remove_sorted(v: &mut Vec<usize>, x: usize) -> bool {
    match v.binary_search(&x) {
        Ok(i) => {
            v.remove(i);
            true
        }
        Err(_) => false,
    }
}

impl Mixed {
    /// `n` present, random nodes and no edges.
    pub fn new(n: usize) -> Self {
        Mixed {
            present: vec![true; n],
            fixed: vec![false; n],
            pa: vec![Vec::new(); n],
            ch: vec![Vec::new(); n],
            sib: vec![Vec::new(); n],
        }
    }

    /// Size of the index space, including absent nodes.
    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes().next().is_none()
    }

    pub fn is_present(&self, v: usize) -> bool {
        v < self.len() && self.present[v]
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.is_present(v) && self.fixed[v]
    }

    pub fn is_random(&self, v: usize) -> bool {
        self.is_present(v) && !self.fixed[v]
    }

    /// Present nodes in index order.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.present[v])
    }

    /// Present random nodes in index order.
    pub fn random_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.present[v] && !self.fixed[v])
    }

    /// Present fixed nodes in index order.
    pub fn fixed_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.present[v] && self.fixed[v])
    }

    /// Marks `v` present and absent of edges.
    pub fn set_present(&mut self, v: usize, fixed: bool) {
        self.present[v] = true;
        self.fixed[v] = fixed;
    }

    /// Marks a node fixed; incoming and bidirected edges are dropped.
    pub fn set_fixed(&mut self, v: usize) {
        for p in self.pa[v].clone() {
            self.remove_directed(p, v);
        }
        for s in self.sib[v].clone() {
            self.remove_bidirected(v, s);
        }
        self.fixed[v] = true;
    }

    /// Removes a node with all incident edges.
    pub fn remove_node(&mut self, v: usize) {
        for p in self.pa[v].clone() {
            self.remove_directed(p, v);
        }
        for c in self.ch[v].clone() {
            self.remove_directed(v, c);
        }
        for s in self.sib[v].clone() {
            self.remove_bidirected(v, s);
        }
        self.present[v] = false;
        self.fixed[v] = false;
    }

    /// Adds `u -> v`. Returns false for a self-loop, absent endpoint, or fixed head.
    pub fn add_directed(&mut self, u: usize, v: usize) -> bool {
        if u == v || !self.is_present(u) || !self.is_present(v) || self.fixed[v] {
            return false;
        }
        insert_sorted(&mut self.ch[u], v);
        insert_sorted(&mut self.pa[v], u);
        true
    }

    /// Adds `u <-> v` between random nodes.
    pub fn add_bidirected(&mut self, u: usize, v: usize) -> bool {
        if u == v || !self.is_random(u) || !self.is_random(v) {
            return false;
        }
        insert_sorted(&mut self.sib[u], v);
        insert_sorted(&mut self.sib[v], u);
        true
    }

    pub fn remove_directed(&mut self, u: usize, v: usize) -> bool {
        let a = remove_sorted(&mut self.ch[u], v);
        remove_sorted(&mut self.pa[v], u);
        a
    }

    pub fn remove_bidirected(&mut self, u: usize, v: usize) -> bool {
        let a = remove_sorted(&mut self.sib[u], v);
        remove_sorted(&mut self.sib[v], u);
        a
    }

    pub fn has_directed(&self, u: usize, v: usize) -> bool {
        u < self.len() && self.ch[u].binary_search(&v).is_ok()
    }

    pub fn has_bidirected(&self, u: usize, v: usize) -> bool {
        u < self.len() && self.sib[u].binary_search(&v).is_ok()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.pa[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.ch[v]
    }

    pub fn siblings(&self, v: usize) -> &[usize] {
        &self.sib[v]
    }

    /// Directed edges sorted by (tail, head).
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in self.nodes() {
            for &v in &self.ch[u] {
                out.push((u, v));
            }
        }
        out
    }

    /// Bidirected edges as canonical (min, max) pairs, sorted.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in self.nodes() {
            for &v in &self.sib[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Reflexive ancestors of a set.
    pub fn ancestors(&self, set: &VSet) -> VSet {
        self.closure(set, |v| &self.pa[v])
    }

    /// Reflexive descendants of a set.
    pub fn descendants(&self, set: &VSet) -> VSet {
        self.closure(set, |v| &self.ch[v])
    }

    /// Reflexive district of a random node.
    pub fn district(&self, v: usize) -> VSet {
        if !self.is_random(v) {
            return VSet::new();
        }
        self.closure(&VSet::from([v]), |u| &self.sib[u])
    }

    /// Districts partitioning the present random nodes, ordered by least member.
    pub fn districts(&self) -> Vec<VSet> {
        let mut seen = VSet::new();
        let mut out = Vec::new();
        for v in self.random_nodes() {
            if seen.contains(&v) {
                continue;
            }
            let d = self.district(v);
            seen.extend(d.iter().copied());
            out.push(d);
        }
        out
    }

    /// District minus the node, plus parents of every district member.
    pub fn markov_blanket(&self, v: usize) -> VSet {
        let dis = self.district(v);
        let mut mb = dis.clone();
        for &d in &dis {
            mb.extend(self.pa[d].iter().copied());
        }
        mb.remove(&v);
        mb
    }

    fn closure<'a, F>(&'a self, set: &VSet, next: F) -> VSet
    where
        F: Fn(usize) -> &'a Vec<usize>,
    {
        let mut out: VSet = set.iter().copied().filter(|&v| self.is_present(v)).collect();
        let mut queue: VecDeque<usize> = out.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            for &w in next(u) {
                if out.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Topological order of present nodes, lowest index first among ties.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.len()).map(|v| self.pa[v].len()).collect();
        let mut ready: BTreeSet<usize> = self.nodes().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::new();
        while let Some(&u) = ready.iter().next() {
            ready.remove(&u);
            order.push(u);
            for &c in &self.ch[u] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == self.nodes().count() {
            Some(order)
        } else {
            None
        }
    }

    /// A node lying on a directed cycle, if any.
    pub fn cycle_witness(&self) -> Option<usize> {
        if self.topological_order().is_some() {
            return None;
        }
        self.nodes().find(|&v| {
            let below = self.descendants(&self.ch[v].iter().copied().collect());
            below.contains(&v)
        })
    }

    /// Whether `v` has no other random node that is both a descendant and a district mate.
    /// On failure returns the least such node.
    pub fn fixable(&self, v: usize) -> Result<(), usize> {
        let de = self.descendants(&VSet::from([v]));
        let dis = self.district(v);
        match de.intersection(&dis).find(|&&w| w != v) {
            Some(&w) => Err(w),
            None => Ok(()),
        }
    }

    /// Subgraph on `keep`; every other node becomes absent.
    pub fn induced(&self, keep: &VSet) -> Mixed {
        let mut g = self.clone();
        for v in 0..self.len() {
            if self.present[v] && !keep.contains(&v) {
                g.remove_node(v);
            }
        }
        g
    }

    /// Latent projection onto `keep`: every other present node is treated as hidden.
    ///
    /// `u -> v` when a directed path joins them through hidden nodes only;
    /// `u <-> v` when a collider-free path with arrowheads at both ends does.
    pub fn project(&self, keep: &VSet) -> Mixed {
        let n = self.len();
        let is_hidden = |v: usize| self.present[v] && !keep.contains(&v);
        let reach = |t: usize| -> VSet {
            let mut out = VSet::new();
            let mut seen = VSet::new();
            let mut stack: Vec<usize> = self.ch[t].clone();
            while let Some(c) = stack.pop() {
                if !seen.insert(c) {
                    continue;
                }
                if is_hidden(c) {
                    stack.extend(self.ch[c].iter().copied());
                } else {
                    out.insert(c);
                }
            }
            out
        };
        let mut g = Mixed::new(n);
        for v in 0..n {
            if !self.present[v] || !keep.contains(&v) {
                g.present[v] = false;
            } else {
                g.fixed[v] = self.fixed[v];
            }
        }
        let mut hidden_reach: Vec<Option<VSet>> = vec![None; n];
        for v in 0..n {
            if is_hidden(v) {
                hidden_reach[v] = Some(reach(v));
            }
        }
        for u in g.nodes().collect::<Vec<_>>() {
            for v in reach(u) {
                g.add_directed(u, v);
            }
        }
        let pairs = |g: &mut Mixed, a: &VSet, b: &VSet| {
            for &u in a {
                for &v in b {
                    if u != v && !g.fixed[u] && !g.fixed[v] {
                        g.add_bidirected(u, v);
                    }
                }
            }
        };
        for h in 0..n {
            if let Some(r) = &hidden_reach[h] {
                pairs(&mut g, r, r);
            }
        }
        for (x, y) in self.bidirected_edges() {
            let side = |z: usize| -> VSet {
                match &hidden_reach[z] {
                    Some(r) => r.clone(),
                    None => VSet::from([z]),
                }
            };
            pairs(&mut g, &side(x), &side(y));
        }
        g
    }
}
