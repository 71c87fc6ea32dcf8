//! Acyclic directed mixed graphs with optional hidden-variable provenance.
//!
//! Vertices get stable ids in declaration order and every set-valued output
//! is sorted by id. A graph that declares hidden variables is a DAG; its
//! observed-vertex latent projection is computed on demand, so the full DAG
//! stays available for the oracle.

mod mixed;
mod parse;

pub use mixed::{Mixed, VSet};

use crate::config::Guards;
use crate::error::{Error, Result};

/// Stable vertex identifier (declaration order).
pub type VertexId = usize;

/// A declared variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub states: Vec<String>,
    pub hidden: bool,
}

impl VarDecl {
    /// Variable with `k` states labelled `0..k`.
    pub fn new(name: impl Into<String>, k: usize, hidden: bool) -> Self {
        VarDecl {
            name: name.into(),
            states: (0..k).map(|s| s.to_string()).collect(),
            hidden,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    /// Index of a state label.
    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Acyclic directed mixed graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Admg {
    vars: Vec<VarDecl>,
    g: Mixed,
}

/// Per-vertex relation tables, indexed by vertex id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexRelations {
    pub parents: Vec<VSet>,
    pub ancestors: Vec<VSet>,
    pub descendants: Vec<VSet>,
    pub district: Vec<VSet>,
    pub markov_blanket: Vec<VSet>,
}

impl VertexRelations {
    /// Disjunctive union of a relation over a set.
    pub fn union(rel: &[VSet], set: &VSet) -> VSet {
        set.iter().flat_map(|&v| rel[v].iter().copied()).collect()
    }
}

/// Outcome of a single fixability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixability {
    /// The vertex may be fixed; the graph after removing it.
    Fixable(Admg),
    /// A vertex both downstream of and bidirected-connected to the candidate.
    Blocked { witness: VertexId },
}

/// A validated fixing sequence with the graph after each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixingSchedule {
    pub order: Vec<VertexId>,
    pub graphs: Vec<Admg>,
}

impl Admg {
    /// Graph with the given variables and no edges.
    pub fn new(vars: Vec<VarDecl>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.name.clone()) {
                return Err(Error::Duplicate(v.name.clone()));
            }
            if v.states.len() < 2 {
                return Err(Error::Graph(format!(
                    "variable `{}` needs at least two states",
                    v.name
                )));
            }
        }
        let g = Mixed::new(vars.len());
        Ok(Admg { vars, g })
    }

    /// Parses the line-oriented graph format.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_graph(text)
    }

    /// Renders in the graph file format; `Admg::parse` inverts it.
    pub fn render(&self) -> String {
        parse::render_graph(self)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn var(&self, v: VertexId) -> &VarDecl {
        &self.vars[v]
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.vars[v].name
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Id of a named vertex or an `UnknownVertex` error.
    pub fn expect_vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// Index-level view.
    pub fn mixed(&self) -> &Mixed {
        &self.g
    }

    pub fn is_hidden(&self, v: VertexId) -> bool {
        self.vars[v].hidden
    }

    pub fn has_hidden(&self) -> bool {
        self.vars.iter().any(|v| v.hidden)
    }

    /// Observed vertices in id order.
    pub fn observed(&self) -> VSet {
        (0..self.len()).filter(|&v| !self.vars[v].hidden).collect()
    }

    pub fn all_vertices(&self) -> VSet {
        (0..self.len()).collect()
    }

    pub fn is_dag(&self) -> bool {
        self.g.bidirected_edges().is_empty()
    }

    /// Adds `a -> b`, rejecting self-loops and cycles.
    pub fn add_directed(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        if a == b {
            return Err(Error::SelfLoop(self.vars[a].name.clone()));
        }
        if self.g.descendants(&VSet::from([b])).contains(&a) {
            return Err(Error::Cycle(self.vars[a].name.clone()));
        }
        self.g.add_directed(a, b);
        Ok(())
    }

    /// Adds `a <-> b`; not permitted once hidden variables are declared.
    pub fn add_bidirected(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        if a == b {
            return Err(Error::SelfLoop(self.vars[a].name.clone()));
        }
        if self.has_hidden() {
            return Err(Error::BidirectedWithHidden(
                self.vars[a].name.clone(),
                self.vars[b].name.clone(),
            ));
        }
        self.g.add_bidirected(a, b);
        Ok(())
    }

    pub fn parents(&self, v: VertexId) -> VSet {
        self.g.parents(v).iter().copied().collect()
    }

    pub fn children(&self, v: VertexId) -> VSet {
        self.g.children(v).iter().copied().collect()
    }

    pub fn directed_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.g.directed_edges()
    }

    pub fn bidirected_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.g.bidirected_edges()
    }

    /// Parent, ancestor, descendant, district and Markov-blanket tables.
    pub fn relations(&self) -> VertexRelations {
        let n = self.len();
        let one = |v: usize| VSet::from([v]);
        VertexRelations {
            parents: (0..n).map(|v| self.parents(v)).collect(),
            ancestors: (0..n).map(|v| self.g.ancestors(&one(v))).collect(),
            descendants: (0..n).map(|v| self.g.descendants(&one(v))).collect(),
            district: (0..n).map(|v| self.g.district(v)).collect(),
            markov_blanket: (0..n).map(|v| self.g.markov_blanket(v)).collect(),
        }
    }

    /// Least ancestral superset of `s`.
    pub fn ancestral_closure(&self, s: &VSet) -> VSet {
        self.g.ancestors(s)
    }

    /// Subgraph on `s` with vertices renumbered in id order.
    pub fn induced_subgraph(&self, s: &VSet) -> Admg {
        self.compact(&self.g.induced(s))
    }

    /// Latent projection onto `keep`, which must contain observed vertices only.
    pub fn latent_projection(&self, keep: &VSet) -> Result<Admg> {
        for &v in keep {
            if v >= self.len() {
                return Err(Error::UnknownVertex(format!("#{v}")));
            }
            if self.vars[v].hidden {
                return Err(Error::HiddenVertex(self.vars[v].name.clone()));
            }
        }
        Ok(self.compact(&self.g.project(keep)))
    }

    /// Projection onto all observed vertices.
    pub fn observed_projection(&self) -> Admg {
        self.compact(&self.g.project(&self.observed()))
    }

    fn compact(&self, g: &Mixed) -> Admg {
        let keep: Vec<usize> = g.nodes().collect();
        let mut index = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let vars = keep.iter().map(|&v| self.vars[v].clone()).collect();
        let mut out = Mixed::new(keep.len());
        for (u, v) in g.directed_edges() {
            out.add_directed(index[u], index[v]);
        }
        for (u, v) in g.bidirected_edges() {
            out.add_bidirected(index[u], index[v]);
        }
        Admg { vars, g: out }
    }

    /// Single-step fixability of `w`.
    pub fn is_fixable(&self, w: VertexId) -> Fixability {
        match self.g.fixable(w) {
            Ok(()) => {
                let rest: VSet = self.all_vertices().into_iter().filter(|&v| v != w).collect();
                Fixability::Fixable(self.induced_subgraph(&rest))
            }
            Err(witness) => Fixability::Blocked { witness },
        }
    }

    /// Validates a fixing sequence given by vertex ids of this graph.
    /// On failure returns the position and the blocking vertex.
    pub fn fixing_schedule(
        &self,
        order: &[VertexId],
    ) -> std::result::Result<FixingSchedule, (usize, VertexId)> {
        let mut g = self.g.clone();
        let mut graphs = Vec::new();
        for (i, &w) in order.iter().enumerate() {
            if !g.is_present(w) {
                return Err((i, w));
            }
            if let Err(b) = g.fixable(w) {
                return Err((i, b));
            }
            g.remove_node(w);
            graphs.push(self.compact(&g));
        }
        Ok(FixingSchedule {
            order: order.to_vec(),
            graphs,
        })
    }

    /// Whether `s` can be reached by fixing `V \ s` in some order.
    pub fn is_reachable(&self, s: &VSet) -> bool {
        let mut g = self.g.clone();
        let mut todo: VSet = self.all_vertices().difference(s).copied().collect();
        loop {
            if todo.is_empty() {
                return true;
            }
            match todo.iter().copied().find(|&w| g.fixable(w).is_ok()) {
                Some(w) => {
                    g.remove_node(w);
                    todo.remove(&w);
                }
                None => return false,
            }
        }
    }

    /// All reachable subsets, in order of their bitmask.
    pub fn reachable_sets(&self, guards: &Guards) -> Result<Vec<VSet>> {
        self.enumerate_subsets(guards, |s| self.is_reachable(s))
    }

    /// Reachable subsets that are bidirected-connected.
    pub fn intrinsic_sets(&self, guards: &Guards) -> Result<Vec<VSet>> {
        self.enumerate_subsets(guards, |s| {
            self.is_reachable(s) && self.g.induced(s).districts().len() == 1
        })
    }

    fn enumerate_subsets<F: Fn(&VSet) -> bool>(&self, guards: &Guards, keep: F) -> Result<Vec<VSet>> {
        let n = self.len();
        if n > guards.max_subset_vertices {
            return Err(Error::Guard {
                what: "vertex count for subset enumeration",
                size: n as u128,
                limit: guards.max_subset_vertices as u128,
            });
        }
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << n) {
            let s: VSet = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            if keep(&s) {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// A hidden-variable DAG whose projection is this graph: each
    /// bidirected edge `a <-> b` becomes a hidden common parent.
    pub fn canonical_dag(&self) -> Admg {
        if self.is_dag() {
            return self.clone();
        }
        let mut vars = self.vars.clone();
        let edges = self.bidirected_edges();
        for &(a, b) in &edges {
            let mut name = format!("U_{}_{}", self.vars[a].name, self.vars[b].name);
            while vars.iter().any(|v| v.name == name) {
                name.push('_');
            }
            vars.push(VarDecl::new(name, 2, true));
        }
        let mut g = Mixed::new(vars.len());
        for (u, v) in self.directed_edges() {
            g.add_directed(u, v);
        }
        for (i, &(a, b)) in edges.iter().enumerate() {
            let h = self.len() + i;
            g.add_directed(h, a);
            g.add_directed(h, b);
        }
        Admg { vars, g }
    }

    /// Comma-separated names of a vertex set.
    pub fn names(&self, s: &VSet) -> String {
        s.iter()
            .map(|&v| self.vars[v].name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub(crate) fn from_parts(vars: Vec<VarDecl>, g: Mixed) -> Admg {
        Admg { vars, g }
    }
}
