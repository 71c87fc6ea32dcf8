//! Single world intervention graphs.
//!
//! Node indices: random halves keep the base vertex id `0..n`; the fixed half
//! of the `i`-th treatment (sorted by vertex id) is node `n + i`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Admg, Mixed, VSet, VertexId};
use crate::separation::{self, SeparationQuery, SeparationVerdict};

/// A treatment: vertex, symbol and optional concrete state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Intervention {
    pub vertex: VertexId,
    pub symbol: String,
    pub state: Option<usize>,
}

impl Intervention {
    /// Symbolic treatment with the default lowercase symbol.
    pub fn symbolic(g: &Admg, vertex: VertexId) -> Self {
        Intervention {
            vertex,
            symbol: g.name(vertex).to_lowercase(),
            state: None,
        }
    }

    pub fn bound(g: &Admg, vertex: VertexId, state: usize) -> Self {
        Intervention {
            state: Some(state),
            ..Self::symbolic(g, vertex)
        }
    }

    /// `a` or, when bound, the state label.
    pub fn value_text(&self, g: &Admg) -> String {
        match self.state {
            Some(s) => g.var(self.vertex).states[s].clone(),
            None => self.symbol.clone(),
        }
    }
}

/// Edge removal licensed in one intervention context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextDeletion {
    pub from: VertexId,
    pub to: VertexId,
    /// Treatment states under which the edge is absent.
    pub when: Vec<(VertexId, usize)>,
}

/// Context-specific edge deletions.
///
/// Text format, one deletion per line, `#` comments:
/// `delete U -> M when A=1` or, with several conditions,
/// `delete U -> R when A=0, M=1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContextSpec {
    pub deletions: Vec<ContextDeletion>,
}

impl ContextSpec {
    pub fn parse(text: &str, g: &Admg) -> Result<Self> {
        let mut deletions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: no, msg };
            let rest = line
                .strip_prefix("delete ")
                .ok_or_else(|| err(format!("expected `delete`, found `{line}`")))?;
            let (edge, cond) = rest
                .split_once(" when ")
                .ok_or_else(|| err("expected `when` clause".into()))?;
            let (a, b) = edge
                .split_once("->")
                .ok_or_else(|| err(format!("expected `->` in `{edge}`")))?;
            let from = g.expect_vertex(a.trim())?;
            let to = g.expect_vertex(b.trim())?;
            let mut when = Vec::new();
            for c in cond.split(',') {
                let (v, s) = c
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `VAR=state` in `{}`", c.trim())))?;
                let v = g.expect_vertex(v.trim())?;
                let s = g
                    .var(v)
                    .state_index(s.trim())
                    .ok_or_else(|| err(format!("unknown state `{}` of {}", s.trim(), g.name(v))))?;
                when.push((v, s));
            }
            deletions.push(ContextDeletion { from, to, when });
        }
        Ok(ContextSpec { deletions })
    }

    pub fn render(&self, g: &Admg) -> String {
        let mut out = String::new();
        for d in &self.deletions {
            let when: Vec<String> = d
                .when
                .iter()
                .map(|&(v, s)| format!("{}={}", g.name(v), g.var(v).states[s]))
                .collect();
            let _ = writeln!(out, "delete {} -> {} when {}", g.name(d.from), g.name(d.to), when.join(", "));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Swig {
    base: Admg,
    treat: Vec<Intervention>,
    g: Mixed,
    labels: Vec<VSet>,
}

/// Minimal and full labelings side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelings {
    pub minimal: Vec<VSet>,
    pub full: Vec<VSet>,
}

/// A separation verdict with the implied nondependence claim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwigVerdict {
    pub verdict: SeparationVerdict,
    /// `p(left | given) = f(...)` when separated from fixed nodes.
    pub nondependence: Option<String>,
}

/// Builds the SWIG for `treat`, applying context deletions before labeling.
pub fn build_swig(g: &Admg, treat: &[Intervention], ctx: Option<&ContextSpec>) -> Result<Swig> {
    let mut treat = treat.to_vec();
    treat.sort();
    let mut by_vertex: BTreeMap<VertexId, Intervention> = BTreeMap::new();
    for t in &treat {
        if t.vertex >= g.len() {
            return Err(Error::UnknownVertex(format!("#{}", t.vertex)));
        }
        if g.is_hidden(t.vertex) {
            return Err(Error::HiddenVertex(g.name(t.vertex).to_string()));
        }
        if let Some(s) = t.state {
            if s >= g.var(t.vertex).cardinality() {
                return Err(Error::Intervention(format!(
                    "state {s} out of range for {}",
                    g.name(t.vertex)
                )));
            }
        }
        if let Some(prev) = by_vertex.insert(t.vertex, t.clone()) {
            if &prev != t {
                return Err(Error::Intervention(format!(
                    "inconsistent assignments to {}",
                    g.name(t.vertex)
                )));
            }
        }
    }
    treat.dedup();
    let n = g.len();
    let fixed_of: BTreeMap<VertexId, usize> = treat
        .iter()
        .enumerate()
        .map(|(i, t)| (t.vertex, n + i))
        .collect();
    let mut m = Mixed::new(n + treat.len());
    for (u, v) in g.directed_edges() {
        m.add_directed(*fixed_of.get(&u).unwrap_or(&u), v);
    }
    for (u, v) in g.bidirected_edges() {
        m.add_bidirected(u, v);
    }
    for i in 0..treat.len() {
        m.set_fixed(n + i);
    }
    if let Some(ctx) = ctx {
        for d in &ctx.deletions {
            let mut applies = true;
            for &(v, s) in &d.when {
                match by_vertex.get(&v) {
                    None => applies = false,
                    Some(t) => match t.state {
                        None => {
                            return Err(Error::Context(format!(
                                "deletion of {} -> {} cites {} which is treated symbolically",
                                g.name(d.from),
                                g.name(d.to),
                                g.name(v)
                            )))
                        }
                        Some(ts) if ts != s => applies = false,
                        Some(_) => {}
                    },
                }
            }
            let from = *fixed_of.get(&d.from).unwrap_or(&d.from);
            if !m.has_directed(from, d.to) {
                return Err(Error::Context(format!(
                    "edge {} -> {} does not exist",
                    g.name(d.from),
                    g.name(d.to)
                )));
            }
            if applies {
                m.remove_directed(from, d.to);
            }
        }
    }
    let labels = fixed_labels(&m, n, &treat);
    Ok(Swig {
        base: g.clone(),
        treat,
        g: m,
        labels,
    })
}

fn fixed_labels(m: &Mixed, n: usize, treat: &[Intervention]) -> Vec<VSet> {
    (0..n)
        .map(|v| {
            m.ancestors(&VSet::from([v]))
                .into_iter()
                .filter(|&u| u >= n)
                .map(|u| treat[u - n].vertex)
                .collect()
        })
        .collect()
}

impl Swig {
    pub fn base(&self) -> &Admg {
        &self.base
    }

    pub fn mixed(&self) -> &Mixed {
        &self.g
    }

    pub fn interventions(&self) -> &[Intervention] {
        &self.treat
    }

    /// Number of random nodes (base vertices).
    pub fn random_len(&self) -> usize {
        self.base.len()
    }

    pub fn intervention(&self, v: VertexId) -> Option<&Intervention> {
        self.treat.iter().find(|t| t.vertex == v)
    }

    pub fn is_treated(&self, v: VertexId) -> bool {
        self.intervention(v).is_some()
    }

    /// Node index of the fixed half of a treated vertex.
    pub fn fixed_node(&self, v: VertexId) -> Option<usize> {
        self.treat
            .iter()
            .position(|t| t.vertex == v)
            .map(|i| self.base.len() + i)
    }

    /// Treatment carried by a fixed node index.
    pub fn fixed_intervention(&self, node: usize) -> Option<&Intervention> {
        node.checked_sub(self.base.len()).and_then(|i| self.treat.get(i))
    }

    /// Minimal label (treated vertex ids) of a random node.
    pub fn label(&self, v: VertexId) -> &VSet {
        &self.labels[v]
    }

    /// Minimal and full labelings; the full one carries every treatment.
    pub fn relabel_all_splits(&self) -> Labelings {
        let all: VSet = self.treat.iter().map(|t| t.vertex).collect();
        Labelings {
            minimal: self.labels.clone(),
            full: vec![all; self.base.len()],
        }
    }

    /// Label text for a set of treated vertices, e.g. `(a,m)` or `(1)`.
    pub fn label_text(&self, label: &VSet) -> String {
        if label.is_empty() {
            return String::new();
        }
        let parts: Vec<String> = label
            .iter()
            .filter_map(|&v| self.intervention(v))
            .map(|t| t.value_text(&self.base))
            .collect();
        format!("({})", parts.join(","))
    }

    /// `Y(a,m)` for random nodes, `a` or `a=1` for fixed nodes.
    pub fn node_name(&self, node: usize) -> String {
        if node < self.base.len() {
            format!("{}{}", self.base.name(node), self.label_text(&self.labels[node]))
        } else {
            let t = &self.treat[node - self.base.len()];
            match t.state {
                Some(s) => format!("{}={}", t.symbol, self.base.var(t.vertex).states[s]),
                None => t.symbol.clone(),
            }
        }
    }

    /// Text rendering: one `node` line per base vertex (split vertices as
    /// `A | a`), then directed and bidirected edges.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for v in 0..self.base.len() {
            let kw = if self.base.is_hidden(v) { "hidden" } else { "node" };
            match self.fixed_node(v) {
                Some(f) => {
                    let _ = writeln!(out, "{kw} {} | {}", self.node_name(v), self.node_name(f));
                }
                None => {
                    let _ = writeln!(out, "{kw} {}", self.node_name(v));
                }
            }
        }
        for (u, v) in self.g.directed_edges() {
            let _ = writeln!(out, "{} -> {}", self.node_name(u), self.node_name(v));
        }
        for (u, v) in self.g.bidirected_edges() {
            let _ = writeln!(out, "{} <-> {}", self.node_name(u), self.node_name(v));
        }
        out
    }

    /// Projection onto the observed random vertices `keep` plus all fixed nodes.
    pub fn latent_projection(&self, keep: &VSet) -> Result<Swig> {
        let base = self.base.latent_projection(keep)?;
        for t in &self.treat {
            if !keep.contains(&t.vertex) {
                return Err(Error::Intervention(format!(
                    "treated vertex {} must be kept",
                    self.base.name(t.vertex)
                )));
            }
        }
        let n = self.base.len();
        let mut full_keep = keep.clone();
        full_keep.extend(n..n + self.treat.len());
        let projected = self.g.project(&full_keep);
        let old: Vec<usize> = full_keep.iter().copied().collect();
        let index = |v: usize| old.iter().position(|&o| o == v).unwrap_or(usize::MAX);
        let mut m = Mixed::new(old.len());
        for (u, v) in projected.directed_edges() {
            m.add_directed(index(u), index(v));
        }
        for (u, v) in projected.bidirected_edges() {
            m.add_bidirected(index(u), index(v));
        }
        let k = keep.len();
        for i in 0..self.treat.len() {
            m.set_fixed(k + i);
        }
        let treat: Vec<Intervention> = self
            .treat
            .iter()
            .map(|t| Intervention {
                vertex: index(t.vertex),
                ..t.clone()
            })
            .collect();
        let labels = fixed_labels(&m, k, &treat);
        Ok(Swig {
            base,
            treat,
            g: m,
            labels,
        })
    }

    /// Projection onto all observed vertices.
    pub fn observed_projection(&self) -> Result<Swig> {
        self.latent_projection(&self.base.observed())
    }

    /// Extended separation; fixed nodes may appear in `right` (or `left`), never in `given`.
    pub fn separated(&self, q: &SeparationQuery) -> Result<SwigVerdict> {
        let verdict = separation::separated(&self.g, q)?;
        let n = self.base.len();
        let fixed_left = q.left.iter().any(|&v| v >= n);
        let (random_side, fixed_side) = if fixed_left { (&q.right, &q.left) } else { (&q.left, &q.right) };
        let cut: VSet = fixed_side.iter().copied().filter(|&v| v >= n).collect();
        let nondependence = if verdict.separated && !cut.is_empty() && !random_side.is_empty() {
            Some(self.nondependence(random_side, &q.given, &cut))
        } else {
            None
        };
        Ok(SwigVerdict {
            verdict,
            nondependence,
        })
    }

    fn nondependence(&self, left: &VSet, given: &VSet, cut: &VSet) -> String {
        let syms = self.value_symbols();
        let term = |s: &VSet| {
            s.iter()
                .map(|&v| self.node_name(v))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut lhs = format!("p({}", term(left));
        if !given.is_empty() {
            lhs.push('|');
            lhs.push_str(&term(given));
        }
        lhs.push(')');
        let mut args: Vec<String> = left.iter().chain(given.iter()).map(|&v| syms[v].clone()).collect();
        let n = self.base.len();
        for (i, t) in self.treat.iter().enumerate() {
            if !cut.contains(&(n + i)) && t.state.is_none() {
                args.push(t.symbol.clone());
            }
        }
        format!("{lhs} = f({})", args.join(","))
    }

    /// Value symbol per base vertex: lowercase name, primed until distinct from
    /// intervention symbols and earlier vertices.
    pub fn value_symbols(&self) -> Vec<String> {
        value_symbols(&self.base, self.treat.iter().map(|t| t.symbol.as_str()))
    }
}

/// Lowercase value symbols that avoid `reserved` and each other.
pub fn value_symbols<'a>(g: &Admg, reserved: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut used: Vec<String> = reserved.map(str::to_string).collect();
    let mut out = Vec::new();
    for v in 0..g.len() {
        let mut s = g.name(v).to_lowercase();
        while used.contains(&s) {
            s.push('\'');
        }
        used.push(s.clone());
        out.push(s);
    }
    out
}
