//! d-separation, m-separation and the fixed-node extension used on SWIGs.
//!
//! Connection is decided by reachability over `(node, arrived-with-arrowhead)`
//! states. Fixed nodes are only ever path endpoints. Witness paths are the
//! shortest connecting paths, ties broken by vertex id.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Admg, Mixed, VSet};

/// Orientation of one path edge relative to the direction of travel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// `u -> v`
    Forward,
    /// `u <- v`
    Backward,
    /// `u <-> v`
    Bidirected,
}

impl Step {
    fn arrow_at_start(self) -> bool {
        matches!(self, Step::Backward | Step::Bidirected)
    }

    fn arrow_at_end(self) -> bool {
        matches!(self, Step::Forward | Step::Bidirected)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Step::Forward => "->",
            Step::Backward => "<-",
            Step::Bidirected => "<->",
        }
    }
}

/// Alternating node/edge sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn is_simple(&self) -> bool {
        let set: VSet = self.nodes.iter().copied().collect();
        set.len() == self.nodes.len()
    }

    /// Renders with a caller-supplied node name, e.g. `A -> M <-> Y`.
    pub fn render<F: Fn(usize) -> String>(&self, name: F) -> String {
        let mut out = String::new();
        for (i, &v) in self.nodes.iter().enumerate() {
            if i > 0 {
                out.push(' ');
                out.push_str(self.steps[i - 1].symbol());
                out.push(' ');
            }
            out.push_str(&name(v));
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeparationQuery {
    pub left: VSet,
    pub right: VSet,
    pub given: VSet,
}

impl SeparationQuery {
    pub fn new(left: VSet, right: VSet, given: VSet) -> Self {
        SeparationQuery { left, right, given }
    }

    pub fn swapped(&self) -> Self {
        SeparationQuery {
            left: self.right.clone(),
            right: self.left.clone(),
            given: self.given.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationVerdict {
    pub separated: bool,
    /// A connecting path when not separated.
    pub witness: Option<Path>,
}

/// Expansion budget for the simple-path witness search.
const WITNESS_BUDGET: usize = 1_000_000;

fn neighbours(g: &Mixed, v: usize) -> Vec<(usize, Step)> {
    let mut out: Vec<(usize, Step)> = g
        .children(v)
        .iter()
        .map(|&w| (w, Step::Forward))
        .chain(g.parents(v).iter().map(|&w| (w, Step::Backward)))
        .chain(g.siblings(v).iter().map(|&w| (w, Step::Bidirected)))
        .collect();
    out.sort();
    out
}

fn validate(g: &Mixed, q: &SeparationQuery) -> Result<()> {
    for s in [&q.left, &q.right, &q.given] {
        if let Some(&v) = s.iter().find(|&&v| v >= g.len() || !g.is_present(v)) {
            return Err(Error::Separation(format!("node #{v} is not in the graph")));
        }
    }
    let pairs = [(&q.left, &q.right), (&q.left, &q.given), (&q.right, &q.given)];
    for (a, b) in pairs {
        if let Some(v) = a.intersection(b).next() {
            return Err(Error::Separation(format!(
                "node #{v} appears in more than one query set"
            )));
        }
    }
    if let Some(&v) = q.given.iter().find(|&&v| g.is_fixed(v)) {
        return Err(Error::Separation(format!(
            "fixed node #{v} cannot be conditioned on"
        )));
    }
    let fixed_left = q.left.iter().any(|&v| g.is_fixed(v));
    let fixed_right = q.right.iter().any(|&v| g.is_fixed(v));
    if fixed_left && fixed_right {
        return Err(Error::Separation(
            "fixed nodes may appear on one side only".into(),
        ));
    }
    Ok(())
}

struct Walker<'a> {
    g: &'a Mixed,
    q: &'a SeparationQuery,
    an_given: VSet,
}

impl<'a> Walker<'a> {
    fn new(g: &'a Mixed, q: &'a SeparationQuery) -> Self {
        Walker {
            g,
            q,
            an_given: g.ancestors(&q.given),
        }
    }

    /// Whether an intermediate node `v` lets the path continue.
    fn passes(&self, v: usize, arrived_head: bool, next: Step) -> bool {
        if self.g.is_fixed(v) {
            return false;
        }
        if arrived_head && next.arrow_at_start() {
            self.an_given.contains(&v)
        } else {
            !self.q.given.contains(&v)
        }
    }

    /// Whether the path may land on `w` (as an intermediate or endpoint).
    fn may_enter(&self, w: usize) -> bool {
        !self.g.is_fixed(w) || self.q.right.contains(&w)
    }

    /// Shortest connecting walk by breadth-first search.
    fn shortest_walk(&self) -> Option<Path> {
        let n = self.g.len();
        // state = node * 2 + arrived_head
        let mut prev: Vec<Option<(usize, Step)>> = vec![None; 2 * n];
        let mut seen = vec![false; 2 * n];
        let mut queue = VecDeque::new();
        let mut starts = vec![false; n];
        for &x in &self.q.left {
            starts[x] = true;
        }
        // start states are expanded first without an arrival constraint
        for &x in &self.q.left {
            for (w, step) in neighbours(self.g, x) {
                if !self.may_enter(w) {
                    continue;
                }
                let s = 2 * w + step.arrow_at_end() as usize;
                if seen[s] || starts[w] {
                    continue;
                }
                seen[s] = true;
                prev[s] = Some((2 * x, step));
                if self.q.right.contains(&w) {
                    return Some(self.rebuild(s, &prev, &starts));
                }
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let (v, head) = (s / 2, s % 2 == 1);
            for (w, step) in neighbours(self.g, v) {
                if !self.passes(v, head, step) || !self.may_enter(w) || starts[w] {
                    continue;
                }
                let t = 2 * w + step.arrow_at_end() as usize;
                if seen[t] {
                    continue;
                }
                seen[t] = true;
                prev[t] = Some((s, step));
                if self.q.right.contains(&w) {
                    return Some(self.rebuild(t, &prev, &starts));
                }
                queue.push_back(t);
            }
        }
        None
    }

    fn rebuild(&self, end: usize, prev: &[Option<(usize, Step)>], starts: &[bool]) -> Path {
        let mut nodes = vec![end / 2];
        let mut steps = Vec::new();
        let mut s = end;
        while let Some((p, step)) = prev[s] {
            nodes.push(p / 2);
            steps.push(step);
            if starts[p / 2] && p % 2 == 0 {
                break;
            }
            s = p;
        }
        nodes.reverse();
        steps.reverse();
        Path { nodes, steps }
    }

    /// Shortest simple connecting path by iterative deepening.
    fn shortest_simple(&self, max_len: usize) -> Option<Path> {
        let mut budget = WITNESS_BUDGET;
        for depth in 1..=max_len {
            for &x in &self.q.left {
                let mut nodes = vec![x];
                let mut steps = Vec::new();
                if self.dfs(depth, &mut nodes, &mut steps, &mut budget) {
                    return Some(Path { nodes, steps });
                }
                if budget == 0 {
                    return None;
                }
            }
        }
        None
    }

    fn dfs(&self, depth: usize, nodes: &mut Vec<usize>, steps: &mut Vec<Step>, budget: &mut usize) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let v = *nodes.last().unwrap_or(&0);
        if steps.len() == depth {
            return self.q.right.contains(&v);
        }
        if !steps.is_empty() && self.q.right.contains(&v) {
            return false;
        }
        for (w, step) in neighbours(self.g, v) {
            if nodes.contains(&w) || !self.may_enter(w) || self.q.left.contains(&w) {
                continue;
            }
            if let Some(&last) = steps.last() {
                if !self.passes(v, last.arrow_at_end(), step) {
                    continue;
                }
            }
            nodes.push(w);
            steps.push(step);
            if self.dfs(depth, nodes, steps, budget) {
                return true;
            }
            nodes.pop();
            steps.pop();
        }
        false
    }
}

/// Separation on an index-level graph, fixed nodes allowed on one side.
pub fn separated(g: &Mixed, q: &SeparationQuery) -> Result<SeparationVerdict> {
    validate(g, q)?;
    if q.left.is_empty() || q.right.is_empty() {
        return Ok(SeparationVerdict {
            separated: true,
            witness: None,
        });
    }
    // walk away from the fixed side so fixed nodes are only ever start points
    let flip = q.right.iter().any(|&v| g.is_fixed(v));
    let swapped = q.swapped();
    let q = if flip { &swapped } else { q };
    let walker = Walker::new(g, q);
    let walk = match walker.shortest_walk() {
        None => {
            return Ok(SeparationVerdict {
                separated: true,
                witness: None,
            })
        }
        Some(w) => w,
    };
    let path = if walk.is_simple() {
        walk
    } else {
        walker.shortest_simple(g.len()).unwrap_or(walk)
    };
    Ok(SeparationVerdict {
        separated: false,
        witness: Some(if flip { reverse(path) } else { path }),
    })
}

fn reverse(p: Path) -> Path {
    let nodes = p.nodes.into_iter().rev().collect();
    let steps = p
        .steps
        .into_iter()
        .rev()
        .map(|s| match s {
            Step::Forward => Step::Backward,
            Step::Backward => Step::Forward,
            Step::Bidirected => Step::Bidirected,
        })
        .collect();
    Path { nodes, steps }
}

/// d-separation; the graph must have no bidirected edges.
pub fn d_separated(g: &Admg, q: &SeparationQuery) -> Result<SeparationVerdict> {
    if !g.is_dag() {
        return Err(Error::Separation(
            "d-separation needs a graph without bidirected edges".into(),
        ));
    }
    separated(g.mixed(), q)
}

/// m-separation on an ADMG.
pub fn m_separated(g: &Admg, q: &SeparationQuery) -> Result<SeparationVerdict> {
    separated(g.mixed(), q)
}

/// Whether a path connects its endpoints given `given` (collider rule on ancestors).
pub fn path_connects(g: &Mixed, path: &Path, given: &VSet) -> bool {
    let an = g.ancestors(given);
    let k = path.nodes.len();
    if k < 2 {
        return false;
    }
    for i in 1..k - 1 {
        let v = path.nodes[i];
        if g.is_fixed(v) {
            return false;
        }
        let collider = path.steps[i - 1].arrow_at_end() && path.steps[i].arrow_at_start();
        if collider && !an.contains(&v) || !collider && given.contains(&v) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> VSet {
        v.iter().copied().collect()
    }

    fn q(l: &[usize], r: &[usize], z: &[usize]) -> SeparationQuery {
        SeparationQuery::new(set(l), set(r), set(z))
    }

    /// Enumerates every simple path; reference for the reachability search.
    fn brute_connected(g: &Mixed, q: &SeparationQuery) -> bool {
        fn go(g: &Mixed, q: &SeparationQuery, nodes: &mut Vec<usize>, steps: &mut Vec<Step>) -> bool {
            let v = *nodes.last().unwrap();
            if nodes.len() > 1 && q.right.contains(&v) {
                return path_connects(g, &Path { nodes: nodes.clone(), steps: steps.clone() }, &q.given);
            }
            for (w, s) in neighbours(g, v) {
                if nodes.contains(&w) {
                    continue;
                }
                if g.is_fixed(w) && !q.right.contains(&w) {
                    continue;
                }
                nodes.push(w);
                steps.push(s);
                let hit = go(g, q, nodes, steps);
                nodes.pop();
                steps.pop();
                if hit {
                    return true;
                }
            }
            false
        }
        q.left.iter().any(|&x| go(g, q, &mut vec![x], &mut Vec::new()))
    }

    fn graph(text: &str) -> Admg {
        Admg::parse(text).unwrap()
    }

    #[test]
    fn chain_blocked_by_middle() {
        let g = graph("var V1 V2 V3\nV1 -> V2\nV2 -> V3");
        assert!(d_separated(&g, &q(&[0], &[2], &[1])).unwrap().separated);
        assert!(!d_separated(&g, &q(&[0], &[2], &[])).unwrap().separated);
    }

    #[test]
    fn adjacent_never_separated() {
        let g = graph("var C A M Y\nC -> A\nC -> M\nC -> Y\nA -> M\nA -> Y\nM -> Y");
        let v = d_separated(&g, &q(&[1], &[2], &[0])).unwrap();
        assert!(!v.separated);
        assert_eq!(v.witness.unwrap().nodes, vec![1, 2]);
    }

    #[test]
    fn conditioning_on_collider_opens_path() {
        let g = graph("var C A M Y\nhidden H\nC -> A\nA -> M\nM -> Y\nH -> A\nH -> Y");
        assert!(d_separated(&g, &q(&[4], &[0], &[])).unwrap().separated);
        let v = d_separated(&g, &q(&[4], &[0], &[1])).unwrap();
        assert!(!v.separated);
        assert_eq!(v.witness.unwrap().steps, vec![Step::Forward, Step::Backward]);
    }

    #[test]
    fn m_separation_cases() {
        let fd = graph("var A M Y\nA -> M\nM -> Y\nA <-> Y");
        assert!(!m_separated(&fd, &q(&[0], &[2], &[1])).unwrap().separated);
        let f3 = graph("var A Y1 Y2\nA -> Y1\nA <-> Y2\nY1 <-> Y2");
        assert!(!m_separated(&f3, &q(&[0], &[2], &[1])).unwrap().separated);
        let two = graph("var A B C\nA -> B");
        assert!(m_separated(&two, &q(&[0], &[2], &[1])).unwrap().separated);
    }

    #[test]
    fn d_separation_rejects_bidirected() {
        let g = graph("var A Y\nA <-> Y");
        assert!(d_separated(&g, &q(&[0], &[1], &[])).is_err());
    }

    #[test]
    fn vacuous_and_invalid_queries() {
        let g = graph("var A B\nA -> B");
        assert!(m_separated(&g, &q(&[], &[1], &[])).unwrap().separated);
        assert!(m_separated(&g, &q(&[0], &[0], &[])).is_err());
        let mut m = g.mixed().clone();
        m.set_fixed(0);
        assert!(separated(&m, &q(&[1], &[], &[0])).is_err());
    }

    #[test]
    fn fixed_endpoint_on_either_side() {
        let mut m = Mixed::new(3);
        m.add_directed(0, 1);
        m.add_directed(1, 2);
        m.set_fixed(0);
        let a = separated(&m, &q(&[2], &[0], &[])).unwrap();
        let b = separated(&m, &q(&[0], &[2], &[])).unwrap();
        assert!(!a.separated && !b.separated);
        assert_eq!(a.witness.unwrap().nodes, vec![2, 1, 0]);
        assert_eq!(b.witness.unwrap().nodes, vec![0, 1, 2]);
        assert!(separated(&m, &q(&[2], &[0], &[1])).unwrap().separated);
    }

    #[test]
    fn fixed_node_never_intermediate() {
        let mut m = Mixed::new(3);
        m.add_directed(1, 0);
        m.add_directed(1, 2);
        m.set_fixed(1);
        assert!(separated(&m, &q(&[0], &[2], &[])).unwrap().separated);
    }

    #[test]
    fn witness_prefers_simple_path() {
        // A -> C <- B with C -> D, conditioning on D
        let g = graph("var A B C D\nA -> C\nB -> C\nC -> D");
        let v = d_separated(&g, &q(&[0], &[1], &[3])).unwrap();
        let p = v.witness.unwrap();
        assert!(p.is_simple());
        assert_eq!(p.nodes, vec![0, 2, 1]);
    }

    fn arb_graph() -> impl Strategy<Value = (Mixed, Vec<usize>)> {
        (2usize..=6).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(0u8..4, pairs),
                proptest::collection::vec(0usize..n, 0..2),
            )
        })
        .prop_map(|(n, kinds, fixed)| {
            let mut m = Mixed::new(n);
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    match kinds[k] {
                        1 => {
                            m.add_directed(i, j);
                        }
                        2 => {
                            m.add_bidirected(i, j);
                        }
                        3 => {
                            m.add_directed(i, j);
                            m.add_bidirected(i, j);
                        }
                        _ => {}
                    }
                    k += 1;
                }
            }
            for &f in &fixed {
                m.set_fixed(f);
            }
            (m, fixed)
        })
    }

    fn arb_case() -> impl Strategy<Value = (Mixed, SeparationQuery)> {
        arb_graph().prop_flat_map(|(m, _)| {
            let n = m.len();
            (Just(m), proptest::collection::vec(0u8..4, n))
        })
        .prop_map(|(m, roles)| {
            let mut q = SeparationQuery::default();
            for (v, r) in roles.into_iter().enumerate() {
                match r {
                    1 => {
                        q.left.insert(v);
                    }
                    2 => {
                        q.right.insert(v);
                    }
                    3 if !m.is_fixed(v) => {
                        q.given.insert(v);
                    }
                    _ => {}
                }
            }
            (m, q)
        })
    }

    proptest! {
        #[test]
        fn agrees_with_path_enumeration((m, q) in arb_case()) {
            match separated(&m, &q) {
                Err(_) => {
                    let fl = q.left.iter().any(|&v| m.is_fixed(v));
                    let fr = q.right.iter().any(|&v| m.is_fixed(v));
                    prop_assert!(fl && fr);
                }
                Ok(v) => {
                    let vacuous = q.left.is_empty() || q.right.is_empty();
                    prop_assert_eq!(v.separated, vacuous || !brute_connected(&m, &q) && !brute_connected(&m, &q.swapped()));
                    if let Some(p) = v.witness {
                        prop_assert!(p.is_simple());
                        prop_assert!(path_connects(&m, &p, &q.given));
                        prop_assert!(q.left.contains(&p.nodes[0]));
                        prop_assert!(q.right.contains(p.nodes.last().unwrap()));
                        let fixed_inner = p.nodes[1..p.nodes.len() - 1].iter().any(|&v| m.is_fixed(v));
                        prop_assert!(!fixed_inner);
                    }
                }
            }
        }

        #[test]
        fn symmetric_without_fixed((m, q) in arb_case()) {
            if let (Ok(a), Ok(b)) = (separated(&m, &q), separated(&m, &q.swapped())) {
                prop_assert_eq!(a.separated, b.separated);
            }
        }

        #[test]
        fn blocking_a_non_collider_blocks_the_witness((m, q) in arb_case()) {
            if let Ok(SeparationVerdict { witness: Some(p), .. }) = separated(&m, &q) {
                for i in 1..p.nodes.len() - 1 {
                    let v = p.nodes[i];
                    let collider = p.steps[i - 1].arrow_at_end() && p.steps[i].arrow_at_start();
                    if !collider {
                        let mut given = q.given.clone();
                        given.insert(v);
                        prop_assert!(!path_connects(&m, &p, &given));
                    }
                }
            }
        }
    }
}
