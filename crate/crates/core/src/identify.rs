//! Identification of counterfactual distributions from the observed margin.
//!
//! Marginal queries `p(Y(a))` are reduced to the random ancestors `Y*` in the
//! SWIG, factorized into district terms, and each term is reached by repeated
//! splitting from `p(V)`. Conditional queries move conditioning terms into the
//! intervention set where separation allows and identify the remaining joint.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimand::{simplify, Assign, Estimand, Value};
use crate::graph::{Admg, Mixed, VSet, VertexId};
use crate::query::CounterfactualQuery;
use crate::separation::SeparationQuery;
use crate::swig::{build_swig, value_symbols, Intervention};

/// Witness of non-identifiability: `inner ⊂ outer`, both bidirected-connected,
/// found while reaching the term of `district`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HedgeWitness {
    pub inner: VSet,
    pub outer: VSet,
    pub district: VSet,
}

impl HedgeWitness {
    pub fn render(&self, g: &Admg) -> String {
        format!(
            "hedge {{{}}} ⊂ {{{}}} in district {{{}}}",
            names(g, &self.inner),
            names(g, &self.outer),
            names(g, &self.district)
        )
    }

    fn map(self, ids: &[VertexId]) -> HedgeWitness {
        let f = |s: VSet| s.into_iter().map(|v| ids[v]).collect();
        HedgeWitness {
            inner: f(self.inner),
            outer: f(self.outer),
            district: f(self.district),
        }
    }
}

fn names(g: &Admg, s: &VSet) -> String {
    s.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Identification {
    Identified(Estimand),
    NotIdentified(HedgeWitness),
}

impl Identification {
    pub fn estimand(&self) -> Option<&Estimand> {
        match self {
            Identification::Identified(e) => Some(e),
            Identification::NotIdentified(_) => None,
        }
    }

    pub fn hedge(&self) -> Option<&HedgeWitness> {
        match self {
            Identification::Identified(_) => None,
            Identification::NotIdentified(h) => Some(h),
        }
    }
}

/// A district of `G(Y*(a))` with its strict random parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistrictTerm {
    pub district: VSet,
    pub strict_parents: VSet,
}

/// Current counterfactual distribution during splitting: an expression over
/// the random vertices and a graph whose node `k` is the random half of
/// vertex `k` and node `n + k` its fixed half once split.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    names: Vec<String>,
    symbols: Vec<String>,
    g: Mixed,
    expr: Estimand,
}

impl Kernel {
    /// The observed joint `p(V)` of a hidden-free graph.
    pub fn observed(g: &Admg, symbols: Vec<String>) -> Result<Kernel> {
        if g.has_hidden() {
            return Err(Error::Graph("splitting needs a graph without hidden variables".into()));
        }
        if symbols.len() != g.len() {
            return Err(Error::Query("one symbol per vertex required".into()));
        }
        let n = g.len();
        let mut m = Mixed::new(2 * n);
        for (u, v) in g.directed_edges() {
            m.add_directed(u, v);
        }
        for (u, v) in g.bidirected_edges() {
            m.add_bidirected(u, v);
        }
        for k in n..2 * n {
            m.remove_node(k);
        }
        let names: Vec<String> = (0..n).map(|v| g.name(v).to_string()).collect();
        let of = (0..n).map(|v| Assign::sym(names[v].clone(), symbols[v].clone())).collect();
        Ok(Kernel {
            names,
            symbols,
            g: m,
            expr: Estimand::prob(of, Vec::new()),
        })
    }

    pub fn expr(&self) -> &Estimand {
        &self.expr
    }

    pub fn graph(&self) -> &Mixed {
        &self.g
    }

    /// Random vertices still present.
    pub fn random(&self) -> VSet {
        self.g.random_nodes().collect()
    }

    /// Splits vertex `k`, setting its fixed half to `c`. With `keep` the
    /// random half stays; otherwise it is marginalized. Fails with the
    /// district-mate descendant that blocks the split, or `k` itself when it
    /// is not a random vertex.
    pub fn split_once(&self, k: VertexId, c: Value, keep: bool) -> std::result::Result<Kernel, VertexId> {
        let n = self.names.len();
        if k >= n || !self.g.is_random(k) {
            return Err(k);
        }
        self.g.fixable(k)?;
        let mb = self.g.markov_blanket(k);
        let random: Vec<usize> = self.g.random_nodes().collect();
        let over = |skip_k: bool| -> Vec<String> {
            random
                .iter()
                .filter(|&&v| !mb.contains(&v) && !(skip_k && v == k))
                .map(|&v| self.symbols[v].clone())
                .collect()
        };
        let cond = simplify(&Estimand::ratio(
            Estimand::sum(over(true), self.expr.clone()),
            Estimand::sum(over(false), self.expr.clone()),
        ));
        let sub = [(self.symbols[k].clone(), c)];
        let head = Estimand::ratio(self.expr.rename(&sub), cond.rename(&sub));
        let expr = if keep {
            simplify(&Estimand::Product(vec![head, cond]))
        } else {
            simplify(&head)
        };
        Ok(Kernel {
            names: self.names.clone(),
            symbols: self.symbols.clone(),
            g: split_graph(&self.g, n, k, keep),
            expr,
        })
    }
}

fn split_graph(g: &Mixed, n: usize, k: usize, keep: bool) -> Mixed {
    let mut out = g.clone();
    out.set_present(n + k, true);
    for &c in g.children(k) {
        out.remove_directed(k, c);
        out.add_directed(n + k, c);
    }
    if !keep {
        out.remove_node(k);
    }
    out
}

/// Identification plan for `p(Y(a))` on a hidden-free graph.
#[derive(Clone, Debug)]
pub struct Plan {
    graph: Admg,
    treat: Vec<Intervention>,
    symbols: Vec<String>,
    outcomes: VSet,
    y_star: VSet,
    districts: Vec<DistrictTerm>,
}

/// A district whose splitting got stuck.
#[derive(Clone, Debug)]
pub struct Stuck {
    pub kernel: Kernel,
    pub remaining: VSet,
    pub hedge: HedgeWitness,
}

impl Plan {
    /// `reserved` symbols are kept out of the value symbols.
    pub fn new(g: &Admg, outcomes: &VSet, treat: &[Intervention], reserved: &[String]) -> Result<Plan> {
        if g.has_hidden() {
            return Err(Error::Graph("identification runs on a graph without hidden variables".into()));
        }
        let sw = build_swig(g, treat, None)?;
        let n = g.len();
        let symbols = value_symbols(
            g,
            sw.interventions()
                .iter()
                .map(|t| t.symbol.as_str())
                .chain(reserved.iter().map(String::as_str)),
        );
        let y_star: VSet = sw.mixed().ancestors(outcomes).into_iter().filter(|&v| v < n).collect();
        let districts = sw
            .mixed()
            .induced(&y_star)
            .districts()
            .into_iter()
            .map(|d| {
                let strict_parents = d
                    .iter()
                    .flat_map(|&v| sw.mixed().parents(v).iter().copied())
                    .filter(|&p| p < n && !d.contains(&p))
                    .collect();
                DistrictTerm {
                    district: d,
                    strict_parents,
                }
            })
            .collect();
        Ok(Plan {
            graph: g.clone(),
            treat: sw.interventions().to_vec(),
            symbols,
            outcomes: outcomes.clone(),
            y_star,
            districts,
        })
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn y_star(&self) -> &VSet {
        &self.y_star
    }

    pub fn districts(&self) -> &[DistrictTerm] {
        &self.districts
    }

    pub fn interventions(&self) -> &[Intervention] {
        &self.treat
    }

    fn treatment(&self, v: VertexId) -> Option<&Intervention> {
        self.treat.iter().find(|t| t.vertex == v)
    }

    /// Vertices split to reach the term of `d`: every treatment and every
    /// vertex outside `d`.
    pub fn to_split(&self, d: &VSet) -> VSet {
        (0..self.graph.len())
            .filter(|v| !d.contains(v) || self.treatment(*v).is_some())
            .collect()
    }

    /// Value given to the fixed half of `k`.
    pub fn split_value(&self, k: VertexId) -> Value {
        match self.treatment(k) {
            Some(Intervention { state: Some(s), .. }) => Value::State(*s),
            Some(t) => Value::Sym(t.symbol.clone()),
            None => Value::Sym(self.symbols[k].clone()),
        }
    }

    /// Splits toward the term of `d`, greedily by lowest id or in `order`.
    pub fn district_kernel(
        &self,
        d: &VSet,
        order: Option<&[VertexId]>,
    ) -> Result<std::result::Result<Kernel, Box<Stuck>>> {
        let mut kernel = Kernel::observed(&self.graph, self.symbols.clone())?;
        let mut remaining = self.to_split(d);
        if let Some(order) = order {
            let as_set: VSet = order.iter().copied().collect();
            if as_set != remaining || order.len() != remaining.len() {
                return Err(Error::Query("split order must list each vertex to split once".into()));
            }
        }
        let mut step = 0;
        while !remaining.is_empty() {
            let candidates: Vec<VertexId> = match order {
                Some(o) => vec![o[step]],
                None => remaining.iter().copied().collect(),
            };
            let mut next = None;
            for k in candidates {
                if let Ok(kn) = kernel.split_once(k, self.split_value(k), d.contains(&k)) {
                    next = Some((k, kn));
                    break;
                }
            }
            match next {
                Some((k, kn)) => {
                    kernel = kn;
                    remaining.remove(&k);
                    step += 1;
                }
                None => {
                    let hedge = self.hedge(&kernel, &remaining, d);
                    return Ok(Err(Box::new(Stuck {
                        kernel,
                        remaining,
                        hedge,
                    })));
                }
            }
        }
        Ok(Ok(kernel))
    }

    fn hedge(&self, kernel: &Kernel, remaining: &VSet, d: &VSet) -> HedgeWitness {
        let g = kernel.graph();
        let live: VSet = kernel.random().intersection(&self.y_star).copied().collect();
        for &r in remaining {
            let mut keep = live.clone();
            keep.insert(r);
            let comp = g.induced(&keep).district(r);
            if comp.len() >= 2 {
                return HedgeWitness {
                    inner: VSet::from([r]),
                    outer: comp,
                    district: d.clone(),
                };
            }
        }
        let r = *remaining.iter().next().unwrap_or(&0);
        HedgeWitness {
            inner: VSet::from([r]),
            outer: g.district(r),
            district: d.clone(),
        }
    }

    /// Every order in which the vertices of `to_split(d)` can be split.
    pub fn valid_orders(&self, d: &VSet) -> Vec<Vec<VertexId>> {
        let n = self.graph.len();
        let kernel = match Kernel::observed(&self.graph, self.symbols.clone()) {
            Ok(k) => k,
            Err(_) => return Vec::new(),
        };
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        orders(kernel.g, n, self.to_split(d), d, &mut prefix, &mut out);
        out
    }

    /// Joins district kernels: `Σ_{Y*\Y} Π_D q_D`, simplified. Symbols that
    /// remain free but belong to no outcome or treatment are evaluated at state 0.
    pub fn assemble(&self, kernels: &[Kernel]) -> Estimand {
        let product = Estimand::Product(kernels.iter().map(|k| k.expr.clone()).collect());
        let over: Vec<String> = self
            .y_star
            .difference(&self.outcomes)
            .map(|&v| self.symbols[v].clone())
            .collect();
        let e = simplify(&Estimand::sum(over, product));
        let allowed: Vec<&str> = self
            .outcomes
            .iter()
            .map(|&v| self.symbols[v].as_str())
            .chain(self.treat.iter().filter(|t| t.state.is_none()).map(|t| t.symbol.as_str()))
            .collect();
        let stray: Vec<(String, usize)> = e
            .free_symbols()
            .into_iter()
            .filter(|s| !allowed.contains(&s.as_str()))
            .map(|s| (s, 0))
            .collect();
        if stray.is_empty() {
            e
        } else {
            Estimand::fix_eval(stray, e)
        }
    }

    /// Runs every district greedily.
    pub fn run(&self) -> Result<std::result::Result<Estimand, HedgeWitness>> {
        let mut kernels = Vec::new();
        for d in &self.districts {
            match self.district_kernel(&d.district, None)? {
                Ok(k) => kernels.push(k),
                Err(stuck) => return Ok(Err(stuck.hedge)),
            }
        }
        Ok(Ok(self.assemble(&kernels)))
    }
}

fn orders(g: Mixed, n: usize, remaining: VSet, d: &VSet, prefix: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
    if remaining.is_empty() {
        out.push(prefix.clone());
        return;
    }
    for &k in &remaining {
        if g.is_random(k) && g.fixable(k).is_ok() {
            let next = split_graph(&g, n, k, d.contains(&k));
            let mut rest = remaining.clone();
            rest.remove(&k);
            prefix.push(k);
            orders(next, n, rest, d, prefix, out);
            prefix.pop();
        }
    }
}

/// The extended g-formula: `Π_i p(v_i | pa_i)` over every vertex of a DAG,
/// treated parents set to their intervention values and treated vertices
/// keeping their natural value.
pub fn g_formula(g: &Admg, treat: &[Intervention]) -> Result<Estimand> {
    if g.has_hidden() || !g.bidirected_edges().is_empty() {
        return Err(Error::Graph("g-formula needs a DAG without hidden variables".into()));
    }
    let sw = build_swig(g, treat, None)?;
    let symbols = sw.value_symbols();
    let value = |v: VertexId| match sw.intervention(v) {
        Some(Intervention { state: Some(s), .. }) => Value::State(*s),
        Some(t) => Value::Sym(t.symbol.clone()),
        None => Value::Sym(symbols[v].clone()),
    };
    let factors = (0..g.len())
        .map(|v| {
            let given = g
                .parents(v)
                .into_iter()
                .map(|p| Assign::new(g.name(p), value(p)))
                .collect();
            Estimand::prob(vec![Assign::sym(g.name(v), symbols[v].clone())], given)
        })
        .collect();
    Ok(Estimand::Product(factors))
}

/// Observed projection plus the map from its ids back to `g`.
fn projection(g: &Admg) -> (Admg, Vec<VertexId>) {
    (g.observed_projection(), g.observed().into_iter().collect())
}

fn to_proj(ids: &[VertexId], v: VertexId) -> VertexId {
    ids.iter().position(|&o| o == v).unwrap_or(usize::MAX)
}

fn map_treat(ids: &[VertexId], treat: &[Intervention]) -> Vec<Intervention> {
    treat
        .iter()
        .map(|t| Intervention {
            vertex: to_proj(ids, t.vertex),
            ..t.clone()
        })
        .collect()
}

/// Identifies `p(Y = targets)` under `treat` on a hidden-free graph.
fn marginal_on(
    p: &Admg,
    outcomes: &[(VertexId, Value)],
    treat: &[Intervention],
) -> Result<std::result::Result<Estimand, HedgeWitness>> {
    let reserved: Vec<String> = outcomes
        .iter()
        .filter_map(|(_, v)| v.as_sym().map(str::to_string))
        .collect();
    let ys: VSet = outcomes.iter().map(|(v, _)| *v).collect();
    let plan = Plan::new(p, &ys, treat, &reserved)?;
    Ok(plan.run()?.map(|e| {
        let map: Vec<(String, Value)> = outcomes
            .iter()
            .map(|(v, t)| (plan.symbols[*v].clone(), t.clone()))
            .filter(|(s, t)| t.as_sym() != Some(s.as_str()))
            .collect();
        e.rename(&map)
    }))
}

fn target(t: &crate::query::Term, defaults: &[String]) -> Value {
    t.value.clone().unwrap_or_else(|| Value::Sym(defaults[t.vertex].clone()))
}

/// Identifies `p(Y(a))`; conditioning terms are not allowed.
pub fn identify_marginal(g: &Admg, q: &CounterfactualQuery) -> Result<Identification> {
    q.validate(g)?;
    if !q.given.is_empty() {
        return Err(Error::Query("marginal identification takes no conditioning terms".into()));
    }
    let (p, ids) = projection(g);
    let defaults = q.default_symbols(g);
    let outcomes: Vec<(VertexId, Value)> = q
        .outcomes
        .iter()
        .map(|t| (to_proj(&ids, t.vertex), target(t, &defaults)))
        .collect();
    Ok(match marginal_on(&p, &outcomes, &map_treat(&ids, &q.interventions))? {
        Ok(e) => Identification::Identified(e),
        Err(h) => Identification::NotIdentified(h.map(&ids)),
    })
}

/// Conditioning terms moved into the intervention set, and treated
/// conditioning terms dropped, for `p(Y(a) | Z(a))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalReduction {
    /// Untreated conditioning vertices turned into interventions.
    pub intervened: VSet,
    /// Treated conditioning vertices dropped from the conditioning set.
    pub dropped: VSet,
    /// Conditioning vertices that remain.
    pub remaining: VSet,
}

fn separated_in(
    p: &Admg,
    treat: &[Intervention],
    left: &VSet,
    right: &VSet,
    given: &VSet,
) -> Result<bool> {
    if left.is_empty() {
        return Ok(true);
    }
    let sw = build_swig(p, treat, None)?;
    Ok(sw
        .separated(&SeparationQuery::new(left.clone(), right.clone(), given.clone()))?
        .verdict
        .separated)
}

/// Computes the reduction on the hidden-free graph `p`, visiting candidate
/// vertices in `order` (ascending when `None`).
fn reduce(
    p: &Admg,
    ys: &VSet,
    zs: &VSet,
    treat: &[Intervention],
    defaults: &[String],
    reverse: bool,
) -> Result<ConditionalReduction> {
    let treated: VSet = treat.iter().map(|t| t.vertex).collect();
    let candidates: Vec<VertexId> = {
        let mut c: Vec<VertexId> = zs.difference(&treated).copied().collect();
        if reverse {
            c.reverse();
        }
        c
    };
    let with = |zp: &VSet| -> Vec<Intervention> {
        let mut t = treat.to_vec();
        t.extend(zp.iter().map(|&z| Intervention {
            vertex: z,
            symbol: defaults[z].clone(),
            state: None,
        }));
        t
    };
    let mut zp = VSet::new();
    loop {
        let mut grew = false;
        for &z in &candidates {
            if zp.contains(&z) {
                continue;
            }
            let mut trial = zp.clone();
            trial.insert(z);
            let given: VSet = zs.difference(&trial).copied().collect();
            if separated_in(p, &with(&trial), &trial, ys, &given)? {
                zp = trial;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut dropped = VSet::new();
    for &a in zs.intersection(&treated) {
        let mut trial = dropped.clone();
        trial.insert(a);
        let given: VSet = zs.iter().filter(|v| !zp.contains(v) && !trial.contains(v)).copied().collect();
        if separated_in(p, &with(&zp), &trial, ys, &given)? {
            dropped = trial;
        }
    }
    let remaining = zs.iter().filter(|v| !zp.contains(v) && !dropped.contains(v)).copied().collect();
    Ok(ConditionalReduction {
        intervened: zp,
        dropped,
        remaining,
    })
}

/// The reduction used by [`identify_conditional`], in vertex ids of `g`.
pub fn conditional_reduction(g: &Admg, q: &CounterfactualQuery) -> Result<ConditionalReduction> {
    q.validate(g)?;
    let (p, ids) = projection(g);
    let treat = map_treat(&ids, &q.interventions);
    let defaults = value_symbols(&p, treat.iter().map(|t| t.symbol.as_str()));
    let ys: VSet = q.outcomes.iter().map(|t| to_proj(&ids, t.vertex)).collect();
    let zs: VSet = q.given.iter().map(|t| to_proj(&ids, t.vertex)).collect();
    let fwd = reduce(&p, &ys, &zs, &treat, &defaults, false)?;
    let rev = reduce(&p, &ys, &zs, &treat, &defaults, true)?;
    if fwd.intervened != rev.intervened {
        return Err(Error::Query(format!(
            "conditioning set reduction depends on visiting order: {{{}}} vs {{{}}}",
            p.names(&fwd.intervened),
            p.names(&rev.intervened)
        )));
    }
    let back = |s: VSet| s.into_iter().map(|v| ids[v]).collect();
    Ok(ConditionalReduction {
        intervened: back(fwd.intervened),
        dropped: back(fwd.dropped),
        remaining: back(fwd.remaining),
    })
}

/// Identifies `p(Y(a) | Z(a))`; without conditioning terms this is
/// [`identify_marginal`].
pub fn identify_conditional(g: &Admg, q: &CounterfactualQuery) -> Result<Identification> {
    if q.given.is_empty() {
        return identify_marginal(g, q);
    }
    let red = conditional_reduction(g, q)?;
    let (p, ids) = projection(g);
    let treat = map_treat(&ids, &q.interventions);
    let defaults = value_symbols(&p, treat.iter().map(|t| t.symbol.as_str()));
    let mut inner_treat = treat.clone();
    for &z in &red.intervened {
        let z = to_proj(&ids, z);
        inner_treat.push(Intervention {
            vertex: z,
            symbol: defaults[z].clone(),
            state: None,
        });
    }
    let mut outcomes: Vec<(VertexId, Value)> = q
        .outcomes
        .iter()
        .map(|t| {
            let v = to_proj(&ids, t.vertex);
            (v, Value::Sym(defaults[v].clone()))
        })
        .collect();
    for &w in &red.remaining {
        let w = to_proj(&ids, w);
        outcomes.push((w, Value::Sym(defaults[w].clone())));
    }
    let num = match marginal_on(&p, &outcomes, &inner_treat)? {
        Ok(e) => e,
        Err(h) => return Ok(Identification::NotIdentified(h.map(&ids))),
    };
    let ysyms: Vec<String> = q
        .outcomes
        .iter()
        .map(|t| defaults[to_proj(&ids, t.vertex)].clone())
        .collect();
    let den = simplify(&Estimand::sum(ysyms, num.clone()));
    let mut e = if den == Estimand::One {
        num
    } else {
        simplify(&Estimand::ratio(num, den))
    };
    let bindings: Vec<(String, Value)> = q
        .given
        .iter()
        .filter(|t| !red.dropped.contains(&t.vertex))
        .filter_map(|t| {
            let d = defaults[to_proj(&ids, t.vertex)].clone();
            match &t.value {
                Some(v) if v.as_sym() != Some(d.as_str()) => Some((d, v.clone())),
                _ => None,
            }
        })
        .collect();
    if !bindings.is_empty() {
        e = Estimand::substitute(bindings, e);
    }
    let pins: Vec<(String, Value)> = q
        .outcomes
        .iter()
        .filter_map(|t| {
            let d = defaults[to_proj(&ids, t.vertex)].clone();
            match &t.value {
                Some(v) if v.as_sym() != Some(d.as_str()) => Some((d, v.clone())),
                _ => None,
            }
        })
        .collect();
    if !pins.is_empty() {
        e = e.rename(&pins);
    }
    Ok(Identification::Identified(e))
}

/// Identifies any query, conditional or not.
pub fn identify(g: &Admg, q: &CounterfactualQuery) -> Result<Identification> {
    identify_conditional(g, q)
}

impl fmt::Display for Identification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identification::Identified(e) => write!(f, "{e}"),
            Identification::NotIdentified(h) => write!(
                f,
                "NOT-IDENTIFIED inner={:?} outer={:?} district={:?}",
                h.inner, h.outer, h.district
            ),
        }
    }
}
