//! Error-term couplings and counterfactual enumeration.
//!
//! Each variable draws its value at parent row `r` from a uniform threshold:
//! state `s` when `cum_r(s) <= U < cum_r(s+1)`.
//!
//! * `Independent`: every row has its own uniform (an NPSEM with independent
//!   errors).
//! * `Comonotone`: all rows of a variable share one uniform. Variables with at
//!   least two rows are paired, in topological order, with the earliest
//!   unpaired variable before them; in the later variable of a pair, odd rows
//!   read `frac(U_first + U_second)` instead of `U_second`. Every single-world
//!   selection of rows still sees independent uniforms, while rows of the
//!   same error term across worlds are coupled with the partner's error term.
//!
//! Joints are enumerated lazily: at each variable only the rows reached by
//! the requested worlds are resolved.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{row_count, DiscreteScm};
use crate::config::Guards;
use crate::error::{Error, Result};
use crate::estimand::JointTable;
use crate::graph::{Admg, VertexId};

/// Intervention assignment: vertex to state.
pub type World = BTreeMap<VertexId, usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coupling {
    Independent,
    Comonotone,
}

/// `V(world)`: the natural value of `vertex` when it is itself treated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfTerm {
    pub vertex: VertexId,
    pub world: World,
}

impl CfTerm {
    pub fn new(vertex: VertexId, world: World) -> Self {
        CfTerm { vertex, world }
    }

    pub fn factual(vertex: VertexId) -> Self {
        CfTerm {
            vertex,
            world: World::new(),
        }
    }

    /// `Y(A=1,M=0)` or `Y`.
    pub fn name(&self, g: &Admg) -> String {
        if self.world.is_empty() {
            return g.name(self.vertex).to_string();
        }
        let parts: Vec<String> = self
            .world
            .iter()
            .map(|(&v, &s)| format!("{}={}", g.name(v), g.var(v).states[s]))
            .collect();
        format!("{}({})", g.name(self.vertex), parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Partner {
    Alone,
    First,
    Second(VertexId),
}

/// Coupled error terms of a structural model.
#[derive(Clone, Debug)]
pub struct ResponseFunctionTable {
    scm: DiscreteScm,
    coupling: Coupling,
    order: Vec<VertexId>,
    partner: Vec<Partner>,
    cum: Vec<Vec<Vec<BigRational>>>,
    parents: Vec<Vec<(VertexId, usize)>>,
}

type Interval = (BigRational, BigRational);

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// `area{u + v <= t}` over `[a1,a2] x [b1,b2]`.
fn below(t: &BigRational, a: &Interval, b: &Interval) -> BigRational {
    let tri = |x: BigRational| {
        if x > BigRational::zero() {
            &x * &x * half()
        } else {
            BigRational::zero()
        }
    };
    tri(t - &a.0 - &b.0) - tri(t - &a.1 - &b.0) - tri(t - &a.0 - &b.1) + tri(t - &a.1 - &b.1)
}

/// `area{u in a, v in b, frac(u + v) in c}`.
fn twisted_area(a: &Interval, b: &Interval, c: &Interval) -> BigRational {
    let mut total = BigRational::zero();
    for shift in [BigRational::zero(), BigRational::one()] {
        total += below(&(&c.1 + &shift), a, b) - below(&(&c.0 + &shift), a, b);
    }
    total
}

/// Cells of `[0,1)` cut at every breakpoint of the given cumulative rows.
fn cells(cums: &[&Vec<BigRational>]) -> Vec<Interval> {
    let mut cuts: Vec<BigRational> = vec![BigRational::zero(), BigRational::one()];
    for c in cums {
        cuts.extend(c.iter().cloned());
    }
    cuts.sort();
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect()
}

/// State selected by a threshold in `cell`.
fn pick(cum: &[BigRational], cell: &Interval) -> usize {
    // cum[s] is the upper end of state s
    cum.iter().position(|c| cell.0 < *c).unwrap_or(cum.len() - 1)
}

#[derive(Clone)]
struct Option_ {
    values: Vec<usize>,
    mass: BigRational,
    cell: Option<Interval>,
}

impl ResponseFunctionTable {
    /// Builds the coupling; fails when the error space exceeds the guard.
    pub fn new(scm: &DiscreteScm, coupling: Coupling, guards: &Guards) -> Result<Self> {
        let g = scm.graph();
        let order = g
            .mixed()
            .topological_order()
            .ok_or_else(|| Error::Model("model graph has a cycle".into()))?;
        let mut partner = vec![Partner::Alone; g.len()];
        if coupling == Coupling::Comonotone {
            for (pos, &j) in order.iter().enumerate() {
                if row_count(g, j) < 2 || partner[j] != Partner::Alone {
                    continue;
                }
                if let Some(&i) = order[..pos].iter().find(|&&i| partner[i] == Partner::Alone) {
                    partner[i] = Partner::First;
                    partner[j] = Partner::Second(i);
                }
            }
        }
        let cum = (0..g.len())
            .map(|v| {
                scm.cpt(v)
                    .iter()
                    .map(|row| {
                        let mut acc = BigRational::zero();
                        row.iter()
                            .map(|p| {
                                acc += p;
                                acc.clone()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let parents = (0..g.len())
            .map(|v| g.parents(v).iter().map(|&p| (p, g.var(p).cardinality())).collect())
            .collect();
        let table = ResponseFunctionTable {
            scm: scm.clone(),
            coupling,
            order,
            partner,
            cum,
            parents,
        };
        let size = table.error_space_size();
        if size > guards.max_error_configurations {
            return Err(Error::Guard {
                what: "error configurations",
                size,
                limit: guards.max_error_configurations,
            });
        }
        Ok(table)
    }

    pub fn scm(&self) -> &DiscreteScm {
        &self.scm
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Pairs `(first, second)` coupled across variables.
    pub fn pairs(&self) -> Vec<(VertexId, VertexId)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(j, p)| match p {
                Partner::Second(i) => Some((*i, j)),
                _ => None,
            })
            .collect()
    }

    /// Number of error configurations with positive mass, bounded above.
    pub fn error_space_size(&self) -> u128 {
        let g = self.scm.graph();
        let mut size: u128 = 1;
        for v in 0..g.len() {
            let rows: Vec<&Vec<BigRational>> = self.cum[v].iter().collect();
            let n = match (self.coupling, self.partner[v]) {
                (Coupling::Independent, _) => {
                    (g.var(v).cardinality() as u128).saturating_pow(rows.len() as u32)
                }
                (Coupling::Comonotone, Partner::Second(_)) => {
                    let even: Vec<&Vec<BigRational>> = rows.iter().step_by(2).copied().collect();
                    let odd: Vec<&Vec<BigRational>> = rows.iter().skip(1).step_by(2).copied().collect();
                    (cells(&even).len() as u128).saturating_mul(cells(&odd).len() as u128)
                }
                (Coupling::Comonotone, _) => cells(&rows).len() as u128,
            };
            size = size.saturating_mul(n);
        }
        size
    }

    /// Distribution of the error term of `v` alone: full maps from parent
    /// rows to states with their masses.
    pub fn error_term(&self, v: VertexId) -> Vec<(Vec<usize>, BigRational)> {
        let rows: Vec<usize> = (0..self.cum[v].len()).collect();
        let partner = match self.partner[v] {
            Partner::Second(_) => Partner::Second(usize::MAX),
            p => p,
        };
        self.options(v, &rows, partner, None)
            .into_iter()
            .map(|o| (o.values, o.mass))
            .collect()
    }

    fn options(&self, v: VertexId, rows: &[usize], partner: Partner, first: Option<&Interval>) -> Vec<Option_> {
        let cum = &self.cum[v];
        let k = self.scm.graph().var(v).cardinality();
        match self.coupling {
            Coupling::Independent => {
                let mut out = vec![Option_ {
                    values: Vec::new(),
                    mass: BigRational::one(),
                    cell: None,
                }];
                for &r in rows {
                    let mut next = Vec::new();
                    for o in &out {
                        for s in 0..k {
                            let p = &self.scm.cpt(v)[r][s];
                            if p.is_zero() {
                                continue;
                            }
                            let mut values = o.values.clone();
                            values.push(s);
                            next.push(Option_ {
                                values,
                                mass: &o.mass * p,
                                cell: None,
                            });
                        }
                    }
                    out = next;
                }
                out
            }
            Coupling::Comonotone => match partner {
                Partner::Second(_) => {
                    let even: Vec<&Vec<BigRational>> = rows.iter().filter(|r| *r % 2 == 0).map(|&r| &cum[r]).collect();
                    let odd: Vec<&Vec<BigRational>> = rows.iter().filter(|r| *r % 2 == 1).map(|&r| &cum[r]).collect();
                    let mut out = Vec::new();
                    for ce in cells(&even) {
                        for co in cells(&odd) {
                            let mass = match first {
                                Some(a) => twisted_area(a, &ce, &co) / (&a.1 - &a.0),
                                None => (&ce.1 - &ce.0) * (&co.1 - &co.0),
                            };
                            if mass.is_zero() {
                                continue;
                            }
                            let values = rows
                                .iter()
                                .map(|&r| pick(&cum[r], if r % 2 == 0 { &ce } else { &co }))
                                .collect();
                            out.push(Option_ {
                                values,
                                mass,
                                cell: None,
                            });
                        }
                    }
                    out
                }
                _ => {
                    let reached: Vec<&Vec<BigRational>> = rows.iter().map(|&r| &cum[r]).collect();
                    cells(&reached)
                        .into_iter()
                        .map(|c| Option_ {
                            values: rows.iter().map(|&r| pick(&cum[r], &c)).collect(),
                            mass: &c.1 - &c.0,
                            cell: Some(c),
                        })
                        .collect()
                }
            },
        }
    }

    /// Exact joint of the requested terms, variables named by [`CfTerm::name`].
    pub fn counterfactual_joint(&self, terms: &[CfTerm]) -> Result<JointTable<BigRational>> {
        let g = self.scm.graph();
        for t in terms {
            if t.vertex >= g.len() {
                return Err(Error::UnknownVertex(format!("#{}", t.vertex)));
            }
            for (&v, &s) in &t.world {
                if v >= g.len() || s >= g.var(v).cardinality() {
                    return Err(Error::Intervention(format!("bad assignment in {}", t.name(g))));
                }
            }
        }
        let names: Vec<(String, usize)> = terms
            .iter()
            .map(|t| (t.name(g), g.var(t.vertex).cardinality()))
            .collect();
        self.joint(terms, names)
    }

    fn joint(&self, terms: &[CfTerm], names: Vec<(String, usize)>) -> Result<JointTable<BigRational>> {
        let g = self.scm.graph();
        let mut worlds: Vec<World> = Vec::new();
        let mut slot = Vec::new();
        for t in terms {
            let w = match worlds.iter().position(|w| *w == t.world) {
                Some(i) => i,
                None => {
                    worlds.push(t.world.clone());
                    worlds.len() - 1
                }
            };
            slot.push((w, t.vertex));
        }
        let size: usize = names.iter().map(|v| v.1).product();
        let mut out = vec![BigRational::zero(); size];
        let mut values = vec![vec![0usize; g.len()]; worlds.len()];
        let mut first_cells: Vec<Option<Interval>> = vec![None; g.len()];
        let mut run = Run {
            table: self,
            worlds: &worlds,
            slot: &slot,
            cards: names.iter().map(|v| v.1).collect(),
            out: &mut out,
            memo: HashMap::new(),
        };
        run.go(0, &mut values, &mut first_cells, BigRational::one());
        JointTable::new(names, out)
    }

    /// Joint of the observed variables, named as in the graph.
    pub fn factual_joint(&self) -> Result<JointTable<BigRational>> {
        self.interventional_joint(&World::new())
    }

    /// Joint of every observed `V(world)`, named by plain variable names.
    pub fn interventional_joint(&self, world: &World) -> Result<JointTable<BigRational>> {
        let g = self.scm.graph();
        let terms: Vec<CfTerm> = g.observed().into_iter().map(|v| CfTerm::new(v, world.clone())).collect();
        for (&v, &s) in world {
            if v >= g.len() || s >= g.var(v).cardinality() {
                return Err(Error::Intervention(format!("bad assignment to #{v}")));
            }
        }
        let names = terms
            .iter()
            .map(|t| (g.name(t.vertex).to_string(), g.var(t.vertex).cardinality()))
            .collect();
        self.joint(&terms, names)
    }
}

/// Vertex, reached rows and the partner's cell.
type MemoKey = (VertexId, Vec<usize>, Option<Interval>);

struct Run<'a> {
    table: &'a ResponseFunctionTable,
    worlds: &'a [World],
    slot: &'a [(usize, VertexId)],
    cards: Vec<usize>,
    out: &'a mut Vec<BigRational>,
    memo: HashMap<MemoKey, Rc<Vec<Option_>>>,
}

impl Run<'_> {
    fn go(&mut self, pos: usize, values: &mut Vec<Vec<usize>>, first_cells: &mut Vec<Option<Interval>>, mass: BigRational) {
        let t = self.table;
        if pos == t.order.len() {
            let idx = self
                .slot
                .iter()
                .zip(&self.cards)
                .fold(0, |acc, (&(w, v), &k)| acc * k + values[w][v]);
            self.out[idx] += mass;
            return;
        }
        let v = t.order[pos];
        let row_of: Vec<usize> = (0..self.worlds.len())
            .map(|w| {
                let world = &self.worlds[w];
                t.parents[v].iter().fold(0, |acc, &(p, k)| {
                    acc * k + world.get(&p).copied().unwrap_or(values[w][p])
                })
            })
            .collect();
        let mut rows = row_of.clone();
        rows.sort_unstable();
        rows.dedup();
        let first = match t.partner[v] {
            Partner::Second(i) => first_cells[i].clone(),
            _ => None,
        };
        let key = (v, rows, first);
        let opts = match self.memo.get(&key) {
            Some(o) => o.clone(),
            None => {
                let o = Rc::new(t.options(v, &key.1, t.partner[v], key.2.as_ref()));
                self.memo.insert(key.clone(), o.clone());
                o
            }
        };
        let rows = &key.1;
        let picks: Vec<usize> = row_of.iter().map(|r| rows.binary_search(r).unwrap_or(0)).collect();
        for o in opts.iter() {
            for (w, &k) in picks.iter().enumerate() {
                values[w][v] = o.values[k];
            }
            let saved = first_cells[v].take();
            if t.partner[v] == Partner::First {
                first_cells[v] = o.cell.clone();
            }
            self.go(pos + 1, values, first_cells, &mass * &o.mass);
            first_cells[v] = saved;
        }
    }
}
