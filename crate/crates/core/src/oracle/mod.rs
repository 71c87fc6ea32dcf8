//! Exact counterfactual ground truth for discrete structural models.
//!
//! A [`DiscreteScm`] holds rational CPTs on a hidden-variable DAG. A
//! [`ResponseFunctionTable`] couples each CPT into an error term (a map from
//! parent configurations to values) and enumerates counterfactual joints by
//! recursive substitution.

mod context;
mod coupling;
mod independence;
mod model;

pub use context::{context_specific_scm, context_graph};
pub use coupling::{CfTerm, Coupling, ResponseFunctionTable, World};
pub use independence::{check_independence, independence_gap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::error::{Error, Result};
use crate::estimand::JointTable;
use crate::graph::{Admg, VertexId};

/// CPT rows per parent configuration, parents in ascending id order with the
/// first parent most significant.
pub type Cpt = Vec<Vec<BigRational>>;

/// Smallest entry of a random CPT.
pub const CPT_FLOOR: f64 = 0.01;
/// Random CPT entries are multiples of this.
pub const CPT_QUANTUM: i64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteScm {
    graph: Admg,
    cpts: Vec<Cpt>,
}

fn merr(msg: impl Into<String>) -> Error {
    Error::Model(msg.into())
}

/// Number of parent configurations of `v`.
pub fn row_count(g: &Admg, v: VertexId) -> usize {
    g.parents(v).iter().map(|&p| g.var(p).cardinality()).product()
}

/// Row index of `v` for parent states given per vertex.
pub fn row_index(g: &Admg, v: VertexId, state_of: impl Fn(VertexId) -> usize) -> usize {
    g.parents(v)
        .iter()
        .fold(0, |acc, &p| acc * g.var(p).cardinality() + state_of(p))
}

impl DiscreteScm {
    pub fn new(graph: Admg, cpts: Vec<Cpt>) -> Result<Self> {
        if !graph.bidirected_edges().is_empty() {
            return Err(merr("a structural model needs a DAG; bidirected edges must be made hidden parents"));
        }
        if cpts.len() != graph.len() {
            return Err(merr(format!("{} CPTs for {} variables", cpts.len(), graph.len())));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            let name = graph.name(v);
            if cpt.len() != row_count(&graph, v) {
                return Err(merr(format!(
                    "CPT of {name} has {} rows, expected {}",
                    cpt.len(),
                    row_count(&graph, v)
                )));
            }
            for (r, row) in cpt.iter().enumerate() {
                if row.len() != graph.var(v).cardinality() {
                    return Err(merr(format!("CPT of {name}, row {r}: wrong number of entries")));
                }
                if row.iter().any(|p| *p < BigRational::zero()) {
                    return Err(merr(format!("CPT of {name}, row {r}: negative entry")));
                }
                let total = row.iter().fold(BigRational::zero(), |a, p| a + p);
                if !total.is_one() {
                    return Err(merr(format!("CPT of {name}, row {r}: entries sum to {total}")));
                }
            }
        }
        Ok(DiscreteScm { graph, cpts })
    }

    /// Random CPTs: each row uniform on the simplex, entries at least
    /// [`CPT_FLOOR`], quantized to `1 / CPT_QUANTUM`.
    pub fn random<R: Rng + ?Sized>(graph: &Admg, rng: &mut R) -> Result<Self> {
        let cpts = (0..graph.len())
            .map(|v| {
                let k = graph.var(v).cardinality();
                (0..row_count(graph, v)).map(|_| random_row(k, rng)).collect()
            })
            .collect();
        Self::new(graph.clone(), cpts)
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn cpt(&self, v: VertexId) -> &Cpt {
        &self.cpts[v]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    /// Replaces one CPT row.
    pub fn set_row(&mut self, v: VertexId, row: usize, probs: Vec<BigRational>) -> Result<()> {
        let mut cpts = self.cpts.clone();
        *cpts
            .get_mut(v)
            .and_then(|c| c.get_mut(row))
            .ok_or_else(|| merr(format!("no row {row} for vertex #{v}")))? = probs;
        *self = Self::new(self.graph.clone(), cpts)?;
        Ok(())
    }

    /// Joint of the observed variables by the DAG factorization, hidden
    /// variables summed out.
    pub fn observed_joint(&self) -> Result<JointTable<BigRational>> {
        let g = &self.graph;
        let order = g
            .mixed()
            .topological_order()
            .ok_or_else(|| merr("model graph has a cycle"))?;
        let observed: Vec<VertexId> = g.observed().into_iter().collect();
        let names: Vec<(String, usize)> = observed
            .iter()
            .map(|&v| (g.name(v).to_string(), g.var(v).cardinality()))
            .collect();
        let mut out = vec![BigRational::zero(); names.iter().map(|n| n.1).product()];
        let mut state = vec![0usize; g.len()];
        self.factorize(&order, &observed, &mut state, BigRational::one(), &mut out);
        JointTable::new(names, out)
    }

    fn factorize(&self, order: &[VertexId], observed: &[VertexId], state: &mut Vec<usize>, mass: BigRational, out: &mut [BigRational]) {
        let Some((&v, rest)) = order.split_first() else {
            let idx = observed
                .iter()
                .fold(0, |acc, &v| acc * self.graph.var(v).cardinality() + state[v]);
            out[idx] += mass;
            return;
        };
        let row = row_index(&self.graph, v, |p| state[p]);
        for (s, p) in self.cpts[v][row].iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            state[v] = s;
            self.factorize(rest, observed, state, &mass * p, out);
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        model::parse(text)
    }

    pub fn render(&self) -> String {
        model::render(self)
    }
}

fn random_row<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<BigRational> {
    let x: Vec<f64> = match Dirichlet::new(&vec![1.0; k]) {
        Ok(d) => d.sample(rng),
        Err(_) => vec![1.0 / k as f64; k],
    };
    let spread = 1.0 - CPT_FLOOR * k as f64;
    let mut ints: Vec<i64> = x
        .iter()
        .take(k - 1)
        .map(|&xi| ((CPT_FLOOR + spread * xi) * CPT_QUANTUM as f64).floor() as i64)
        .collect();
    let rest = CPT_QUANTUM - ints.iter().sum::<i64>();
    ints.push(rest);
    ints.into_iter()
        .map(|n| BigRational::new(BigInt::from(n), BigInt::from(CPT_QUANTUM)))
        .collect()
}
