//! Numeric comparison of identified estimands against oracle truth.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::estimand::{evaluate, Estimand, JointTable, Scalar, Value};
use crate::graph::{Admg, VertexId};
use crate::identify::{identify, HedgeWitness, Identification};
use crate::oracle::{CfTerm, Coupling, DiscreteScm, ResponseFunctionTable, World};
use crate::query::{CounterfactualQuery, Term};

/// Result of comparing one estimand against a set of models.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub estimand: Estimand,
    pub models: usize,
    /// Number of (model, symbol assignment) cells compared.
    pub cells: usize,
    /// Cells skipped because the conditioning event has probability zero.
    pub skipped: usize,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VerifyOutcome {
    Verified(Verification),
    NotIdentified(HedgeWitness),
}

/// `n` random models on the canonical DAG of `g`, seeded.
pub fn random_models(g: &Admg, n: usize, seed: u64) -> Result<Vec<DiscreteScm>> {
    let dag = g.canonical_dag();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| DiscreteScm::random(&dag, &mut rng)).collect()
}

/// Free symbols of a query with their ranges.
pub fn query_symbols(g: &Admg, q: &CounterfactualQuery) -> Result<BTreeMap<String, usize>> {
    let defaults = q.default_symbols(g);
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    let mut add = |s: &str, v: VertexId| -> Result<()> {
        let k = g.var(v).cardinality();
        match out.insert(s.to_string(), k) {
            Some(prev) if prev != k => Err(Error::Query(format!(
                "symbol `{s}` ranges over variables of different sizes"
            ))),
            _ => Ok(()),
        }
    };
    for t in &q.interventions {
        if t.state.is_none() {
            add(&t.symbol, t.vertex)?;
        }
    }
    for t in q.outcomes.iter().chain(&q.given) {
        match &t.value {
            None => add(&defaults[t.vertex], t.vertex)?,
            Some(Value::Sym(s)) => add(s, t.vertex)?,
            Some(Value::State(_)) => {}
        }
    }
    Ok(out)
}

fn scm_vertex(scm: &DiscreteScm, g: &Admg, v: VertexId) -> Result<VertexId> {
    scm.graph()
        .vertex(g.name(v))
        .ok_or_else(|| Error::Model(format!("model has no variable `{}`", g.name(v))))
}

fn term_state(t: &Term, defaults: &[String], env: &BTreeMap<String, usize>) -> usize {
    match &t.value {
        Some(Value::State(k)) => *k,
        Some(Value::Sym(s)) => env[s],
        None => env[&defaults[t.vertex]],
    }
}

/// Exact oracle value of the query at one symbol assignment; `None` when the
/// conditioning event has probability zero.
pub fn oracle_truth(
    rft: &ResponseFunctionTable,
    g: &Admg,
    q: &CounterfactualQuery,
    env: &BTreeMap<String, usize>,
) -> Result<Option<BigRational>> {
    let scm = rft.scm();
    let mut world = World::new();
    for t in &q.interventions {
        let s = t.state.unwrap_or_else(|| env[&t.symbol]);
        world.insert(scm_vertex(scm, g, t.vertex)?, s);
    }
    let all: Vec<&Term> = q.outcomes.iter().chain(&q.given).collect();
    let mut terms: Vec<CfTerm> = Vec::new();
    for t in &all {
        let ct = CfTerm::new(scm_vertex(scm, g, t.vertex)?, world.clone());
        if !terms.contains(&ct) {
            terms.push(ct);
        }
    }
    let joint = rft.counterfactual_joint(&terms)?;
    let defaults = q.default_symbols(g);
    let event = |ts: &[Term]| -> Result<Option<Vec<(usize, usize)>>> {
        let mut ev: Vec<(usize, usize)> = Vec::new();
        for t in ts {
            let i = terms
                .iter()
                .position(|c| c.vertex == scm_vertex(scm, g, t.vertex).unwrap_or(usize::MAX))
                .ok_or_else(|| Error::Query(format!("term {} missing", g.name(t.vertex))))?;
            let s = term_state(t, &defaults, env);
            match ev.iter().find(|e| e.0 == i) {
                Some(&(_, prev)) if prev != s => return Ok(None),
                Some(_) => {}
                None => ev.push((i, s)),
            }
        }
        Ok(Some(ev))
    };
    let both: Vec<Term> = q.outcomes.iter().chain(&q.given).cloned().collect();
    let den = match event(&q.given)? {
        Some(ev) => joint.marginal(&ev),
        None => BigRational::zero(),
    };
    if den.is_zero() {
        return Ok(None);
    }
    let num = match event(&both)? {
        Some(ev) => joint.marginal(&ev),
        None => BigRational::zero(),
    };
    Ok(Some(num / den))
}

/// Every assignment of the given symbols.
pub fn assignments(symbols: &BTreeMap<String, usize>) -> Vec<BTreeMap<String, usize>> {
    let mut out = vec![BTreeMap::new()];
    for (s, &k) in symbols {
        out = out
            .into_iter()
            .flat_map(|env| {
                (0..k).map(move |v| {
                    let mut e = env.clone();
                    e.insert(s.clone(), v);
                    e
                })
            })
            .collect();
    }
    out
}

/// Largest `|estimand - truth|` over every symbol assignment of one model,
/// with the count of compared and skipped cells.
pub fn model_error(
    e: &Estimand,
    rft: &ResponseFunctionTable,
    g: &Admg,
    q: &CounterfactualQuery,
) -> Result<(f64, usize, usize)> {
    let observed: JointTable<BigRational> = rft.factual_joint()?;
    let mut worst: f64 = 0.0;
    let (mut cells, mut skipped) = (0, 0);
    for env in assignments(&query_symbols(g, q)?) {
        let Some(truth) = oracle_truth(rft, g, q, &env)? else {
            skipped += 1;
            continue;
        };
        let value = evaluate(e, &observed, &env)?;
        worst = worst.max((value - truth).to_f64().abs());
        cells += 1;
    }
    Ok((worst, cells, skipped))
}

/// Largest `|lhs - rhs|` of two counterfactual distributions over every
/// assignment of their symbols; cells where either side conditions on a
/// null event are skipped.
pub fn equality_gap(
    rft: &ResponseFunctionTable,
    g: &Admg,
    lhs: &CounterfactualQuery,
    rhs: &CounterfactualQuery,
) -> Result<f64> {
    let mut symbols = query_symbols(g, lhs)?;
    symbols.extend(query_symbols(g, rhs)?);
    let mut worst: f64 = 0.0;
    for env in assignments(&symbols) {
        if let (Some(a), Some(b)) = (oracle_truth(rft, g, lhs, &env)?, oracle_truth(rft, g, rhs, &env)?) {
            worst = worst.max((a - b).to_f64().abs());
        }
    }
    Ok(worst)
}

/// Identifies `q` on `g` and compares the estimand with every model.
pub fn verify(
    g: &Admg,
    q: &CounterfactualQuery,
    models: &[DiscreteScm],
    coupling: Coupling,
    guards: &Guards,
) -> Result<VerifyOutcome> {
    let e = match identify(g, q)? {
        Identification::Identified(e) => e,
        Identification::NotIdentified(h) => return Ok(VerifyOutcome::NotIdentified(h)),
    };
    let mut report = Verification {
        estimand: e,
        models: models.len(),
        cells: 0,
        skipped: 0,
        max_abs_error: 0.0,
    };
    for scm in models {
        let rft = ResponseFunctionTable::new(scm, coupling, guards)?;
        let (err, cells, skipped) = model_error(&report.estimand, &rft, g, q)?;
        report.max_abs_error = report.max_abs_error.max(err);
        report.cells += cells;
        report.skipped += skipped;
    }
    Ok(VerifyOutcome::Verified(report))
}
