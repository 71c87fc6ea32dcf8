//! Exact evaluation against a joint probability table.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

use super::{Assign, Estimand, Value};
use crate::error::{Error, Result};

/// Field used for evaluation: `f64` or exact `BigRational`.
pub trait Scalar: Num + Clone + Debug {
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Joint mass function, row-major with the first variable most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable<S> {
    vars: Vec<(String, usize)>,
    mass: Vec<S>,
}

impl<S: Scalar> JointTable<S> {
    pub fn new(vars: Vec<(String, usize)>, mass: Vec<S>) -> Result<Self> {
        let size: usize = vars.iter().map(|v| v.1).product();
        if size != mass.len() {
            return Err(Error::Estimand(format!(
                "table has {} entries, expected {size}",
                mass.len()
            )));
        }
        Ok(JointTable { vars, mass })
    }

    pub fn vars(&self) -> &[(String, usize)] {
        &self.vars
    }

    pub fn mass(&self) -> &[S] {
        &self.mass
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.0 == name)
    }

    pub fn cardinality(&self, name: &str) -> Option<usize> {
        self.var_index(name).map(|i| self.vars[i].1)
    }

    /// State of every variable at a flat index.
    pub fn config(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        for i in (0..self.vars.len()).rev() {
            out[i] = index % self.vars[i].1;
            index /= self.vars[i].1;
        }
        out
    }

    /// Flat index of a full configuration.
    pub fn index(&self, config: &[usize]) -> usize {
        config
            .iter()
            .zip(&self.vars)
            .fold(0, |acc, (&s, v)| acc * v.1 + s)
    }

    /// Probability of a partial assignment given as `(variable index, state)`.
    pub fn marginal(&self, event: &[(usize, usize)]) -> S {
        let mut total = S::zero();
        for (i, m) in self.mass.iter().enumerate() {
            let c = self.config(i);
            if event.iter().all(|&(v, s)| c[v] == s) {
                total = total + m.clone();
            }
        }
        total
    }

    /// Marginal table over the named variables, in the given order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointTable<S>> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|k| {
                self.var_index(k)
                    .ok_or_else(|| Error::Estimand(format!("unknown variable `{k}`")))
            })
            .collect::<Result<_>>()?;
        let vars: Vec<(String, usize)> = idx.iter().map(|&i| self.vars[i].clone()).collect();
        let size: usize = vars.iter().map(|v| v.1).product();
        let mut out = JointTable {
            vars,
            mass: vec![S::zero(); size],
        };
        for (i, m) in self.mass.iter().enumerate() {
            let c = self.config(i);
            let sub: Vec<usize> = idx.iter().map(|&j| c[j]).collect();
            let k = out.index(&sub);
            out.mass[k] = out.mass[k].clone() + m.clone();
        }
        Ok(out)
    }

    pub fn total(&self) -> S {
        self.mass.iter().fold(S::zero(), |a, m| a + m.clone())
    }

    pub fn map<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> JointTable<T> {
        JointTable {
            vars: self.vars.clone(),
            mass: self.mass.iter().map(f).collect(),
        }
    }
}

type Env = BTreeMap<String, usize>;

fn resolve(v: &Value, env: &Env) -> Result<usize> {
    match v {
        Value::State(k) => Ok(*k),
        Value::Sym(s) => env
            .get(s)
            .copied()
            .ok_or_else(|| Error::Estimand(format!("unbound symbol `{s}`"))),
    }
}

fn event<S: Scalar>(xs: &[&Assign], t: &JointTable<S>, env: &Env) -> Result<Option<Vec<(usize, usize)>>> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for a in xs {
        let i = t
            .var_index(&a.var)
            .ok_or_else(|| Error::Estimand(format!("variable `{}` not in table", a.var)))?;
        let s = resolve(&a.value, env)?;
        if s >= t.vars[i].1 {
            return Err(Error::Estimand(format!("state {s} out of range for `{}`", a.var)));
        }
        match out.iter().find(|e| e.0 == i) {
            Some(&(_, prev)) if prev != s => return Ok(None),
            Some(_) => {}
            None => out.push((i, s)),
        }
    }
    Ok(Some(out))
}

/// Cardinality of the variables a bound symbol ranges over, if it is used.
fn domain<S: Scalar>(sym: &str, e: &Estimand, t: &JointTable<S>) -> Result<Option<usize>> {
    let mut found: Option<usize> = None;
    let mut merge = |k: Option<usize>| -> Result<()> {
        match (found, k) {
            (Some(a), Some(b)) if a != b => Err(Error::Estimand(format!(
                "symbol `{sym}` ranges over variables of different sizes"
            ))),
            (None, Some(b)) => {
                found = Some(b);
                Ok(())
            }
            _ => Ok(()),
        }
    };
    match e {
        Estimand::One => {}
        Estimand::Prob { of, given } => {
            for a in of.iter().chain(given) {
                if a.value.as_sym() == Some(sym) {
                    let k = t
                        .cardinality(&a.var)
                        .ok_or_else(|| Error::Estimand(format!("variable `{}` not in table", a.var)))?;
                    merge(Some(k))?;
                }
            }
        }
        Estimand::Product(fs) => {
            for f in fs {
                merge(domain(sym, f, t)?)?;
            }
        }
        Estimand::Ratio(n, d) => {
            merge(domain(sym, n, t)?)?;
            merge(domain(sym, d, t)?)?;
        }
        Estimand::Sum { over, body } => {
            if !over.iter().any(|s| s == sym) {
                merge(domain(sym, body, t)?)?;
            }
        }
        Estimand::Substitute { bindings, body } => {
            for (k, v) in bindings {
                if v.as_sym() == Some(sym) {
                    merge(domain(k, body, t)?)?;
                }
            }
            if !bindings.iter().any(|(k, _)| k == sym) {
                merge(domain(sym, body, t)?)?;
            }
        }
        Estimand::FixEval { bindings, body } => {
            if !bindings.iter().any(|(k, _)| k == sym) {
                merge(domain(sym, body, t)?)?;
            }
        }
    }
    Ok(found)
}

fn eval<S: Scalar>(e: &Estimand, t: &JointTable<S>, env: &mut Env) -> Result<S> {
    match e {
        Estimand::One => Ok(S::one()),
        Estimand::Prob { of, given } => {
            let all: Vec<&Assign> = of.iter().chain(given).collect();
            let num = match event(&all, t, env)? {
                Some(ev) => t.marginal(&ev),
                None => S::zero(),
            };
            if given.is_empty() {
                return Ok(num);
            }
            let g: Vec<&Assign> = given.iter().collect();
            let den = match event(&g, t, env)? {
                Some(ev) => t.marginal(&ev),
                None => S::zero(),
            };
            if den.is_zero() {
                return Err(Error::Positivity(given_text(given, env)));
            }
            Ok(num / den)
        }
        Estimand::Product(fs) => {
            let mut acc = S::one();
            for f in fs {
                acc = acc * eval(f, t, env)?;
            }
            Ok(acc)
        }
        Estimand::Ratio(n, d) => {
            let den = eval(d, t, env)?;
            if den.is_zero() {
                return Err(Error::Positivity(bind_text(d, env)));
            }
            Ok(eval(n, t, env)? / den)
        }
        Estimand::Sum { over, body } => {
            let mut doms = Vec::new();
            for s in over {
                if doms.iter().any(|(d, _)| d == s) {
                    continue;
                }
                if let Some(k) = domain(s, body, t)? {
                    doms.push((s.clone(), k));
                }
            }
            let saved: Vec<Option<usize>> = doms.iter().map(|(s, _)| env.get(s).copied()).collect();
            let r = sum_over(&doms, body, t, env);
            for ((s, _), old) in doms.iter().zip(saved) {
                match old {
                    Some(v) => env.insert(s.clone(), v),
                    None => env.remove(s),
                };
            }
            r
        }
        Estimand::Substitute { bindings, body } => {
            let vals: Vec<(String, usize)> = bindings
                .iter()
                .map(|(s, v)| Ok((s.clone(), resolve(v, env)?)))
                .collect::<Result<_>>()?;
            let mut inner = env.clone();
            inner.extend(vals);
            eval(body, t, &mut inner)
        }
        Estimand::FixEval { bindings, body } => {
            let mut inner = env.clone();
            inner.extend(bindings.iter().cloned());
            eval(body, t, &mut inner)
        }
    }
}

fn sum_over<S: Scalar>(doms: &[(String, usize)], body: &Estimand, t: &JointTable<S>, env: &mut Env) -> Result<S> {
    match doms.split_first() {
        None => eval(body, t, env),
        Some(((s, k), rest)) => {
            let mut acc = S::zero();
            for v in 0..*k {
                env.insert(s.clone(), v);
                acc = acc + sum_over(rest, body, t, env)?;
            }
            Ok(acc)
        }
    }
}

fn bind_text(e: &Estimand, env: &Env) -> String {
    let map: Vec<(String, Value)> = env.iter().map(|(k, &v)| (k.clone(), Value::State(v))).collect();
    e.rename(&map).render_text()
}

fn given_text(given: &[Assign], env: &Env) -> String {
    let parts: Vec<String> = given
        .iter()
        .map(|a| match resolve(&a.value, env) {
            Ok(s) => format!("{}={s}", a.var),
            Err(_) => format!("{}={}", a.var, a.value),
        })
        .collect();
    format!("p({})", parts.join(","))
}

/// Value of an estimand with every free symbol bound.
pub fn evaluate<S: Scalar>(e: &Estimand, t: &JointTable<S>, bindings: &BTreeMap<String, usize>) -> Result<S> {
    let mut env = bindings.clone();
    eval(e, t, &mut env)
}

/// Table over the listed free symbols, each ranging over `0..k`, first symbol
/// most significant; `fixed` binds the remaining free symbols.
pub fn evaluate_table<S: Scalar>(
    e: &Estimand,
    t: &JointTable<S>,
    free: &[(String, usize)],
    fixed: &BTreeMap<String, usize>,
) -> Result<Vec<S>> {
    let size: usize = free.iter().map(|f| f.1).product();
    let mut out = Vec::with_capacity(size);
    for mut i in 0..size {
        let mut env = fixed.clone();
        for (s, k) in free.iter().rev() {
            env.insert(s.clone(), i % k);
            i /= k;
        }
        out.push(eval(e, t, &mut env)?);
    }
    Ok(out)
}
