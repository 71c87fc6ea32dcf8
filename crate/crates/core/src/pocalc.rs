//! Single applications of the three potential outcomes calculus rules.
//!
//! * Rule 1: `p(Y(x) | Z(x), W(x)) = p(Y(x) | W(x))` when
//!   `Y(x) ⫫ Z(x) | W(x)` in the SWIG `G(x)`.
//! * Rule 2: `p(Y(x,z) | W(x,z)) = p(Y(x) | W(x), Z(x)=z)` when
//!   `Y(x,z) ⫫ Z(x,z) | W(x,z)` in `G(x,z)`.
//! * Rule 3: `p(Y(x,z)) = p(Y(x))` when no fixed node of `z` is an ancestor
//!   of `Y(x,z)` in `G(x,z)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimand::Value;
use crate::graph::{Admg, VSet, VertexId};
use crate::query::{CounterfactualQuery, Term};
use crate::separation::{Path, SeparationQuery};
use crate::swig::{build_swig, Intervention, Swig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    One,
    Two,
    Three,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::One => 1,
            Rule::Two => 2,
            Rule::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Rule> {
        match n {
            1 => Ok(Rule::One),
            2 => Ok(Rule::Two),
            3 => Ok(Rule::Three),
            _ => Err(Error::Query(format!("no rule {n}; rules are 1, 2 and 3"))),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.number())
    }
}

/// Arguments of a rule. `z` carries assignments for rules 2 and 3; for
/// rule 1 only its vertices are used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleArgs {
    pub x: Vec<Intervention>,
    pub y: VSet,
    pub z: Vec<Intervention>,
    pub w: VSet,
}

impl RuleArgs {
    pub fn z_set(&self) -> VSet {
        self.z.iter().map(|t| t.vertex).collect()
    }
}

/// `lhs = rhs` between two counterfactual distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equality {
    pub lhs: CounterfactualQuery,
    pub rhs: CounterfactualQuery,
}

impl Equality {
    pub fn render(&self, g: &Admg) -> String {
        format!("{} = {}", self.lhs.render(g), self.rhs.render(g))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: Rule,
    pub args: RuleArgs,
    /// Treatments of the SWIG the precondition is checked on.
    pub swig_treatment: Vec<Intervention>,
    /// Precondition in SWIG node ids (fixed nodes are `n + i`).
    pub precondition: SeparationQuery,
    pub conclusion: Equality,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refusal {
    pub rule: Rule,
    pub args: RuleArgs,
    pub swig_treatment: Vec<Intervention>,
    pub precondition: SeparationQuery,
    /// Connecting path in the SWIG.
    pub witness: Option<Path>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleVerdict {
    Applies(RuleApplication),
    Refused(Refusal),
}

impl RuleVerdict {
    pub fn applies(&self) -> bool {
        matches!(self, RuleVerdict::Applies(_))
    }

    pub fn application(&self) -> Option<&RuleApplication> {
        match self {
            RuleVerdict::Applies(a) => Some(a),
            RuleVerdict::Refused(_) => None,
        }
    }

    /// One line: the conclusion, or the failed precondition with its path.
    pub fn render(&self, g: &Admg) -> Result<String> {
        match self {
            RuleVerdict::Applies(a) => Ok(format!("{} applies: {}", a.rule, a.conclusion.render(g))),
            RuleVerdict::Refused(r) => {
                let sw = build_swig(g, &r.swig_treatment, None)?;
                let set = |s: &VSet| s.iter().map(|&v| sw.node_name(v)).collect::<Vec<_>>().join(",");
                let mut out = format!(
                    "{} refused: {{{}}} not separated from {{{}}}",
                    r.rule,
                    set(&r.precondition.left),
                    set(&r.precondition.right)
                );
                if !r.precondition.given.is_empty() {
                    out.push_str(&format!(" given {{{}}}", set(&r.precondition.given)));
                }
                if let Some(p) = &r.witness {
                    out.push_str(&format!(" via {}", p.render(|v| sw.node_name(v))));
                }
                Ok(out)
            }
        }
    }
}

fn qerr(msg: impl Into<String>) -> Error {
    Error::Query(msg.into())
}

fn check_args(g: &Admg, rule: Rule, a: &RuleArgs) -> Result<()> {
    let z = a.z_set();
    let names = |s: &VSet| g.names(s);
    if a.y.is_empty() {
        return Err(qerr("Y must not be empty"));
    }
    for v in a.y.iter().chain(&a.w).chain(&z).chain(a.x.iter().map(|t| &t.vertex)) {
        if *v >= g.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        if g.is_hidden(*v) {
            return Err(Error::HiddenVertex(g.name(*v).to_string()));
        }
    }
    for (p, q, what) in [(&a.y, &z, "Y and Z"), (&a.y, &a.w, "Y and W"), (&z, &a.w, "Z and W")] {
        let both: VSet = p.intersection(q).copied().collect();
        if !both.is_empty() {
            return Err(qerr(format!("{what} overlap at {{{}}}", names(&both))));
        }
    }
    if rule == Rule::Three && !a.w.is_empty() {
        return Err(qerr("rule 3 takes no W"));
    }
    if rule != Rule::One {
        for t in &a.x {
            if let Some(u) = a.z.iter().find(|u| u.vertex == t.vertex) {
                if u.symbol != t.symbol || u.state != t.state {
                    return Err(qerr(format!("x and z disagree on {}", g.name(t.vertex))));
                }
            }
        }
    }
    Ok(())
}

fn merged(x: &[Intervention], z: &[Intervention]) -> Vec<Intervention> {
    let mut out = x.to_vec();
    for t in z {
        if !out.iter().any(|u| u.vertex == t.vertex) {
            out.push(t.clone());
        }
    }
    out.sort_by_key(|t| t.vertex);
    out
}

fn query(
    outcomes: &VSet,
    given: &VSet,
    treat: &[Intervention],
    extra: Vec<Term>,
) -> CounterfactualQuery {
    let mut interventions = treat.to_vec();
    interventions.sort_by_key(|t| t.vertex);
    let mut given: Vec<Term> = given.iter().map(|&v| Term::new(v)).collect();
    given.extend(extra);
    CounterfactualQuery {
        outcomes: outcomes.iter().map(|&v| Term::new(v)).collect(),
        interventions,
        given,
    }
}

/// Pins every unvalued term of `rhs` to the symbol it has in `lhs`, when the
/// default symbols of the two sides differ.
fn align(g: &Admg, lhs: &CounterfactualQuery, mut rhs: CounterfactualQuery) -> CounterfactualQuery {
    let ld = lhs.default_symbols(g);
    let rd = rhs.default_symbols(g);
    for t in rhs.outcomes.iter_mut().chain(rhs.given.iter_mut()) {
        if t.value.is_none() && ld[t.vertex] != rd[t.vertex] {
            t.value = Some(Value::Sym(ld[t.vertex].clone()));
        }
    }
    rhs
}

fn value_of(t: &Intervention) -> Value {
    match t.state {
        Some(k) => Value::State(k),
        None => Value::Sym(t.symbol.clone()),
    }
}

fn decide(
    rule: Rule,
    args: &RuleArgs,
    treat: Vec<Intervention>,
    sw: &Swig,
    precondition: SeparationQuery,
    conclusion: Equality,
) -> Result<RuleVerdict> {
    let verdict = sw.separated(&precondition)?.verdict;
    Ok(if verdict.separated {
        RuleVerdict::Applies(RuleApplication {
            rule,
            args: args.clone(),
            swig_treatment: treat,
            precondition,
            conclusion,
        })
    } else {
        RuleVerdict::Refused(Refusal {
            rule,
            args: args.clone(),
            swig_treatment: treat,
            precondition,
            witness: verdict.witness,
        })
    })
}

/// Rule 1: drop `Z(x)` from the conditioning set.
pub fn rule1(g: &Admg, args: &RuleArgs) -> Result<RuleVerdict> {
    check_args(g, Rule::One, args)?;
    let treat = merged(&args.x, &[]);
    let sw = build_swig(g, &treat, None)?;
    let z = args.z_set();
    let pre = SeparationQuery::new(args.y.clone(), z.clone(), args.w.clone());
    let zw: VSet = z.union(&args.w).copied().collect();
    let lhs = query(&args.y, &zw, &treat, Vec::new());
    let rhs = align(g, &lhs, query(&args.y, &args.w, &treat, Vec::new()));
    decide(Rule::One, args, treat, &sw, pre, Equality { lhs, rhs })
}

/// Rule 2: exchange the intervention on `Z` for conditioning on `Z(x) = z`.
pub fn rule2(g: &Admg, args: &RuleArgs) -> Result<RuleVerdict> {
    check_args(g, Rule::Two, args)?;
    let treat = merged(&args.x, &args.z);
    let sw = build_swig(g, &treat, None)?;
    let pre = SeparationQuery::new(args.y.clone(), args.z_set(), args.w.clone());
    let lhs = query(&args.y, &args.w, &treat, Vec::new());
    let pinned: Vec<Term> = args.z.iter().map(|t| Term::with_value(t.vertex, value_of(t))).collect();
    let rhs = align(g, &lhs, query(&args.y, &args.w, &merged(&args.x, &[]), pinned));
    decide(Rule::Two, args, treat, &sw, pre, Equality { lhs, rhs })
}

/// Rule 3: drop the intervention on `Z` when it cannot reach `Y`.
pub fn rule3(g: &Admg, args: &RuleArgs) -> Result<RuleVerdict> {
    check_args(g, Rule::Three, args)?;
    let treat = merged(&args.x, &args.z);
    let sw = build_swig(g, &treat, None)?;
    let fixed: VSet = args
        .z
        .iter()
        .filter(|t| !args.x.iter().any(|u| u.vertex == t.vertex))
        .filter_map(|t| sw.fixed_node(t.vertex))
        .collect();
    let pre = SeparationQuery::new(args.y.clone(), fixed.clone(), VSet::new());
    let lhs = query(&args.y, &VSet::new(), &treat, Vec::new());
    let rhs = align(g, &lhs, query(&args.y, &VSet::new(), &merged(&args.x, &[]), Vec::new()));
    let reach = sw.mixed().descendants(&fixed);
    let blocked = args.y.iter().all(|v| !reach.contains(v));
    let conclusion = Equality { lhs, rhs };
    Ok(if blocked {
        RuleVerdict::Applies(RuleApplication {
            rule: Rule::Three,
            args: args.clone(),
            swig_treatment: treat,
            precondition: pre,
            conclusion,
        })
    } else {
        let witness = sw.separated(&pre)?.verdict.witness;
        RuleVerdict::Refused(Refusal {
            rule: Rule::Three,
            args: args.clone(),
            swig_treatment: treat,
            precondition: pre,
            witness,
        })
    })
}

/// Dispatches on the rule number.
pub fn apply(g: &Admg, rule: Rule, args: &RuleArgs) -> Result<RuleVerdict> {
    match rule {
        Rule::One => rule1(g, args),
        Rule::Two => rule2(g, args),
        Rule::Three => rule3(g, args),
    }
}

/// Symbolic assignment `V=v` for each listed vertex.
pub fn symbolic(g: &Admg, vs: &[VertexId]) -> Vec<Intervention> {
    vs.iter().map(|&v| Intervention::symbolic(g, v)).collect()
}
