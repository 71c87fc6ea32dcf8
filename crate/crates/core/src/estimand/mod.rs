//! Symbolic identification functionals over an observed distribution.
//!
//! Values are symbols (`a`, `m`, `a'`) or concrete state indices. Free
//! symbols are bound at evaluation time; `Sum`, `Substitute` and `FixEval`
//! bind symbols in their bodies.

mod eval;
mod machine;
mod simplify;

pub use eval::{evaluate, evaluate_table, JointTable, Scalar};
pub use machine::parse_machine;
pub use simplify::simplify;

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Sym(String),
    State(usize),
}

impl Value {
    pub fn sym(s: impl Into<String>) -> Self {
        Value::Sym(s.into())
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            Value::State(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => write!(f, "{s}"),
            Value::State(k) => write!(f, "{k}"),
        }
    }
}

/// `Var=value` inside a probability term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assign {
    pub var: String,
    pub value: Value,
}

impl Assign {
    pub fn new(var: impl Into<String>, value: Value) -> Self {
        Assign {
            var: var.into(),
            value,
        }
    }

    pub fn sym(var: impl Into<String>, sym: impl Into<String>) -> Self {
        Assign::new(var, Value::Sym(sym.into()))
    }

    pub fn state(var: impl Into<String>, k: usize) -> Self {
        Assign::new(var, Value::State(k))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimand {
    One,
    Prob { of: Vec<Assign>, given: Vec<Assign> },
    Product(Vec<Estimand>),
    Ratio(Box<Estimand>, Box<Estimand>),
    /// Sums the body over every value of each bound symbol.
    Sum { over: Vec<String>, body: Box<Estimand> },
    /// Restriction `[body]|_{s=v}`.
    Substitute { bindings: Vec<(String, Value)>, body: Box<Estimand> },
    /// Evaluation of the body at fixed states `[body]_{s:=k}`.
    FixEval { bindings: Vec<(String, usize)>, body: Box<Estimand> },
}

impl Estimand {
    pub fn prob(of: Vec<Assign>, given: Vec<Assign>) -> Self {
        Estimand::Prob { of, given }
    }

    pub fn ratio(n: Estimand, d: Estimand) -> Self {
        Estimand::Ratio(Box::new(n), Box::new(d))
    }

    pub fn sum(over: Vec<String>, body: Estimand) -> Self {
        Estimand::Sum {
            over,
            body: Box::new(body),
        }
    }

    pub fn substitute(bindings: Vec<(String, Value)>, body: Estimand) -> Self {
        Estimand::Substitute {
            bindings,
            body: Box::new(body),
        }
    }

    pub fn fix_eval(bindings: Vec<(String, usize)>, body: Estimand) -> Self {
        Estimand::FixEval {
            bindings,
            body: Box::new(body),
        }
    }

    /// Replaces free occurrences of symbols; bound occurrences are left alone.
    /// Callers must avoid capture by inner binders.
    pub fn rename(&self, map: &[(String, Value)]) -> Estimand {
        let sub = |a: &Assign| match &a.value {
            Value::Sym(s) => match map.iter().find(|(k, _)| k == s) {
                Some((_, v)) => Assign::new(a.var.clone(), v.clone()),
                None => a.clone(),
            },
            _ => a.clone(),
        };
        let without = |bound: &[&str]| -> Vec<(String, Value)> {
            map.iter()
                .filter(|(k, _)| !bound.contains(&k.as_str()))
                .cloned()
                .collect()
        };
        match self {
            Estimand::One => Estimand::One,
            Estimand::Prob { of, given } => Estimand::Prob {
                of: of.iter().map(sub).collect(),
                given: given.iter().map(sub).collect(),
            },
            Estimand::Product(fs) => Estimand::Product(fs.iter().map(|f| f.rename(map)).collect()),
            Estimand::Ratio(n, d) => Estimand::ratio(n.rename(map), d.rename(map)),
            Estimand::Sum { over, body } => {
                let bound: Vec<&str> = over.iter().map(String::as_str).collect();
                Estimand::sum(over.clone(), body.rename(&without(&bound)))
            }
            Estimand::Substitute { bindings, body } => {
                let bound: Vec<&str> = bindings.iter().map(|(k, _)| k.as_str()).collect();
                let bindings = bindings
                    .iter()
                    .map(|(k, v)| {
                        let v = match v {
                            Value::Sym(s) => map
                                .iter()
                                .find(|(m, _)| m == s)
                                .map(|(_, t)| t.clone())
                                .unwrap_or_else(|| v.clone()),
                            _ => v.clone(),
                        };
                        (k.clone(), v)
                    })
                    .collect();
                Estimand::substitute(bindings, body.rename(&without(&bound)))
            }
            Estimand::FixEval { bindings, body } => {
                let bound: Vec<&str> = bindings.iter().map(|(k, _)| k.as_str()).collect();
                Estimand::fix_eval(bindings.clone(), body.rename(&without(&bound)))
            }
        }
    }

    /// Whether a sum over `x` would range over anything: `x` occurs free as
    /// a value, directly or through a substitution that is itself used.
    pub fn uses(&self, x: &str) -> bool {
        match self {
            Estimand::One => false,
            Estimand::Prob { of, given } => of.iter().chain(given).any(|a| a.value.as_sym() == Some(x)),
            Estimand::Product(fs) => fs.iter().any(|f| f.uses(x)),
            Estimand::Ratio(n, d) => n.uses(x) || d.uses(x),
            Estimand::Sum { over, body } => !over.iter().any(|s| s == x) && body.uses(x),
            Estimand::Substitute { bindings, body } => {
                bindings.iter().any(|(k, v)| v.as_sym() == Some(x) && body.uses(k))
                    || !bindings.iter().any(|(k, _)| k == x) && body.uses(x)
            }
            Estimand::FixEval { bindings, body } => !bindings.iter().any(|(k, _)| k == x) && body.uses(x),
        }
    }

    /// Free symbols, sorted.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut note = |v: &Value, bound: &Vec<String>| {
            if let Value::Sym(s) = v {
                if !bound.contains(s) {
                    out.insert(s.clone());
                }
            }
        };
        match self {
            Estimand::One => {}
            Estimand::Prob { of, given } => {
                for a in of.iter().chain(given) {
                    note(&a.value, bound);
                }
            }
            Estimand::Product(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Estimand::Ratio(n, d) => {
                n.collect_free(bound, out);
                d.collect_free(bound, out);
            }
            Estimand::Sum { over, body } => {
                let k = bound.len();
                bound.extend(over.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(k);
            }
            Estimand::Substitute { bindings, body } => {
                for (_, v) in bindings {
                    note(v, bound);
                }
                let k = bound.len();
                bound.extend(bindings.iter().map(|(s, _)| s.clone()));
                body.collect_free(bound, out);
                bound.truncate(k);
            }
            Estimand::FixEval { bindings, body } => {
                let k = bound.len();
                bound.extend(bindings.iter().map(|(s, _)| s.clone()));
                body.collect_free(bound, out);
                bound.truncate(k);
            }
        }
    }

    /// Display text, e.g. `Σ_m p(m|a) Σ_{a'} p(y|m,a') p(a')`.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.text(&mut out);
        out
    }

    /// Parenthesized prefix form; `parse_machine` inverts it.
    pub fn render_machine(&self) -> String {
        machine::render(self)
    }

    fn text(&self, out: &mut String) {
        match self {
            Estimand::One => out.push('1'),
            Estimand::Prob { of, given } => {
                out.push_str("p(");
                text_assigns(of, out);
                if !given.is_empty() {
                    out.push('|');
                    text_assigns(given, out);
                }
                out.push(')');
            }
            Estimand::Product(fs) => {
                if fs.is_empty() {
                    out.push('1');
                }
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let wrap = i + 1 < fs.len()
                        && matches!(f, Estimand::Sum { .. } | Estimand::Ratio(..) | Estimand::Product(_));
                    if wrap {
                        out.push('[');
                        f.text(out);
                        out.push(']');
                    } else {
                        f.text(out);
                    }
                }
            }
            Estimand::Ratio(n, d) => {
                out.push('[');
                n.text(out);
                out.push_str("] / [");
                d.text(out);
                out.push(']');
            }
            Estimand::Sum { over, body } => {
                out.push_str("Σ_");
                if over.len() == 1 && over[0].chars().count() == 1 {
                    out.push_str(&over[0]);
                } else {
                    out.push('{');
                    out.push_str(&over.join(","));
                    out.push('}');
                }
                out.push(' ');
                body.text(out);
            }
            Estimand::Substitute { bindings, body } => {
                out.push('[');
                body.text(out);
                out.push_str("]|_{");
                let b: Vec<String> = bindings.iter().map(|(s, v)| format!("{s}={v}")).collect();
                out.push_str(&b.join(","));
                out.push('}');
            }
            Estimand::FixEval { bindings, body } => {
                out.push('[');
                body.text(out);
                out.push_str("]_{");
                let b: Vec<String> = bindings.iter().map(|(s, v)| format!("{s}:={v}")).collect();
                out.push_str(&b.join(","));
                out.push('}');
            }
        }
    }
}

fn text_assigns(xs: &[Assign], out: &mut String) {
    for (i, a) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match &a.value {
            Value::Sym(s) => out.push_str(s),
            Value::State(k) => {
                out.push_str(&a.var);
                out.push('=');
                out.push_str(&k.to_string());
            }
        }
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn p(of: &[(&str, &str)], given: &[(&str, &str)]) -> Estimand {
        let conv = |xs: &[(&str, &str)]| {
            xs.iter()
                .map(|&(v, s)| match s.parse::<usize>() {
                    Ok(k) => Assign::state(v, k),
                    Err(_) => Assign::sym(v, s),
                })
                .collect()
        };
        Estimand::prob(conv(of), conv(given))
    }

    pub fn front_door() -> Estimand {
        Estimand::sum(
            vec!["m".into()],
            Estimand::Product(vec![
                p(&[("M", "m")], &[("A", "a")]),
                Estimand::sum(
                    vec!["a'".into()],
                    Estimand::Product(vec![
                        p(&[("Y", "y")], &[("M", "m"), ("A", "a'")]),
                        p(&[("A", "a'")], &[]),
                    ]),
                ),
            ]),
        )
    }

    #[test]
    fn front_door_text() {
        assert_eq!(front_door().render_text(), "Σ_m p(m|a) Σ_{a'} p(y|m,a') p(a')");
    }

    #[test]
    fn single_term_text() {
        assert_eq!(p(&[("Y", "y")], &[]).render_text(), "p(y)");
        assert_eq!(p(&[("Y", "y")], &[("A", "1")]).render_text(), "p(y|A=1)");
    }

    #[test]
    fn restriction_bar_text() {
        let e = Estimand::substitute(
            vec![("m".into(), Value::State(1))],
            Estimand::ratio(p(&[("Y", "y"), ("M", "m")], &[]), p(&[("M", "m")], &[])),
        );
        assert_eq!(e.render_text(), "[[p(y,m)] / [p(m)]]|_{m=1}");
        let f = Estimand::fix_eval(vec![("a".into(), 0)], p(&[("Y", "y")], &[("A", "a")]));
        assert_eq!(f.render_text(), "[p(y|a)]_{a:=0}");
    }

    #[test]
    fn free_symbols_respect_binders() {
        let e = front_door();
        let free: Vec<String> = e.free_symbols().into_iter().collect();
        assert_eq!(free, vec!["a", "y"]);
    }

    #[test]
    fn rename_skips_bound() {
        let e = front_door().rename(&[("m".into(), Value::State(0)), ("a".into(), Value::State(1))]);
        assert_eq!(e.render_text(), "Σ_m p(m|A=1) Σ_{a'} p(y|m,a') p(a')");
    }
}
