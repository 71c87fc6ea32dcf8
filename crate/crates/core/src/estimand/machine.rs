//! Machine format.
//!
//! ```text
//! e := 1
//!    | (p (A=v ...) (A=v ...)?)      given list omitted when empty
//!    | (prod e ...) | (ratio e e)
//!    | (sum (s ...) e)
//!    | (subst (s=v ...) e) | (fix (s=k ...) e)
//! v := state index (digits) | symbol
//! ```

use super::{Assign, Estimand, Value};
use crate::error::{Error, Result};

pub(super) fn render(e: &Estimand) -> String {
    let mut out = String::new();
    go(e, &mut out);
    out
}

fn assigns(xs: &[Assign], out: &mut String) {
    out.push('(');
    let parts: Vec<String> = xs.iter().map(|a| format!("{}={}", a.var, a.value)).collect();
    out.push_str(&parts.join(" "));
    out.push(')');
}

fn go(e: &Estimand, out: &mut String) {
    match e {
        Estimand::One => out.push('1'),
        Estimand::Prob { of, given } => {
            out.push_str("(p ");
            assigns(of, out);
            if !given.is_empty() {
                out.push(' ');
                assigns(given, out);
            }
            out.push(')');
        }
        Estimand::Product(fs) => {
            out.push_str("(prod");
            for f in fs {
                out.push(' ');
                go(f, out);
            }
            out.push(')');
        }
        Estimand::Ratio(n, d) => {
            out.push_str("(ratio ");
            go(n, out);
            out.push(' ');
            go(d, out);
            out.push(')');
        }
        Estimand::Sum { over, body } => {
            out.push_str(&format!("(sum ({}) ", over.join(" ")));
            go(body, out);
            out.push(')');
        }
        Estimand::Substitute { bindings, body } => {
            let b: Vec<String> = bindings.iter().map(|(s, v)| format!("{s}={v}")).collect();
            out.push_str(&format!("(subst ({}) ", b.join(" ")));
            go(body, out);
            out.push(')');
        }
        Estimand::FixEval { bindings, body } => {
            let b: Vec<String> = bindings.iter().map(|(s, v)| format!("{s}={v}")).collect();
            out.push_str(&format!("(fix ({}) ", b.join(" ")));
            go(body, out);
            out.push(')');
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn err(msg: impl Into<String>) -> Error {
    Error::Estimand(msg.into())
}

fn tokenize(text: &str) -> Vec<String> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    spaced.split_whitespace().map(str::to_string).collect()
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let t = tokens.get(*pos).ok_or_else(|| err("unexpected end of input"))?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(err("missing `)`")),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                }
            }
        }
        ")" => Err(err("unexpected `)`")),
        _ => Ok(Sexp::Atom(t.clone())),
    }
}

fn value(s: &str) -> Result<Value> {
    if s.is_empty() {
        return Err(err("empty value"));
    }
    if s.chars().all(|c| c.is_ascii_digit()) {
        return s.parse().map(Value::State).map_err(|_| err(format!("bad state `{s}`")));
    }
    Ok(Value::Sym(s.to_string()))
}

fn pair(x: &Sexp) -> Result<(String, Value)> {
    match x {
        Sexp::Atom(a) => {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| err(format!("expected `name=value`, found `{a}`")))?;
            if k.is_empty() {
                return Err(err(format!("missing name in `{a}`")));
            }
            Ok((k.to_string(), value(v)?))
        }
        Sexp::List(_) => Err(err("expected `name=value`, found a list")),
    }
}

fn pairs(x: &Sexp) -> Result<Vec<(String, Value)>> {
    match x {
        Sexp::List(items) => items.iter().map(pair).collect(),
        Sexp::Atom(a) => Err(err(format!("expected a list, found `{a}`"))),
    }
}

fn build(x: &Sexp) -> Result<Estimand> {
    let items = match x {
        Sexp::Atom(a) if a == "1" => return Ok(Estimand::One),
        Sexp::Atom(a) => return Err(err(format!("unexpected atom `{a}`"))),
        Sexp::List(items) => items,
    };
    let head = match items.first() {
        Some(Sexp::Atom(h)) => h.as_str(),
        _ => return Err(err("expected an operator")),
    };
    let args = &items[1..];
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(err(format!("`{head}` takes {n} arguments, found {}", args.len())))
        }
    };
    let to_assigns = |x: &Sexp| -> Result<Vec<Assign>> {
        Ok(pairs(x)?.into_iter().map(|(k, v)| Assign::new(k, v)).collect())
    };
    match head {
        "p" => {
            if args.is_empty() || args.len() > 2 {
                return Err(err("`p` takes one or two lists"));
            }
            let of = to_assigns(&args[0])?;
            let given = match args.get(1) {
                Some(g) => to_assigns(g)?,
                None => Vec::new(),
            };
            Ok(Estimand::Prob { of, given })
        }
        "prod" => Ok(Estimand::Product(args.iter().map(build).collect::<Result<_>>()?)),
        "ratio" => {
            arity(2)?;
            Ok(Estimand::ratio(build(&args[0])?, build(&args[1])?))
        }
        "sum" => {
            arity(2)?;
            let over = match &args[0] {
                Sexp::List(xs) => xs
                    .iter()
                    .map(|x| match x {
                        Sexp::Atom(a) => Ok(a.clone()),
                        Sexp::List(_) => Err(err("sum binds symbols, not lists")),
                    })
                    .collect::<Result<Vec<_>>>()?,
                Sexp::Atom(a) => return Err(err(format!("expected symbol list, found `{a}`"))),
            };
            Ok(Estimand::sum(over, build(&args[1])?))
        }
        "subst" => {
            arity(2)?;
            Ok(Estimand::substitute(pairs(&args[0])?, build(&args[1])?))
        }
        "fix" => {
            arity(2)?;
            let b = pairs(&args[0])?
                .into_iter()
                .map(|(k, v)| match v {
                    Value::State(s) => Ok((k, s)),
                    Value::Sym(s) => Err(err(format!("`fix` needs a state, found `{s}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Estimand::fix_eval(b, build(&args[1])?))
        }
        other => Err(err(format!("unknown operator `{other}`"))),
    }
}

/// Parses the machine format.
pub fn parse_machine(text: &str) -> Result<Estimand> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let sexp = read(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(err(format!("trailing input `{}`", tokens[pos])));
    }
    build(&sexp)
}
