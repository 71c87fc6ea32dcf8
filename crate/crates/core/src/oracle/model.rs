//! Model file format.
//!
//! ```text
//! # comment
//! variable H states 2 hidden
//! variable A states 2 parents H
//! variable Y states 2 parents A H
//! cpt H
//! 1/2 1/2
//! cpt A
//! 1/3 2/3          # row H=0
//! 3/4 1/4          # row H=1
//! ```
//!
//! Parents are listed in any order but rows follow ascending declaration
//! order of the parents, first parent most significant. Entries are integers
//! or fractions `n/d`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{row_count, Cpt, DiscreteScm};
use crate::error::{Error, Result};
use crate::graph::{Admg, Mixed, VarDecl};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn fraction(tok: &str, line: usize) -> Result<BigRational> {
    let bad = || perr(line, format!("bad probability `{tok}`"));
    match tok.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(tok.parse().map_err(|_| bad())?)),
    }
}

pub(super) fn parse(text: &str) -> Result<DiscreteScm> {
    let mut vars: Vec<VarDecl> = Vec::new();
    let mut parents: Vec<(usize, Vec<String>)> = Vec::new();
    let mut rows: Vec<Vec<(usize, Vec<BigRational>)>> = Vec::new();
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "variable" => {
                if current.is_some() {
                    return Err(perr(line, "variables must precede CPTs"));
                }
                let name = toks.get(1).ok_or_else(|| perr(line, "missing variable name"))?;
                if toks.get(2) != Some(&"states") {
                    return Err(perr(line, "expected `states`"));
                }
                let k: usize = toks
                    .get(3)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(line, "expected a state count"))?;
                let mut rest = &toks[4..];
                let mut hidden = false;
                if rest.first() == Some(&"hidden") {
                    hidden = true;
                    rest = &rest[1..];
                }
                let pa: Vec<String> = match rest.first() {
                    None => Vec::new(),
                    Some(&"parents") => rest[1..].iter().map(|s| s.to_string()).collect(),
                    Some(t) => return Err(perr(line, format!("unexpected `{t}`"))),
                };
                if vars.iter().any(|v| v.name == *name) {
                    return Err(perr(line, format!("duplicate variable `{name}`")));
                }
                parents.push((line, pa));
                vars.push(VarDecl::new(*name, k, hidden));
                rows.push(Vec::new());
            }
            "cpt" => {
                let name = toks.get(1).ok_or_else(|| perr(line, "missing variable name"))?;
                let v = vars
                    .iter()
                    .position(|d| d.name == *name)
                    .ok_or_else(|| perr(line, format!("undeclared variable `{name}`")))?;
                if !rows[v].is_empty() {
                    return Err(perr(line, format!("second CPT for `{name}`")));
                }
                current = Some(v);
            }
            _ => {
                let v = current.ok_or_else(|| perr(line, format!("unexpected `{}`", toks[0])))?;
                let row = toks.iter().map(|t| fraction(t, line)).collect::<Result<Vec<_>>>()?;
                rows[v].push((line, row));
            }
        }
    }
    let mut g = Mixed::new(vars.len());
    for (v, (line, pa)) in parents.iter().enumerate() {
        for p in pa {
            let u = vars
                .iter()
                .position(|d| d.name == *p)
                .ok_or_else(|| perr(*line, format!("undeclared parent `{p}`")))?;
            if u == v {
                return Err(perr(*line, format!("`{p}` is its own parent")));
            }
            g.add_directed(u, v);
        }
    }
    if let Some(v) = g.cycle_witness() {
        return Err(Error::Cycle(vars[v].name.clone()));
    }
    let graph = Admg::from_parts(vars, g);
    let cpts: Vec<Cpt> = rows
        .into_iter()
        .enumerate()
        .map(|(v, rs)| {
            if rs.len() != row_count(&graph, v) {
                return Err(Error::Model(format!(
                    "CPT of {} has {} rows, expected {}",
                    graph.name(v),
                    rs.len(),
                    row_count(&graph, v)
                )));
            }
            Ok(rs.into_iter().map(|(_, r)| r).collect())
        })
        .collect::<Result<_>>()?;
    DiscreteScm::new(graph, cpts)
}

pub(super) fn render(scm: &DiscreteScm) -> String {
    let g = scm.graph();
    let mut out = String::new();
    for v in 0..g.len() {
        let _ = write!(out, "variable {} states {}", g.name(v), g.var(v).cardinality());
        if g.is_hidden(v) {
            out.push_str(" hidden");
        }
        let pa = g.parents(v);
        if !pa.is_empty() {
            out.push_str(" parents");
            for p in pa {
                let _ = write!(out, " {}", g.name(p));
            }
        }
        out.push('\n');
    }
    for v in 0..g.len() {
        let _ = writeln!(out, "cpt {}", g.name(v));
        for row in scm.cpt(v) {
            let parts: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "{}", parts.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TEXT: &str = "\
# front door with a hidden confounder
variable H states 2 hidden
variable A states 2 parents H
variable M states 2 parents A
variable Y states 2 parents H M
cpt H
1/2 1/2
cpt A
1/3 2/3
3/4 1/4
cpt M
1/10 9/10
1 0
cpt Y
1/5 4/5
2/5 3/5
3/5 2/5
4/5 1/5
";

    #[test]
    fn parses_and_round_trips() {
        let scm = DiscreteScm::parse(TEXT).unwrap();
        assert_eq!(scm.graph().len(), 4);
        assert!(scm.graph().is_hidden(0));
        assert_eq!(scm.cpt(3).len(), 4);
        let again = DiscreteScm::parse(&scm.render()).unwrap();
        assert_eq!(again, scm);
        assert_eq!(again.render(), scm.render());
    }

    #[test]
    fn random_models_round_trip() {
        let g = Admg::parse("var A:3 M Y\nhidden H\nA -> M\nM -> Y\nH -> A\nH -> Y\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let scm = DiscreteScm::random(&g, &mut rng).unwrap();
            assert_eq!(DiscreteScm::parse(&scm.render()).unwrap(), scm);
        }
    }

    #[test]
    fn reports_errors_with_lines() {
        let e = DiscreteScm::parse("variable A states 2\ncpt A\n1/2 x\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, msg: "bad probability `x`".into() });
        assert!(DiscreteScm::parse("variable A states 2 parents B\n").is_err());
        assert!(DiscreteScm::parse("variable A states 2\ncpt A\n1/2 1/3\n").is_err());
        assert!(DiscreteScm::parse("variable A states 2\ncpt A\n").is_err());
        assert!(DiscreteScm::parse("cpt A\n").is_err());
        assert!(DiscreteScm::parse(
            "variable A states 2 parents B\nvariable B states 2 parents A\n"
        )
        .is_err());
    }
}
