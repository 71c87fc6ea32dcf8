//! Counterfactual queries `p(Y(a) | Z(a))` and their surface syntax.
//!
//! ```text
//! query := P( term ("," term)* ( "|" term ("=" value)? ("," term ("=" value)?)* )? )
//! term  := VAR ( "(" VAR "=" value ("," VAR "=" value)* ")" )?
//! value := state label | symbol
//! ```
//!
//! The intervention set is the union of all parenthesized assignments. Every
//! term of an untreated variable carries the full set; a treated variable may
//! appear bare, denoting its natural value.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimand::Value;
use crate::graph::{Admg, VSet, VertexId};
use crate::swig::{self, Intervention};

/// An outcome or conditioning term. `value` pins the term; `None` uses the
/// default value symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub vertex: VertexId,
    pub value: Option<Value>,
}

impl Term {
    pub fn new(vertex: VertexId) -> Self {
        Term { vertex, value: None }
    }

    pub fn with_value(vertex: VertexId, value: Value) -> Self {
        Term {
            vertex,
            value: Some(value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterfactualQuery {
    pub outcomes: Vec<Term>,
    pub interventions: Vec<Intervention>,
    pub given: Vec<Term>,
}

fn qerr(msg: impl Into<String>) -> Error {
    Error::Query(msg.into())
}

fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Reads a value token for `v`: a state label, else a symbol.
pub fn parse_value(g: &Admg, v: VertexId, text: &str) -> Result<Value> {
    if let Some(k) = g.var(v).state_index(text) {
        return Ok(Value::State(k));
    }
    if is_symbol(text) {
        return Ok(Value::Sym(text.to_string()));
    }
    Err(qerr(format!("`{text}` is neither a state of {} nor a symbol", g.name(v))))
}

impl CounterfactualQuery {
    pub fn new(outcomes: Vec<Term>, interventions: Vec<Intervention>, given: Vec<Term>) -> Self {
        let mut interventions = interventions;
        interventions.sort();
        interventions.dedup();
        CounterfactualQuery {
            outcomes,
            interventions,
            given,
        }
    }

    /// Parses the surface syntax against `g`.
    pub fn parse(text: &str, g: &Admg) -> Result<Self> {
        let toks = tokenize(text)?;
        let mut p = Parser { toks, pos: 0, g };
        p.query()
    }

    /// Checks vertices, disjointness and assignment consistency.
    pub fn validate(&self, g: &Admg) -> Result<()> {
        if self.outcomes.is_empty() {
            return Err(qerr("no outcome terms"));
        }
        let mut seen: BTreeMap<VertexId, Intervention> = BTreeMap::new();
        for t in &self.interventions {
            if t.vertex >= g.len() {
                return Err(Error::UnknownVertex(format!("#{}", t.vertex)));
            }
            if g.is_hidden(t.vertex) {
                return Err(Error::HiddenVertex(g.name(t.vertex).to_string()));
            }
            if let Some(s) = t.state {
                if s >= g.var(t.vertex).cardinality() {
                    return Err(qerr(format!("state {s} out of range for {}", g.name(t.vertex))));
                }
            }
            if !is_symbol(&t.symbol) {
                return Err(qerr(format!("bad intervention symbol `{}`", t.symbol)));
            }
            if let Some(prev) = seen.insert(t.vertex, t.clone()) {
                if prev != *t {
                    return Err(qerr(format!("inconsistent assignments to {}", g.name(t.vertex))));
                }
            }
        }
        let mut used = VSet::new();
        for t in self.outcomes.iter().chain(&self.given) {
            if t.vertex >= g.len() {
                return Err(Error::UnknownVertex(format!("#{}", t.vertex)));
            }
            if g.is_hidden(t.vertex) {
                return Err(Error::HiddenVertex(g.name(t.vertex).to_string()));
            }
            if !used.insert(t.vertex) {
                return Err(qerr(format!("{} appears more than once", g.name(t.vertex))));
            }
            match &t.value {
                Some(Value::State(k)) if *k >= g.var(t.vertex).cardinality() => {
                    return Err(qerr(format!("state {k} out of range for {}", g.name(t.vertex))))
                }
                Some(Value::Sym(s)) if !is_symbol(s) => {
                    return Err(qerr(format!("bad symbol `{s}`")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn treated(&self) -> VSet {
        self.interventions.iter().map(|t| t.vertex).collect()
    }

    pub fn outcome_set(&self) -> VSet {
        self.outcomes.iter().map(|t| t.vertex).collect()
    }

    pub fn given_set(&self) -> VSet {
        self.given.iter().map(|t| t.vertex).collect()
    }

    /// Default value symbol per vertex id, avoiding intervention symbols.
    /// Symbols are chosen among observed vertices; hidden vertices get
    /// their lowercase name.
    pub fn default_symbols(&self, g: &Admg) -> Vec<String> {
        let p = g.observed_projection();
        let syms = swig::value_symbols(&p, self.interventions.iter().map(|t| t.symbol.as_str()));
        let mut out: Vec<String> = g.vars().iter().map(|v| v.name.to_lowercase()).collect();
        for (s, v) in syms.into_iter().zip(g.observed()) {
            out[v] = s;
        }
        out
    }

    /// Surface syntax, labels written in full.
    pub fn render(&self, g: &Admg) -> String {
        let label = {
            let parts: Vec<String> = self
                .interventions
                .iter()
                .map(|t| format!("{}={}", g.name(t.vertex), t.value_text(g)))
                .collect();
            parts.join(",")
        };
        let bare_only = self
            .outcomes
            .iter()
            .chain(&self.given)
            .all(|t| self.interventions.iter().any(|i| i.vertex == t.vertex));
        let term = |t: &Term, first: bool| {
            let mut s = g.name(t.vertex).to_string();
            let treated = self.interventions.iter().any(|i| i.vertex == t.vertex);
            if !label.is_empty() && (!treated || bare_only && first) {
                s.push_str(&format!("({label})"));
            }
            if let Some(v) = &t.value {
                let text = match v {
                    Value::State(k) => g.var(t.vertex).states[*k].clone(),
                    Value::Sym(x) => x.clone(),
                };
                s.push_str(&format!("={text}"));
            }
            s
        };
        let ys: Vec<String> = self.outcomes.iter().enumerate().map(|(i, t)| term(t, i == 0)).collect();
        let mut out = format!("P({}", ys.join(", "));
        if !self.given.is_empty() {
            let zs: Vec<String> = self.given.iter().map(|t| term(t, false)).collect();
            out.push_str(&format!(" | {}", zs.join(", ")));
        }
        out.push(')');
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
    Bar,
    Eq,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Tok::Open);
            }
            ')' => {
                chars.next();
                out.push(Tok::Close);
            }
            ',' => {
                chars.next();
                out.push(Tok::Comma);
            }
            '|' => {
                chars.next();
                out.push(Tok::Bar);
            }
            '=' => {
                chars.next();
                out.push(Tok::Eq);
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '\'' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(s));
            }
            other => return Err(qerr(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    g: &'a Admg,
}

struct RawTerm {
    vertex: VertexId,
    label: Vec<Intervention>,
    value: Option<Value>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(qerr(format!("expected {what}, found {}", show(&t)))),
            None => Err(qerr(format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(qerr(format!("expected {what}, found {}", show(&t)))),
            None => Err(qerr(format!("expected {what}, found end of input"))),
        }
    }

    fn vertex(&mut self) -> Result<VertexId> {
        let name = self.ident("a variable")?;
        self.g.expect_vertex(&name)
    }

    fn term(&mut self) -> Result<RawTerm> {
        let vertex = self.vertex()?;
        let mut label = Vec::new();
        if self.peek() == Some(&Tok::Open) {
            self.next();
            loop {
                let v = self.vertex()?;
                self.expect(Tok::Eq, "`=`")?;
                let text = self.ident("a value")?;
                let t = match parse_value(self.g, v, &text)? {
                    Value::State(k) => Intervention::bound(self.g, v, k),
                    Value::Sym(s) => Intervention {
                        vertex: v,
                        symbol: s,
                        state: None,
                    },
                };
                label.push(t);
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::Close) => break,
                    Some(t) => return Err(qerr(format!("expected `,` or `)`, found {}", show(&t)))),
                    None => return Err(qerr("unclosed label")),
                }
            }
        }
        let mut value = None;
        if self.peek() == Some(&Tok::Eq) {
            self.next();
            let text = self.ident("a value")?;
            value = Some(parse_value(self.g, vertex, &text)?);
        }
        Ok(RawTerm { vertex, label, value })
    }

    fn query(&mut self) -> Result<CounterfactualQuery> {
        match self.ident("`P`")?.as_str() {
            "P" | "p" => {}
            other => return Err(qerr(format!("expected `P`, found `{other}`"))),
        }
        self.expect(Tok::Open, "`(`")?;
        let mut outs = vec![self.term()?];
        let mut conds = Vec::new();
        let mut in_given = false;
        loop {
            match self.next() {
                Some(Tok::Comma) => {
                    let t = self.term()?;
                    if in_given {
                        conds.push(t);
                    } else {
                        outs.push(t);
                    }
                }
                Some(Tok::Bar) if !in_given => {
                    in_given = true;
                    conds.push(self.term()?);
                }
                Some(Tok::Bar) => return Err(qerr("more than one `|`")),
                Some(Tok::Close) => break,
                Some(t) => return Err(qerr(format!("expected `,`, `|` or `)`, found {}", show(&t)))),
                None => return Err(qerr("missing `)`")),
            }
        }
        if let Some(t) = self.next() {
            return Err(qerr(format!("trailing input {}", show(&t))));
        }
        let mut treat: BTreeMap<VertexId, Intervention> = BTreeMap::new();
        for t in outs.iter().chain(&conds) {
            for i in &t.label {
                if let Some(prev) = treat.insert(i.vertex, i.clone()) {
                    if prev != *i {
                        return Err(qerr(format!(
                            "inconsistent assignments to {}: {} and {}",
                            self.g.name(i.vertex),
                            prev.value_text(self.g),
                            i.value_text(self.g)
                        )));
                    }
                }
            }
        }
        let all: VSet = treat.keys().copied().collect();
        for t in outs.iter().chain(&conds) {
            let label: VSet = t.label.iter().map(|i| i.vertex).collect();
            let ok = if all.contains(&t.vertex) {
                let mut rest = all.clone();
                rest.remove(&t.vertex);
                label.is_empty() || label == all || label == rest
            } else {
                label == all
            };
            if !ok {
                let want: Vec<String> = all.iter().map(|&v| self.g.name(v).to_string()).collect();
                return Err(qerr(format!(
                    "term {} must be labelled by every treatment ({})",
                    self.g.name(t.vertex),
                    want.join(",")
                )));
            }
        }
        let mk = |t: &RawTerm| Term {
            vertex: t.vertex,
            value: t.value.clone(),
        };
        let q = CounterfactualQuery::new(
            outs.iter().map(mk).collect(),
            treat.into_values().collect(),
            conds.iter().map(mk).collect(),
        );
        q.validate(self.g)?;
        Ok(q)
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Eq => "`=`".into(),
    }
}
