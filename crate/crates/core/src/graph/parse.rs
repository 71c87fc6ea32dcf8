use super::{Admg, Mixed, VarDecl};
use crate::error::{Error, Result};

enum Line<'a> {
    Decl { hidden: bool, items: Vec<&'a str> },
    Edge { a: &'a str, b: &'a str, bi: bool },
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn classify(line: &str, no: usize) -> Result<Option<Line<'_>>> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let mut words = line.split_whitespace();
    let head = words.next().unwrap_or("");
    if head == "var" || head == "hidden" {
        return Ok(Some(Line::Decl {
            hidden: head == "hidden",
            items: words.collect(),
        }));
    }
    let (arrow, bi) = if line.contains("<->") {
        ("<->", true)
    } else if line.contains("->") {
        ("->", false)
    } else {
        return Err(Error::Parse {
            line: no,
            msg: format!("unrecognised line `{line}`"),
        });
    };
    let mut parts = line.splitn(2, arrow);
    let a = parts.next().unwrap_or("").trim();
    let b = parts.next().unwrap_or("").trim();
    for t in [a, b] {
        if !is_ident(t) {
            return Err(Error::Parse {
                line: no,
                msg: format!("bad vertex name `{t}`"),
            });
        }
    }
    Ok(Some(Line::Edge { a, b, bi }))
}

fn decl(item: &str, hidden: bool, no: usize) -> Result<VarDecl> {
    let (name, k) = match item.split_once(':') {
        Some((n, k)) => {
            let k: usize = k.parse().map_err(|_| Error::Parse {
                line: no,
                msg: format!("bad state count in `{item}`"),
            })?;
            (n, k)
        }
        None => (item, 2),
    };
    if !is_ident(name) {
        return Err(Error::Parse {
            line: no,
            msg: format!("bad vertex name `{name}`"),
        });
    }
    if k < 2 {
        return Err(Error::Parse {
            line: no,
            msg: format!("`{name}` needs at least two states"),
        });
    }
    Ok(VarDecl::new(name, k, hidden))
}

pub(super) fn parse_graph(text: &str) -> Result<Admg> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(l) = classify(raw, i + 1)? {
            lines.push((i + 1, l));
        }
    }
    let mut vars: Vec<VarDecl> = Vec::new();
    for (no, l) in &lines {
        if let Line::Decl { hidden, items } = l {
            for item in items {
                let d = decl(item, *hidden, *no)?;
                if vars.iter().any(|v| v.name == d.name) {
                    return Err(Error::Duplicate(d.name));
                }
                vars.push(d);
            }
        }
    }
    let any_hidden = vars.iter().any(|v| v.hidden);
    let index = |name: &str| {
        vars.iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    };
    let mut g = Mixed::new(vars.len());
    for (_, l) in &lines {
        if let Line::Edge { a, b, bi } = l {
            let (u, v) = (index(a)?, index(b)?);
            if u == v {
                return Err(Error::SelfLoop(a.to_string()));
            }
            if *bi {
                if any_hidden {
                    return Err(Error::BidirectedWithHidden(a.to_string(), b.to_string()));
                }
                g.add_bidirected(u, v);
            } else {
                g.add_directed(u, v);
            }
        }
    }
    if let Some(v) = g.cycle_witness() {
        return Err(Error::Cycle(vars[v].name.clone()));
    }
    Ok(Admg::from_parts(vars, g))
}

pub(super) fn render_graph(g: &Admg) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < g.len() {
        let hidden = g.var(i).hidden;
        out.push_str(if hidden { "hidden" } else { "var" });
        while i < g.len() && g.var(i).hidden == hidden {
            let v = g.var(i);
            out.push(' ');
            out.push_str(&v.name);
            if v.cardinality() != 2 {
                out.push_str(&format!(":{}", v.cardinality()));
            }
            i += 1;
        }
        out.push('\n');
    }
    for (a, b) in g.directed_edges() {
        out.push_str(&format!("{} -> {}\n", g.name(a), g.name(b)));
    }
    for (a, b) in g.bidirected_edges() {
        out.push_str(&format!("{} <-> {}\n", g.name(a), g.name(b)));
    }
    out
}
