//! Command-line front end.
//!
//! Exit codes: `0` success, `2` not identified, `1` usage, parse or model
//! errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::estimand::Value;
use crate::graph::{Admg, VSet};
use crate::identify::{identify, HedgeWitness, Identification};
use crate::oracle::{Coupling, DiscreteScm};
use crate::pocalc::{apply, Rule, RuleArgs, RuleVerdict};
use crate::query::{parse_value, CounterfactualQuery};
use crate::separation::SeparationQuery;
use crate::swig::{build_swig, ContextSpec, Intervention, Swig};
use crate::verify::{random_models, verify, VerifyOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_IDENTIFIED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "swig", version, about = "Single world intervention graphs and counterfactual identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CouplingArg {
    Independent,
    Comonotone,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Latent projection onto the observed vertices.
    Project {
        /// Graph file.
        graph: String,
    },
    /// SWIG for a treatment list such as `A=a,M=1`.
    Swig {
        /// Graph file.
        graph: String,
        /// Treatments `V=symbol` or `V=state`, comma separated.
        #[arg(long)]
        treat: String,
        /// Context-specific edge deletions.
        #[arg(long)]
        context: Option<String>,
    },
    /// Separation query `Y ⫫ Z | W` (or `_||_`) on the SWIG for `--treat`.
    Sep {
        /// Graph file.
        graph: String,
        /// Query over SWIG node names, e.g. `Y(a) _||_ A | C`.
        query: String,
        /// Treatments `V=symbol` or `V=state`, comma separated.
        #[arg(long, default_value = "")]
        treat: String,
    },
    /// One application of a potential outcomes calculus rule.
    Pocalc {
        /// Graph file.
        graph: String,
        /// Rule number: 1, 2 or 3.
        #[arg(long)]
        rule: u8,
        /// Interventions kept on both sides.
        #[arg(long, default_value = "")]
        x: String,
        /// Outcome vertices.
        #[arg(long)]
        y: String,
        /// Interventions the rule adds or removes.
        #[arg(long, default_value = "")]
        z: String,
        /// Conditioning vertices.
        #[arg(long, default_value = "")]
        w: String,
    },
    /// Identify a counterfactual distribution such as `P(Y(A=a) | M(A=a))`.
    Identify {
        /// Graph file.
        graph: String,
        /// Counterfactual query.
        query: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the identified estimand with exact oracle values.
    Verify {
        /// Graph file.
        graph: String,
        /// Counterfactual query.
        query: String,
        /// Model file.
        #[arg(long, conflicts_with_all = ["random", "seed"])]
        model: Option<String>,
        /// Number of random models on the canonical DAG.
        #[arg(long)]
        random: Option<usize>,
        /// Seed for `--random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = CouplingArg::Independent)]
        coupling: CouplingArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Captured result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Runs the CLI on `args` (program name first).
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Output::ok(text)
            };
        }
    };
    let machine = matches!(
        cli.command,
        Command::Identify { format: Format::Machine, .. } | Command::Verify { format: Format::Machine, .. }
    );
    match dispatch(cli.command) {
        Ok(out) => out,
        Err(e) if machine => Output {
            code: EXIT_ERROR,
            stdout: format!("(result (verdict error) (error {}))\n", quote(&e.to_string())),
            stderr: String::new(),
        },
        Err(e) => Output {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Graph(format!("cannot read `{path}`: {e}")))
}

fn in_file<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{path}: {msg}"),
        },
        other => other,
    })
}

fn load_graph(path: &str) -> Result<Admg> {
    let text = read(path)?;
    in_file(path, Admg::parse(&text))
}

/// `A=a, M=1`: symbols or state labels.
pub fn parse_treatment(g: &Admg, text: &str) -> Result<Vec<Intervention>> {
    let mut out: Vec<Intervention> = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = match part.split_once('=') {
            Some((n, v)) => (n.trim(), Some(v.trim())),
            None => (part, None),
        };
        let v = g.expect_vertex(name)?;
        let t = match value {
            None => Intervention::symbolic(g, v),
            Some(text) => match parse_value(g, v, text)? {
                Value::State(k) => Intervention::bound(g, v, k),
                Value::Sym(s) => Intervention {
                    vertex: v,
                    symbol: s,
                    state: None,
                },
            },
        };
        if out.iter().any(|u| u.vertex == v) {
            return Err(Error::Intervention(format!("{name} assigned twice")));
        }
        out.push(t);
    }
    out.sort_by_key(|t| t.vertex);
    Ok(out)
}

fn parse_vertices(g: &Admg, text: &str) -> Result<VSet> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| g.expect_vertex(p))
        .collect()
}

fn swig_node(sw: &Swig, g: &Admg, tok: &str) -> Result<usize> {
    if let Some(v) = g.vertex(tok) {
        return Ok(v);
    }
    let total = g.len() + sw.interventions().len();
    (0..total)
        .find(|&n| sw.node_name(n) == tok)
        .ok_or_else(|| Error::UnknownVertex(tok.to_string()))
}

/// Names separated by commas or spaces outside parentheses.
fn split_names(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ => {}
        }
        if depth == 0 && (c == ',' || c.is_whitespace()) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// `Y ⫫ Z | W` with comma or space separated node names.
pub fn parse_separation(sw: &Swig, g: &Admg, text: &str) -> Result<SeparationQuery> {
    let norm = text.replace("_||_", "⫫");
    let (lhs, given) = norm.split_once('|').unwrap_or((&norm, ""));
    let (left, right) = lhs
        .split_once('⫫')
        .ok_or_else(|| Error::Separation(format!("expected `⫫` or `_||_` in `{text}`")))?;
    let set = |s: &str| -> Result<VSet> { split_names(s).iter().map(|p| swig_node(sw, g, p)).collect() };
    Ok(SeparationQuery::new(set(left)?, set(right)?, set(given)?))
}

fn witness_text(g: &Admg, h: &HedgeWitness) -> String {
    h.render(g)
}

fn witness_machine(g: &Admg, h: &HedgeWitness) -> String {
    let names = |s: &VSet| s.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(" ");
    format!(
        "(witness (inner {}) (outer {}) (district {}))",
        names(&h.inner),
        names(&h.outer),
        names(&h.district)
    )
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn dispatch(cmd: Command) -> Result<Output> {
    match cmd {
        Command::Project { graph } => Ok(Output::ok(load_graph(&graph)?.observed_projection().render())),
        Command::Swig { graph, treat, context } => {
            let g = load_graph(&graph)?;
            let t = parse_treatment(&g, &treat)?;
            let ctx = match context {
                Some(p) => {
                    let text = read(&p)?;
                    Some(in_file(&p, ContextSpec::parse(&text, &g))?)
                }
                None => None,
            };
            Ok(Output::ok(build_swig(&g, &t, ctx.as_ref())?.render()))
        }
        Command::Sep { graph, query, treat } => {
            let g = load_graph(&graph)?;
            let sw = build_swig(&g, &parse_treatment(&g, &treat)?, None)?;
            let q = parse_separation(&sw, &g, &query)?;
            let v = sw.separated(&q)?;
            let mut out = String::new();
            if v.verdict.separated {
                out.push_str("separated\n");
            } else {
                out.push_str("not separated\n");
            }
            if let Some(p) = &v.verdict.witness {
                let _ = writeln!(out, "path: {}", p.render(|n| sw.node_name(n)));
            }
            if let Some(nd) = &v.nondependence {
                let _ = writeln!(out, "{nd}");
            }
            Ok(Output::ok(out))
        }
        Command::Pocalc { graph, rule, x, y, z, w } => {
            let g = load_graph(&graph)?;
            let rule = Rule::from_number(rule)?;
            let args = RuleArgs {
                x: parse_treatment(&g, &x)?,
                y: parse_vertices(&g, &y)?,
                z: parse_treatment(&g, &z)?,
                w: parse_vertices(&g, &w)?,
            };
            let v = apply(&g, rule, &args)?;
            let mut out = v.render(&g)?;
            out.push('\n');
            if let RuleVerdict::Applies(a) = &v {
                let sw = build_swig(&g, &a.swig_treatment, None)?;
                let set = |s: &VSet| s.iter().map(|&n| sw.node_name(n)).collect::<Vec<_>>().join(",");
                let _ = writeln!(
                    out,
                    "precondition: {{{}}} ⫫ {{{}}} | {{{}}}",
                    set(&a.precondition.left),
                    set(&a.precondition.right),
                    set(&a.precondition.given)
                );
            }
            Ok(Output::ok(out))
        }
        Command::Identify { graph, query, format } => {
            let g = load_graph(&graph)?;
            let q = CounterfactualQuery::parse(&query, &g)?;
            let r = identify(&g, &q)?;
            Ok(match (r, format) {
                (Identification::Identified(e), Format::Text) => Output::ok(format!("{e}\n")),
                (Identification::Identified(e), Format::Machine) => Output::ok(format!(
                    "(result (verdict identified) (estimand {}))\n",
                    e.render_machine()
                )),
                (Identification::NotIdentified(h), Format::Text) => Output {
                    code: EXIT_NOT_IDENTIFIED,
                    stdout: format!("NOT-IDENTIFIED: {}\n", witness_text(&g, &h)),
                    stderr: String::new(),
                },
                (Identification::NotIdentified(h), Format::Machine) => Output {
                    code: EXIT_NOT_IDENTIFIED,
                    stdout: format!("(result (verdict not-identified) {})\n", witness_machine(&g, &h)),
                    stderr: String::new(),
                },
            })
        }
        Command::Verify {
            graph,
            query,
            model,
            random,
            seed,
            coupling,
            format,
        } => {
            let g = load_graph(&graph)?;
            let q = CounterfactualQuery::parse(&query, &g)?;
            let (models, source) = match (model, random) {
                (Some(p), _) => {
                    let text = read(&p)?;
                    (vec![in_file(&p, DiscreteScm::parse(&text))?], format!("model {p}"))
                }
                (None, Some(n)) => (random_models(&g, n, seed)?, format!("random {n} seed {seed}")),
                (None, None) => return Err(Error::Query("verify needs --model or --random".into())),
            };
            let c = match coupling {
                CouplingArg::Independent => Coupling::Independent,
                CouplingArg::Comonotone => Coupling::Comonotone,
            };
            let cname = match c {
                Coupling::Independent => "independent",
                Coupling::Comonotone => "comonotone",
            };
            Ok(match (verify(&g, &q, &models, c, &Guards::default())?, format) {
                (VerifyOutcome::Verified(r), Format::Text) => {
                    let mut out = String::new();
                    let _ = writeln!(out, "query: {}", q.render(&g));
                    let _ = writeln!(out, "estimand: {}", r.estimand);
                    let _ = writeln!(out, "models: {source}");
                    let _ = writeln!(out, "coupling: {cname}");
                    let _ = writeln!(out, "cells: {} (skipped {})", r.cells, r.skipped);
                    let _ = writeln!(out, "max-abs-error: {:e}", r.max_abs_error);
                    Output::ok(out)
                }
                (VerifyOutcome::Verified(r), Format::Machine) => Output::ok(format!(
                    "(result (verdict verified) (source {}) (coupling {cname}) (cells {}) (max-abs-error {:e}) (estimand {}))\n",
                    quote(&source),
                    r.cells,
                    r.max_abs_error,
                    r.estimand.render_machine()
                )),
                (VerifyOutcome::NotIdentified(h), Format::Text) => Output {
                    code: EXIT_NOT_IDENTIFIED,
                    stdout: format!("NOT-IDENTIFIED: {}\nmodels: {source}\n", witness_text(&g, &h)),
                    stderr: String::new(),
                },
                (VerifyOutcome::NotIdentified(h), Format::Machine) => Output {
                    code: EXIT_NOT_IDENTIFIED,
                    stdout: format!(
                        "(result (verdict not-identified) (source {}) {})\n",
                        quote(&source),
                        witness_machine(&g, &h)
                    ),
                    stderr: String::new(),
                },
            })
        }
    }
}
