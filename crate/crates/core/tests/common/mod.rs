//! Curated graphs and reference checkers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use swig_core::graph::Mixed;
use swig_core::separation::{separated, SeparationQuery};
use swig_core::{Admg, VSet};

pub const MEDIATION: &str = "var C A M Y\nC -> A\nC -> M\nC -> Y\nA -> M\nA -> Y\nM -> Y\n";
pub const FRONT_DOOR_HIDDEN: &str = "var A M Y\nhidden H\nH -> A\nH -> Y\nA -> M\nM -> Y\n";
pub const FRONT_DOOR: &str = "var A M Y\nA -> M\nM -> Y\nA <-> Y\n";
pub const CONFOUNDED_PAIR: &str = "var A Y1 Y2\nA -> Y1\nA <-> Y2\nY1 <-> Y2\n";
pub const CONFOUNDED_PAIR_DAG: &str = "var A Y1 Y2\nhidden H1 H2\nA -> Y1\nH1 -> A\nH1 -> Y2\nH2 -> Y1\nH2 -> Y2\n";
pub const BOW: &str = "var A Y\nA -> Y\nA <-> Y\n";
pub const NAPKIN: &str = "var W R X Y\nhidden H1 H2\nW -> R\nR -> X\nX -> Y\nH1 -> W\nH1 -> X\nH2 -> W\nH2 -> Y\n";
pub const INSTRUMENT: &str = "var Z A Y\nhidden H\nZ -> A\nA -> Y\nH -> A\nH -> Y\n";
pub const M_BIAS: &str = "var A C Y\nhidden U1 U2\nU1 -> A\nU1 -> C\nU2 -> C\nU2 -> Y\nA -> Y\n";
pub const FIVE: &str = "var A B C D Y\nA -> B\nB -> C\nC -> Y\nD -> Y\nA <-> C\nB <-> Y\nD <-> A\n";

pub fn graph(text: &str) -> Admg {
    Admg::parse(text).unwrap_or_else(|e| panic!("bad test graph: {e}"))
}

/// Hidden-variable DAGs with at most 4 observed and 2 hidden binary vertices.
pub fn dag_suite() -> Vec<(&'static str, Admg)> {
    [
        ("mediation", MEDIATION),
        ("front_door_hidden", FRONT_DOOR_HIDDEN),
        ("confounded_pair", CONFOUNDED_PAIR_DAG),
        ("napkin", NAPKIN),
        ("instrument", INSTRUMENT),
        ("m-bias", M_BIAS),
    ]
    .into_iter()
    .map(|(n, t)| (n, graph(t)))
    .collect()
}

/// Hidden-free ADMGs with at most 5 vertices.
pub fn admg_suite() -> Vec<(&'static str, Admg)> {
    let mut out: Vec<(&'static str, Admg)> = [("mediation", MEDIATION), ("front_door", FRONT_DOOR), ("confounded_pair", CONFOUNDED_PAIR), ("bow", BOW), ("five", FIVE)]
        .into_iter()
        .map(|(n, t)| (n, graph(t)))
        .collect();
    for (n, t) in [("napkin", NAPKIN), ("instrument", INSTRUMENT), ("m-bias", M_BIAS)] {
        out.push((n, graph(t).observed_projection()));
    }
    out
}

/// Random DAG on `n` binary vertices in a random order, fan-in at most 3.
pub fn random_dag<R: Rng>(n: usize, rng: &mut R) -> Admg {
    let names = ["V0", "V1", "V2", "V3", "V4", "V5"];
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut text = format!("var {}\n", names[..n].join(" "));
    for j in 1..n {
        let mut fan = 0;
        for i in 0..j {
            if fan < 3 && rng.gen_bool(0.5) {
                text.push_str(&format!("{} -> {}\n", names[order[i]], names[order[j]]));
                fan += 1;
            }
        }
    }
    graph(&text)
}

fn cut(g: &Mixed, into: &VSet, out_of: &VSet) -> Mixed {
    let mut m = g.clone();
    for (u, v) in g.directed_edges() {
        if into.contains(&v) || out_of.contains(&u) {
            m.remove_directed(u, v);
        }
    }
    for (u, v) in g.bidirected_edges() {
        if into.contains(&u) || into.contains(&v) {
            m.remove_bidirected(u, v);
        }
    }
    m
}

/// Reference do-calculus preconditions for disjoint `x, y, z, w`.
pub fn do_calculus(g: &Admg, rule: u8, x: &VSet, y: &VSet, z: &VSet, w: &VSet) -> bool {
    let base = g.mixed();
    let empty = VSet::new();
    let m = match rule {
        1 => cut(base, x, &empty),
        2 => cut(&cut(base, x, &empty), &empty, z),
        3 => {
            let gx = cut(base, x, &empty);
            let anc_w = gx.ancestors(w);
            let zw: VSet = z.iter().copied().filter(|v| !anc_w.contains(v)).collect();
            cut(&gx, &zw, &empty)
        }
        _ => panic!("no rule {rule}"),
    };
    let given: VSet = x.union(w).copied().collect();
    separated(&m, &SeparationQuery::new(y.clone(), z.clone(), given))
        .unwrap_or_else(|e| panic!("separation failed: {e}"))
        .separated
}
