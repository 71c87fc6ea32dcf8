//! Normal form via canonical monomials.
//!
//! An estimand becomes a product of factors with integer exponents, where a
//! probability term `p(X|T)` is the atom `P(X,T)` over `P(T)`. Sums are
//! eliminated innermost symbol first: independent factors move out, a lone
//! atom that uses the symbol once is marginalized, and a lone inner sum is
//! merged. Reassembly pairs each denominator atom with its smallest numerator
//! superset to form conditionals.

use std::collections::BTreeMap;

use super::{Assign, Estimand, Value};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Factor {
    Atom(Vec<Assign>),
    Sum(Vec<String>, Mono),
    Subst(Vec<(String, Value)>, Mono),
    Fix(Vec<(String, usize)>, Mono),
    /// Kept verbatim: a sum whose bound symbol cancels away entirely.
    Raw(Estimand),
}

type Mono = BTreeMap<Factor, i32>;

fn mul(m: &mut Mono, f: Factor, k: i32) {
    if k == 0 {
        return;
    }
    let e = m.entry(f.clone()).or_insert(0);
    *e += k;
    if *e == 0 {
        m.remove(&f);
    }
}

fn mul_mono(m: &mut Mono, other: Mono, k: i32) {
    for (f, e) in other {
        mul(m, f, e * k);
    }
}

fn atom(xs: &[Assign]) -> Option<Factor> {
    let mut v = xs.to_vec();
    v.sort();
    v.dedup();
    if v.is_empty() {
        None
    } else {
        Some(Factor::Atom(v))
    }
}

fn mentions(f: &Factor, x: &str) -> bool {
    match f {
        Factor::Atom(xs) => xs.iter().any(|a| a.value.as_sym() == Some(x)),
        Factor::Sum(over, body) => !over.iter().any(|s| s == x) && mono_mentions(body, x),
        Factor::Subst(b, body) => {
            b.iter().any(|(_, v)| v.as_sym() == Some(x))
                || !b.iter().any(|(s, _)| s == x) && mono_mentions(body, x)
        }
        Factor::Fix(b, body) => !b.iter().any(|(s, _)| s == x) && mono_mentions(body, x),
        Factor::Raw(e) => e.uses(x),
    }
}

fn mono_mentions(m: &Mono, x: &str) -> bool {
    m.keys().any(|f| mentions(f, x))
}

fn to_mono(e: &Estimand) -> Mono {
    let mut m = Mono::new();
    match e {
        Estimand::One => {}
        Estimand::Prob { of, given } => {
            let all: Vec<Assign> = of.iter().chain(given).cloned().collect();
            if let Some(a) = atom(&all) {
                mul(&mut m, a, 1);
            }
            if let Some(a) = atom(given) {
                mul(&mut m, a, -1);
            }
        }
        Estimand::Product(fs) => {
            for f in fs {
                mul_mono(&mut m, to_mono(f), 1);
            }
        }
        Estimand::Ratio(n, d) => {
            mul_mono(&mut m, to_mono(n), 1);
            mul_mono(&mut m, to_mono(d), -1);
        }
        Estimand::Sum { over, body } => {
            let mut order: Vec<&String> = Vec::new();
            for x in over.iter().rev() {
                if !order.contains(&x) {
                    order.push(x);
                }
            }
            let mut b = to_mono(body);
            for i in 0..=order.len() {
                // a bound symbol that cancels away would change the sum's range
                if order[i..].iter().any(|y| body.uses(y) && !mono_mentions(&b, y)) {
                    mul(&mut m, Factor::Raw(e.clone()), 1);
                    return m;
                }
                if let Some(x) = order.get(i) {
                    b = eliminate(x, b);
                }
            }
            m = b;
        }
        Estimand::Substitute { bindings, body } => {
            let b = to_mono(body);
            let mut keep: Vec<(String, Value)> = bindings
                .iter()
                .filter(|(s, v)| v.as_sym() != Some(s.as_str()) && mono_mentions(&b, s))
                .cloned()
                .collect();
            keep.sort();
            keep.dedup_by(|x, y| x.0 == y.0);
            if keep.is_empty() {
                m = b;
            } else if !b.is_empty() {
                mul(&mut m, Factor::Subst(keep, b), 1);
            }
        }
        Estimand::FixEval { bindings, body } => {
            let b = to_mono(body);
            let mut keep: Vec<(String, usize)> = bindings
                .iter()
                .filter(|(s, _)| mono_mentions(&b, s))
                .cloned()
                .collect();
            keep.sort();
            keep.dedup_by(|x, y| x.0 == y.0);
            if keep.is_empty() {
                m = b;
            } else if !b.is_empty() {
                mul(&mut m, Factor::Fix(keep, b), 1);
            }
        }
    }
    m
}

fn eliminate(x: &str, m: Mono) -> Mono {
    let (dep, mut indep): (Mono, Mono) = m.into_iter().partition(|(f, _)| mentions(f, x));
    if dep.is_empty() {
        return indep;
    }
    if dep.len() == 1 {
        let (f, k) = dep.iter().next().map(|(f, k)| (f.clone(), *k)).unwrap_or((Factor::Atom(vec![]), 0));
        if k == 1 {
            match f {
                Factor::Atom(xs) => {
                    let uses = xs.iter().filter(|a| a.value.as_sym() == Some(x)).count();
                    if uses == 1 {
                        let rest: Vec<Assign> =
                            xs.into_iter().filter(|a| a.value.as_sym() != Some(x)).collect();
                        if let Some(a) = atom(&rest) {
                            mul(&mut indep, a, 1);
                        }
                        return indep;
                    }
                }
                Factor::Sum(over, body) => {
                    if let Some(b) = push_through(x, &over, &body) {
                        mul_mono(&mut indep, b, 1);
                        return indep;
                    }
                    let mut merged = vec![x.to_string()];
                    merged.extend(over);
                    mul(&mut indep, Factor::Sum(merged, body), 1);
                    return indep;
                }
                _ => {}
            }
        }
    }
    mul(&mut indep, Factor::Sum(vec![x.to_string()], dep), 1);
    indep
}

/// `Σ_x Σ_over body` as `Σ_over Σ_x body` when `x` eliminates inside and
/// every symbol of `over` stays in use.
fn push_through(x: &str, over: &[String], body: &Mono) -> Option<Mono> {
    let mut b = eliminate(x, body.clone());
    if b.keys().any(|f| matches!(f, Factor::Sum(o, _) if o.first().map(String::as_str) == Some(x))) {
        return None;
    }
    for o in over.iter().rev() {
        if !mono_mentions(&b, o) {
            return None;
        }
        b = eliminate(o, b);
    }
    Some(b)
}

type Depths = BTreeMap<String, i32>;

fn depth(v: &Value, d: &Depths) -> i32 {
    match v {
        Value::Sym(s) => d.get(s).copied().unwrap_or(-1),
        Value::State(_) => -1,
    }
}

fn sort_assigns(xs: &mut [Assign], d: &Depths) {
    xs.sort_by(|a, b| (depth(&a.value, d), &a.var, &a.value).cmp(&(depth(&b.value, d), &b.var, &b.value)));
}

fn prob_key(e: &Estimand, d: &Depths) -> (i32, String, Estimand) {
    match e {
        Estimand::Prob { of, .. } => match of.first() {
            Some(h) => (depth(&h.value, d), h.var.clone(), e.clone()),
            None => (-1, String::new(), e.clone()),
        },
        _ => (i32::MAX, String::new(), e.clone()),
    }
}

fn is_subset(small: &[Assign], big: &[Assign]) -> bool {
    small.iter().all(|a| big.contains(a))
}

fn prob(mut of: Vec<Assign>, mut given: Vec<Assign>, d: &Depths) -> Estimand {
    sort_assigns(&mut of, d);
    sort_assigns(&mut given, d);
    Estimand::Prob { of, given }
}

fn has_superset(m: &Mono, t: &[Assign]) -> bool {
    m.iter().any(|(f, &k)| {
        k > 0
            && match f {
                Factor::Atom(xs) => is_subset(t, xs),
                Factor::Sum(over, body) => !captures(over, t) && has_superset(body, t),
                _ => false,
            }
    })
}

fn captures(over: &[String], t: &[Assign]) -> bool {
    t.iter().any(|a| a.value.as_sym().is_some_and(|s| over.iter().any(|o| o == s)))
}

/// Moves denominator atoms with no partner at this level into a sum that
/// holds a superset, so conditionals stay inside their sums.
fn push_in(mut m: Mono) -> Mono {
    loop {
        let negs: Vec<(Vec<Assign>, i32)> = m
            .iter()
            .filter_map(|(f, &k)| match f {
                Factor::Atom(xs) if k < 0 => Some((xs.clone(), k)),
                _ => None,
            })
            .collect();
        let mut moved = false;
        for (t, k) in negs {
            let local = m.iter().any(|(f, &e)| e > 0 && matches!(f, Factor::Atom(xs) if is_subset(&t, xs)));
            if local {
                continue;
            }
            let target = m.iter().find_map(|(f, &e)| match f {
                Factor::Sum(over, body) if e == 1 && !captures(over, &t) && has_superset(body, &t) => {
                    Some((over.clone(), body.clone()))
                }
                _ => None,
            });
            if let Some((over, body)) = target {
                m.remove(&Factor::Atom(t.clone()));
                m.remove(&Factor::Sum(over.clone(), body.clone()));
                let mut body = body;
                mul(&mut body, Factor::Atom(t), k);
                mul(&mut m, Factor::Sum(over, body), 1);
                moved = true;
                break;
            }
        }
        if !moved {
            return m;
        }
    }
}

fn from_mono(m: &Mono, d: &Depths, level: i32) -> Estimand {
    let m = &push_in(m.clone());
    let mut pos_atoms: Vec<Vec<Assign>> = Vec::new();
    let mut neg_atoms: Vec<Vec<Assign>> = Vec::new();
    let mut pos_other: Vec<Estimand> = Vec::new();
    let mut neg_other: Vec<Estimand> = Vec::new();
    for (f, &k) in m {
        let reps = k.unsigned_abs() as usize;
        match f {
            Factor::Atom(xs) => {
                let list = if k > 0 { &mut pos_atoms } else { &mut neg_atoms };
                list.extend(std::iter::repeat_n(xs.clone(), reps));
            }
            _ => {
                let e = factor_estimand(f, d, level);
                let list = if k > 0 { &mut pos_other } else { &mut neg_other };
                list.extend(std::iter::repeat_n(e, reps));
            }
        }
    }
    neg_atoms.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut probs = Vec::new();
    let mut den = Vec::new();
    for t in neg_atoms {
        let best = pos_atoms
            .iter()
            .enumerate()
            .filter(|(_, s)| is_subset(&t, s))
            .min_by(|(_, a), (_, b)| a.len().cmp(&b.len()).then(a.cmp(b)))
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                let s = pos_atoms.remove(i);
                let of: Vec<Assign> = s.into_iter().filter(|a| !t.contains(a)).collect();
                probs.push(prob(of, t, d));
            }
            None => den.push(prob(t, vec![], d)),
        }
    }
    for s in pos_atoms {
        probs.push(prob(s, vec![], d));
    }
    probs.sort_by_key(|e| prob_key(e, d));
    den.sort_by_key(|e| prob_key(e, d));
    probs.extend(pos_other);
    den.extend(neg_other);
    let num = product(probs);
    if den.is_empty() {
        num
    } else {
        Estimand::ratio(num, product(den))
    }
}

fn product(mut fs: Vec<Estimand>) -> Estimand {
    match fs.len() {
        0 => Estimand::One,
        1 => fs.pop().unwrap_or(Estimand::One),
        _ => Estimand::Product(fs),
    }
}

fn factor_estimand(f: &Factor, d: &Depths, level: i32) -> Estimand {
    match f {
        Factor::Atom(xs) => prob(xs.clone(), vec![], d),
        Factor::Sum(over, body) => {
            let mut inner = d.clone();
            for s in over {
                inner.insert(s.clone(), level + 1);
            }
            Estimand::sum(over.clone(), from_mono(body, &inner, level + 1))
        }
        Factor::Subst(b, body) => {
            let mut inner = d.clone();
            for (s, _) in b {
                inner.insert(s.clone(), -1);
            }
            Estimand::substitute(b.clone(), from_mono(body, &inner, level))
        }
        Factor::Fix(b, body) => {
            let mut inner = d.clone();
            for (s, _) in b {
                inner.insert(s.clone(), -1);
            }
            Estimand::fix_eval(b.clone(), from_mono(body, &inner, level))
        }
        Factor::Raw(e) => e.clone(),
    }
}

/// Semantics-preserving normal form.
pub fn simplify(e: &Estimand) -> Estimand {
    from_mono(&to_mono(e), &Depths::new(), -1)
}
