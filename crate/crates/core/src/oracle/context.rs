//! Structural model with context-specific edge removals.
//!
//! Graph: `A -> S -> R -> Y`, `A -> M -> R`, `M -> Y`, hidden `U` into `M`
//! and `R`. `S` is a switch that is `0` whenever `A = 0`. `M` ignores `U`
//! when `A = 1` and `R` ignores `U` when `S = 0`, so in the world `A = 0`
//! the edge `U -> R` is inert and in the world `A = 1` the edge `U -> M` is.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use super::DiscreteScm;
use crate::error::Result;
use crate::graph::Admg;

/// Hidden-variable DAG behind the context-specific model.
pub fn context_graph() -> Admg {
    Admg::parse(
        "var A M Y\nhidden S U R\n\
         A -> S\nA -> M\nS -> R\nM -> R\nM -> Y\nR -> Y\nU -> R\nU -> M\n",
    )
    .unwrap_or_else(|e| unreachable!("fixed graph text: {e}"))
}

/// Random CPTs with the context constraints imposed.
pub fn context_specific_scm<R: Rng + ?Sized>(rng: &mut R) -> Result<DiscreteScm> {
    let g = context_graph();
    let (m, s, r) = (vertex(&g, "M"), vertex(&g, "S"), vertex(&g, "R"));
    let mut scm = DiscreteScm::random(&g, rng)?;
    // S rows by A
    scm.set_row(s, 0, point_mass())?;
    // M rows by (A, U)
    let m_row = scm.cpt(m)[2].clone();
    scm.set_row(m, 3, m_row)?;
    // R rows by (M, S, U)
    for mv in 0..2 {
        let row = scm.cpt(r)[mv * 4].clone();
        scm.set_row(r, mv * 4 + 1, row)?;
    }
    Ok(scm)
}

fn vertex(g: &Admg, name: &str) -> usize {
    g.vertex(name).unwrap_or_else(|| unreachable!("vertex {name} is declared"))
}

fn point_mass() -> Vec<BigRational> {
    vec![BigRational::one(), BigRational::zero()]
}

#[cfg(test)]
mod tests {
    use super::super::{CfTerm, Coupling, ResponseFunctionTable, World};
    use super::*;
    use crate::config::Guards;
    use crate::oracle::check_independence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constraints_are_imposed() {
        let scm = context_specific_scm(&mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let g = scm.graph();
        assert_eq!(scm.cpt(vertex(g, "S"))[0], point_mass());
        assert_eq!(scm.cpt(1)[2], scm.cpt(1)[3]);
        assert_ne!(scm.cpt(1)[0], scm.cpt(1)[1]);
        let r = vertex(g, "R");
        assert_eq!(scm.cpt(r)[0], scm.cpt(r)[1]);
        assert_eq!(scm.cpt(r)[4], scm.cpt(r)[5]);
    }

    #[test]
    fn outcome_is_independent_of_mediator_and_treatment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let scm = context_specific_scm(&mut rng).unwrap();
            let rft = ResponseFunctionTable::new(&scm, Coupling::Independent, &Guards::default()).unwrap();
            for a in 0..2 {
                for m in 0..2 {
                    let w = World::from([(0, a), (1, m)]);
                    let terms = [
                        CfTerm::new(2, w),
                        CfTerm::new(1, World::from([(0, a)])),
                        CfTerm::factual(0),
                    ];
                    let j = rft.counterfactual_joint(&terms).unwrap();
                    let y = terms[0].name(scm.graph());
                    let mv = terms[1].name(scm.graph());
                    assert!(check_independence(&j, &[&y], &[&mv, "A"], &[]).unwrap());
                }
            }
        }
    }

    #[test]
    fn constant_confounder_makes_deletions_vacuous() {
        // unconstrained CPTs: with U constant the mediator is unconfounded anyway
        let g = context_graph();
        let mut scm = DiscreteScm::random(&g, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        scm.set_row(vertex(&g, "U"), 0, point_mass()).unwrap();
        let rft = ResponseFunctionTable::new(&scm, Coupling::Independent, &Guards::default()).unwrap();
        for a in 0..2 {
            let terms = [CfTerm::new(2, World::from([(0, a), (1, 0)])), CfTerm::new(1, World::from([(0, a)]))];
            let j = rft.counterfactual_joint(&terms).unwrap();
            let y = terms[0].name(&g);
            let m = terms[1].name(&g);
            assert!(check_independence(&j, &[&y], &[&m], &[]).unwrap());
        }
    }
}
