//! Numeric conditional independence on joint tables.

use crate::error::{Error, Result};
use crate::estimand::{JointTable, Scalar};

/// Tolerance used by [`check_independence`].
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// Largest `|p(l,r|g) - p(l|g) p(r|g)|` over all configurations with
/// `p(g) > 0`.
pub fn independence_gap<S: Scalar>(
    joint: &JointTable<S>,
    left: &[&str],
    right: &[&str],
    given: &[&str],
) -> Result<f64> {
    let mut names: Vec<&str> = Vec::new();
    for n in left.iter().chain(right).chain(given) {
        if names.contains(n) {
            return Err(Error::Estimand(format!("`{n}` appears twice in an independence query")));
        }
        names.push(n);
    }
    let t = joint.marginalize(&names)?.map(|m| m.to_f64());
    let (nl, nr) = (left.len(), right.len());
    let card = |range: std::ops::Range<usize>| -> usize { t.vars()[range].iter().map(|v| v.1).product() };
    let (kl, kr, kg) = (card(0..nl), card(nl..nl + nr), card(nl + nr..names.len()));
    // flat index = (l * kr + r) * kg + g
    let m = t.mass();
    let mut gap: f64 = 0.0;
    for g in 0..kg {
        let pg: f64 = (0..kl * kr).map(|lr| m[lr * kg + g]).sum();
        if pg <= 0.0 {
            continue;
        }
        for l in 0..kl {
            let pl: f64 = (0..kr).map(|r| m[(l * kr + r) * kg + g]).sum::<f64>() / pg;
            for r in 0..kr {
                let pr: f64 = (0..kl).map(|l2| m[(l2 * kr + r) * kg + g]).sum::<f64>() / pg;
                let plr = m[(l * kr + r) * kg + g] / pg;
                gap = gap.max((plr - pl * pr).abs());
            }
        }
    }
    Ok(gap)
}

/// `left ⫫ right | given` within [`INDEPENDENCE_TOL`] in every positive
/// context.
pub fn check_independence<S: Scalar>(
    joint: &JointTable<S>,
    left: &[&str],
    right: &[&str],
    given: &[&str],
) -> Result<bool> {
    Ok(independence_gap(joint, left, right, given)? <= INDEPENDENCE_TOL)
}
