//! Approximation of `x -> x^2` on `[0, 1]` through the mixed-radix
//! truncation `x~`: the network computes `(x~ + 1/(2S))^2` with
//! `S = (p1 + 1) prod_l (s_l + 1)`.
//!
//! Writing `x~ = sum_a w_a u_a` over the threshold bits `u_a`, the square
//! expands into products `u_a u_b`, each realized by one neuron
//! `I(u_a + u_b - 3/2)` in the last hidden layer (diagonal `a = b` included).

use serde_json::json;

use super::radix::emit_radix_skip;
use super::{exact_product, Affine, BuiltNetwork, Domain, NetBuilder};
use crate::error::{invalid, Result};
use crate::net::KindTag;

/// `p1 = s` and skips `(s, ..., s, 0)` of length `L - 1`.
pub fn uniform_skips(l: usize, s: usize) -> (usize, Vec<usize>) {
    let mut skips = vec![s; l.saturating_sub(1)];
    if let Some(last) = skips.last_mut() {
        *last = 0;
    }
    (s, skips)
}

/// Skip network in `DHN_skip(L, (1, p1, p1 + s_2, ..., N, N(N+1)/2, 1), s)`
/// with `N = p1 + s_2 + ... + s_{L-1}` and guarantee `1/S`.
pub fn square_approximator(l: usize, p1: usize, skips: &[usize]) -> Result<BuiltNetwork> {
    if l < 2 {
        return invalid("square approximator needs L >= 2");
    }
    if p1 < 1 {
        return invalid("p1 must be at least 1");
    }
    if skips.len() != l - 1 {
        return invalid(format!("skips must have L - 1 = {} entries, got {}", l - 1, skips.len()));
    }
    if skips[l - 2] != 0 {
        return invalid(format!("the last skip count s_L must be 0, got {}", skips[l - 2]));
    }
    let mut radix = vec![p1 + 1];
    radix.extend(skips[..l - 2].iter().map(|s| s + 1));
    let total = exact_product(radix.iter().copied(), "S")? as f64;
    let mut nb = NetBuilder::new(1);
    let thresholds = emit_radix_skip(&mut nb, 0, &radix, l - 1)?;
    let mut units = Vec::new();
    let mut s = 1.0;
    for (i, (nodes, &d)) in thresholds.iter().zip(&radix).enumerate() {
        s *= d as f64;
        for (t, &n) in nodes.iter().enumerate() {
            nb.probe(format!("b{}>={}", i + 1, t + 1), n);
            units.push((n, 1.0 / s));
        }
    }
    let c = 1.0 / (2.0 * total);
    let mut out = Vec::new();
    for a in 0..units.len() {
        for b in a..units.len() {
            let (ua, wa) = units[a];
            let (ub, wb) = units[b];
            let (node, coeff) = if a == b {
                (nb.heaviside(l, vec![(ua, 2.0)], 1.5)?, 2.0 * c * wa + wa * wa)
            } else {
                (nb.heaviside(l, vec![(ua, 1.0), (ub, 1.0)], 1.5)?, 2.0 * wa * wb)
            };
            out.push((node, coeff));
        }
    }
    let (net, probes) = nb.finish(
        KindTag::Skip,
        vec![Affine::new(out, -c * c)],
        Some(skips[..l - 1].to_vec()),
        None,
    )?;
    Ok(BuiltNetwork::new(
        net,
        probes,
        "square",
        json!({ "L": l, "p1": p1, "skips": skips }),
    )
    .with_guarantee(1.0 / total, Domain::unit(1)))
}
