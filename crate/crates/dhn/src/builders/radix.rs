//! Digit extraction networks.
//!
//! The skip extractor reads `x` at every layer and exposes the thresholds
//! `I(b_l >= t)` of the mixed-radix digits. Its neurons use integer weights:
//! the digit-`l` neuron tests `S_l x - sum_{r<l} (S_l / S_r) b_r - t >= 0`.
//! The lin extractors carry `x` (or its remainder) in an identity neuron and
//! peel off one binary digit per layer.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{exact_product, Affine, BuiltNetwork, NetBuilder, Node};
use crate::error::{invalid, Error, Result};
use crate::net::KindTag;

/// Emits the skip extractor for input coordinate `input` in layers
/// `1..=radix.len()` and returns, per digit, the threshold neurons
/// `I(b_l >= t)` for `t = 1..d_l` forwarded to layer `top`.
/// A radix entry of 1 contributes no neurons.
pub(crate) fn emit_radix_skip(
    nb: &mut NetBuilder,
    input: usize,
    radix: &[usize],
    top: usize,
) -> Result<Vec<Vec<Node>>> {
    let x = Node::input(input);
    let mut scale = Vec::with_capacity(radix.len());
    let mut s: u64 = 1;
    for &d in radix {
        s *= d as u64;
        scale.push(s);
    }
    let mut created: Vec<Vec<Node>> = Vec::with_capacity(radix.len());
    for (l, &d) in radix.iter().enumerate() {
        let layer = l + 1;
        let mut base = vec![(x, scale[l] as f64)];
        for (r, nodes) in created.iter().enumerate() {
            let w = -((scale[l] / scale[r]) as f64);
            for &n in nodes {
                base.push((nb.forward(n, layer - 1)?, w));
                // keep layer order digit-major
                if layer <= top {
                    nb.forward(n, layer)?;
                }
            }
        }
        let mut nodes = Vec::with_capacity(d - 1);
        for t in 1..d {
            nodes.push(nb.heaviside(layer, base.clone(), t as f64)?);
        }
        created.push(nodes);
    }
    created
        .into_iter()
        .map(|nodes| nodes.into_iter().map(|n| nb.forward(n, top)).collect())
        .collect()
}

/// Skip network whose last hidden layer holds `I(b_l(x) >= t)` for every
/// digit `l` and `t in 1..d_l`; the output is the truncation `x~`.
pub fn mixed_radix_bit_extractor(radix: &[usize]) -> Result<BuiltNetwork> {
    if radix.is_empty() {
        return invalid("radix vector must be nonempty");
    }
    if let Some(d) = radix.iter().find(|d| **d < 2) {
        return invalid(format!("radix entry {d} is below 2"));
    }
    exact_product(radix.iter().copied(), "radix product")?;
    let l = radix.len();
    let mut nb = NetBuilder::new(1);
    let thresholds = emit_radix_skip(&mut nb, 0, radix, l)?;
    let mut out = Vec::new();
    let mut s = 1.0;
    for (i, (nodes, &d)) in thresholds.iter().zip(radix).enumerate() {
        s *= d as f64;
        for (t, &n) in nodes.iter().enumerate() {
            nb.probe(format!("b{}>={}", i + 1, t + 1), n);
            out.push((n, 1.0 / s));
        }
    }
    let (net, probes) = nb.finish(KindTag::Skip, vec![Affine::new(out, 0.0)], None, None)?;
    Ok(BuiltNetwork::new(
        net,
        probes,
        "mixed_radix_extractor",
        json!({ "radix": radix }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LinVariant {
    /// Last hidden layer holds all bits.
    Wide,
    /// One Heaviside and one identity neuron per layer.
    Narrow,
}

fn check_bits(l: usize) -> Result<()> {
    if l == 0 {
        return invalid("at least one bit is required");
    }
    if l > 52 {
        return Err(Error::Precision(format!("{l} binary digits exceed the 52 supported")));
    }
    Ok(())
}

/// Emits the wide binary extractor for input `input` with one identity neuron
/// per layer below `bits`; returns `b_1..b_bits` at layer `bits`.
pub(crate) fn emit_binary_wide(nb: &mut NetBuilder, input: usize, bits: usize) -> Result<Vec<Node>> {
    let mut carrier = Node::input(input);
    let mut found: Vec<Node> = Vec::with_capacity(bits);
    for layer in 1..=bits {
        let mut terms = vec![(carrier, 1.0)];
        for (i, &b) in found.iter().enumerate() {
            terms.push((nb.forward(b, layer - 1)?, -pow2(i + 1)));
            nb.forward(b, layer)?;
        }
        found.push(nb.heaviside(layer, terms, pow2(layer))?);
        if layer < bits {
            carrier = nb.linear(layer, vec![(carrier, 1.0)], 0.0)?;
        }
    }
    found.into_iter().map(|b| nb.forward(b, bits)).collect()
}

/// `2^-k`.
pub(crate) fn pow2(k: usize) -> f64 {
    (-(k as f64)).exp2()
}

/// Lin networks exposing the first `l` binary digits of `x in [0, 1]`.
pub fn binary_bit_extractor_lin(l: usize, variant: LinVariant) -> Result<BuiltNetwork> {
    check_bits(l)?;
    let mut nb = NetBuilder::new(1);
    let output = match variant {
        LinVariant::Wide => {
            let bits = emit_binary_wide(&mut nb, 0, l)?;
            let mut out = Vec::with_capacity(l);
            for (i, &b) in bits.iter().enumerate() {
                nb.probe(format!("b{}", i + 1), b);
                out.push((b, pow2(i + 1)));
            }
            Affine::new(out, 0.0)
        }
        LinVariant::Narrow => {
            let x = Node::input(0);
            let mut bit = nb.heaviside(1, vec![(x, 1.0)], 0.5)?;
            nb.probe("b1", bit);
            // rest = x - sum_{i < layer} b_i 2^-i, carried by an identity neuron
            let mut rest = if l >= 2 {
                Some(nb.linear(1, vec![(x, 1.0)], 0.0)?)
            } else {
                None
            };
            for layer in 2..=l {
                let r = rest.expect("carrier exists below the last layer");
                let terms = vec![(r, 1.0), (bit, -pow2(layer - 1))];
                bit = nb.heaviside(layer, terms.clone(), pow2(layer))?;
                rest = if layer < l {
                    Some(nb.linear(layer, terms, 0.0)?)
                } else {
                    None
                };
                nb.probe(format!("b{layer}"), bit);
            }
            Affine::new(vec![(bit, 1.0)], 0.0)
        }
    };
    let (net, probes) = nb.finish(KindTag::Lin, vec![output], None, None)?;
    Ok(BuiltNetwork::new(
        net,
        probes,
        "binary_extractor_lin",
        json!({ "L": l, "variant": variant }),
    ))
}
