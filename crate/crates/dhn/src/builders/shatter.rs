//! Networks realizing an arbitrary labeling of the dyadic cell centers
//! `z_i = i / 2^Q - 2^-(Q+1)`, `i = 1..2^Q`, in one dimension.
//!
//! The labels are written into a bit table (the point `z_i` has the digits of
//! `i - 1`), and a binary extractor is stacked with the decoder of that table.
//! For skip networks the decoder's skip terms are first replaced by forwarded
//! inputs and a final neuron thresholds its output.

use serde_json::json;

use super::decoder::{emit_skip_decoder, BitSource};
use super::{
    binary_bit_extractor_lin, decoder, forward_binary_inputs, mixed_radix_bit_extractor,
    stack_on_hidden, Affine, BitTable, BuiltNetwork, Geometry, LinVariant, NetBuilder,
};
use crate::error::{invalid, Error, Result};
use crate::net::KindTag;

/// Largest number of digits accepted for a shattering network.
const MAX_DIGITS: usize = 20;

/// A one-dimensional cell geometry; `t` is ignored for skip networks.
pub type ShatterGeometry = Geometry;

fn check(g: &Geometry) -> Result<Geometry> {
    let g = g.checked()?;
    if g.d != 1 {
        return invalid("shattering uses one-dimensional geometries");
    }
    if g.digits() > MAX_DIGITS {
        return Err(Error::Resource(format!(
            "2^{} points exceed the supported 2^{MAX_DIGITS}",
            g.digits()
        )));
    }
    Ok(g)
}

/// The point set `z_1 < ... < z_{2^Q}`.
pub fn shattering_points(g: &Geometry) -> Result<Vec<f64>> {
    let g = check(g)?;
    let q = g.digits();
    let denom = (1u64 << (q + 1)) as f64;
    Ok((1..=1u64 << q).map(|i| (2 * i - 1) as f64 / denom).collect())
}

/// Network whose output at `z_i` is exactly `labels[i - 1]`.
pub fn shattering_net(g: &Geometry, labels: &[u8]) -> Result<BuiltNetwork> {
    let g = check(g)?;
    let q = g.digits();
    let points = 1usize << q;
    if labels.len() != points {
        return invalid(format!("{} labels for {points} points", labels.len()));
    }
    if labels.iter().any(|&v| v > 1) {
        return invalid("labels must be 0 or 1");
    }
    let params = json!({ "geometry": g, "labels": labels });
    if q == 0 {
        let mut nb = NetBuilder::new(1);
        nb.pad(1, 1)?;
        let (net, probes) =
            nb.finish(g.kind, vec![Affine::new(vec![], -f64::from(labels[0]))], None, None)?;
        return Ok(BuiltNetwork::new(net, probes, "shatter", params));
    }
    let mut payload = vec![0u8; points];
    let (_, kn, rn) = g.sizes();
    for (i, &label) in labels.iter().enumerate() {
        let bits: Vec<u8> = (0..q).map(|l| ((i >> (q - 1 - l)) & 1) as u8).collect();
        let (j, k, r) = g.cell_of_bits(&bits);
        payload[((j - 1) * kn + (k - 1)) * rn + (r - 1)] = label;
    }
    let table = BitTable::new(g, payload)?;
    let mut built = match g.kind {
        KindTag::Skip => {
            let front = mixed_radix_bit_extractor(&vec![2; q])?;
            let mut nb = NetBuilder::new(q).binary_inputs();
            let src = BitSource::Inputs {
                geometry: g,
                forward: false,
            };
            let out = emit_skip_decoder(&mut nb, &src, &table, 1)?;
            let eta = nb.heaviside(rn + 4, out.terms, out.shift)?;
            let (net, _) = nb.finish(KindTag::Skip, vec![Affine::new(vec![(eta, 1.0)], 0.0)], None, None)?;
            let back = BuiltNetwork::new(forward_binary_inputs(&net)?, Default::default(), "decoder", json!({}));
            stack_on_hidden(&front, &back)?
        }
        _ => {
            let front = binary_bit_extractor_lin(q, LinVariant::Wide)?;
            stack_on_hidden(&front, &decoder(&table, None)?)?
        }
    };
    built.construction.name = "shatter".into();
    built.construction.params = params;
    Ok(built)
}

/// Depth and width budgets of the shattering construction:
/// skip `(Q + R + 4, Q + 6K + 5)`, lin `(Q + 2R + 2, Q + max(2^m, 3K + 1))`.
pub fn shatter_budget(g: &Geometry) -> (usize, usize) {
    let q = g.digits();
    let (_, kn, rn) = g.sizes();
    match g.kind {
        KindTag::Lin => (q + 2 * rn + 2, q + (1usize << (g.d * g.m)).max(3 * kn + 1)),
        _ => (q + rn + 4, q + 6 * kn + 5),
    }
}
