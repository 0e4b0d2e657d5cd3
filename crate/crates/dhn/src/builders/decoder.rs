//! Networks mapping the digit bits of `x` to a table value `eta_{j(x),k(x),r(x)}`.
//!
//! Both decoders start from cell indicators
//! `I(sum_{(i,l)} (2 b - 1)(2 beta - 1) >= n - 1/2)`, which fire iff the
//! bits match the pattern `beta` of an index.
//!
//! Skip (`g_r`, three layers): indicators of `j`, `k` and `r` on one layer,
//! `E_k = I(sum_j eta_{j,k,r} I_j - 1/2)` on the next, then
//! `P_k = I(E_k + I_k - 3/2)`. The affine output `sum_k P_k + I_r - 3/2`
//! is nonnegative iff `r(x) = r` and `eta_{j(x),k(x),r} = 1`. The full
//! decoder `g` runs the blocks `g_1..g_R` one layer apart and ORs them.
//!
//! Lin (`h`): the `J` indicators of `j` are spread over `R` layers, identity
//! neurons accumulate `lambda_k = sum_r eta_{j(x),k,r} 2^-r`, a narrow binary
//! extractor reads the digits of every `lambda_k`, and the digit at
//! `(k(x), r(x))` is selected and ORed into the output.

use serde_json::json;

use super::radix::pow2;
use super::{Affine, BitTable, BuiltNetwork, Geometry, NetBuilder, Node};
use crate::error::{invalid, Error, Result};
use crate::net::KindTag;

/// Where the decoder finds bit `(i, l)`.
pub(crate) enum BitSource<'a> {
    /// The builder inputs are the bits in decoder order. With `forward`
    /// they are carried through the layers, otherwise read by skip terms.
    Inputs { geometry: Geometry, forward: bool },
    /// `nodes[i][l - 1]`, forwarded as needed.
    Nodes(&'a [Vec<Node>]),
}

impl BitSource<'_> {
    fn bit(&self, nb: &mut NetBuilder, i: usize, l: usize, layer: usize) -> Result<Node> {
        match self {
            BitSource::Inputs { geometry, forward } => {
                let n = Node::input(geometry.bit_offset(i, l));
                if *forward {
                    nb.forward(n, layer - 1)
                } else {
                    Ok(n)
                }
            }
            BitSource::Nodes(nodes) => nb.forward(nodes[i][l - 1], layer - 1),
        }
    }
}

/// Indicator that the bits at `positions` spell `index - 1` (MSB first).
fn indicator(
    nb: &mut NetBuilder,
    src: &BitSource,
    layer: usize,
    positions: &[(usize, usize)],
    index: usize,
) -> Result<Node> {
    let v = index - 1;
    let n = positions.len();
    let mut terms = Vec::with_capacity(n);
    let mut shift = n as f64 - 0.5;
    for (k, &(i, l)) in positions.iter().enumerate() {
        let sign = if (v >> (n - 1 - k)) & 1 == 1 { 1.0 } else { -1.0 };
        terms.push((src.bit(nb, i, l, layer)?, 2.0 * sign));
        shift += sign;
    }
    nb.heaviside(layer, terms, shift)
}

/// Emits `g_r` in layers `start..=start+2`; returns its affine output.
pub(crate) fn emit_skip_block(
    nb: &mut NetBuilder,
    src: &BitSource,
    table: &BitTable,
    r: usize,
    start: usize,
) -> Result<Affine> {
    let g = &table.geometry;
    let (jn, kn, _) = g.sizes();
    let (jp, kp, rp) = (g.positions(g.j_digits()), g.positions(g.k_digits()), g.positions(g.r_digits()));
    let ij: Vec<Node> = (1..=jn)
        .map(|j| indicator(nb, src, start, &jp, j))
        .collect::<Result<_>>()?;
    let ik: Vec<Node> = (1..=kn)
        .map(|k| indicator(nb, src, start, &kp, k))
        .collect::<Result<_>>()?;
    let ir = indicator(nb, src, start, &rp, r)?;
    let mut out = Vec::with_capacity(kn + 1);
    for (k, &ikn) in ik.iter().enumerate() {
        let terms = ij
            .iter()
            .enumerate()
            .filter(|(j, _)| table.get(j + 1, k + 1, r) == 1)
            .map(|(_, &n)| (n, 1.0))
            .collect();
        let e = nb.heaviside(start + 1, terms, 0.5)?;
        let f = nb.forward(ikn, start + 1)?;
        out.push((nb.heaviside(start + 2, vec![(e, 1.0), (f, 1.0)], 1.5)?, 1.0));
    }
    out.push((nb.forward(ir, start + 2)?, 1.0));
    Ok(Affine::new(out, 1.5))
}

/// Emits the full skip decoder `g` from layer `start`; the returned affine
/// form reads layer `start + R + 2` and is nonnegative iff `eta = 1`.
pub(crate) fn emit_skip_decoder(
    nb: &mut NetBuilder,
    src: &BitSource,
    table: &BitTable,
    start: usize,
) -> Result<Affine> {
    let (_, _, rn) = table.geometry.sizes();
    // acc is the OR of o_1..o_{r-1}, kept on the layer of o_r.
    let mut acc: Option<Node> = None;
    for r in 1..=rn {
        let block = emit_skip_block(nb, src, table, r, start + r - 1)?;
        let layer = start + r + 2;
        let o = nb.heaviside(layer, block.terms, block.shift)?;
        nb.probe(format!("o{r}"), o);
        let mut terms = vec![(o, 1.0)];
        if let Some(s) = acc {
            terms.push((s, 1.0));
        }
        if r == rn {
            return Ok(Affine::new(terms, 0.5));
        }
        acc = Some(if r == 1 {
            nb.forward(o, layer + 1)?
        } else {
            nb.heaviside(layer + 1, terms, 0.5)?
        });
    }
    unreachable!("R >= 1")
}

/// Emits the lin decoder `h` from layer `start`; the returned affine form
/// reads layer `start + 2R + 1` and equals `eta` exactly.
pub(crate) fn emit_lin_decoder(
    nb: &mut NetBuilder,
    src: &BitSource,
    table: &BitTable,
    start: usize,
) -> Result<Affine> {
    let g = &table.geometry;
    let (jn, kn, rn) = g.sizes();
    if rn > 52 {
        return Err(Error::Precision(format!("R = {rn} digits exceed the 52 supported")));
    }
    let jp = g.positions(g.j_digits());
    let mut kr = g.positions(g.k_digits());
    kr.extend(g.positions(g.r_digits()));
    let block = jn / rn;
    let lambda = |j: usize, k: usize| -> f64 {
        (1..=rn).filter(|&r| table.get(j, k, r) == 1).map(pow2).sum()
    };
    // Accumulate lambda_{j(x),k} over R indicator blocks.
    let mut acc: Vec<Option<Node>> = vec![None; kn];
    for l in 1..=rn {
        let layer = start + l - 1;
        let ind: Vec<(usize, Node)> = ((l - 1) * block + 1..=l * block)
            .map(|j| Ok((j, indicator(nb, src, layer, &jp, j)?)))
            .collect::<Result<_>>()?;
        for (k, a) in acc.iter_mut().enumerate() {
            let mut terms: Vec<(Node, f64)> = a.map(|n| (n, 1.0)).into_iter().collect();
            for &(j, n) in &ind {
                terms.push((n, lambda(j, k + 1)));
            }
            *a = Some(nb.linear(layer + 1, terms, 0.0)?);
        }
    }
    let top = start + rn;
    // Narrow extraction of the digits of every lambda_k, selection and OR.
    let mut rest: Vec<Node> = acc.into_iter().map(|a| a.expect("R >= 1")).collect();
    let mut digit: Vec<Node> = Vec::with_capacity(kn);
    let mut or: Option<Node> = None;
    let mut last: Vec<(Node, f64)> = Vec::new();
    for l in 1..=rn {
        let layer = top + l;
        let mut next_rest = Vec::with_capacity(kn);
        let mut new_digit = Vec::with_capacity(kn);
        for k in 0..kn {
            let terms = if l == 1 {
                vec![(rest[k], 1.0)]
            } else {
                vec![(rest[k], 1.0), (digit[k], -pow2(l - 1))]
            };
            new_digit.push(nb.heaviside(layer, terms.clone(), pow2(l))?);
            if l < rn {
                next_rest.push(nb.linear(layer, terms, 0.0)?);
            }
        }
        let mut rho = Vec::with_capacity(kn);
        for (k, &e) in new_digit.iter().enumerate() {
            let sel = indicator(nb, src, layer, &kr, k * rn + l)?;
            rho.push(nb.heaviside(layer + 1, vec![(e, 1.0), (sel, 1.0)], 1.5)?);
        }
        let mut terms: Vec<(Node, f64)> = rho.iter().map(|&n| (n, 1.0)).collect();
        if let Some(s) = or {
            terms.push((s, 1.0));
        }
        if l == rn {
            last = terms;
        } else {
            or = Some(nb.heaviside(layer + 2, terms, 0.5)?);
        }
        digit = new_digit;
        rest = next_rest;
    }
    Ok(Affine::new(last, 0.0))
}

/// Decoder network on the bit vector of `table.geometry`.
///
/// Skip tables give `g` (or the block `g_r` with `r_select`); the output is
/// nonnegative iff the table value is 1. Lin tables give `h`, whose output
/// is the table value itself.
pub fn decoder(table: &BitTable, r_select: Option<usize>) -> Result<BuiltNetwork> {
    let g = table.geometry.checked()?;
    let table = BitTable::new(g, table.payload.clone())?;
    let bits = g.bit_count();
    let (_, _, rn) = g.sizes();
    match g.kind {
        KindTag::Skip => {
            let mut nb = NetBuilder::new(bits).binary_inputs();
            let src = BitSource::Inputs {
                geometry: g,
                forward: false,
            };
            let out = match r_select {
                Some(r) if r == 0 || r > rn => return invalid(format!("r_select {r} outside 1..={rn}")),
                Some(r) => emit_skip_block(&mut nb, &src, &table, r, 1)?,
                None => emit_skip_decoder(&mut nb, &src, &table, 1)?,
            };
            let (net, probes) = nb.finish(KindTag::Skip, vec![out], None, None)?;
            Ok(BuiltNetwork::new(
                net,
                probes,
                "decoder",
                json!({ "kind": "skip", "geometry": g, "r_select": r_select }),
            ))
        }
        _ => {
            if r_select.is_some() {
                return invalid("r_select applies to skip decoders only");
            }
            let mut nb = NetBuilder::new(bits).binary_inputs();
            let src = BitSource::Inputs {
                geometry: g,
                forward: true,
            };
            let out = emit_lin_decoder(&mut nb, &src, &table, 1)?;
            let (net, probes) = nb.finish(KindTag::Lin, vec![out], None, None)?;
            Ok(BuiltNetwork::new(net, probes, "decoder", json!({ "kind": "lin", "geometry": g })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skip_value(b: &BuiltNetwork, bits: &[u8]) -> u8 {
        let x: Vec<f64> = bits.iter().map(|&v| f64::from(v)).collect();
        u8::from(b.net.eval(&x).unwrap()[0] >= 0.0)
    }

    #[test]
    fn skip_single_cell() {
        let g = Geometry::skip(1, 1, 1).unwrap();
        let t = BitTable::from_fn(g, |j, k, r| u8::from((j, k, r) == (1, 1, 1))).unwrap();
        let dec = decoder(&t, None).unwrap();
        assert_eq!(dec.net.depth(), 2 + 3);
        assert_eq!(skip_value(&dec, &[0, 0, 0]), 1);
        assert_eq!(skip_value(&dec, &[1, 0, 0]), 0);
        let g1 = decoder(&t, Some(1)).unwrap();
        assert_eq!(g1.net.arch().widths, vec![3, 5, 5, 3, 1]);
        assert_eq!(skip_value(&g1, &[0, 0, 0]), 1);
        assert_eq!(skip_value(&g1, &[0, 0, 1]), 0);
    }

    #[test]
    fn exhaustive_small_tables() {
        for g in [Geometry::skip(1, 1, 1).unwrap(), Geometry::lin(1, 1, 0, 1).unwrap()] {
            let (jn, kn, rn) = g.sizes();
            let cells = jn * kn * rn;
            for mask in 0u32..(1 << cells) {
                let t = BitTable::new(g, (0..cells).map(|i| ((mask >> i) & 1) as u8).collect()).unwrap();
                let dec = decoder(&t, None).unwrap();
                for j in 1..=jn {
                    for k in 1..=kn {
                        for r in 1..=rn {
                            let bits: Vec<f64> = g.bits_of_cell(j, k, r).iter().map(|&v| f64::from(v)).collect();
                            let y = dec.net.eval(&bits).unwrap()[0];
                            let got = match g.kind {
                                KindTag::Skip => u8::from(y >= 0.0),
                                _ => y as u8,
                            };
                            assert_eq!(got, t.get(j, k, r), "{g:?} mask {mask} cell {j},{k},{r}");
                        }
                    }
                }
            }
        }
    }
}
