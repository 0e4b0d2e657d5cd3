//! Composition of networks and removal of skip terms on binary inputs.

use serde_json::json;

use super::assemble::SkipMode;
use super::{BuiltNetwork, NetBuilder, Node, Probe};
use crate::error::{invalid, Result};
use crate::net::{KindTag, Network, NetworkKind};

fn has_skip_terms(net: &Network) -> bool {
    net.layers().iter().any(|lp| lp.v.as_ref().is_some_and(|v| !v.is_zero()))
}

/// Rewrites a network on `{0,1}`-valued inputs without skip terms: each input
/// read at layer `l >= 2` is carried there by `I(x - 1/2)` neurons. The
/// result agrees with `net` on binary inputs; skip networks become plain.
pub fn forward_binary_inputs(net: &Network) -> Result<Network> {
    if !net.is_valid() {
        return invalid("network failed validation");
    }
    let mut nb = NetBuilder::new(net.input_dim()).binary_inputs();
    let inputs: Vec<Node> = (0..net.input_dim()).map(Node::input).collect();
    let (_, outputs) = nb.append_network(net, &inputs, SkipMode::ForwardBinary)?;
    let kind = match net.kind() {
        KindTag::Skip => KindTag::Plain,
        k => k,
    };
    let (out, _) = nb.finish(kind, outputs, None, None)?;
    Ok(out)
}

/// Feeds the last hidden layer of `front` into `back`, dropping the output
/// layer of `front`. `back` must not read its own input through skip terms
/// (apply [`forward_binary_inputs`] first). The family of the result is the
/// larger of the two.
pub fn stack_on_hidden(front: &BuiltNetwork, back: &BuiltNetwork) -> Result<BuiltNetwork> {
    for (name, b) in [("front", front), ("back", back)] {
        if !b.net.is_valid() {
            let msgs: Vec<String> = b.net.validate().iter().map(|v| v.to_string()).collect();
            return invalid(format!("{name} network is invalid: {}", msgs.join("; ")));
        }
    }
    let fl = front.net.depth();
    let hidden = front.net.arch().widths[fl];
    if back.net.input_dim() != hidden {
        return invalid(format!(
            "back expects {} inputs, front's last hidden layer has {hidden} neurons",
            back.net.input_dim()
        ));
    }
    if has_skip_terms(&back.net) {
        return invalid("unforwarded skip dependency: back reads its input through skip terms");
    }
    let kind = [front.net.kind(), back.net.kind()]
        .into_iter()
        .max_by_key(|k| match k {
            KindTag::Plain => 0,
            KindTag::Skip => 1,
            KindTag::Lin => 2,
        })
        .unwrap();
    let front_net = if kind == KindTag::Lin {
        front.net.embed(KindTag::Lin)?
    } else {
        front.net.clone()
    };
    let mut nb = NetBuilder::new(front_net.input_dim());
    let inputs: Vec<Node> = (0..front_net.input_dim()).map(Node::input).collect();
    let (layers, _) = nb.append_network(&front_net, &inputs, SkipMode::Keep)?;
    let top = layers.last().expect("front has hidden layers");
    let (_, outputs) = nb.append_network(&back.net, &top[..hidden], SkipMode::Reject)?;
    let skip_budget = match (&front_net.arch().kind, kind) {
        (NetworkKind::Skip { skip_counts }, KindTag::Skip) => {
            let mut b = skip_counts.clone();
            b.resize(fl + back.net.depth() - 1, 0);
            Some(b)
        }
        _ => None,
    };
    let (net, _) = nb.finish(kind, outputs, skip_budget, None)?;
    let mut probes = front.probes.clone();
    for (label, p) in &back.probes {
        probes.insert(
            format!("back.{label}"),
            Probe {
                layer: p.layer + fl,
                neuron: p.neuron,
            },
        );
    }
    Ok(BuiltNetwork::new(
        net,
        probes,
        "stack",
        json!({ "front": front.construction, "back": back.construction }),
    ))
}
