//! Neuron-level network assembly.
//!
//! Constructions add neurons one at a time to numbered hidden layers and
//! refer to earlier neurons through [`Node`] handles. [`NetBuilder::finish`]
//! lays the neurons out as matrices for the requested family: Heaviside
//! neurons first, identity neurons last, skip terms in `V`.

use std::collections::{BTreeMap, HashMap};

use super::Probe;
use crate::error::{invalid, Result};
use crate::net::{Architecture, KindTag, LayerParams, Matrix, Network, NetworkKind};

/// Handle to an input coordinate (`layer == 0`) or a hidden neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub layer: usize,
    pub linear: bool,
    pub index: usize,
}

impl Node {
    pub fn input(index: usize) -> Node {
        Node {
            layer: 0,
            linear: false,
            index,
        }
    }
}

/// An affine form `sum w * node - shift`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(Node, f64)>,
    pub shift: f64,
}

impl Affine {
    pub fn new(terms: Vec<(Node, f64)>, shift: f64) -> Self {
        Affine { terms, shift }
    }
}

/// Treatment of skip terms in [`NetBuilder::append_network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipMode {
    /// Keep them as skip terms; the inputs must be builder inputs.
    Keep,
    /// Read forwarded copies of the (binary) inputs instead.
    ForwardBinary,
    /// Fail on any skip term.
    Reject,
}

#[derive(Default)]
struct LayerDraft {
    heaviside: Vec<Affine>,
    linear: Vec<Affine>,
}

type DedupKey = (usize, bool, Vec<(Node, u64)>, u64);

/// Incremental network assembler.
pub struct NetBuilder {
    input_dim: usize,
    binary_inputs: bool,
    layers: Vec<LayerDraft>,
    dedup: Option<HashMap<DedupKey, usize>>,
    forwards: HashMap<(Node, usize), Node>,
    probes: Vec<(String, Node)>,
}

impl NetBuilder {
    pub fn new(input_dim: usize) -> Self {
        NetBuilder {
            input_dim,
            binary_inputs: false,
            layers: Vec::new(),
            dedup: None,
            forwards: HashMap::new(),
            probes: Vec::new(),
        }
    }

    /// Declares the inputs to be bits, so forwarding uses `I(b - 1/2)`.
    pub fn binary_inputs(mut self) -> Self {
        self.binary_inputs = true;
        self
    }

    /// Reuses an existing neuron whenever an identical one is requested.
    pub fn with_dedup(mut self) -> Self {
        self.dedup = Some(HashMap::new());
        self
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of hidden layers created so far.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn is_binary(&self, node: Node) -> bool {
        if node.layer == 0 {
            self.binary_inputs
        } else {
            !node.linear
        }
    }

    /// Adds `I(sum w * node - shift >= 0)` to hidden layer `layer`.
    pub fn heaviside(&mut self, layer: usize, terms: Vec<(Node, f64)>, shift: f64) -> Result<Node> {
        self.add(layer, false, Affine::new(terms, shift), true)
    }

    /// Adds an identity neuron `sum w * node - shift` to hidden layer `layer`.
    pub fn linear(&mut self, layer: usize, terms: Vec<(Node, f64)>, shift: f64) -> Result<Node> {
        self.add(layer, true, Affine::new(terms, shift), true)
    }

    /// Adds `count` Heaviside neurons with no inputs; they only pad a layer.
    pub fn pad(&mut self, layer: usize, count: usize) -> Result<()> {
        for _ in 0..count {
            self.add(layer, false, Affine::default(), false)?;
        }
        Ok(())
    }

    fn add(&mut self, layer: usize, linear: bool, mut a: Affine, dedup: bool) -> Result<Node> {
        if layer == 0 || layer > self.layers.len() + 1 {
            return invalid(format!(
                "cannot add a neuron to layer {layer} (builder depth {})",
                self.layers.len()
            ));
        }
        let mut merged: BTreeMap<Node, f64> = BTreeMap::new();
        for (n, w) in a.terms.drain(..) {
            self.check_source(layer, n)?;
            *merged.entry(n).or_insert(0.0) += w;
        }
        a.terms = merged.into_iter().filter(|e| e.1 != 0.0).collect();
        if layer == self.layers.len() + 1 {
            self.layers.push(LayerDraft::default());
        }
        let key = if dedup {
            self.dedup.as_ref().map(|_| {
                (
                    layer,
                    linear,
                    a.terms.iter().map(|(n, w)| (*n, w.to_bits())).collect::<Vec<_>>(),
                    a.shift.to_bits(),
                )
            })
        } else {
            None
        };
        if let (Some(k), Some(map)) = (&key, &self.dedup) {
            if let Some(&index) = map.get(k) {
                return Ok(Node {
                    layer,
                    linear,
                    index,
                });
            }
        }
        let draft = &mut self.layers[layer - 1];
        let list = if linear {
            &mut draft.linear
        } else {
            &mut draft.heaviside
        };
        list.push(a);
        let index = list.len() - 1;
        if let (Some(k), Some(map)) = (key, self.dedup.as_mut()) {
            map.insert(k, index);
        }
        Ok(Node {
            layer,
            linear,
            index,
        })
    }

    fn check_source(&self, layer: usize, n: Node) -> Result<()> {
        if n.layer == 0 {
            if n.index >= self.input_dim {
                return invalid(format!("input {} out of range", n.index));
            }
            return Ok(());
        }
        if n.layer + 1 != layer {
            return invalid(format!(
                "neuron in layer {layer} cannot read layer {} directly",
                n.layer
            ));
        }
        let d = &self.layers[n.layer - 1];
        let len = if n.linear {
            d.linear.len()
        } else {
            d.heaviside.len()
        };
        if n.index >= len {
            return invalid(format!("unknown neuron {n:?}"));
        }
        Ok(())
    }

    /// Returns a neuron of layer `target` carrying the value of `node`:
    /// `I(b - 1/2)` for bits, an identity neuron otherwise. Copies are cached.
    pub fn forward(&mut self, node: Node, target: usize) -> Result<Node> {
        if target < node.layer {
            return invalid(format!(
                "cannot forward layer {} back to layer {target}",
                node.layer
            ));
        }
        let mut cur = node;
        while cur.layer < target {
            let next = cur.layer + 1;
            cur = match self.forwards.get(&(cur, next)) {
                Some(&n) => n,
                None => {
                    let copy = if self.is_binary(cur) {
                        self.add(next, false, Affine::new(vec![(cur, 1.0)], 0.5), false)?
                    } else {
                        self.add(next, true, Affine::new(vec![(cur, 1.0)], 0.0), false)?
                    };
                    self.forwards.insert((cur, next), copy);
                    copy
                }
            };
        }
        Ok(cur)
    }

    pub fn probe(&mut self, label: impl Into<String>, node: Node) {
        self.probes.push((label.into(), node));
    }

    /// Copies the hidden layers of `net` on top of `inputs` (all in one layer)
    /// and returns the output rows as affine forms over the new last layer.
    ///
    /// `skips` decides what happens to the skip terms of `net`.
    pub fn append_network(
        &mut self,
        net: &Network,
        inputs: &[Node],
        skips: SkipMode,
    ) -> Result<(Vec<Vec<Node>>, Vec<Affine>)> {
        if inputs.len() != net.input_dim() {
            return invalid(format!(
                "network expects {} inputs, {} supplied",
                net.input_dim(),
                inputs.len()
            ));
        }
        let base = inputs.first().map_or(0, |n| n.layer);
        if inputs.iter().any(|n| n.layer != base) {
            return invalid("appended network inputs must share one layer");
        }
        let arch = net.arch();
        let l = net.depth();
        let mut prev: Vec<Node> = inputs.to_vec();
        let mut all = Vec::with_capacity(l);
        let mut outputs = Vec::new();
        for (i, lp) in net.layers().iter().enumerate() {
            let heaviside_rows = if i == l { 0 } else { arch.widths[i + 1] };
            let layer = base + i + 1;
            let mut cur = Vec::with_capacity(lp.w.rows());
            for r in 0..lp.w.rows() {
                let mut terms: Vec<(Node, f64)> =
                    lp.w.row(r).iter().map(|&(c, w)| (prev[c as usize], w)).collect();
                if let Some(v) = lp.v.as_ref().filter(|_| r < heaviside_rows) {
                    for &(c, w) in v.row(r) {
                        let src = match skips {
                            SkipMode::Keep if base == 0 => inputs[c as usize],
                            SkipMode::ForwardBinary if self.is_binary(inputs[c as usize]) => {
                                self.forward(inputs[c as usize], layer - 1)?
                            }
                            SkipMode::ForwardBinary => {
                                return invalid("skip input to forward is not binary");
                            }
                            _ => {
                                return invalid(format!(
                                    "unforwarded skip dependency at layer {} of the appended network",
                                    i + 1
                                ));
                            }
                        };
                        terms.push((src, w));
                    }
                }
                let a = Affine::new(terms, lp.b[r]);
                if i == l {
                    outputs.push(a);
                } else {
                    let linear = r >= heaviside_rows;
                    cur.push(self.add(layer, linear, a, false)?);
                }
            }
            if i < l {
                all.push(cur.clone());
                prev = cur;
            }
        }
        Ok((all, outputs))
    }

    /// Lays the drafted neurons out as a network of family `kind`.
    ///
    /// `skip_budget` overrides the inferred skip counts (it may only raise
    /// them); `lin_count` likewise for the number of identity neurons.
    pub fn finish(
        self,
        kind: KindTag,
        outputs: Vec<Affine>,
        skip_budget: Option<Vec<usize>>,
        lin_count: Option<usize>,
    ) -> Result<(Network, BTreeMap<String, Probe>)> {
        let NetBuilder {
            input_dim,
            mut layers,
            probes,
            ..
        } = self;
        let l = layers.len();
        if l == 0 {
            return invalid("network needs at least one hidden layer");
        }
        if outputs.is_empty() {
            return invalid("network needs at least one output");
        }
        let outputs: Vec<Affine> = outputs
            .into_iter()
            .map(|mut a| {
                let mut merged: BTreeMap<Node, f64> = BTreeMap::new();
                for (n, w) in a.terms.drain(..) {
                    *merged.entry(n).or_insert(0.0) += w;
                }
                a.terms = merged.into_iter().filter(|e| e.1 != 0.0).collect();
                a
            })
            .collect();
        for (i, d) in layers.iter_mut().enumerate() {
            if d.heaviside.is_empty() {
                d.heaviside.push(Affine::default());
            }
            if kind != KindTag::Lin && !d.linear.is_empty() {
                return invalid(format!("{kind} network cannot hold identity neurons (layer {})", i + 1));
            }
        }
        if kind == KindTag::Lin && !layers[l - 1].linear.is_empty() {
            return invalid("the last hidden layer of a lin network must be pure Heaviside");
        }
        let s = layers[..l - 1].iter().map(|d| d.linear.len()).max().unwrap_or(0);
        let s = match lin_count {
            Some(c) if c < s => return invalid(format!("lin count {c} below the {s} identity neurons used")),
            Some(c) => c,
            None => s,
        };
        if kind == KindTag::Lin {
            for d in layers[..l - 1].iter_mut() {
                d.linear.resize(s, Affine::default());
            }
        }
        let mut widths = vec![input_dim];
        widths.extend(layers.iter().map(|d| d.heaviside.len()));
        widths.push(outputs.len());
        let col = |n: &Node| -> usize {
            if n.layer == 0 {
                n.index
            } else if n.linear {
                widths[n.layer] + n.index
            } else {
                n.index
            }
        };
        let mut params = Vec::with_capacity(l + 1);
        let mut skip_used = vec![0usize; l.saturating_sub(1)];
        for li in 0..=l {
            let in_width = widths[li] + if li >= 1 && li < l && kind == KindTag::Lin { s } else { 0 };
            let rows: Vec<&Affine> = if li < l {
                layers[li].heaviside.iter().chain(layers[li].linear.iter()).collect()
            } else {
                outputs.iter().collect()
            };
            let heaviside_rows = if li < l { layers[li].heaviside.len() } else { 0 };
            let mut w_rows = Vec::with_capacity(rows.len());
            let mut v_rows = Vec::new();
            let mut b = Vec::with_capacity(rows.len());
            for (r, a) in rows.iter().enumerate() {
                let mut w_row = Vec::new();
                let mut v_row = Vec::new();
                for (n, w) in &a.terms {
                    if n.layer == li {
                        w_row.push((col(n), *w));
                    } else if n.layer == 0 {
                        v_row.push((n.index, *w));
                    } else {
                        return invalid(format!("output term reads layer {} instead of {li}", n.layer));
                    }
                }
                if !v_row.is_empty() {
                    if kind != KindTag::Skip {
                        return invalid(format!(
                            "{kind} network cannot read the input at layer {}",
                            li + 1
                        ));
                    }
                    if r >= heaviside_rows {
                        return invalid("skip terms are only allowed on hidden Heaviside neurons");
                    }
                    skip_used[li - 1] += 1;
                }
                w_rows.push(w_row);
                if li >= 1 && li < l && r < heaviside_rows {
                    v_rows.push(v_row);
                }
                b.push(a.shift);
            }
            let v = if kind == KindTag::Skip && li >= 1 && li < l {
                Some(Matrix::from_sparse_rows(input_dim, v_rows)?)
            } else {
                None
            };
            params.push(LayerParams {
                w: Matrix::from_sparse_rows(in_width, w_rows)?,
                b,
                v,
            });
        }
        let net_kind = match kind {
            KindTag::Plain => NetworkKind::Plain,
            KindTag::Skip => {
                let counts = match skip_budget {
                    Some(b) => {
                        if b.len() != skip_used.len() || b.iter().zip(&skip_used).any(|(a, u)| a < u) {
                            return invalid(format!(
                                "skip budget {b:?} does not cover the skip rows used {skip_used:?}"
                            ));
                        }
                        b
                    }
                    None => skip_used,
                };
                NetworkKind::Skip {
                    skip_counts: counts,
                }
            }
            KindTag::Lin => NetworkKind::Lin { lin_count: s },
        };
        let net = Network::new(Architecture::new(net_kind, widths.clone()), params)?;
        let mut probe_map = BTreeMap::new();
        for (label, n) in probes {
            probe_map.insert(
                label,
                Probe {
                    layer: n.layer,
                    neuron: col(&n),
                },
            );
        }
        Ok((net, probe_map))
    }
}
