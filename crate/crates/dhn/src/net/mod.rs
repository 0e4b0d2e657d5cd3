//! Deep Heaviside networks: plain, skip-augmented and linear-neuron-augmented.
//!
//! Layer `l` of [`Network::layers`] holds `(W_l, b_l, V_l)` and produces layer
//! `l + 1`; index `L` produces the output. Every hidden neuron computes
//! `I(W f - b >= 0)` (plus `V x` for skip layers), with `I(0) = 1`.
//!
//! Heaviside decisions are made on the exact real value of the pre-activation
//! of the floating-point inputs, so a construction whose thresholds sit on
//! rationals such as `1/3` behaves like its real-arithmetic counterpart.
//! Linear neurons and the output layer are ordinary rounded sums, accumulated
//! in column order (`W` terms, then `V` terms, then the shift).

mod doc;
mod exact;
pub mod matrix;

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use doc::{network_from_json, network_to_json, network_to_writer};
pub(crate) use doc::{DocIn, DocOut};
pub(crate) use exact::exact_sign;
pub use matrix::Matrix;

use crate::error::{invalid, Error, Result};
use exact::Accum;

/// Network family without family-specific data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Plain,
    Skip,
    Lin,
}

impl KindTag {
    pub fn as_str(self) -> &'static str {
        match self {
            KindTag::Plain => "plain",
            KindTag::Skip => "skip",
            KindTag::Lin => "lin",
        }
    }
}

impl fmt::Display for KindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Network family with its extra data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkKind {
    Plain,
    /// `skip_counts[i]` is the budget `s_{i+2}` of layer `i + 2`.
    Skip { skip_counts: Vec<usize> },
    /// Number of identity neurons appended to hidden layers `1..L-1`.
    Lin { lin_count: usize },
}

impl NetworkKind {
    pub fn tag(&self) -> KindTag {
        match self {
            NetworkKind::Plain => KindTag::Plain,
            NetworkKind::Skip { .. } => KindTag::Skip,
            NetworkKind::Lin { .. } => KindTag::Lin,
        }
    }
}

/// Kind plus width vector `(p_0, ..., p_{L+1})`.
///
/// For [`NetworkKind::Lin`] the widths are the Heaviside counts; hidden layers
/// `1..L-1` additionally carry `lin_count` identity neurons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub kind: NetworkKind,
    pub widths: Vec<usize>,
}

impl Architecture {
    pub fn new(kind: NetworkKind, widths: Vec<usize>) -> Self {
        Architecture { kind, widths }
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len().saturating_sub(2)
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Linear neurons carried by layer `l` (zero outside `1..L-1`).
    pub fn linear_width(&self, l: usize) -> usize {
        match self.kind {
            NetworkKind::Lin { lin_count } if l >= 1 && l + 1 <= self.depth() => lin_count,
            _ => 0,
        }
    }

    /// Total activation count of layer `l`, i.e. `p'_l` for lin networks.
    pub fn layer_width(&self, l: usize) -> usize {
        self.widths[l] + self.linear_width(l)
    }

    /// Skip budget `s_l` of hidden layer `l` (zero where no skip is allowed).
    pub fn skip_budget(&self, l: usize) -> usize {
        match &self.kind {
            NetworkKind::Skip { skip_counts } if l >= 2 => {
                skip_counts.get(l - 2).copied().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Parameter count: `sum (p_l + 1) p_{l+1}`, plus `p_0 sum s_l` for skip
    /// networks; lin networks use the augmented widths.
    pub fn param_count(&self) -> u128 {
        let l = self.depth();
        let mut total: u128 = 0;
        for i in 0..=l {
            total += (self.layer_width(i) as u128 + 1) * self.layer_width(i + 1) as u128;
        }
        if let NetworkKind::Skip { skip_counts } = &self.kind {
            total += self.widths[0] as u128 * skip_counts.iter().map(|&s| s as u128).sum::<u128>();
        }
        total
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.widths.len() < 3 {
            out.push(Violation::global(format!(
                "width vector has {} entries; at least one hidden layer is required",
                self.widths.len()
            )));
            return out;
        }
        for (i, &w) in self.widths.iter().enumerate() {
            if w == 0 {
                out.push(Violation::at(i, "width must be at least 1"));
            }
        }
        if let NetworkKind::Skip { skip_counts } = &self.kind {
            let l = self.depth();
            if skip_counts.len() != l - 1 {
                out.push(Violation::global(format!(
                    "skip_counts has {} entries, expected L-1 = {}",
                    skip_counts.len(),
                    l - 1
                )));
            }
            for (i, &s) in skip_counts.iter().enumerate() {
                let layer = i + 2;
                if layer < self.widths.len() && s > self.widths[layer] {
                    out.push(Violation::at(
                        layer,
                        format!("skip count {s} exceeds width {}", self.widths[layer]),
                    ));
                }
            }
        }
        out
    }
}

/// Parameters `(W_l, b_l, V_l)` producing layer `l + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub v: Option<Matrix>,
}

/// One rule broken by a network, located at a layer where applicable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub layer: Option<usize>,
    pub message: String,
}

impl Violation {
    fn at(layer: usize, message: impl Into<String>) -> Self {
        Violation {
            layer: Some(layer),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Violation {
            layer: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Some(l) => write!(f, "layer {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Hidden activations `f^(1), ..., f^(L)` of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    pub layers: Vec<Vec<f64>>,
}

/// Heaviside activation, `I(u >= 0)`.
pub fn heaviside(u: f64) -> Result<u8> {
    if !u.is_finite() {
        return invalid(format!("heaviside of non-finite value {u}"));
    }
    Ok(u8::from(u >= 0.0))
}

/// An immutable network. Construct with [`Network::new`] (validated) or
/// [`Network::from_parts`] (unchecked; evaluation then refuses to run).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    layers: Vec<LayerParams>,
    valid: bool,
}

impl Network {
    pub fn new(arch: Architecture, layers: Vec<LayerParams>) -> Result<Self> {
        let net = Network::from_parts(arch, layers);
        if net.valid {
            Ok(net)
        } else {
            let msgs: Vec<String> = net.validate().iter().map(|v| v.to_string()).collect();
            invalid(format!("invalid network: {}", msgs.join("; ")))
        }
    }

    pub fn from_parts(arch: Architecture, layers: Vec<LayerParams>) -> Self {
        let mut net = Network {
            arch,
            layers,
            valid: false,
        };
        net.valid = net.validate().is_empty();
        net
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn kind(&self) -> KindTag {
        self.arch.kind.tag()
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.arch.depth()
    }

    pub fn input_dim(&self) -> usize {
        self.arch.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.arch.output_dim()
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// Lists every broken invariant; empty iff the network is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let arch = &self.arch;
        let mut out = arch.violations();
        if !out.is_empty() {
            return out;
        }
        let l = arch.depth();
        if self.layers.len() != l + 1 {
            out.push(Violation::global(format!(
                "{} layer parameter sets, expected L+1 = {}",
                self.layers.len(),
                l + 1
            )));
            return out;
        }
        for (i, lp) in self.layers.iter().enumerate() {
            let next = i + 1;
            let rows = arch.layer_width(next);
            let cols = arch.layer_width(i);
            if lp.w.rows() != rows || lp.w.cols() != cols {
                out.push(Violation::at(
                    next,
                    format!(
                        "W_{i} is {}x{}, expected {rows}x{cols}",
                        lp.w.rows(),
                        lp.w.cols()
                    ),
                ));
            }
            if lp.b.len() != rows {
                out.push(Violation::at(
                    next,
                    format!("b_{i} has {} entries, expected {rows}", lp.b.len()),
                ));
            }
            if !lp.w.all_finite() || lp.b.iter().any(|v| !v.is_finite()) {
                out.push(Violation::at(next, format!("non-finite entry in W_{i} or b_{i}")));
            }
            if let Some(v) = &lp.v {
                let skip_layer = matches!(arch.kind, NetworkKind::Skip { .. }) && i >= 1 && i < l;
                if !skip_layer {
                    out.push(Violation::at(
                        next,
                        format!("V_{i} is only allowed for skip networks on hidden layers 2..L"),
                    ));
                    continue;
                }
                if v.rows() != arch.widths[next] || v.cols() != arch.widths[0] {
                    out.push(Violation::at(
                        next,
                        format!(
                            "V_{i} is {}x{}, expected {}x{}",
                            v.rows(),
                            v.cols(),
                            arch.widths[next],
                            arch.widths[0]
                        ),
                    ));
                }
                if !v.all_finite() {
                    out.push(Violation::at(next, format!("non-finite entry in V_{i}")));
                }
                let used = v.nonzero_rows();
                let budget = arch.skip_budget(next);
                if used > budget {
                    out.push(Violation::at(
                        next,
                        format!(
                            "skip budget exceeded at layer {next}: {used} nonzero rows in V_{i}, budget {budget}"
                        ),
                    ));
                }
            }
        }
        out
    }

    /// Evaluates the network at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.run(x, None)
    }

    /// Evaluates and records every hidden activation vector.
    pub fn eval_traced(&self, x: &[f64]) -> Result<(Vec<f64>, ActivationTrace)> {
        let mut layers = Vec::with_capacity(self.depth());
        let out = self.run(x, Some(&mut layers))?;
        Ok((out, ActivationTrace { layers }))
    }

    /// Evaluates many points in parallel; results keep the input order.
    pub fn eval_many(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.par_iter().map(|x| self.eval(x)).collect()
    }

    fn run(&self, x: &[f64], mut trace: Option<&mut Vec<Vec<f64>>>) -> Result<Vec<f64>> {
        if !self.valid {
            return invalid("network failed validation");
        }
        if x.len() != self.input_dim() {
            return invalid(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.input_dim()
            ));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return invalid(format!("non-finite input coordinate {bad}"));
        }
        let l = self.depth();
        let mut prev: Vec<f64> = x.to_vec();
        for (i, lp) in self.layers.iter().enumerate() {
            let heaviside_rows = if i == l { 0 } else { self.arch.widths[i + 1] };
            let mut cur = Vec::with_capacity(lp.w.rows());
            for r in 0..lp.w.rows() {
                let skip = lp.v.as_ref().filter(|_| r < heaviside_rows).map(|v| v.row(r));
                let acc = accumulate(lp.w.row(r), &prev, skip, x, lp.b[r]);
                if !acc.value.is_finite() {
                    return invalid(format!("non-finite pre-activation at layer {}", i + 1));
                }
                let value = if r < heaviside_rows {
                    if fires(&acc, lp.w.row(r), &prev, skip, x, lp.b[r]) {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    acc.value
                };
                cur.push(value);
            }
            if i < l {
                if let Some(t) = trace.as_deref_mut() {
                    t.push(cur.clone());
                }
            }
            prev = cur;
        }
        Ok(prev)
    }

    /// Rewrites the network into a larger family without changing the
    /// function it computes (bit for bit).
    pub fn embed(&self, target: KindTag) -> Result<Network> {
        match (self.kind(), target) {
            (a, b) if a == b => Ok(self.clone()),
            (KindTag::Plain, KindTag::Skip) => Ok(self.plain_to_skip()),
            (KindTag::Plain, KindTag::Lin) => self.plain_to_skip().skip_to_lin(),
            (KindTag::Skip, KindTag::Lin) => self.skip_to_lin(),
            (a, b) => invalid(format!("unsupported embedding {a} -> {b}")),
        }
    }

    fn plain_to_skip(&self) -> Network {
        let l = self.depth();
        let p0 = self.input_dim();
        let mut layers = self.layers.clone();
        for (i, lp) in layers.iter_mut().enumerate() {
            if i >= 1 && i < l {
                lp.v = Some(Matrix::zeros(self.arch.widths[i + 1], p0));
            }
        }
        let arch = Architecture::new(
            NetworkKind::Skip {
                skip_counts: vec![0; l - 1],
            },
            self.arch.widths.clone(),
        );
        Network::from_parts(arch, layers)
    }

    /// The skip class embeds into the lin class with `s = p_0` identity
    /// neurons that carry `x` to every layer.
    fn skip_to_lin(&self) -> Result<Network> {
        let l = self.depth();
        let p0 = self.input_dim();
        let widths = &self.arch.widths;
        let mut layers = Vec::with_capacity(l + 1);
        for (i, lp) in self.layers.iter().enumerate() {
            let in_lin = i >= 1 && i < l;
            let out_lin = i + 1 < l;
            let cols = widths[i] + if in_lin { p0 } else { 0 };
            let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
            let mut b = Vec::new();
            for r in 0..lp.w.rows() {
                let mut row: Vec<(usize, f64)> =
                    lp.w.row(r).iter().map(|&(c, v)| (c as usize, v)).collect();
                if let Some(v) = &lp.v {
                    row.extend(v.row(r).iter().map(|&(c, w)| (widths[i] + c as usize, w)));
                }
                rows.push(row);
                b.push(lp.b[r]);
            }
            if out_lin {
                for k in 0..p0 {
                    let col = if i == 0 { k } else { widths[i] + k };
                    rows.push(vec![(col, 1.0)]);
                    b.push(0.0);
                }
            }
            layers.push(LayerParams {
                w: Matrix::from_sparse_rows(cols, rows)?,
                b,
                v: None,
            });
        }
        let arch = Architecture::new(NetworkKind::Lin { lin_count: p0 }, widths.clone());
        Network::new(arch, layers)
    }
}

#[inline]
fn accumulate(
    row: &[(u32, f64)],
    prev: &[f64],
    skip: Option<&[(u32, f64)]>,
    x: &[f64],
    b: f64,
) -> Accum {
    let mut value = 0.0;
    let mut abs = 0.0;
    for &(c, w) in row {
        let t = w * prev[c as usize];
        value += t;
        abs += t.abs();
    }
    let mut terms = row.len();
    if let Some(srow) = skip {
        for &(c, w) in srow {
            let t = w * x[c as usize];
            value += t;
            abs += t.abs();
        }
        terms += srow.len();
    }
    Accum {
        value: value - b,
        abs: abs + b.abs(),
        terms: terms + 1,
    }
}

#[inline]
fn fires(
    acc: &Accum,
    row: &[(u32, f64)],
    prev: &[f64],
    skip: Option<&[(u32, f64)]>,
    x: &[f64],
    b: f64,
) -> bool {
    if acc.certain() {
        return acc.value >= 0.0;
    }
    let products = row.iter().map(|&(c, w)| (w, prev[c as usize])).chain(
        skip.into_iter()
            .flatten()
            .map(|&(c, w)| (w, x[c as usize])),
    );
    exact_sign(products, b) != Ordering::Less
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            path: String::from("$"),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_neuron() -> Network {
        let arch = Architecture::new(NetworkKind::Plain, vec![1, 1, 1]);
        let layers = vec![
            LayerParams {
                w: Matrix::from_dense(1, &[vec![1.0]]).unwrap(),
                b: vec![0.0],
                v: None,
            },
            LayerParams {
                w: Matrix::from_dense(1, &[vec![1.0]]).unwrap(),
                b: vec![0.0],
                v: None,
            },
        ];
        Network::new(arch, layers).unwrap()
    }

    #[test]
    fn heaviside_examples() {
        assert_eq!(heaviside(0.0).unwrap(), 1);
        assert_eq!(heaviside(-0.0).unwrap(), 1);
        assert_eq!(heaviside(-0.5).unwrap(), 0);
        assert_eq!(heaviside(3.7).unwrap(), 1);
        assert!(heaviside(f64::NAN).is_err());
        assert!(heaviside(f64::INFINITY).is_err());
    }

    #[test]
    fn single_neuron_at_zero() {
        let net = single_neuron();
        assert_eq!(net.eval(&[0.0]).unwrap(), vec![1.0]);
        assert_eq!(net.eval(&[-1e-300]).unwrap(), vec![0.0]);
        assert!(net.eval(&[f64::NAN]).is_err());
        assert!(net.eval(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn skip_budget_violation_is_reported() {
        let arch = Architecture::new(
            NetworkKind::Skip {
                skip_counts: vec![1],
            },
            vec![1, 2, 2, 1],
        );
        let layers = vec![
            LayerParams {
                w: Matrix::zeros(2, 1),
                b: vec![0.0; 2],
                v: None,
            },
            LayerParams {
                w: Matrix::zeros(2, 2),
                b: vec![0.0; 2],
                v: Some(Matrix::from_dense(1, &[vec![1.0], vec![2.0]]).unwrap()),
            },
            LayerParams {
                w: Matrix::zeros(1, 2),
                b: vec![0.0],
                v: None,
            },
        ];
        let net = Network::from_parts(arch, layers);
        let v = net.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].message.starts_with("skip budget exceeded at layer 2"));
        assert!(net.eval(&[0.0]).is_err());
    }

    #[test]
    fn dimension_mismatch_names_layer() {
        let arch = Architecture::new(NetworkKind::Plain, vec![2, 3, 1]);
        let layers = vec![
            LayerParams {
                w: Matrix::zeros(3, 1),
                b: vec![0.0; 3],
                v: None,
            },
            LayerParams {
                w: Matrix::zeros(1, 3),
                b: vec![0.0],
                v: None,
            },
        ];
        let v = Network::from_parts(arch, layers).validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].layer, Some(1));
    }

    #[test]
    fn param_counts() {
        let plain = Architecture::new(NetworkKind::Plain, vec![1, 3, 2, 1]);
        assert_eq!(plain.param_count(), 2 * 3 + 4 * 2 + 3);
        let skip = Architecture::new(
            NetworkKind::Skip {
                skip_counts: vec![2],
            },
            vec![2, 3, 2, 1],
        );
        assert_eq!(skip.param_count(), 3 * 3 + 4 * 2 + 3 + 2 * 2);
        let lin = Architecture::new(NetworkKind::Lin { lin_count: 2 }, vec![1, 3, 2, 1]);
        // p' = (1, 5, 2, 1)
        assert_eq!(lin.param_count(), 2 * 5 + 6 * 2 + 3);
    }
}
