//! Explicit network constructions.
//!
//! Every builder returns a [`BuiltNetwork`]: the network, the sup-norm error
//! it is proven to reach (when it approximates something), a map from
//! semantic labels such as `"b3"` to the neurons that carry them, and the
//! construction name with its parameters.

mod assemble;
mod basic;
mod decoder;
mod holder;
mod radix;
mod shatter;
mod square;
mod stack;
mod table;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use assemble::{Affine, NetBuilder, Node};
pub use basic::{
    hyperrectangle_indicator, lipschitz_grid_approx, parity_network, piecewise_constant_1d,
    xor_network, PieceSpec,
};
pub use decoder::decoder;
pub use holder::{holder_approximator, multi_indices, DerivativeOracle, HolderConfig};
pub use radix::{binary_bit_extractor_lin, mixed_radix_bit_extractor, LinVariant};
pub use shatter::{shatter_budget, shattering_net, shattering_points, ShatterGeometry};
pub(crate) use holder::factorial;
pub use square::{uniform_skips, square_approximator};
pub use stack::{forward_binary_inputs, stack_on_hidden};
pub use table::{BitTable, Geometry};

use crate::error::{Error, Result};
use crate::net::{ActivationTrace, DocIn, DocOut, Network};

/// The cube `[lo, hi]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn unit(dim: usize) -> Self {
        Domain {
            dim,
            lo: 0.0,
            hi: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guarantee {
    pub sup_error_bound: f64,
    pub domain: Domain,
}

/// Location of a neuron: hidden layer (1-based) and position in its
/// activation vector (identity neurons of lin layers follow the Heaviside
/// ones).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub layer: usize,
    pub neuron: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub name: String,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltNetwork {
    pub net: Network,
    pub guarantee: Option<Guarantee>,
    pub probes: BTreeMap<String, Probe>,
    pub construction: Construction,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    guarantee: Option<Guarantee>,
    probes: BTreeMap<String, Probe>,
    construction: Construction,
}

impl BuiltNetwork {
    pub(crate) fn new(
        net: Network,
        probes: BTreeMap<String, Probe>,
        name: &str,
        params: Value,
    ) -> Self {
        BuiltNetwork {
            net,
            guarantee: None,
            probes,
            construction: Construction {
                name: name.to_string(),
                params,
            },
        }
    }

    pub(crate) fn with_guarantee(mut self, bound: f64, domain: Domain) -> Self {
        self.guarantee = Some(Guarantee {
            sup_error_bound: bound,
            domain,
        });
        self
    }

    /// Value of the probed neuron in a trace.
    pub fn read_probe(&self, trace: &ActivationTrace, label: &str) -> Option<f64> {
        let p = self.probes.get(label)?;
        trace.layers.get(p.layer.checked_sub(1)?)?.get(p.neuron).copied()
    }

    /// Evaluates at `x` and reads the given probes.
    pub fn probe_values(&self, x: &[f64], labels: &[String]) -> Result<Vec<f64>> {
        let (_, trace) = self.net.eval_traced(x)?;
        labels
            .iter()
            .map(|l| {
                self.read_probe(&trace, l)
                    .ok_or_else(|| Error::InvalidInput(format!("no probe `{l}`")))
            })
            .collect()
    }

    fn meta(&self) -> Meta {
        Meta {
            guarantee: self.guarantee,
            probes: self.probes.clone(),
            construction: self.construction.clone(),
        }
    }

    pub fn to_writer<W: Write>(&self, w: W) -> Result<()> {
        let meta = self.meta();
        serde_json::to_writer(w, &DocOut::new(&self.net, Some(&meta)))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = Vec::new();
        self.to_writer(&mut out)?;
        Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
    }

    /// Parses a document; a missing `meta` block yields an anonymous network.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut doc = DocIn::parse(text)?;
        let meta = doc.meta.take();
        let net = doc.into_network()?;
        let meta = match meta {
            Some(v) => serde_path_to_error::deserialize::<_, Meta>(v).map_err(|e| Error::Parse {
                path: format!("meta.{}", e.path()),
                message: e.into_inner().to_string(),
            })?,
            None => Meta {
                guarantee: None,
                probes: BTreeMap::new(),
                construction: Construction {
                    name: "external".into(),
                    params: Value::Null,
                },
            },
        };
        Ok(BuiltNetwork {
            net,
            guarantee: meta.guarantee,
            probes: meta.probes,
            construction: meta.construction,
        })
    }
}

/// Checks an integer product against the exactly representable range.
pub(crate) fn exact_product(factors: impl IntoIterator<Item = usize>, what: &str) -> Result<u64> {
    let mut p: u64 = 1;
    for f in factors {
        p = p
            .checked_mul(f as u64)
            .filter(|v| *v <= 1u64 << 52)
            .ok_or_else(|| Error::Precision(format!("{what} exceeds 2^52")))?;
    }
    Ok(p)
}
