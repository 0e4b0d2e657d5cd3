//! The network document: one JSON object with fields `kind`, `depth`,
//! `widths`, `skip_counts` or `lin_count`, and `layers` (dense row-major `W`,
//! vector `b`, optional `V`). Built networks add a `meta` object.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::matrix::DenseRows;
use super::{Architecture, LayerParams, Matrix, Network, NetworkKind};
use crate::error::{Error, Result};

#[derive(Serialize)]
pub(crate) struct DocOut<'a, M: Serialize> {
    kind: &'static str,
    depth: usize,
    widths: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    skip_counts: Option<&'a [usize]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lin_count: Option<usize>,
    layers: Vec<LayerOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a M>,
}

#[derive(Serialize)]
struct LayerOut<'a> {
    #[serde(rename = "W")]
    w: DenseRows<'a>,
    b: &'a [f64],
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    v: Option<DenseRows<'a>>,
}

impl<'a, M: Serialize> DocOut<'a, M> {
    pub(crate) fn new(net: &'a Network, meta: Option<&'a M>) -> Self {
        let arch = net.arch();
        let (skip_counts, lin_count) = match &arch.kind {
            NetworkKind::Plain => (None, None),
            NetworkKind::Skip { skip_counts } => (Some(skip_counts.as_slice()), None),
            NetworkKind::Lin { lin_count } => (None, Some(*lin_count)),
        };
        DocOut {
            kind: net.kind().as_str(),
            depth: arch.depth(),
            widths: &arch.widths,
            skip_counts,
            lin_count,
            layers: net
                .layers()
                .iter()
                .map(|lp| LayerOut {
                    w: DenseRows(&lp.w),
                    b: &lp.b,
                    v: lp.v.as_ref().map(DenseRows),
                })
                .collect(),
            meta,
        }
    }
}

#[derive(Deserialize)]
pub(crate) struct DocIn {
    kind: String,
    depth: usize,
    widths: Vec<usize>,
    #[serde(default)]
    skip_counts: Option<Vec<usize>>,
    #[serde(default)]
    lin_count: Option<usize>,
    layers: Vec<LayerIn>,
    #[serde(default)]
    pub(crate) meta: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct LayerIn {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(rename = "V", default)]
    v: Option<Vec<Vec<f64>>>,
}

fn parse_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn dense(path: String, rows: &[Vec<f64>], expected_cols: usize) -> Result<Matrix> {
    let cols = rows.first().map_or(expected_cols, Vec::len);
    Matrix::from_dense(cols, rows).map_err(|e| parse_err(path, e.to_string()))
}

impl DocIn {
    pub(crate) fn parse(text: &str) -> Result<DocIn> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            parse_err(path, e.into_inner().to_string())
        })
    }

    /// Converts to a network. Shape errors that the schema can express are
    /// parse errors; dimension mismatches are left for `validate`.
    pub(crate) fn into_network(self) -> Result<Network> {
        let kind = match self.kind.as_str() {
            "plain" => NetworkKind::Plain,
            "skip" => NetworkKind::Skip {
                skip_counts: self
                    .skip_counts
                    .ok_or_else(|| parse_err("skip_counts", "required for kind `skip`"))?,
            },
            "lin" => NetworkKind::Lin {
                lin_count: self
                    .lin_count
                    .ok_or_else(|| parse_err("lin_count", "required for kind `lin`"))?,
            },
            other => return Err(parse_err("kind", format!("unknown network kind `{other}`"))),
        };
        if self.widths.len() != self.depth + 2 {
            return Err(parse_err(
                "depth",
                format!(
                    "depth {} does not match {} widths",
                    self.depth,
                    self.widths.len()
                ),
            ));
        }
        let arch = Architecture::new(kind, self.widths);
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.into_iter().enumerate() {
            let cols = if i < arch.widths.len() { arch.layer_width(i) } else { 0 };
            let w = dense(format!("layers[{i}].W"), &l.w, cols)?;
            let v = match &l.v {
                Some(v) => Some(dense(format!("layers[{i}].V"), v, arch.widths[0])?),
                None => None,
            };
            layers.push(LayerParams { w, b: l.b, v });
        }
        Ok(Network::from_parts(arch, layers))
    }
}

/// Parses a network document.
pub fn network_from_json(text: &str) -> Result<Network> {
    DocIn::parse(text)?.into_network()
}

/// Writes a network document.
pub fn network_to_writer<W: Write>(net: &Network, w: W) -> Result<()> {
    serde_json::to_writer(w, &DocOut::<()>::new(net, None))?;
    Ok(())
}

pub fn network_to_json(net: &Network) -> Result<String> {
    Ok(serde_json::to_string(&DocOut::<()>::new(net, None))?)
}
