//! Approximation of smooth functions by a quantized local Taylor polynomial.
//!
//! With `Q` cell digits per coordinate and `q = ceil(beta) Q` extracted bits:
//!
//! 1. the first `q` binary digits of every coordinate are extracted;
//! 2. for every `alpha` and `l <= q`, a decoder reads the cell of `x` and
//!    returns the `l`-th binary digit of `(d^alpha f0(c) + B_alpha) / (2 B_alpha)`
//!    at the cell center `c`;
//! 3. the output is
//!    `sum_alpha app(d^alpha f0) prod_kappa app(x_{pi(kappa)} - c_{pi(kappa)}) / alpha!`,
//!    expanded into monomials over the bits. A monomial `v_1 ... v_k` of
//!    bits is the neuron `I(v_1 + ... + v_k - (k - 1/2))`.
//!
//! Skip networks run all decoders side by side (identical neurons are
//! shared); lin networks run them one after another.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use super::decoder::{emit_lin_decoder, emit_skip_decoder, BitSource};
use super::radix::{emit_binary_wide, emit_radix_skip, pow2};
use super::{Affine, BitTable, BuiltNetwork, Domain, Geometry, NetBuilder, Node};
use crate::analysis::binary_digits;
use crate::error::{invalid, Error, Result};
use crate::net::KindTag;

/// `(alpha, x) -> d^alpha f0(x)`. Called from several threads.
pub type DerivativeOracle = Arc<dyn Fn(&[usize], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct HolderConfig {
    pub beta: f64,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    /// Lin networks only.
    pub t: usize,
    /// `B_alpha >= sup |d^alpha f0|`, in [`multi_indices`] order.
    pub bounds: Vec<f64>,
    /// Upper bound on the Hölder norm, used for the guarantee.
    pub holder_norm: f64,
    pub derivative: DerivativeOracle,
}

impl std::fmt::Debug for HolderConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HolderConfig")
            .field("beta", &self.beta)
            .field("d", &self.d)
            .field("m", &self.m)
            .field("n", &self.n)
            .field("t", &self.t)
            .field("bounds", &self.bounds)
            .field("holder_norm", &self.holder_norm)
            .finish_non_exhaustive()
    }
}

impl HolderConfig {
    pub fn geometry(&self, kind: KindTag) -> Result<Geometry> {
        match kind {
            KindTag::Skip => Geometry::skip(self.d, self.m, self.n),
            KindTag::Lin => Geometry::lin(self.d, self.m, self.n, self.t),
            KindTag::Plain => invalid("Hölder approximators are skip or lin networks"),
        }
    }

    /// `ceil(beta)` times the cell digits.
    pub fn bits(&self, kind: KindTag) -> Result<usize> {
        Ok(self.beta.ceil() as usize * self.geometry(kind)?.digits())
    }
}

/// `{alpha : |alpha|_1 < beta}` by degree, lexicographically descending
/// within a degree: `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn multi_indices(d: usize, beta: f64) -> Vec<Vec<usize>> {
    if !(beta > 0.0) {
        return Vec::new();
    }
    let max = beta.ceil() as usize - 1;
    let mut out = Vec::new();
    for deg in 0..=max {
        let mut level = Vec::new();
        compositions(d, deg, &mut Vec::with_capacity(d), &mut level);
        out.extend(level);
    }
    out
}

fn compositions(d: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == d {
        prefix.push(left);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for a in (0..=left).rev() {
        prefix.push(a);
        compositions(d, left - a, prefix, out);
        prefix.pop();
    }
}

pub(crate) fn factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| (1..=a).product::<usize>() as f64).product()
}

/// Variables of the output polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    /// Digit `l` of the quantized derivative `alpha`.
    Eta(usize, usize),
    /// Digit `l` of coordinate `i`.
    Bit(usize, usize),
}

type Poly = BTreeMap<Vec<Var>, f64>;

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let mut k: Vec<Var> = ka.iter().chain(kb).copied().collect();
            k.sort();
            k.dedup();
            *out.entry(k).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// Quantized Taylor network of [`HolderConfig`] for `kind` skip or lin.
pub fn holder_approximator(kind: KindTag, cfg: &HolderConfig) -> Result<BuiltNetwork> {
    if !(cfg.beta > 0.0) || !cfg.beta.is_finite() {
        return invalid(format!("beta must be positive, got {}", cfg.beta));
    }
    let geometry = cfg.geometry(kind)?;
    let q0 = geometry.digits();
    let q = cfg.bits(kind)?;
    if q > 52 {
        return Err(Error::Precision(format!("q = {q} bits exceed the 52 supported")));
    }
    if q0 == 0 {
        return invalid("the geometry has no cell digits");
    }
    let alphas = multi_indices(cfg.d, cfg.beta);
    if cfg.bounds.len() != alphas.len() {
        return invalid(format!(
            "{} derivative bounds for {} multi-indices",
            cfg.bounds.len(),
            alphas.len()
        ));
    }
    if let Some(b) = cfg.bounds.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
        return invalid(format!("derivative bounds must be positive, got {b}"));
    }
    let tables = derivative_tables(cfg, &alphas, geometry, q)?;
    let d = cfg.d;
    let mut nb = NetBuilder::new(d);
    if kind == KindTag::Skip {
        nb = nb.with_dedup();
    }
    // Step 1: bits[i][l - 1] = b_l(x_i) at layer q.
    let bits: Vec<Vec<Node>> = (0..d)
        .map(|i| match kind {
            KindTag::Skip => Ok(emit_radix_skip(&mut nb, i, &vec![2; q], q)?.into_iter().flatten().collect()),
            _ => emit_binary_wide(&mut nb, i, q),
        })
        .collect::<Result<_>>()?;
    for (i, row) in bits.iter().enumerate() {
        for (l, &b) in row.iter().enumerate() {
            nb.probe(format!("x{}.b{}", i + 1, l + 1), b);
        }
    }
    // Step 2: one decoder per quantized derivative digit.
    let (_, _, rn) = geometry.sizes();
    let src = BitSource::Nodes(&bits);
    let mut etas: Vec<Vec<Node>> = Vec::with_capacity(alphas.len());
    let mut slot = 0;
    for row in &tables {
        let mut nodes = Vec::with_capacity(q);
        for table in row {
            let eta = match kind {
                KindTag::Skip => {
                    let out = emit_skip_decoder(&mut nb, &src, table, q + 1)?;
                    nb.heaviside(q + rn + 4, out.terms, out.shift)?
                }
                _ => {
                    let start = q + 1 + slot * (2 * rn + 2);
                    let out = emit_lin_decoder(&mut nb, &src, table, start)?;
                    nb.heaviside(start + 2 * rn + 2, out.terms, 0.5)?
                }
            };
            slot += 1;
            nodes.push(eta);
        }
        etas.push(nodes);
    }
    let top = match kind {
        KindTag::Skip => q + rn + 5,
        _ => q + 2 + slot * (2 * rn + 2),
    };
    // Step 3: expand the quantized Taylor sum into bit monomials.
    let mut total = Poly::new();
    for (a, alpha) in alphas.iter().enumerate() {
        let b = cfg.bounds[a];
        let mut p = Poly::new();
        p.insert(vec![], b * (pow2(q) - 1.0) / factorial(alpha));
        for l in 1..=q {
            p.insert(vec![Var::Eta(a, l)], 2.0 * b * pow2(l) / factorial(alpha));
        }
        for (i, &ai) in alpha.iter().enumerate() {
            let mut dx = Poly::new();
            dx.insert(vec![], pow2(q + 1) - pow2(q0 + 1));
            for l in q0 + 1..=q {
                dx.insert(vec![Var::Bit(i, l)], pow2(l));
            }
            for _ in 0..ai {
                p = mul(&p, &dx);
            }
        }
        for (k, c) in p {
            *total.entry(k).or_insert(0.0) += c;
        }
    }
    let mut terms = Vec::with_capacity(total.len());
    let mut constant = 0.0;
    for (set, c) in total {
        if set.is_empty() {
            constant = c;
            continue;
        }
        if c == 0.0 {
            continue;
        }
        let mut inputs = Vec::with_capacity(set.len());
        for v in &set {
            let n = match *v {
                Var::Eta(a, l) => etas[a][l - 1],
                Var::Bit(i, l) => bits[i][l - 1],
            };
            inputs.push((nb.forward(n, top - 1)?, 1.0));
        }
        let k = inputs.len() as f64;
        terms.push((nb.heaviside(top, inputs, k - 0.5)?, c));
    }
    if terms.is_empty() {
        nb.pad(top, 1)?;
    }
    let (net, probes) = nb.finish(kind, vec![Affine::new(terms, -constant)], None, None)?;
    let bound = 2.0 * cfg.holder_norm * (-(cfg.beta * q0 as f64)).exp2();
    Ok(BuiltNetwork::new(
        net,
        probes,
        "holder",
        json!({
            "kind": kind, "beta": cfg.beta, "d": d, "m": cfg.m, "n": cfg.n, "t": cfg.t,
            "q": q, "bounds": cfg.bounds, "holder_norm": cfg.holder_norm,
        }),
    )
    .with_guarantee(bound, Domain::unit(d)))
}

/// `tables[a][l - 1]`: digit `l` of `(d^alpha f0(c) + B) / (2B)` per cell.
fn derivative_tables(
    cfg: &HolderConfig,
    alphas: &[Vec<usize>],
    geometry: Geometry,
    q: usize,
) -> Result<Vec<Vec<BitTable>>> {
    let (jn, kn, rn) = geometry.sizes();
    let cells = jn * kn * rn;
    let mut out = Vec::with_capacity(alphas.len());
    for (a, alpha) in alphas.iter().enumerate() {
        let b = cfg.bounds[a];
        let mut payloads = vec![Vec::with_capacity(cells); q];
        for j in 1..=jn {
            for k in 1..=kn {
                for r in 1..=rn {
                    let c = geometry.center_of_bits(&geometry.bits_of_cell(j, k, r));
                    let v = ((cfg.derivative)(alpha, &c) + b) / (2.0 * b);
                    if !(0.0..=1.0).contains(&v) {
                        return invalid(format!(
                            "derivative {alpha:?} at {c:?} exceeds its bound {b}"
                        ));
                    }
                    for (l, bit) in binary_digits(v, q)?.into_iter().enumerate() {
                        payloads[l].push(bit);
                    }
                }
            }
        }
        out.push(
            payloads
                .into_iter()
                .map(|p| BitTable::new(geometry, p))
                .collect::<Result<_>>()?,
        );
    }
    Ok(out)
}
