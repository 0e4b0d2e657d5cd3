//! Small closed-form networks: box indicators, parity, XOR, one-dimensional
//! step functions and the grid approximation of Lipschitz functions.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Affine, BuiltNetwork, Domain, NetBuilder, Node};
use crate::error::{invalid, Result};
use crate::net::KindTag;

/// `I(x in [a_1, b_1] x ... x [a_d, b_d])`, boundaries included.
pub fn hyperrectangle_indicator(a: &[f64], b: &[f64]) -> Result<BuiltNetwork> {
    let d = a.len();
    if d == 0 || b.len() != d {
        return invalid(format!("corner dimensions {} and {} must agree and be positive", a.len(), b.len()));
    }
    if let Some(i) = (0..d).find(|&i| !(a[i] <= b[i]) || !a[i].is_finite() || !b[i].is_finite()) {
        return invalid(format!("need a_{i} <= b_{i}, got {} and {}", a[i], b[i]));
    }
    let mut nb = NetBuilder::new(d);
    let mut sides = Vec::with_capacity(2 * d);
    for i in 0..d {
        sides.push(nb.heaviside(1, vec![(Node::input(i), 1.0)], a[i])?);
        sides.push(nb.heaviside(1, vec![(Node::input(i), -1.0)], -b[i])?);
    }
    let inside = nb.heaviside(2, sides.iter().map(|&n| (n, 1.0)).collect(), 2.0 * d as f64 - 0.5)?;
    nb.probe("inside", inside);
    let (net, probes) = nb.finish(KindTag::Plain, vec![Affine::new(vec![(inside, 1.0)], 0.0)], None, None)?;
    Ok(BuiltNetwork::new(net, probes, "rect", json!({ "a": a, "b": b })))
}

/// `prod_i (2 I(x_i) - 1)` with two hidden layers of width `d`.
pub fn parity_network(d: usize) -> Result<BuiltNetwork> {
    if d == 0 {
        return invalid("parity needs d >= 1");
    }
    let mut nb = NetBuilder::new(d);
    let signs: Vec<Node> = (0..d)
        .map(|i| nb.heaviside(1, vec![(Node::input(i), 1.0)], 0.0))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(d);
    let sd = if d % 2 == 0 { 1.0 } else { -1.0 };
    for k in 1..=d {
        let h = nb.heaviside(2, signs.iter().map(|&n| (n, 1.0)).collect(), k as f64)?;
        let sign = if (k + d) % 2 == 0 { 1.0 } else { -1.0 };
        out.push((h, 2.0 * sign));
    }
    let (net, probes) = nb.finish(KindTag::Plain, vec![Affine::new(out, -sd)], None, None)?;
    Ok(BuiltNetwork::new(net, probes, "parity", json!({ "d": d })))
}

/// `I(x_1 >= 0, x_2 < 0) + I(x_1 < 0, x_2 >= 0)`.
pub fn xor_network() -> Result<BuiltNetwork> {
    let mut nb = NetBuilder::new(2);
    let h1 = nb.heaviside(1, vec![(Node::input(0), 1.0)], 0.0)?;
    let h2 = nb.heaviside(1, vec![(Node::input(1), 1.0)], 0.0)?;
    let a = nb.heaviside(2, vec![(h1, 1.0), (h2, -1.0)], 0.5)?;
    let b = nb.heaviside(2, vec![(h1, -1.0), (h2, 1.0)], 0.5)?;
    let (net, probes) = nb.finish(
        KindTag::Plain,
        vec![Affine::new(vec![(a, 1.0), (b, 1.0)], 0.0)],
        None,
        None,
    )?;
    Ok(BuiltNetwork::new(net, probes, "xor", json!({})))
}

/// A step function on `[0, 1]`: value `values[k]` on the `k`-th piece.
///
/// `sides[i] = +1` puts breakpoint `i` into the piece to its right,
/// `-1` into the piece to its left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub breakpoints: Vec<f64>,
    pub sides: Vec<i8>,
    pub values: Vec<f64>,
}

impl PieceSpec {
    pub fn validate(&self) -> Result<()> {
        let p = self.breakpoints.len();
        if self.sides.len() != p || self.values.len() != p + 1 {
            return invalid(format!(
                "{p} breakpoints need {p} sides and {} values, got {} and {}",
                p + 1,
                self.sides.len(),
                self.values.len()
            ));
        }
        if let Some(x) = self.breakpoints.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return invalid(format!("breakpoint {x} outside [0, 1]"));
        }
        if let Some(s) = self.sides.iter().find(|s| **s != 1 && **s != -1) {
            return invalid(format!("side flag {s} is not +1 or -1"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return invalid("piece values must be finite");
        }
        for i in 1..p {
            let (x0, x1) = (self.breakpoints[i - 1], self.breakpoints[i]);
            if x1 < x0 {
                return invalid(format!("breakpoints not sorted at index {i}: {x0} > {x1}"));
            }
            if x1 == x0 && self.sides[i - 1] == -1 && self.sides[i] == 1 {
                return invalid(format!("breakpoints {} and {} coincide with sides (-1, +1)", i - 1, i));
            }
        }
        Ok(())
    }

    /// The step function itself.
    pub fn eval(&self, x: f64) -> f64 {
        let passed = self
            .breakpoints
            .iter()
            .zip(&self.sides)
            .take_while(|(b, s)| if **s == 1 { x >= **b } else { x > **b })
            .count();
        self.values[passed]
    }
}

/// The network `c_0' + sum_i b_i (c_i - c_{i-1}) I(b_i (x - x_i))` in
/// `DHN(1, (1, p, 1))`; with no breakpoints a single idle neuron is used.
pub fn piecewise_constant_1d(spec: &PieceSpec) -> Result<BuiltNetwork> {
    spec.validate()?;
    let mut nb = NetBuilder::new(1);
    let mut terms = Vec::new();
    let mut constant = spec.values[0];
    for (i, (&x, &s)) in spec.breakpoints.iter().zip(&spec.sides).enumerate() {
        let b = f64::from(s);
        let jump = spec.values[i + 1] - spec.values[i];
        let h = nb.heaviside(1, vec![(Node::input(0), b)], b * x)?;
        nb.probe(format!("step{}", i + 1), h);
        terms.push((h, b * jump));
        if s == -1 {
            constant += jump;
        }
    }
    if spec.breakpoints.is_empty() {
        nb.pad(1, 1)?;
    }
    let (net, probes) = nb.finish(KindTag::Plain, vec![Affine::new(terms, -constant)], None, None)?;
    Ok(BuiltNetwork::new(
        net,
        probes,
        "pc1d",
        serde_json::to_value(spec).expect("spec serializes"),
    ))
}

/// Piecewise constant approximation on the `M^d` grid, `M = ceil(p1 / d)`:
/// the output on each cell is `f0` at the cell center.
///
/// With `lipschitz = Some(k)` (w.r.t. the sup norm) the guarantee is
/// `k d / (2 p1)`.
pub fn lipschitz_grid_approx<F>(f0: F, d: usize, p1: usize, lipschitz: Option<f64>) -> Result<BuiltNetwork>
where
    F: Fn(&[f64]) -> f64,
{
    if d == 0 {
        return invalid("dimension must be at least 1");
    }
    if p1 < 1 {
        return invalid("p1 must be at least 1");
    }
    let m = p1.div_ceil(d);
    let cells = (m as u128).checked_pow(d as u32).filter(|c| *c <= 1 << 22);
    let Some(cells) = cells else {
        return Err(crate::Error::Resource(format!("{m}^{d} grid cells")));
    };
    let mut nb = NetBuilder::new(d);
    // cuts[i][n - 1] = I(M x_i - n), n in 1..M
    let mut cuts = vec![Vec::with_capacity(m - 1); d];
    for (i, c) in cuts.iter_mut().enumerate() {
        for n in 1..m {
            c.push(nb.heaviside(1, vec![(Node::input(i), m as f64)], n as f64)?);
        }
    }
    nb.pad(1, p1 - d * (m - 1))?;
    let mut out = Vec::with_capacity(cells as usize);
    let mut idx = vec![0usize; d];
    let mut center = vec![0.0; d];
    for _ in 0..cells {
        // I(c_i = k) = I(c_i >= k) - I(c_i >= k + 1) with I(c_i >= 0) = 1.
        let mut terms = Vec::new();
        let mut shift = d as f64 - 0.5;
        for i in 0..d {
            let k = idx[i];
            if k == 0 {
                shift -= 1.0;
            } else {
                terms.push((cuts[i][k - 1], 1.0));
            }
            if k + 1 < m {
                terms.push((cuts[i][k], -1.0));
            }
            center[i] = (k as f64 + 0.5) / m as f64;
        }
        let cell = nb.heaviside(2, terms, shift)?;
        out.push((cell, f0(&center)));
        for i in 0..d {
            idx[i] += 1;
            if idx[i] < m {
                break;
            }
            idx[i] = 0;
        }
    }
    let (net, probes) = nb.finish(KindTag::Plain, vec![Affine::new(out, 0.0)], None, None)?;
    let built = BuiltNetwork::new(
        net,
        probes,
        "lipschitz_grid",
        json!({ "d": d, "p1": p1, "M": m, "lipschitz": lipschitz }),
    );
    Ok(match lipschitz {
        Some(k) => built.with_guarantee(k * d as f64 / (2.0 * p1 as f64), Domain::unit(d)),
        None => built,
    })
}
