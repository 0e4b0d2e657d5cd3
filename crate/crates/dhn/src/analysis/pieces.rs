//! Pieces of a network restricted to the segment `x(t) = x1 + t (x2 - x1)`,
//! `t in [0, 1]`.
//!
//! The exact counter keeps a partition of `[0, 1]` into points and open
//! intervals. On every cell each activation is affine in `t`, so a
//! Heaviside neuron changes value at most once there; its root splits the
//! cell. After all layers the output is constant on every cell and equal
//! neighbors are merged.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::net::{exact_sign, Network};

/// Roots closer than this (in `t`) are treated as one breakpoint.
pub const ROOT_TOL: f64 = 1e-12;

/// Piecewise constant restriction of a network to a segment.
///
/// `breakpoints[i]` separates `values[i]` and `values[i + 1]`; with
/// `sides[i] = 1` the breakpoint itself takes the right value, with `-1`
/// the left one. A piece consisting of a single point `t` appears as the
/// pair `(t, 1), (t, -1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPartition {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub breakpoints: Vec<f64>,
    pub sides: Vec<i8>,
    pub values: Vec<Vec<f64>>,
}

impl SegmentPartition {
    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// Value of the piece containing `t`.
    pub fn value_at(&self, t: f64) -> &[f64] {
        let passed = self
            .breakpoints
            .iter()
            .zip(&self.sides)
            .take_while(|(b, s)| if **s == 1 { t >= **b } else { t > **b })
            .count();
        &self.values[passed]
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        segment_point(&self.x1, &self.x2, t)
    }
}

pub(crate) fn segment_point(x1: &[f64], x2: &[f64], t: f64) -> Vec<f64> {
    x1.iter().zip(x2).map(|(a, b)| a + t * (b - a)).collect()
}

fn check_segment(net: &Network, x1: &[f64], x2: &[f64]) -> Result<()> {
    if !net.is_valid() {
        return invalid("network failed validation");
    }
    let d = net.input_dim();
    if x1.len() != d || x2.len() != d {
        return invalid(format!(
            "segment endpoints have {} and {} coordinates, network expects {d}",
            x1.len(),
            x2.len()
        ));
    }
    if x1.iter().chain(x2).any(|v| !v.is_finite()) {
        return invalid("segment endpoints must be finite");
    }
    Ok(())
}

/// `a + b t` per activation.
type Affine = Vec<(f64, f64)>;

struct Cell {
    lo: f64,
    hi: f64,
    state: Affine,
}

impl Cell {
    fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

struct Pre {
    a: f64,
    b: f64,
    abs: f64,
}

fn pre_activation(
    row: &[(u32, f64)],
    prev: &Affine,
    skip: Option<&[(u32, f64)]>,
    input: &Affine,
    bias: f64,
) -> Pre {
    let (mut a, mut b, mut abs) = (0.0, 0.0, 0.0);
    for &(c, w) in row {
        let (pa, pb) = prev[c as usize];
        a += w * pa;
        b += w * pb;
        abs += (w * pa).abs() + (w * pb).abs();
    }
    for &(c, w) in skip.into_iter().flatten() {
        let (pa, pb) = input[c as usize];
        a += w * pa;
        b += w * pb;
        abs += (w * pa).abs() + (w * pb).abs();
    }
    Pre {
        a: a - bias,
        b,
        abs: abs + bias.abs(),
    }
}

/// Heaviside value on a cell without interior roots.
fn decide(
    cell: &Cell,
    p: &Pre,
    row: &[(u32, f64)],
    skip: Option<&[(u32, f64)]>,
    input: &Affine,
    bias: f64,
) -> bool {
    if p.b == 0.0 {
        // Constant on the cell: the exact sign of the rounded constants,
        // as in direct evaluation.
        let products = row
            .iter()
            .map(|&(c, w)| (w, cell.state[c as usize].0))
            .chain(skip.into_iter().flatten().map(|&(c, w)| (w, input[c as usize].0)));
        return exact_sign(products, bias) != Ordering::Less;
    }
    if cell.is_point() {
        let tol = ROOT_TOL * p.b.abs() + 8.0 * f64::EPSILON * p.abs;
        p.a + p.b * cell.lo >= -tol
    } else {
        p.a + p.b * (0.5 * (cell.lo + cell.hi)) >= 0.0
    }
}

/// Exact piece structure of `net` along the segment from `x1` to `x2`.
pub fn exact_pieces(net: &Network, x1: &[f64], x2: &[f64]) -> Result<SegmentPartition> {
    check_segment(net, x1, x2)?;
    let input: Affine = x1.iter().zip(x2).map(|(&a, &b)| (a, b - a)).collect();
    let mut cells = vec![
        Cell { lo: 0.0, hi: 0.0, state: input.clone() },
        Cell { lo: 0.0, hi: 1.0, state: input.clone() },
        Cell { lo: 1.0, hi: 1.0, state: input.clone() },
    ];
    let l = net.depth();
    let widths = &net.arch().widths;
    for (i, lp) in net.layers().iter().enumerate() {
        let heaviside_rows = if i == l { 0 } else { widths[i + 1] };
        let mut next = Vec::with_capacity(cells.len());
        for cell in cells {
            let pres: Vec<Pre> = (0..lp.w.rows())
                .map(|r| {
                    let skip = lp.v.as_ref().filter(|_| r < heaviside_rows).map(|v| v.row(r));
                    pre_activation(lp.w.row(r), &cell.state, skip, &input, lp.b[r])
                })
                .collect();
            let mut pieces = Vec::new();
            if cell.is_point() {
                pieces.push(cell);
            } else {
                let mut roots: Vec<f64> = pres[..heaviside_rows]
                    .iter()
                    .filter(|p| p.b != 0.0)
                    .map(|p| -p.a / p.b)
                    .filter(|&t| t > cell.lo + ROOT_TOL && t < cell.hi - ROOT_TOL)
                    .collect();
                roots.sort_by(f64::total_cmp);
                roots.dedup_by(|b, a| *b - *a <= ROOT_TOL);
                let mut lo = cell.lo;
                for t in roots {
                    pieces.push(Cell { lo, hi: t, state: cell.state.clone() });
                    pieces.push(Cell { lo: t, hi: t, state: cell.state.clone() });
                    lo = t;
                }
                pieces.push(Cell { lo, hi: cell.hi, state: cell.state });
            }
            for piece in pieces {
                let state = pres
                    .iter()
                    .enumerate()
                    .map(|(r, p)| {
                        if r < heaviside_rows {
                            let skip = lp.v.as_ref().map(|v| v.row(r));
                            let on = decide(&piece, p, lp.w.row(r), skip, &input, lp.b[r]);
                            (if on { 1.0 } else { 0.0 }, 0.0)
                        } else {
                            (p.a, p.b)
                        }
                    })
                    .collect();
                next.push(Cell { lo: piece.lo, hi: piece.hi, state });
            }
        }
        cells = next;
    }
    // Open cells are confirmed by direct evaluation at their midpoint.
    let mut values = Vec::with_capacity(cells.len());
    for cell in &cells {
        let v: Vec<f64> = if cell.is_point() {
            cell.state.iter().map(|s| s.0).collect()
        } else {
            net.eval(&segment_point(x1, x2, 0.5 * (cell.lo + cell.hi)))?
        };
        values.push(v);
    }
    let mut out = SegmentPartition {
        x1: x1.to_vec(),
        x2: x2.to_vec(),
        breakpoints: Vec::new(),
        sides: Vec::new(),
        values: vec![values[0].clone()],
    };
    for i in 1..cells.len() {
        if values[i] == values[i - 1] {
            continue;
        }
        if cells[i].is_point() {
            out.breakpoints.push(cells[i].lo);
            out.sides.push(1);
        } else {
            out.breakpoints.push(cells[i - 1].lo);
            out.sides.push(-1);
        }
        out.values.push(values[i].clone());
    }
    Ok(out)
}

/// Lower estimate of the piece count from an `n`-point grid.
///
/// The Heaviside activations are compared at the ends of each grid range: on
/// a range where they agree, every Heaviside layer is constant (each neuron
/// is monotone in `t` once the layers below are fixed), so the range is
/// never subdivided. Differing neighbors are bisected down to `refine_tol`.
pub fn sampled_pieces(net: &Network, x1: &[f64], x2: &[f64], n: usize, refine_tol: f64) -> Result<usize> {
    check_segment(net, x1, x2)?;
    if n < 2 {
        return invalid(format!("grid size must be at least 2, got {n}"));
    }
    let sampler = Sampler { net, x1, x2, n, tol: refine_tol.max(0.0) };
    let first = sampler.trace_at(sampler.grid(0))?;
    let last = sampler.trace_at(sampler.grid(n - 1))?;
    Ok(1 + sampler.grid_changes(0, n - 1, &first, &last)?)
}

/// Output followed by the Heaviside part of every hidden layer. Identity
/// neurons are affine in `t` wherever the Heaviside neurons are fixed.
type Trace = Vec<Vec<f64>>;

struct Sampler<'a> {
    net: &'a Network,
    x1: &'a [f64],
    x2: &'a [f64],
    n: usize,
    tol: f64,
}

impl Sampler<'_> {
    fn grid(&self, i: usize) -> f64 {
        i as f64 / (self.n - 1) as f64
    }

    fn trace_at(&self, t: f64) -> Result<Trace> {
        let (out, trace) = self.net.eval_traced(&segment_point(self.x1, self.x2, t))?;
        let widths = &self.net.arch().widths;
        let mut v = Vec::with_capacity(trace.layers.len() + 1);
        v.push(out);
        for (l, mut layer) in trace.layers.into_iter().enumerate() {
            layer.truncate(widths[l + 1]);
            v.push(layer);
        }
        Ok(v)
    }

    fn grid_changes(&self, i: usize, j: usize, ti: &Trace, tj: &Trace) -> Result<usize> {
        if ti == tj {
            return Ok(0);
        }
        if j == i + 1 {
            return self.refine(self.grid(i), self.grid(j), ti, tj);
        }
        let m = (i + j) / 2;
        let tm = self.trace_at(self.grid(m))?;
        Ok(self.grid_changes(i, m, ti, &tm)? + self.grid_changes(m, j, &tm, tj)?)
    }

    fn refine(&self, a: f64, b: f64, ta: &Trace, tb: &Trace) -> Result<usize> {
        if ta == tb {
            return Ok(0);
        }
        let m = 0.5 * (a + b);
        if b - a <= self.tol || m <= a || m >= b {
            return Ok(usize::from(ta[0] != tb[0]));
        }
        let tm = self.trace_at(m)?;
        Ok(self.refine(a, m, ta, &tm)? + self.refine(m, b, &tm, tb)?)
    }
}
