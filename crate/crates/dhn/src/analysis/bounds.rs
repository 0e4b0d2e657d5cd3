//! Closed-form piece counts, approximation lower bounds and VC upper bounds.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::net::{Architecture, KindTag, NetworkKind};

/// Maximal number of pieces along any segment:
/// plain `p_1 + 1`, skip `(p_1 + 1) prod_{l>=2} (s_l + 1)`,
/// lin `prod_l (p_l + 1)` over the Heaviside widths. Saturates at `u128::MAX`.
pub fn piece_bound(arch: &Architecture) -> u128 {
    let p1 = arch.widths.get(1).copied().unwrap_or(0) as u128;
    match &arch.kind {
        NetworkKind::Plain => p1 + 1,
        NetworkKind::Skip { skip_counts } => skip_counts
            .iter()
            .fold(p1 + 1, |acc, &s| acc.saturating_mul(s as u128 + 1)),
        NetworkKind::Lin { .. } => (1..=arch.depth())
            .fold(1u128, |acc, l| acc.saturating_mul(arch.widths[l] as u128 + 1)),
    }
}

/// `(sup f0 - inf f0) / (2 piece_bound)`: no network of the architecture
/// approximates `f0` uniformly better along a segment covering its range.
pub fn approx_lower_bound(range: (f64, f64), arch: &Architecture) -> Result<f64> {
    let (lo, hi) = range;
    if !(hi >= lo) {
        return invalid(format!("range ({lo}, {hi}) has sup < inf"));
    }
    Ok((hi - lo) / (2.0 * piece_bound(arch) as f64))
}

/// Result of a VC formula that only holds under a width condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VcUpper {
    Value { value: f64 },
    PreconditionUnmet { reason: String },
}

impl VcUpper {
    pub fn value(&self) -> Option<f64> {
        match self {
            VcUpper::Value { value } => Some(*value),
            VcUpper::PreconditionUnmet { .. } => None,
        }
    }
}

/// Upper bound on the VC dimension of a rectangular architecture
/// (all hidden widths `p`), binary logarithm:
/// skip `30 L p^2 log(Lp)`, lin `30 max(L^2 p s, L p^2) log(Lp)`.
///
/// Requires `p >= max(d, s, 2)`. Plain networks are only bounded up to an
/// unspecified constant and are reported as unmet.
pub fn vc_upper_bound(arch: &Architecture) -> VcUpper {
    let unmet = |reason: String| VcUpper::PreconditionUnmet { reason };
    let l = arch.depth();
    if l == 0 {
        return unmet("no hidden layers".into());
    }
    let hidden = &arch.widths[1..=l];
    let p = hidden[0];
    if hidden.iter().any(|&w| w != p) {
        return unmet(format!("hidden widths {hidden:?} are not rectangular"));
    }
    let d = arch.input_dim();
    let s = match &arch.kind {
        NetworkKind::Plain => {
            return unmet("the plain bound carries no explicit constant".into());
        }
        NetworkKind::Skip { skip_counts } => skip_counts.iter().copied().max().unwrap_or(0),
        NetworkKind::Lin { lin_count } => *lin_count,
    };
    let need = d.max(s).max(2);
    if p < need {
        return unmet(format!("p = {p} < max(d, s, 2) = {need}"));
    }
    let (lf, pf, sf) = (l as f64, p as f64, s as f64);
    let log = (lf * pf).log2();
    let value = match arch.kind.tag() {
        KindTag::Skip => 30.0 * lf * pf * pf * log,
        _ => 30.0 * (lf * lf * pf * sf).max(lf * pf * pf) * log,
    };
    VcUpper::Value { value }
}

/// Rectangular architecture with `L` hidden layers of width `p`, input
/// dimension `d`, scalar output; `s` is the skip budget of layers `2..L`
/// or the lin neuron count.
pub fn rect_arch(kind: KindTag, d: usize, l: usize, p: usize, s: usize) -> Result<Architecture> {
    if l == 0 || p == 0 || d == 0 {
        return invalid("d, L and p must be positive");
    }
    let mut widths = vec![d];
    widths.extend(std::iter::repeat(p).take(l));
    widths.push(1);
    let kind = match kind {
        KindTag::Plain => NetworkKind::Plain,
        KindTag::Skip => NetworkKind::Skip {
            skip_counts: vec![s.min(p); l - 1],
        },
        KindTag::Lin => NetworkKind::Lin { lin_count: s },
    };
    Ok(Architecture::new(kind, widths))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: KindTag,
    pub depth: usize,
    pub widths: Vec<usize>,
    pub piece_bound: u128,
    pub vc_upper: VcUpper,
    pub approx_lower: Option<f64>,
}

/// Every closed form for `arch`; the approximation bound needs a range.
pub fn bound_report(arch: &Architecture, range: Option<(f64, f64)>) -> Result<BoundReport> {
    Ok(BoundReport {
        kind: arch.kind.tag(),
        depth: arch.depth(),
        widths: arch.widths.clone(),
        piece_bound: piece_bound(arch),
        vc_upper: vc_upper_bound(arch),
        approx_lower: range.map(|r| approx_lower_bound(r, arch)).transpose()?,
    })
}
