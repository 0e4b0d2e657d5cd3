//! Shattering certificates: build the shattering network for labelings of
//! the construction's point set and check every point exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builders::{shatter_budget, shattering_net, shattering_points, Geometry};
use crate::error::{Error, Result};
use crate::net::KindTag;

/// Largest point set enumerated exhaustively (`2^20` labelings).
pub const MAX_EXHAUSTIVE_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterCertificate {
    pub kind: KindTag,
    pub geometry: Geometry,
    pub points: Vec<f64>,
    /// All `2^|points|` labelings were tried.
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub labelings_tried: u64,
    pub realized: u64,
    /// Labelings (as bit strings, point 1 first) that were not reproduced.
    pub failures: Vec<String>,
    /// Largest depth and hidden width over the emitted networks.
    pub max_depth: usize,
    pub max_width: usize,
    pub depth_budget: usize,
    pub width_budget: usize,
    /// `|points|` when the enumeration was exhaustive and every labeling passed.
    pub implied_vc_lower: Option<usize>,
}

impl ShatterCertificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.realized == self.labelings_tried
    }

    pub fn within_budget(&self) -> bool {
        self.max_depth <= self.depth_budget && self.max_width <= self.width_budget
    }
}

struct Outcome {
    ok: bool,
    depth: usize,
    width: usize,
}

fn check_labeling(g: &Geometry, points: &[f64], labels: &[u8]) -> Result<Outcome> {
    let b = shattering_net(g, labels)?;
    let mut ok = true;
    for (x, &l) in points.iter().zip(labels) {
        if b.net.eval(&[*x])?[0] != f64::from(l) {
            ok = false;
            break;
        }
    }
    let a = b.net.arch();
    let width = (1..=a.depth()).map(|l| a.layer_width(l)).max().unwrap_or(0);
    Ok(Outcome { ok, depth: a.depth(), width })
}

fn run(kind: KindTag, g: &Geometry, labelings: Vec<Vec<u8>>, exhaustive: bool, seed: Option<u64>) -> Result<ShatterCertificate> {
    let points = shattering_points(g)?;
    let outcomes: Vec<Outcome> = labelings
        .par_iter()
        .map(|l| check_labeling(g, &points, l))
        .collect::<Result<_>>()?;
    let failures: Vec<String> = labelings
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| !o.ok)
        .map(|(l, _)| l.iter().map(|b| char::from(b'0' + b)).collect())
        .collect();
    let realized = outcomes.iter().filter(|o| o.ok).count() as u64;
    let (depth_budget, width_budget) = shatter_budget(g);
    let passed = failures.is_empty();
    Ok(ShatterCertificate {
        kind,
        geometry: *g,
        exhaustive,
        seed,
        labelings_tried: labelings.len() as u64,
        realized,
        failures,
        max_depth: outcomes.iter().map(|o| o.depth).max().unwrap_or(0),
        max_width: outcomes.iter().map(|o| o.width).max().unwrap_or(0),
        depth_budget,
        width_budget,
        implied_vc_lower: (exhaustive && passed).then_some(points.len()),
        points,
    })
}

fn geometry_for(kind: KindTag, m: usize, n: usize, t: usize) -> Result<Geometry> {
    match kind {
        KindTag::Skip => Geometry::skip(1, m, n),
        KindTag::Lin => Geometry::lin(1, m, n, t),
        KindTag::Plain => Err(Error::InvalidInput("shattering networks are skip or lin".into())),
    }
}

/// Tries every labeling of the point set of the one-dimensional geometry
/// `(m, n, t)`; `t` is ignored for skip networks.
pub fn shatter_verify(kind: KindTag, m: usize, n: usize, t: usize) -> Result<ShatterCertificate> {
    let g = geometry_for(kind, m, n, t)?;
    let q = g.digits();
    if q > 0 && (1usize << q) > MAX_EXHAUSTIVE_POINTS {
        return Err(Error::Resource(format!(
            "{} points need 2^{} labelings; at most {MAX_EXHAUSTIVE_POINTS} points are enumerated",
            1usize << q,
            1usize << q
        )));
    }
    let size = 1usize << q;
    let labelings = (0..1u64 << size)
        .map(|v| (0..size).map(|i| ((v >> i) & 1) as u8).collect())
        .collect();
    run(kind, &g, labelings, true, None)
}

/// Like [`shatter_verify`] for point sets too large to enumerate: the all-zero
/// and all-one labelings, every one-hot and one-cold labeling, and `samples`
/// uniform random ones drawn from `seed`.
pub fn shatter_verify_sampled(
    kind: KindTag,
    m: usize,
    n: usize,
    t: usize,
    samples: usize,
    seed: u64,
) -> Result<ShatterCertificate> {
    let g = geometry_for(kind, m, n, t)?;
    let size = shattering_points(&g)?.len();
    let mut labelings: Vec<Vec<u8>> = vec![vec![0; size], vec![1; size]];
    for i in 0..size {
        let mut hot = vec![0; size];
        hot[i] = 1;
        labelings.push(hot.iter().map(|b| 1 - b).collect());
        labelings.push(hot);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    labelings.extend((0..samples).map(|_| (0..size).map(|_| rng.gen_range(0..=1u8)).collect()));
    run(kind, &g, labelings, false, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_point() {
        let c = shatter_verify(KindTag::Skip, 0, 0, 0).unwrap();
        assert_eq!(c.labelings_tried, 2);
        assert!(c.passed());
        assert_eq!(c.implied_vc_lower, Some(1));
    }

    #[test]
    fn too_many_points() {
        assert!(matches!(shatter_verify(KindTag::Skip, 2, 1, 0), Err(Error::Resource(_))));
        let c = shatter_verify_sampled(KindTag::Skip, 2, 1, 0, 50, 7).unwrap();
        assert!(c.passed());
        assert_eq!(c.implied_vc_lower, None);
        assert!(c.within_budget());
    }
}
