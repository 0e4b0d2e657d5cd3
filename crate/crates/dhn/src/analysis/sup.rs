//! Sup-norm error on tensor grids.

use rayon::prelude::*;
use serde::Serialize;

use crate::builders::Domain;
use crate::error::{invalid, Result};
use crate::net::Network;

/// Points per axis when none are requested: `10^5` in one dimension, and
/// at most `4 * 10^6` points in total.
pub fn default_per_axis(d: usize) -> usize {
    let d = d.max(1) as u32;
    let mut n = (4e6f64).powf(1.0 / f64::from(d)) as usize + 1;
    while (n as u128).pow(d) > 4_000_000 {
        n -= 1;
    }
    n.min(100_000)
}

/// Tensor grid on a [`Domain`]: `per_axis` uniform points per coordinate
/// (endpoints included) merged with `axis_points` on every axis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    pub per_axis: Option<usize>,
    pub axis_points: Vec<f64>,
}

impl GridSpec {
    pub fn uniform(per_axis: usize) -> Self {
        GridSpec {
            per_axis: Some(per_axis),
            axis_points: Vec::new(),
        }
    }

    pub fn with_points(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.axis_points.extend(points);
        self
    }

    /// Sorted, deduplicated coordinates of one axis.
    pub fn axis(&self, domain: &Domain) -> Vec<f64> {
        let n = self.per_axis.unwrap_or_else(|| default_per_axis(domain.dim));
        let mut v: Vec<f64> = match n {
            0 => Vec::new(),
            1 => vec![domain.lo],
            _ => (0..n)
                .map(|i| domain.lo + (domain.hi - domain.lo) * (i as f64 / (n - 1) as f64))
                .collect(),
        };
        v.extend(self.axis_points.iter().filter(|x| (domain.lo..=domain.hi).contains(*x)));
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupError {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub points: usize,
}

/// `max |net(x) - f0(x)|` over the grid; ties go to the lowest grid index
/// (last coordinate varying fastest).
pub fn sup_error<F>(net: &Network, f0: F, domain: &Domain, grid: &GridSpec) -> Result<SupError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if net.input_dim() != domain.dim {
        return invalid(format!(
            "domain has dimension {}, network expects {}",
            domain.dim,
            net.input_dim()
        ));
    }
    if net.output_dim() != 1 {
        return invalid("sup error needs a scalar network");
    }
    let axis = grid.axis(domain);
    let d = domain.dim;
    let total = axis
        .len()
        .checked_pow(d as u32)
        .filter(|&t| t > 0)
        .ok_or_else(|| crate::Error::InvalidInput("empty or oversized grid".into()))?;
    let point = |mut idx: usize| {
        let mut x = vec![0.0; d];
        for c in (0..d).rev() {
            x[c] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        x
    };
    let best = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = point(i);
            let y = net.eval(&x)?[0];
            Ok::<_, crate::Error>((i, (y - f0(&x)).abs()))
        })
        .try_reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| Ok(if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a }),
        )?;
    Ok(SupError {
        value: best.1,
        argmax: point(best.0),
        points: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::square_approximator;

    #[test]
    fn square_at_one() {
        let b = square_approximator(2, 1, &[0]).unwrap();
        let grid = GridSpec::uniform(100_001).with_points([0.5]);
        let e = sup_error(&b.net, |x| x[0] * x[0], &Domain::unit(1), &grid).unwrap();
        assert_eq!(e.value, 0.4375);
        assert_eq!(e.argmax, vec![1.0]);
    }

    #[test]
    fn exact_match_and_empty() {
        let b = square_approximator(2, 1, &[0]).unwrap();
        let e = sup_error(&b.net, |x| b.net.eval(x).unwrap()[0], &Domain::unit(1), &GridSpec::uniform(11)).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.argmax, vec![0.0]);
        assert!(sup_error(&b.net, |_| 0.0, &Domain::unit(1), &GridSpec::uniform(0)).is_err());
    }

    #[test]
    fn default_sizes() {
        assert_eq!(default_per_axis(1), 100_000);
        assert_eq!(default_per_axis(2), 2000);
        assert_eq!(default_per_axis(3), 158);
    }
}
