//! Random networks and segments shared by the integration tests.

#![allow(dead_code)]

use dhn::net::{Architecture, KindTag, LayerParams, Matrix, Network, NetworkKind};
use rand::seq::index::sample;
use rand::Rng;

/// Shape limits for [`random_network`].
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_depth: usize,
    pub max_width: usize,
    pub max_dim: usize,
    pub weight: f64,
}

pub const SMALL: Limits = Limits {
    max_depth: 5,
    max_width: 8,
    max_dim: 3,
    weight: 2.0,
};

fn dense<R: Rng>(rng: &mut R, rows: usize, cols: usize, w: f64) -> Matrix {
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-w..=w)).collect())
        .collect();
    Matrix::from_dense(cols, &data).expect("shape is consistent")
}

/// A valid network of the given family with uniform weights in
/// `[-weight, weight]`. Lin networks get 1 to 3 identity neurons, skip layers
/// a random budget with that many random nonzero rows in `V`.
pub fn random_network<R: Rng>(rng: &mut R, kind: KindTag, lim: Limits) -> Network {
    let d = rng.gen_range(1..=lim.max_dim);
    let l = rng.gen_range(1..=lim.max_depth);
    let mut widths = vec![d];
    widths.extend((0..l).map(|_| rng.gen_range(1..=lim.max_width)));
    widths.push(1);
    let arch_kind = match kind {
        KindTag::Plain => NetworkKind::Plain,
        KindTag::Skip => NetworkKind::Skip {
            skip_counts: (2..=l).map(|i| rng.gen_range(0..=widths[i])).collect(),
        },
        KindTag::Lin => NetworkKind::Lin {
            lin_count: rng.gen_range(1..=3),
        },
    };
    let arch = Architecture::new(arch_kind, widths.clone());
    let w = lim.weight;
    let mut layers = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let rows = arch.layer_width(i + 1);
        let cols = arch.layer_width(i);
        let v = if kind == KindTag::Skip && i >= 1 && i < l {
            let s = arch.skip_budget(i + 1);
            let mut rows_v = vec![Vec::new(); widths[i + 1]];
            for r in sample(rng, widths[i + 1], s) {
                rows_v[r] = (0..d).map(|c| (c, rng.gen_range(-w..=w))).collect();
            }
            Some(Matrix::from_sparse_rows(d, rows_v).expect("shape is consistent"))
        } else {
            None
        };
        layers.push(LayerParams {
            w: dense(rng, rows, cols, w),
            b: (0..rows).map(|_| rng.gen_range(-w..=w)).collect(),
            v,
        });
    }
    Network::new(arch, layers).expect("random network is valid")
}

pub fn random_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect()
}
