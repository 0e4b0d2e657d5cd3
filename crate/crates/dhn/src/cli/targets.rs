//! Built-in smooth targets with their derivatives and norm bounds.

use std::sync::Arc;

use clap::ValueEnum;

use crate::builders::HolderConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HolderTarget {
    /// `x^2` on [0, 1], beta = 2.
    Square,
    /// `x1 x2` on [0, 1]^2, beta = 2.
    Product,
    /// `x^3 - x` on [0, 1], beta = 3.
    Cubic,
}

impl HolderTarget {
    pub fn name(self) -> &'static str {
        match self {
            HolderTarget::Square => "square",
            HolderTarget::Product => "product",
            HolderTarget::Cubic => "cubic",
        }
    }

    pub fn value(self, x: &[f64]) -> f64 {
        derivative(self, &[0; 2][..self.dim()], x)
    }

    pub fn dim(self) -> usize {
        match self {
            HolderTarget::Product => 2,
            _ => 1,
        }
    }

    /// Approximator settings; `t` only matters for lin networks.
    pub fn config(self, m: usize, n: usize, t: usize) -> HolderConfig {
        let (beta, bounds, holder_norm) = match self {
            HolderTarget::Square => (2.0, vec![1.0, 2.0], 5.0),
            HolderTarget::Product => (2.0, vec![1.0, 1.0, 1.0], 5.0),
            HolderTarget::Cubic => (3.0, vec![1.0, 2.0, 6.0], 15.0),
        };
        HolderConfig {
            beta,
            d: self.dim(),
            m,
            n,
            t,
            bounds,
            holder_norm,
            derivative: Arc::new(move |a: &[usize], x: &[f64]| derivative(self, a, x)),
        }
    }
}

fn derivative(target: HolderTarget, a: &[usize], x: &[f64]) -> f64 {
    match target {
        HolderTarget::Square => match a[0] {
            0 => x[0] * x[0],
            1 => 2.0 * x[0],
            2 => 2.0,
            _ => 0.0,
        },
        HolderTarget::Product => match (a[0], a[1]) {
            (0, 0) => x[0] * x[1],
            (1, 0) => x[1],
            (0, 1) => x[0],
            (1, 1) => 1.0,
            _ => 0.0,
        },
        HolderTarget::Cubic => match a[0] {
            0 => x[0].powi(3) - x[0],
            1 => 3.0 * x[0] * x[0] - 1.0,
            2 => 6.0 * x[0],
            3 => 6.0,
            _ => 0.0,
        },
    }
}
