//! Truncated Taylor polynomials through a derivative oracle.

use crate::builders::multi_indices;
use crate::builders::DerivativeOracle;
use crate::error::{invalid, Result};

/// `sum_{|alpha| < beta} d^alpha f0(x0) (x - x0)^alpha / alpha!`.
pub fn taylor_reference(derivative: &DerivativeOracle, beta: f64, x0: &[f64], x: &[f64]) -> Result<f64> {
    if x0.len() != x.len() {
        return invalid(format!("x0 has {} coordinates, x has {}", x0.len(), x.len()));
    }
    let mut sum = 0.0;
    for alpha in multi_indices(x.len(), beta) {
        let mut term = derivative(&alpha, x0);
        for (i, &a) in alpha.iter().enumerate() {
            term *= (x[i] - x0[i]).powi(a as i32);
        }
        sum += term / crate::builders::factorial(&alpha);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn square() -> DerivativeOracle {
        Arc::new(|a: &[usize], x: &[f64]| match a[0] {
            0 => x[0] * x[0],
            1 => 2.0 * x[0],
            2 => 2.0,
            _ => 0.0,
        })
    }

    #[test]
    fn square_first_order() {
        let t = taylor_reference(&square(), 2.0, &[0.5], &[0.6]).unwrap();
        assert!((t - 0.35).abs() < 1e-15);
        assert!((0.36 - t).abs() <= 5.0 * 0.1 * 0.1);
        assert_eq!(taylor_reference(&square(), 2.0, &[0.5], &[0.5]).unwrap(), 0.25);
        let full = taylor_reference(&square(), 3.0, &[0.5], &[0.6]).unwrap();
        assert!((full - 0.36).abs() < 1e-15);
    }

    #[test]
    fn linear_is_exact() {
        let f: DerivativeOracle = Arc::new(|a: &[usize], x: &[f64]| match (a[0], a[1]) {
            (0, 0) => 2.0 * x[0] - x[1] + 0.5,
            (1, 0) => 2.0,
            (0, 1) => -1.0,
            _ => 0.0,
        });
        let t = taylor_reference(&f, 2.0, &[0.25, 0.5], &[0.75, 0.125]).unwrap();
        assert_eq!(t, 2.0 * 0.75 - 0.125 + 0.5);
    }
}
