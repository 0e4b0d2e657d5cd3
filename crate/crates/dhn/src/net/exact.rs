//! Exact sign of a floating-point dot product.
//!
//! A Heaviside neuron fires iff its real pre-activation `sum w_i v_i - b` is
//! nonnegative. The rounded sum decides this directly unless it lies inside
//! the a-priori error bound of recursive summation, in which case the terms
//! are split into exact product pairs (via fused multiply-add) and summed as a
//! nonoverlapping expansion.

use std::cmp::Ordering;

/// Rounded pre-activation together with the sum of absolute term values.
pub(crate) struct Accum {
    pub value: f64,
    pub abs: f64,
    pub terms: usize,
}

impl Accum {
    /// True when the rounded value alone certifies the sign of the exact sum.
    #[inline]
    pub fn certain(&self) -> bool {
        let bound = 2.0 * (self.terms as f64 + 2.0) * f64::EPSILON * self.abs;
        self.value.abs() > bound
    }
}

/// Sign of `sum(w * v) - shift`, computed exactly.
pub(crate) fn exact_sign<I>(products: I, shift: f64) -> Ordering
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut parts: Vec<f64> = Vec::new();
    for (w, v) in products {
        let p = w * v;
        let e = w.mul_add(v, -p);
        grow(&mut parts, p);
        if e != 0.0 {
            grow(&mut parts, e);
        }
    }
    grow(&mut parts, -shift);
    for &x in parts.iter().rev() {
        if x > 0.0 {
            return Ordering::Greater;
        }
        if x < 0.0 {
            return Ordering::Less;
        }
    }
    Ordering::Equal
}

/// Adds `x` to a nonoverlapping expansion kept in increasing magnitude.
fn grow(parts: &mut Vec<f64>, mut x: f64) {
    let mut k = 0;
    for i in 0..parts.len() {
        let mut y = parts[i];
        if x.abs() < y.abs() {
            std::mem::swap(&mut x, &mut y);
        }
        let hi = x + y;
        let lo = y - (hi - x);
        if lo != 0.0 {
            parts[k] = lo;
            k += 1;
        }
        x = hi;
    }
    parts.truncate(k);
    parts.push(x);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign(terms: &[(f64, f64)], b: f64) -> Ordering {
        exact_sign(terms.iter().copied(), b)
    }

    #[test]
    fn detects_rounding_hidden_sign() {
        // 3 * fl(1/3) is 1 - 2^-54 exactly, which rounds to 1.0.
        let third = 1.0 / 3.0;
        assert_eq!(3.0 * third, 1.0);
        assert_eq!(sign(&[(3.0, third)], 1.0), Ordering::Less);
        assert_eq!(sign(&[(3.0, third)], 1.0 - f64::EPSILON), Ordering::Greater);
    }

    #[test]
    fn exact_zero_and_cancellation() {
        assert_eq!(sign(&[(0.1, 1.0), (-0.1, 1.0)], 0.0), Ordering::Equal);
        assert_eq!(sign(&[(1e300, 1.0), (1.0, 1.0), (-1e300, 1.0)], 1.0), Ordering::Equal);
        assert_eq!(sign(&[(1e300, 1.0), (1.0, 1.0), (-1e300, 1.0)], 0.5), Ordering::Greater);
        assert_eq!(sign(&[], 0.0), Ordering::Equal);
        assert_eq!(sign(&[], -1.0), Ordering::Greater);
    }

    #[test]
    fn tiny_residual_survives() {
        let a = 0.1f64;
        let b = 0.7f64;
        // a*b is not representable; the residual of the product decides.
        let p = a * b;
        let e = a.mul_add(b, -p);
        assert_ne!(e, 0.0);
        let expect = if e > 0.0 { Ordering::Greater } else { Ordering::Less };
        assert_eq!(sign(&[(a, b)], p), expect);
    }
}
