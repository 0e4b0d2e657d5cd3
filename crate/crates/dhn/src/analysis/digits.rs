//! Mixed-radix digits by the floor recursion, computed exactly.
//!
//! With `S_l = d_1 ... d_l`, the recursion gives `b_l = F_l - d_l F_{l-1}`
//! where `F_l = floor(S_l x)`. A double `x` in `[0, 1)` is `M 2^-E` with `M < 2^53`,
//! so `S_l M < 2^105` and `F_l` is an exact integer shift.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitVector {
    pub radix: Vec<usize>,
    pub digits: Vec<usize>,
}

impl DigitVector {
    /// `sum_l b_l / S_l`, rounded once from the exact fraction `F_L / S_L`.
    pub fn truncation(&self) -> f64 {
        let mut f: u64 = 0;
        let mut s: u64 = 1;
        for (&d, &b) in self.radix.iter().zip(&self.digits) {
            f = f * d as u64 + b as u64;
            s *= d as u64;
        }
        f as f64 / s as f64
    }
}

fn check_radix(radix: &[usize]) -> Result<()> {
    let mut s: u64 = 1;
    for &d in radix {
        if d < 1 {
            return invalid("radix entries must be positive");
        }
        s = s
            .checked_mul(d as u64)
            .filter(|v| *v <= 1 << 52)
            .ok_or_else(|| Error::Precision("radix product exceeds 2^52".into()))?;
    }
    Ok(())
}

/// Digits of `x in [0, 1]`; `x = 1` yields all `d_l - 1`.
pub fn mixed_radix_digits(x: f64, radix: &[usize]) -> Result<DigitVector> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("x = {x} outside [0, 1]"));
    }
    check_radix(radix)?;
    let digits = if x == 1.0 {
        radix.iter().map(|d| d - 1).collect()
    } else {
        let (mant, exp) = decompose(x);
        let mut prev: u128 = 0;
        let mut s: u128 = 1;
        let mut out = Vec::with_capacity(radix.len());
        for &d in radix {
            s *= d as u128;
            let f = if exp >= 128 { 0 } else { (s * mant) >> exp };
            out.push((f - d as u128 * prev) as usize);
            prev = f;
        }
        out
    };
    Ok(DigitVector {
        radix: radix.to_vec(),
        digits,
    })
}

/// Binary digits `b_1 .. b_count` of `x in [0, 1]`.
pub fn binary_digits(x: f64, count: usize) -> Result<Vec<u8>> {
    let v = mixed_radix_digits(x, &vec![2; count])?;
    Ok(v.digits.into_iter().map(|b| b as u8).collect())
}

/// `x = mant * 2^-exp`; zero maps to `(0, 0)`.
fn decompose(x: f64) -> (u128, u32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e2) = if e == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1u64 << 52), e - 1075)
    };
    (mant as u128, (-e2) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert_eq!(mixed_radix_digits(0.25, &[10, 10]).unwrap().digits, vec![2, 5]);
        assert_eq!(mixed_radix_digits(0.0, &[2, 2, 2]).unwrap().digits, vec![0, 0, 0]);
        assert_eq!(mixed_radix_digits(1.0, &[2, 3]).unwrap().digits, vec![1, 2]);
        assert_eq!(mixed_radix_digits(0.5, &[3]).unwrap().digits, vec![1]);
        assert_eq!(binary_digits(0.625, 3).unwrap(), vec![1, 0, 1]);
        assert!(mixed_radix_digits(1.5, &[2]).is_err());
        assert!(mixed_radix_digits(0.5, &[1 << 30, 1 << 30]).is_err());
    }

    #[test]
    fn thirds_are_exact() {
        // fl(1/3) < 1/3, so its first base-3 digit is 0 followed by 2s.
        let v = mixed_radix_digits(1.0 / 3.0, &[3, 3, 3]).unwrap();
        assert_eq!(v.digits, vec![0, 2, 2]);
        let v = mixed_radix_digits(2.0 / 3.0, &[3]).unwrap();
        assert_eq!(v.digits, vec![if 3.0f64.mul_add(2.0 / 3.0, -2.0) >= 0.0 { 2 } else { 1 }]);
    }

    #[test]
    fn subnormal_and_tiny() {
        let v = mixed_radix_digits(f64::MIN_POSITIVE / 4.0, &[1 << 26, 1 << 26]).unwrap();
        assert_eq!(v.digits, vec![0, 0]);
        assert_eq!(v.truncation(), 0.0);
    }
}
