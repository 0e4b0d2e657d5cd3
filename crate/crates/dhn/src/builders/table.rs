//! Dyadic cell geometry and binary payload tables for the decoders.
//!
//! Each coordinate of `x in [0,1]^d` contributes its first `Q` binary digits.
//! The digit positions split into three groups selecting the indices
//! `j`, `k` and `r`:
//!
//! | family | `Q`          | `j` digits      | `k` digits            | `r` digits                |
//! |--------|--------------|-----------------|-----------------------|---------------------------|
//! | skip   | `2m + n`     | `1..=m`         | `m+1..=2m`            | `2m+1..=2m+n`             |
//! | lin    | `m + n + 2t` | `1..=m+t`       | `m+t+1..=m+t+n`       | `m+t+n+1..=m+n+2t`        |
//!
//! An index is one plus the binary number formed by its group's digits taken
//! coordinate-major (all digits of `x_1`, then `x_2`, ...), most significant
//! first. Decoder inputs use the same coordinate-major bit order.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::analysis::binary_digits;
use crate::error::{invalid, Error, Result};
use crate::net::KindTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub kind: KindTag,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub t: usize,
}

/// Largest supported index space `J K R`.
const MAX_BITS: usize = 24;

impl Geometry {
    pub fn skip(d: usize, m: usize, n: usize) -> Result<Self> {
        Geometry {
            kind: KindTag::Skip,
            d,
            m,
            n,
            t: 0,
        }
        .checked()
    }

    pub fn lin(d: usize, m: usize, n: usize, t: usize) -> Result<Self> {
        Geometry {
            kind: KindTag::Lin,
            d,
            m,
            n,
            t,
        }
        .checked()
    }

    pub fn checked(self) -> Result<Self> {
        if self.d == 0 {
            return invalid("geometry needs d >= 1");
        }
        match self.kind {
            KindTag::Skip if self.t != 0 => return invalid("skip geometry has no t parameter"),
            KindTag::Plain => return invalid("geometry kind must be skip or lin"),
            _ => {}
        }
        if self.d * self.digits() > MAX_BITS {
            return Err(Error::Resource(format!(
                "{} cell bits exceed the supported {MAX_BITS}",
                self.d * self.digits()
            )));
        }
        Ok(self)
    }

    /// Binary digits used per coordinate.
    pub fn digits(&self) -> usize {
        match self.kind {
            KindTag::Lin => self.m + self.n + 2 * self.t,
            _ => 2 * self.m + self.n,
        }
    }

    pub fn bit_count(&self) -> usize {
        self.d * self.digits()
    }

    pub fn j_digits(&self) -> RangeInclusive<usize> {
        match self.kind {
            KindTag::Lin => 1..=self.m + self.t,
            _ => 1..=self.m,
        }
    }

    pub fn k_digits(&self) -> RangeInclusive<usize> {
        match self.kind {
            KindTag::Lin => self.m + self.t + 1..=self.m + self.t + self.n,
            _ => self.m + 1..=2 * self.m,
        }
    }

    pub fn r_digits(&self) -> RangeInclusive<usize> {
        match self.kind {
            KindTag::Lin => self.m + self.t + self.n + 1..=self.digits(),
            _ => 2 * self.m + 1..=self.digits(),
        }
    }

    /// `(J, K, R)`.
    pub fn sizes(&self) -> (usize, usize, usize) {
        let size = |r: RangeInclusive<usize>| 1usize << (self.d * r.count());
        (size(self.j_digits()), size(self.k_digits()), size(self.r_digits()))
    }

    /// `(coordinate, digit)` pairs of a group, coordinate-major.
    pub fn positions(&self, group: RangeInclusive<usize>) -> Vec<(usize, usize)> {
        (0..self.d)
            .flat_map(|i| group.clone().map(move |l| (i, l)))
            .collect()
    }

    /// Offset of bit `(i, l)` in a decoder input vector.
    pub fn bit_offset(&self, i: usize, l: usize) -> usize {
        i * self.digits() + l - 1
    }

    fn group_index(&self, bits: &[u8], group: RangeInclusive<usize>) -> usize {
        1 + self
            .positions(group)
            .iter()
            .fold(0, |acc, &(i, l)| 2 * acc + bits[self.bit_offset(i, l)] as usize)
    }

    fn set_group(&self, bits: &mut [u8], group: RangeInclusive<usize>, index: usize) {
        let pos = self.positions(group);
        let v = index - 1;
        for (k, &(i, l)) in pos.iter().enumerate() {
            bits[self.bit_offset(i, l)] = ((v >> (pos.len() - 1 - k)) & 1) as u8;
        }
    }

    /// `(j, k, r)` from a coordinate-major bit vector.
    pub fn cell_of_bits(&self, bits: &[u8]) -> (usize, usize, usize) {
        (
            self.group_index(bits, self.j_digits()),
            self.group_index(bits, self.k_digits()),
            self.group_index(bits, self.r_digits()),
        )
    }

    /// Inverse of [`Geometry::cell_of_bits`]; indices are 1-based.
    pub fn bits_of_cell(&self, j: usize, k: usize, r: usize) -> Vec<u8> {
        let mut bits = vec![0; self.bit_count()];
        self.set_group(&mut bits, self.j_digits(), j);
        self.set_group(&mut bits, self.k_digits(), k);
        self.set_group(&mut bits, self.r_digits(), r);
        bits
    }

    /// Floor-recursion digits of every coordinate, coordinate-major.
    pub fn bits_of_point(&self, x: &[f64]) -> Result<Vec<u8>> {
        if x.len() != self.d {
            return invalid(format!("point has {} coordinates, geometry has {}", x.len(), self.d));
        }
        let mut out = Vec::with_capacity(self.bit_count());
        for &xi in x {
            out.extend(binary_digits(xi, self.digits())?);
        }
        Ok(out)
    }

    pub fn cell_of_point(&self, x: &[f64]) -> Result<(usize, usize, usize)> {
        Ok(self.cell_of_bits(&self.bits_of_point(x)?))
    }

    /// Center of the dyadic cube of side `2^-Q` with the given bits.
    pub fn center_of_bits(&self, bits: &[u8]) -> Vec<f64> {
        let q = self.digits();
        (0..self.d)
            .map(|i| {
                let v = (1..=q).fold(0u64, |acc, l| 2 * acc + bits[self.bit_offset(i, l)] as u64);
                (2 * v + 1) as f64 / (1u64 << (q + 1)) as f64
            })
            .collect()
    }
}

/// Binary values `eta_{j,k,r}` stored at `((j-1) K + (k-1)) R + (r-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitTable {
    pub geometry: Geometry,
    pub payload: Vec<u8>,
}

impl BitTable {
    pub fn new(geometry: Geometry, payload: Vec<u8>) -> Result<Self> {
        let geometry = geometry.checked()?;
        let (j, k, r) = geometry.sizes();
        if payload.len() != j * k * r {
            return invalid(format!(
                "payload has {} entries, geometry needs J K R = {j} * {k} * {r} = {}",
                payload.len(),
                j * k * r
            ));
        }
        if payload.iter().any(|&v| v > 1) {
            return invalid("payload entries must be 0 or 1");
        }
        Ok(BitTable { geometry, payload })
    }

    /// Table with `eta = f(j, k, r)`.
    pub fn from_fn(geometry: Geometry, f: impl Fn(usize, usize, usize) -> u8) -> Result<Self> {
        let geometry = geometry.checked()?;
        let (jn, kn, rn) = geometry.sizes();
        let mut payload = Vec::with_capacity(jn * kn * rn);
        for j in 1..=jn {
            for k in 1..=kn {
                for r in 1..=rn {
                    payload.push(f(j, k, r));
                }
            }
        }
        BitTable::new(geometry, payload)
    }

    pub fn get(&self, j: usize, k: usize, r: usize) -> u8 {
        let (_, kn, rn) = self.geometry.sizes();
        self.payload[((j - 1) * kn + (k - 1)) * rn + (r - 1)]
    }

    /// Value at the cell containing the given decoder input bits.
    pub fn lookup_bits(&self, bits: &[u8]) -> u8 {
        let (j, k, r) = self.geometry.cell_of_bits(bits);
        self.get(j, k, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = Geometry::skip(2, 1, 1).unwrap();
        assert_eq!(g.sizes(), (4, 4, 4));
        for j in 1..=4 {
            for k in 1..=4 {
                for r in 1..=4 {
                    let bits = g.bits_of_cell(j, k, r);
                    assert_eq!(g.cell_of_bits(&bits), (j, k, r));
                    let c = g.center_of_bits(&bits);
                    assert_eq!(g.cell_of_point(&c).unwrap(), (j, k, r));
                }
            }
        }
    }

    #[test]
    fn skip_one_dimensional_cells() {
        let g = Geometry::skip(1, 1, 1).unwrap();
        assert_eq!(g.cell_of_point(&[0.1]).unwrap(), (1, 1, 1));
        assert_eq!(g.cell_of_point(&[0.6]).unwrap(), (2, 1, 1));
        assert_eq!(g.cell_of_point(&[0.3]).unwrap(), (1, 2, 1));
        assert_eq!(g.cell_of_point(&[0.2]).unwrap(), (1, 1, 2));
    }

    #[test]
    fn lin_groups() {
        let g = Geometry::lin(1, 1, 1, 1).unwrap();
        assert_eq!(g.digits(), 4);
        assert_eq!(g.sizes(), (4, 2, 2));
        assert_eq!(g.r_digits(), 4..=4);
        assert!(Geometry::skip(1, 20, 20).is_err());
        assert!(BitTable::new(g, vec![0; 15]).is_err());
    }
}
