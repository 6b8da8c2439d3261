//! Short packed binary strings used by the exact enumerations.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest string a [`BitString`] can hold.
pub const MAX_BITS: usize = 32;

/// Binary string of length at most 32; symbol `i` lives in bit `i`.
///
/// Ordering is by `(length, pattern)`, which is the canonical output key of
/// every finite law in this crate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: u8,
    bits: u32,
}

impl BitString {
    pub const EMPTY: BitString = BitString { len: 0, bits: 0 };

    pub fn new(len: usize, bits: u32) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::InvalidBitString(format!("length {len} exceeds {MAX_BITS}")));
        }
        if len < 32 && bits >> len != 0 {
            return Err(Error::InvalidBitString(format!(
                "pattern {bits:#b} does not fit in {len} symbols"
            )));
        }
        Ok(Self { len: len as u8, bits })
    }

    /// Unchecked variant for internal enumeration loops.
    #[inline]
    pub(crate) fn raw(len: usize, bits: u32) -> Self {
        debug_assert!(len <= MAX_BITS);
        Self { len: len as u8, bits }
    }

    pub fn from_symbols(symbols: &[u8]) -> Result<Self> {
        if symbols.len() > MAX_BITS {
            return Err(Error::InvalidBitString(format!("length {} exceeds {MAX_BITS}", symbols.len())));
        }
        let mut bits = 0u32;
        for (i, &b) in symbols.iter().enumerate() {
            match b {
                0 => {}
                1 => bits |= 1 << i,
                other => return Err(Error::InvalidBitString(format!("symbol {other} is not binary"))),
            }
        }
        Ok(Self::raw(symbols.len(), bits))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn symbols(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Keeps the symbols at the set positions of `mask`, in order.
    #[inline]
    pub fn extract(&self, mask: u32) -> BitString {
        let mask = mask & full_mask(self.len());
        BitString::raw(mask.count_ones() as usize, extract_bits(self.bits, mask))
    }

    /// Dense index over all strings of length `0..`: strings of length `m`
    /// occupy `2^m - 1 .. 2^(m+1) - 1`.
    #[inline]
    pub fn index(&self) -> usize {
        (1usize << self.len) - 1 + self.bits as usize
    }

    pub fn from_index(index: usize) -> BitString {
        let len = (usize::BITS - (index + 1).leading_zeros() - 1) as usize;
        BitString::raw(len, (index + 1 - (1 << len)) as u32)
    }

    /// All `2^len` strings of a given length, in pattern order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < MAX_BITS, "enumeration length {len} too large");
        (0..1u32 << len).map(move |bits| BitString::raw(len, bits))
    }

    /// Every string of length `0..=max_len`, in index order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_len)
    }
}

/// Number of distinct strings of length at most `n`.
pub fn strings_up_to(n: usize) -> usize {
    (1usize << (n + 1)) - 1
}

#[inline]
pub(crate) fn full_mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

/// Parallel bit extract: packs the bits of `value` selected by `mask`.
#[inline]
pub(crate) fn extract_bits(value: u32, mut mask: u32) -> u32 {
    let mut out = 0u32;
    let mut k = 0;
    while mask != 0 {
        let low = mask.trailing_zeros();
        out |= ((value >> low) & 1) << k;
        k += 1;
        mask &= mask - 1;
    }
    out
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidBitString(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_symbols(&symbols)
    }
}

/// Number of ways `y` embeds in `x` as a subsequence, i.e. the number of
/// position sets `S` with `x|S = y`. `O(|x| |y|)` dynamic program.
pub fn embedding_count_slices(x: &[u8], y: &[u8]) -> u128 {
    if y.len() > x.len() {
        return 0;
    }
    // ways[j]: embeddings of y[..j] into the prefix of x read so far
    let mut ways = vec![0u128; y.len() + 1];
    ways[0] = 1;
    for (i, &sym) in x.iter().enumerate() {
        // y[j] can only be matched once at least j symbols precede it
        let top = y.len().min(i + 1);
        for j in (0..top).rev() {
            if y[j] == sym {
                ways[j + 1] += ways[j];
            }
        }
    }
    ways[y.len()]
}

pub fn embedding_count(x: &BitString, y: &BitString) -> u64 {
    if y.len() > x.len() {
        return 0;
    }
    let mut ways = [0u64; MAX_BITS + 1];
    ways[0] = 1;
    let m = y.len();
    for i in 0..x.len() {
        let sym = x.get(i);
        let top = m.min(i + 1);
        for j in (0..top).rev() {
            if y.get(j) == sym {
                ways[j + 1] += ways[j];
            }
        }
    }
    ways[m]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn brute_force(x: &BitString, y: &BitString) -> u64 {
        (0..1u32 << x.len())
            .filter(|&mask| x.extract(mask) == *y)
            .count() as u64
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(bs("0110").to_string(), "0110");
        assert_eq!(bs("").len(), 0);
        assert!("012".parse::<BitString>().is_err());
        assert!(BitString::new(2, 0b100).is_err());
    }

    #[test]
    fn dense_index_roundtrip() {
        for (i, s) in BitString::all_up_to(6).enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(BitString::from_index(i), s);
        }
        assert_eq!(strings_up_to(6), BitString::all_up_to(6).count());
    }

    #[test]
    fn extract_keeps_order() {
        let x = bs("10110");
        assert_eq!(x.extract(0b11010), bs("010"));
        assert_eq!(x.extract(0), BitString::EMPTY);
        assert_eq!(x.extract(0b11111), x);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embedding_count(&bs("00"), &bs("0")), 2);
        assert_eq!(embedding_count(&bs("010"), &bs("00")), 1);
        assert_eq!(embedding_count(&bs("01"), &bs("011")), 0);
        for x in BitString::all_up_to(6) {
            assert_eq!(embedding_count(&x, &x), 1);
            assert_eq!(embedding_count(&x, &BitString::EMPTY), 1);
        }
    }

    #[test]
    fn embedding_matches_brute_force() {
        for x in BitString::all_up_to(8) {
            for y in BitString::all_up_to(x.len()) {
                assert_eq!(embedding_count(&x, &y), brute_force(&x, &y), "x={x} y={y}");
            }
        }
    }

    #[test]
    fn slice_and_packed_agree() {
        let x = bs("0110100110010110");
        for y in BitString::all_up_to(5) {
            assert_eq!(
                embedding_count_slices(&x.symbols(), &y.symbols()) as u64,
                embedding_count(&x, &y)
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn embedding_vs_subsets(xlen in 0usize..=12, xbits: u32, ylen in 0usize..=12, ybits: u32) {
                let x = BitString::new(xlen, xbits & full_mask(xlen)).unwrap();
                let ylen = ylen.min(xlen);
                let y = BitString::new(ylen, ybits & full_mask(ylen)).unwrap();
                prop_assert_eq!(embedding_count(&x, &y), brute_force(&x, &y));
            }
        }
    }
}
