//! Fixed-length classical outcome strings.
//!
//! Bit `i` of the packed integer is the outcome of site `i`, matching the
//! amplitude layout of [`PureState`](crate::statevec::PureState). The text
//! form prints site 0 first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest bitstring representable in the packed form.
pub const MAX_BITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bits: u64,
    len: usize,
}

impl Bitstring {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS || (len < MAX_BITS && bits >> len != 0) {
            return Err(Error::MalformedBitstring(format!("{bits:#x} does not fit in {len} bits")));
        }
        Ok(Self { bits, len })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_BITS);
        Self { bits: 0, len }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        assert!(values.len() <= MAX_BITS);
        let bits = values.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
        Self { bits, len: values.len() }
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, site: usize) -> bool {
        debug_assert!(site < self.len);
        (self.bits >> site) & 1 == 1
    }

    pub fn with_flipped(self, site: usize) -> Self {
        assert!(site < self.len);
        Self { bits: self.bits ^ (1 << site), len: self.len }
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Every bitstring of length `len`, in increasing packed order.
    pub fn all(len: usize) -> impl Iterator<Item = Bitstring> {
        assert!(len < MAX_BITS);
        (0..1u64 << len).map(move |bits| Bitstring { bits, len })
    }
}

/// Formats the low `len` bits of `bits`, site 0 first.
pub fn format_bits(bits: u64, len: usize) -> String {
    (0..len).map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(self.bits, self.len))
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_BITS {
            return Err(Error::MalformedBitstring(s.to_string()));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::MalformedBitstring(s.to_string())),
            }
        }
        Ok(Self { bits, len: s.len() })
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn site_zero_prints_first() {
        let b = Bitstring::new(0b001, 3).unwrap();
        assert_eq!(b.to_string(), "100");
        assert!(b.get(0));
        assert!(!b.get(2));
    }

    #[test]
    fn rejects_junk() {
        assert!("01x".parse::<Bitstring>().is_err());
        assert!(Bitstring::new(0b100, 2).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(bits in any::<u32>(), len in 0usize..=32) {
            let masked = if len == 0 { 0 } else { u64::from(bits) & ((1u64 << len) - 1) };
            let b = Bitstring::new(masked, len).unwrap();
            let back: Bitstring = b.to_string().parse().unwrap();
            prop_assert_eq!(b, back);
        }
    }
}
