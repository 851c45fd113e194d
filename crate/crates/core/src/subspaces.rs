//! The sixteen linear subspaces of GF(2)^3.
//!
//! A vector `p = (p0, p1, p2)` is encoded as the integer `4·p0 + 2·p1 + p2`,
//! so the string `"110"` is `6`. `p0` is the coefficient of the earliest
//! input symbol `u_φ`. A subspace is stored as an 8-bit membership mask
//! (bit `v` set iff `v` belongs to it) and identified by its position in the
//! canonical table below.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of subspaces of GF(2)^3.
pub const COUNT: usize = 16;

const fn bit(v: u8) -> u8 {
    1 << v
}

/// Membership masks in canonical order.
const MASKS: [u8; COUNT] = [
    bit(0),                                  // {0}
    bit(0) | bit(4),                         // <100>
    bit(0) | bit(2),                         // <010>
    bit(0) | bit(1),                         // <001>
    bit(0) | bit(6),                         // <110>
    bit(0) | bit(5),                         // <101>
    bit(0) | bit(3),                         // <011>
    bit(0) | bit(7),                         // <111>
    bit(0) | bit(4) | bit(2) | bit(6),       // <100,010>
    bit(0) | bit(4) | bit(1) | bit(5),       // <100,001>
    bit(0) | bit(2) | bit(1) | bit(3),       // <010,001>
    bit(0) | bit(6) | bit(1) | bit(7),       // <110,001>
    bit(0) | bit(4) | bit(3) | bit(7),       // <100,011>
    bit(0) | bit(5) | bit(2) | bit(7),       // <101,010>
    bit(0) | bit(6) | bit(5) | bit(3),       // <110,101>
    0xff,                                    // F^3
];

const BASES: [&[u8]; COUNT] = [
    &[],
    &[4],
    &[2],
    &[1],
    &[6],
    &[5],
    &[3],
    &[7],
    &[4, 2],
    &[4, 1],
    &[2, 1],
    &[6, 1],
    &[4, 3],
    &[5, 2],
    &[6, 5],
    &[4, 2, 1],
];

/// Inverse of `MASKS`, `0xff` marking masks that are not subspaces.
const INDEX_BY_MASK: [u8; 256] = {
    let mut table = [0xffu8; 256];
    let mut i = 0;
    while i < COUNT {
        table[MASKS[i] as usize] = i as u8;
        i += 1;
    }
    table
};

/// A vector of GF(2)^3 in the `4·p0 + 2·p1 + p2` encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec3(pub u8);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3(0);

    pub fn parse(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        if b.len() != 3 || !b.iter().all(|c| *c == b'0' || *c == b'1') {
            return Err(Error::InvalidInput(format!("{s:?} is not a 3-bit vector")));
        }
        Ok(Vec3(b.iter().fold(0, |acc, c| acc << 1 | (c - b'0'))))
    }

    pub fn from_bits(p0: bool, p1: bool, p2: bool) -> Self {
        Vec3((p0 as u8) << 2 | (p1 as u8) << 1 | p2 as u8)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

/// One of the sixteen subspaces of GF(2)^3, held as its canonical index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace3(u8);

impl Subspace3 {
    pub const ZERO: Subspace3 = Subspace3(0);
    pub const FULL: Subspace3 = Subspace3(15);

    pub fn all() -> impl Iterator<Item = Subspace3> {
        (0..COUNT as u8).map(Subspace3)
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index < COUNT {
            Ok(Subspace3(index as u8))
        } else {
            Err(Error::InvalidInput(format!("subspace index {index} out of range")))
        }
    }

    /// Looks up a membership mask; `None` unless it is XOR-closed and holds `0`.
    #[inline]
    pub fn from_mask(mask: u8) -> Option<Self> {
        match INDEX_BY_MASK[mask as usize] {
            0xff => None,
            i => Some(Subspace3(i)),
        }
    }

    /// Index of the subspace whose members are exactly `vectors`.
    pub fn index_of<I: IntoIterator<Item = Vec3>>(vectors: I) -> Result<usize> {
        let mask = vectors.into_iter().fold(0u8, |m, v| m | bit(v.0 & 7));
        Self::from_mask(mask)
            .map(Subspace3::index)
            .ok_or_else(|| Error::InvalidInput(format!("vector set {mask:#010b} is not a subspace")))
    }

    /// XOR-closure of the generators (always contains `000`).
    pub fn span<I: IntoIterator<Item = Vec3>>(generators: I) -> Self {
        Self::from_mask(span_mask(generators.into_iter().map(|v| v.0))).expect("span is closed")
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn mask(self) -> u8 {
        MASKS[self.0 as usize]
    }

    #[inline]
    pub fn contains(self, v: Vec3) -> bool {
        self.mask() >> (v.0 & 7) & 1 == 1
    }

    pub fn dim(self) -> u32 {
        self.mask().count_ones().trailing_zeros()
    }

    pub fn members(self) -> impl Iterator<Item = Vec3> {
        let mask = self.mask();
        (0u8..8).filter(move |v| mask >> v & 1 == 1).map(Vec3)
    }

    pub fn basis(self) -> impl Iterator<Item = Vec3> {
        BASES[self.0 as usize].iter().map(|&v| Vec3(v))
    }

    pub fn is_subset_of(self, other: Subspace3) -> bool {
        self.mask() & !other.mask() == 0
    }
}

/// Membership mask of the span of `generators` (3-bit integers).
#[inline]
pub fn span_mask<I: IntoIterator<Item = u8>>(generators: I) -> u8 {
    let mut mask = 1u8;
    for g in generators {
        let g = g & 7;
        if mask >> g & 1 == 0 {
            // translate the current (closed) set by g and merge
            let mut shifted = 0u8;
            for v in 0..8u8 {
                if mask >> v & 1 == 1 {
                    shifted |= bit(v ^ g);
                }
            }
            mask |= shifted;
        }
    }
    mask
}

impl fmt::Display for Subspace3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (k, v) in self.basis().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for Subspace3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}{}", self.0, self)
    }
}

/// Serialized as its sorted member strings, e.g. `["000","001","110","111"]`.
impl Serialize for Subspace3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members().map(|v| v.to_string()))
    }
}
