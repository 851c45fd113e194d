//! Weight-enumerator polynomials with arbitrary-precision coefficients.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this many coefficient products, multiplication is schoolbook.
const SCHOOLBOOK_LIMIT: usize = 64;

/// `Σ_w A_w x^w`, where `A_w` counts erasure configurations of weight `w`.
///
/// Trailing zero coefficients are trimmed on construction, so the derived
/// equality compares canonical forms.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct WeightEnum {
    coeffs: Vec<BigUint>,
}

impl WeightEnum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1u32, 0)
    }

    pub fn monomial<C: Into<BigUint>>(coeff: C, weight: usize) -> Self {
        let mut coeffs = vec![BigUint::zero(); weight + 1];
        coeffs[weight] = coeff.into();
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigUint>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_u64s(coeffs: &[u64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigUint::from(c)).collect())
    }

    /// `(1 + x)^n`, the enumerator of all subsets of `[n]`.
    pub fn all_subsets(n: usize) -> Self {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(BigUint::one());
            for w in 1..row.len() {
                next.push(&row[w - 1] + &row[w]);
            }
            next.push(BigUint::one());
            row = next;
        }
        Self::from_coeffs(row)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Least `w` with a nonzero coefficient.
    pub fn min_weight(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, w: usize) -> BigUint {
        self.coeffs.get(w).cloned().unwrap_or_default()
    }

    /// Coefficient-wise `self ≤ other`.
    pub fn dominated_by(&self, other: &WeightEnum) -> bool {
        self.coeffs.len() <= other.coeffs.len()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a <= b)
    }

    /// Sum of all coefficients (the number of configurations counted).
    pub fn total(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    /// Probability that a BEC with erasure probability `z` produces a
    /// configuration counted by this enumerator, out of `n` positions:
    /// `Σ_w A_w z^w (1−z)^(n−w)`.
    pub fn eval_erasure(&self, n: usize, z: f64) -> Result<f64> {
        if let Some(d) = self.degree().filter(|&d| d > n) {
            return Err(Error::InvalidInput(format!(
                "enumerator degree {d} exceeds ambient size {n}"
            )));
        }
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::InvalidInput(format!("erasure probability {z} outside [0, 1]")));
        }
        if z == 0.0 {
            return Ok(self.coeff(0).to_f64().unwrap_or(f64::INFINITY));
        }
        if z == 1.0 {
            return Ok(self.coeff(n).to_f64().unwrap_or(f64::INFINITY));
        }
        let (lz, l1z) = (z.ln(), (-z).ln_1p());
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(w, a)| big_ln(a) + w as f64 * lz + (n - w) as f64 * l1z)
            .collect();
        let Some(peak) = terms.iter().copied().reduce(f64::max) else {
            return Ok(0.0);
        };
        // scaled by the dominant term, summed smallest first
        let mut scaled: Vec<f64> = terms.iter().map(|t| (t - peak).exp()).collect();
        scaled.sort_by(|a, b| a.total_cmp(b));
        Ok(scaled.iter().sum::<f64>() * peak.exp())
    }

    fn schoolbook(&self, rhs: &WeightEnum) -> WeightEnum {
        let mut out = vec![BigUint::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        WeightEnum::from_coeffs(out)
    }

    /// Product by Kronecker substitution: both factors are packed into one
    /// integer with slots wide enough that no product coefficient overflows.
    fn kronecker(&self, rhs: &WeightEnum) -> WeightEnum {
        let bits = |p: &WeightEnum| p.coeffs.iter().map(BigUint::bits).max().unwrap_or(0);
        let terms = self.coeffs.len().min(rhs.coeffs.len()) as u64;
        let slot_bits = bits(self) + bits(rhs) + (64 - terms.leading_zeros() as u64);
        let width = slot_bits.div_ceil(32) as usize;
        let product = self.pack(width) * rhs.pack(width);
        WeightEnum::unpack(&product, width, self.coeffs.len() + rhs.coeffs.len() - 1)
    }

    /// Packs coefficients into one integer, `width` 32-bit digits per slot.
    pub(crate) fn pack(&self, width: usize) -> BigUint {
        let mut digits = vec![0u32; self.coeffs.len() * width];
        for (w, c) in self.coeffs.iter().enumerate() {
            let d = c.to_u32_digits();
            debug_assert!(d.len() <= width, "coefficient overflows slot");
            digits[w * width..w * width + d.len()].copy_from_slice(&d);
        }
        BigUint::new(digits)
    }

    /// Inverse of [`pack`](Self::pack), reading at most `len` slots.
    pub(crate) fn unpack(packed: &BigUint, width: usize, len: usize) -> WeightEnum {
        let digits = packed.to_u32_digits();
        let coeffs = (0..len)
            .map(|w| {
                let lo = (w * width).min(digits.len());
                let hi = ((w + 1) * width).min(digits.len());
                BigUint::from_slice(&digits[lo..hi])
            })
            .collect();
        WeightEnum::from_coeffs(coeffs)
    }
}

/// Natural logarithm of a positive big integer, to double precision.
pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl Add<&WeightEnum> for &WeightEnum {
    type Output = WeightEnum;

    fn add(self, rhs: &WeightEnum) -> WeightEnum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for WeightEnum {
    type Output = WeightEnum;

    fn add(mut self, rhs: WeightEnum) -> WeightEnum {
        self += &rhs;
        self
    }
}

impl AddAssign<&WeightEnum> for WeightEnum {
    fn add_assign(&mut self, rhs: &WeightEnum) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), BigUint::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Mul<&WeightEnum> for &WeightEnum {
    type Output = WeightEnum;

    fn mul(self, rhs: &WeightEnum) -> WeightEnum {
        if self.is_zero() || rhs.is_zero() {
            return WeightEnum::zero();
        }
        if self.coeffs.len() * rhs.coeffs.len() <= SCHOOLBOOK_LIMIT {
            self.schoolbook(rhs)
        } else {
            self.kronecker(rhs)
        }
    }
}

impl Mul for WeightEnum {
    type Output = WeightEnum;

    fn mul(self, rhs: WeightEnum) -> WeightEnum {
        &self * &rhs
    }
}

impl std::iter::Sum for WeightEnum {
    fn sum<I: Iterator<Item = WeightEnum>>(iter: I) -> Self {
        iter.fold(WeightEnum::zero(), |mut acc, p| {
            acc += &p;
            acc
        })
    }
}

impl<'a> std::iter::Sum<&'a WeightEnum> for WeightEnum {
    fn sum<I: Iterator<Item = &'a WeightEnum>>(iter: I) -> Self {
        iter.fold(WeightEnum::zero(), |mut acc, p| {
            acc += p;
            acc
        })
    }
}

/// Renders as `x^4 + 4x^3 + 1`; the zero polynomial renders as `0`.
impl fmt::Display for WeightEnum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (w, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let unit = c.is_one();
            match w {
                0 => write!(f, "{c}")?,
                1 if unit => f.write_str("x")?,
                1 => write!(f, "{c}x")?,
                _ if unit => write!(f, "x^{w}")?,
                _ => write!(f, "{c}x^{w}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for WeightEnum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightEnum({self})")
    }
}

/// Parses the [`Display`](fmt::Display) form, e.g. `"x^4 + 4x^3"` or `"4x+1"`.
impl FromStr for WeightEnum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse polynomial {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(WeightEnum::zero());
        }
        let mut out = WeightEnum::zero();
        for term in compact.split('+') {
            let (coeff, weight) = match term.find('x') {
                None => (term, 0),
                Some(pos) => {
                    let exp = &term[pos + 1..];
                    let w = if exp.is_empty() {
                        1
                    } else {
                        exp.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?
                    };
                    (&term[..pos], w)
                }
            };
            let c: BigUint = if coeff.is_empty() {
                BigUint::one()
            } else {
                coeff.parse().map_err(|_| bad())?
            };
            out += &WeightEnum::monomial(c, weight);
        }
        Ok(out)
    }
}

/// JSON form: array of decimal coefficient strings, index = weight.
impl Serialize for WeightEnum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_str_radix(10)))
    }
}

impl<'de> Deserialize<'de> for WeightEnum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        let coeffs = strings
            .iter()
            .map(|s| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| de::Error::custom(format!("bad coefficient {s:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(WeightEnum::from_coeffs(coeffs))
    }
}
