use std::fmt;

use crate::error::{Error, Result};

/// Positive dyadic rational `num / 2^exp`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    exp: u32,
}

/// Largest denominator exponent accepted from floating-point input.
pub const MAX_EXP: u32 = 64;

impl Dyadic {
    pub fn new(num: u64, exp: u32) -> Result<Self> {
        if num == 0 {
            return Err(Error::InvalidParameter("edge length must be positive".into()));
        }
        let shift = num.trailing_zeros().min(exp);
        Ok(Self { num: num >> shift, exp: exp - shift })
    }

    pub fn one() -> Self {
        Self { num: 1, exp: 0 }
    }

    /// `2^-exp`.
    pub fn unit_fraction(exp: u32) -> Self {
        Self { num: 1, exp }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn exp(self) -> u32 {
        self.exp
    }

    /// Exact conversion of a positive finite double (every such value is dyadic).
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidParameter(format!("edge length {x} must be positive and finite")));
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1 << 52) - 1);
        let (mant, e2) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | 1 << 52, raw_exp - 1075)
        };
        // x = mant * 2^e2
        if e2 >= 0 {
            let num = mant
                .checked_shl(e2 as u32)
                .filter(|v| v >> e2 == mant)
                .ok_or_else(|| Error::InvalidParameter(format!("edge length {x} too large")))?;
            Self::new(num, 0)
        } else {
            let tz = mant.trailing_zeros() as i64;
            let shift = tz.min(-e2);
            let exp = (-e2 - shift) as u32;
            if exp > MAX_EXP {
                return Err(Error::InvalidParameter(format!(
                    "edge length {x} needs denominator 2^{exp} (limit 2^{MAX_EXP})"
                )));
            }
            Self::new(mant >> shift, exp)
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }

    /// Integer count of `2^-common` units; `None` on overflow.
    pub fn units(self, common: u32) -> Option<u128> {
        debug_assert!(common >= self.exp);
        (self.num as u128).checked_shl(common - self.exp).filter(|v| v >> (common - self.exp) == self.num as u128)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}
