//! Exact arithmetic in the Eisenstein integers `Z[ω]`.
//!
//! Every element is stored as `a + bω` with `ω² = -1 - ω`, which makes the
//! pair `(a, b)` a unique representative.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// An element `a + bω` of `Z[ω]`, where `ω` is a primitive cube root of unity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EisensteinInt {
    #[serde(with = "decimal")]
    pub a: BigInt,
    #[serde(with = "decimal")]
    pub b: BigInt,
}

impl EisensteinInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn from_int(a: impl Into<BigInt>) -> Self {
        Self::new(a, 0)
    }

    pub fn omega() -> Self {
        Self::new(0, 1)
    }

    /// `ω^k` for any integer `k`, using the mathematical residue of `k` mod 3.
    pub fn omega_pow(k: i64) -> Self {
        match k.rem_euclid(3) {
            0 => Self::new(1, 0),
            1 => Self::new(0, 1),
            _ => Self::new(-1, -1),
        }
    }

    /// True when the ω-coordinate vanishes.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Field norm `a² - ab + b²`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - &self.a * &self.b + &self.b * &self.b
    }

    /// Complex conjugate; swaps `ω` and `ω²`.
    pub fn conj(&self) -> Self {
        // a + bω² = a + b(-1 - ω)
        Self::new(&self.a - &self.b, -&self.b)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(&self.a * k, &self.b * k)
    }
}

impl Zero for EisensteinInt {
    fn zero() -> Self {
        Self::new(0, 0)
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for EisensteinInt {
    fn one() -> Self {
        Self::new(1, 0)
    }
}

impl From<i64> for EisensteinInt {
    fn from(a: i64) -> Self {
        Self::from_int(a)
    }
}

impl From<BigInt> for EisensteinInt {
    fn from(a: BigInt) -> Self {
        Self::new(a, 0)
    }
}

impl<'a> Add<&'a EisensteinInt> for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn add(self, rhs: &EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Add for EisensteinInt {
    type Output = EisensteinInt;
    fn add(self, rhs: EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl AddAssign<&EisensteinInt> for EisensteinInt {
    fn add_assign(&mut self, rhs: &EisensteinInt) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl<'a> Sub<&'a EisensteinInt> for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn sub(self, rhs: &EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Sub for EisensteinInt {
    type Output = EisensteinInt;
    fn sub(self, rhs: EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl SubAssign<&EisensteinInt> for EisensteinInt {
    fn sub_assign(&mut self, rhs: &EisensteinInt) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

impl<'a> Mul<&'a EisensteinInt> for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn mul(self, rhs: &EisensteinInt) -> EisensteinInt {
        // (a1 + b1ω)(a2 + b2ω) = a1a2 + (a1b2 + a2b1)ω + b1b2ω², ω² = -1 - ω
        let bb = &self.b * &rhs.b;
        EisensteinInt::new(
            &self.a * &rhs.a - &bb,
            &self.a * &rhs.b + &rhs.a * &self.b - bb,
        )
    }
}

impl Mul for EisensteinInt {
    type Output = EisensteinInt;
    fn mul(self, rhs: EisensteinInt) -> EisensteinInt {
        &self * &rhs
    }
}

impl Neg for EisensteinInt {
    type Output = EisensteinInt;
    fn neg(self) -> EisensteinInt {
        EisensteinInt::new(-self.a, -self.b)
    }
}

impl Neg for &EisensteinInt {
    type Output = EisensteinInt;
    fn neg(self) -> EisensteinInt {
        EisensteinInt::new(-&self.a, -&self.b)
    }
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}ω", self.b),
            (false, false) => {
                let sign = if self.b.is_negative() { '-' } else { '+' };
                write!(f, "({} {} {}ω)", self.a, sign, self.b.abs())
            }
        }
    }
}

/// Serde adapter writing big integers as decimal strings.
pub(crate) mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}
