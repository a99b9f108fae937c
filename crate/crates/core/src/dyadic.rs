//! Exact nonnegative rationals whose denominator is a power of two.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// `numerator / 2^log2_denominator`, kept reduced: the numerator is odd, or
/// zero with exponent zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigUint,
    log2_denominator: u64,
}

impl Dyadic {
    pub fn new(numerator: BigUint, log2_denominator: u64) -> Self {
        if numerator.is_zero() {
            return Self::zero();
        }
        let shift = numerator.trailing_zeros().unwrap_or(0).min(log2_denominator);
        Dyadic { numerator: numerator >> shift, log2_denominator: log2_denominator - shift }
    }

    pub fn from_u128(numerator: u128, log2_denominator: u64) -> Self {
        Self::new(BigUint::from(numerator), log2_denominator)
    }

    pub fn integer(value: u64) -> Self {
        Self::new(BigUint::from(value), 0)
    }

    pub fn zero() -> Self {
        Dyadic { numerator: BigUint::zero(), log2_denominator: 0 }
    }

    pub fn one() -> Self {
        Dyadic { numerator: BigUint::one(), log2_denominator: 0 }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn log2_denominator(&self) -> u64 {
        self.log2_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn aligned(&self, other: &Dyadic) -> (BigUint, BigUint, u64) {
        let d = self.log2_denominator.max(other.log2_denominator);
        (&self.numerator << (d - self.log2_denominator), &other.numerator << (d - other.log2_denominator), d)
    }

    /// `self - other`, or `None` if the result would be negative.
    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let (a, b, d) = self.aligned(other);
        (a >= b).then(|| Dyadic::new(a - b, d))
    }

    /// Divides by `2^k`.
    pub fn halve(&self, k: u64) -> Dyadic {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic { numerator: self.numerator.clone(), log2_denominator: self.log2_denominator + k }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.numerator.bits();
        if bits == 0 {
            return 0.0;
        }
        // Keep the top 64 bits of the numerator and fold the rest into the exponent.
        let drop = bits.saturating_sub(64);
        let top = (&self.numerator >> drop).to_u64().expect("at most 64 bits") as f64;
        ldexp(top, drop as i64 - self.log2_denominator as i64)
    }

    /// `"num/2^d"`, or just `"num"` when the denominator is 1.
    pub fn render(&self) -> String {
        if self.log2_denominator == 0 {
            self.numerator.to_string()
        } else {
            format!("{}/2^{}", self.numerator, self.log2_denominator)
        }
    }
}

fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    // Scale in chunks so intermediate powers stay representable.
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, d) = self.aligned(rhs);
        Dyadic::new(a + b, d)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.numerator * &rhs.numerator, self.log2_denominator + rhs.log2_denominator)
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |a, b| &a + &b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// JSON shape shared by every exact value in reports.
#[derive(Serialize)]
struct DyadicJson {
    numerator: String,
    log2_denominator: u64,
    decimal: f64,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DyadicJson {
            numerator: self.numerator.to_string(),
            log2_denominator: self.log2_denominator,
            decimal: self.to_f64(),
        }
        .serialize(s)
    }
}

/// A [`Dyadic`] known to lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DyadicProbability(Dyadic);

impl DyadicProbability {
    pub fn new(value: Dyadic) -> Option<Self> {
        (value <= Dyadic::one()).then_some(DyadicProbability(value))
    }

    /// `count / 2^log2_total` where `count <= 2^log2_total`.
    pub fn from_count(count: BigUint, log2_total: u64) -> Self {
        let value = Dyadic::new(count, log2_total);
        debug_assert!(value <= Dyadic::one());
        DyadicProbability(value)
    }

    pub fn zero() -> Self {
        DyadicProbability(Dyadic::zero())
    }

    pub fn one() -> Self {
        DyadicProbability(Dyadic::one())
    }

    pub fn value(&self) -> &Dyadic {
        &self.0
    }

    pub fn into_inner(self) -> Dyadic {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

impl fmt::Display for DyadicProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
