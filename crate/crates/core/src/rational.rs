//! Exact rationals used by every instance that carries real-valued data.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Q(pub BigRational);

impl Ord for Q {
    fn cmp(&self, other: &Q) -> std::cmp::Ordering {
        match (small(self), small(other)) {
            // denominators are positive
            (Some((a, b)), Some((c, d))) => (a as i128 * d as i128).cmp(&(c as i128 * b as i128)),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Q) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Q {
    pub fn new(num: i64, den: i64) -> Q {
        Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Q {
        Q(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Q {
        Q(BigRational::zero())
    }

    pub fn one() -> Q {
        Q(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Q {
        Q(self.0.abs())
    }

    pub fn floor(&self) -> Q {
        Q(self.0.floor())
    }

    pub fn ceil(&self) -> Q {
        Q(self.0.ceil())
    }

    pub fn mid(&self, other: &Q) -> Q {
        (self + other) / Q::int(2)
    }

    pub fn min(self, other: Q) -> Q {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Q) -> Q {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `true` when the reduced denominator is a power of `p`.
    pub fn is_p_adic(&self, p: u64) -> bool {
        let mut d = self.denom().clone();
        let bp = BigInt::from(p);
        while d > BigInt::one() {
            if (&d % &bp).is_zero() {
                d /= &bp;
            } else {
                return false;
            }
        }
        true
    }

    pub fn pow_int(base: u64, e: u32) -> Q {
        Q(BigRational::from_integer(BigInt::from(base).pow(e)))
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational literal `{0}`")]
pub struct ParseQError(pub String);

impl FromStr for Q {
    type Err = ParseQError;

    fn from_str(s: &str) -> Result<Q, ParseQError> {
        let err = || ParseQError(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| err())?;
                let d: BigInt = d.trim().parse().map_err(|_| err())?;
                if d.is_zero() {
                    return Err(err());
                }
                Ok(Q(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| err())?;
                Ok(Q(BigRational::from_integer(n)))
            }
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.numer().to_string(), self.denom().to_string()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let (n, den): (String, String) = Deserialize::deserialize(d)?;
        format!("{n}/{den}").parse().map_err(serde::de::Error::custom)
    }
}

fn small(x: &Q) -> Option<(i64, i64)> {
    Some((x.numer().to_i64()?, x.denom().to_i64()?))
}

/// `n/d` in lowest terms, `d > 0`.
fn from_i128(n: i128, d: i128) -> Q {
    let g = num_integer::gcd(n, d);
    let (n, d) = if d < 0 { (-n / g, -d / g) } else { (n / g, d / g) };
    Q(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))
}

/// Word-sized fast path; `None` falls back to big arithmetic.
fn small_op(a: &Q, b: &Q, op: char) -> Option<Q> {
    let ((p, q), (r, s)) = (small(a)?, small(b)?);
    let (p, q, r, s) = (p as i128, q as i128, r as i128, s as i128);
    Some(match op {
        '+' => from_i128(p * s + r * q, q * s),
        '-' => from_i128(p * s - r * q, q * s),
        '*' => from_i128(p * r, q * s),
        _ => {
            if r == 0 {
                return None;
            }
            from_i128(p * s, q * r)
        }
    })
}

macro_rules! binop {
    ($tr:ident, $m:ident, $c:expr) => {
        impl<'a, 'b> $tr<&'b Q> for &'a Q {
            type Output = Q;
            fn $m(self, o: &'b Q) -> Q {
                small_op(self, o, $c).unwrap_or_else(|| Q((&self.0).$m(&o.0)))
            }
        }
        impl $tr<Q> for Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Q> for Q {
            type Output = Q;
            fn $m(self, o: &'a Q) -> Q {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Q> for &'a Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, '+');
binop!(Sub, sub, '-');
binop!(Mul, mul, '*');
binop!(Div, div, '/');

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-&self.0)
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::int(n)
    }
}

/// Shorthand constructor.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let x: Q = "6/8".parse().unwrap();
        assert_eq!(x, q(3, 4));
        assert_eq!(x.to_string(), "3/4");
        assert_eq!("5".parse::<Q>().unwrap().to_string(), "5");
        assert!("1/0".parse::<Q>().is_err());
    }

    #[test]
    fn small_and_big_agree() {
        let big = Q(BigRational::new(BigInt::from(1) << 80, BigInt::from(3)));
        for (a, b) in [(q(3, 4), q(-5, 6)), (q(i64::MAX, 7), q(i64::MAX - 1, 5)), (q(1, 2), big.clone())] {
            assert_eq!(&a + &b, Q(&a.0 + &b.0));
            assert_eq!(&a - &b, Q(&a.0 - &b.0));
            assert_eq!(&a * &b, Q(&a.0 * &b.0));
            assert_eq!(&a / &b, Q(&a.0 / &b.0));
        }
    }

    #[test]
    fn p_adic() {
        assert!(q(3, 8).is_p_adic(2));
        assert!(!q(1, 6).is_p_adic(2));
        assert!(q(5, 9).is_p_adic(3));
        assert!(Q::int(7).is_p_adic(3));
    }
}
