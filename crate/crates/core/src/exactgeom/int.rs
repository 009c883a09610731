//! Integer backends for exact elimination.
//!
//! Every routine runs first on `i64` with checked arithmetic and is rerun on
//! `BigInt` if any intermediate overflows.

use core::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) trait ExactInt: Clone + Eq + Debug {
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// -1, 0 or 1.
    fn sign(&self) -> i32;
    fn mul(&self, o: &Self) -> Result<Self, Overflow>;
    fn add(&self, o: &Self) -> Result<Self, Overflow>;
    fn sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn neg(&self) -> Result<Self, Overflow>;
    /// Non-negative gcd; `gcd(0, 0) = 0`.
    fn gcd(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn to_i64(&self) -> Option<i64>;
}

impl ExactInt for i64 {
    #[inline]
    fn from_i64(v: i64) -> Self {
        v
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0
    }
    #[inline]
    fn sign(&self) -> i32 {
        self.signum() as i32
    }
    #[inline]
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    #[inline]
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(*o).ok_or(Overflow)
    }
    #[inline]
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    #[inline]
    fn neg(&self) -> Result<Self, Overflow> {
        self.checked_neg().ok_or(Overflow)
    }
    #[inline]
    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.unsigned_abs(), o.unsigned_abs());
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        // only 2^63 itself cannot be represented, and it never survives the checks above
        a.min(i64::MAX as u64) as i64
    }
    #[inline]
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    #[inline]
    fn to_i64(&self) -> Option<i64> {
        Some(*self)
    }
}

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sign(&self) -> i32 {
        if Zero::is_zero(self) {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn neg(&self) -> Result<Self, Overflow> {
        Ok(-self)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
}

/// Divides `v` by the gcd of its entries. Returns `false` if `v` is zero.
pub(crate) fn primitive<T: ExactInt>(v: &mut [T]) -> bool {
    let mut g = T::from_i64(0);
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g == T::from_i64(1) {
                return true;
            }
        }
    }
    if g.is_zero() {
        return false;
    }
    for x in v.iter_mut() {
        *x = x.div_exact(&g);
    }
    true
}

pub(crate) fn dot<T: ExactInt>(a: &[T], b: &[T]) -> Result<T, Overflow> {
    let mut acc = T::from_i64(0);
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = acc.add(&x.mul(y)?)?;
    }
    Ok(acc)
}

pub(crate) fn to_big(v: &[i64]) -> alloc::vec::Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_i64_overflows() {
        assert_eq!(i64::MAX.mul(&2), Err(Overflow));
        assert_eq!(ExactInt::gcd(&12i64, &-18), 6);
    }

    #[test]
    fn primitive_divides_content() {
        let mut v = [4i64, -6, 0, 10];
        assert!(primitive(&mut v));
        assert_eq!(v, [2, -3, 0, 5]);
        let mut z = [0i64, 0];
        assert!(!primitive(&mut z));
    }
}
