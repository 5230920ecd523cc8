use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic overflow in the machine-integer evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

/// Integer arithmetic used by the compiled evaluator. `i128` runs with
/// overflow checks, `BigInt` never fails.
pub(crate) trait Scalar: Clone + Ord + std::fmt::Debug + Send + Sync {
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Result<Self, Overflow>;
    fn sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn mul(&self, o: &Self) -> Result<Self, Overflow>;
    fn div_floor(&self, d: &Self) -> Self;
    fn div_ceil(&self, d: &Self) -> Self;
    fn is_multiple_of(&self, m: &Self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_zero(&self) -> bool;
    fn succ(&self) -> Result<Self, Overflow>;
}

impl Scalar for i128 {
    fn from_big(b: &BigInt) -> Option<Self> {
        // keep inputs within i64 so products of two inputs fit comfortably
        b.to_i64().map(i128::from)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(*o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    fn div_floor(&self, d: &Self) -> Self {
        Integer::div_floor(self, d)
    }
    fn div_ceil(&self, d: &Self) -> Self {
        -Integer::div_floor(&-self, d)
    }
    fn is_multiple_of(&self, m: &Self) -> bool {
        self.rem_euclid(*m) == 0
    }
    fn is_pos(&self) -> bool {
        *self > 0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn succ(&self) -> Result<Self, Overflow> {
        self.checked_add(1).ok_or(Overflow)
    }
}

impl Scalar for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn div_floor(&self, d: &Self) -> Self {
        Integer::div_floor(self, d)
    }
    fn div_ceil(&self, d: &Self) -> Self {
        -Integer::div_floor(&-self, d)
    }
    fn is_multiple_of(&self, m: &Self) -> bool {
        Zero::is_zero(&(self % m))
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn succ(&self) -> Result<Self, Overflow> {
        Ok(self + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_with_signed_divisors() {
        for (n, d) in [(7i128, 2i128), (-7, 2), (7, -2), (-7, -2), (6, 3), (-6, -3)] {
            let exact = n as f64 / d as f64;
            assert_eq!(Scalar::div_floor(&n, &d), exact.floor() as i128, "{n}/{d}");
            assert_eq!(Scalar::div_ceil(&n, &d), exact.ceil() as i128, "{n}/{d}");
            let (bn, bd) = (BigInt::from(n), BigInt::from(d));
            assert_eq!(Scalar::div_floor(&bn, &bd), BigInt::from(exact.floor() as i128));
            assert_eq!(Scalar::div_ceil(&bn, &bd), BigInt::from(exact.ceil() as i128));
        }
    }
}
