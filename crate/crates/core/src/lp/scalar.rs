//! Exact scalars for the simplex solver.
//!
//! [`Small`] is an `i64/i64` rational evaluated through `i128`. On overflow
//! it raises a thread-local flag; the solver polls the flag and restarts the
//! whole solve with [`BigRational`], so results are always exact.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

thread_local! {
    static OVERFLOW: Cell<bool> = const { Cell::new(false) };
}

pub(crate) fn clear_overflow() {
    OVERFLOW.with(|f| f.set(false));
}

pub(crate) fn overflowed() -> bool {
    OVERFLOW.with(|f| f.get())
}

fn raise_overflow() {
    OVERFLOW.with(|f| f.set(true));
}

pub(crate) trait Scalar: Clone + Debug + PartialEq + PartialOrd {
    fn zero() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_big(v: &BigRational) -> Self;
    fn to_big(&self) -> BigRational;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn mul_int(&self, c: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
}

/// Reduced fraction with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Small {
    num: i64,
    den: i64,
}

impl Small {
    fn make(num: i128, den: i128) -> Small {
        debug_assert!(den != 0);
        let g = num.gcd(&den);
        let (mut n, mut d) = if g > 1 {
            (num / g, den / g)
        } else {
            (num, den)
        };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(num), Ok(den)) => Small { num, den },
            _ => {
                raise_overflow();
                Small { num: 0, den: 1 }
            }
        }
    }
}

impl PartialOrd for Small {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some((self.num as i128 * o.den as i128).cmp(&(o.num as i128 * self.den as i128)))
    }
}

impl Scalar for Small {
    fn zero() -> Self {
        Small { num: 0, den: 1 }
    }

    fn from_int(v: i64) -> Self {
        Small { num: v, den: 1 }
    }

    fn from_big(v: &BigRational) -> Self {
        match (v.numer().to_i64(), v.denom().to_i64()) {
            (Some(num), Some(den)) => Small { num, den },
            _ => {
                raise_overflow();
                Small::zero()
            }
        }
    }

    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Small::make(self.num as i128 + o.num as i128, self.den as i128);
        }
        let (a, b, c, d) = (
            self.num as i128,
            self.den as i128,
            o.num as i128,
            o.den as i128,
        );
        Small::make(a * d + c * b, b * d)
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&Small {
            num: o.num.checked_neg().unwrap_or_else(|| {
                raise_overflow();
                0
            }),
            den: o.den,
        })
    }

    fn mul(&self, o: &Self) -> Self {
        if self.num == 0 || o.num == 0 {
            return Small::zero();
        }
        Small::make(
            self.num as i128 * o.num as i128,
            self.den as i128 * o.den as i128,
        )
    }

    fn div(&self, o: &Self) -> Self {
        assert!(o.num != 0, "division by zero");
        Small::make(
            self.num as i128 * o.den as i128,
            self.den as i128 * o.num as i128,
        )
    }

    fn mul_int(&self, c: i64) -> Self {
        match c {
            1 => *self,
            0 => Small::zero(),
            _ => Small::make(self.num as i128 * c as i128, self.den as i128),
        }
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn is_positive(&self) -> bool {
        self.num > 0
    }

    fn is_negative(&self) -> bool {
        self.num < 0
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_big(v: &BigRational) -> Self {
        v.clone()
    }

    fn to_big(&self) -> BigRational {
        self.clone()
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn sub(&self, o: &Self) -> Self {
        self - o
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn div(&self, o: &Self) -> Self {
        self / o
    }

    fn mul_int(&self, c: i64) -> Self {
        if c.is_one() {
            self.clone()
        } else {
            self * BigInt::from(c)
        }
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}
