//! Coefficient rings for jets: binary64 floats and exact rationals.

use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{singular, Error, Result};

/// Which ring a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientMode {
    Float64,
    ExactRational,
}

/// A commutative ring element usable as a jet coefficient.
///
/// Division and transcendental functions are fallible: division by zero is a
/// [`Error::Singular`], and transcendental values that are not rational are an
/// [`Error::Mode`] in exact mode.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const MODE: CoefficientMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Nearest ring element to an exact rational.
    fn from_q(q: &Q) -> Self;

    fn is_zero(&self) -> bool;
    fn signum(&self) -> Ordering;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// `self += a * b`.
    fn mul_add_assign(&mut self, a: &Self, b: &Self);

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.recip()?)
    }
    fn recip(&self) -> Result<Self>;

    fn exp(&self) -> Result<Self>;
    fn ln(&self) -> Result<Self>;
    fn sin(&self) -> Result<Self>;
    fn cos(&self) -> Result<Self>;
    /// Real power `self^(num/den)` with `den > 0` and `gcd(num, den) = 1`.
    fn pow_ratio(&self, num: i64, den: u32) -> Result<Self>;

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    const MODE: CoefficientMode = CoefficientMode::Float64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_q(q: &Q) -> Self {
        q.to_f64()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn signum(&self) -> Ordering {
        self.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn recip(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(singular("division by zero"));
        }
        Ok(1.0 / self)
    }
    fn exp(&self) -> Result<Self> {
        Ok(libm::exp(*self))
    }
    fn ln(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(singular("logarithm of a non-positive value"));
        }
        Ok(libm::log(*self))
    }
    fn sin(&self) -> Result<Self> {
        Ok(libm::sin(*self))
    }
    fn cos(&self) -> Result<Self> {
        Ok(libm::cos(*self))
    }
    fn pow_ratio(&self, num: i64, den: u32) -> Result<Self> {
        if den == 1 {
            if *self == 0.0 && num < 0 {
                return Err(singular("negative power of zero"));
            }
            return Ok(libm::pow(*self, num as f64));
        }
        if (*self < 0.0 && den % 2 == 0) || (*self == 0.0 && num <= 0) {
            return Err(singular("fractional power outside its domain"));
        }
        let mag = libm::pow(libm::fabs(*self), num as f64 / den as f64);
        Ok(if *self < 0.0 && num % 2 != 0 {
            -mag
        } else {
            mag
        })
    }
}

/// Exact arbitrary-precision rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(pub BigRational);

impl Q {
    pub fn new(num: i64, den: i64) -> Self {
        Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Exact `k`-th root when it exists.
    fn exact_root(&self, k: u32) -> Option<Q> {
        if self.0.is_negative() && k % 2 == 0 {
            return None;
        }
        let n = int_root(self.0.numer(), k)?;
        let d = int_root(self.0.denom(), k)?;
        Some(Q(BigRational::new(n, d)))
    }
}

fn int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Q {
    type Err = Error;

    /// Accepts `n`, `n/d` and finite decimals such as `-1.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Argument(format!("not a rational literal: `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Q(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.starts_with('-');
            let digits = frac.len() as u32;
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let whole: BigInt = match int.trim_start_matches(['-', '+']) {
                "" => BigInt::zero(),
                w => w.parse().map_err(|_| bad())?,
            };
            let scale = num_traits::pow(BigInt::from(10), digits as usize);
            let frac: BigInt = frac.parse().map_err(|_| bad())?;
            let mag = whole * &scale + frac;
            let num = if neg { -mag } else { mag };
            return Ok(Q(BigRational::new(num, scale)));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Q(BigRational::from_integer(n)))
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Self {
        Q(BigRational::from_integer(BigInt::from(n)))
    }
}

macro_rules! q_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Q {
            type Output = Q;
            fn $m(self, rhs: Q) -> Q {
                Q(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Q> for &'a Q {
            type Output = Q;
            fn $m(self, rhs: &'a Q) -> Q {
                Q(&self.0 $op &rhs.0)
            }
        }
    };
}
q_binop!(Add, add, +);
q_binop!(Sub, sub, -);
q_binop!(Mul, mul, *);

impl Div for Q {
    type Output = Q;
    /// Panics on a zero divisor; use [`Scalar::checked_div`] for user data.
    fn div(self, rhs: Q) -> Q {
        Q(self.0 / rhs.0)
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl AddAssign for Q {
    fn add_assign(&mut self, rhs: Q) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Q {
    fn sub_assign(&mut self, rhs: Q) {
        self.0 -= rhs.0;
    }
}

fn mode_error(what: &str, at: &Q) -> Error {
    Error::Mode(format!("{what}({at}) is not rational"))
}

impl Scalar for Q {
    const MODE: CoefficientMode = CoefficientMode::ExactRational;

    fn zero() -> Self {
        Q(BigRational::zero())
    }
    fn one() -> Self {
        Q(BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        n.into()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Q::new(num, den)
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn signum(&self) -> Ordering {
        self.0.cmp(&BigRational::zero())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Q(self.0.abs())
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        if a.0.is_zero() || b.0.is_zero() {
            return;
        }
        self.0 += &a.0 * &b.0;
    }
    fn recip(&self) -> Result<Self> {
        if self.0.is_zero() {
            return Err(singular("division by zero"));
        }
        Ok(Q(self.0.recip()))
    }
    fn exp(&self) -> Result<Self> {
        if self.0.is_zero() {
            Ok(Self::one())
        } else {
            Err(mode_error("exp", self))
        }
    }
    fn ln(&self) -> Result<Self> {
        if !self.0.is_positive() {
            Err(singular("logarithm of a non-positive value"))
        } else if self.0.is_one() {
            Ok(Self::zero())
        } else {
            Err(mode_error("log", self))
        }
    }
    fn sin(&self) -> Result<Self> {
        if self.0.is_zero() {
            Ok(Self::zero())
        } else {
            Err(mode_error("sin", self))
        }
    }
    fn cos(&self) -> Result<Self> {
        if self.0.is_zero() {
            Ok(Self::one())
        } else {
            Err(mode_error("cos", self))
        }
    }
    fn pow_ratio(&self, num: i64, den: u32) -> Result<Self> {
        if self.0.is_zero() {
            return if num > 0 {
                Ok(Self::zero())
            } else {
                Err(singular("non-positive power of zero"))
            };
        }
        if den % 2 == 0 && self.0.is_negative() {
            return Err(singular("even root of a negative value"));
        }
        let root = self
            .exact_root(den)
            .ok_or_else(|| Error::Mode(format!("{self}^(1/{den}) is not rational")))?;
        let mag = root.powi(num.unsigned_abs() as u32);
        if num < 0 {
            mag.recip()
        } else {
            Ok(mag)
        }
    }
}

/// Zero test: literal zero for exact scalars, `|s| ≤ tol` for floats.
pub fn negligible<S: Scalar>(s: &S, tol: f64) -> bool {
    if S::MODE == CoefficientMode::ExactRational {
        s.is_zero()
    } else {
        s.to_f64().abs() <= tol
    }
}

/// Render a scalar for reports (`n/d` for rationals, shortest round-trip for floats).
pub fn render<S: Scalar>(s: &S) -> String {
    s.to_string()
}
