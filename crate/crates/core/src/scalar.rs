//! Scalar precision plumbing. Dense skew linear algebra is generic over
//! [`Real`]; `f64` is the default and [`DoubleDouble`] backs the extended mode.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

/// Minimal real-field interface needed by the dense kernels.
pub trait Real: Num + Neg<Output = Self> + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Unit roundoff of the format.
    const EPS: f64;
    /// Reciprocal condition number below which inverses are refused.
    const RCOND_MIN: f64;

    fn of(x: f64) -> Self;
    fn f64(self) -> f64;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
    const RCOND_MIN: f64 = 1e-13;

    fn of(x: f64) -> Self {
        x
    }

    fn f64(self) -> f64 {
        self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// Double-double real (about 32 significant digits).
///
/// Addition and multiplication delegate to [`twofloat`]. Division is done
/// here by three rounds of long division, because `TwoFloat / TwoFloat` in
/// twofloat 0.8 forms `1 - b·(1/b)` without a fused multiply-add and so only
/// delivers a double-precision quotient.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        DoubleDouble(self.0 + rhs.0)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        DoubleDouble(self.0 - rhs.0)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        DoubleDouble(self.0 * rhs.0)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let b = rhs.0;
        let q1 = self.0.hi() / b.hi();
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        DoubleDouble(TwoFloat::from(q1) + q2 + q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        DoubleDouble(self.0 % rhs.0)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble(TwoFloat::from(0.0))
    }
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble(TwoFloat::from(1.0))
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(DoubleDouble::of)
    }
}

impl Real for DoubleDouble {
    const EPS: f64 = 4.93e-32;
    const RCOND_MIN: f64 = 1e-28;

    fn of(x: f64) -> Self {
        DoubleDouble(TwoFloat::from(x))
    }

    fn f64(self) -> f64 {
        self.0.hi() + self.0.lo()
    }

    fn abs(self) -> Self {
        DoubleDouble(self.0.abs())
    }

    fn is_finite(self) -> bool {
        self.0.hi().is_finite() && self.0.lo().is_finite()
    }
}

pub fn lift<T: Real>(z: Complex64) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}

pub fn lower<T: Real>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.f64(), z.im.f64())
}

/// `|Re z| + |Im z|`, an underflow-safe magnitude for pivot selection.
pub fn abs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

pub fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl Precision {
    /// Monomial moment matrices lose roughly a digit per added degree; above
    /// this size the extended mode is recommended.
    pub const EXTENDED_ABOVE_D: usize = 10;

    pub fn recommended(d: usize) -> Self {
        if d > Self::EXTENDED_ABOVE_D {
            Precision::Extended
        } else {
            Precision::Double
        }
    }
}

/// Relative deviation `|a-b| / max(|a|,|b|)`, zero when both vanish.
pub fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// `(-1)^k` for a possibly negative exponent.
pub fn sign_pow(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
