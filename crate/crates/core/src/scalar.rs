//! Exact scalars: complex numbers over arbitrary-precision rationals.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rational = BigRational;

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cq {
    pub re: Rational,
    pub im: Rational,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Cq {
    pub fn new(re: Rational, im: Rational) -> Self {
        Cq { re, im }
    }
    pub fn real(re: Rational) -> Self {
        Cq { re, im: Rational::zero() }
    }
    pub fn int(n: i64) -> Self {
        Cq::real(rat(n, 1))
    }
    pub fn frac(n: i64, d: i64) -> Self {
        Cq::real(rat(n, d))
    }
    pub fn i() -> Self {
        Cq { re: Rational::zero(), im: Rational::one() }
    }
    pub fn zero() -> Self {
        Cq::int(0)
    }
    pub fn one() -> Self {
        Cq::int(1)
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        Cq { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn add(&self, o: &Cq) -> Cq {
        Cq { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    pub fn sub(&self, o: &Cq) -> Cq {
        Cq { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    pub fn neg(&self) -> Cq {
        Cq { re: -self.re.clone(), im: -self.im.clone() }
    }
    pub fn mul(&self, o: &Cq) -> Cq {
        Cq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    pub fn mul_i(&self) -> Cq {
        Cq { re: -self.im.clone(), im: self.re.clone() }
    }
    pub fn inv(&self) -> Cq {
        let d = &self.re * &self.re + &self.im * &self.im;
        Cq { re: &self.re / &d, im: -(&self.im / &d) }
    }
    pub fn pow_i(k: usize) -> Cq {
        match k % 4 {
            0 => Cq::one(),
            1 => Cq::i(),
            2 => Cq::int(-1),
            _ => Cq::i().neg(),
        }
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
    pub fn to_complex(&self) -> Complex<Rational> {
        Complex::new(self.re.clone(), self.im.clone())
    }
}

impl From<i64> for Cq {
    fn from(n: i64) -> Self {
        Cq::int(n)
    }
}

fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_imag(r: &Rational) -> String {
    let n = match r.numer().to_string().as_str() {
        "1" => String::new(),
        "-1" => "-".into(),
        s => s.to_string(),
    };
    if r.denom().is_one() {
        format!("{n}i")
    } else {
        format!("{n}i/{}", r.denom())
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => write!(f, "{}", fmt_imag(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({} {} {})", fmt_rat(&self.re), sign, fmt_imag(&self.im.abs()))
            }
        }
    }
}

impl fmt::Debug for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// `a (a-1) ... (a-b+1)`, zero when `b > a`.
pub fn falling(a: usize, b: usize) -> i64 {
    if b > a {
        return 0;
    }
    (0..b).fold(1i64, |acc, i| acc * (a - i) as i64)
}

pub fn factorial(n: usize) -> i64 {
    falling(n, n)
}
