//! Dense univariate polynomials with exact coefficients.
//!
//! [`SPoly`] has integer coefficients and prints in the indeterminate `s`;
//! [`QPoly`] has rational coefficients and prints in `x`. Both keep their
//! coefficient vectors trimmed so that the last entry is nonzero.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Polynomial in `s` over the integers, coefficients indexed by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SPoly {
    coeffs: Vec<BigInt>,
}

/// Polynomial in `x` over the rationals, coefficients indexed by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

macro_rules! dense_poly {
    ($ty:ident, $coef:ty) => {
        impl $ty {
            pub fn new(mut coeffs: Vec<$coef>) -> Self {
                while coeffs.last().is_some_and(|c| c.is_zero()) {
                    coeffs.pop();
                }
                Self { coeffs }
            }

            pub fn zero() -> Self {
                Self { coeffs: Vec::new() }
            }

            pub fn one() -> Self {
                Self::constant(<$coef>::one())
            }

            pub fn constant(c: $coef) -> Self {
                Self::new(vec![c])
            }

            /// `c * var^degree`.
            pub fn monomial(c: $coef, degree: usize) -> Self {
                let mut coeffs = vec![<$coef>::zero(); degree + 1];
                coeffs[degree] = c;
                Self::new(coeffs)
            }

            /// The indeterminate itself.
            pub fn var() -> Self {
                Self::monomial(<$coef>::one(), 1)
            }

            pub fn is_zero(&self) -> bool {
                self.coeffs.is_empty()
            }

            /// Degree, or `None` for the zero polynomial.
            pub fn degree(&self) -> Option<usize> {
                self.coeffs.len().checked_sub(1)
            }

            pub fn coeffs(&self) -> &[$coef] {
                &self.coeffs
            }

            pub fn coeff(&self, degree: usize) -> $coef {
                self.coeffs.get(degree).cloned().unwrap_or_else(<$coef>::zero)
            }

            /// Nonzero `(degree, coefficient)` pairs in ascending degree.
            pub fn terms(&self) -> impl DoubleEndedIterator<Item = (usize, &$coef)> {
                self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
            }

            pub fn scale(&self, c: &$coef) -> Self {
                Self::new(self.coeffs.iter().map(|a| a * c).collect())
            }

            pub fn pow(&self, e: u32) -> Self {
                let mut acc = Self::one();
                for _ in 0..e {
                    acc = &acc * self;
                }
                acc
            }
        }

        impl Add<&$ty> for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                let len = self.coeffs.len().max(rhs.coeffs.len());
                let coeffs = (0..len)
                    .map(|i| match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                        (Some(a), Some(b)) => a + b,
                        (Some(a), None) | (None, Some(a)) => a.clone(),
                        (None, None) => unreachable!(),
                    })
                    .collect();
                $ty::new(coeffs)
            }
        }

        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }

        impl AddAssign<&$ty> for $ty {
            fn add_assign(&mut self, rhs: &$ty) {
                if self.coeffs.len() < rhs.coeffs.len() {
                    self.coeffs.resize(rhs.coeffs.len(), <$coef>::zero());
                }
                for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                    *a += b;
                }
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }

        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty { coeffs: self.coeffs.iter().map(|c| -c).collect() }
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                -&self
            }
        }

        impl Sub<&$ty> for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self + &(-rhs)
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }

        impl Mul<&$ty> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                if self.is_zero() || rhs.is_zero() {
                    return $ty::zero();
                }
                let mut coeffs = vec![<$coef>::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
                for (i, a) in self.coeffs.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in rhs.coeffs.iter().enumerate() {
                        coeffs[i + j] += a * b;
                    }
                }
                $ty::new(coeffs)
            }
        }

        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                &self * &rhs
            }
        }
    };
}

dense_poly!(SPoly, BigInt);
dense_poly!(QPoly, BigRational);

impl SPoly {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_rational(&self, s: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * s + BigRational::from_integer(c.clone()))
    }

    /// Value at `s = 0`.
    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    /// True iff every nonzero term has degree of the given parity.
    pub fn has_parity(&self, odd: bool) -> bool {
        self.terms().all(|(d, _)| (d % 2 == 1) == odd)
    }

    /// LaTeX rendering, e.g. `16s^{4}-24s^{2}+2`.
    pub fn to_latex(&self) -> String {
        render(self.terms().rev().map(|(d, c)| (d, c.clone().into())), "s", true)
    }
}

impl QPoly {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Embeds an integer polynomial, renaming its variable.
    pub fn from_spoly(p: &SPoly) -> Self {
        Self::new(p.coeffs().iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn to_latex(&self) -> String {
        render(self.terms().rev().map(|(d, c)| (d, c.clone())), "x", true)
    }

    /// Single-term polynomial as `(coefficient, degree)`.
    pub fn as_monomial(&self) -> Option<(BigRational, usize)> {
        let mut terms = self.terms();
        let (d, c) = terms.next()?;
        match terms.next() {
            None => Some((c.clone(), d)),
            Some(_) => None,
        }
    }
}

/// Renders terms given in display order. The plain form has no spaces, as in
/// `4s^2-1`; the LaTeX form wraps exponents and fractions.
pub(crate) fn render(terms: impl Iterator<Item = (usize, BigRational)>, var: &str, latex: bool) -> String {
    let mut out = String::new();
    for (i, (deg, c)) in terms.enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if neg {
            out.push('-');
        } else if i > 0 {
            out.push('+');
        }
        let show_mag = deg == 0 || !mag.is_one();
        if show_mag {
            if deg == 0 && !latex {
                out.push_str(&mag.to_string());
            } else {
                out.push_str(&render_rational(&mag, latex));
            }
        }
        if deg > 0 {
            out.push_str(var);
            if deg > 1 {
                if latex {
                    out.push_str(&format!("^{{{deg}}}"));
                } else {
                    out.push_str(&format!("^{deg}"));
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub(crate) fn render_rational(c: &BigRational, latex: bool) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else if latex {
        let sign = if c.is_negative() { "-" } else { "" };
        format!("{sign}\\frac{{{}}}{{{}}}", c.numer().abs(), c.denom())
    } else {
        format!("({c})")
    }
}

impl fmt::Display for SPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.terms().rev().map(|(d, c)| (d, c.clone().into())), "s", false))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.terms().rev().map(|(d, c)| (d, c.clone())), "x", false))
    }
}
