//! Dense univariate polynomials over `Z_p` or `Q`, constant term first.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::ScalarField;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: ScalarField,
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(field: ScalarField, coeffs: Vec<BigRational>) -> Self {
        let mut p = Self { field, coeffs: coeffs.into_iter().map(|c| field.normalize(c)).collect() };
        p.trim();
        p
    }

    pub fn from_ints(field: ScalarField, coeffs: &[i64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn from_bigints(field: ScalarField, coeffs: &[BigInt]) -> Self {
        Self::new(field, coeffs.iter().cloned().map(BigRational::from_integer).collect())
    }

    pub fn zero(field: ScalarField) -> Self {
        Self { field, coeffs: Vec::new() }
    }

    pub fn one(field: ScalarField) -> Self {
        Self::constant(field, BigRational::one())
    }

    pub fn constant(field: ScalarField, c: BigRational) -> Self {
        Self::new(field, vec![c])
    }

    /// `X`
    pub fn x(field: ScalarField) -> Self {
        Self::new(field, vec![BigRational::zero(), BigRational::one()])
    }

    /// `X - c`
    pub fn linear_root(field: ScalarField, c: &BigRational) -> Self {
        Self::new(field, vec![-c.clone(), BigRational::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(f, (0..n).map(|i| f.add(&self.coeff(i), &other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(f, (0..n).map(|i| f.sub(&self.coeff(i), &other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.field, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::new(self.field, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.field);
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Poly::new(self.field, out)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut acc = Poly::one(self.field);
        let mut sq = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let f = self.field;
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = f.inv(&d.leading()).expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        let mut q = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = f.mul(r.last().expect("nonempty"), &lead_inv);
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = f.sub(&r[k + j], &f.mul(&c, dc));
                }
            }
            q[k] = c;
            r.pop();
        }
        (Poly::new(f, q), Poly::new(f, r))
    }

    /// Monic associate; zero stays zero.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(&self.leading()).expect("nonzero");
        self.scale(&inv)
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let f = self.field;
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| f.add(&f.mul(&acc, x), c))
    }

    /// `self(other(X))`
    pub fn compose(&self, other: &Poly) -> Poly {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(self.field), |acc, c| acc.mul(other).add(&Poly::constant(self.field, c.clone())))
    }

    /// Coefficients as strings, constant term first.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "X")?,
                _ => write!(f, "X^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_display() {
        let q = ScalarField::Rational;
        let p = Poly::from_ints(q, &[1, -2, 1]);
        assert_eq!(p.to_string(), "X^2 - 2X + 1");
        let x1 = Poly::from_ints(q, &[-1, 1]);
        assert_eq!(x1.pow(2), p);
        let (d, r) = p.div_rem(&x1);
        assert_eq!(d, x1);
        assert!(r.is_zero());
    }

    #[test]
    fn freshmans_dream_mod_p() {
        let f3 = ScalarField::Prime(3);
        let x1 = Poly::from_ints(f3, &[-1, 1]);
        assert_eq!(x1.pow(3), Poly::from_ints(f3, &[-1, 0, 0, 1]));
        let f2 = ScalarField::Prime(2);
        assert_eq!(Poly::from_ints(f2, &[1, 1]).pow(2), Poly::from_ints(f2, &[1, 0, 1]));
    }

    #[test]
    fn gcd_and_eval() {
        let q = ScalarField::Rational;
        let a = Poly::from_ints(q, &[-1, 0, 1]);
        let b = Poly::from_ints(q, &[1, 2, 1]);
        assert_eq!(a.gcd(&b), Poly::from_ints(q, &[1, 1]));
        assert_eq!(a.eval(&BigRational::from_integer(3.into())), BigRational::from_integer(8.into()));
        let c = a.compose(&Poly::from_ints(q, &[1, 1]));
        assert_eq!(c, Poly::from_ints(q, &[0, 2, 1]));
    }
}
