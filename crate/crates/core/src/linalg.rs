//! Exact linear algebra over `Z_p` and `Q`.
//!
//! Scalars of both fields are carried as [`BigRational`]; a `Z_p` scalar is
//! always an integer in `[0, p)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarField {
    Prime(u64),
    Rational,
}

pub type Mat = Vec<Vec<BigRational>>;

fn mod_inverse(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(p);
    e.gcd.is_one().then(|| e.x.mod_floor(p))
}

impl ScalarField {
    /// Canonical representative; panics if a rational has a denominator
    /// divisible by `p`.
    pub fn normalize(&self, x: BigRational) -> BigRational {
        match self {
            ScalarField::Rational => x,
            ScalarField::Prime(p) => {
                let p = BigInt::from(*p);
                let (num, den) = x.into_raw();
                let inv = mod_inverse(&den.mod_floor(&p), &p).expect("denominator invertible mod p");
                BigRational::from_integer((num * inv).mod_floor(&p))
            }
        }
    }

    pub fn try_normalize(&self, x: BigRational) -> Option<BigRational> {
        match self {
            ScalarField::Prime(p) if x.denom().is_multiple_of(&BigInt::from(*p)) => None,
            _ => Some(self.normalize(x)),
        }
    }

    pub fn from_int<T: Into<BigInt>>(&self, x: T) -> BigRational {
        self.normalize(BigRational::from_integer(x.into()))
    }

    pub fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    pub fn one(&self) -> BigRational {
        BigRational::one()
    }

    pub fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        self.reduce(a + b)
    }

    pub fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        self.reduce(a - b)
    }

    pub fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        self.reduce(a * b)
    }

    pub fn neg(&self, a: &BigRational) -> BigRational {
        self.reduce(-a)
    }

    pub fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            return None;
        }
        match self {
            ScalarField::Rational => Some(a.recip()),
            ScalarField::Prime(p) => {
                let p = BigInt::from(*p);
                mod_inverse(a.numer(), &p).map(BigRational::from_integer)
            }
        }
    }

    pub fn div(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        self.inv(b).map(|ib| self.mul(a, &ib))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            ScalarField::Prime(p) => *p,
            ScalarField::Rational => 0,
        }
    }

    /// Cheap reduction for values that are already integral in `Z_p`.
    fn reduce(&self, x: BigRational) -> BigRational {
        match self {
            ScalarField::Rational => x,
            ScalarField::Prime(p) if x.is_integer() => {
                BigRational::from_integer(x.to_integer().mod_floor(&BigInt::from(*p)))
            }
            ScalarField::Prime(_) => self.normalize(x),
        }
    }
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect()
}

pub fn zero_vec(n: usize) -> Vec<BigRational> {
    vec![BigRational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<BigRational> {
    let mut v = zero_vec(n);
    v[i] = BigRational::one();
    v
}

pub fn mat_vec(f: ScalarField, a: &Mat, v: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| {
            let s = row
                .iter()
                .zip(v)
                .filter(|(x, y)| !x.is_zero() && !y.is_zero())
                .fold(BigRational::zero(), |acc, (x, y)| acc + x * y);
            f.normalize(s)
        })
        .collect()
}

pub fn mat_mul(f: ScalarField, a: &Mat, b: &Mat) -> Mat {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    let s = row
                        .iter()
                        .zip(b)
                        .filter(|(x, brow)| !x.is_zero() && !brow[j].is_zero())
                        .fold(BigRational::zero(), |acc, (x, brow)| acc + x * &brow[j]);
                    f.normalize(s)
                })
                .collect()
        })
        .collect()
}

pub fn vec_add(f: ScalarField, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().zip(b).map(|(x, y)| f.add(x, y)).collect()
}

pub fn vec_sub(f: ScalarField, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().zip(b).map(|(x, y)| f.sub(x, y)).collect()
}

pub fn vec_scale(f: ScalarField, a: &[BigRational], c: &BigRational) -> Vec<BigRational> {
    a.iter().map(|x| f.mul(x, c)).collect()
}

pub fn is_zero_vec(v: &[BigRational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Gauss-Jordan inverse.
pub fn inverse(f: ScalarField, a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> =
        a.iter().zip(identity(n)).map(|(row, id)| row.iter().cloned().chain(id).collect()).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = f.inv(&m[c][c])?;
        m[c] = vec_scale(f, &m[c], &inv);
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let k = m[r][c].clone();
                let sub = vec_scale(f, &m[c], &k);
                m[r] = vec_sub(f, &m[r], &sub);
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Rank of a list of vectors.
pub fn rank(f: ScalarField, vectors: &[Vec<BigRational>]) -> usize {
    let mut basis = EchelonBasis::new(f);
    vectors.iter().filter(|v| basis.insert(v).is_ok()).count()
}

/// Incrementally built echelon basis that remembers how each stored row was
/// formed from the inserted vectors, so dependencies can be read off exactly.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: ScalarField,
    rows: Vec<(usize, Vec<BigRational>, Vec<BigRational>)>,
    inserted: usize,
}

impl EchelonBasis {
    pub fn new(field: ScalarField) -> Self {
        Self { field, rows: Vec::new(), inserted: 0 }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Inserts `v` if it is independent of the vectors inserted so far and
    /// returns its index. Otherwise returns `c` with `v = sum c_j inserted_j`,
    /// where `j` runs over the independent vectors in insertion order.
    pub fn insert(&mut self, v: &[BigRational]) -> Result<usize, Vec<BigRational>> {
        let f = self.field;
        let (w, c) = self.reduce(v);
        match w.iter().position(|x| !x.is_zero()) {
            None => Err(c.iter().map(|x| f.neg(x)).collect()),
            Some(p) => {
                let idx = self.inserted;
                self.inserted += 1;
                let inv = f.inv(&w[p]).expect("nonzero pivot");
                let mut combo = c;
                combo.push(BigRational::one());
                let combo = vec_scale(f, &combo, &inv);
                let w = vec_scale(f, &w, &inv);
                for row in &mut self.rows {
                    row.2.push(BigRational::zero());
                }
                self.rows.push((p, w, combo));
                Ok(idx)
            }
        }
    }

    /// Coordinates of `v` in terms of the inserted vectors, if in the span.
    pub fn express(&self, v: &[BigRational]) -> Option<Vec<BigRational>> {
        let f = self.field;
        let (w, c) = self.reduce(v);
        is_zero_vec(&w).then(|| c.iter().map(|x| f.neg(x)).collect())
    }

    fn reduce(&self, v: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let f = self.field;
        let mut w = v.to_vec();
        let mut c = zero_vec(self.inserted);
        for (p, row, combo) in &self.rows {
            if w[*p].is_zero() {
                continue;
            }
            let lambda = w[*p].clone();
            w = vec_sub(f, &w, &vec_scale(f, row, &lambda));
            c = vec_sub(f, &c, &vec_scale(f, combo, &lambda));
        }
        (w, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn prime_field_inverse() {
        let f = ScalarField::Prime(7);
        assert_eq!(f.inv(&q(3)), Some(q(5)));
        assert_eq!(f.normalize(BigRational::new(1.into(), 3.into())), q(5));
        assert_eq!(f.inv(&q(0)), None);
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let f = ScalarField::Rational;
        let a = vec![vec![q(2), q(1)], vec![q(7), q(4)]];
        let inv = inverse(f, &a).unwrap();
        assert_eq!(mat_mul(f, &a, &inv), identity(2));
        let singular = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(inverse(f, &singular).is_none());
        let f5 = ScalarField::Prime(5);
        let b = vec![vec![q(1), q(2)], vec![q(3), q(4)]];
        let inv = inverse(f5, &b).unwrap();
        assert_eq!(mat_mul(f5, &b, &inv), identity(2));
    }

    #[test]
    fn echelon_dependencies() {
        let f = ScalarField::Rational;
        let mut e = EchelonBasis::new(f);
        assert_eq!(e.insert(&[q(1), q(1), q(0)]), Ok(0));
        assert_eq!(e.insert(&[q(0), q(1), q(1)]), Ok(1));
        let dep = e.insert(&[q(2), q(5), q(3)]).unwrap_err();
        assert_eq!(dep, vec![q(2), q(3)]);
        assert_eq!(rank(f, &[vec![q(1), q(2)], vec![q(2), q(4)]]), 1);
    }
}
