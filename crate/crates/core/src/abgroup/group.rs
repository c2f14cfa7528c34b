use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::AbGroupError;

/// `Z^free_rank x Z_{d_1} x ... x Z_{d_s}` with `d_1 | d_2 | ... | d_s`, each `d_i >= 2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FgAbelianGroup {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

/// Coordinate vector of an element. Torsion coordinates are kept reduced into
/// `[0, d_i)` by every constructor and operation on [`FgAbelianGroup`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement(Vec<BigInt>);

impl GroupElement {
    /// Unchecked; callers guarantee the coordinates are reduced.
    pub(crate) fn from_raw(coords: Vec<BigInt>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FgAbelianGroup {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>) -> Result<Self, AbGroupError> {
        for (i, d) in torsion.iter().enumerate() {
            if *d < BigInt::from(2) {
                return Err(AbGroupError::BadTorsion { index: i, value: d.clone() });
            }
            if i > 0 && !d.is_multiple_of(&torsion[i - 1]) {
                return Err(AbGroupError::DivisibilityChain {
                    index: i,
                    prev: torsion[i - 1].clone(),
                    value: d.clone(),
                });
            }
        }
        Ok(Self { free_rank, torsion })
    }

    pub fn from_u64(free_rank: usize, torsion: &[u64]) -> Result<Self, AbGroupError> {
        Self::new(free_rank, torsion.iter().map(|&d| BigInt::from(d)).collect())
    }

    pub fn free(rank: usize) -> Self {
        Self { free_rank: rank, torsion: Vec::new() }
    }

    /// `Z_d`; `d = 1` gives the trivial group.
    pub fn cyclic(d: u64) -> Self {
        if d <= 1 {
            Self::trivial()
        } else {
            Self { free_rank: 0, torsion: vec![BigInt::from(d)] }
        }
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    /// Number of coordinates, `free_rank + s`.
    pub fn ngens(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion.iter().product())
    }

    /// Order as a machine integer, if finite and it fits.
    pub fn order_u64(&self) -> Option<u64> {
        self.order().and_then(|o| o.to_u64())
    }

    /// Modulus of coordinate `i`, or `None` for a free coordinate.
    pub fn modulus(&self, i: usize) -> Option<&BigInt> {
        i.checked_sub(self.free_rank).map(|t| &self.torsion[t])
    }

    /// Generator order: `None` for free generators.
    pub fn generator_order(&self, i: usize) -> Option<&BigInt> {
        self.modulus(i)
    }

    /// Rows `d_j e_{free_rank + j}` spanning the relation lattice.
    pub fn relation_rows(&self) -> Vec<Vec<BigInt>> {
        let n = self.ngens();
        self.torsion
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let mut row = vec![BigInt::zero(); n];
                row[self.free_rank + j] = d.clone();
                row
            })
            .collect()
    }

    pub fn reduce_in_place(&self, coords: &mut [BigInt]) {
        for (j, d) in self.torsion.iter().enumerate() {
            let x = &mut coords[self.free_rank + j];
            *x = x.mod_floor(d);
        }
    }

    pub fn element(&self, mut coords: Vec<BigInt>) -> Result<GroupElement, AbGroupError> {
        if coords.len() != self.ngens() {
            return Err(AbGroupError::Shape { expected: self.ngens(), found: coords.len() });
        }
        self.reduce_in_place(&mut coords);
        Ok(GroupElement(coords))
    }

    pub fn element_i64(&self, coords: &[i64]) -> Result<GroupElement, AbGroupError> {
        self.element(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// True when `x` has the right length and reduced torsion coordinates.
    pub fn contains(&self, x: &GroupElement) -> bool {
        x.len() == self.ngens()
            && self.torsion.iter().enumerate().all(|(j, d)| {
                let c = &x.0[self.free_rank + j];
                !c.is_negative() && c < d
            })
    }

    pub fn check(&self, x: &GroupElement) -> Result<(), AbGroupError> {
        if x.len() != self.ngens() {
            return Err(AbGroupError::Shape { expected: self.ngens(), found: x.len() });
        }
        if !self.contains(x) {
            return Err(AbGroupError::NotReduced(x.to_string()));
        }
        Ok(())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![BigInt::zero(); self.ngens()])
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        let mut c = vec![BigInt::zero(); self.ngens()];
        c[i] = BigInt::one();
        self.reduce_in_place(&mut c);
        GroupElement(c)
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        (0..self.ngens()).map(|i| self.generator(i)).collect()
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let mut c: Vec<BigInt> = x.0.iter().zip(&y.0).map(|(a, b)| a + b).collect();
        self.reduce_in_place(&mut c);
        GroupElement(c)
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let mut c: Vec<BigInt> = x.0.iter().zip(&y.0).map(|(a, b)| a - b).collect();
        self.reduce_in_place(&mut c);
        GroupElement(c)
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        let mut c: Vec<BigInt> = x.0.iter().map(|a| -a).collect();
        self.reduce_in_place(&mut c);
        GroupElement(c)
    }

    pub fn scale(&self, x: &GroupElement, k: &BigInt) -> GroupElement {
        let mut c: Vec<BigInt> = x.0.iter().map(|a| a * k).collect();
        self.reduce_in_place(&mut c);
        GroupElement(c)
    }

    /// Reduces an arbitrary integer vector into normal form.
    pub fn normalize(&self, coords: &[BigInt]) -> GroupElement {
        let mut c = coords.to_vec();
        self.reduce_in_place(&mut c);
        GroupElement(c)
    }

    /// Position of `x` in lexicographic order of reduced coordinates. Only
    /// meaningful for finite groups whose order fits in a `u64`.
    pub fn index_of(&self, x: &GroupElement) -> u64 {
        debug_assert!(self.is_finite());
        self.torsion.iter().zip(&x.0).fold(0u64, |acc, (d, c)| {
            acc * d.to_u64().expect("modulus fits u64") + c.to_u64().expect("reduced coordinate")
        })
    }

    /// Inverse of [`FgAbelianGroup::index_of`].
    pub fn element_at(&self, mut index: u64) -> GroupElement {
        debug_assert!(self.is_finite());
        let mut c = vec![BigInt::zero(); self.ngens()];
        for (j, d) in self.torsion.iter().enumerate().rev() {
            let d = d.to_u64().expect("modulus fits u64");
            c[j] = BigInt::from(index % d);
            index /= d;
        }
        GroupElement(c)
    }

    /// All elements of a finite group in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        let n = self.order_u64().expect("finite group of machine-sized order");
        (0..n).map(move |i| self.element_at(i))
    }

    /// Order of an element, `None` if infinite.
    pub fn element_order(&self, x: &GroupElement) -> Option<BigInt> {
        if x.0[..self.free_rank].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(self.torsion.iter().zip(&x.0[self.free_rank..]).fold(BigInt::one(), |acc, (d, c)| {
            let o = d / d.gcd(c);
            acc.lcm(&o)
        }))
    }
}

impl fmt::Debug for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank == 1 {
            parts.push("Z".to_string());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z_{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}
