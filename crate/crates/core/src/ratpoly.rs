//! Exact rational polynomial arithmetic used by the identity checks.
//!
//! Two small representations are enough for this crate: a Laurent
//! polynomial in one variable (negative powers appear when the root
//! substitution `(n-2)q = -(n-2)w + w⁻¹ + n - 1` is expanded) and a dense
//! bivariate polynomial in `(p, q)`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Shorthand for an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Laurent polynomial over `BigRational` in a single variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    /// Exponent of the first stored coefficient.
    lo: i64,
    coeffs: Vec<BigRational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { lo: 0, coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, 0)
    }

    /// The monomial `c · x^k`.
    pub fn term(c: BigRational, k: i64) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            LaurentPoly { lo: k, coeffs: vec![c] }
        }
    }

    pub fn var() -> Self {
        Self::term(BigRational::one(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> BigRational {
        if k < self.lo || k >= self.lo + self.coeffs.len() as i64 {
            BigRational::zero()
        } else {
            self.coeffs[(k - self.lo) as usize].clone()
        }
    }

    /// Inclusive exponent range of nonzero terms, `None` when zero.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.lo, self.lo + self.coeffs.len() as i64 - 1))
        }
    }

    fn normalize(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let leading_zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if leading_zeros > 0 {
            self.coeffs.drain(..leading_zeros);
            self.lo += leading_zeros as i64;
        }
        if self.coeffs.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(BigRational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        LaurentPoly {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
        .normalize()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| rational_to_f64(c) * x.powi((self.lo + i as i64) as i32))
            .sum()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num: f64 = r.numer().to_string().parse().unwrap();
    let den: f64 = r.denom().to_string().parse().unwrap();
    num / den
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(rhs.lo);
        let hi = (self.lo + self.coeffs.len() as i64).max(rhs.lo + rhs.coeffs.len() as i64);
        let mut coeffs = vec![BigRational::zero(); (hi - lo) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.lo - lo) as usize + i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[(rhs.lo - lo) as usize + i] += c;
        }
        LaurentPoly { lo, coeffs }.normalize()
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let lo = self.lo + rhs.lo;
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly { lo, coeffs }.normalize()
    }
}

/// Dense bivariate polynomial in `(p, q)` over `BigRational`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly2 {
    coeffs: BTreeMap<(u32, u32), BigRational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { coeffs: BTreeMap::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, 0, 0)
    }

    /// The monomial `c · p^i q^j`.
    pub fn term(c: BigRational, i: u32, j: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert((i, j), c);
        }
        Poly2 { coeffs }
    }

    pub fn var_p() -> Self {
        Self::term(BigRational::one(), 1, 0)
    }

    pub fn var_q() -> Self {
        Self::term(BigRational::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly2 {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    fn insert(coeffs: &mut BTreeMap<(u32, u32), BigRational>, k: (u32, u32), v: BigRational) {
        let entry = coeffs.entry(k).or_insert_with(BigRational::zero);
        *entry += v;
        if entry.is_zero() {
            coeffs.remove(&k);
        }
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &rhs.coeffs {
            Poly2::insert(&mut coeffs, *k, v.clone());
        }
        Poly2 { coeffs }
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &rhs.coeffs {
            Poly2::insert(&mut coeffs, *k, -v.clone());
        }
        Poly2 { coeffs }
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut coeffs = BTreeMap::new();
        for ((i1, j1), a) in &self.coeffs {
            for ((i2, j2), b) in &rhs.coeffs {
                Poly2::insert(&mut coeffs, (i1 + i2, j1 + j2), a * b);
            }
        }
        Poly2 { coeffs }
    }
}
