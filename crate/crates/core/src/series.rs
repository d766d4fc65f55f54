//! Power series in one variable, truncated at a fixed degree.
//!
//! Every computation in this crate happens in the ring `K[[t]] / t^{N+1}`:
//! coefficients are scalars, degree `N` is chosen up front, and all products
//! discard terms beyond it.  Operations between series require matching
//! truncation degrees; use [`Series::truncate`] to line mismatched ones up
//! (e.g. after a derivative, which genuinely loses one degree).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Series<K> {
    /// `coeffs[m]` is the coefficient of `t^m`; length is `degree + 1`.
    coeffs: Vec<K>,
}

impl<K: Scalar> Series<K> {
    pub fn zero(degree: usize) -> Self {
        Series { coeffs: vec![K::zero(); degree + 1] }
    }

    pub fn one(degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = K::one();
        s
    }

    pub fn constant(c: K, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = c;
        s
    }

    /// The monomial `c·t^k`, or zero if `k` exceeds the degree.
    pub fn monomial(c: K, k: usize, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        if k <= degree {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<K>) -> Self {
        assert!(!coeffs.is_empty());
        Series { coeffs }
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(usize) -> K) -> Self {
        Series { coeffs: (0..=degree).map(|m| f(m)).collect() }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `t^m` (zero beyond the truncation).
    pub fn coeff(&self, m: usize) -> K {
        self.coeffs.get(m).cloned().unwrap_or_else(K::zero)
    }

    pub fn coeffs(&self) -> &[K] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, m: usize, c: K) {
        self.coeffs[m] = c;
    }

    pub fn add_to_coeff(&mut self, m: usize, c: K) {
        if m < self.coeffs.len() {
            let cur = self.coeffs[m].clone();
            self.coeffs[m] = cur + c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Restrict to a (weakly) smaller degree.
    pub fn truncate(&self, degree: usize) -> Self {
        assert!(degree <= self.degree());
        Series { coeffs: self.coeffs[..=degree].to_vec() }
    }

    pub fn scale(&self, c: &K) -> Self {
        Series { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// Multiply by `t^k`, truncating at the original degree.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![K::zero(); n];
        for m in k..n {
            coeffs[m] = self.coeffs[m - k].clone();
        }
        Series { coeffs }
    }

    fn assert_same_degree(&self, other: &Self) {
        assert_eq!(
            self.coeffs.len(),
            other.coeffs.len(),
            "series truncation degrees must match"
        );
    }

    /// Formal derivative; the result's reliable degree is one lower.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Series { coeffs: vec![K::zero()] };
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(m, c)| K::from_int((m + 1) as i64) * c.clone())
            .collect();
        Series { coeffs }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::NonUnitConstantTerm { constant: self.coeffs[0].to_string() });
        }
        let n = self.coeffs.len();
        let mut inv = vec![K::zero(); n];
        inv[0] = K::one() / self.coeffs[0].clone();
        for m in 1..n {
            let mut acc = K::zero();
            for k in 1..=m {
                acc = acc + self.coeffs[k].clone() * inv[m - k].clone();
            }
            inv[m] = -acc / self.coeffs[0].clone();
        }
        Ok(Series { coeffs: inv })
    }

    /// `exp` of a series with zero constant term.  The recurrence
    /// `n·e_n = Σ_{k=1}^{n} k·a_k·e_{n-k}` only ever divides by integers, so
    /// this is exact in rational mode.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Numeric(format!(
                "series exp needs zero constant term, got {}",
                self.coeffs[0]
            )));
        }
        let n = self.coeffs.len();
        let mut e = vec![K::zero(); n];
        e[0] = K::one();
        for m in 1..n {
            let mut acc = K::zero();
            for k in 1..=m {
                acc = acc + K::from_int(k as i64) * self.coeffs[k].clone() * e[m - k].clone();
            }
            e[m] = acc / K::from_int(m as i64);
        }
        Ok(Series { coeffs: e })
    }

    /// `log` of a series with constant term one.
    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Numeric(format!(
                "series log needs constant term one, got {}",
                self.coeffs[0]
            )));
        }
        let n = self.coeffs.len();
        let mut l = vec![K::zero(); n];
        for m in 1..n {
            let mut acc = K::from_int(m as i64) * self.coeffs[m].clone();
            for k in 1..m {
                acc = acc - K::from_int(k as i64) * l[k].clone() * self.coeffs[m - k].clone();
            }
            l[m] = acc / K::from_int(m as i64);
        }
        Ok(Series { coeffs: l })
    }

    /// Evaluate at a scalar by Horner's rule.
    pub fn eval(&self, t: &K) -> K {
        let mut acc = K::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t.clone() + c.clone();
        }
        acc
    }

    /// Largest `|coefficient|` of `self - other` through `through_degree`,
    /// viewed in `f64`.  The workhorse of identity checking.
    pub fn max_coeff_distance(&self, other: &Self, through_degree: usize) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..=through_degree {
            let d = (self.coeff(m) - other.coeff(m)).abs().to_f64();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

impl<K: Scalar> Add for &Series<K> {
    type Output = Series<K>;
    fn add(self, rhs: &Series<K>) -> Series<K> {
        self.assert_same_degree(rhs);
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<K: Scalar> Sub for &Series<K> {
    type Output = Series<K>;
    fn sub(self, rhs: &Series<K>) -> Series<K> {
        self.assert_same_degree(rhs);
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<K: Scalar> Mul for &Series<K> {
    type Output = Series<K>;
    fn mul(self, rhs: &Series<K>) -> Series<K> {
        self.assert_same_degree(rhs);
        let n = self.coeffs.len();
        let mut coeffs = vec![K::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                coeffs[i + j] =
                    coeffs[i + j].clone() + self.coeffs[i].clone() * rhs.coeffs[j].clone();
            }
        }
        Series { coeffs }
    }
}

impl<K: Scalar> Neg for &Series<K> {
    type Output = Series<K>;
    fn neg(self) -> Series<K> {
        Series { coeffs: self.coeffs.iter().map(|a| -a.clone()).collect() }
    }
}

impl<K: Scalar> Add for Series<K> {
    type Output = Series<K>;
    fn add(self, rhs: Series<K>) -> Series<K> {
        &self + &rhs
    }
}

impl<K: Scalar> Sub for Series<K> {
    type Output = Series<K>;
    fn sub(self, rhs: Series<K>) -> Series<K> {
        &self - &rhs
    }
}

impl<K: Scalar> Mul for Series<K> {
    type Output = Series<K>;
    fn mul(self, rhs: Series<K>) -> Series<K> {
        &self * &rhs
    }
}

impl<K: Scalar> Neg for Series<K> {
    type Output = Series<K>;
    fn neg(self) -> Series<K> {
        -&self
    }
}

impl<K: Scalar> fmt::Display for Series<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            match m {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{m}")?,
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}
