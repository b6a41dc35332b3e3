//! Deliberately naive reimplementation of the ring arithmetic: schoolbook
//! polynomial multiplication over signed big integers, explicit long
//! division by the monic minimal polynomial, reduction mod `2^m` at the
//! end. No code is shared with the fast path in `ring`; agreement between
//! the two is what the cross-validation suites check.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Field parameters for the naive path, kept as plain integers.
#[derive(Debug, Clone)]
pub struct NaiveField {
    e: usize,
    c: Vec<BigInt>,
    n_pi: u32,
    m_bits: u32,
    modulus: BigInt,
}

/// An element on the naive side: `e` signed residues in `[0, 2^m)`.
pub type NaiveElement = Vec<BigInt>;

impl NaiveField {
    pub fn new(e: usize, eisenstein: &[BigInt], n_pi: u32) -> NaiveField {
        assert_eq!(eisenstein.len(), e);
        // same working size as the fast path so canonical forms compare
        let m_bits = n_pi.div_ceil(e as u32) + 2;
        NaiveField {
            e,
            c: eisenstein.to_vec(),
            n_pi,
            m_bits,
            modulus: BigInt::one() << m_bits,
        }
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn n_pi(&self) -> u32 {
        self.n_pi
    }

    fn reduce_int(&self, x: &BigInt) -> BigInt {
        let r = x % &self.modulus;
        if r.is_negative() {
            r + &self.modulus
        } else {
            r
        }
    }

    pub fn from_literals(&self, lits: &[BigInt]) -> NaiveElement {
        assert_eq!(lits.len(), self.e);
        lits.iter().map(|x| self.reduce_int(x)).collect()
    }

    pub fn zero(&self) -> NaiveElement {
        vec![BigInt::zero(); self.e]
    }

    pub fn one(&self) -> NaiveElement {
        let mut el = self.zero();
        el[0] = BigInt::one();
        el
    }

    pub fn pi(&self) -> NaiveElement {
        let mut el = self.zero();
        if self.e == 1 {
            el[0] = self.reduce_int(&-&self.c[0]);
        } else {
            el[1] = BigInt::one();
        }
        el
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> NaiveElement {
        (0..self.e)
            .map(|j| self.reduce_int(&(&a[j] + &b[j])))
            .collect()
    }

    pub fn neg(&self, a: &[BigInt]) -> NaiveElement {
        (0..self.e).map(|j| self.reduce_int(&-&a[j])).collect()
    }

    pub fn mul(&self, a: &[BigInt], b: &[BigInt]) -> NaiveElement {
        // schoolbook product
        let mut prod = vec![BigInt::zero(); 2 * self.e - 1];
        for i in 0..self.e {
            for j in 0..self.e {
                prod[i + j] += &a[i] * &b[j];
            }
        }
        // long division by the monic minimal polynomial
        for idx in (self.e..2 * self.e - 1).rev() {
            let q = std::mem::replace(&mut prod[idx], BigInt::zero());
            if q.is_zero() {
                continue;
            }
            for j in 0..self.e {
                let delta = &q * &self.c[j];
                prod[idx - self.e + j] -= delta;
            }
        }
        prod.truncate(self.e);
        prod.iter().map(|x| self.reduce_int(x)).collect()
    }

    /// Naive power: multiply `n` times.
    pub fn pow(&self, a: &[BigInt], n: u32) -> NaiveElement {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Coefficient `j` matters only modulo `2^ceil((n - j)/e)` at precision
    /// `pi^n`.
    pub fn canonical_at(&self, a: &[BigInt], n: u32) -> NaiveElement {
        (0..self.e)
            .map(|j| {
                let bits = (n as i64 - j as i64 + self.e as i64 - 1) / self.e as i64;
                if bits <= 0 {
                    BigInt::zero()
                } else {
                    let m = BigInt::one() << (bits as u32);
                    let r = &a[j] % &m;
                    if r.is_negative() {
                        r + &m
                    } else {
                        r
                    }
                }
            })
            .collect()
    }

    pub fn canonical(&self, a: &[BigInt]) -> NaiveElement {
        self.canonical_at(a, self.n_pi)
    }

    /// Inverse of an odd residue modulo `2^m` through the group exponent:
    /// `x^(2^(m-2) - 1)` inverts `x` in `(Z/2^m)^*`.
    fn inv_odd(&self, x: &BigInt) -> BigInt {
        let x = self.reduce_int(x);
        let exp = (BigInt::one() << (self.m_bits - 2)) - BigInt::one();
        x.modpow(&exp, &self.modulus)
    }

    /// Division by pi for an element with even constant coefficient, by
    /// solving `pi * b = a` against the defining relation.
    pub fn div_pi(&self, a: &[BigInt]) -> NaiveElement {
        let half: BigInt = &a[0] >> 1u32;
        let c0_half: BigInt = &self.c[0] / 2;
        let inv: BigInt = self.inv_odd(&c0_half);
        let top: BigInt = self.reduce_int(&-(half * inv));
        let mut b = vec![BigInt::zero(); self.e];
        for j in 1..self.e {
            b[j - 1] = self.reduce_int(&(&a[j] + &top * &self.c[j]));
        }
        b[self.e - 1] = top;
        b
    }

    pub fn eq_at_precision(&self, a: &[BigInt], b: &[BigInt]) -> bool {
        self.canonical(a) == self.canonical(b)
    }

    /// pi-adic valuation, `None` when indistinguishable from zero.
    pub fn valuation(&self, a: &[BigInt]) -> Option<u32> {
        let canon = self.canonical(a);
        let mut best: Option<u32> = None;
        for (j, x) in canon.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let tz = x.magnitude().trailing_zeros().unwrap_or(0) as u32;
            let v = self.e as u32 * tz + j as u32;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        best.filter(|&v| v < self.n_pi)
    }

    /// `sum a_i b_i^d` evaluated entirely on the naive side.
    pub fn evaluate_form(
        &self,
        coefficients: &[Vec<BigInt>],
        d: u32,
        assignment: &[Vec<BigInt>],
    ) -> NaiveElement {
        assert_eq!(coefficients.len(), assignment.len());
        let mut acc = self.zero();
        for (a, b) in coefficients.iter().zip(assignment) {
            let a = self.from_literals(a);
            let b = self.from_literals(b);
            acc = self.add(&acc, &self.mul(&a, &self.pow(&b, d)));
        }
        acc
    }
}

/// Certificate check performed entirely with the naive arithmetic.
#[allow(clippy::too_many_arguments)]
pub fn naive_verify(
    e: usize,
    eisenstein: &[BigInt],
    n_pi: u32,
    d: u32,
    coefficients: &[Vec<BigInt>],
    assignment: &[Vec<BigInt>],
    n_target: u32,
    pivot: usize,
) -> bool {
    let nf = NaiveField::new(e, eisenstein, n_pi);
    let value = nf.evaluate_form(coefficients, d, assignment);
    let ok_valuation = match nf.valuation(&value) {
        None => true,
        Some(v) => v >= n_target,
    };
    let pivot_unit =
        pivot < assignment.len() && nf.valuation(&nf.from_literals(&assignment[pivot])) == Some(0);
    ok_valuation && pivot_unit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nf_sqrt2() -> NaiveField {
        NaiveField::new(2, &[BigInt::from(-2), BigInt::zero()], 16)
    }

    #[test]
    fn naive_pi_squared_is_two() {
        let nf = nf_sqrt2();
        let pi = nf.pi();
        let two = nf.add(&nf.one(), &nf.one());
        assert!(nf.eq_at_precision(&nf.mul(&pi, &pi), &two));
        assert_eq!(nf.valuation(&two), Some(2));
    }

    #[test]
    fn naive_sixth_power() {
        let nf = nf_sqrt2();
        let a = nf.add(&nf.one(), &nf.pi());
        let p = nf.pow(&a, 6);
        let expected = nf.from_literals(&[BigInt::from(99), BigInt::from(70)]);
        assert!(nf.eq_at_precision(&p, &expected));
    }

    #[test]
    fn naive_valuation_of_zero() {
        let nf = nf_sqrt2();
        assert_eq!(nf.valuation(&nf.zero()), None);
        let a = nf.from_literals(&[BigInt::from(100), BigInt::from(70)]);
        assert_eq!(nf.valuation(&a), Some(3));
    }

    #[test]
    fn naive_verify_cancellation() {
        let e = 1;
        let eis = [BigInt::from(-2)];
        let coeffs = vec![vec![BigInt::from(5)], vec![BigInt::from(-5)]];
        let assignment = vec![vec![BigInt::one()], vec![BigInt::one()]];
        assert!(naive_verify(e, &eis, 16, 6, &coeffs, &assignment, 16, 0));
        // pivot out of range fails
        assert!(!naive_verify(e, &eis, 16, 6, &coeffs, &assignment, 16, 2));
    }
}
