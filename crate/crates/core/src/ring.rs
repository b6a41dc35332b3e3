//! Exact truncated arithmetic in the ring of integers `O_K` of a totally
//! ramified extension `K` of the 2-adic numbers.
//!
//! The field is presented by an Eisenstein polynomial
//! `pi^e + c_{e-1} pi^{e-1} + ... + c_0 = 0` with every `c_i` even and
//! `c_0 = 2 (mod 4)`. Elements are polynomials of degree `< e` in the
//! uniformizer `pi` with coefficients held modulo `2^m_coeff`, and all
//! results are canonical at precision `pi^n_pi`: coefficient `j` is stored
//! modulo `2^ceil((n_pi - j)/e)`, which pins the element exactly modulo
//! `pi^n_pi` and nothing more.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// Errors from field construction and element operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("not an Eisenstein polynomial over Z_2: {0}")]
    NotEisenstein(&'static str),
    #[error("working precision {given} too small, need at least {needed} pi-digits")]
    PrecisionTooSmall { given: u32, needed: u32 },
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("element is zero at working precision")]
    ZeroElement,
    #[error("requested {requested} digits but working precision is {n_pi}")]
    PrecisionExceeded { requested: u32, n_pi: u32 },
    #[error("element is not a unit")]
    NotAUnit,
}

/// pi-adic valuation of an element, truncated at the working precision.
///
/// Elements indistinguishable from zero at precision `n_pi` get the
/// `AtLeastPrecision` marker rather than an integer; the derived `Ord`
/// places it above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    AtLeastPrecision,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeastPrecision => None,
        }
    }

    pub fn is_at_least_precision(self) -> bool {
        matches!(self, Valuation::AtLeastPrecision)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeastPrecision => write!(f, "at_least_precision"),
        }
    }
}

struct FieldInner {
    e: usize,
    eisenstein: Vec<BigInt>,
    n_pi: u32,
    m_coeff: u32,
    /// 2^m_coeff - 1
    coeff_mask: BigUint,
    /// 2^m_coeff
    coeff_mod: BigUint,
    /// canonical masks per coefficient: low ceil((n_pi - j)/e) bits
    canon_mask: Vec<BigUint>,
    /// c_j mod 2^m_coeff
    c_red: Vec<BigUint>,
    /// -c_j mod 2^m_coeff  (pi^e = sum_j neg_c[j] pi^j)
    neg_c: Vec<BigUint>,
    /// inverse of (-c_0)/2 modulo 2^m_coeff
    inv_negc0_half: BigUint,
    /// coefficients of the unit u with 2 = u * pi^e
    u_coeffs: Vec<BigUint>,
}

/// A totally ramified extension of Q_2 given by an Eisenstein polynomial,
/// together with the working precision. Cheap to clone (shared descriptor).
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.e == other.inner.e
                && self.inner.n_pi == other.inner.n_pi
                && self.inner.eisenstein == other.inner.eisenstein)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Field {{ e: {}, eisenstein: {:?}, n_pi: {} }}",
            self.inner.e, self.inner.eisenstein, self.inner.n_pi
        )
    }
}

fn mask_bits(x: &BigUint, bits: u32) -> BigUint {
    x & &((BigUint::one() << bits) - BigUint::one())
}

/// Inverse of an odd residue modulo 2^bits by Newton iteration.
fn inv_odd_mod_pow2(c: &BigUint, bits: u32) -> BigUint {
    assert!(c.bit(0), "inverse of an even residue modulo 2^k");
    let mut inv = BigUint::one();
    let mut good = 1u32;
    let two = BigUint::from(2u32);
    while good < bits {
        good = (2 * good).min(bits);
        let m = (BigUint::one() << good) - BigUint::one();
        let prod = (c * &inv) & &m;
        inv = (&inv * ((&two + &m + BigUint::one() - prod) & &m)) & &m;
    }
    mask_bits(&inv, bits)
}

impl Field {
    /// Default working precision for a ramification degree: `8e + 16`.
    pub fn default_precision(e: usize) -> u32 {
        8 * e as u32 + 16
    }

    /// Validates the Eisenstein data and derives the working parameters,
    /// including the unit `u` with `2 = u * pi^e`.
    pub fn new(e: usize, eisenstein: &[BigInt], n_pi: u32) -> Result<Field, RingError> {
        if e < 1 {
            return Err(RingError::NotEisenstein("degree must be at least 1"));
        }
        if eisenstein.len() != e {
            return Err(RingError::NotEisenstein(
                "coefficient list length must equal the degree",
            ));
        }
        let four = BigInt::from(4);
        let two = BigInt::from(2);
        for (j, c) in eisenstein.iter().enumerate() {
            if (c % &two) != BigInt::zero() {
                return Err(RingError::NotEisenstein("every coefficient must be even"));
            }
            if j == 0 {
                let r = ((c % &four) + &four) % &four;
                if r != two {
                    return Err(RingError::NotEisenstein("constant term must be 2 modulo 4"));
                }
            }
        }
        let needed = 2 * e as u32 + 2;
        if n_pi < needed {
            return Err(RingError::PrecisionTooSmall {
                given: n_pi,
                needed,
            });
        }

        let m_coeff = n_pi.div_ceil(e as u32) + 2;
        let coeff_mod = BigUint::one() << m_coeff;
        let coeff_mask = &coeff_mod - BigUint::one();
        let canon_bits: Vec<u32> = (0..e)
            .map(|j| (n_pi - j as u32).div_ceil(e as u32))
            .collect();
        let canon_mask: Vec<BigUint> = canon_bits
            .into_iter()
            .map(|b| (BigUint::one() << b) - BigUint::one())
            .collect();

        let signed_mod = BigInt::from(coeff_mod.clone());
        let reduce = |x: &BigInt| -> BigUint {
            let r = ((x % &signed_mod) + &signed_mod) % &signed_mod;
            r.to_biguint().expect("reduced residue is nonnegative")
        };
        let c_red: Vec<BigUint> = eisenstein.iter().map(reduce).collect();
        let neg_c: Vec<BigUint> = c_red
            .iter()
            .map(|c| (&coeff_mod - c) & &coeff_mask)
            .collect();

        // (-c_0)/2 is odd because c_0 = 2 (mod 4).
        let negc0_half = &neg_c[0] >> 1;
        let inv_negc0_half = inv_odd_mod_pow2(&negc0_half, m_coeff);

        let mut inner = FieldInner {
            e,
            eisenstein: eisenstein.to_vec(),
            n_pi,
            m_coeff,
            coeff_mask,
            coeff_mod,
            canon_mask,
            c_red,
            neg_c,
            inv_negc0_half,
            u_coeffs: Vec::new(),
        };

        // u = 2 / pi^e, obtained by dividing the element 2 by pi e times.
        let mut two_el = vec![BigUint::zero(); e];
        two_el[0] = BigUint::from(2u32);
        let mut u = two_el;
        for _ in 0..e {
            u = div_pi_raw(&inner, &u);
        }
        let u = canon_raw(&inner, &u);
        debug_assert!(u[0].bit(0), "u = 2/pi^e must be a unit");
        if !u[0].bit(0) {
            return Err(RingError::NotEisenstein("2/pi^e is not a unit"));
        }
        inner.u_coeffs = u;

        Ok(Field {
            inner: Arc::new(inner),
        })
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(e: usize, eisenstein: &[i64], n_pi: u32) -> Result<Field, RingError> {
        let c: Vec<BigInt> = eisenstein.iter().map(|&x| BigInt::from(x)).collect();
        Field::new(e, &c, n_pi)
    }

    pub fn e(&self) -> usize {
        self.inner.e
    }

    pub fn n_pi(&self) -> u32 {
        self.inner.n_pi
    }

    pub fn m_coeff(&self) -> u32 {
        self.inner.m_coeff
    }

    pub fn eisenstein(&self) -> &[BigInt] {
        &self.inner.eisenstein
    }

    /// The unit `u` with `2 = u * pi^e`.
    pub fn unit_u(&self) -> RingElement {
        RingElement {
            field: self.clone(),
            coeffs: self.inner.u_coeffs.clone(),
        }
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            field: self.clone(),
            coeffs: vec![BigUint::zero(); self.inner.e],
        }
    }

    pub fn one(&self) -> RingElement {
        self.from_int(1)
    }

    pub fn two(&self) -> RingElement {
        self.from_int(2)
    }

    pub fn from_int(&self, x: i64) -> RingElement {
        self.from_bigint(&BigInt::from(x))
    }

    pub fn from_bigint(&self, x: &BigInt) -> RingElement {
        let mut coeffs = vec![BigUint::zero(); self.inner.e];
        let m = BigInt::from(self.inner.coeff_mod.clone());
        let r = ((x % &m) + &m) % &m;
        coeffs[0] = r.to_biguint().expect("reduced residue is nonnegative");
        RingElement {
            field: self.clone(),
            coeffs: canon_raw(&self.inner, &coeffs),
        }
    }

    /// Element from a literal `[a_0, ..., a_{e-1}]` meaning `sum a_j pi^j`.
    /// Negative and oversized entries are reduced modulo `2^m_coeff`.
    pub fn element(&self, literal: &[BigInt]) -> Result<RingElement, RingError> {
        if literal.len() != self.inner.e {
            return Err(RingError::NotEisenstein(
                "element literal length must equal the degree",
            ));
        }
        let m = BigInt::from(self.inner.coeff_mod.clone());
        let coeffs: Vec<BigUint> = literal
            .iter()
            .map(|x| {
                let r = ((x % &m) + &m) % &m;
                r.to_biguint().expect("reduced residue is nonnegative")
            })
            .collect();
        Ok(RingElement {
            field: self.clone(),
            coeffs: canon_raw(&self.inner, &coeffs),
        })
    }

    pub fn element_i64(&self, literal: &[i64]) -> Result<RingElement, RingError> {
        let lits: Vec<BigInt> = literal.iter().map(|&x| BigInt::from(x)).collect();
        self.element(&lits)
    }

    /// The uniformizer as an element (for e = 1 this is `-c_0`).
    pub fn pi(&self) -> RingElement {
        let mut coeffs = vec![BigUint::zero(); self.inner.e];
        if self.inner.e == 1 {
            coeffs[0] = self.inner.neg_c[0].clone();
        } else {
            coeffs[1] = BigUint::one();
        }
        RingElement {
            field: self.clone(),
            coeffs: canon_raw(&self.inner, &coeffs),
        }
    }

    pub fn pi_pow(&self, t: u32) -> RingElement {
        self.pi().pow(t as u64)
    }

    /// Reconstruct an element from pi-adic digits in {0,1}.
    pub fn from_digits(&self, digits: &[u8]) -> RingElement {
        let pi = self.pi();
        let mut acc = self.zero();
        let mut p = self.one();
        for &d in digits {
            if d != 0 {
                acc = acc.add(&p);
            }
            p = p.mul(&pi);
        }
        acc
    }
}

fn canon_raw(f: &FieldInner, coeffs: &[BigUint]) -> Vec<BigUint> {
    (0..f.e).map(|j| &coeffs[j] & &f.canon_mask[j]).collect()
}

fn add_raw(f: &FieldInner, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    (0..f.e).map(|j| (&a[j] + &b[j]) & &f.coeff_mask).collect()
}

fn neg_raw(f: &FieldInner, a: &[BigUint]) -> Vec<BigUint> {
    (0..f.e)
        .map(|j| (&f.coeff_mod - &a[j]) & &f.coeff_mask)
        .collect()
}

fn mul_raw(f: &FieldInner, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let e = f.e;
    let mut prod = vec![BigUint::zero(); 2 * e - 1];
    for i in 0..e {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..e {
            if b[j].is_zero() {
                continue;
            }
            prod[i + j] = (&prod[i + j] + (&a[i] * &b[j])) & &f.coeff_mask;
        }
    }
    // Rewrite pi^idx for idx >= e via pi^e = sum_j neg_c[j] pi^j.
    for idx in (e..2 * e - 1).rev() {
        if prod[idx].is_zero() {
            continue;
        }
        let t = std::mem::replace(&mut prod[idx], BigUint::zero());
        for j in 0..e {
            if f.neg_c[j].is_zero() {
                continue;
            }
            prod[idx - e + j] = (&prod[idx - e + j] + (&t * &f.neg_c[j])) & &f.coeff_mask;
        }
    }
    prod.truncate(e);
    prod
}

/// Divide by pi, assuming the constant coefficient is even. The quotient is
/// exact at precision `n_pi` for the canonical representative of the input.
fn div_pi_raw(f: &FieldInner, a: &[BigUint]) -> Vec<BigUint> {
    assert!(!a[0].bit(0), "division by pi of an element with odd a_0");
    let e = f.e;
    let mut b = vec![BigUint::zero(); e];
    let top = ((&a[0] >> 1) * &f.inv_negc0_half) & &f.coeff_mask;
    for j in 1..e {
        b[j - 1] = (&a[j] + (&top * &f.c_red[j])) & &f.coeff_mask;
    }
    b[e - 1] = top;
    b
}

fn valuation_raw(f: &FieldInner, canon: &[BigUint]) -> Valuation {
    let mut best: Option<u32> = None;
    for (j, c) in canon.iter().enumerate() {
        if let Some(tz) = c.trailing_zeros() {
            let v = f.e as u32 * tz as u32 + j as u32;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    match best {
        Some(v) if v < f.n_pi => Valuation::Finite(v),
        _ => Valuation::AtLeastPrecision,
    }
}

/// An element of `O_K` truncated to the working precision, canonical form.
#[derive(Clone)]
pub struct RingElement {
    field: Field,
    coeffs: Vec<BigUint>,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}

impl Eq for RingElement {}

impl Hash for RingElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.inner.e.hash(state);
        self.field.inner.n_pi.hash(state);
        for c in &self.coeffs {
            c.to_bytes_le().hash(state);
        }
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement[")?;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*pi")?,
                _ => write!(f, "{c}*pi^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl RingElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Canonical coefficients (coefficient `j` reduced mod `2^ceil((n_pi-j)/e)`).
    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn to_literals(&self) -> Vec<BigInt> {
        self.coeffs
            .iter()
            .map(|c| BigInt::from(c.clone()))
            .collect()
    }

    fn assert_same_field(&self, other: &RingElement) {
        assert!(
            self.field == other.field,
            "ring operation on elements of different fields"
        );
    }

    pub fn checked_add(&self, other: &RingElement) -> Result<RingElement, RingError> {
        if self.field != other.field {
            return Err(RingError::FieldMismatch);
        }
        Ok(self.add(other))
    }

    pub fn checked_mul(&self, other: &RingElement) -> Result<RingElement, RingError> {
        if self.field != other.field {
            return Err(RingError::FieldMismatch);
        }
        Ok(self.mul(other))
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        self.assert_same_field(other);
        let f = &self.field.inner;
        RingElement {
            field: self.field.clone(),
            coeffs: canon_raw(f, &add_raw(f, &self.coeffs, &other.coeffs)),
        }
    }

    pub fn neg(&self) -> RingElement {
        let f = &self.field.inner;
        RingElement {
            field: self.field.clone(),
            coeffs: canon_raw(f, &neg_raw(f, &self.coeffs)),
        }
    }

    pub fn sub(&self, other: &RingElement) -> RingElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElement) -> RingElement {
        self.assert_same_field(other);
        let f = &self.field.inner;
        RingElement {
            field: self.field.clone(),
            coeffs: canon_raw(f, &mul_raw(f, &self.coeffs, &other.coeffs)),
        }
    }

    /// Power by repeated squaring.
    pub fn pow(&self, n: u64) -> RingElement {
        let mut result = self.field.one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// pi-adic valuation: `min_j (e * v_2(a_j) + j)`, or `AtLeastPrecision`.
    pub fn valuation(&self) -> Valuation {
        valuation_raw(&self.field.inner, &self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_at_least_precision()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// Split `a = pi^l * w` with `w` a unit; `w` is exact at `n_pi - l`.
    pub fn unit_part(&self) -> Result<(u32, RingElement), RingError> {
        match self.valuation() {
            Valuation::AtLeastPrecision => Err(RingError::ZeroElement),
            Valuation::Finite(l) => {
                let w = self.div_pi_pow(l)?;
                debug_assert!(w.is_unit());
                Ok((l, w))
            }
        }
    }

    /// Divide by `pi^t`; requires valuation at least `t`. The quotient is the
    /// canonical representative of an exact quotient at precision `n_pi`.
    pub fn div_pi_pow(&self, t: u32) -> Result<RingElement, RingError> {
        if t == 0 {
            return Ok(self.clone());
        }
        match self.valuation() {
            Valuation::Finite(v) if v < t => return Err(RingError::NotAUnit),
            _ => {}
        }
        let f = &self.field.inner;
        let mut cur = self.coeffs.clone();
        for _ in 0..t {
            if cur[0].bit(0) {
                return Err(RingError::NotAUnit);
            }
            cur = div_pi_raw(f, &cur);
        }
        Ok(RingElement {
            field: self.field.clone(),
            coeffs: canon_raw(f, &cur),
        })
    }

    /// Inverse of a unit by Newton iteration (every unit is 1 mod pi).
    pub fn inv_unit(&self) -> Result<RingElement, RingError> {
        if !self.is_unit() {
            return Err(RingError::NotAUnit);
        }
        let one = self.field.one();
        let two = self.field.two();
        let mut z = one.clone();
        for _ in 0..64 {
            let err = one.sub(&self.mul(&z));
            if err.is_zero() {
                return Ok(z);
            }
            z = z.mul(&two.sub(&self.mul(&z)));
        }
        Err(RingError::NotAUnit)
    }

    /// First `n` pi-adic digits in {0,1}; round-trips through `from_digits`.
    pub fn digit_expansion(&self, n: u32) -> Result<Vec<u8>, RingError> {
        let f = &self.field.inner;
        if n > f.n_pi {
            return Err(RingError::PrecisionExceeded {
                requested: n,
                n_pi: f.n_pi,
            });
        }
        let mut cur = self.coeffs.clone();
        let mut digits = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let d = if cur[0].bit(0) { 1u8 } else { 0u8 };
            if d == 1 {
                cur[0] = &cur[0] - BigUint::one();
            }
            cur = div_pi_raw(f, &cur);
            digits.push(d);
        }
        Ok(digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> Field {
        Field::from_i64(1, &[-2], 16).unwrap()
    }

    fn q2_sqrt2() -> Field {
        Field::from_i64(2, &[-2, 0], 16).unwrap()
    }

    #[test]
    fn make_field_q2() {
        let f = q2();
        assert_eq!(f.e(), 1);
        assert_eq!(f.n_pi(), 16);
        // pi = 2 here, and 2 = u * pi with u = 1.
        assert_eq!(f.pi(), f.two());
        assert_eq!(f.unit_u(), f.one());
    }

    #[test]
    fn make_field_q2_sqrt2() {
        let f = q2_sqrt2();
        assert_eq!(f.e(), 2);
        // pi^2 = 2, so u = 1.
        assert_eq!(f.unit_u(), f.one());
        assert_eq!(f.pi().mul(&f.pi()), f.two());
    }

    #[test]
    fn make_field_rejects_non_eisenstein() {
        assert_eq!(
            Field::from_i64(2, &[3, 0], 16).unwrap_err(),
            RingError::NotEisenstein("every coefficient must be even")
        );
        assert_eq!(
            Field::from_i64(1, &[4], 16).unwrap_err(),
            RingError::NotEisenstein("constant term must be 2 modulo 4")
        );
        assert!(matches!(
            Field::from_i64(2, &[-2, 0], 5).unwrap_err(),
            RingError::PrecisionTooSmall {
                given: 5,
                needed: 6
            }
        ));
    }

    #[test]
    fn additive_inverse() {
        let f = q2_sqrt2();
        let a = f.element_i64(&[37, 1201]).unwrap();
        assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn two_is_u_pi_e() {
        for f in [
            q2(),
            q2_sqrt2(),
            Field::from_i64(2, &[2, 0], 16).unwrap(),
            Field::from_i64(2, &[2, -2], 16).unwrap(),
            Field::from_i64(3, &[-2, 0, 0], 20).unwrap(),
        ] {
            let e = f.e() as u32;
            assert_eq!(f.unit_u().mul(&f.pi_pow(e)), f.two());
            assert_eq!(f.two().valuation(), Valuation::Finite(e));
            assert!(f.unit_u().is_unit());
        }
    }

    #[test]
    fn pow_of_one_plus_pi() {
        // (1 + sqrt(2))^6 = 99 + 70 sqrt(2), and it is 1 + pi^2 mod pi^3.
        let f = q2_sqrt2();
        let a = f.one().add(&f.pi());
        let p = a.pow(6);
        assert_eq!(p, f.element_i64(&[99, 70]).unwrap());
        let diff = p.sub(&f.one().add(&f.pi_pow(2)));
        assert_eq!(diff.valuation(), Valuation::Finite(3));
        assert_eq!(a.pow(0), f.one());
    }

    #[test]
    fn steering_identity_all_k() {
        // (1 + pi^k)^d = 1 + pi^(2k) mod pi^(2k+1) for k < e.
        for (f, d) in [
            (q2_sqrt2(), 6u64),
            (Field::from_i64(3, &[-2, 0, 0], 40).unwrap(), 6),
            (Field::from_i64(3, &[-2, 0, 0], 40).unwrap(), 10),
            (Field::from_i64(2, &[2, -2], 32).unwrap(), 10),
        ] {
            for k in 0..f.e() as u32 {
                let lhs = f.one().add(&f.pi_pow(k)).pow(d);
                let rhs = f.one().add(&f.pi_pow(2 * k));
                let diff = lhs.sub(&rhs);
                match diff.valuation() {
                    Valuation::Finite(v) => assert!(v > 2 * k, "k={k} gave v={v}"),
                    Valuation::AtLeastPrecision => {}
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let f = q2_sqrt2();
        assert_eq!(f.pi().valuation(), Valuation::Finite(1));
        assert_eq!(f.two().valuation(), Valuation::Finite(2));
        let a = f.element_i64(&[100, 70]).unwrap();
        assert_eq!(a.valuation(), Valuation::Finite(3));
        assert_eq!(f.zero().valuation(), Valuation::AtLeastPrecision);
    }

    #[test]
    fn unit_part_examples() {
        let f = q2_sqrt2();
        let (l, w) = f.pi_pow(3).unit_part().unwrap();
        assert_eq!((l, &w), (3, &f.one()));
        let (l, w) = f.two().unit_part().unwrap();
        assert_eq!(l, 2);
        assert_eq!(w, f.unit_u());
        let a = f.element_i64(&[100, 70]).unwrap();
        let (l, w) = a.unit_part().unwrap();
        assert_eq!(l, 3);
        assert!(w.is_unit());
        assert_eq!(f.pi_pow(3).mul(&w), a);
        assert_eq!(f.zero().unit_part().unwrap_err(), RingError::ZeroElement);
    }

    #[test]
    fn digit_expansion_examples() {
        let f2 = q2_sqrt2();
        assert_eq!(f2.zero().digit_expansion(4).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(f2.two().digit_expansion(3).unwrap(), vec![0, 0, 1]);
        let f1 = q2();
        assert_eq!(f1.from_int(6).digit_expansion(4).unwrap(), vec![0, 1, 1, 0]);
        assert!(matches!(
            f1.from_int(6).digit_expansion(17).unwrap_err(),
            RingError::PrecisionExceeded { .. }
        ));
    }

    #[test]
    fn digit_round_trip() {
        let f = Field::from_i64(2, &[2, -2], 16).unwrap();
        let a = f.element_i64(&[173, 2511]).unwrap();
        let digits = a.digit_expansion(f.n_pi()).unwrap();
        assert_eq!(f.from_digits(&digits), a);
    }

    #[test]
    fn inv_unit_round_trip() {
        let f = Field::from_i64(3, &[-2, 0, 0], 24).unwrap();
        let w = f.element_i64(&[19, 4, 7]).unwrap();
        assert!(w.is_unit());
        assert_eq!(w.mul(&w.inv_unit().unwrap()), f.one());
        assert_eq!(f.pi().inv_unit().unwrap_err(), RingError::NotAUnit);
    }

    #[test]
    fn checked_ops_reject_field_mismatch() {
        let a = q2().one();
        let b = q2_sqrt2().one();
        assert_eq!(a.checked_add(&b).unwrap_err(), RingError::FieldMismatch);
        assert_eq!(a.checked_mul(&b).unwrap_err(), RingError::FieldMismatch);
    }

    #[test]
    fn literal_reduction_accepts_negatives() {
        let f = q2();
        let a = f.element_i64(&[-2]).unwrap();
        assert_eq!(a, f.from_int(-2));
        assert_eq!(a.add(&f.two()), f.zero());
    }
}
