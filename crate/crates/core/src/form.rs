//! Additive (diagonal) forms `a_1 x_1^d + ... + a_s x_s^d`, their level
//! profiles, cyclic level normalization, evaluation, and zero certificates.
//!
//! Levels are coefficient valuations. The profile counts them modulo `d`;
//! the contraction engine works with absolute valuations. Rotation by `r`
//! multiplies the form by `pi^r` and rewrites every coefficient to a level
//! in `[0, d)` through the substitution `x -> pi^{-q} x`, recorded per
//! coordinate so that certificates pull back mechanically.

use crate::ring::{Field, RingElement, RingError, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("coefficient {index} is zero at working precision")]
    ZeroCoefficient { index: usize },
    #[error("degree {d} is odd; additive forms here have even degree")]
    OddDegree { d: u32 },
    #[error("assignment length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("rotation pushes coefficient {index} beyond the working precision")]
    PrecisionExhausted { index: usize },
    #[error("no rotation satisfies the prefix inequalities (implementation bug)")]
    NoValidRotation,
    #[error("rotation index {r} out of range [0, {d})")]
    RotationOutOfRange { r: u32, d: u32 },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Counts of variables per level modulo `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    counts: Vec<usize>,
}

impl LevelProfile {
    pub fn new(counts: Vec<usize>) -> LevelProfile {
        LevelProfile { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn d(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Exact test of the prefix inequalities
    /// `d * (s_0 + ... + s_{k-1}) >= k * s` for `k = 1..d`.
    pub fn is_normalized(&self) -> bool {
        let d = self.counts.len() as u64;
        let s = self.total() as u64;
        let mut prefix = 0u64;
        for (k, &c) in self.counts.iter().enumerate() {
            prefix += c as u64;
            if d * prefix < (k as u64 + 1) * s {
                return false;
            }
        }
        true
    }

    /// The profile after rotating every level up by `r` (mod d).
    pub fn rotated(&self, r: u32) -> LevelProfile {
        let d = self.counts.len();
        let mut counts = vec![0usize; d];
        for (l, &c) in self.counts.iter().enumerate() {
            counts[(l + r as usize) % d] = c;
        }
        LevelProfile { counts }
    }
}

/// An additive form of even degree `d = 2m` with nonzero coefficients.
#[derive(Debug, Clone)]
pub struct AdditiveForm {
    field: Field,
    d: u32,
    coeffs: Vec<RingElement>,
    /// absolute valuations of the coefficients
    abs_levels: Vec<u32>,
    /// unit parts: coeff = pi^abs_level * unit_part
    unit_parts: Vec<RingElement>,
}

impl AdditiveForm {
    pub fn new(field: &Field, d: u32, coeffs: Vec<RingElement>) -> Result<AdditiveForm, FormError> {
        if !d.is_multiple_of(2) || d == 0 {
            return Err(FormError::OddDegree { d });
        }
        let mut abs_levels = Vec::with_capacity(coeffs.len());
        let mut unit_parts = Vec::with_capacity(coeffs.len());
        for (index, c) in coeffs.iter().enumerate() {
            if c.field() != field {
                return Err(FormError::Ring(RingError::FieldMismatch));
            }
            match c.valuation() {
                Valuation::AtLeastPrecision => return Err(FormError::ZeroCoefficient { index }),
                Valuation::Finite(l) => {
                    abs_levels.push(l);
                    let (_, w) = c.unit_part()?;
                    unit_parts.push(w);
                }
            }
        }
        Ok(AdditiveForm {
            field: field.clone(),
            d,
            coeffs,
            abs_levels,
            unit_parts,
        })
    }

    /// Build a form from element literals.
    pub fn from_literals(
        field: &Field,
        d: u32,
        literals: &[Vec<num_bigint::BigInt>],
    ) -> Result<AdditiveForm, FormError> {
        let coeffs = literals
            .iter()
            .map(|l| field.element(l))
            .collect::<Result<Vec<_>, _>>()?;
        AdditiveForm::new(field, d, coeffs)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.d / 2
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> &RingElement {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[RingElement] {
        &self.coeffs
    }

    /// Absolute valuation of coefficient `i`.
    pub fn abs_level(&self, i: usize) -> u32 {
        self.abs_levels[i]
    }

    /// Level of coefficient `i` reduced modulo `d`.
    pub fn level(&self, i: usize) -> u32 {
        self.abs_levels[i] % self.d
    }

    pub fn unit_part_of(&self, i: usize) -> &RingElement {
        &self.unit_parts[i]
    }

    /// Counts of variables per level mod d.
    pub fn profile(&self) -> LevelProfile {
        let mut counts = vec![0usize; self.d as usize];
        for &l in &self.abs_levels {
            counts[(l % self.d) as usize] += 1;
        }
        LevelProfile { counts }
    }

    /// Multiply the form by `pi^r` and reduce every level into `[0, d)`.
    ///
    /// Coefficient `i` becomes `pi^(r - d q_i) a_i` where
    /// `q_i = floor((abs_level_i + r) / d)`; the recorded map carries the
    /// per-coordinate `q_i` so certificates of the rotated form pull back.
    pub fn rotate(&self, r: u32) -> Result<(AdditiveForm, RotationMap), FormError> {
        if r >= self.d {
            return Err(FormError::RotationOutOfRange { r, d: self.d });
        }
        let n_pi = self.field.n_pi();
        let mut q = Vec::with_capacity(self.coeffs.len());
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (index, _) in self.coeffs.iter().enumerate() {
            let lifted = self.abs_levels[index] + r;
            let qi = lifted / self.d;
            let new_level = lifted % self.d;
            if new_level >= n_pi {
                return Err(FormError::PrecisionExhausted { index });
            }
            // pi^(new_level) * unit_part reproduces pi^(r - d q) * a exactly.
            let c = self.field.pi_pow(new_level).mul(&self.unit_parts[index]);
            coeffs.push(c);
            q.push(qi);
        }
        let form = AdditiveForm::new(&self.field, self.d, coeffs)?;
        Ok((form, RotationMap { r, q }))
    }

    /// Rewrite every coefficient to its level mod `d` through `x -> pi^{-q} x`,
    /// recorded as a rotation by 0. Forms with all levels already in `[0, d)`
    /// come back unchanged.
    pub fn reduce_levels(&self) -> Result<(AdditiveForm, RotationMap), FormError> {
        let mut q = Vec::with_capacity(self.coeffs.len());
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, a) in self.coeffs.iter().enumerate() {
            let qi = self.abs_levels[i] / self.d;
            if qi == 0 {
                coeffs.push(a.clone());
            } else {
                coeffs.push(
                    self.field
                        .pi_pow(self.abs_levels[i] % self.d)
                        .mul(&self.unit_parts[i]),
                );
            }
            q.push(qi);
        }
        let form = AdditiveForm::new(&self.field, self.d, coeffs)?;
        Ok((form, RotationMap { r: 0, q }))
    }

    /// Smallest rotation whose profile satisfies the prefix inequalities.
    pub fn normalize(&self) -> Result<(u32, AdditiveForm, RotationMap), FormError> {
        let profile = self.profile();
        for r in 0..self.d {
            if profile.rotated(r).is_normalized() {
                let (form, map) = self.rotate(r)?;
                return Ok((r, form, map));
            }
        }
        Err(FormError::NoValidRotation)
    }

    /// `sum a_i b_i^d` at working precision.
    pub fn evaluate(&self, assignment: &[RingElement]) -> Result<RingElement, FormError> {
        if assignment.len() != self.coeffs.len() {
            return Err(FormError::LengthMismatch {
                got: assignment.len(),
                expected: self.coeffs.len(),
            });
        }
        let mut acc = self.field.zero();
        for (a, b) in self.coeffs.iter().zip(assignment) {
            if b.field() != &self.field {
                return Err(FormError::Ring(RingError::FieldMismatch));
            }
            if b.is_zero() {
                continue;
            }
            acc = acc.add(&a.mul(&b.pow(self.d as u64)));
        }
        Ok(acc)
    }

    /// Valuation of the form at the certificate plus the nontriviality check.
    pub fn verify_certificate(&self, cert: &ZeroCertificate) -> CertificateCheck {
        let valuation = match self.evaluate(&cert.assignment) {
            Ok(v) => v.valuation(),
            Err(_) => {
                return CertificateCheck {
                    valuation: Valuation::Finite(0),
                    pivot_is_unit: false,
                    passes: false,
                }
            }
        };
        let pivot_is_unit = cert
            .assignment
            .get(cert.pivot)
            .map(|b| b.is_unit())
            .unwrap_or(false);
        let passes = pivot_is_unit && valuation >= Valuation::Finite(cert.n_target);
        CertificateCheck {
            valuation,
            pivot_is_unit,
            passes,
        }
    }
}

/// Recorded substitution of a rotation: coordinate `i` of the rotated form
/// is `y_i = pi^{q_i} x_i` up to the global `pi^r` scaling of the form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationMap {
    r: u32,
    q: Vec<u32>,
}

impl RotationMap {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> &[u32] {
        &self.q
    }

    /// Pull a certificate of the rotated form back to the original form.
    ///
    /// With `t = max over the support of (q_i - v(beta_i))` the assignment
    /// `x_i = pi^(t - q_i) beta_i` is integral (negative exponents divide
    /// into the valuation of `beta_i`), the maximizing coordinate is a
    /// unit, and `F(x) = pi^(t d - r) F'(beta)`.
    pub fn pull_back(
        &self,
        original: &AdditiveForm,
        cert: &ZeroCertificate,
    ) -> Result<ZeroCertificate, FormError> {
        if cert.assignment.len() != self.q.len() || original.len() != self.q.len() {
            return Err(FormError::LengthMismatch {
                got: cert.assignment.len(),
                expected: self.q.len(),
            });
        }
        let field = original.field();
        let mut best: Option<(i64, usize)> = None;
        for (i, b) in cert.assignment.iter().enumerate() {
            if let Valuation::Finite(v) = b.valuation() {
                let score = self.q[i] as i64 - v as i64;
                if best.is_none_or(|(bs, _)| score > bs) {
                    best = Some((score, i));
                }
            }
        }
        let (t, pivot) = best.ok_or(FormError::LengthMismatch {
            got: 0,
            expected: 1,
        })?;
        let mut assignment = Vec::with_capacity(cert.assignment.len());
        for (i, b) in cert.assignment.iter().enumerate() {
            if b.is_zero() {
                assignment.push(field.zero());
            } else {
                let shift = t - self.q[i] as i64;
                let moved = if shift >= 0 {
                    field.pi_pow(shift as u32).mul(b)
                } else {
                    b.div_pi_pow((-shift) as u32)?
                };
                assignment.push(moved);
            }
        }
        Ok(ZeroCertificate {
            assignment,
            n_target: cert.n_target,
            pivot,
        })
    }
}

/// An assignment with a distinguished unit coordinate witnessing a zero of
/// the form to valuation at least `n_target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroCertificate {
    pub assignment: Vec<RingElement>,
    pub n_target: u32,
    pub pivot: usize,
}

/// Outcome of `verify_certificate`; failure is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertificateCheck {
    pub valuation: Valuation,
    pub pivot_is_unit: bool,
    pub passes: bool,
}
