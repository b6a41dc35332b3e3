//! Independent checkers for the main build: a reimplemented arithmetic
//! path, brute-force zero search over small quotients, exhaustive and
//! randomized sweeps of the bins lemma, profile enumeration with dispatch
//! coverage, and the seeded form generator feeding the test suites.

mod brute;
mod naive;
mod profiles;

pub use brute::{brute_force_zero, BruteZero, SmallRing};
pub use naive::{naive_verify, NaiveElement, NaiveField};
pub use profiles::{dispatch_coverage, enumerate_profiles, CoverageReport};

use crate::form::{AdditiveForm, FormError};
use crate::ring::{Field, RingElement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("search space of {bits} bits exceeds the {cap}-bit cap")]
    SearchSpaceTooLarge { bits: u32, cap: u32 },
    #[error("profile counts must sum to s = {s}")]
    BadProfile { s: usize },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Deterministic 64-bit generator (splitmix64). The whole test and report
/// tooling seeds from this so runs reproduce bit for bit.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, n)` by 128-bit multiply-shift.
    pub fn next_below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn next_bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// How the generator distributes levels over the coordinates.
#[derive(Debug, Clone)]
pub enum LevelSpec {
    /// Level of each coordinate uniform in `[0, d)`.
    Uniform,
    /// Exactly `counts[l]` coordinates at level `l`, in level order.
    Profile(Vec<usize>),
}

/// A reproducible pseudo-random unit: leading digit 1, the remaining
/// pi-adic digits drawn from the seeded generator.
pub fn random_unit(field: &Field, rng: &mut SplitMix64, depth: u32) -> RingElement {
    let mut digits = vec![1u8];
    for _ in 1..depth.max(1) {
        digits.push(rng.next_bit() as u8);
    }
    field.from_digits(&digits)
}

/// Seeded random form: levels per `spec`, unit parts with full random digit
/// tails. Identical seeds reproduce identical forms.
pub fn random_form(
    field: &Field,
    d: u32,
    s: usize,
    spec: &LevelSpec,
    seed: u64,
) -> Result<AdditiveForm, OracleError> {
    let mut rng = SplitMix64::new(seed);
    let levels: Vec<u32> = match spec {
        LevelSpec::Uniform => (0..s).map(|_| rng.next_below(d as u64) as u32).collect(),
        LevelSpec::Profile(counts) => {
            if counts.iter().sum::<usize>() != s {
                return Err(OracleError::BadProfile { s });
            }
            let mut levels = Vec::with_capacity(s);
            for (l, &count) in counts.iter().enumerate() {
                levels.extend(std::iter::repeat_n(l as u32, count));
            }
            levels
        }
    };
    let coeffs: Vec<RingElement> = levels
        .iter()
        .map(|&l| {
            let depth = field.n_pi().saturating_sub(l).max(1);
            let w = random_unit(field, &mut rng, depth);
            field.pi_pow(l).mul(&w)
        })
        .collect();
    Ok(AdditiveForm::new(field, d, coeffs)?)
}

/// Worker count for the embarrassingly parallel sweeps, from the
/// `RAMIFIED_ZERO_THREADS` environment variable (default 1).
pub fn thread_count() -> usize {
    std::env::var("RAMIFIED_ZERO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Exhaustive bins check over all `m^C(n,2)` assignments: true when every
/// one of them contains two disjoint same-bin pairs.
pub fn exhaustive_bins(m: usize, n: usize) -> bool {
    crate::pairing::exhaustive_sweep_parallel(m, n, thread_count()).failures == 0
}

/// Randomized bins check: uniformly random assignments, each seeded
/// independently so the outcome does not depend on worker partitioning.
pub fn random_bins_sweep(
    m: usize,
    n: usize,
    samples: u64,
    seed: u64,
) -> crate::pairing::SweepOutcome {
    let pair_count = n * (n - 1) / 2;
    let mut failures = 0u64;
    for sample in 0..samples {
        let mut rng = SplitMix64::new(seed ^ sample.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let bins: Vec<usize> = (0..pair_count)
            .map(|_| rng.next_below(m as u64) as usize)
            .collect();
        let assignment = crate::pairing::BinAssignment::new(n, m, bins);
        if assignment.find_disjoint_same_bin().is_none() {
            failures += 1;
        }
    }
    crate::pairing::SweepOutcome {
        checked: samples as u128,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Field;

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn random_form_reproducible() {
        let f = Field::from_i64(2, &[-2, 0], 32).unwrap();
        let a = random_form(&f, 6, 28, &LevelSpec::Uniform, 7).unwrap();
        let b = random_form(&f, 6, 28, &LevelSpec::Uniform, 7).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        let c = random_form(&f, 6, 28, &LevelSpec::Uniform, 8).unwrap();
        assert_ne!(a.coeffs(), c.coeffs());
    }

    #[test]
    fn random_form_respects_profile() {
        let f = Field::from_i64(1, &[-2], 24).unwrap();
        let profile = vec![9usize, 1, 9, 1, 7, 1];
        let form = random_form(&f, 6, 28, &LevelSpec::Profile(profile.clone()), 3).unwrap();
        assert_eq!(form.profile().counts(), &profile[..]);
        let bad = random_form(&f, 6, 5, &LevelSpec::Profile(profile), 3);
        assert!(matches!(bad, Err(OracleError::BadProfile { s: 5 })));
    }
}
