//! Brute-force zero search over the finite quotient `O/pi^n` for small `n`,
//! built entirely on the naive arithmetic path. Residues are indexed by
//! their pi-adic digit vectors, addition is a precomputed table, and the
//! state space is capped hard: an incomplete oracle is worse than none.

use num_bigint::BigInt;

use super::naive::NaiveField;
use super::{thread_count, OracleError};
use crate::form::AdditiveForm;

const STATE_BITS_CAP: u32 = 28;
const DIGIT_CAP: u32 = 12;

/// The quotient `O/pi^n` with tabulated addition, residues indexed by
/// digit vectors: index `sum d_i 2^i` stands for `sum d_i pi^i`.
pub struct SmallRing {
    n_small: u32,
    size: usize,
    add: Vec<u16>,
    nf: NaiveField,
}

impl SmallRing {
    pub fn build(
        e: usize,
        eisenstein: &[BigInt],
        n_pi: u32,
        n_small: u32,
    ) -> Result<SmallRing, OracleError> {
        if n_small > DIGIT_CAP {
            return Err(OracleError::SearchSpaceTooLarge {
                bits: 2 * n_small,
                cap: 2 * DIGIT_CAP,
            });
        }
        let nf = NaiveField::new(e, eisenstein, n_pi);
        let size = 1usize << n_small;
        let elems: Vec<Vec<BigInt>> = (0..size)
            .map(|idx| {
                let digits: Vec<u8> = (0..n_small).map(|i| (idx >> i & 1) as u8).collect();
                element_from_digits(&nf, &digits)
            })
            .collect();
        let mut index_of = std::collections::HashMap::new();
        for (idx, el) in elems.iter().enumerate() {
            index_of.insert(key_mod_pin(&nf, el, n_small), idx as u16);
        }
        let mut add = vec![0u16; size * size];
        for i in 0..size {
            for j in 0..=i {
                let sum = nf.add(&elems[i], &elems[j]);
                let idx = index_of[&key_mod_pin(&nf, &sum, n_small)];
                add[i * size + j] = idx;
                add[j * size + i] = idx;
            }
        }
        Ok(SmallRing {
            n_small,
            size,
            add,
            nf,
        })
    }

    pub fn n_small(&self) -> u32 {
        self.n_small
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn add_idx(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.size + b as usize]
    }

    /// Index of `value * r^d` for every residue `r`.
    pub fn term_table(&self, coefficient: &[BigInt], d: u32) -> Vec<u16> {
        let a = self.nf.from_literals(coefficient);
        (0..self.size)
            .map(|idx| {
                let digits: Vec<u8> = (0..self.n_small).map(|i| (idx >> i & 1) as u8).collect();
                let r = element_from_digits(&self.nf, &digits);
                let term = self.nf.mul(&a, &self.nf.pow(&r, d));
                self.lookup(&term)
            })
            .collect()
    }

    fn lookup(&self, el: &[BigInt]) -> u16 {
        let reduced = reduce_mod_pin(&self.nf, el, self.n_small);
        let mut idx = 0u16;
        // digit-strip on the naive side: d_0 is the parity of the constant
        // coefficient, then divide by pi via the defining relation
        let mut cur = reduced;
        for i in 0..self.n_small {
            let bit = (&cur[0] % BigInt::from(2) != BigInt::from(0)) as u16;
            idx |= bit << i;
            if bit == 1 {
                cur[0] -= 1;
            }
            cur = naive_div_pi(&self.nf, &cur);
        }
        idx
    }
}

fn element_from_digits(nf: &NaiveField, digits: &[u8]) -> Vec<BigInt> {
    let mut acc = nf.zero();
    let mut p = nf.one();
    for &d in digits {
        if d != 0 {
            acc = nf.add(&acc, &p);
        }
        p = nf.mul(&p, &nf.pi());
    }
    acc
}

fn reduce_mod_pin(nf: &NaiveField, el: &[BigInt], n: u32) -> Vec<BigInt> {
    nf.canonical_at(el, n)
}

fn key_mod_pin(nf: &NaiveField, el: &[BigInt], n: u32) -> Vec<Vec<u8>> {
    reduce_mod_pin(nf, el, n)
        .iter()
        .map(|x| x.magnitude().to_bytes_le())
        .collect()
}

/// Division by pi on the naive side, assuming an even constant coefficient.
fn naive_div_pi(nf: &NaiveField, el: &[BigInt]) -> Vec<BigInt> {
    nf.div_pi(el)
}

/// One zero found by brute force: per-coordinate residues as digit vectors
/// of length `n_small` (all-zero vectors beyond the search window).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteZero {
    pub digits: Vec<Vec<u8>>,
}

/// Enumerate every assignment over residues mod `pi^n_small` on the first
/// `min(s, support_cap)` coordinates (zero beyond), keeping those with a
/// unit coordinate and `v(F) >= n_small`. Errors out rather than truncating
/// when the state space exceeds the cap.
pub fn brute_force_zero(
    form: &AdditiveForm,
    n_small: u32,
    support_cap: usize,
) -> Result<Vec<BruteZero>, OracleError> {
    let s = form.len();
    let window = s.min(support_cap);
    let bits = n_small * window as u32;
    if bits > STATE_BITS_CAP {
        return Err(OracleError::SearchSpaceTooLarge {
            bits,
            cap: STATE_BITS_CAP,
        });
    }
    let field = form.field();
    let eis = field.eisenstein().to_vec();
    let ring = SmallRing::build(field.e(), &eis, field.n_pi(), n_small)?;
    let tables: Vec<Vec<u16>> = (0..window)
        .map(|i| ring.term_table(&form.coeff(i).to_literals(), form.d()))
        .collect();

    let workers = thread_count().min(ring.size());
    let chunks: Vec<(usize, usize)> = if window == 0 {
        vec![(0, 0)]
    } else {
        let per = ring.size().div_ceil(workers);
        (0..workers)
            .map(|t| (t * per, ((t + 1) * per).min(ring.size())))
            .filter(|(lo, hi)| lo < hi)
            .collect()
    };

    let mut found: Vec<Vec<u16>> = Vec::new();
    if window == 0 {
        // empty window: only the empty assignment, which has no unit
    } else if workers <= 1 {
        search(&ring, &tables, 0, ring.size(), &mut found);
    } else {
        let mut parts: Vec<Vec<Vec<u16>>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&(lo, hi)| {
                    let ring = &ring;
                    let tables = &tables;
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        search(ring, tables, lo, hi, &mut out);
                        out
                    })
                })
                .collect();
            for h in handles {
                parts.push(h.join().expect("search worker panicked"));
            }
        });
        for p in parts {
            found.extend(p);
        }
    }

    Ok(found
        .into_iter()
        .map(|residues| {
            let mut digits: Vec<Vec<u8>> = residues
                .iter()
                .map(|&r| (0..n_small).map(|i| (r >> i & 1) as u8).collect())
                .collect();
            digits.resize(s, vec![0u8; n_small as usize]);
            BruteZero { digits }
        })
        .collect())
}

/// DFS over the window with incremental sums; `lo..hi` restricts the first
/// coordinate so workers can partition the space deterministically.
fn search(ring: &SmallRing, tables: &[Vec<u16>], lo: usize, hi: usize, out: &mut Vec<Vec<u16>>) {
    let mut residues = vec![0u16; tables.len()];
    for first in lo..hi {
        residues[0] = first as u16;
        descend(
            ring,
            tables,
            1,
            tables[0][first],
            first & 1 == 1,
            &mut residues,
            out,
        );
    }
}

fn descend(
    ring: &SmallRing,
    tables: &[Vec<u16>],
    depth: usize,
    sum: u16,
    has_unit: bool,
    residues: &mut Vec<u16>,
    out: &mut Vec<Vec<u16>>,
) {
    if depth == tables.len() {
        if sum == 0 && has_unit {
            out.push(residues.clone());
        }
        return;
    }
    for r in 0..ring.size() {
        residues[depth] = r as u16;
        descend(
            ring,
            tables,
            depth + 1,
            ring.add_idx(sum, tables[depth][r]),
            has_unit || r & 1 == 1,
            residues,
            out,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::AdditiveForm;
    use crate::ring::Field;

    fn q2() -> Field {
        Field::from_i64(1, &[-2], 16).unwrap()
    }

    #[test]
    fn finds_cancellation_pair() {
        let f = q2();
        let a = f.from_int(5);
        let form = AdditiveForm::new(&f, 6, vec![a.clone(), a.neg()]).unwrap();
        let zeros = brute_force_zero(&form, 4, 8).unwrap();
        let ones = BruteZero {
            digits: vec![vec![1, 0, 0, 0], vec![1, 0, 0, 0]],
        };
        assert!(zeros.contains(&ones));
    }

    #[test]
    fn finds_eight_ones() {
        let f = q2();
        let form = AdditiveForm::new(&f, 6, vec![f.one(); 28]).unwrap();
        let zeros = brute_force_zero(&form, 3, 8).unwrap();
        let eight_ones = BruteZero {
            digits: (0..28)
                .map(|i| if i < 8 { vec![1, 0, 0] } else { vec![0, 0, 0] })
                .collect(),
        };
        assert!(zeros.contains(&eight_ones));
    }

    #[test]
    fn single_unit_term_has_no_zero() {
        let f = q2();
        let form = AdditiveForm::new(&f, 6, vec![f.one()]).unwrap();
        let zeros = brute_force_zero(&form, 4, 8).unwrap();
        assert!(zeros.is_empty());
    }

    #[test]
    fn cap_is_a_hard_error() {
        let f = q2();
        let form = AdditiveForm::new(&f, 6, vec![f.one(); 28]).unwrap();
        assert!(matches!(
            brute_force_zero(&form, 4, 28),
            Err(OracleError::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn worker_count_does_not_change_brute_results() {
        let f = q2();
        let coeffs = vec![f.from_int(1), f.from_int(3), f.from_int(5), f.from_int(7)];
        let form = AdditiveForm::new(&f, 6, coeffs).unwrap();
        let single = brute_force_zero(&form, 3, 4).unwrap();
        std::env::set_var("RAMIFIED_ZERO_THREADS", "3");
        let multi = brute_force_zero(&form, 3, 4).unwrap();
        std::env::remove_var("RAMIFIED_ZERO_THREADS");
        assert_eq!(single, multi);
    }

    #[test]
    fn small_ring_matches_over_sqrt2() {
        // in Q_2(sqrt 2): pi^2 = 2, so 1 + 1 = digit vector 0010
        let ring = SmallRing::build(2, &[BigInt::from(-2), BigInt::from(0)], 16, 4).unwrap();
        let one = 1u16;
        assert_eq!(ring.add_idx(one, one), 0b0100);
    }
}
