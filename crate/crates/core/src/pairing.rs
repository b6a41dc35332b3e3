//! The bins lemma: when every unordered pair among `n` objects is assigned
//! to one of `m` bins and `n >= m+3`, two disjoint pairs share a bin. This
//! module finds such pairs deterministically, builds the extremal
//! assignments showing tightness at `n = m+2`, and exposes the counting
//! bound `C(m+3, 2) - 3` on the number of pairs an avoiding assignment can
//! hold.

/// An unordered pair of objects, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub lo: usize,
    pub hi: usize,
}

impl Pair {
    pub fn new(a: usize, b: usize) -> Pair {
        assert!(a != b, "a pair needs two distinct objects");
        Pair {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn disjoint(&self, other: &Pair) -> bool {
        self.lo != other.lo && self.lo != other.hi && self.hi != other.lo && self.hi != other.hi
    }
}

/// Index of a pair in the lexicographic list of all pairs on `n` objects.
fn pair_index(n: usize, p: Pair) -> usize {
    // pairs (0,1), (0,2), ..., (0,n-1), (1,2), ...
    p.lo * (2 * n - p.lo - 1) / 2 + (p.hi - p.lo - 1)
}

/// All pairs on `n` objects in lexicographic order.
pub fn all_pairs(n: usize) -> Vec<Pair> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for lo in 0..n {
        for hi in lo + 1..n {
            out.push(Pair { lo, hi });
        }
    }
    out
}

/// A total assignment of the pairs on `n` objects to `m` bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinAssignment {
    n: usize,
    m: usize,
    /// bin of the pair with lexicographic index i
    bins: Vec<usize>,
}

/// Two disjoint pairs sharing a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisjointSameBin {
    pub first: Pair,
    pub second: Pair,
    pub bin: usize,
}

impl BinAssignment {
    pub fn new(n: usize, m: usize, bins: Vec<usize>) -> BinAssignment {
        assert!(m >= 1);
        assert_eq!(bins.len(), n * (n - 1) / 2, "one bin per unordered pair");
        assert!(bins.iter().all(|&b| b < m), "bin index in range");
        BinAssignment { n, m, bins }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bin_of(&self, p: Pair) -> usize {
        self.bins[pair_index(self.n, p)]
    }

    /// The lexicographically smallest `(bin, pair, pair)` with the two pairs
    /// disjoint and in the same bin, or `None`.
    pub fn find_disjoint_same_bin(&self) -> Option<DisjointSameBin> {
        let pairs = all_pairs(self.n);
        let mut by_bin: Vec<Vec<Pair>> = vec![Vec::new(); self.m];
        for (idx, p) in pairs.iter().enumerate() {
            by_bin[self.bins[idx]].push(*p);
        }
        for (bin, members) in by_bin.iter().enumerate() {
            for (i, a) in members.iter().enumerate() {
                for b in members.iter().skip(i + 1) {
                    if a.disjoint(b) {
                        return Some(DisjointSameBin {
                            first: *a,
                            second: *b,
                            bin,
                        });
                    }
                }
            }
        }
        None
    }
}

/// An assignment on `n = m + 2` objects with no disjoint same-bin pairs:
/// bins `0..m-1` are stars centered at objects `0..m-2`, and the last bin is
/// the triangle on the top three objects.
pub fn extremal_assignment(m: usize) -> BinAssignment {
    assert!(m >= 1);
    let n = m + 2;
    let pairs = all_pairs(n);
    let bins = pairs
        .iter()
        .map(|p| if p.lo < m - 1 { p.lo } else { m - 1 })
        .collect();
    BinAssignment::new(n, m, bins)
}

/// Upper bound `C(m+3, 2) - 3` on the pairs an avoiding assignment holds.
pub fn max_pairs_bound(m: usize) -> usize {
    (m + 3) * (m + 2) / 2 - 3
}

/// Exhaustive sweep statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOutcome {
    pub checked: u128,
    pub failures: u64,
}

/// Incremental state for the exhaustive sweep: pairs are assigned in
/// lexicographic order; a branch is abandoned as soon as it already holds
/// two disjoint same-bin pairs, since every completion then succeeds.
struct Sweep<'a> {
    pairs: &'a [Pair],
    m: usize,
    by_bin: Vec<Vec<Pair>>,
    failures: u64,
}

impl Sweep<'_> {
    fn run(&mut self, depth: usize) {
        if depth == self.pairs.len() {
            self.failures += 1;
            return;
        }
        let p = self.pairs[depth];
        for bin in 0..self.m {
            if self.by_bin[bin].iter().any(|q| q.disjoint(&p)) {
                // success on every completion of this branch; not a failure
                continue;
            }
            self.by_bin[bin].push(p);
            self.run(depth + 1);
            self.by_bin[bin].pop();
        }
    }
}

/// Count the assignments of all pairs on `n` objects to `m` bins with no
/// disjoint same-bin pairs. `checked` is the full count `m^C(n,2)`; the
/// first pair's bin is fixed by symmetry and the failure count scaled.
pub fn exhaustive_sweep(m: usize, n: usize) -> SweepOutcome {
    exhaustive_sweep_parallel(m, n, 1)
}

/// The exhaustive sweep partitioned over the second pair's bin choices;
/// results are combined deterministically, so the worker count never
/// changes the outcome.
pub fn exhaustive_sweep_parallel(m: usize, n: usize, workers: usize) -> SweepOutcome {
    assert!(m >= 1 && n >= 2);
    let pairs = all_pairs(n);
    let total = (m as u128).pow(pairs.len() as u32);
    // fix the first pair in bin 0; bin relabeling is a bijection on failures
    let restricted: u64 = if pairs.len() == 1 {
        1
    } else if workers <= 1 || m == 1 {
        let mut sweep = Sweep {
            pairs: &pairs,
            m,
            by_bin: vec![Vec::new(); m],
            failures: 0,
        };
        sweep.by_bin[0].push(pairs[0]);
        sweep.run(1);
        sweep.failures
    } else {
        let mut totals = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..m)
                .map(|second_bin| {
                    let pairs = &pairs;
                    scope.spawn(move || {
                        let mut sweep = Sweep {
                            pairs,
                            m,
                            by_bin: vec![Vec::new(); m],
                            failures: 0,
                        };
                        sweep.by_bin[0].push(pairs[0]);
                        if sweep.by_bin[second_bin]
                            .iter()
                            .any(|q| q.disjoint(&pairs[1]))
                        {
                            return 0;
                        }
                        sweep.by_bin[second_bin].push(pairs[1]);
                        sweep.run(2);
                        sweep.failures
                    })
                })
                .collect();
            for h in handles {
                totals.push(h.join().expect("sweep worker panicked"));
            }
        });
        totals.iter().sum()
    };
    SweepOutcome {
        checked: total,
        failures: restricted * m as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pairs_indexing() {
        let pairs = all_pairs(5);
        assert_eq!(pairs.len(), 10);
        for (i, p) in pairs.iter().enumerate() {
            assert_eq!(pair_index(5, *p), i);
        }
    }

    #[test]
    fn one_bin_four_objects() {
        let a = BinAssignment::new(4, 1, vec![0; 6]);
        let hit = a.find_disjoint_same_bin().unwrap();
        assert_eq!(hit.bin, 0);
        assert_eq!(hit.first, Pair::new(0, 1));
        assert_eq!(hit.second, Pair::new(2, 3));
    }

    #[test]
    fn star_and_triangle_has_none() {
        // bin 0: pairs containing object 0; bin 1: pairs within {1,2,3}
        let pairs = all_pairs(4);
        let bins = pairs
            .iter()
            .map(|p| if p.lo == 0 { 0 } else { 1 })
            .collect();
        let a = BinAssignment::new(4, 2, bins);
        assert_eq!(a.find_disjoint_same_bin(), None);
    }

    #[test]
    fn m2_n5_always_hits() {
        // every one of the 2^10 assignments yields a hit
        let pairs = all_pairs(5);
        for code in 0u32..1 << 10 {
            let bins = (0..10).map(|i| ((code >> i) & 1) as usize).collect();
            let a = BinAssignment::new(5, 2, bins);
            assert!(
                a.find_disjoint_same_bin().is_some(),
                "assignment {code:#b} on pairs {pairs:?} has no hit"
            );
        }
    }

    #[test]
    fn max_pairs_bound_values() {
        assert_eq!(max_pairs_bound(1), 3);
        assert_eq!(max_pairs_bound(2), 7);
        assert_eq!(max_pairs_bound(3), 12);
    }

    #[test]
    fn extremal_has_none_and_respects_bound() {
        for m in 1..=8 {
            let a = extremal_assignment(m);
            assert_eq!(a.n(), m + 2);
            assert_eq!(a.find_disjoint_same_bin(), None, "m = {m}");
            let pairs_held = (m + 2) * (m + 1) / 2;
            assert!(pairs_held <= max_pairs_bound(m));
        }
    }

    #[test]
    fn exhaustive_small() {
        assert_eq!(
            exhaustive_sweep(1, 4),
            SweepOutcome {
                checked: 1,
                failures: 0
            }
        );
        assert_eq!(
            exhaustive_sweep(2, 5),
            SweepOutcome {
                checked: 1024,
                failures: 0
            }
        );
        // below the m+3 threshold failures exist: n = m+2 = 4, m = 2
        let out = exhaustive_sweep(2, 4);
        assert_eq!(out.checked, 64);
        assert!(out.failures > 0);
    }

    #[test]
    fn worker_count_does_not_change_the_sweep() {
        for (m, n) in [(2usize, 4usize), (2, 5), (3, 5)] {
            let single = exhaustive_sweep_parallel(m, n, 1);
            let multi = exhaustive_sweep_parallel(m, n, 4);
            assert_eq!(single, multi, "m={m} n={n}");
        }
    }

    #[test]
    fn counting_bound_forces_the_lemma() {
        // a total assignment on m+3 objects holds C(m+3,2) pairs, which
        // exceeds the avoidance bound, so avoiding assignments cannot exist
        for m in 1..=8 {
            let total_pairs = (m + 3) * (m + 2) / 2;
            assert_eq!(total_pairs, max_pairs_bound(m) + 3);
        }
    }

    #[test]
    fn exhaustive_matches_direct_enumeration() {
        // m = 2, n = 4: compare the pruned sweep against direct counting
        let pairs = all_pairs(4);
        let mut direct = 0u64;
        for code in 0u32..1 << 6 {
            let bins = (0..6).map(|i| ((code >> i) & 1) as usize).collect();
            let a = BinAssignment::new(4, 2, bins);
            if a.find_disjoint_same_bin().is_none() {
                direct += 1;
            }
        }
        assert_eq!(pairs.len(), 6);
        assert_eq!(exhaustive_sweep(2, 4).failures, direct);
    }
}
