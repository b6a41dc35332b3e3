//! Property tests: ring axioms and valuation laws, digit round-trips,
//! profile/rotation behavior, certificate pull-back, substitution-record
//! soundness, and the normalization existence sweep.

use proptest::prelude::*;

use ramified_zero::contraction::{
    achievable_levels, contract_pair, lift_original, steer_to, SteerMode, SteerRequest,
};
use ramified_zero::form::{AdditiveForm, LevelProfile, ZeroCertificate};
use ramified_zero::oracle::{random_unit, SplitMix64};
use ramified_zero::ring::{Field, RingElement, Valuation};

fn fields() -> Vec<Field> {
    vec![
        Field::from_i64(1, &[-2], 24).unwrap(),
        Field::from_i64(2, &[-2, 0], 32).unwrap(),
        Field::from_i64(2, &[2, 0], 32).unwrap(),
        Field::from_i64(2, &[2, -2], 32).unwrap(),
        Field::from_i64(3, &[-2, 0, 0], 40).unwrap(),
    ]
}

fn element(field: &Field, raw: &[i64]) -> RingElement {
    let mut lits = raw.to_vec();
    lits.resize(field.e(), 0);
    field.element_i64(&lits).unwrap()
}

proptest! {
    #[test]
    fn ring_axioms(
        fi in 0usize..5,
        a in proptest::array::uniform3(any::<i64>()),
        b in proptest::array::uniform3(any::<i64>()),
        c in proptest::array::uniform3(any::<i64>()),
    ) {
        let field = &fields()[fi];
        let (a, b, c) = (element(field, &a), element(field, &b), element(field, &c));
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.add(&a.neg()).is_zero());
        prop_assert_eq!(a.mul(&field.one()), a.clone());
    }

    #[test]
    fn valuation_laws(
        fi in 0usize..5,
        a in proptest::array::uniform3(any::<i64>()),
        b in proptest::array::uniform3(any::<i64>()),
    ) {
        let field = &fields()[fi];
        let (a, b) = (element(field, &a), element(field, &b));
        let (va, vb) = (a.valuation(), b.valuation());
        // product valuation adds when the sum stays below precision
        if let (Valuation::Finite(x), Valuation::Finite(y)) = (va, vb) {
            if x + y < field.n_pi() {
                prop_assert_eq!(a.mul(&b).valuation(), Valuation::Finite(x + y));
            }
        }
        // ultrametric inequality, with equality at distinct valuations
        let vsum = a.add(&b).valuation();
        prop_assert!(vsum >= va.min(vb));
        if va != vb {
            prop_assert_eq!(vsum, va.min(vb));
        }
    }

    #[test]
    fn digit_round_trip(
        fi in 0usize..5,
        a in proptest::array::uniform3(any::<i64>()),
    ) {
        let field = &fields()[fi];
        let a = element(field, &a);
        let digits = a.digit_expansion(field.n_pi()).unwrap();
        prop_assert_eq!(field.from_digits(&digits), a);
    }

    #[test]
    fn unit_part_reassembles(
        fi in 0usize..5,
        a in proptest::array::uniform3(any::<i64>()),
    ) {
        let field = &fields()[fi];
        let a = element(field, &a);
        if let Ok((l, w)) = a.unit_part() {
            prop_assert!(w.is_unit());
            prop_assert_eq!(field.pi_pow(l).mul(&w), a);
        }
    }

    #[test]
    fn evaluate_is_order_independent(
        fi in 0usize..5,
        coeffs in proptest::collection::vec(1i64..1_000_000, 2..6),
        values in proptest::collection::vec(any::<i64>(), 2..6),
        rot in 0usize..6,
    ) {
        let field = &fields()[fi];
        let n = coeffs.len().min(values.len());
        let cs: Vec<RingElement> = coeffs[..n].iter().map(|&x| field.from_int(2 * x + 1)).collect();
        let bs: Vec<RingElement> = values[..n].iter().map(|&x| field.from_int(x)).collect();
        let form = AdditiveForm::new(field, 6, cs.clone()).unwrap();
        let direct = form.evaluate(&bs).unwrap();
        // rotate the term order; the canonical result is identical
        let k = rot % n;
        let cs2: Vec<RingElement> = cs[k..].iter().chain(&cs[..k]).cloned().collect();
        let bs2: Vec<RingElement> = bs[k..].iter().chain(&bs[..k]).cloned().collect();
        let permuted = AdditiveForm::new(field, 6, cs2).unwrap().evaluate(&bs2).unwrap();
        prop_assert_eq!(direct, permuted);
    }

    #[test]
    fn rotation_shifts_profile_and_pulls_back(
        fi in 0usize..5,
        levels in proptest::collection::vec(0u32..6, 2..7),
        seeds in proptest::collection::vec(any::<u64>(), 2..7),
        r in 0u32..6,
    ) {
        let field = &fields()[fi];
        let n = levels.len().min(seeds.len());
        let mut rng = SplitMix64::new(seeds[0]);
        let coeffs: Vec<RingElement> = levels[..n]
            .iter()
            .map(|&l| field.pi_pow(l).mul(&random_unit(field, &mut rng, 8)))
            .collect();
        let form = AdditiveForm::new(field, 6, coeffs).unwrap();
        let (rot, map) = form.rotate(r).unwrap();
        let rotated_profile = rot.profile();
        let shifted_profile = form.profile().rotated(r);
        prop_assert_eq!(rotated_profile.counts(), shifted_profile.counts());
        // a certificate of the rotated form pulls back and re-verifies
        let assignment: Vec<RingElement> = (0..n)
            .map(|i| if i == 0 {
                field.one()
            } else if rng.next_bit() {
                field.from_int(rng.next_below(1 << 20) as i64)
            } else {
                field.zero()
            })
            .collect();
        let achieved = rot.evaluate(&assignment).unwrap().valuation();
        let n_target = match achieved {
            Valuation::Finite(v) => v,
            Valuation::AtLeastPrecision => field.n_pi(),
        };
        let cert = ZeroCertificate { assignment, n_target, pivot: 0 };
        prop_assert!(rot.verify_certificate(&cert).passes);
        let pulled = map.pull_back(&form, &cert).unwrap();
        // the pulled assignment is integral with a unit pivot, and its
        // valuation is achieved + t*d - r for t = max(q_i - v(beta_i))
        prop_assert!(pulled.assignment[pulled.pivot].is_unit());
        let t = cert
            .assignment
            .iter()
            .zip(map.q())
            .filter_map(|(b, &q)| b.valuation().finite().map(|v| q as i64 - v as i64))
            .max()
            .unwrap();
        let shift = t * 6 - r as i64;
        let expected = match achieved {
            Valuation::Finite(v) => {
                let x = v as i64 + shift;
                prop_assert!(x >= 0);
                if (x as u32) < field.n_pi() {
                    Some(Valuation::Finite(x as u32))
                } else {
                    None
                }
            }
            Valuation::AtLeastPrecision => None,
        };
        let measured = form.evaluate(&pulled.assignment).unwrap().valuation();
        if let Some(exp) = expected {
            prop_assert_eq!(measured, exp);
        }
        // when the support realizes the rotation's full level shift the
        // certificate re-verifies at the same target
        if shift >= 0 {
            prop_assert!(form.verify_certificate(&pulled).passes);
        }
    }

    #[test]
    fn contraction_gains_a_level_and_stays_sound(
        fi in 0usize..5,
        ua in any::<u64>(),
        ub in any::<u64>(),
        mask in any::<u32>(),
    ) {
        let field = &fields()[fi];
        let e = field.e() as u32;
        let mut rng = SplitMix64::new(ua ^ ub.rotate_left(17));
        let ca = random_unit(field, &mut rng, field.n_pi());
        let cb = random_unit(field, &mut rng, field.n_pi());
        let form = AdditiveForm::new(field, 6, vec![ca, cb]).unwrap();
        let a = lift_original(&form, 0);
        let b = lift_original(&form, 1);
        let steering: Vec<(u32, SteerMode)> = (1..e)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| (k, if mask >> (k + 16) & 1 == 1 { SteerMode::Stop } else { SteerMode::Bypass }))
            .collect();
        let z = contract_pair(&a, &b, &steering).unwrap();
        prop_assert!(z.level() > Valuation::Finite(0));
        prop_assert!(z.is_sound(&form));
        // every achievable outcome is reproducible and sound
        for out in achievable_levels(&a, &b).unwrap() {
            if let Valuation::Finite(l) = out.level {
                let v = steer_to(&a, &b, SteerRequest::Exactly(l)).unwrap();
                prop_assert_eq!(v.level(), out.level);
                prop_assert!(v.is_sound(&form));
            }
        }
    }
}

#[test]
fn normalization_exists_for_all_small_profiles() {
    // every profile with d = 6 and 1 <= s <= 12 admits a rotation meeting
    // the prefix inequalities, and the smallest one is found
    let d = 6usize;
    for s in 1..=12usize {
        let mut counts = vec![0usize; d];
        enumerate_compositions(d, s, 0, &mut counts, &mut |profile: &[usize]| {
            let p = LevelProfile::new(profile.to_vec());
            let found = (0..d as u32).find(|&r| p.rotated(r).is_normalized());
            assert!(found.is_some(), "no valid rotation for profile {profile:?}");
        });
    }
}

fn enumerate_compositions(
    d: usize,
    s: usize,
    k: usize,
    counts: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if k == d - 1 {
        counts[k] = s - counts[..k].iter().sum::<usize>();
        visit(counts);
        return;
    }
    let used: usize = counts[..k].iter().sum();
    for c in 0..=(s - used) {
        counts[k] = c;
        enumerate_compositions(d, s, k + 1, counts, visit);
    }
    counts[k] = 0;
}

#[test]
fn steering_stop_and_bypass_small_sweep() {
    // for e in {2, 3} and every k < e: whenever a pair contraction can
    // pass level l + 2k at all, some steering lands exactly there and
    // some lands at l + 2k + 1 or higher
    for field in [
        Field::from_i64(2, &[-2, 0], 32).unwrap(),
        Field::from_i64(3, &[-2, 0, 0], 40).unwrap(),
    ] {
        let e = field.e() as u32;
        let mut rng = SplitMix64::new(0xBEEF);
        let mut conditioned = vec![0u32; e as usize];
        for _ in 0..200 {
            let ca = random_unit(&field, &mut rng, field.n_pi());
            let cb = random_unit(&field, &mut rng, field.n_pi());
            let form = AdditiveForm::new(&field, 6, vec![ca, cb]).unwrap();
            let a = lift_original(&form, 0);
            let b = lift_original(&form, 1);
            let best = achievable_levels(&a, &b).unwrap().last().unwrap().level;
            for k in 1..e {
                if best < Valuation::Finite(2 * k) {
                    continue;
                }
                conditioned[k as usize] += 1;
                let stop = steer_to(&a, &b, SteerRequest::Exactly(2 * k)).unwrap();
                assert_eq!(stop.level(), Valuation::Finite(2 * k));
                assert!(stop.is_sound(&form));
                let past = steer_to(&a, &b, SteerRequest::AtLeast(2 * k + 1)).unwrap();
                assert!(past.level() >= Valuation::Finite(2 * k + 1));
                assert!(past.is_sound(&form));
            }
        }
        // the conditioned samples must actually exercise every k
        for (k, &count) in conditioned.iter().enumerate().skip(1) {
            assert!(count >= 10, "too few pairs reach level {}", 2 * k);
        }
    }
}

#[test]
fn used_sets_stay_disjoint_along_chains() {
    let field = Field::from_i64(2, &[-2, 0], 32).unwrap();
    let mut rng = SplitMix64::new(12345);
    let coeffs: Vec<RingElement> = (0..8)
        .map(|_| random_unit(&field, &mut rng, field.n_pi()))
        .collect();
    let form = AdditiveForm::new(&field, 6, coeffs).unwrap();
    let p1 = contract_pair(&lift_original(&form, 0), &lift_original(&form, 1), &[]).unwrap();
    let p2 = contract_pair(&lift_original(&form, 2), &lift_original(&form, 3), &[]).unwrap();
    assert!(p1.used().is_disjoint(p2.used()));
    if p1.level() == p2.level() {
        let z = contract_pair(&p1, &p2, &[]).unwrap();
        assert_eq!(z.used().len(), 4);
        assert!(z.is_sound(&form));
        // a certificate built from the chain assigns each original once
        let assignment = z.assignment_for(&form);
        let nonzero = assignment.iter().filter(|b| !b.is_zero()).count();
        assert_eq!(nonzero, 4);
    }
}
