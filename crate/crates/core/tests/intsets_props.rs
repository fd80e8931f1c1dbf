use std::collections::BTreeSet;

use amenable::intsets::PeriodicSet;
use amenable::Rational;
use proptest::prelude::*;

/// One-sided set: `{x >= start : x mod p ∈ residues}` plus finite extras.
fn nat_set() -> impl Strategy<Value = PeriodicSet> {
    (1u64..=8, any::<u16>(), 0i64..6, prop::collection::vec(0i64..20, 0..4)).prop_map(|(p, mask, start, extra)| {
        let residues: Vec<u64> = (0..p).filter(|r| mask & (1 << r) != 0).collect();
        PeriodicSet::from_start(p, &residues, start)
            .unwrap()
            .union(&PeriodicSet::finite(extra))
            .unwrap()
    })
}

fn two_sided_set() -> impl Strategy<Value = PeriodicSet> {
    (1u64..=6, any::<u8>(), any::<u8>(), -5i64..5, prop::collection::vec(-12i64..12, 0..4)).prop_map(
        |(p, lmask, rmask, split, extra)| {
            let pick = |m: u8| (0..p).filter(|r| m & (1 << r) != 0).collect::<Vec<u64>>();
            let right = PeriodicSet::from_start(p, &pick(rmask), split).unwrap();
            let left = PeriodicSet::from_start(p, &pick(lmask), 1 - split).unwrap().negate();
            right.union(&left).unwrap().union(&PeriodicSet::finite(extra)).unwrap()
        },
    )
}

fn members(s: &PeriodicSet, lo: i64, hi: i64) -> Vec<i64> {
    (lo..hi).filter(|x| s.contains(*x)).collect()
}

fn brute_density(s: &PeriodicSet) -> Rational {
    // average over one full period far to the right of the transition
    let p = s.period() as i64;
    let start = s.transition().1.max(0) + p;
    Rational::ratio(members(s, start, start + p).len(), p as usize)
}

proptest! {
    #[test]
    fn sumset_matches_truncated_brute_force(a in nat_set(), b in nat_set()) {
        let s = a.sumset(&b).unwrap();
        let bound = 120;
        let av = members(&a, 0, bound);
        let bv = members(&b, 0, bound);
        let brute: BTreeSet<i64> = av.iter().flat_map(|x| bv.iter().map(move |y| x + y)).filter(|z| *z < bound).collect();
        prop_assert_eq!(members(&s, -20, bound), brute.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn two_sided_sumset_with_finite(a in two_sided_set(), f in prop::collection::btree_set(-6i64..6, 1..4)) {
        let s = a.sumset(&PeriodicSet::finite(f.iter().copied())).unwrap();
        for x in -40..40 {
            let direct = f.iter().any(|t| a.contains(x - t));
            prop_assert_eq!(s.contains(x), direct);
        }
    }

    #[test]
    fn boolean_ops_pointwise(a in two_sided_set(), b in two_sided_set()) {
        let u = a.union(&b).unwrap();
        let i = a.intersection(&b).unwrap();
        let c = a.complement();
        for x in -50..50 {
            prop_assert_eq!(u.contains(x), a.contains(x) || b.contains(x));
            prop_assert_eq!(i.contains(x), a.contains(x) && b.contains(x));
            prop_assert_eq!(c.contains(x), !a.contains(x));
        }
    }

    #[test]
    fn inclusion_exclusion_densities(a in nat_set(), b in nat_set()) {
        let u = a.union(&b).unwrap().exact_density();
        let i = a.intersection(&b).unwrap().exact_density();
        prop_assert_eq!(u + i, a.exact_density() + b.exact_density());
        prop_assert_eq!(a.exact_density(), brute_density(&a));
        prop_assert_eq!(a.complement().exact_density(), Rational::one() - a.exact_density());
    }

    #[test]
    fn canonical_form_is_unique(a in two_sided_set(), t in -10i64..10) {
        // same set built two ways compares equal structurally
        let back = a.translate(t).translate(-t);
        prop_assert_eq!(&back, &a);
        let json = serde_json::to_string(&a).unwrap();
        let parsed: PeriodicSet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&parsed, &a);
        prop_assert_eq!(a.complement().complement(), a);
    }

    #[test]
    fn thickness_agrees_with_long_runs(a in two_sided_set()) {
        let v = a.thickness();
        let p = a.period() as i64;
        let (lo, hi) = a.transition();
        // a run of length 2p beyond the transition region exists iff a tail is full
        let right_run = (hi..hi + 2 * p).all(|x| a.contains(x));
        let left_run = (lo - 2 * p..lo).all(|x| a.contains(x));
        prop_assert_eq!(v.thick, right_run || left_run);
        if let Some(r) = v.refuter {
            let gap_seen = (hi..hi + 2 * p).collect::<Vec<_>>()
                .windows(r.recurring_gap as usize)
                .any(|w| w.iter().all(|x| !a.contains(*x)));
            prop_assert!(r.recurring_gap == 0 || gap_seen);
        }
    }
}

#[test]
fn counterexample_family_densities() {
    for (m, n, l) in [(1, 1, 4), (2, 1, 5), (1, 2, 6)] {
        for k in 1..=8 {
            let r = amenable::intsets::counterexample_report(m, n, l, k).unwrap();
            assert!(r.densities_exact_and_not_thick(), "{m} {n} {l} {k}");
            // the exact sumset is ⋃ [Lnk, Lnk + (M+N+1)k - 2)
            let exact = PeriodicSet::repeated_intervals(&[(0, ((m + n + 1) * k - 2) as i64)], l * k, false).unwrap();
            assert_eq!(r.sumset, exact);
            assert_eq!(r.observed_gap(), Some(l * k - (m + n + 1) * k + 2));
        }
    }
}
