use std::collections::BTreeSet;

use amenable::group::Side;
use amenable::lemmas::{concentration_chain, concentration_shift, greedy_delta_cover, overlap_pair_bound, window_delta_set, BoundReason, ChainPlan};
use amenable::oracle::SetExpr;
use amenable::{GroupElement, GroupModel, Rational, Window};
use proptest::prelude::*;

fn iv(a: i64, b: i64) -> Window {
    Window::interval(a, b).unwrap()
}

fn subset_of(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(0..n as i64, 0..=n).prop_map(|s| s.into_iter().collect())
}

fn scalars(xs: &[i64]) -> Vec<GroupElement> {
    xs.iter().map(|x| GroupElement::scalar(*x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_matches_pair_enumeration(
        (n, fam) in (2usize..=64).prop_flat_map(|n| (Just(n), prop::collection::vec(subset_of(n), 2..=8)))
    ) {
        let e = iv(0, n as i64);
        let family: Vec<_> = fam.iter().map(|c| scalars(c)).collect();
        let r = overlap_pair_bound(&e, &family).unwrap();
        let sets: Vec<BTreeSet<i64>> = fam.iter().map(|c| c.iter().copied().collect()).collect();
        let mut best = ((0, 1), 0);
        let mut sum = 0u64;
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let o = sets[i].intersection(&sets[j]).count();
                sum += 2 * o as u64;
                if o > best.1 {
                    best = ((i, j), o);
                }
            }
        }
        prop_assert_eq!((r.best_pair, r.best_overlap, r.pair_sum), (best.0, best.1, sum));
        let t: usize = sets.iter().map(|s| s.len()).sum();
        prop_assert!(r.holds);
        prop_assert!((sum as i128) * (n as i128) >= (t * t) as i128 - (t * n) as i128);
    }

    #[test]
    fn shift_is_exhaustive_max_on_z(
        u0 in -20i64..20, ul in 1i64..48, v0 in -20i64..20, vl in 1i64..48,
        cm in prop::collection::vec(any::<bool>(), 48), dm in prop::collection::vec(any::<bool>(), 48),
        left in any::<bool>(),
    ) {
        let (u, v) = (iv(u0, u0 + ul), iv(v0, v0 + vl));
        let mut c: Vec<i64> = (0..ul).filter(|i| cm[*i as usize]).map(|i| u0 + i).collect();
        let mut d: Vec<i64> = (0..vl).filter(|i| dm[*i as usize]).map(|i| v0 + i).collect();
        if c.is_empty() { c.push(u0); }
        if d.is_empty() { d.push(v0); }
        let side = if left { Side::Left } else { Side::Right };
        let r = concentration_shift(&u, &v, &scalars(&c), &scalars(&d), side).unwrap();
        let best = (u0..u0 + ul).map(|z| d.iter().filter(|x| c.contains(&(*x + z))).count()).max().unwrap();
        prop_assert_eq!(r.count, best);
        prop_assert!(r.achieved >= r.floor);
    }

    #[test]
    fn shift_is_exhaustive_max_on_cyclic(
        n in 2i64..24, cm in prop::collection::vec(any::<bool>(), 24), dm in prop::collection::vec(any::<bool>(), 24),
        sub in 1i64..24,
    ) {
        let g = GroupModel::FiniteCyclic { n: n as u64 };
        let w = Window::from_points(&g, (0..n).map(GroupElement::scalar)).unwrap();
        let u = Window::from_points(&g, (0..sub.min(n)).map(GroupElement::scalar)).unwrap();
        let mut c: Vec<i64> = (0..sub.min(n)).filter(|i| cm[*i as usize]).collect();
        let mut d: Vec<i64> = (0..n).filter(|i| dm[*i as usize]).collect();
        if c.is_empty() { c.push(0); }
        if d.is_empty() { d.push(0); }
        let r = concentration_shift(&u, &w, &scalars(&c), &scalars(&d), Side::Right).unwrap();
        let best = (0..sub.min(n)).map(|z| d.iter().filter(|x| c.contains(&((*x + z) % n))).count()).max().unwrap();
        prop_assert_eq!(r.count, best);
        prop_assert!(r.achieved >= r.floor);
    }

    #[test]
    fn greedy_cover_replays_and_respects_bound(
        m in 2i64..6, r in 0i64..6, num in 0i64..3, len in 40i64..120, p in 4i64..30,
    ) {
        let e = iv(0, len);
        let c: Vec<i64> = (0..len).filter(|x| x % m == r % m).collect();
        let gamma = Rational::ratio(c.len(), len as usize);
        let eps = &(&gamma * &gamma) * &Rational::new(num, 4);
        let rep = greedy_delta_cover(&scalars(&c), &e, &eps, &iv(0, p), &GroupElement::scalar(0), None).unwrap();
        prop_assert!(rep.covered);
        let cs: BTreeSet<i64> = c.iter().copied().collect();
        for w in &rep.witnesses {
            let d = w.d.coords()[0];
            prop_assert_eq!(w.p.coords()[0], w.f.coords()[0] + d);
            let o = cs.iter().filter(|x| cs.contains(&(*x - d))).count();
            prop_assert_eq!(o, w.overlap);
            prop_assert!(eps.lt_count(o, len as usize));
        }
        prop_assert_eq!(rep.witnesses.len(), p as usize);
        if let Some(b) = rep.bound {
            prop_assert!(rep.f.len() as u64 <= b, "|F| = {} bound {} reason {:?}", rep.f.len(), b, rep.reason);
            prop_assert_ne!(rep.reason, Some(BoundReason::Violated));
        }
    }

    #[test]
    fn window_delta_is_strict_overlap(c in subset_of(40), num in 0i64..6) {
        let e = iv(0, 40);
        let eps = Rational::new(num, 10);
        let got = window_delta_set(&scalars(&c), &e, &eps, &iv(-10, 11)).unwrap();
        let got: Vec<i64> = got.iter().map(|m| m.g.coords()[0]).collect();
        let cs: BTreeSet<i64> = c.iter().copied().collect();
        let want: Vec<i64> = (-10..=10).filter(|g| {
            let o = cs.iter().filter(|x| cs.contains(&(*x - g))).count() as i64;
            o * 10 > num * 40
        }).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn chain_meets_product_minus_budget(ms in prop::collection::vec((1u64..5, 0i64..5), 1..4), left in any::<bool>()) {
        let z = GroupModel::integers();
        let sets: Vec<_> = ms.iter().map(|(m, r)| SetExpr::multiples(*m, *r).compile(&z).unwrap()).collect();
        let plan = ChainPlan { m_start: 8, max_len: 2048, ..ChainPlan::default() };
        let side = if left { Side::Left } else { Side::Right };
        let rep = concentration_chain(&sets, &iv(0, 120), &plan, side).unwrap();
        prop_assert!(rep.holds);
        prop_assert!(rep.achieved >= &rep.product - &rep.budget);
    }
}
