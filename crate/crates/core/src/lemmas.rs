//! Exact finite versions of the overlap pigeonhole, the window Δ-set with
//! its greedy cover, the concentration shift and the concentration chain.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{upper_density_estimate, DensityParams, ShiftSpec};
use crate::error::{Error, Result};
use crate::group::{symmetric_difference_size, GroupElement, GroupModel, Side, Window, WindowFamily, WindowSpec};
use crate::oracle::SetOracle;
use crate::rational::Rational;

/// Positions of `set` inside `window`, erroring on elements outside it.
fn indices_in(window: &Window, set: &[GroupElement], what: &str) -> Result<Vec<usize>> {
    set.iter()
        .map(|g| window.index_of(g).ok_or_else(|| Error::Parameter(format!("{what} element {g} lies outside the window"))))
        .collect()
}

fn sorted(mut v: Vec<GroupElement>) -> Vec<GroupElement> {
    v.sort();
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub window_size: usize,
    pub sizes: Vec<usize>,
    pub total: usize,
    /// `Σ_{λ≠μ} |C_λ ∩ C_μ|` over ordered pairs.
    pub pair_sum: u64,
    /// Lexicographically least pair `λ < μ` of maximal overlap.
    pub best_pair: (usize, usize),
    pub best_overlap: usize,
    /// `(t²/|E| − t) / (|Λ|(|Λ|−1))`: the mean ordered-pair overlap forced
    /// by Cauchy–Schwarz.
    pub bound: Rational,
    /// `pair_sum · |E| ≥ t² − t·|E|`, in integers.
    pub holds: bool,
}

/// Overlap statistics of a family of subsets of `E`.
pub fn overlap_pair_bound(e: &Window, family: &[Vec<GroupElement>]) -> Result<OverlapReport> {
    if family.len() < 2 {
        return Err(Error::Parameter("the family needs at least two members".into()));
    }
    let n = e.len();
    let words = n.div_ceil(64);
    let mut bits = Vec::with_capacity(family.len());
    let mut sizes = Vec::with_capacity(family.len());
    for c in family {
        let c = sorted(c.clone());
        let mut b = vec![0u64; words];
        for i in indices_in(e, &c, "family")? {
            b[i / 64] |= 1 << (i % 64);
        }
        sizes.push(c.len());
        bits.push(b);
    }
    let m = family.len();
    let mut pair_sum = 0u64;
    let mut best = ((0, 1), 0usize);
    for i in 0..m {
        for j in i + 1..m {
            let o: usize = bits[i].iter().zip(&bits[j]).map(|(a, b)| (a & b).count_ones() as usize).sum();
            pair_sum += 2 * o as u64;
            if o > best.1 {
                best = ((i, j), o);
            }
        }
    }
    let total: usize = sizes.iter().sum();
    let t = BigInt::from(total);
    let holds = BigInt::from(pair_sum) * BigInt::from(n) >= &t * &t - &t * BigInt::from(n);
    let bound = (Rational::ratio(total * total, n) - Rational::ratio(total, 1)) / Rational::ratio(m * (m - 1), 1);
    Ok(OverlapReport { window_size: n, sizes, total, pair_sum, best_pair: best.0, best_overlap: best.1, bound, holds })
}

/// `|C ∩ gC ∩ E|` for `C ⊆ E` given by its sorted members.
fn self_overlap(model: &GroupModel, c: &[GroupElement], g: &GroupElement) -> usize {
    let gi = model.inv_fast(g);
    c.iter().filter(|x| c.binary_search(&model.mul_fast(&gi, x)).is_ok()).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDeltaMember {
    pub g: GroupElement,
    /// `|C ∩ gC ∩ E|`.
    pub overlap: usize,
}

/// `{g ∈ candidates : |C ∩ gC ∩ E| > ε|E|}`, strict and exact.
pub fn window_delta_set(
    c: &[GroupElement],
    e: &Window,
    epsilon: &Rational,
    candidates: &Window,
) -> Result<Vec<WindowDeltaMember>> {
    if epsilon.is_negative() {
        return Err(Error::Parameter("ε must be >= 0".into()));
    }
    let c = sorted(c.to_vec());
    indices_in(e, &c, "C")?;
    let model = e.group();
    let need = epsilon.strict_count_threshold(e.len());
    let gs = candidates.to_vec();
    let hits: Vec<Option<WindowDeltaMember>> = gs
        .par_iter()
        .map(|g| {
            let o = self_overlap(model, &c, g);
            (o >= need).then(|| WindowDeltaMember { g: g.clone(), overlap: o })
        })
        .collect();
    Ok(hits.into_iter().flatten().collect())
}

/// Why the greedy cover respects its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundReason {
    /// `|F| · γ_eff ≤ 1`, and `1/γ ≤ (γ−ε)/(γ²−ε)` for `γ ≤ 1`.
    Small,
    /// Every pairwise overlap `|g_iC ∩ g_jC ∩ E|` is at most `ε|E|`, so the
    /// exact overlap inequality forces the bound.
    Overlap,
    /// Neither argument applies, but the size was checked directly.
    Direct,
    /// The bound fails at this window scale.
    Violated,
}

/// `p = f · d` with `d ∈ 𝒟` and `|C ∩ dC ∩ E| = overlap`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverWitness {
    pub p: GroupElement,
    pub f: GroupElement,
    pub d: GroupElement,
    pub overlap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyCoverReport {
    pub f: Vec<GroupElement>,
    pub epsilon: Rational,
    pub window: WindowSpec,
    pub c_size: usize,
    /// `min_i |g_i C ∩ E| / |E|`.
    pub gamma_eff: Rational,
    /// `⌊(γ_eff − ε)/(γ_eff² − ε)⌋` when `γ_eff² > ε`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<BoundReason>,
    /// `max_{i<j} |g_iC ∩ g_jC ∩ E|`.
    pub max_pair_overlap: usize,
    pub covered: bool,
    /// Elements of `P` not in `F·𝒟` (only members of `F` can remain).
    pub residual: Vec<GroupElement>,
    pub witnesses: Vec<CoverWitness>,
}

/// `⌊(γ − ε)/(γ² − ε)⌋` when `γ² > ε`.
pub fn greedy_bound(gamma: &Rational, epsilon: &Rational) -> Option<u64> {
    let g2 = gamma * gamma;
    (g2 > *epsilon).then(|| ((gamma - epsilon) / (&g2 - epsilon)).floor_u64())
}

/// Greedy recursion covering `P` by translates `F·𝒟` of the window Δ-set.
///
/// Starts from `g0`, then repeatedly adds the least element of `P` not yet
/// covered. `𝒟` is restricted to `candidates` when given, else evaluated
/// exactly at each needed point.
pub fn greedy_delta_cover(
    c: &[GroupElement],
    e: &Window,
    epsilon: &Rational,
    p: &Window,
    g0: &GroupElement,
    candidates: Option<&Window>,
) -> Result<GreedyCoverReport> {
    if epsilon.is_negative() {
        return Err(Error::Parameter("ε must be >= 0".into()));
    }
    if !p.contains(g0) {
        return Err(Error::Parameter(format!("g0 = {g0} is not in P")));
    }
    let c = sorted(c.to_vec());
    indices_in(e, &c, "C")?;
    let model = e.group();
    let need = epsilon.strict_count_threshold(e.len());
    let memo: Mutex<HashMap<GroupElement, usize>> = Mutex::new(HashMap::new());
    let in_delta = |d: &GroupElement| -> Option<usize> {
        if candidates.is_some_and(|w| !w.contains(d)) {
            return None;
        }
        if let Some(o) = memo.lock().expect("memo lock").get(d) {
            return (*o >= need).then_some(*o);
        }
        let o = self_overlap(model, &c, d);
        memo.lock().expect("memo lock").insert(d.clone(), o);
        (o >= need).then_some(o)
    };
    let covering = |x: &GroupElement, f: &[GroupElement]| -> Option<CoverWitness> {
        f.iter().find_map(|g| {
            let d = model.mul_fast(&model.inv_fast(g), x);
            in_delta(&d).map(|o| CoverWitness { p: x.clone(), f: g.clone(), d, overlap: o })
        })
    };
    let points = p.to_vec();
    let mut f = vec![g0.clone()];
    loop {
        let next = points.iter().find(|x| !f.contains(x) && covering(x, &f).is_none());
        match next {
            Some(x) => f.push(x.clone()),
            None => break,
        }
    }
    let mut witnesses = Vec::new();
    let mut residual = Vec::new();
    for x in &points {
        match covering(x, &f) {
            Some(w) => witnesses.push(w),
            None => residual.push(x.clone()),
        }
    }

    // translates g_i C restricted to E
    let translates: Vec<Vec<GroupElement>> = f
        .iter()
        .map(|g| sorted(c.iter().map(|x| model.mul_fast(g, x)).filter(|y| e.contains(y)).collect()))
        .collect();
    let gamma_count = translates.iter().map(|t| t.len()).min().unwrap_or(0);
    let gamma_eff = Rational::ratio(gamma_count, e.len());
    let mut max_pair = 0;
    for i in 0..translates.len() {
        for j in i + 1..translates.len() {
            let o = translates[i].iter().filter(|x| translates[j].binary_search(x).is_ok()).count();
            max_pair = max_pair.max(o);
        }
    }
    let bound = greedy_bound(&gamma_eff, epsilon);
    let reason = bound.map(|b| {
        if gamma_count * f.len() <= e.len() {
            BoundReason::Small
        } else if !epsilon.lt_count(max_pair, e.len()) {
            BoundReason::Overlap
        } else if f.len() as u64 <= b {
            BoundReason::Direct
        } else {
            BoundReason::Violated
        }
    });
    Ok(GreedyCoverReport {
        f,
        epsilon: epsilon.clone(),
        window: e.spec(),
        c_size: c.len(),
        gamma_eff,
        bound,
        reason,
        max_pair_overlap: max_pair,
        covered: residual.is_empty(),
        residual,
        witnesses,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub side: Side,
    /// `ζ` (right) or `ϑ` (left), the least maximizer in window order.
    pub shift: GroupElement,
    /// `|Dζ ∩ C|` or `|ϑD ∩ C|`.
    pub count: usize,
    pub achieved: Rational,
    pub floor: Rational,
    /// `max_{d∈D} |dU △ U| / |U|` (right) or `|Ud △ U| / |U|` (left).
    pub max_defect: Rational,
    pub c_size: usize,
    pub d_size: usize,
    pub u_size: usize,
    pub v_size: usize,
}

/// Exhaustive scan over `U` for the best concentrating shift.
pub fn concentration_shift(u: &Window, v: &Window, c: &[GroupElement], d: &[GroupElement], side: Side) -> Result<ShiftReport> {
    let c = sorted(c.to_vec());
    let d = sorted(d.to_vec());
    if c.is_empty() {
        return Err(Error::Empty("C"));
    }
    if d.is_empty() {
        return Err(Error::Empty("D"));
    }
    let c_idx = indices_in(u, &c, "C")?;
    indices_in(v, &d, "D")?;
    let model = u.group();
    let mut in_c = vec![false; u.len()];
    for i in c_idx {
        in_c[i] = true;
    }
    let counts: Vec<usize> = match (model, u.box_ranges()) {
        (GroupModel::IntegerLattice { d: 1 }, Some(r)) => {
            // ℤ: count[ζ] = #{(d, c) : c − d = ζ}
            let (u0, u1) = r[0];
            let mut counts = vec![0usize; u.len()];
            for dd in &d {
                let dv = dd.coords()[0];
                for cc in &c {
                    let z = cc.coords()[0] - dv;
                    if z >= u0 && z <= u1 {
                        counts[(z - u0) as usize] += 1;
                    }
                }
            }
            counts
        }
        _ => {
            let member = |x: &GroupElement| u.index_of(x).is_some_and(|i| in_c[i]);
            u.to_vec()
                .par_iter()
                .map(|z| {
                    d.iter()
                        .filter(|dd| match side {
                            Side::Right => member(&model.mul_fast(dd, z)),
                            Side::Left => member(&model.mul_fast(z, dd)),
                        })
                        .count()
                })
                .collect()
        }
    };
    let (best_i, count) = counts.iter().enumerate().fold((0, 0), |b, (i, n)| if *n > b.1 { (i, *n) } else { b });
    let defect_side = match side {
        Side::Right => Side::Left,
        Side::Left => Side::Right,
    };
    let worst = d.par_iter().map(|dd| symmetric_difference_size(u, dd, defect_side)).max().unwrap_or(0);
    let max_defect = Rational::ratio(worst, u.len());
    let floor = Rational::ratio(c.len(), u.len()) * Rational::ratio(d.len(), v.len()) - max_defect.clone();
    Ok(ShiftReport {
        side,
        shift: u.get(best_i).expect("index in window"),
        count,
        achieved: Rational::ratio(count, v.len()),
        floor,
        max_defect,
        c_size: c.len(),
        d_size: d.len(),
        u_size: u.len(),
        v_size: v.len(),
    })
}

/// How the auxiliary windows of a chain are chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainPlan {
    pub family: WindowFamily,
    /// Window indices tried in doubling order from `m_start` up to `m_max`.
    pub m_start: u64,
    pub m_max: u64,
    /// Target defect per step; default `1/(100(n+1))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Rational>,
    /// Grid searched to place each `U_i` where `A_i` is dense.
    pub shifts: ShiftSpec,
    /// Largest auxiliary window, in elements.
    pub max_len: usize,
}

impl Default for ChainPlan {
    fn default() -> Self {
        ChainPlan {
            family: WindowFamily::Symmetric,
            m_start: 4,
            m_max: 1 << 20,
            tolerance: None,
            shifts: ShiftSpec::Identity,
            max_len: 1 << 15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    /// The auxiliary window `U_i`.
    pub u: WindowSpec,
    /// `|A_i ∩ U_i| / |U_i|`.
    pub alpha: Rational,
    pub shift: ShiftReport,
    /// `ξ_i = ζ⁻¹` (right) or `η_i = ϑ⁻¹` (left).
    pub xi: GroupElement,
    /// `|D_i| / |E|` after this step.
    pub achieved: Rational,
    /// Whether the per-step defect met the tolerance.
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub side: Side,
    pub e: WindowSpec,
    pub tolerance: Rational,
    /// `|A_0 ∩ E| / |E|`.
    pub alpha0: Rational,
    pub steps: Vec<ChainStep>,
    /// `|A_0 ∩ ⋂ A_i ξ_i ∩ E| / |E|`, or with `η_i A_i⁻¹` on the left.
    pub achieved: Rational,
    /// `Π α_i`.
    pub product: Rational,
    /// `Σ` per-step defects.
    pub budget: Rational,
    /// `achieved ≥ product − budget`.
    pub holds: bool,
    /// Final carrier set, members of `E`.
    #[serde(skip)]
    pub carrier: Vec<GroupElement>,
}

impl ChainReport {
    pub fn shifts(&self) -> Vec<GroupElement> {
        self.steps.iter().map(|s| s.xi.clone()).collect()
    }
}

/// Carrier after applying one chain step to `d`.
pub fn chain_filter(model: &GroupModel, a: &SetOracle, d: &[GroupElement], xi: &GroupElement, side: Side) -> Result<Vec<GroupElement>> {
    let zeta = model.inv_fast(xi);
    let keep: Vec<Result<bool>> = d
        .par_iter()
        .map(|x| match side {
            // x ∈ A ξ  ⟺  x ζ ∈ A
            Side::Right => a.contains(&model.mul_fast(x, &zeta)),
            // x ∈ η A⁻¹  ⟺  (ϑ x)⁻¹ ∈ A
            Side::Left => a.contains(&model.inv_fast(&model.mul_fast(&zeta, x))),
        })
        .collect();
    let mut out = Vec::new();
    for (x, k) in d.iter().zip(keep) {
        if k? {
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn max_defect(u: &Window, d: &[GroupElement], side: Side) -> usize {
    d.par_iter().map(|x| symmetric_difference_size(u, x, side)).max().unwrap_or(0)
}

/// Builds shifts `ξ_1, …, ξ_n` (right) or `η_1, …, η_n` (left) step by
/// step so that the carrier keeps density at least `Π α_i − budget` on `E`.
pub fn concentration_chain(sets: &[SetOracle], e: &Window, plan: &ChainPlan, side: Side) -> Result<ChainReport> {
    let (a0, rest) = sets.split_first().ok_or(Error::Empty("set list"))?;
    let model = e.group();
    if plan.m_start == 0 || plan.m_max < plan.m_start {
        return Err(Error::Parameter("chain plan needs 1 <= m_start <= m_max".into()));
    }
    let tolerance = plan.tolerance.clone().unwrap_or_else(|| Rational::ratio(1, 100 * (rest.len() + 1)));
    let mut carrier: Vec<GroupElement> = Vec::new();
    for g in e.iter() {
        if a0.contains(&g)? {
            carrier.push(g);
        }
    }
    let alpha0 = Rational::ratio(carrier.len(), e.len());
    let mut product = alpha0.clone();
    let mut budget = Rational::zero();
    let mut steps = Vec::new();
    for a in rest {
        if carrier.is_empty() {
            break;
        }
        // right: U left-invariant under D; left: U⁻¹ right-invariant under D
        let mut m = plan.m_start;
        let (base, defect) = loop {
            let w = plan.family.window(model, m, plan.max_len);
            let w = match w {
                Ok(w) => w,
                Err(Error::WindowCap { .. }) if !steps.is_empty() || m > plan.m_start => {
                    let prev = plan.family.window(model, m / 2, usize::MAX)?;
                    let probe = if side == Side::Left { prev.inverse()? } else { prev.clone() };
                    let defect = max_defect(&probe, &carrier, if side == Side::Left { Side::Right } else { Side::Left });
                    break (prev, defect);
                }
                Err(err) => return Err(err),
            };
            let probe = if side == Side::Left { w.inverse()? } else { w.clone() };
            let defect = max_defect(&probe, &carrier, if side == Side::Left { Side::Right } else { Side::Left });
            if !tolerance.lt_count(defect, w.len()) || m.saturating_mul(2) > plan.m_max {
                break (w, defect);
            }
            m *= 2;
        };
        let within = !tolerance.lt_count(defect, base.len());
        let n = base.params().n.unwrap_or(m);
        let params = DensityParams { family: plan.family, n_min: n, n_max: n, shifts: plan.shifts.clone(), cap: usize::MAX };
        let best = upper_density_estimate(a, &params)?;
        let u = base.right_translate(&best.shift)?;
        let c_members: Vec<GroupElement> = crate::setops::members_in(a, &u)?;
        let alpha = Rational::ratio(c_members.len(), u.len());
        let report = if c_members.is_empty() {
            None
        } else if side == Side::Right {
            Some(concentration_shift(&u, e, &c_members, &carrier, Side::Right)?)
        } else {
            let ui = u.inverse()?;
            let c_inv: Vec<GroupElement> = c_members.iter().map(|x| model.inv_fast(x)).collect();
            Some(concentration_shift(&ui, e, &c_inv, &carrier, Side::Left)?)
        };
        let Some(report) = report else {
            return Err(Error::Parameter("a chain set has no members in its auxiliary window".into()));
        };
        let xi = model.inv_fast(&report.shift);
        carrier = chain_filter(model, a, &carrier, &xi, side)?;
        product = &product * &alpha;
        budget = &budget + &report.max_defect;
        steps.push(ChainStep {
            u: u.spec(),
            alpha,
            achieved: Rational::ratio(carrier.len(), e.len()),
            within_tolerance: within,
            shift: report,
            xi,
        });
    }
    let achieved = Rational::ratio(carrier.len(), e.len());
    let holds = achieved >= &product - &budget;
    Ok(ChainReport { side, e: e.spec(), tolerance, alpha0, steps, achieved, product, budget, holds, carrier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SetExpr;

    fn z(xs: impl IntoIterator<Item = i64>) -> Vec<GroupElement> {
        xs.into_iter().map(GroupElement::scalar).collect()
    }

    fn iv(a: i64, b: i64) -> Window {
        Window::interval(a, b).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let e = iv(0, 10);
        let all = vec![z(0..10); 4];
        let r = overlap_pair_bound(&e, &all).unwrap();
        assert_eq!((r.best_overlap, r.bound.clone()), (10, Rational::from_integer(10)));
        assert!(r.holds);
        let disjoint = vec![z(0..3), z(3..6), z(6..9)];
        let r = overlap_pair_bound(&e, &disjoint).unwrap();
        assert_eq!(r.best_overlap, 0);
        assert!(r.bound <= Rational::zero() && r.holds);
        assert!(overlap_pair_bound(&e, &[z(0..3)]).is_err());
        assert!(overlap_pair_bound(&e, &[z(0..3), z(8..12)]).is_err());
    }

    #[test]
    fn window_delta_examples() {
        let e = iv(0, 100);
        let evens: Vec<_> = z((0..100).filter(|x| x % 2 == 0));
        let d = window_delta_set(&evens, &e, &Rational::zero(), &iv(-5, 6)).unwrap();
        assert_eq!(d.iter().map(|m| m.g.coords()[0]).collect::<Vec<_>>(), vec![-4, -2, 0, 2, 4]);
        let full = window_delta_set(&z(0..100), &e, &Rational::new(1, 2), &iv(-3, 4)).unwrap();
        assert_eq!(full.len(), 7);
        let none = window_delta_set(&evens, &e, &Rational::new(1, 2), &iv(0, 1)).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn greedy_examples() {
        let e = iv(0, 100);
        let evens: Vec<_> = z((0..100).filter(|x| x % 2 == 0));
        let g0 = GroupElement::scalar(0);
        let r = greedy_delta_cover(&evens, &e, &Rational::zero(), &iv(0, 20), &g0, None).unwrap();
        assert_eq!(r.f, z([0, 1]));
        assert_eq!(r.bound, Some(2));
        assert!(r.covered);
        let one = greedy_delta_cover(&z(0..100), &e, &Rational::zero(), &iv(0, 20), &g0, None).unwrap();
        assert_eq!(one.f, z([0]));
        let e99 = iv(0, 99);
        let threes: Vec<_> = z((0..99).filter(|x| x % 3 == 0));
        let r3 = greedy_delta_cover(&threes, &e99, &Rational::zero(), &iv(0, 20), &g0, None).unwrap();
        assert_eq!(r3.f, z([0, 1, 2]));
        assert_eq!(r3.bound, Some(3));
        assert!(r3.f.len() as u64 <= r3.bound.unwrap());
    }

    #[test]
    fn shift_examples() {
        let c6 = GroupModel::FiniteCyclic { n: 6 };
        let g = crate::group::folner_window(&c6, 1, 100).unwrap();
        let all = g.to_vec();
        let r = concentration_shift(&g, &g, &all, &all, Side::Right).unwrap();
        assert_eq!((r.achieved.clone(), r.floor.clone()), (Rational::one(), Rational::one()));
        let w = iv(0, 100);
        let evens: Vec<_> = z((0..100).filter(|x| x % 2 == 0));
        let r = concentration_shift(&w, &w, &evens, &evens, Side::Right).unwrap();
        assert_eq!(r.shift, GroupElement::scalar(0));
        assert_eq!(r.achieved, Rational::new(1, 2));
        assert!(r.achieved >= r.floor);
    }

    #[test]
    fn chain_examples() {
        let zm = GroupModel::integers();
        let e = iv(0, 60);
        let evens = SetExpr::multiples(2, 0).compile(&zm).unwrap();
        let odds = SetExpr::multiples(2, 1).compile(&zm).unwrap();
        let plan = ChainPlan { m_start: 8, max_len: 4096, ..ChainPlan::default() };
        let r0 = concentration_chain(std::slice::from_ref(&evens), &e, &plan, Side::Right).unwrap();
        assert_eq!(r0.achieved, Rational::new(1, 2));
        assert!(r0.steps.is_empty());
        let r = concentration_chain(&[evens.clone(), evens.clone()], &e, &plan, Side::Right).unwrap();
        assert_eq!(r.achieved, Rational::new(1, 2));
        assert_eq!(r.steps[0].xi.coords()[0].rem_euclid(2), 0);
        assert!(r.holds);
        let r = concentration_chain(&[evens.clone(), odds.clone()], &e, &plan, Side::Right).unwrap();
        assert_eq!(r.achieved, Rational::new(1, 2));
        assert_eq!(r.steps[0].xi.coords()[0].rem_euclid(2), 1);
        let l = concentration_chain(&[evens, odds], &e, &plan, Side::Left).unwrap();
        assert_eq!(l.achieved, Rational::new(1, 2));
        assert!(l.holds);
    }
}
