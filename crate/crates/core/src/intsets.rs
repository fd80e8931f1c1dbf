//! Eventually periodic subsets of ℤ with exact densities and sumsets.
//!
//! A [`PeriodicSet`] agrees with one residue pattern as `x → -∞`, with a
//! (possibly different) pattern as `x → +∞`, and is explicit on a finite
//! transition region in between. Subsets of ℕ are the special case of an
//! empty left pattern.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest period accepted for any set or intermediate result.
pub const MAX_PERIOD: u64 = 1 << 20;

/// Largest transition region accepted from external input.
pub const MAX_SPAN: i64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PeriodicLiteral", into = "PeriodicLiteral")]
pub struct PeriodicSet {
    period: u64,
    left: Vec<bool>,
    right: Vec<bool>,
    lo: i64,
    hi: i64,
    /// Members inside `[lo, hi)`.
    middle: BTreeSet<i64>,
}

fn check_period(p: u64) -> Result<()> {
    if p == 0 || p > MAX_PERIOD {
        return Err(Error::Parameter(format!("period must be in 1..={MAX_PERIOD}, got {p}")));
    }
    Ok(())
}

fn lcm_checked(a: u64, b: u64) -> Result<u64> {
    let l = a.lcm(&b);
    check_period(l)?;
    Ok(l)
}

fn residue(x: i64, p: u64) -> usize {
    x.rem_euclid(p as i64) as usize
}

fn resample(mask: &[bool], to: u64) -> Vec<bool> {
    let p = mask.len();
    (0..to as usize).map(|r| mask[r % p]).collect()
}

impl PeriodicSet {
    fn raw(period: u64, left: Vec<bool>, right: Vec<bool>, lo: i64, hi: i64, middle: BTreeSet<i64>) -> PeriodicSet {
        let mut s = PeriodicSet { period, left, right, lo, hi, middle };
        s.canonicalize();
        s
    }

    /// `{x ∈ ℤ : x mod p ∈ residues}`.
    pub fn from_residues(period: u64, residues: &[u64]) -> Result<PeriodicSet> {
        check_period(period)?;
        let mut mask = vec![false; period as usize];
        for &r in residues {
            if r >= period {
                return Err(Error::Parameter(format!("residue {r} outside [0, {period})")));
            }
            mask[r as usize] = true;
        }
        Ok(PeriodicSet::raw(period, mask.clone(), mask, 0, 0, BTreeSet::new()))
    }

    /// `aℤ + r`.
    pub fn congruence(modulus: u64, r: i64) -> Result<PeriodicSet> {
        check_period(modulus)?;
        PeriodicSet::from_residues(modulus, &[r.rem_euclid(modulus as i64) as u64])
    }

    pub fn integers() -> PeriodicSet {
        PeriodicSet::raw(1, vec![true], vec![true], 0, 0, BTreeSet::new())
    }

    pub fn empty() -> PeriodicSet {
        PeriodicSet::raw(1, vec![false], vec![false], 0, 0, BTreeSet::new())
    }

    pub fn finite<I: IntoIterator<Item = i64>>(points: I) -> PeriodicSet {
        let middle: BTreeSet<i64> = points.into_iter().collect();
        let lo = middle.first().copied().unwrap_or(0);
        let hi = middle.last().map(|x| x + 1).unwrap_or(0);
        PeriodicSet::raw(1, vec![false], vec![false], lo, hi, middle)
    }

    /// Half-open interval `[a, b)`.
    pub fn interval(a: i64, b: i64) -> PeriodicSet {
        PeriodicSet::finite(a..b.max(a))
    }

    /// `{x ≥ start : x mod p ∈ residues}`.
    pub fn from_start(period: u64, residues: &[u64], start: i64) -> Result<PeriodicSet> {
        check_period(period)?;
        let right = mask_of(period, residues)?;
        Ok(PeriodicSet::raw(period, vec![false; period as usize], right, start, start, BTreeSet::new()))
    }

    /// `⋃_{n ≥ 0} ⋃_{[a,b) ∈ items} [a + n·repeat, b + n·repeat)`; with
    /// `two_sided` the union runs over all `n ∈ ℤ`.
    pub fn repeated_intervals(items: &[(i64, i64)], repeat: u64, two_sided: bool) -> Result<PeriodicSet> {
        check_period(repeat)?;
        let p = repeat as usize;
        let mut from: Vec<Option<i64>> = vec![None; p];
        let mut full = vec![false; p];
        for &(a, b) in items {
            if b <= a {
                continue;
            }
            if (b - a) as i128 > MAX_SPAN as i128 {
                return Err(Error::Parameter("interval too long".into()));
            }
            let stop = b.min(a.saturating_add(repeat as i64));
            for j in a..stop {
                let t = residue(j, repeat);
                if two_sided {
                    full[t] = true;
                } else {
                    from[t] = Some(from[t].map_or(j, |c| c.min(j)));
                }
            }
        }
        Ok(Builder { period: repeat, full, upto: vec![None; p], from, points: BTreeSet::new() }.build())
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Residues of the eventual pattern as `x → +∞`.
    pub fn residues(&self) -> Vec<u64> {
        mask_residues(&self.right)
    }

    /// Residues of the pattern as `x → -∞`.
    pub fn left_residues(&self) -> Vec<u64> {
        mask_residues(&self.left)
    }

    /// Bounds `[lo, hi)` of the explicit transition region.
    pub fn transition(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn is_bounded_below(&self) -> bool {
        self.left.iter().all(|b| !b)
    }

    pub fn is_finite(&self) -> bool {
        self.is_bounded_below() && self.right.iter().all(|b| !b)
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && self.middle.is_empty()
    }

    /// Least element, if the set is nonempty and bounded below.
    pub fn min_element(&self) -> Option<i64> {
        if !self.is_bounded_below() {
            return None;
        }
        if let Some(m) = self.middle.first() {
            return Some(*m);
        }
        (0..self.period as i64).map(|o| self.hi + o).find(|x| self.right[residue(*x, self.period)])
    }

    pub fn contains(&self, x: i64) -> bool {
        if x < self.lo {
            self.left[residue(x, self.period)]
        } else if x >= self.hi {
            self.right[residue(x, self.period)]
        } else {
            self.middle.contains(&x)
        }
    }

    /// Natural density of the `+∞` tail, `|residues| / period`.
    pub fn exact_density(&self) -> Rational {
        Rational::ratio(count(&self.right), self.period as usize)
    }

    /// Upper Banach density over ℤ: the denser of the two tails.
    pub fn upper_banach_density(&self) -> Rational {
        Rational::ratio(count(&self.left).max(count(&self.right)), self.period as usize)
    }

    /// Lower Banach density over ℤ: the sparser of the two tails.
    pub fn lower_banach_density(&self) -> Rational {
        Rational::ratio(count(&self.left).min(count(&self.right)), self.period as usize)
    }

    fn combine(&self, other: &PeriodicSet, f: impl Fn(bool, bool) -> bool) -> Result<PeriodicSet> {
        let l = lcm_checked(self.period, other.period)?;
        let a_l = resample(&self.left, l);
        let b_l = resample(&other.left, l);
        let a_r = resample(&self.right, l);
        let b_r = resample(&other.right, l);
        let left = a_l.iter().zip(&b_l).map(|(x, y)| f(*x, *y)).collect();
        let right = a_r.iter().zip(&b_r).map(|(x, y)| f(*x, *y)).collect();
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let middle = (lo..hi).filter(|x| f(self.contains(*x), other.contains(*x))).collect();
        Ok(PeriodicSet::raw(l, left, right, lo, hi, middle))
    }

    pub fn union(&self, other: &PeriodicSet) -> Result<PeriodicSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &PeriodicSet) -> Result<PeriodicSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> PeriodicSet {
        let flip = |m: &Vec<bool>| m.iter().map(|b| !b).collect::<Vec<_>>();
        let middle = (self.lo..self.hi).filter(|x| !self.middle.contains(x)).collect();
        PeriodicSet::raw(self.period, flip(&self.left), flip(&self.right), self.lo, self.hi, middle)
    }

    /// `t + self`.
    pub fn translate(&self, t: i64) -> PeriodicSet {
        let p = self.period as usize;
        let shift = |m: &Vec<bool>| (0..p).map(|r| m[residue(r as i64 - t, self.period)]).collect::<Vec<_>>();
        PeriodicSet::raw(
            self.period,
            shift(&self.left),
            shift(&self.right),
            self.lo + t,
            self.hi + t,
            self.middle.iter().map(|x| x + t).collect(),
        )
    }

    /// `-self`.
    pub fn negate(&self) -> PeriodicSet {
        let p = self.period as usize;
        let flip = |m: &Vec<bool>| (0..p).map(|r| m[residue(-(r as i64), self.period)]).collect::<Vec<_>>();
        PeriodicSet::raw(
            self.period,
            flip(&self.right),
            flip(&self.left),
            1 - self.hi,
            1 - self.lo,
            self.middle.iter().map(|x| -x).collect(),
        )
    }

    /// Residue-class extremes of each tail relative to the transition
    /// region, at period `l`.
    fn tail_extremes(&self, l: u64) -> (Vec<Option<i64>>, Vec<Option<i64>>) {
        let mut left_max = vec![None; l as usize];
        let mut right_min = vec![None; l as usize];
        for off in 1..=l as i64 {
            let x = self.lo - off;
            if self.left[residue(x, self.period)] {
                left_max[residue(x, l)].get_or_insert(x);
            }
            let y = self.hi + off - 1;
            if self.right[residue(y, self.period)] {
                right_min[residue(y, l)].get_or_insert(y);
            }
        }
        (left_max, right_min)
    }

    /// Exact sumset `{p + q}`.
    ///
    /// Each operand splits into a left tail, a finite middle and a right
    /// tail; every pairwise sum of parts is a union of residue-class
    /// half-lines, full classes, or translates, accumulated in a builder.
    pub fn sumset(&self, other: &PeriodicSet) -> Result<PeriodicSet> {
        if self.is_empty() || other.is_empty() {
            return Ok(PeriodicSet::empty());
        }
        let l = lcm_checked(self.period, other.period)?;
        let mut b = Builder::new(l);
        let (pl, pr) = self.tail_extremes(l);
        let (ql, qr) = other.tail_extremes(l);

        for (a_side, b_side, a_is_left) in [(&pl, &ql, true), (&pr, &qr, false)] {
            for (r, a) in a_side.iter().enumerate() {
                let Some(a) = a else { continue };
                for (s, c) in b_side.iter().enumerate() {
                    let Some(c) = c else { continue };
                    let t = (r + s) % l as usize;
                    let x = a + c;
                    if a_is_left {
                        b.upto(t, x);
                    } else {
                        b.from(t, x);
                    }
                }
            }
        }
        for (a_side, b_side) in [(&pl, &qr), (&pr, &ql)] {
            for (r, a) in a_side.iter().enumerate() {
                if a.is_none() {
                    continue;
                }
                for (s, c) in b_side.iter().enumerate() {
                    if c.is_some() {
                        b.full[(r + s) % l as usize] = true;
                    }
                }
            }
        }
        for (fin, whole, whole_l, whole_r) in [(&self.middle, other, &ql, &qr), (&other.middle, self, &pl, &pr)] {
            for &a in fin {
                for (s, c) in whole_l.iter().enumerate() {
                    if let Some(c) = c {
                        b.upto((s + residue(a, l)) % l as usize, a + c);
                    }
                }
                for (s, c) in whole_r.iter().enumerate() {
                    if let Some(c) = c {
                        b.from((s + residue(a, l)) % l as usize, a + c);
                    }
                }
                for &m in &whole.middle {
                    b.points.insert(a + m);
                }
            }
        }
        Ok(b.build())
    }

    fn canonicalize(&mut self) {
        let p = self.period as usize;
        // minimal common period of both tails
        let mut best = p;
        for d in 1..p {
            if p.is_multiple_of(d) && (0..p).all(|r| self.left[r] == self.left[r % d] && self.right[r] == self.right[r % d]) {
                best = d;
                break;
            }
        }
        if best != p {
            self.left.truncate(best);
            self.right.truncate(best);
            self.period = best as u64;
        }
        let member = |x: i64| -> bool { x >= self.lo && x < self.hi && self.middle.contains(&x) };
        let left_at = |x: i64| self.left[residue(x, self.period)];
        let right_at = |x: i64| self.right[residue(x, self.period)];
        let (lo, hi) = if self.left == self.right {
            let diffs: Vec<i64> = (self.lo..self.hi).filter(|x| member(*x) != right_at(*x)).collect();
            match (diffs.first(), diffs.last()) {
                (Some(a), Some(b)) => (*a, b + 1),
                _ => (0, 0),
            }
        } else {
            let mut h = self.hi;
            while h > self.lo && member(h - 1) == right_at(h - 1) {
                h -= 1;
            }
            let mut l = self.lo;
            while l < h && member(l) == left_at(l) {
                l += 1;
            }
            if l == h {
                let mut b = h;
                while left_at(b - 1) == right_at(b - 1) {
                    b -= 1;
                }
                (b, b)
            } else {
                (l, h)
            }
        };
        let middle: BTreeSet<i64> = self.middle.range(lo..hi.max(lo)).copied().collect();
        // points newly inside the region that were governed by a tail
        let mut full_middle = middle;
        for x in lo..hi {
            let inside_old = x >= self.lo && x < self.hi;
            if !inside_old {
                let v = if x < self.lo { left_at(x) } else { right_at(x) };
                if v {
                    full_middle.insert(x);
                }
            }
        }
        self.lo = lo;
        self.hi = hi;
        self.middle = full_middle;
    }

    /// Thickness of a subset of ℤ: it contains arbitrarily long intervals
    /// iff one of its tails is the full residue pattern.
    pub fn thickness(&self) -> ThicknessVerdict {
        let full = |m: &Vec<bool>| m.iter().all(|b| *b);
        if full(&self.right) {
            return ThicknessVerdict { thick: true, full_tail: Some(Tail::Right), refuter: None };
        }
        if full(&self.left) {
            return ThicknessVerdict { thick: true, full_tail: Some(Tail::Left), refuter: None };
        }
        let (rg, rr) = runs(&self.right);
        let (lg, lr) = runs(&self.left);
        ThicknessVerdict {
            thick: false,
            full_tail: None,
            refuter: Some(ThicknessRefuter {
                period: self.period,
                recurring_gap: rg,
                eventual_max_run: rr.max(lr),
                left_recurring_gap: lg,
            }),
        }
    }
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|b| **b).count()
}

fn mask_residues(mask: &[bool]) -> Vec<u64> {
    mask.iter().enumerate().filter(|(_, b)| **b).map(|(r, _)| r as u64).collect()
}

/// Longest cyclic gap and longest cyclic run of a non-full pattern.
fn runs(mask: &[bool]) -> (u64, u64) {
    let p = mask.len();
    if mask.iter().all(|b| *b) {
        return (0, p as u64);
    }
    let Some(start) = (0..p).find(|&i| !mask[i] && mask[(i + p - 1) % p]) else {
        return (p as u64, 0);
    };
    let (mut gap, mut run, mut cur_gap, mut cur_run) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..p {
        if mask[(start + i) % p] {
            cur_run += 1;
            cur_gap = 0;
        } else {
            cur_gap += 1;
            cur_run = 0;
        }
        gap = gap.max(cur_gap);
        run = run.max(cur_run);
    }
    (gap, run)
}

/// Accumulates residue-class half-lines, full classes and points.
struct Builder {
    period: u64,
    full: Vec<bool>,
    upto: Vec<Option<i64>>,
    from: Vec<Option<i64>>,
    points: BTreeSet<i64>,
}

impl Builder {
    fn new(period: u64) -> Builder {
        let p = period as usize;
        Builder { period, full: vec![false; p], upto: vec![None; p], from: vec![None; p], points: BTreeSet::new() }
    }

    fn upto(&mut self, t: usize, x: i64) {
        self.upto[t] = Some(self.upto[t].map_or(x, |c| c.max(x)));
    }

    fn from(&mut self, t: usize, x: i64) {
        self.from[t] = Some(self.from[t].map_or(x, |c| c.min(x)));
    }

    fn build(self) -> PeriodicSet {
        let p = self.period as usize;
        let left: Vec<bool> = (0..p).map(|t| self.full[t] || self.upto[t].is_some()).collect();
        let right: Vec<bool> = (0..p).map(|t| self.full[t] || self.from[t].is_some()).collect();
        let marks = self
            .upto
            .iter()
            .flatten()
            .map(|x| x + 1)
            .chain(self.from.iter().flatten().copied())
            .chain(self.points.first().copied())
            .chain(self.points.last().map(|x| x + 1));
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for m in marks {
            lo = lo.min(m);
            hi = hi.max(m);
        }
        if lo > hi {
            lo = 0;
            hi = 0;
        }
        let member = |x: i64| {
            let t = residue(x, self.period);
            self.full[t]
                || self.upto[t].is_some_and(|c| x <= c)
                || self.from[t].is_some_and(|c| x >= c)
                || self.points.contains(&x)
        };
        let middle = (lo..hi).filter(|x| member(*x)).collect();
        PeriodicSet::raw(self.period, left, right, lo, hi, middle)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThicknessRefuter {
    pub period: u64,
    /// Longest gap of the `+∞` pattern; it recurs once per period.
    pub recurring_gap: u64,
    /// No interval longer than this occurs in either tail.
    pub eventual_max_run: u64,
    pub left_recurring_gap: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThicknessVerdict {
    pub thick: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub full_tail: Option<Tail>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refuter: Option<ThicknessRefuter>,
}

/// `(A_k, B_k)` with `A_k = ⋃_{n≥0} [Lnk, Lnk+Mk)` and
/// `B_k = ⋃_{n≥0} [Lnk, Lnk+Nk)`. Requires `M + N + 1 < L`.
pub fn counterexample_pair(m: u64, n: u64, l: u64, k: u64) -> Result<(PeriodicSet, PeriodicSet)> {
    if m == 0 || n == 0 || l == 0 || k == 0 {
        return Err(Error::Parameter("M, N, L, k must all be >= 1".into()));
    }
    if m.checked_add(n).and_then(|s| s.checked_add(1)).is_none_or(|s| s >= l) {
        return Err(Error::Parameter(format!("need M/L + N/L + 1/L < 1, got M={m} N={n} L={l}")));
    }
    let period = l.checked_mul(k).filter(|p| *p <= MAX_PERIOD).ok_or_else(|| {
        Error::Parameter(format!("period L*k exceeds {MAX_PERIOD}"))
    })?;
    let a = PeriodicSet::repeated_intervals(&[(0, (m * k) as i64)], period, false)?;
    let b = PeriodicSet::repeated_intervals(&[(0, (n * k) as i64)], period, false)?;
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub m: u64,
    pub n: u64,
    pub l: u64,
    pub k: u64,
    pub a: PeriodicSet,
    pub b: PeriodicSet,
    pub density_a: Rational,
    pub density_b: Rational,
    /// `A_k + B_k + [0, k)`, computed exactly.
    pub sumset: PeriodicSet,
    /// `⋃_{n≥0} [Lnk, Lnk + (M+N+1)k)`.
    pub stated_sumset: PeriodicSet,
    pub matches_stated: bool,
    /// Length of each block of the computed sumset.
    pub block_length: u64,
    pub thickness: ThicknessVerdict,
    /// `Lk - (M+N+1)k`.
    pub stated_gap: u64,
}

impl CounterexampleReport {
    /// Densities are `M/L`, `N/L` and the sumset is not thick.
    pub fn densities_exact_and_not_thick(&self) -> bool {
        self.density_a == Rational::ratio(self.m as usize, self.l as usize)
            && self.density_b == Rational::ratio(self.n as usize, self.l as usize)
            && !self.thickness.thick
    }

    pub fn observed_gap(&self) -> Option<u64> {
        self.thickness.refuter.as_ref().map(|r| r.recurring_gap)
    }
}

/// Builds `A_k`, `B_k`, their densities, `A_k + B_k + [0, k)` and its
/// non-thickness refuter, alongside the block form `[Lnk, Lnk+(M+N+1)k)`.
pub fn counterexample_report(m: u64, n: u64, l: u64, k: u64) -> Result<CounterexampleReport> {
    let (a, b) = counterexample_pair(m, n, l, k)?;
    let sumset = a.sumset(&b)?.sumset(&PeriodicSet::interval(0, k as i64))?;
    let stated = PeriodicSet::repeated_intervals(&[(0, ((m + n + 1) * k) as i64)], l * k, false)?;
    let thickness = sumset.thickness();
    Ok(CounterexampleReport {
        m,
        n,
        l,
        k,
        density_a: a.exact_density(),
        density_b: b.exact_density(),
        matches_stated: sumset == stated,
        block_length: thickness.refuter.as_ref().map_or(0, |r| r.eventual_max_run),
        thickness,
        stated_gap: l * k - (m + n + 1) * k,
        a,
        b,
        sumset,
        stated_sumset: stated,
    })
}

/// Wire form of a [`PeriodicSet`].
///
/// Membership of `x` is `residues` for `x >= split` and `left_residues`
/// (default: `residues`) for `x < split`, overridden by `exceptions`.
/// `from: s` is shorthand for an empty left pattern with `split = s`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicLiteral {
    pub period: u64,
    pub residues: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub left_residues: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub from: Option<i64>,
    #[serde(default)]
    pub exceptions: Vec<(i64, bool)>,
}

fn mask_of(period: u64, residues: &[u64]) -> Result<Vec<bool>> {
    let mut m = vec![false; period as usize];
    for &r in residues {
        if r >= period {
            return Err(Error::Schema(format!("residue {r} outside [0, {period})")));
        }
        m[r as usize] = true;
    }
    Ok(m)
}

impl TryFrom<PeriodicLiteral> for PeriodicSet {
    type Error = Error;

    fn try_from(lit: PeriodicLiteral) -> Result<PeriodicSet> {
        check_period(lit.period).map_err(|e| Error::Schema(e.to_string()))?;
        let right = mask_of(lit.period, &lit.residues)?;
        let (left, split) = match (lit.from, lit.left_residues, lit.split) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::Schema("`from` excludes `left_residues` and `split`".into()))
            }
            (Some(f), None, None) => (vec![false; lit.period as usize], f),
            (None, Some(lr), s) => (mask_of(lit.period, &lr)?, s.unwrap_or(0)),
            (None, None, s) => (right.clone(), s.unwrap_or(0)),
        };
        let bound = |x: i64| x.checked_abs().is_some_and(|a| a <= MAX_SPAN);
        if !bound(split) || lit.exceptions.iter().any(|(x, _)| !bound(*x)) {
            return Err(Error::Schema(format!("indices must lie within ±{MAX_SPAN}")));
        }
        if lit.from.is_some() && lit.exceptions.iter().any(|(x, _)| *x < split) {
            return Err(Error::Schema("exception below `from`".into()));
        }
        let overrides: BTreeMap<i64, bool> = lit.exceptions.into_iter().collect();
        let lo = overrides.keys().next().map_or(split, |x| (*x).min(split));
        let hi = overrides.keys().next_back().map_or(split, |x| (x + 1).max(split));
        let p = lit.period;
        let middle = (lo..hi)
            .filter(|x| match overrides.get(x) {
                Some(v) => *v,
                None if *x < split => left[residue(*x, p)],
                None => right[residue(*x, p)],
            })
            .collect();
        Ok(PeriodicSet::raw(p, left, right, lo, hi, middle))
    }
}

impl From<PeriodicSet> for PeriodicLiteral {
    fn from(s: PeriodicSet) -> PeriodicLiteral {
        let split = s.lo;
        let exceptions = (s.lo..s.hi)
            .filter_map(|x| {
                let m = s.middle.contains(&x);
                (m != s.right[residue(x, s.period)]).then_some((x, m))
            })
            .collect();
        let same = s.left == s.right;
        PeriodicLiteral {
            period: s.period,
            residues: s.residues(),
            left_residues: (!same).then(|| s.left_residues()),
            split: (!same).then_some(split),
            from: None,
            exceptions,
        }
    }
}

/// Wire form `{"items": [[a,b],...], "repeat": p}` of a union of
/// repeated half-open intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalsLiteral {
    pub items: Vec<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub repeat: Option<u64>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub two_sided: bool,
}

impl IntervalsLiteral {
    pub fn compile(&self) -> Result<PeriodicSet> {
        let bound = |x: i64| x.checked_abs().is_some_and(|a| a <= MAX_SPAN);
        if self.items.iter().any(|(a, b)| !bound(*a) || !bound(*b)) {
            return Err(Error::Schema(format!("interval endpoints must lie within ±{MAX_SPAN}")));
        }
        if self.items.len() > 4096 {
            return Err(Error::Schema("too many interval items".into()));
        }
        match self.repeat {
            Some(p) => PeriodicSet::repeated_intervals(&self.items, p, self.two_sided)
                .map_err(|e| Error::Schema(e.to_string())),
            None => {
                if self.two_sided {
                    return Err(Error::Schema("`two_sided` needs `repeat`".into()));
                }
                let total: i64 = self.items.iter().map(|(a, b)| (b - a).max(0)).sum();
                if total > MAX_SPAN {
                    return Err(Error::Schema("finite interval union too large".into()));
                }
                Ok(PeriodicSet::finite(self.items.iter().flat_map(|(a, b)| *a..*b)))
            }
        }
    }
}
