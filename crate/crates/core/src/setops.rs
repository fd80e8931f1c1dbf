//! Products, Δ-sets, powers and roots, and the structural predicates
//! (syndetic, thick, piecewise syndetic, finite embeddability) checked on
//! windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{relative_density, upper_density_estimate, DensityParams};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, Window, WindowFamily, WindowSpec};
use crate::oracle::{ExplicitSet, SetExpr, SetOracle};
use crate::rational::Rational;
use crate::verdict::{SearchMethod, Verdict};

/// Explicit members of a set, known exactly inside `window`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowedSet {
    pub window: WindowSpec,
    pub members: Vec<GroupElement>,
}

impl WindowedSet {
    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members.binary_search(g).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The members as an oracle that is false elsewhere.
    pub fn to_expr(&self) -> SetExpr {
        SetExpr::Explicit(ExplicitSet::new(self.members.clone(), None).expect("members have no domain"))
    }
}

fn scan_budget(cost: u128, cap: usize) -> Result<()> {
    let limit = cap as u128 * 64;
    if cost > limit {
        return Err(Error::WindowCap { requested: cost, cap: limit.min(usize::MAX as u128) as usize });
    }
    Ok(())
}

/// `{ab : a ∈ A ∩ W_A, b ∈ B ∩ W_B} ∩ W_out`.
pub fn product_set(a: &SetOracle, b: &SetOracle, out: &Window, wa: &Window, wb: &Window) -> Result<WindowedSet> {
    let model = out.group();
    let a_members: Vec<GroupElement> = members_in(a, wa)?;
    scan_budget(out.len() as u128 * a_members.len().max(1) as u128, crate::group::DEFAULT_WINDOW_CAP)?;
    let flags: Vec<Result<bool>> = out
        .to_vec()
        .par_iter()
        .map(|x| {
            for s in &a_members {
                let t = model.mul_fast(&model.inv_fast(s), x);
                if wb.contains(&t) && b.contains(&t)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect();
    let mut members = Vec::new();
    for (x, f) in out.iter().zip(flags) {
        if f? {
            members.push(x);
        }
    }
    Ok(WindowedSet { window: out.spec(), members })
}

/// `A ∩ W` in window order.
pub fn members_in(set: &SetOracle, window: &Window) -> Result<Vec<GroupElement>> {
    let mut out = Vec::new();
    for g in window.iter() {
        if set.contains(&g)? {
            out.push(g);
        }
    }
    Ok(out)
}

/// `A⁻¹`.
pub fn inverse(set: &SetOracle) -> Result<SetOracle> {
    set.expr().clone().inverse().compile(set.model())
}

/// `A ∩ gA`.
pub fn overlap_with_translate(set: &SetOracle, g: &GroupElement) -> Result<SetOracle> {
    SetExpr::Intersection { sets: vec![set.expr().clone(), set.expr().clone().left_translate(g.clone())] }
        .compile(set.model())
}

/// Default grid for Δ-set density checks: anchored windows of length 12
/// (a multiple of every period up to 4, and of 6), shifted over the window.
pub fn default_delta_params() -> DensityParams {
    DensityParams::new(WindowFamily::Anchored, 12, 12, crate::density::ShiftSpec::Window)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaMember {
    pub g: GroupElement,
    /// Upper estimate of `d(A ∩ gA)` with its arg-max.
    pub value: Rational,
    pub n: u64,
    pub shift: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaSet {
    pub epsilon: Rational,
    pub candidates: WindowSpec,
    pub params: DensityParams,
    pub members: Vec<DeltaMember>,
}

impl DeltaSet {
    pub fn elements(&self) -> Vec<GroupElement> {
        self.members.iter().map(|m| m.g.clone()).collect()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members.binary_search_by(|m| m.g.cmp(g)).is_ok()
    }
}

/// `{g ∈ candidates : upper estimate of d(A ∩ gA) > ε}`, strict.
pub fn delta_set(a: &SetOracle, epsilon: &Rational, candidates: &Window, params: &DensityParams) -> Result<DeltaSet> {
    if epsilon.is_negative() {
        return Err(Error::Parameter("ε must be >= 0".into()));
    }
    let gs = candidates.to_vec();
    let est: Vec<Result<Option<DeltaMember>>> = gs
        .par_iter()
        .map(|g| {
            let e = upper_density_estimate(&overlap_with_translate(a, g)?, params)?;
            Ok((e.value > *epsilon).then(|| DeltaMember { g: g.clone(), value: e.value, n: e.n, shift: e.shift }))
        })
        .collect();
    let mut members = Vec::new();
    for m in est {
        if let Some(m) = m? {
            members.push(m);
        }
    }
    Ok(DeltaSet { epsilon: epsilon.clone(), candidates: candidates.spec(), params: params.clone(), members })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// `{g^k : g ∈ A ∩ W}`.
    Power,
    /// `{g ∈ W : g^k ∈ A}`.
    Root,
}

pub fn root_power_sets(a: &SetOracle, k: u64, window: &Window, mode: PowerMode) -> Result<WindowedSet> {
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    let model = window.group();
    let mut members = Vec::new();
    for g in window.iter() {
        let p = model.pow_fast(&g, k);
        match mode {
            PowerMode::Power if a.contains(&g)? => members.push(p),
            PowerMode::Root if a.contains(&p)? => members.push(g),
            _ => {}
        }
    }
    members.sort();
    members.dedup();
    Ok(WindowedSet { window: window.spec(), members })
}

/// Search options shared by the cover searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Restrict translates to `F ⊆ A`.
    #[serde(default)]
    pub strict: bool,
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { strict: false, budget: crate::verdict::DEFAULT_SEARCH_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCertificate {
    pub verdict: Verdict,
    pub f: Vec<GroupElement>,
    pub bound: usize,
    pub region: WindowSpec,
    pub pool: WindowSpec,
    pub strict: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<SearchMethod>,
    /// Region elements left uncovered by the best attempt (empty on
    /// success; truncated).
    pub residual: Vec<GroupElement>,
    pub nodes: u64,
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bit_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn first_unset(b: &Bits, n: usize) -> Option<usize> {
    for (w, word) in b.iter().enumerate() {
        if *word != u64::MAX {
            let i = w * 64 + (!word).trailing_zeros() as usize;
            return (i < n).then_some(i);
        }
    }
    None
}

fn bits_or(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

enum CoverSearch {
    Found(Vec<usize>, SearchMethod),
    None,
    Budget,
}

/// Least (by size, then index tuple) set of at most `k` bitsets whose
/// union covers `n` bits.
fn least_cover(cover: &[Bits], n: usize, k: usize, budget: u64, nodes: &mut u64) -> CoverSearch {
    // last pool index able to cover each bit
    let mut last = vec![None; n];
    for (j, c) in cover.iter().enumerate() {
        for (i, l) in last.iter_mut().enumerate() {
            if bit_get(c, i) {
                *l = Some(j);
            }
        }
    }
    if last.iter().any(|l| l.is_none()) {
        return CoverSearch::None;
    }
    let last: Vec<usize> = last.into_iter().map(|l| l.unwrap_or(0)).collect();
    let greedy = greedy_cover(cover, n, k);

    fn dfs(
        cover: &[Bits],
        last: &[usize],
        n: usize,
        size: usize,
        start: usize,
        covered: &Bits,
        chosen: &mut Vec<usize>,
        nodes: &mut u64,
        budget: u64,
    ) -> Option<bool> {
        let Some(u) = first_unset(covered, n) else {
            return Some(true);
        };
        if chosen.len() == size {
            return Some(false);
        }
        for j in start..=last[u] {
            *nodes += 1;
            if *nodes > budget {
                return None;
            }
            chosen.push(j);
            let next = bits_or(covered, &cover[j]);
            match dfs(cover, last, n, size, j + 1, &next, chosen, nodes, budget) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            chosen.pop();
        }
        Some(false)
    }

    for size in 1..=k.min(cover.len()) {
        let mut chosen = Vec::new();
        match dfs(cover, &last, n, size, 0, &bits_new(n), &mut chosen, nodes, budget) {
            Some(true) => return CoverSearch::Found(chosen, SearchMethod::Exhaustive),
            Some(false) => {}
            None => {
                return match greedy {
                    Some(g) => CoverSearch::Found(g, SearchMethod::Greedy),
                    None => CoverSearch::Budget,
                }
            }
        }
    }
    CoverSearch::None
}

fn greedy_cover(cover: &[Bits], n: usize, k: usize) -> Option<Vec<usize>> {
    let mut covered = bits_new(n);
    let mut chosen = Vec::new();
    while first_unset(&covered, n).is_some() {
        if chosen.len() == k {
            return None;
        }
        let gain = |c: &Bits| c.iter().zip(&covered).map(|(x, y)| (x & !y).count_ones()).sum::<u32>();
        let (j, g) = cover.iter().enumerate().map(|(j, c)| (j, gain(c))).fold((0, 0), |b, x| if x.1 > b.1 { x } else { b });
        if g == 0 {
            return None;
        }
        covered = bits_or(&covered, &cover[j]);
        chosen.push(j);
    }
    chosen.sort();
    Some(chosen)
}

/// Pool elements allowed as translates: all of `pool`, or `pool ∩ A` in
/// strict mode.
fn translate_pool(a: &SetOracle, pool: &Window, strict: bool) -> Result<Vec<GroupElement>> {
    if strict {
        members_in(a, pool)
    } else {
        Ok(pool.to_vec())
    }
}

/// Least `F ⊆ pool` with `|F| ≤ k` and `region ⊆ FA`.
pub fn syndetic_cover_search(a: &SetOracle, k: usize, region: &Window, pool: &Window, opts: SearchOptions) -> Result<CoverCertificate> {
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    let model = region.group();
    let cands = translate_pool(a, pool, opts.strict)?;
    scan_budget(cands.len() as u128 * region.len() as u128, crate::group::DEFAULT_WINDOW_CAP)?;
    let points = region.to_vec();
    let cover: Vec<Result<Bits>> = cands
        .par_iter()
        .map(|f| {
            let fi = model.inv_fast(f);
            let mut b = bits_new(points.len());
            for (i, x) in points.iter().enumerate() {
                if a.contains(&model.mul_fast(&fi, x))? {
                    bit_set(&mut b, i);
                }
            }
            Ok(b)
        })
        .collect();
    let cover: Vec<Bits> = cover.into_iter().collect::<Result<_>>()?;
    let mut nodes = 0;
    let outcome = least_cover(&cover, points.len(), k, opts.budget, &mut nodes);
    let mut cert = CoverCertificate {
        verdict: Verdict::Failure,
        f: vec![],
        bound: k,
        region: region.spec(),
        pool: pool.spec(),
        strict: opts.strict,
        method: Some(SearchMethod::Exhaustive),
        residual: vec![],
        nodes,
    };
    match outcome {
        CoverSearch::Found(idx, method) => {
            cert.verdict = Verdict::Success;
            cert.method = Some(method);
            cert.f = idx.into_iter().map(|j| cands[j].clone()).collect();
        }
        CoverSearch::None => {
            let best = greedy_cover(&cover, points.len(), cover.len()).unwrap_or_default();
            let covered = best.iter().fold(bits_new(points.len()), |acc, j| bits_or(&acc, &cover[*j]));
            cert.residual =
                (0..points.len()).filter(|i| !bit_get(&covered, *i)).take(16).map(|i| points[i].clone()).collect();
            if cert.residual.is_empty() {
                // coverable, but not with k translates
                let uncovered_by_k: Bits = best.iter().take(k).fold(bits_new(points.len()), |acc, j| bits_or(&acc, &cover[*j]));
                cert.residual = (0..points.len())
                    .filter(|i| !bit_get(&uncovered_by_k, *i))
                    .take(16)
                    .map(|i| points[i].clone())
                    .collect();
            }
        }
        CoverSearch::Budget => {
            cert.verdict = Verdict::Inconclusive;
            cert.method = None;
        }
    }
    Ok(cert)
}

/// For `region ⊆ FA`, the least `f ∈ F` maximizing `|A ∩ f⁻¹W| / |W|`;
/// pigeonhole makes the value at least `1/|F|`.
pub fn syndetic_density_witness(a: &SetOracle, f: &[GroupElement], region: &Window) -> Result<(GroupElement, Rational)> {
    let model = region.group();
    let mut best: Option<(GroupElement, Rational)> = None;
    for x in f {
        let w = region.left_translate(&model.inv(x)?)?;
        let d = relative_density(a, &w)?;
        if best.as_ref().is_none_or(|(_, b)| d > *b) {
            best = Some((x.clone(), d));
        }
    }
    best.ok_or(Error::Empty("cover F"))
}

/// Finite probe sets used as stand-ins for "every finite H".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeFamily {
    /// Anchored windows of index `1..=s`: `[0, m)` in ℤ, `[0, m)^d` in ℤ^d.
    IntervalsUpTo(u64),
    Explicit(Vec<Vec<GroupElement>>),
}

impl ProbeFamily {
    pub fn probes(&self, model: &GroupModel, cap: usize) -> Result<Vec<Vec<GroupElement>>> {
        match self {
            ProbeFamily::IntervalsUpTo(s) => {
                if *s == 0 || *s > 4096 {
                    return Err(Error::Parameter("probe size must be in 1..=4096".into()));
                }
                (1..=*s).map(|m| Ok(WindowFamily::Anchored.window(model, m, cap)?.to_vec())).collect()
            }
            ProbeFamily::Explicit(ps) => {
                if ps.is_empty() || ps.iter().any(|p| p.is_empty()) {
                    return Err(Error::Empty("probe"));
                }
                for p in ps {
                    for h in p {
                        if !model.is_canonical(h) {
                            return Err(Error::Parameter(format!("probe element {h} is not canonical")));
                        }
                    }
                }
                Ok(ps.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub probe: usize,
    pub x: GroupElement,
}

/// Per-probe least right translates `Hx ⊆ target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateReport {
    pub verdict: Verdict,
    pub probes: ProbeFamily,
    pub pool: WindowSpec,
    pub witnesses: Vec<ProbeWitness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failed_probe: Option<usize>,
}

fn right_translates_into(
    target: &SetOracle,
    family: &ProbeFamily,
    probes: &[Vec<GroupElement>],
    pool: &Window,
) -> Result<TranslateReport> {
    let model = pool.group();
    let mut witnesses = Vec::new();
    for (i, h) in probes.iter().enumerate() {
        let found = pool.try_find_first(|x| {
            for e in h {
                if !target.contains(&model.mul_fast(e, x))? {
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        match found {
            Some(x) => witnesses.push(ProbeWitness { probe: i, x }),
            None => {
                return Ok(TranslateReport {
                    verdict: Verdict::Failure,
                    probes: family.clone(),
                    pool: pool.spec(),
                    witnesses,
                    failed_probe: Some(i),
                })
            }
        }
    }
    Ok(TranslateReport { verdict: Verdict::Success, probes: family.clone(), pool: pool.spec(), witnesses, failed_probe: None })
}

/// For each probe `H`, the least `x` in the pool with `Hx ⊆ A`, stopping
/// at the first probe without one.
pub fn thickness_check(a: &SetOracle, probes: &ProbeFamily, pool: &Window) -> Result<TranslateReport> {
    let ps = probes.probes(a.model(), crate::group::DEFAULT_WINDOW_CAP)?;
    right_translates_into(a, probes, &ps, pool)
}

/// `FA = ⋃_{f ∈ F} fA`.
pub fn translates_union(a: &SetOracle, f: &[GroupElement]) -> Result<SetOracle> {
    SetExpr::Union { sets: f.iter().map(|x| a.expr().clone().left_translate(x.clone())).collect() }.compile(a.model())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwsCertificate {
    pub verdict: Verdict,
    pub f: Vec<GroupElement>,
    pub bound: usize,
    pub pool: WindowSpec,
    pub strict: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub thickness: Option<TranslateReport>,
    pub nodes: u64,
}

/// Least `F ⊆ f_pool`, `|F| ≤ k`, with `FA` passing the thickness probes.
pub fn piecewise_syndetic_check(
    a: &SetOracle,
    k: usize,
    probes: &ProbeFamily,
    f_pool: &Window,
    shift_pool: &Window,
    opts: SearchOptions,
) -> Result<PwsCertificate> {
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    let ps = probes.probes(a.model(), crate::group::DEFAULT_WINDOW_CAP)?;
    let cands = translate_pool(a, f_pool, opts.strict)?;
    let mut nodes = 0u64;
    let mut cert = PwsCertificate {
        verdict: Verdict::Failure,
        f: vec![],
        bound: k,
        pool: f_pool.spec(),
        strict: opts.strict,
        thickness: None,
        nodes: 0,
    };
    for size in 1..=k.min(cands.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            nodes += 1;
            if nodes > opts.budget {
                cert.verdict = Verdict::Inconclusive;
                cert.nodes = nodes;
                return Ok(cert);
            }
            let f: Vec<GroupElement> = idx.iter().map(|i| cands[*i].clone()).collect();
            let fa = translates_union(a, &f)?;
            let report = right_translates_into(&fa, probes, &ps, shift_pool)?;
            if report.verdict == Verdict::Success {
                cert.verdict = Verdict::Success;
                cert.f = f;
                cert.thickness = Some(report);
                cert.nodes = nodes;
                return Ok(cert);
            }
            if !next_combination(&mut idx, cands.len()) {
                break;
            }
        }
    }
    cert.nodes = nodes;
    Ok(cert)
}

/// Advances `idx` to the next increasing tuple below `n`.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// For each probe `H ⊆ A`, the least `x` in the pool with `Hx ⊆ B`.
/// When `a` is given, probes are first checked to lie in `A`.
pub fn finite_embed_check(
    probes: &[Vec<GroupElement>],
    b: &SetOracle,
    pool: &Window,
    a: Option<&SetOracle>,
) -> Result<TranslateReport> {
    if probes.is_empty() || probes.iter().any(|p| p.is_empty()) {
        return Err(Error::Empty("probe"));
    }
    if let Some(a) = a {
        for p in probes {
            for h in p {
                if !a.contains(h)? {
                    return Err(Error::Parameter(format!("probe element {h} is not in A")));
                }
            }
        }
    }
    right_translates_into(b, &ProbeFamily::Explicit(probes.to_vec()), probes, pool)
}

/// `h h'⁻¹ = b b'⁻¹` with `b = hx`, `b' = h'x` in `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceWitness {
    pub h: GroupElement,
    pub h2: GroupElement,
    pub b: GroupElement,
    pub b2: GroupElement,
}

/// Factorizations placing every `h h'⁻¹` (same probe) in `BB⁻¹`.
pub fn difference_witnesses(model: &GroupModel, probes: &[Vec<GroupElement>], report: &TranslateReport) -> Vec<DifferenceWitness> {
    let mut out = Vec::new();
    for w in &report.witnesses {
        let p = &probes[w.probe];
        for h in p {
            for h2 in p {
                out.push(DifferenceWitness {
                    h: h.clone(),
                    h2: h2.clone(),
                    b: model.mul_fast(h, &w.x),
                    b2: model.mul_fast(h2, &w.x),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupModel {
        GroupModel::integers()
    }

    fn set(s: &str) -> SetOracle {
        s.parse::<SetExpr>().unwrap().compile(&z()).unwrap()
    }

    fn ints(v: &[GroupElement]) -> Vec<i64> {
        v.iter().map(|g| g.coords()[0]).collect()
    }

    fn iv(a: i64, b: i64) -> Window {
        Window::interval(a, b).unwrap()
    }

    #[test]
    fn product_examples() {
        let p = product_set(&set("mod:2:0"), &set("mod:3:0"), &iv(0, 12), &iv(-12, 13), &iv(-12, 13)).unwrap();
        assert_eq!(ints(&p.members), (0..12).collect::<Vec<_>>());
        let id = set("finite:0");
        let q = product_set(&set("mod:3:0"), &id, &iv(0, 10), &iv(0, 10), &iv(0, 1)).unwrap();
        assert_eq!(ints(&q.members), vec![0, 3, 6, 9]);
        let h = GroupModel::Heisenberg3;
        let a = SetExpr::Explicit(ExplicitSet::new(vec![GroupElement::new(&[1, 0, 0])], None).unwrap()).compile(&h).unwrap();
        let b = SetExpr::Explicit(ExplicitSet::new(vec![GroupElement::new(&[0, 1, 0])], None).unwrap()).compile(&h).unwrap();
        let w = Window::box_window(&h, vec![(-1, 1), (-1, 1), (-1, 1)], 1000).unwrap();
        let r = product_set(&a, &b, &w, &w, &w).unwrap();
        assert_eq!(r.members, vec![GroupElement::new(&[1, 1, 1])]);
    }

    #[test]
    fn delta_examples() {
        let params = default_delta_params();
        let evens = set("evens");
        let d = delta_set(&evens, &Rational::zero(), &iv(-6, 7), &params).unwrap();
        assert_eq!(ints(&d.elements()), vec![-6, -4, -2, 0, 2, 4, 6]);
        let all = delta_set(&set("all"), &Rational::new(9, 10), &iv(0, 5), &params).unwrap();
        assert_eq!(all.members.len(), 5);
        let strict = delta_set(&evens, &Rational::new(1, 2), &iv(-6, 7), &params).unwrap();
        assert!(strict.members.is_empty());
        assert!(delta_set(&evens, &Rational::new(-1, 2), &iv(0, 2), &params).is_err());
    }

    #[test]
    fn root_power_examples() {
        let w = iv(-6, 7);
        let roots = root_power_sets(&set("mod:4:0"), 2, &w, PowerMode::Root).unwrap();
        assert_eq!(ints(&roots.members), vec![-6, -4, -2, 0, 2, 4, 6]);
        let a = set("mod:3:0");
        for mode in [PowerMode::Root, PowerMode::Power] {
            assert_eq!(ints(&root_power_sets(&a, 1, &w, mode).unwrap().members), vec![-6, -3, 0, 3, 6]);
        }
        let doubled = root_power_sets(&set("all"), 2, &iv(0, 4), PowerMode::Power).unwrap();
        assert_eq!(ints(&doubled.members), vec![0, 2, 4, 6]);
    }

    #[test]
    fn syndetic_examples() {
        let opts = SearchOptions::default();
        let c = syndetic_cover_search(&set("evens"), 2, &iv(0, 20), &iv(0, 20), opts).unwrap();
        assert_eq!((c.verdict, ints(&c.f)), (Verdict::Success, vec![0, 1]));
        assert_eq!(c.method, Some(SearchMethod::Exhaustive));
        let g = syndetic_cover_search(&set("all"), 1, &iv(0, 20), &iv(0, 20), opts).unwrap();
        assert_eq!(ints(&g.f), vec![0]);
        let f = syndetic_cover_search(&set("mod:3:0"), 2, &iv(0, 20), &iv(0, 20), opts).unwrap();
        assert_eq!(f.verdict, Verdict::Failure);
        assert!(!f.residual.is_empty());
        let tiny = SearchOptions { strict: false, budget: 3 };
        let i = syndetic_cover_search(&set("mod:7:0"), 7, &iv(0, 40), &iv(0, 40), tiny).unwrap();
        assert_ne!(i.verdict, Verdict::Failure);
    }

    #[test]
    fn strict_mode_restricts_pool() {
        let opts = SearchOptions { strict: true, ..SearchOptions::default() };
        // F ⊆ 2ℤ cannot reach the odd numbers
        let c = syndetic_cover_search(&set("evens"), 2, &iv(0, 20), &iv(0, 20), opts).unwrap();
        assert_eq!(c.verdict, Verdict::Failure);
    }

    #[test]
    fn thickness_examples() {
        let pool = iv(0, 40);
        let all = thickness_check(&set("all"), &ProbeFamily::IntervalsUpTo(5), &pool).unwrap();
        assert_eq!(all.verdict, Verdict::Success);
        let probe = ProbeFamily::Explicit(vec![vec![GroupElement::scalar(0), GroupElement::scalar(1)]]);
        assert_eq!(thickness_check(&set("evens"), &probe, &pool).unwrap().verdict, Verdict::Failure);
        let runs: SetExpr = r#"{"kind":"intervals","items":[[0,6]],"repeat":8,"two_sided":true}"#.parse().unwrap();
        let runs = runs.compile(&z()).unwrap();
        assert_eq!(thickness_check(&runs, &ProbeFamily::IntervalsUpTo(6), &pool).unwrap().verdict, Verdict::Success);
        let r7 = thickness_check(&runs, &ProbeFamily::IntervalsUpTo(7), &pool).unwrap();
        assert_eq!((r7.verdict, r7.failed_probe), (Verdict::Failure, Some(6)));
    }

    #[test]
    fn piecewise_syndetic_examples() {
        let opts = SearchOptions::default();
        let probes = ProbeFamily::IntervalsUpTo(16);
        let pool = iv(0, 24);
        let c = piecewise_syndetic_check(&set("evens"), 2, &probes, &iv(0, 12), &pool, opts).unwrap();
        assert_eq!((c.verdict, ints(&c.f)), (Verdict::Success, vec![0, 1]));
        let thick = piecewise_syndetic_check(&set("all"), 1, &probes, &iv(0, 12), &pool, opts).unwrap();
        assert_eq!(ints(&thick.f), vec![0]);
        let a: SetExpr = r#"{"kind":"intervals","items":[[0,9]],"repeat":12,"two_sided":true}"#.parse().unwrap();
        let a = a.compile(&z()).unwrap();
        let c = piecewise_syndetic_check(&a, 2, &probes, &iv(0, 12), &pool, opts).unwrap();
        // least F in pool order; {0, 9} is another valid cover
        assert_eq!(ints(&c.f), vec![0, 3]);
        let fa = translates_union(&a, &[GroupElement::scalar(0), GroupElement::scalar(9)]).unwrap();
        assert_eq!(thickness_check(&fa, &probes, &pool).unwrap().verdict, Verdict::Success);
    }

    #[test]
    fn embed_examples() {
        let pool = iv(-10, 10);
        let evens = set("evens");
        let h = vec![vec![GroupElement::scalar(0), GroupElement::scalar(2), GroupElement::scalar(4)]];
        let r = finite_embed_check(&h, &evens, &pool, None).unwrap();
        assert_eq!(r.verdict, Verdict::Success);
        assert_eq!(r.witnesses[0].x, GroupElement::scalar(-10));
        let r0 = finite_embed_check(&h, &evens, &iv(0, 10), None).unwrap();
        assert_eq!(r0.witnesses[0].x, GroupElement::scalar(0));
        let bad = vec![vec![GroupElement::scalar(0), GroupElement::scalar(1)]];
        assert_eq!(finite_embed_check(&bad, &evens, &pool, None).unwrap().verdict, Verdict::Failure);
        assert!(finite_embed_check(&bad, &evens, &pool, Some(&evens)).is_err());
        let w = difference_witnesses(&z(), &h, &r0);
        assert!(w.iter().all(|d| evens.contains(&d.b).unwrap() && evens.contains(&d.b2).unwrap()));
    }

    #[test]
    fn syndetic_density_pigeonhole() {
        let a = set("mod:3:1");
        let region = iv(0, 30);
        let c = syndetic_cover_search(&a, 3, &region, &iv(0, 30), SearchOptions::default()).unwrap();
        assert_eq!(c.f.len(), 3);
        let (_, d) = syndetic_density_witness(&a, &c.f, &region).unwrap();
        assert!(d >= Rational::new(1, 3));
    }
}
