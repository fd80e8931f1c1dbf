//! Window-scale verifiers for Δ-set intersection covers, their k-th root
//! form, the density-bounded Jin theorem, pullbacks and dense embeddings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{lower_density_estimate, upper_density_estimate, DensityEstimate, DensityParams, ShiftSpec};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, Side, Window, WindowFamily, WindowSpec, DEFAULT_WINDOW_CAP};
use crate::lemmas::{chain_filter, concentration_chain, greedy_bound, greedy_delta_cover, BoundReason, ChainPlan, ChainReport, CoverWitness};
use crate::oracle::{ExplicitSet, SetExpr, SetOracle};
use crate::rational::Rational;
use crate::setops::{finite_embed_check, thickness_check, PwsCertificate, ProbeFamily, TranslateReport};
use crate::verdict::Verdict;

/// Windows and grids shared by the theorem verifiers. Unset windows get
/// rank-dependent defaults from [`TheoremParams::resolve`].
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremParams {
    /// The large window `E`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<WindowSpec>,
    /// Base window: `P` for Jin, the root pool for k-th roots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<WindowSpec>,
    /// Grid for α estimates and pullbacks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityParams>,
    pub chain: ChainPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_pool: Option<WindowSpec>,
    /// Pool for the `A` factor of `AB`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_pool: Option<WindowSpec>,
    /// Pullback shift pool; `E` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pullback_pool: Option<WindowSpec>,
}

/// [`TheoremParams`] with every window built.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub e: Window,
    pub base: Window,
    pub density: DensityParams,
    pub chain: ChainPlan,
    pub probes: ProbeFamily,
    pub shift_pool: Window,
    pub product_pool: WindowSpec,
    pub pullback_pool: Window,
}

fn default_sizes(model: &GroupModel) -> (u64, u64, u64, u64) {
    // (E index, base index, shift pool index, product pool index)
    match model {
        GroupModel::Heisenberg3 => (6, 3, 2, 2),
        _ => match model.arity() {
            1 => (1680, 60, 64, 24),
            2 => (24, 8, 6, 6),
            3 => (12, 4, 3, 3),
            _ => (4, 2, 2, 2),
        },
    }
}

impl TheoremParams {
    /// The settings every certificate records: unset fields filled in.
    pub fn filled(&self, model: &GroupModel) -> TheoremParams {
        let (ne, nb, ns, np) = default_sizes(model);
        TheoremParams {
            e: Some(self.e.clone().unwrap_or(WindowSpec::family(WindowFamily::Anchored, ne))),
            base: Some(self.base.clone().unwrap_or(WindowSpec::family(WindowFamily::Anchored, nb))),
            density: Some(
                self.density.clone().unwrap_or(DensityParams::new(WindowFamily::Anchored, ne, ne, ShiftSpec::Identity)),
            ),
            chain: self.chain.clone(),
            probes: Some(self.probes.clone().unwrap_or(ProbeFamily::IntervalsUpTo(nb.min(8)))),
            shift_pool: Some(self.shift_pool.clone().unwrap_or(WindowSpec::family(WindowFamily::Symmetric, ns))),
            product_pool: Some(self.product_pool.clone().unwrap_or(WindowSpec::family(WindowFamily::Symmetric, np))),
            pullback_pool: self.pullback_pool.clone(),
        }
    }

    pub fn resolve(&self, model: &GroupModel, cap: usize) -> Result<Resolved> {
        let f = self.filled(model);
        let e = f.e.as_ref().expect("filled").build(model, cap)?;
        let pullback_pool = match &f.pullback_pool {
            Some(w) => w.build(model, cap)?,
            None => e.clone(),
        };
        let mut density = f.density.expect("filled");
        density.cap = density.cap.min(cap);
        Ok(Resolved {
            base: f.base.as_ref().expect("filled").build(model, cap)?,
            density,
            chain: f.chain,
            probes: f.probes.expect("filled"),
            shift_pool: f.shift_pool.as_ref().expect("filled").build(model, cap)?,
            product_pool: f.product_pool.expect("filled"),
            pullback_pool,
            e,
        })
    }
}

/// `A_1 ∩ ⋂_{j≥2} A_j ξ_j ∩ E` (right) or `A ∩ η B⁻¹ ∩ E` (left).
pub fn carrier(sets: &[SetOracle], shifts: &[GroupElement], e: &Window, side: Side) -> Result<Vec<GroupElement>> {
    let (first, rest) = sets.split_first().ok_or(Error::Empty("set list"))?;
    if rest.len() != shifts.len() {
        return Err(Error::Parameter(format!("{} shifts for {} chained sets", shifts.len(), rest.len())));
    }
    let mut c = Vec::new();
    for g in e.iter() {
        if first.contains(&g)? {
            c.push(g);
        }
    }
    for (a, xi) in rest.iter().zip(shifts) {
        c = chain_filter(e.group(), a, &c, xi, side)?;
    }
    c.sort();
    Ok(c)
}

/// `|C ∩ dC ∩ E|` for sorted `C ⊆ E`.
pub fn self_overlap(model: &GroupModel, c: &[GroupElement], d: &GroupElement) -> usize {
    let di = model.inv_fast(d);
    c.iter().filter(|x| c.binary_search(&model.mul_fast(&di, x)).is_ok()).count()
}

/// Counts `|(A_j ξ_j) ∩ d(A_j ξ_j) ∩ E|` for one `d`, one per set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReplay {
    pub d: GroupElement,
    pub counts: Vec<usize>,
}

/// One [`DeltaReplay`] per distinct `d`, in order.
pub fn delta_replay(sets: &[SetOracle], shifts: &[GroupElement], e: &Window, ds: &[GroupElement]) -> Result<Vec<DeltaReplay>> {
    let model = e.group();
    let mut all_shifts = vec![model.identity()];
    all_shifts.extend_from_slice(shifts);
    let translated: Vec<Vec<GroupElement>> = sets
        .iter()
        .zip(&all_shifts)
        .map(|(a, xi)| {
            let zeta = model.inv_fast(xi);
            let mut out = Vec::new();
            for g in e.iter() {
                if a.contains(&model.mul_fast(&g, &zeta))? {
                    out.push(g);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut uniq = ds.to_vec();
    uniq.sort();
    uniq.dedup();
    Ok(uniq
        .par_iter()
        .map(|d| DeltaReplay { d: d.clone(), counts: translated.iter().map(|t| self_overlap(model, t, d)).collect() })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pigeonhole {
    /// `f ∈ L` whose translate carries the most points of `P`.
    pub f: GroupElement,
    pub count: usize,
    /// `count / |P| ≥ 1/|L|`.
    pub density: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedySummary {
    pub gamma_eff: Rational,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<BoundReason>,
    pub max_pair_overlap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaCoverCertificate {
    pub verdict: Verdict,
    pub epsilon: Rational,
    pub e: WindowSpec,
    pub p: WindowSpec,
    pub g0: GroupElement,
    pub chain: ChainReport,
    /// `|C| / |E|` for the chained carrier `C`.
    pub beta_eff: Rational,
    /// `⌊(β_eff − ε)/(β_eff² − ε)⌋`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<u64>,
    pub l: Vec<GroupElement>,
    pub greedy: GreedySummary,
    pub witnesses: Vec<CoverWitness>,
    pub delta_checks: Vec<DeltaReplay>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pigeonhole: Option<Pigeonhole>,
}

fn pigeonhole(l: &[GroupElement], witnesses: &[CoverWitness], p_len: usize) -> Option<Pigeonhole> {
    let mut best: Option<Pigeonhole> = None;
    for f in l {
        let count = witnesses.iter().filter(|w| &w.f == f).count();
        if best.as_ref().is_none_or(|b| count > b.count) {
            best = Some(Pigeonhole { f: f.clone(), count, density: Rational::ratio(count, p_len) });
        }
    }
    best
}

/// Chains the sets on `E`, then covers `P` greedily by translates of the
/// window Δ-set of the carrier.
pub fn delta_intersection_cover(
    sets: &[SetOracle],
    epsilon: &Rational,
    p: &Window,
    g0: &GroupElement,
    params: &Resolved,
) -> Result<DeltaCoverCertificate> {
    if epsilon.is_negative() {
        return Err(Error::Parameter("ε must be >= 0".into()));
    }
    let e = &params.e;
    let chain = concentration_chain(sets, e, &params.chain, Side::Right)?;
    let mut c = chain.carrier.clone();
    c.sort();
    let beta_eff = Rational::ratio(c.len(), e.len());
    let r = greedy_bound(&beta_eff, epsilon);
    if c.is_empty() {
        return Ok(DeltaCoverCertificate {
            verdict: Verdict::Inconclusive,
            epsilon: epsilon.clone(),
            e: e.spec(),
            p: p.spec(),
            g0: g0.clone(),
            chain,
            beta_eff,
            r,
            l: vec![],
            greedy: GreedySummary { gamma_eff: Rational::zero(), bound: None, reason: None, max_pair_overlap: 0 },
            witnesses: vec![],
            delta_checks: vec![],
            pigeonhole: None,
        });
    }
    let cover = greedy_delta_cover(&c, e, epsilon, p, g0, None)?;
    let ds: Vec<GroupElement> = cover.witnesses.iter().map(|w| w.d.clone()).collect();
    let delta_checks = delta_replay(sets, &chain.shifts(), e, &ds)?;
    let replay_ok = delta_checks.iter().all(|d| d.counts.iter().all(|n| epsilon.lt_count(*n, e.len())));
    let within = r.is_none_or(|r| cover.f.len() as u64 <= r);
    let verdict = if cover.covered && replay_ok && r.is_some() && within {
        Verdict::Success
    } else {
        Verdict::Failure
    };
    Ok(DeltaCoverCertificate {
        verdict,
        epsilon: epsilon.clone(),
        e: e.spec(),
        p: p.spec(),
        g0: g0.clone(),
        beta_eff,
        r,
        pigeonhole: pigeonhole(&cover.f, &cover.witnesses, p.len()),
        l: cover.f,
        greedy: GreedySummary {
            gamma_eff: cover.gamma_eff,
            bound: cover.bound,
            reason: cover.reason,
            max_pair_overlap: cover.max_pair_overlap,
        },
        witnesses: cover.witnesses,
        delta_checks,
        chain,
    })
}

/// `g = h·y` with `y^k = x` in the carrier's window Δ-set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootWitness {
    pub g: GroupElement,
    pub h: GroupElement,
    /// `(h⁻¹g)^k`.
    pub x: GroupElement,
    pub overlap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCoverCertificate {
    pub verdict: Verdict,
    pub k: u64,
    pub base: WindowSpec,
    /// `{g^k : g ∈ base}`.
    pub powers: WindowSpec,
    pub cover: DeltaCoverCertificate,
    /// Least k-th roots in the base of the elements of `L`.
    pub h: Vec<GroupElement>,
    pub roots: Vec<RootWitness>,
    /// Base elements with no witness, or `L` elements with no root.
    pub unrooted: Vec<GroupElement>,
    pub root_checks: Vec<DeltaReplay>,
}

/// Covers the base window by `H` times the k-th roots of the Δ-set
/// intersection, via a cover of the k-th powers.
pub fn root_delta_cover(sets: &[SetOracle], epsilon: &Rational, k: u64, params: &Resolved) -> Result<RootCoverCertificate> {
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    let base = &params.base;
    let model = base.group();
    let powers = Window::from_points(model, base.iter().map(|g| model.pow_fast(&g, k)))?;
    let g0 = powers.first();
    let cover = delta_intersection_cover(sets, epsilon, &powers, &g0, params)?;
    let mut h = Vec::new();
    let mut unrooted = Vec::new();
    for l in &cover.l {
        match base.find_first(|g| model.pow_fast(g, k) == *l) {
            Some(g) => h.push(g),
            None => unrooted.push(l.clone()),
        }
    }
    let e = &params.e;
    let c = carrier(sets, &cover.chain.shifts(), e, Side::Right)?;
    let mut roots = Vec::new();
    for g in base.iter() {
        let hit = h.iter().find_map(|hh| {
            let x = model.pow_fast(&model.mul_fast(&model.inv_fast(hh), &g), k);
            let o = self_overlap(model, &c, &x);
            epsilon.lt_count(o, e.len()).then(|| RootWitness { g: g.clone(), h: hh.clone(), x, overlap: o })
        });
        match hit {
            Some(w) => roots.push(w),
            None => unrooted.push(g),
        }
    }
    let xs: Vec<GroupElement> = roots.iter().map(|w| w.x.clone()).collect();
    let root_checks = delta_replay(sets, &cover.chain.shifts(), e, &xs)?;
    let replay_ok = root_checks.iter().all(|d| d.counts.iter().all(|n| epsilon.lt_count(*n, e.len())));
    let verdict = match cover.verdict {
        Verdict::Success if unrooted.is_empty() && replay_ok => Verdict::Success,
        Verdict::Inconclusive => Verdict::Inconclusive,
        _ => Verdict::Failure,
    };
    Ok(RootCoverCertificate { verdict, k, base: base.spec(), powers: powers.spec(), cover, h, roots, unrooted, root_checks })
}

/// `p·η = f·a·b` with `f ∈ F`, `a ∈ A`, `b ∈ B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub p: GroupElement,
    pub f: GroupElement,
    pub a: GroupElement,
    pub b: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JinCertificate {
    pub verdict: Verdict,
    pub alpha: DensityEstimate,
    pub beta: DensityEstimate,
    /// `⌊1/(αβ)⌋`.
    pub k_bound: u64,
    pub e: WindowSpec,
    /// The points of `X` in the base window.
    pub p: WindowSpec,
    pub w: GroupElement,
    pub chain: ChainReport,
    pub eta: GroupElement,
    /// `|A ∩ ηB⁻¹ ∩ E| / |E|`.
    pub x_density: Rational,
    pub f: Vec<GroupElement>,
    pub greedy: GreedySummary,
    /// One per point of `P`: `Pη ⊆ F·A·B`.
    pub factorizations: Vec<Factorization>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pws: Option<PwsCertificate>,
    /// `η`, when every thickness probe lies in `P`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub probe_translate: Option<GroupElement>,
}

fn positive_density(set: &SetOracle, params: &DensityParams, name: &str) -> Result<DensityEstimate> {
    let est = upper_density_estimate(set, params)?;
    if !est.value.is_positive() {
        return Err(Error::Parameter(format!("{name} has zero estimated density on the grid")));
    }
    Ok(est)
}

/// Finds `F ∋ w` with `|F| ≤ ⌊1/αβ⌋` and `Pη ⊆ F·A·B` for the points
/// `P` of `X` in the base window.
pub fn jin_witness(a: &SetOracle, b: &SetOracle, x: &SetOracle, w: &GroupElement, params: &Resolved) -> Result<JinCertificate> {
    let alpha = positive_density(a, &params.density, "A")?;
    let beta = positive_density(b, &params.density, "B")?;
    let k_bound = (&alpha.value * &beta.value).recip().floor_u64();
    let model = params.e.group();
    let mut pts = Vec::new();
    for g in params.base.iter() {
        if x.contains(&g)? {
            pts.push(g);
        }
    }
    if !pts.contains(w) {
        return Err(Error::Parameter(format!("w = {w} is not a point of X in the base window")));
    }
    let p = Window::from_points(model, pts)?;
    let e = &params.e;
    let chain = concentration_chain(&[a.clone(), b.clone()], e, &params.chain, Side::Left)?;
    let eta = chain.steps.first().map(|s| s.xi.clone()).unwrap_or_else(|| model.identity());
    let mut xt = chain.carrier.clone();
    xt.sort();
    let x_density = Rational::ratio(xt.len(), e.len());
    let mut cert = JinCertificate {
        verdict: Verdict::Inconclusive,
        alpha,
        beta,
        k_bound,
        e: e.spec(),
        p: p.spec(),
        w: w.clone(),
        chain,
        eta: eta.clone(),
        x_density,
        f: vec![],
        greedy: GreedySummary { gamma_eff: Rational::zero(), bound: None, reason: None, max_pair_overlap: 0 },
        factorizations: vec![],
        pws: None,
        probe_translate: None,
    };
    if xt.is_empty() {
        return Ok(cert);
    }
    let cover = greedy_delta_cover(&xt, e, &Rational::zero(), &p, w, None)?;
    let mut factorizations = Vec::new();
    for wit in &cover.witnesses {
        let di = model.inv_fast(&wit.d);
        let z = xt.iter().find(|z| xt.binary_search(&model.mul_fast(&di, z)).is_ok()).expect("overlap is positive");
        let bb = model.mul_fast(&model.mul_fast(&model.inv_fast(z), &wit.d), &eta);
        factorizations.push(Factorization { p: wit.p.clone(), f: wit.f.clone(), a: z.clone(), b: bb });
    }
    let ok = cover.covered && cover.f.len() as u64 <= k_bound;
    cert.verdict = if ok { Verdict::Success } else { Verdict::Failure };
    cert.f = cover.f;
    cert.greedy = GreedySummary {
        gamma_eff: cover.gamma_eff,
        bound: cover.bound,
        reason: cover.reason,
        max_pair_overlap: cover.max_pair_overlap,
    };
    cert.factorizations = factorizations;
    Ok(cert)
}

/// `A·B` drawing the `A` factor from `pool`.
pub fn product_expr(a: &SetOracle, b: &SetOracle, pool: &WindowSpec) -> SetExpr {
    SetExpr::Product { left: Box::new(a.expr().clone()), right: Box::new(b.expr().clone()), pool: pool.clone() }
}

/// `F·A·B` with the `A` factor drawn from `pool`.
pub fn fab_expr(a: &SetOracle, b: &SetOracle, f: &[GroupElement], pool: &WindowSpec) -> SetExpr {
    SetExpr::Translates { by: f.to_vec(), set: Box::new(product_expr(a, b, pool)) }
}

/// [`jin_witness`] with `X = G`, then a thickness check of `F·A·B` on the
/// probe family.
pub fn jin_piecewise_check(a: &SetOracle, b: &SetOracle, params: &Resolved) -> Result<JinCertificate> {
    let model = params.e.group();
    let all = SetExpr::All.compile(model)?;
    let w = params.base.first();
    let mut cert = jin_witness(a, b, &all, &w, params)?;
    if cert.f.is_empty() {
        return Ok(cert);
    }
    let fab = fab_expr(a, b, &cert.f, &params.product_pool).compile(model)?;
    let report = thickness_check(&fab, &params.probes, &params.shift_pool)?;
    let probes = params.probes.probes(model, DEFAULT_WINDOW_CAP)?;
    if probes.iter().all(|h| h.iter().all(|g| params.base.contains(g))) {
        cert.probe_translate = Some(cert.eta.clone());
    }
    let f_pool = Window::from_points(model, cert.f.iter().cloned())?;
    let thick = report.verdict == Verdict::Success;
    if cert.verdict == Verdict::Success && !thick {
        cert.verdict = Verdict::Failure;
    }
    cert.pws = Some(PwsCertificate {
        verdict: if thick { Verdict::Success } else { Verdict::Failure },
        f: cert.f.clone(),
        bound: cert.k_bound as usize,
        pool: f_pool.spec(),
        strict: false,
        thickness: Some(report),
        nodes: 1,
    });
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub xi: GroupElement,
    pub estimate: DensityEstimate,
    /// `|C| / |E|`.
    pub target: Rational,
    pub reaches_target: bool,
    pub pool: WindowSpec,
}

/// `{g : gξ ∈ C}` as a set expression.
pub fn pullback_expr(model: &GroupModel, c: &[GroupElement], xi: &GroupElement) -> Result<SetExpr> {
    Ok(SetExpr::Explicit(ExplicitSet::new(c.to_vec(), None)?).right_translate(model.inv(xi)?))
}

/// The least `ξ` in the pool maximizing the upper density estimate of
/// `Cξ⁻¹`.
pub fn pullback_search(c: &[GroupElement], e: &Window, params: &DensityParams, pool: &Window) -> Result<PullbackReport> {
    if c.is_empty() {
        return Err(Error::Empty("C"));
    }
    let model = e.group();
    for g in c {
        if !e.contains(g) {
            return Err(Error::Parameter(format!("C element {g} lies outside E")));
        }
    }
    let cands = pool.to_vec();
    let ests: Vec<Result<DensityEstimate>> = cands
        .par_iter()
        .map(|xi| upper_density_estimate(&pullback_expr(model, c, xi)?.compile(model)?, params))
        .collect();
    let mut best: Option<(usize, DensityEstimate)> = None;
    for (i, est) in ests.into_iter().enumerate() {
        let est = est?;
        if best.as_ref().is_none_or(|(_, b)| est.value > b.value) {
            best = Some((i, est));
        }
    }
    let (i, estimate) = best.expect("pool is nonempty");
    let target = Rational::ratio(c.len(), e.len());
    Ok(PullbackReport { xi: cands[i].clone(), reaches_target: estimate.value >= target, estimate, target, pool: pool.spec() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedEvidence {
    pub set: usize,
    /// `Bx ⊆ A_i`.
    pub x: GroupElement,
    pub report: TranslateReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseEmbedReport {
    pub verdict: Verdict,
    pub alphas: Vec<DensityEstimate>,
    /// `Π α_i`.
    pub target: Rational,
    pub chain: ChainReport,
    pub pullback: PullbackReport,
    /// `B = C η⁻¹`, with `η` the pullback shift.
    pub b: Vec<GroupElement>,
    pub embeds: Vec<EmbedEvidence>,
    /// Pairs `(h, h')` of `B` whose `hh'⁻¹` was shown to lie in every
    /// `A_iA_i⁻¹` through the embedding translates.
    pub consequence_pairs: u64,
    pub consequence_ok: bool,
}

/// Chains the sets, pulls the carrier back to `B`, and certifies
/// `B ◁ A_i` for every `i` through explicit translates.
pub fn dense_embed_search(sets: &[SetOracle], params: &Resolved) -> Result<DenseEmbedReport> {
    let model = params.e.group();
    let alphas = sets
        .iter()
        .enumerate()
        .map(|(i, a)| positive_density(a, &params.density, &format!("A_{}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    let target = alphas.iter().fold(Rational::one(), |acc, a| &acc * &a.value);
    let e = &params.e;
    let chain = concentration_chain(sets, e, &params.chain, Side::Right)?;
    let mut c = chain.carrier.clone();
    c.sort();
    if c.is_empty() {
        return Err(Error::Parameter("the chained carrier is empty at this window size".into()));
    }
    let pullback = pullback_search(&c, e, &params.density, &params.pullback_pool)?;
    let eta = pullback.xi.clone();
    let eta_inv = model.inv_fast(&eta);
    let mut b: Vec<GroupElement> = c.iter().map(|x| model.mul_fast(x, &eta_inv)).collect();
    b.sort();
    let mut embeds = Vec::new();
    let mut shifts = vec![model.identity()];
    shifts.extend(chain.shifts());
    for (i, (a, xi)) in sets.iter().zip(&shifts).enumerate() {
        let x = model.mul_fast(&eta, &model.inv_fast(xi));
        let report = finite_embed_check(std::slice::from_ref(&b), a, &Window::from_points(model, [x.clone()])?, None)?;
        embeds.push(EmbedEvidence { set: i, x, report });
    }
    let consequence_ok = embeds.iter().all(|e| e.report.verdict == Verdict::Success);
    let verdict = if consequence_ok && pullback.estimate.value >= target { Verdict::Success } else { Verdict::Failure };
    Ok(DenseEmbedReport {
        verdict,
        alphas,
        target,
        chain,
        pullback,
        consequence_pairs: (b.len() as u64).pow(2),
        b,
        embeds,
        consequence_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseProbe {
    pub verdict: Verdict,
    pub upper: DensityEstimate,
    pub lower: DensityEstimate,
    pub inverse_upper: DensityEstimate,
    pub inverse_lower: DensityEstimate,
    /// Equality is asserted only for abelian models on reflection-closed
    /// grids.
    pub asserted: bool,
    pub equal: bool,
}

fn grid_is_symmetric(params: &DensityParams) -> bool {
    params.family == WindowFamily::Symmetric
        && match &params.shifts {
            ShiftSpec::Identity | ShiftSpec::Window | ShiftSpec::Squared => true,
            ShiftSpec::Box { ranges } => ranges.iter().all(|(lo, hi)| *lo == -*hi),
            ShiftSpec::Explicit { .. } => false,
        }
}

/// Density estimates of `B` and `B⁻¹` on the same grid.
pub fn inverse_density_probe(b: &SetOracle, params: &DensityParams) -> Result<InverseProbe> {
    let inv = b.expr().clone().inverse().compile(b.model())?;
    let upper = upper_density_estimate(b, params)?;
    let lower = lower_density_estimate(b, params)?;
    let inverse_upper = upper_density_estimate(&inv, params)?;
    let inverse_lower = lower_density_estimate(&inv, params)?;
    let equal = upper.value == inverse_upper.value && lower.value == inverse_lower.value;
    let asserted = b.model().is_abelian() && grid_is_symmetric(params);
    let verdict = if asserted && !equal { Verdict::Failure } else { Verdict::Success };
    Ok(InverseProbe { verdict, upper, lower, inverse_upper, inverse_lower, asserted, equal })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupModel {
        GroupModel::integers()
    }

    fn zp(e: i64, base: i64) -> Resolved {
        let p = TheoremParams {
            e: Some(WindowSpec::interval(0, e)),
            base: Some(WindowSpec::interval(0, base)),
            density: Some(DensityParams::new(WindowFamily::Anchored, e as u64, e as u64, ShiftSpec::Identity)),
            ..TheoremParams::default()
        };
        p.resolve(&z(), DEFAULT_WINDOW_CAP).unwrap()
    }

    fn m(modulus: u64, r: i64) -> SetOracle {
        SetExpr::multiples(modulus, r).compile(&z()).unwrap()
    }

    fn xs(v: &[GroupElement]) -> Vec<i64> {
        v.iter().map(|g| g.coords()[0]).collect()
    }

    #[test]
    fn delta_cover_mod_six() {
        let params = zp(360, 30);
        let cert = delta_intersection_cover(&[m(2, 0), m(3, 0)], &Rational::zero(), &params.base, &GroupElement::scalar(0), &params).unwrap();
        assert_eq!(cert.verdict, Verdict::Success);
        assert_eq!(xs(&cert.l), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(cert.r, Some(6));
        assert_eq!(cert.beta_eff, Rational::new(1, 6));
        assert!(cert.delta_checks.iter().all(|d| d.d.coords()[0] % 6 == 0));
        let ph = cert.pigeonhole.unwrap();
        assert!(ph.density >= Rational::new(1, 6));
    }

    #[test]
    fn delta_cover_small_cases() {
        let params = zp(360, 30);
        let all = SetExpr::All.compile(&z()).unwrap();
        let g0 = GroupElement::scalar(0);
        let one = delta_intersection_cover(&[all], &Rational::zero(), &params.base, &g0, &params).unwrap();
        assert_eq!((xs(&one.l), one.r), (vec![0], Some(1)));
        let two = delta_intersection_cover(&[m(2, 0)], &Rational::zero(), &params.base, &g0, &params).unwrap();
        assert_eq!((xs(&two.l), two.r), (vec![0, 1], Some(2)));
    }

    #[test]
    fn roots_examples() {
        let params = zp(360, 30);
        let r = root_delta_cover(&[m(4, 0)], &Rational::zero(), 2, &params).unwrap();
        assert_eq!(r.verdict, Verdict::Success);
        assert_eq!(xs(&r.h), vec![0, 1]);
        assert_eq!(r.cover.r, Some(4));
        let r = root_delta_cover(&[m(2, 0), m(3, 0)], &Rational::zero(), 2, &params).unwrap();
        assert_eq!(r.verdict, Verdict::Success);
        assert_eq!(xs(&r.h), vec![0, 1, 2]);
        let k1 = root_delta_cover(&[m(2, 0), m(3, 0)], &Rational::zero(), 1, &params).unwrap();
        let direct = delta_intersection_cover(&[m(2, 0), m(3, 0)], &Rational::zero(), &params.base, &GroupElement::scalar(0), &params).unwrap();
        let mut k1c = k1.cover.clone();
        k1c.p = direct.p.clone();
        assert_eq!(k1c, direct);
    }

    #[test]
    fn jin_examples() {
        let params = zp(1200, 60);
        let cert = jin_piecewise_check(&m(2, 0), &m(2, 0), &params).unwrap();
        assert_eq!(cert.verdict, Verdict::Success);
        assert_eq!((cert.k_bound, xs(&cert.f)), (4, vec![0, 1]));
        assert!(cert.pws.as_ref().unwrap().verdict == Verdict::Success);
        let model = z();
        for fz in &cert.factorizations {
            let lhs = model.mul_fast(&fz.p, &cert.eta);
            assert_eq!(lhs, model.mul_fast(&model.mul_fast(&fz.f, &fz.a), &fz.b));
            assert!(fz.a.coords()[0] % 2 == 0 && fz.b.coords()[0] % 2 == 0);
        }
        let c = jin_piecewise_check(&m(4, 0), &m(4, 1), &params).unwrap();
        assert_eq!((c.k_bound, xs(&c.f)), (16, vec![0, 1, 2, 3]));
        assert_eq!(c.verdict, Verdict::Success);
    }

    #[test]
    fn pullback_examples() {
        let e = Window::interval(0, 100).unwrap();
        let params = DensityParams::new(WindowFamily::Anchored, 20, 20, ShiftSpec::Identity);
        let evens: Vec<_> = (0..100).filter(|x| x % 2 == 0).map(GroupElement::scalar).collect();
        let r = pullback_search(&evens, &e, &params, &e).unwrap();
        assert_eq!((r.xi.coords()[0], r.estimate.value.clone()), (0, Rational::new(1, 2)));
        let full: Vec<_> = e.to_vec();
        let r = pullback_search(&full, &e, &params, &e).unwrap();
        assert_eq!(r.estimate.value, Rational::one());
    }

    #[test]
    fn dense_embed_examples() {
        let params = zp(360, 30);
        let r = dense_embed_search(&[m(2, 0)], &params).unwrap();
        assert_eq!(r.verdict, Verdict::Success);
        assert_eq!(r.pullback.estimate.value, Rational::new(1, 2));
        assert_eq!(r.embeds[0].x, GroupElement::scalar(0));
        let r = dense_embed_search(&[m(2, 0), m(3, 0)], &params).unwrap();
        assert_eq!(r.verdict, Verdict::Success);
        assert!(r.pullback.estimate.value >= Rational::new(1, 6));
    }

    #[test]
    fn inverse_probe_examples() {
        let p = DensityParams::new(WindowFamily::Symmetric, 8, 16, ShiftSpec::Window);
        let r = inverse_density_probe(&m(2, 0), &p).unwrap();
        assert!(r.asserted && r.equal);
        assert_eq!(r.upper.value, Rational::new(1, 2) .max(r.upper.value.clone()));
        let runs = SetExpr::PowerRuns.compile(&z()).unwrap();
        let r = inverse_density_probe(&runs, &p).unwrap();
        assert!(r.asserted && r.equal);
        let h = GroupModel::Heisenberg3;
        let s = SetExpr::Random { density: Rational::new(1, 3), seed: 7 }.compile(&h).unwrap();
        let r = inverse_density_probe(&s, &DensityParams::new(WindowFamily::Symmetric, 2, 2, ShiftSpec::Identity)).unwrap();
        assert!(!r.asserted);
    }
}
