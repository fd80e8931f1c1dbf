//! Replays a certificate envelope from its recorded inputs and witnesses.
//!
//! Nothing here searches: every recorded witness is re-evaluated and every
//! stated inequality is recomputed in exact arithmetic.

use serde::{Deserialize, Serialize};

use crate::density::{shifted_density, DensityEstimate, DensityParams, Direction};
use crate::error::{Error, Result};
use crate::group::{invariance_defect, GroupElement, GroupModel, Side, Window, WindowSpec};
use crate::intsets::{counterexample_report, CounterexampleReport};
use crate::lemmas::{greedy_bound, overlap_pair_bound, BoundReason, ChainReport, CoverWitness, GreedyCoverReport, OverlapReport, ShiftReport};
use crate::oracle::{SetExpr, SetOracle};
use crate::rational::Rational;
use crate::replay::Checks;
use crate::run::{DensityWitness, Envelope, FolnerReport, Operation};
use crate::setops::{
    members_in, overlap_with_translate, translates_union, CoverCertificate, DeltaSet, ProbeFamily, PwsCertificate, TranslateReport, WindowedSet,
};
use crate::theorems::{
    carrier, fab_expr, self_overlap, DeltaCoverCertificate, DenseEmbedReport, InverseProbe, JinCertificate, PullbackReport,
    RootCoverCertificate, TheoremParams,
};
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub operation: String,
    pub verdict: Verdict,
    pub ok: bool,
    pub passed: usize,
    pub failures: Vec<String>,
}

/// Parses and replays one envelope.
pub fn verify_json(s: &str) -> Result<VerifyReport> {
    verify(&Envelope::from_json(s)?)
}

pub fn verify(env: &Envelope) -> Result<VerifyReport> {
    env.group.validate()?;
    env.budgets.check()?;
    if env.operation != env.inputs.name() {
        return Err(Error::Schema(format!("operation {:?} does not match inputs {:?}", env.operation, env.inputs.name())));
    }
    for r in env.inputs.set_refs() {
        if !env.sets.contains_key(r) {
            return Err(Error::Schema(format!("set {r:?} is not recorded")));
        }
    }
    let mut rp = Replay { model: &env.group, env, cap: env.budgets.window_cap(), checks: Checks::new() };
    rp.run()?;
    let checks = rp.checks;
    Ok(VerifyReport {
        operation: env.operation.clone(),
        verdict: env.verdict,
        ok: checks.ok(),
        passed: checks.passed,
        failures: checks.failures,
    })
}

struct Replay<'a> {
    model: &'a GroupModel,
    env: &'a Envelope,
    cap: usize,
    checks: Checks,
}

fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Success
    } else {
        Verdict::Failure
    }
}

impl Replay<'_> {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> bool {
        self.checks.check(ok, what)
    }

    fn win(&self, w: &WindowSpec) -> Result<Window> {
        w.build(self.model, self.cap)
    }

    fn set(&self, name: &str) -> Result<SetOracle> {
        self.env.oracle(name)
    }

    fn sets(&self, names: &[String]) -> Result<Vec<SetOracle>> {
        names.iter().map(|n| self.set(n)).collect()
    }

    fn verdict_is(&mut self, claimed: Verdict, want: Verdict) {
        self.check(claimed == want, || format!("verdict {claimed:?}, replay gives {want:?}"));
        let env = self.env.verdict;
        self.check(env == claimed, || format!("envelope verdict {env:?} differs from result verdict {claimed:?}"));
    }

    fn run(&mut self) -> Result<()> {
        let env = self.env;
        match &env.inputs {
            Operation::Density { set, params, direction } => {
                let est: DensityEstimate = env.result_as()?;
                let a = self.set(set)?;
                self.check(est.direction == *direction, || "direction differs from inputs".into());
                self.check(est.params.family == params.family && est.params.n_min == params.n_min && est.params.n_max == params.n_max, || {
                    "grid differs from inputs".into()
                });
                self.estimate(&a, &est, true, "estimate")?;
                self.verdict_is(env.verdict, Verdict::Success);
            }
            Operation::FolnerCheck { family, ns, translations, side, epsilon } => {
                let r: FolnerReport = env.result_as()?;
                let hs = translations.clone().unwrap_or_else(|| self.model.generators());
                self.check(r.translations == hs, || "translations differ from inputs".into());
                self.check(r.rows.iter().map(|x| x.n).eq(ns.iter().copied()), || "window indices differ from inputs".into());
                for row in &r.rows {
                    let w = family.window(self.model, row.n, self.cap)?;
                    let d = invariance_defect(&w, &hs, *side)?;
                    self.check(w.len() == row.len && d == row.defect, || format!("defect at n = {} is {d}, recorded {}", row.n, row.defect));
                }
                let mono = r.rows.windows(2).all(|p| p[1].defect <= p[0].defect);
                self.check(mono == r.nonincreasing, || "monotonicity flag is wrong".into());
                let below = r.rows.iter().find(|x| x.defect < *epsilon).map(|x| x.n);
                self.check(below == r.below_epsilon_at, || "first index below ε is wrong".into());
                self.verdict_is(env.verdict, verdict_of(mono && below.is_some()));
            }
            Operation::Product { a, b, out, wa, wb } => {
                let r: WindowedSet = env.result_as()?;
                let (a, b) = (self.set(a)?, self.set(b)?);
                let (out, wa, wb) = (self.win(out)?, self.win(wa)?, self.win(wb)?);
                let am = members_in(&a, &wa)?;
                let mut prev: Option<&GroupElement> = None;
                for x in &r.members {
                    self.check(prev.is_none_or(|p| p < x), || "members are not strictly sorted".into());
                    prev = Some(x);
                }
                let mut expected = Vec::new();
                for x in out.iter() {
                    let mut hit = false;
                    for s in &am {
                        let t = self.model.mul_fast(&self.model.inv_fast(s), &x);
                        if wb.contains(&t) && b.contains(&t)? {
                            hit = true;
                            break;
                        }
                    }
                    if hit {
                        expected.push(x);
                    }
                }
                let n = expected.len();
                self.check(expected == r.members, || format!("product has {n} members in the window, recorded {}", r.members.len()));
                self.verdict_is(env.verdict, Verdict::Success);
            }
            Operation::Delta { set, epsilon, candidates, .. } => {
                let r: DeltaSet = env.result_as()?;
                let a = self.set(set)?;
                let cands = self.win(candidates)?;
                self.check(r.epsilon == *epsilon, || "ε differs from inputs".into());
                for m in &r.members {
                    self.check(cands.contains(&m.g), || format!("{} is not a candidate", m.g));
                    let both = overlap_with_translate(&a, &m.g)?;
                    let w = r.params.family.window(self.model, m.n, self.cap)?;
                    let v = shifted_density(&both, &w, &m.shift)?;
                    self.check(v == m.value && m.value > *epsilon, || format!("d(A ∩ {}A) replays to {v}, recorded {}", m.g, m.value));
                }
                self.verdict_is(env.verdict, Verdict::Success);
            }
            Operation::Syndetic { set, k, region, pool, strict } => {
                let mut map = env.result.clone();
                let dw = map.remove("density_witness");
                let c: CoverCertificate = serde_json::from_value(serde_json::Value::Object({
                    map.insert("verdict".into(), serde_json::to_value(env.verdict).expect("verdict"));
                    map
                }))
                .map_err(|e| Error::Schema(e.to_string()))?;
                let a = self.set(set)?;
                let region = self.win(region)?;
                self.check(c.bound == *k && c.strict == *strict, || "bound or strictness differs from inputs".into());
                if c.verdict == Verdict::Success {
                    self.cover(&a, &c.f, *k, &self.win(pool)?, *strict, &region)?;
                    if let Some(dw) = dw {
                        let dw: DensityWitness = serde_json::from_value(dw).map_err(|e| Error::Schema(e.to_string()))?;
                        self.density_witness(&a, &c.f, &region, &dw)?;
                    }
                } else {
                    self.check(!c.residual.is_empty() || c.verdict == Verdict::Inconclusive, || "a failed cover lists no residual".into());
                }
            }
            Operation::Thick { set, probes, pool } => {
                let r: TranslateReport = env.result_as()?;
                self.check(r.probes == *probes, || "probe family differs from inputs".into());
                self.translates(&self.set(set)?, &r, &self.win(pool)?)?;
                self.check(env.verdict == r.verdict, || "envelope verdict differs".into());
            }
            Operation::Pws { set, k, probes, f_pool, shift_pool, strict } => {
                let c: PwsCertificate = env.result_as()?;
                self.check(c.bound == *k && c.strict == *strict, || "bound or strictness differs from inputs".into());
                if c.verdict == Verdict::Success {
                    self.pws(&self.set(set)?, &c, probes, &self.win(f_pool)?, &self.win(shift_pool)?)?;
                }
                self.check(env.verdict == c.verdict, || "envelope verdict differs".into());
            }
            Operation::Embed { probes, a, b, pool } => {
                let r: TranslateReport = env.result_as()?;
                let ps = probes.probes(self.model, self.cap)?;
                self.check(r.probes == ProbeFamily::Explicit(ps.clone()), || "probe family differs from inputs".into());
                if let Some(a) = a {
                    let a = self.set(a)?;
                    for h in ps.iter().flatten() {
                        let ok = a.contains(h)?;
                        self.check(ok, || format!("probe element {h} is not in A"));
                    }
                }
                self.translates(&self.set(b)?, &r, &self.win(pool)?)?;
                self.check(env.verdict == r.verdict, || "envelope verdict differs".into());
            }
            Operation::LemmaOverlap { e, family } => {
                let r: OverlapReport = env.result_as()?;
                let again = overlap_pair_bound(&self.win(e)?, family)?;
                self.check(again == r, || "overlap statistics do not replay".into());
                self.verdict_is(env.verdict, verdict_of(again.holds));
            }
            Operation::LemmaDeltaCover { c, e, epsilon, p, g0, candidates } => {
                let r: GreedyCoverReport = env.result_as()?;
                let e = self.win(e)?;
                let cm = sorted(members_in(&self.set(c)?, &e)?);
                let p = self.win(p)?;
                let g0 = g0.clone().unwrap_or_else(|| p.first());
                let cands = candidates.as_ref().map(|w| self.win(w)).transpose()?;
                self.check(r.epsilon == *epsilon && r.c_size == cm.len(), || "ε or |C| differs from inputs".into());
                self.greedy(&cm, &e, epsilon, &p, &g0, &r.f, &r.witnesses, cands.as_ref())?;
                self.greedy_stats(&cm, &e, epsilon, &r.f, &r.gamma_eff, r.bound, r.reason, r.max_pair_overlap);
                let ok = r.covered && r.reason != Some(BoundReason::Violated);
                self.check(r.covered == (r.witnesses.len() == p.len()), || "coverage flag is wrong".into());
                self.verdict_is(env.verdict, verdict_of(ok));
            }
            Operation::LemmaShift { u, v, c, d, side } => {
                let r: ShiftReport = env.result_as()?;
                let (u, v) = (self.win(u)?, self.win(v)?);
                let cm = members_in(&self.set(c)?, &u)?;
                let dm = members_in(&self.set(d)?, &v)?;
                self.shift(&u, &v, &cm, &dm, *side, &r)?;
                self.verdict_is(env.verdict, verdict_of(r.achieved >= r.floor));
            }
            Operation::LemmaChain { sets, e, side, .. } => {
                let r: ChainReport = env.result_as()?;
                self.chain(&self.sets(sets)?, &self.win(e)?, *side, &r)?;
                self.verdict_is(env.verdict, verdict_of(r.holds));
            }
            Operation::ThmDeltaCover { sets, epsilon, p, g0, params } => {
                let c: DeltaCoverCertificate = env.result_as()?;
                let p = self.win(p)?;
                let g0 = g0.clone().unwrap_or_else(|| p.first());
                let v = self.delta_cover(&self.sets(sets)?, epsilon, &p, &g0, params, &c)?;
                self.verdict_is(c.verdict, v);
            }
            Operation::ThmRoots { sets, epsilon, k, params } => {
                let c: RootCoverCertificate = env.result_as()?;
                let v = self.roots(&self.sets(sets)?, epsilon, *k, params, &c)?;
                self.verdict_is(c.verdict, v);
            }
            Operation::ThmJin { a, b, x, w, params } => {
                let c: JinCertificate = env.result_as()?;
                let w = match w {
                    Some(w) => w.clone(),
                    None => self.win(params.filled(self.model).base.as_ref().expect("filled"))?.first(),
                };
                let v = self.jin(&self.set(a)?, &self.set(b)?, &self.set(x)?, &w, params, &c)?;
                self.verdict_is(c.verdict, v);
            }
            Operation::ThmJinPws { a, b, params } => {
                let c: JinCertificate = env.result_as()?;
                let (a, b) = (self.set(a)?, self.set(b)?);
                let all = SetExpr::All.compile(self.model)?;
                let filled = params.filled(self.model);
                let w = self.win(filled.base.as_ref().expect("filled"))?.first();
                let mut v = self.jin(&a, &b, &all, &w, params, &c)?;
                if !c.f.is_empty() {
                    match &c.pws {
                        Some(pws) => {
                            let fab = fab_expr(&a, &b, &c.f, filled.product_pool.as_ref().expect("filled")).compile(self.model)?;
                            let shift_pool = self.win(filled.shift_pool.as_ref().expect("filled"))?;
                            self.check(pws.f == c.f && pws.bound as u64 == c.k_bound, || "pws F or bound differs".into());
                            let rep = pws.thickness.as_ref().ok_or_else(|| Error::Schema("pws without thickness report".into()))?;
                            self.check(rep.probes == *filled.probes.as_ref().expect("filled"), || "probe family differs".into());
                            let thick = self.translates(&fab, rep, &shift_pool)?;
                            self.check(pws.verdict == verdict_of(thick), || "pws verdict is wrong".into());
                            if !thick {
                                v = Verdict::Failure;
                            }
                        }
                        None => {
                            self.check(false, || "F is nonempty but no pws certificate is recorded".into());
                        }
                    }
                }
                self.verdict_is(c.verdict, v);
            }
            Operation::ThmPullback { c, e, params, pool } => {
                let r: PullbackReport = env.result_as()?;
                let e = self.win(e)?;
                let cm = sorted(members_in(&self.set(c)?, &e)?);
                let pool = match pool {
                    Some(p) => self.win(p)?,
                    None => e.clone(),
                };
                self.pullback(&cm, &e, params, &pool, &r)?;
                self.verdict_is(env.verdict, verdict_of(r.reaches_target));
            }
            Operation::ThmEmbed { sets, params } => {
                let r: DenseEmbedReport = env.result_as()?;
                let v = self.embed(&self.sets(sets)?, params, &r)?;
                self.verdict_is(r.verdict, v);
            }
            Operation::ThmInverseProbe { set, params } => {
                let r: InverseProbe = env.result_as()?;
                let b = self.set(set)?;
                let inv = b.expr().clone().inverse().compile(self.model)?;
                for (s, est, dir, what) in [
                    (&b, &r.upper, Direction::Upper, "upper"),
                    (&b, &r.lower, Direction::Lower, "lower"),
                    (&inv, &r.inverse_upper, Direction::Upper, "inverse upper"),
                    (&inv, &r.inverse_lower, Direction::Lower, "inverse lower"),
                ] {
                    self.check(est.direction == dir && est.params.n_min == params.n_min && est.params.n_max == params.n_max, || {
                        format!("{what} grid differs from inputs")
                    });
                    self.estimate(s, est, true, what)?;
                }
                let equal = r.upper.value == r.inverse_upper.value && r.lower.value == r.inverse_lower.value;
                self.check(equal == r.equal, || "equality flag is wrong".into());
                self.verdict_is(r.verdict, verdict_of(!(r.asserted && !equal)));
            }
            Operation::Counterexample { m, n, l, k } => {
                let r: CounterexampleReport = env.result_as()?;
                let again = counterexample_report(*m, *n, *l, *k)?;
                self.check(again == r, || "counterexample report does not replay".into());
                self.verdict_is(env.verdict, verdict_of(again.densities_exact_and_not_thick()));
            }
        }
        Ok(())
    }

    /// Value at the recorded grid point; with `optimal`, also no grid
    /// point beats it.
    fn estimate(&mut self, set: &SetOracle, est: &DensityEstimate, optimal: bool, what: &str) -> Result<()> {
        let p = DensityParams { cap: self.cap.min(est.params.cap), ..est.params.clone() };
        let in_range = (p.n_min..=p.n_max).contains(&est.n);
        self.check(in_range, || format!("{what}: n = {} outside the grid", est.n));
        if !in_range {
            return Ok(());
        }
        let shifts = p.shifts.shifts(self.model, p.family, est.n, p.cap)?;
        self.check(shifts.contains(&est.shift), || format!("{what}: shift {} is not on the grid", est.shift));
        let w = p.family.window(self.model, est.n, p.cap)?;
        let v = shifted_density(set, &w, &est.shift)?;
        self.check(v == est.value, || format!("{what}: value replays to {v}, recorded {}", est.value));
        if optimal {
            let grid = crate::density::density_grid(set, &p)?;
            let beaten = grid.iter().find(|(n, g, x)| {
                let key = (*n, g);
                match est.direction {
                    Direction::Upper => *x > est.value || (*x == est.value && key < (est.n, &est.shift)),
                    Direction::Lower => *x < est.value || (*x == est.value && key < (est.n, &est.shift)),
                }
            });
            self.check(beaten.is_none(), || format!("{what}: the recorded point is not the least optimum"));
        }
        Ok(())
    }

    fn cover(&mut self, a: &SetOracle, f: &[GroupElement], k: usize, pool: &Window, strict: bool, region: &Window) -> Result<()> {
        self.check(!f.is_empty() && f.len() <= k, || format!("|F| = {} is not in 1..={k}", f.len()));
        for x in f {
            self.check(pool.contains(x), || format!("{x} is not in the pool"));
            if strict {
                let ok = a.contains(x)?;
                self.check(ok, || format!("{x} is not in A"));
            }
        }
        let fa = translates_union(a, f)?;
        let mut missed = None;
        for g in region.iter() {
            if !fa.contains(&g)? {
                missed = Some(g);
                break;
            }
        }
        self.check(missed.is_none(), || format!("{} is not covered by F·A", missed.clone().expect("missed")));
        Ok(())
    }

    fn density_witness(&mut self, a: &SetOracle, f: &[GroupElement], region: &Window, dw: &DensityWitness) -> Result<()> {
        self.check(f.contains(&dw.f), || "density witness is not in F".into());
        let hits = region.try_count_where(|g| a.contains(&self.model.mul_fast(&self.model.inv_fast(&dw.f), g)))?;
        let v = Rational::ratio(hits, region.len());
        self.check(v == dw.density, || format!("pigeonhole density replays to {v}, recorded {}", dw.density));
        self.check(&v * &Rational::ratio(f.len(), 1) >= Rational::one(), || "pigeonhole density is below 1/|F|".into());
        Ok(())
    }

    /// Every recorded `x` satisfies `Hx ⊆ target`; returns whether all
    /// probes were answered.
    fn translates(&mut self, target: &SetOracle, r: &TranslateReport, pool: &Window) -> Result<bool> {
        let ps = r.probes.probes(self.model, self.cap)?;
        for (i, w) in r.witnesses.iter().enumerate() {
            self.check(w.probe == i, || format!("witness {i} answers probe {}", w.probe));
            self.check(pool.contains(&w.x), || format!("{} is not in the pool", w.x));
            let h = ps.get(w.probe).ok_or_else(|| Error::Schema(format!("probe {} does not exist", w.probe)))?;
            let mut bad = None;
            for e in h {
                let y = self.model.mul_fast(e, &w.x);
                if !target.contains(&y)? {
                    bad = Some(y);
                    break;
                }
            }
            self.check(bad.is_none(), || format!("probe {}: {} is not in the target", w.probe, bad.clone().expect("bad")));
        }
        let complete = r.witnesses.len() == ps.len();
        self.check(complete == (r.verdict == Verdict::Success), || "thickness verdict disagrees with the witnesses".into());
        self.check(complete || r.failed_probe == Some(r.witnesses.len()), || "failed probe index is wrong".into());
        Ok(complete)
    }

    fn pws(&mut self, a: &SetOracle, c: &PwsCertificate, probes: &ProbeFamily, f_pool: &Window, shift_pool: &Window) -> Result<()> {
        self.check(!c.f.is_empty() && c.f.len() <= c.bound, || "|F| is out of bounds".into());
        for x in &c.f {
            self.check(f_pool.contains(x), || format!("{x} is not in the pool"));
            if c.strict {
                let ok = a.contains(x)?;
                self.check(ok, || format!("{x} is not in A"));
            }
        }
        let rep = c.thickness.as_ref().ok_or_else(|| Error::Schema("pws without thickness report".into()))?;
        self.check(rep.probes == *probes, || "probe family differs from inputs".into());
        let thick = self.translates(&translates_union(a, &c.f)?, rep, shift_pool)?;
        self.check(thick, || "F·A does not pass the probes".into());
        Ok(())
    }

    /// `P ⊆ F·𝒟` witness by witness, overlaps recomputed on `C`.
    #[allow(clippy::too_many_arguments)]
    fn greedy(
        &mut self,
        c: &[GroupElement],
        e: &Window,
        epsilon: &Rational,
        p: &Window,
        g0: &GroupElement,
        f: &[GroupElement],
        witnesses: &[CoverWitness],
        candidates: Option<&Window>,
    ) -> Result<()> {
        self.check(f.first() == Some(g0), || "F does not start at g0".into());
        for x in f {
            self.check(p.contains(x), || format!("{x} is not in P"));
        }
        self.check(witnesses.len() == p.len(), || format!("{} witnesses for |P| = {}", witnesses.len(), p.len()));
        for (w, x) in witnesses.iter().zip(p.iter()) {
            self.check(w.p == x, || format!("witness for {} out of order", w.p));
            self.check(f.contains(&w.f), || format!("{} is not in F", w.f));
            let prod = self.model.mul_fast(&w.f, &w.d);
            self.check(prod == w.p, || format!("{}·{} ≠ {}", w.f, w.d, w.p));
            if let Some(cw) = candidates {
                self.check(cw.contains(&w.d), || format!("{} is not a candidate", w.d));
            }
            let o = self_overlap(self.model, c, &w.d);
            self.check(o == w.overlap && epsilon.lt_count(o, e.len()), || {
                format!("|C ∩ {}C ∩ E| = {o}, recorded {}, needs > ε|E|", w.d, w.overlap)
            });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn greedy_stats(
        &mut self,
        c: &[GroupElement],
        e: &Window,
        epsilon: &Rational,
        f: &[GroupElement],
        gamma_eff: &Rational,
        bound: Option<u64>,
        reason: Option<BoundReason>,
        max_pair: usize,
    ) {
        let model = self.model;
        let translates: Vec<Vec<GroupElement>> =
            f.iter().map(|g| sorted(c.iter().map(|x| model.mul_fast(g, x)).filter(|y| e.contains(y)).collect())).collect();
        let gamma_count = translates.iter().map(|t| t.len()).min().unwrap_or(0);
        let gamma = Rational::ratio(gamma_count, e.len());
        self.check(gamma == *gamma_eff, || format!("γ_eff replays to {gamma}, recorded {gamma_eff}"));
        let mut mp = 0;
        for i in 0..translates.len() {
            for j in i + 1..translates.len() {
                mp = mp.max(translates[i].iter().filter(|x| translates[j].binary_search(x).is_ok()).count());
            }
        }
        self.check(mp == max_pair, || format!("max pair overlap replays to {mp}, recorded {max_pair}"));
        let b = greedy_bound(&gamma, epsilon);
        self.check(b == bound, || format!("bound replays to {b:?}, recorded {bound:?}"));
        let want = b.map(|b| {
            if gamma_count * f.len() <= e.len() {
                BoundReason::Small
            } else if !epsilon.lt_count(mp, e.len()) {
                BoundReason::Overlap
            } else if f.len() as u64 <= b {
                BoundReason::Direct
            } else {
                BoundReason::Violated
            }
        });
        self.check(want == reason, || format!("bound reason replays to {want:?}, recorded {reason:?}"));
        if let (Some(b), Some(r)) = (b, reason) {
            if r != BoundReason::Violated {
                self.check(f.len() as u64 <= b, || format!("|F| = {} exceeds the bound {b}", f.len()));
            }
        }
    }

    fn shift(&mut self, u: &Window, v: &Window, c: &[GroupElement], d: &[GroupElement], side: Side, r: &ShiftReport) -> Result<()> {
        let model = self.model;
        let c = sorted(c.to_vec());
        self.check(r.side == side, || "side differs from inputs".into());
        self.check(u.contains(&r.shift), || format!("shift {} is not in U", r.shift));
        let count = d
            .iter()
            .filter(|x| {
                let y = match side {
                    Side::Right => model.mul_fast(x, &r.shift),
                    Side::Left => model.mul_fast(&r.shift, x),
                };
                c.binary_search(&y).is_ok()
            })
            .count();
        self.check(count == r.count, || format!("count at the shift replays to {count}, recorded {}", r.count));
        self.check(Rational::ratio(count, v.len()) == r.achieved, || "achieved density is wrong".into());
        let defect_side = match side {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        };
        let worst = d.iter().map(|x| crate::group::symmetric_difference_size(u, x, defect_side)).max().unwrap_or(0);
        let md = Rational::ratio(worst, u.len());
        self.check(md == r.max_defect, || format!("max defect replays to {md}, recorded {}", r.max_defect));
        let floor = Rational::ratio(c.len(), u.len()) * Rational::ratio(d.len(), v.len()) - md;
        self.check(floor == r.floor, || "floor is wrong".into());
        self.check(
            (r.c_size, r.d_size, r.u_size, r.v_size) == (c.len(), d.len(), u.len(), v.len()),
            || "recorded sizes are wrong".into(),
        );
        Ok(())
    }

    /// Rebuilds the carrier from the recorded shifts and returns it.
    fn chain(&mut self, sets: &[SetOracle], e: &Window, side: Side, r: &ChainReport) -> Result<Vec<GroupElement>> {
        self.check(r.side == side, || "chain side is wrong".into());
        self.check(r.steps.len() < sets.len(), || "more chain steps than sets".into());
        let a0 = members_in(&sets[0], e)?;
        self.check(Rational::ratio(a0.len(), e.len()) == r.alpha0, || "α_0 is wrong".into());
        let mut product = r.alpha0.clone();
        let mut budget = Rational::zero();
        for (i, (a, step)) in sets[1..].iter().zip(&r.steps).enumerate() {
            let u = self.win(&step.u)?;
            let cm = members_in(a, &u)?;
            self.check(Rational::ratio(cm.len(), u.len()) == step.alpha, || format!("α at step {} is wrong", i + 1));
            let xi = self.model.inv_fast(&step.shift.shift);
            self.check(xi == step.xi, || format!("ξ at step {} is not the inverse shift", i + 1));
            product = &product * &step.alpha;
            budget = &budget + &step.shift.max_defect;
            let prefix = carrier(&sets[..i + 2], &r.shifts()[..i + 1], e, side)?;
            self.check(Rational::ratio(prefix.len(), e.len()) == step.achieved, || {
                format!("carrier density at step {} is wrong", i + 1)
            });
        }
        let c = if r.steps.len() + 1 == sets.len() {
            carrier(sets, &r.shifts(), e, side)?
        } else {
            // the chain stopped at an empty carrier
            self.check(r.steps.last().is_none_or(|s| s.achieved.is_zero()) && (!r.steps.is_empty() || a0.is_empty()), || {
                "chain stopped early with a nonempty carrier".into()
            });
            vec![]
        };
        let achieved = Rational::ratio(c.len(), e.len());
        self.check(achieved == r.achieved, || format!("carrier density replays to {achieved}, recorded {}", r.achieved));
        self.check(product == r.product && budget == r.budget, || "product or budget is wrong".into());
        let holds = achieved >= &product - &budget;
        self.check(holds == r.holds, || "holds flag is wrong".into());
        Ok(c)
    }

    fn delta_cover(
        &mut self,
        sets: &[SetOracle],
        epsilon: &Rational,
        p: &Window,
        g0: &GroupElement,
        params: &TheoremParams,
        c: &DeltaCoverCertificate,
    ) -> Result<Verdict> {
        let filled = params.filled(self.model);
        let e = self.win(filled.e.as_ref().expect("filled"))?;
        self.check(c.epsilon == *epsilon && c.e == e.spec() && c.p == p.spec() && c.g0 == *g0, || "header differs from inputs".into());
        let carrier = self.chain(sets, &e, Side::Right, &c.chain)?;
        let beta = Rational::ratio(carrier.len(), e.len());
        self.check(beta == c.beta_eff, || format!("β_eff replays to {beta}, recorded {}", c.beta_eff));
        let r = greedy_bound(&beta, epsilon);
        self.check(r == c.r, || format!("r replays to {r:?}, recorded {:?}", c.r));
        if carrier.is_empty() {
            self.check(c.l.is_empty(), || "empty carrier with a nonempty cover".into());
            return Ok(Verdict::Inconclusive);
        }
        self.greedy(&carrier, &e, epsilon, p, g0, &c.l, &c.witnesses, None)?;
        let g = &c.greedy;
        self.greedy_stats(&carrier, &e, epsilon, &c.l, &g.gamma_eff, g.bound, g.reason, g.max_pair_overlap);
        let covered = c.witnesses.len() == p.len();
        let replay_ok = self.delta_checks(sets, &c.chain, &e, epsilon, c.witnesses.iter().map(|w| &w.d), &c.delta_checks)?;
        let within = r.is_none_or(|r| c.l.len() as u64 <= r);
        if let Some(ph) = &c.pigeonhole {
            let count = c.witnesses.iter().filter(|w| w.f == ph.f).count();
            self.check(count == ph.count && Rational::ratio(count, p.len()) == ph.density, || "pigeonhole count is wrong".into());
            self.check(&ph.density * &Rational::ratio(c.l.len(), 1) >= Rational::one(), || "pigeonhole density is below 1/|L|".into());
        }
        Ok(verdict_of(covered && replay_ok && r.is_some() && within))
    }

    /// `|(A_jξ_j) ∩ d(A_jξ_j) ∩ E|` for each recorded `d`, against the
    /// counts in the certificate.
    fn delta_checks<'d>(
        &mut self,
        sets: &[SetOracle],
        chain: &ChainReport,
        e: &Window,
        epsilon: &Rational,
        ds: impl Iterator<Item = &'d GroupElement>,
        recorded: &[crate::theorems::DeltaReplay],
    ) -> Result<bool> {
        let mut want: Vec<GroupElement> = ds.cloned().collect();
        want.sort();
        want.dedup();
        let got: Vec<GroupElement> = recorded.iter().map(|r| r.d.clone()).collect();
        self.check(want == got, || "Δ replay rows do not match the witnesses".into());
        let model = self.model;
        let mut shifts = vec![model.identity()];
        shifts.extend(chain.shifts());
        let translated: Vec<Vec<GroupElement>> = sets
            .iter()
            .zip(&shifts)
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
        let mut all = true;
        for row in recorded {
            let counts: Vec<usize> = translated.iter().map(|t| self_overlap(model, t, &row.d)).collect();
            self.check(counts == row.counts, || format!("Δ counts at {} replay to {counts:?}, recorded {:?}", row.d, row.counts));
            let ok = counts.iter().all(|n| epsilon.lt_count(*n, e.len()));
            self.check(ok, || format!("{} is not in every Δ_ε(A_j) on E", row.d));
            all &= ok;
        }
        Ok(all)
    }

    fn roots(&mut self, sets: &[SetOracle], epsilon: &Rational, k: u64, params: &TheoremParams, c: &RootCoverCertificate) -> Result<Verdict> {
        let model = self.model;
        let filled = params.filled(model);
        let base = self.win(filled.base.as_ref().expect("filled"))?;
        let e = self.win(filled.e.as_ref().expect("filled"))?;
        self.check(c.k == k && c.base == base.spec(), || "header differs from inputs".into());
        let powers = Window::from_points(model, base.iter().map(|g| model.pow_fast(&g, k)))?;
        self.check(c.powers == powers.spec(), || "power window is wrong".into());
        let cv = self.delta_cover(sets, epsilon, &powers, &powers.first(), params, &c.cover)?;
        self.check(cv == c.cover.verdict, || "inner cover verdict is wrong".into());
        for h in &c.h {
            self.check(base.contains(h), || format!("{h} is not in the base window"));
            let hk = model.pow_fast(h, k);
            self.check(c.cover.l.contains(&hk), || format!("{h}^{k} is not in L"));
        }
        self.check(c.h.len() <= c.cover.l.len(), || "|H| exceeds |L|".into());
        let carrier = carrier(sets, &c.cover.chain.shifts(), &e, Side::Right)?;
        self.check(c.roots.len() + c.unrooted.len() >= base.len() || !c.unrooted.is_empty(), || "root witnesses are missing".into());
        let mut rooted = 0;
        for (w, g) in c.roots.iter().zip(base.iter()) {
            self.check(w.g == g || !c.unrooted.is_empty(), || format!("root witness for {} out of order", w.g));
            self.check(c.h.contains(&w.h), || format!("{} is not in H", w.h));
            let x = model.pow_fast(&model.mul_fast(&model.inv_fast(&w.h), &w.g), k);
            self.check(x == w.x, || format!("(h⁻¹g)^k for g = {} is {x}, recorded {}", w.g, w.x));
            let o = self_overlap(model, &carrier, &x);
            self.check(o == w.overlap && epsilon.lt_count(o, e.len()), || format!("|C ∩ xC ∩ E| at x = {x} is {o}"));
            rooted += 1;
        }
        let replay_ok = self.delta_checks(sets, &c.cover.chain, &e, epsilon, c.roots.iter().map(|w| &w.x), &c.root_checks)?;
        let all_rooted = rooted == base.len() && c.unrooted.is_empty();
        Ok(match cv {
            Verdict::Success if all_rooted && replay_ok => Verdict::Success,
            Verdict::Inconclusive => Verdict::Inconclusive,
            _ => Verdict::Failure,
        })
    }

    fn jin(
        &mut self,
        a: &SetOracle,
        b: &SetOracle,
        x: &SetOracle,
        w: &GroupElement,
        params: &TheoremParams,
        c: &JinCertificate,
    ) -> Result<Verdict> {
        let model = self.model;
        let filled = params.filled(model);
        let density = filled.density.clone().expect("filled");
        let e = self.win(filled.e.as_ref().expect("filled"))?;
        let base = self.win(filled.base.as_ref().expect("filled"))?;
        self.check(c.alpha.params.n_min == density.n_min && c.beta.params.n_min == density.n_min, || "density grid differs".into());
        self.estimate(a, &c.alpha, false, "α")?;
        self.estimate(b, &c.beta, false, "β")?;
        let kb = (&c.alpha.value * &c.beta.value).recip().floor_u64();
        self.check(kb == c.k_bound, || format!("⌊1/αβ⌋ replays to {kb}, recorded {}", c.k_bound));
        let mut pts = Vec::new();
        for g in base.iter() {
            if x.contains(&g)? {
                pts.push(g);
            }
        }
        let p = Window::from_points(model, pts)?;
        self.check(c.p == p.spec() && c.e == e.spec() && c.w == *w, || "header differs from inputs".into());
        let xt = self.chain(&[a.clone(), b.clone()], &e, Side::Left, &c.chain)?;
        let eta = c.chain.steps.first().map(|s| s.xi.clone()).unwrap_or_else(|| model.identity());
        self.check(eta == c.eta, || "η is not the chain shift".into());
        self.check(Rational::ratio(xt.len(), e.len()) == c.x_density, || "density of X̃ is wrong".into());
        if xt.is_empty() {
            self.check(c.f.is_empty(), || "empty X̃ with a nonempty F".into());
            return Ok(Verdict::Inconclusive);
        }
        let zero = Rational::zero();
        self.greedy_stats(&xt, &e, &zero, &c.f, &c.greedy.gamma_eff, c.greedy.bound, c.greedy.reason, c.greedy.max_pair_overlap);
        self.check(c.f.first() == Some(w), || "F does not start at w".into());
        for f in &c.f {
            self.check(p.contains(f), || format!("{f} is not in P"));
        }
        self.check(c.factorizations.len() == p.len(), || format!("{} factorizations for |P| = {}", c.factorizations.len(), p.len()));
        for (fz, pt) in c.factorizations.iter().zip(p.iter()) {
            self.check(fz.p == pt, || format!("factorization for {} out of order", fz.p));
            self.check(c.f.contains(&fz.f), || format!("{} is not in F", fz.f));
            let lhs = model.mul_fast(&fz.p, &eta);
            let rhs = model.mul_fast(&model.mul_fast(&fz.f, &fz.a), &fz.b);
            self.check(lhs == rhs, || format!("{}·η = {lhs} but f·a·b = {rhs}", fz.p));
            let (ina, inb) = (a.contains(&fz.a)?, b.contains(&fz.b)?);
            self.check(ina && inb, || format!("factors of {} are not in A and B", fz.p));
        }
        let covered = c.factorizations.len() == p.len();
        Ok(verdict_of(covered && c.f.len() as u64 <= kb))
    }

    fn pullback(&mut self, c: &[GroupElement], e: &Window, params: &DensityParams, pool: &Window, r: &PullbackReport) -> Result<()> {
        self.check(pool.contains(&r.xi) && r.pool == pool.spec(), || format!("ξ = {} is not in the pool", r.xi));
        let shifted = crate::theorems::pullback_expr(self.model, c, &r.xi)?.compile(self.model)?;
        self.check(r.estimate.params.n_min == params.n_min && r.estimate.params.n_max == params.n_max, || "grid differs".into());
        self.estimate(&shifted, &r.estimate, true, "pullback")?;
        let target = Rational::ratio(c.len(), e.len());
        self.check(target == r.target, || "target is wrong".into());
        self.check((r.estimate.value >= target) == r.reaches_target, || "reaches_target flag is wrong".into());
        Ok(())
    }

    fn embed(&mut self, sets: &[SetOracle], params: &TheoremParams, r: &DenseEmbedReport) -> Result<Verdict> {
        let model = self.model;
        let filled = params.filled(model);
        let e = self.win(filled.e.as_ref().expect("filled"))?;
        let density = filled.density.clone().expect("filled");
        self.check(r.alphas.len() == sets.len(), || "one α per set expected".into());
        for (i, (a, est)) in sets.iter().zip(&r.alphas).enumerate() {
            self.estimate(a, est, false, &format!("α_{}", i + 1))?;
        }
        let target = r.alphas.iter().fold(Rational::one(), |acc, a| &acc * &a.value);
        self.check(target == r.target, || "Π α_i is wrong".into());
        let c = self.chain(sets, &e, Side::Right, &r.chain)?;
        let pool = match &filled.pullback_pool {
            Some(w) => self.win(w)?,
            None => e.clone(),
        };
        let mut pb = r.pullback.clone();
        pb.estimate.params.cap = density.cap;
        self.pullback(&c, &e, &density, &pool, &pb)?;
        let eta_inv = model.inv_fast(&r.pullback.xi);
        let b = sorted(c.iter().map(|x| model.mul_fast(x, &eta_inv)).collect());
        self.check(b == r.b, || "B is not Cη⁻¹".into());
        let mut shifts = vec![model.identity()];
        shifts.extend(r.chain.shifts());
        let mut all = r.embeds.len() == sets.len();
        self.check(all, || "one embedding per set expected".into());
        for (ev, (a, xi)) in r.embeds.iter().zip(sets.iter().zip(&shifts)) {
            let x = model.mul_fast(&r.pullback.xi, &model.inv_fast(xi));
            self.check(ev.x == x, || format!("embedding translate for set {} is wrong", ev.set));
            let mut inside = true;
            for h in &b {
                if !a.contains(&model.mul_fast(h, &ev.x))? {
                    inside = false;
                    break;
                }
            }
            self.check(inside, || format!("Bx ⊄ A_{}", ev.set + 1));
            self.check((ev.report.verdict == Verdict::Success) == inside, || "embedding verdict is wrong".into());
            all &= inside;
        }
        self.check(all == r.consequence_ok, || "consequence flag is wrong".into());
        self.check(r.consequence_pairs == (b.len() as u64).pow(2), || "pair count is wrong".into());
        Ok(verdict_of(all && r.pullback.estimate.value >= target))
    }
}

fn sorted(mut v: Vec<GroupElement>) -> Vec<GroupElement> {
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::{run, RunConfig};

    fn roundtrip(json: &str) -> (Envelope, VerifyReport) {
        let env = run(&RunConfig::from_json(json).unwrap()).unwrap();
        let rep = verify_json(&env.to_json()).unwrap();
        assert!(rep.ok, "{json}: {:?}", rep.failures);
        (env, rep)
    }

    #[test]
    fn every_operation_verifies() {
        for op in [
            r#"{"op":"density","set":"mod:3:0"}"#,
            r#"{"op":"density","set":"mod:3:0","direction":"lower"}"#,
            r#"{"op":"folner-check"}"#,
            r#"{"op":"product","a":"evens","b":"mod:3:0","out":{"interval":[0,20]},"wa":{"interval":[-20,20]},"wb":{"interval":[-20,20]}}"#,
            r#"{"op":"delta","set":"evens","epsilon":"1/4","candidates":{"interval":[-4,5]}}"#,
            r#"{"op":"syndetic","set":"mod:3:0","k":3,"region":{"interval":[0,30]},"pool":{"interval":[0,5]}}"#,
            r#"{"op":"thick","set":"all","probes":{"intervals_up_to":4},"pool":{"interval":[0,5]}}"#,
            r#"{"op":"pws","set":"evens","k":2,"probes":{"intervals_up_to":4},"f_pool":{"interval":[0,4]},"shift_pool":{"interval":[0,4]}}"#,
            r#"{"op":"embed","probes":{"intervals_up_to":3},"b":"all","pool":{"interval":[0,4]}}"#,
            r#"{"op":"lemma-overlap","e":{"interval":[0,6]},"family":[[[0],[1]],[[1],[2]]]}"#,
            r#"{"op":"lemma-delta-cover","c":"evens","e":{"interval":[0,60]},"epsilon":"0","p":{"interval":[0,10]}}"#,
            r#"{"op":"lemma-shift","u":{"interval":[0,20]},"v":{"interval":[0,30]},"c":"evens","d":"mod:3:0"}"#,
            r#"{"op":"lemma-chain","sets":["evens","mod:3:0"],"e":{"interval":[0,120]}}"#,
            r#"{"op":"thm-delta-cover","sets":["evens","mod:3:0"],"epsilon":"0","p":{"interval":[0,12]},"params":{"e":{"interval":[0,360]}}}"#,
            r#"{"op":"thm-roots","sets":["mod:4:0"],"epsilon":"0","k":2,"params":{"e":{"interval":[0,240]},"base":{"interval":[0,12]}}}"#,
            r#"{"op":"thm-jin","a":"evens","b":"evens","params":{"e":{"interval":[0,240]}}}"#,
            r#"{"op":"thm-jin-pws","a":"evens","b":"evens","params":{"e":{"interval":[0,240]}}}"#,
            r#"{"op":"thm-pullback","c":"evens","e":{"interval":[0,60]},"params":{"family":"anchored","n_min":60,"n_max":60,"shifts":{"kind":"identity"}}}"#,
            r#"{"op":"thm-embed","sets":["evens","mod:3:0"],"params":{"e":{"interval":[0,240]}}}"#,
            r#"{"op":"thm-inverse-probe","set":"mod:3:1"}"#,
            r#"{"op":"counterexample","m":1,"n":1,"l":4,"k":3}"#,
        ] {
            roundtrip(&format!(r#"{{"operation":{op}}}"#));
        }
    }

    #[test]
    fn tampering_is_caught() {
        let (env, _) = roundtrip(r#"{"operation":{"op":"thm-jin","a":"evens","b":"evens","params":{"e":{"interval":[0,240]}}}}"#);
        let mut v: serde_json::Value = serde_json::from_str(&env.to_json()).unwrap();
        v["factorizations"][1]["b"] = serde_json::json!([7]);
        let rep = verify_json(&v.to_string()).unwrap();
        assert!(!rep.ok);
        let mut v: serde_json::Value = serde_json::from_str(&env.to_json()).unwrap();
        v["k_bound"] = serde_json::json!(5);
        assert!(!verify_json(&v.to_string()).unwrap().ok);
        let mut v: serde_json::Value = serde_json::from_str(&env.to_json()).unwrap();
        v["verdict"] = serde_json::json!("failure");
        assert!(!verify_json(&v.to_string()).unwrap().ok);
    }

    #[test]
    fn malformed_is_an_error() {
        assert!(verify_json("{}").is_err());
        assert!(verify_json("[1,2]").is_err());
    }
}
