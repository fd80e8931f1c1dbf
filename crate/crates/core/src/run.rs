//! Run configurations, the certificate envelope and operation dispatch.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::density::{lower_density_estimate, upper_density_estimate, DensityParams, Direction, ShiftSpec};
use crate::error::{Error, Result};
use crate::group::{invariance_defect, GroupElement, GroupModel, Side, WindowFamily, WindowSpec, DEFAULT_WINDOW_CAP};
use crate::intsets::counterexample_report;
use crate::lemmas::{concentration_chain, concentration_shift, greedy_delta_cover, overlap_pair_bound, BoundReason, ChainPlan};
use crate::oracle::{SetExpr, SetOracle};
use crate::rational::Rational;
use crate::setops::{
    default_delta_params, delta_set, difference_witnesses, finite_embed_check, members_in, piecewise_syndetic_check, product_set,
    syndetic_cover_search, syndetic_density_witness, thickness_check, ProbeFamily, SearchOptions,
};
use crate::theorems::{
    delta_intersection_cover, dense_embed_search, inverse_density_probe, jin_piecewise_check, jin_witness, pullback_search,
    root_delta_cover, TheoremParams,
};
use crate::verdict::{Verdict, DEFAULT_SEARCH_BUDGET};

/// Overrides the window cap when set.
pub const ENV_WINDOW_CAP: &str = "AMEN_WINDOW_CAP";
/// Overrides the search budget when set.
pub const ENV_SEARCH_BUDGET: &str = "AMEN_SEARCH_BUDGET";

/// Name of a set in the config's `sets` table, or a set shorthand.
pub type SetRef = String;

fn default_true_side() -> Side {
    Side::Left
}

fn default_direction() -> Direction {
    Direction::Upper
}

fn default_ns() -> Vec<u64> {
    vec![4, 8, 16, 32]
}

fn default_folner_eps() -> Rational {
    Rational::new(1, 10)
}

fn default_density() -> DensityParams {
    default_delta_params()
}

fn default_symmetric_grid() -> DensityParams {
    DensityParams::new(WindowFamily::Symmetric, 8, 16, ShiftSpec::Window)
}

fn default_all() -> SetRef {
    "all".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Operation {
    Density {
        set: SetRef,
        #[serde(default = "default_density")]
        params: DensityParams,
        #[serde(default = "default_direction")]
        direction: Direction,
    },
    FolnerCheck {
        #[serde(default)]
        family: WindowFamily,
        #[serde(default = "default_ns")]
        ns: Vec<u64>,
        /// The model's generators when unset.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translations: Option<Vec<GroupElement>>,
        #[serde(default = "default_true_side")]
        side: Side,
        #[serde(default = "default_folner_eps")]
        epsilon: Rational,
    },
    Product {
        a: SetRef,
        b: SetRef,
        out: WindowSpec,
        wa: WindowSpec,
        wb: WindowSpec,
    },
    Delta {
        set: SetRef,
        epsilon: Rational,
        candidates: WindowSpec,
        #[serde(default = "default_delta_params")]
        params: DensityParams,
    },
    Syndetic {
        set: SetRef,
        k: usize,
        region: WindowSpec,
        pool: WindowSpec,
        #[serde(default)]
        strict: bool,
    },
    Thick {
        set: SetRef,
        probes: ProbeFamily,
        pool: WindowSpec,
    },
    Pws {
        set: SetRef,
        k: usize,
        probes: ProbeFamily,
        f_pool: WindowSpec,
        shift_pool: WindowSpec,
        #[serde(default)]
        strict: bool,
    },
    Embed {
        probes: ProbeFamily,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<SetRef>,
        b: SetRef,
        pool: WindowSpec,
    },
    LemmaOverlap {
        e: WindowSpec,
        family: Vec<Vec<GroupElement>>,
    },
    LemmaDeltaCover {
        /// Intersected with `E`.
        c: SetRef,
        e: WindowSpec,
        epsilon: Rational,
        p: WindowSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g0: Option<GroupElement>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        candidates: Option<WindowSpec>,
    },
    LemmaShift {
        u: WindowSpec,
        v: WindowSpec,
        /// Intersected with `U`.
        c: SetRef,
        /// Intersected with `V`.
        d: SetRef,
        #[serde(default = "right_side")]
        side: Side,
    },
    LemmaChain {
        sets: Vec<SetRef>,
        e: WindowSpec,
        #[serde(default)]
        plan: ChainPlan,
        #[serde(default = "right_side")]
        side: Side,
    },
    ThmDeltaCover {
        sets: Vec<SetRef>,
        epsilon: Rational,
        p: WindowSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g0: Option<GroupElement>,
        #[serde(default)]
        params: TheoremParams,
    },
    ThmRoots {
        sets: Vec<SetRef>,
        epsilon: Rational,
        k: u64,
        #[serde(default)]
        params: TheoremParams,
    },
    ThmJin {
        a: SetRef,
        b: SetRef,
        #[serde(default = "default_all")]
        x: SetRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<GroupElement>,
        #[serde(default)]
        params: TheoremParams,
    },
    ThmJinPws {
        a: SetRef,
        b: SetRef,
        #[serde(default)]
        params: TheoremParams,
    },
    ThmPullback {
        /// Intersected with `E`.
        c: SetRef,
        e: WindowSpec,
        params: DensityParams,
        /// `E` when unset.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pool: Option<WindowSpec>,
    },
    ThmEmbed {
        sets: Vec<SetRef>,
        #[serde(default)]
        params: TheoremParams,
    },
    ThmInverseProbe {
        set: SetRef,
        #[serde(default = "default_symmetric_grid")]
        params: DensityParams,
    },
    Counterexample {
        m: u64,
        n: u64,
        l: u64,
        k: u64,
    },
}

fn right_side() -> Side {
    Side::Right
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Density { .. } => "density",
            Operation::FolnerCheck { .. } => "folner-check",
            Operation::Product { .. } => "product",
            Operation::Delta { .. } => "delta",
            Operation::Syndetic { .. } => "syndetic",
            Operation::Thick { .. } => "thick",
            Operation::Pws { .. } => "pws",
            Operation::Embed { .. } => "embed",
            Operation::LemmaOverlap { .. } => "lemma-overlap",
            Operation::LemmaDeltaCover { .. } => "lemma-delta-cover",
            Operation::LemmaShift { .. } => "lemma-shift",
            Operation::LemmaChain { .. } => "lemma-chain",
            Operation::ThmDeltaCover { .. } => "thm-delta-cover",
            Operation::ThmRoots { .. } => "thm-roots",
            Operation::ThmJin { .. } => "thm-jin",
            Operation::ThmJinPws { .. } => "thm-jin-pws",
            Operation::ThmPullback { .. } => "thm-pullback",
            Operation::ThmEmbed { .. } => "thm-embed",
            Operation::ThmInverseProbe { .. } => "thm-inverse-probe",
            Operation::Counterexample { .. } => "counterexample",
        }
    }

    /// Every set reference, in order of appearance.
    pub fn set_refs(&self) -> Vec<&SetRef> {
        match self {
            Operation::Density { set, .. }
            | Operation::Delta { set, .. }
            | Operation::Syndetic { set, .. }
            | Operation::Thick { set, .. }
            | Operation::Pws { set, .. }
            | Operation::ThmInverseProbe { set, .. } => vec![set],
            Operation::Product { a, b, .. } | Operation::ThmJinPws { a, b, .. } => vec![a, b],
            Operation::Embed { a, b, .. } => a.iter().chain(std::iter::once(b)).collect(),
            Operation::LemmaDeltaCover { c, .. } | Operation::ThmPullback { c, .. } => vec![c],
            Operation::LemmaShift { c, d, .. } => vec![c, d],
            Operation::LemmaChain { sets, .. }
            | Operation::ThmDeltaCover { sets, .. }
            | Operation::ThmRoots { sets, .. }
            | Operation::ThmEmbed { sets, .. } => sets.iter().collect(),
            Operation::ThmJin { a, b, x, .. } => vec![a, b, x],
            Operation::FolnerCheck { .. } | Operation::LemmaOverlap { .. } | Operation::Counterexample { .. } => vec![],
        }
    }
}

/// Resource limits; `None` means the built-in default.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Budgets {
    pub fn window_cap(&self) -> usize {
        self.window_cap.unwrap_or(DEFAULT_WINDOW_CAP)
    }

    pub fn search_budget(&self) -> u64 {
        self.search_budget.unwrap_or(DEFAULT_SEARCH_BUDGET)
    }

    /// Applies the environment overrides on top of these budgets.
    pub fn with_env(mut self) -> Result<Budgets> {
        if let Ok(v) = std::env::var(ENV_WINDOW_CAP) {
            self.window_cap = Some(v.trim().parse().map_err(|_| Error::Schema(format!("{ENV_WINDOW_CAP}={v:?}")))?);
        }
        if let Ok(v) = std::env::var(ENV_SEARCH_BUDGET) {
            self.search_budget = Some(v.trim().parse().map_err(|_| Error::Schema(format!("{ENV_SEARCH_BUDGET}={v:?}")))?);
        }
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        if self.window_cap == Some(0) || self.search_budget == Some(0) || self.threads == Some(0) {
            return Err(Error::Parameter("budgets must be positive".into()));
        }
        Ok(())
    }

    /// The two limits that shape results, both made explicit.
    pub fn effective(&self) -> Budgets {
        Budgets { window_cap: Some(self.window_cap()), search_budget: Some(self.search_budget()), threads: None }
    }
}

/// A set given either as a shorthand string or as a JSON expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Short(String),
    Expr(SetExpr),
}

impl SetSpec {
    pub fn expr(&self) -> Result<SetExpr> {
        match self {
            SetSpec::Short(s) => s.parse(),
            SetSpec::Expr(e) => Ok(e.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "GroupModel::integers")]
    pub group: GroupModel,
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub budgets: Budgets,
}

impl RunConfig {
    pub fn new(group: GroupModel, operation: Operation) -> RunConfig {
        RunConfig { group, sets: BTreeMap::new(), operation, output: None, budgets: Budgets::default() }
    }

    pub fn from_json(s: &str) -> Result<RunConfig> {
        serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// A self-contained output document: the inputs that produced it, with
/// every set reference resolved, and the result fields at top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub operation: String,
    pub verdict: Verdict,
    pub group: GroupModel,
    pub sets: BTreeMap<String, SetExpr>,
    pub budgets: Budgets,
    pub inputs: Operation,
    #[serde(flatten)]
    pub result: Map<String, Value>,
}

impl Envelope {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Envelope> {
        serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
    }

    /// The result object as originally produced, with its verdict.
    pub fn result_value(&self) -> Value {
        let mut m = self.result.clone();
        m.insert("verdict".into(), serde_json::to_value(self.verdict).expect("verdict serializes"));
        Value::Object(m)
    }

    pub fn result_as<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.result_value()).map_err(|e| Error::Schema(format!("{} result: {e}", self.operation)))
    }

    pub fn oracle(&self, name: &str) -> Result<SetOracle> {
        let e = self.sets.get(name).ok_or_else(|| Error::Schema(format!("set {name:?} is not recorded")))?;
        e.compile(&self.group)
    }
}

/// Resolves every reference of the operation against the config.
pub fn resolve_sets(config: &RunConfig) -> Result<BTreeMap<String, SetExpr>> {
    let mut out = BTreeMap::new();
    for r in config.operation.set_refs() {
        let expr = match config.sets.get(r) {
            Some(spec) => spec.expr()?,
            None => r.parse().map_err(|_| Error::Schema(format!("set {r:?} is neither defined nor a shorthand")))?,
        };
        out.insert(r.clone(), expr);
    }
    Ok(out)
}

fn with_verdict<T: Serialize>(verdict: Verdict, value: &T) -> (Verdict, Map<String, Value>) {
    let mut m = match serde_json::to_value(value).expect("result serializes") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    m.remove("verdict");
    (verdict, m)
}

/// `max |hK△K|/|K|` for each window index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerRow {
    pub n: u64,
    pub len: usize,
    pub defect: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerReport {
    pub translations: Vec<GroupElement>,
    pub rows: Vec<FolnerRow>,
    /// Defects never increase along the listed indices.
    pub nonincreasing: bool,
    /// First index whose defect is below ε.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub below_epsilon_at: Option<u64>,
}

pub fn folner_report(
    model: &GroupModel,
    family: WindowFamily,
    ns: &[u64],
    translations: &[GroupElement],
    side: Side,
    epsilon: &Rational,
    cap: usize,
) -> Result<FolnerReport> {
    if ns.is_empty() {
        return Err(Error::Empty("window index list"));
    }
    let mut rows = Vec::new();
    for n in ns {
        let w = family.window(model, *n, cap)?;
        rows.push(FolnerRow { n: *n, len: w.len(), defect: invariance_defect(&w, translations, side)? });
    }
    let nonincreasing = rows.windows(2).all(|p| p[1].defect <= p[0].defect);
    let below_epsilon_at = rows.iter().find(|r| r.defect < *epsilon).map(|r| r.n);
    Ok(FolnerReport { translations: translations.to_vec(), rows, nonincreasing, below_epsilon_at })
}

/// `(f, density)` from the pigeonhole on a syndetic cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub f: GroupElement,
    pub density: Rational,
}

/// Fills every defaulted field that depends on the model, so the recorded
/// inputs rebuild the run exactly.
pub fn normalize(op: &Operation, model: &GroupModel, cap: usize) -> Result<Operation> {
    let mut op = op.clone();
    match &mut op {
        Operation::FolnerCheck { translations, .. } => {
            if translations.is_none() {
                *translations = Some(model.generators());
            }
        }
        Operation::LemmaDeltaCover { p, g0, .. } | Operation::ThmDeltaCover { p, g0, .. }
            if g0.is_none() => {
                *g0 = Some(p.build(model, cap)?.first());
            }
        _ => {}
    }
    match &mut op {
        Operation::ThmDeltaCover { params, .. }
        | Operation::ThmRoots { params, .. }
        | Operation::ThmJin { params, .. }
        | Operation::ThmJinPws { params, .. }
        | Operation::ThmEmbed { params, .. } => *params = params.filled(model),
        _ => {}
    }
    if let Operation::ThmJin { w, params, .. } = &mut op {
        if w.is_none() {
            *w = Some(params.base.as_ref().expect("filled").build(model, cap)?.first());
        }
    }
    Ok(op)
}

/// Executes the configured operation.
pub fn run(config: &RunConfig) -> Result<Envelope> {
    config.budgets.check()?;
    let model = &config.group;
    model.validate()?;
    let budgets = config.budgets.effective();
    let cap = budgets.window_cap();
    let sets = resolve_sets(config)?;
    let op = normalize(&config.operation, model, cap)?;
    let (verdict, result) = execute(model, &sets, &op, &budgets)?;
    Ok(Envelope { operation: op.name().to_string(), verdict, group: model.clone(), sets, budgets, inputs: op, result })
}

/// Runs a normalized operation against resolved sets.
pub fn execute(
    model: &GroupModel,
    sets: &BTreeMap<String, SetExpr>,
    op: &Operation,
    budgets: &Budgets,
) -> Result<(Verdict, Map<String, Value>)> {
    let cap = budgets.window_cap();
    let opts = |strict: bool| SearchOptions { strict, budget: budgets.search_budget() };
    let oracle = |name: &SetRef| -> Result<SetOracle> {
        sets.get(name).ok_or_else(|| Error::Schema(format!("unresolved set {name:?}")))?.compile(model)
    };
    let oracles = |names: &[SetRef]| -> Result<Vec<SetOracle>> {
        if names.is_empty() {
            return Err(Error::Empty("set list"));
        }
        names.iter().map(&oracle).collect()
    };
    let win = |w: &WindowSpec| w.build(model, cap);
    let with_cap = |p: &DensityParams| DensityParams { cap: cap.min(p.cap), ..p.clone() };
    Ok(match op {
        Operation::Density { set, params, direction } => {
            let a = oracle(set)?;
            let est = match direction {
                Direction::Upper => upper_density_estimate(&a, &with_cap(params))?,
                Direction::Lower => lower_density_estimate(&a, &with_cap(params))?,
            };
            with_verdict(Verdict::Success, &est)
        }
        Operation::FolnerCheck { family, ns, translations, side, epsilon } => {
            let hs = translations.clone().unwrap_or_else(|| model.generators());
            let r = folner_report(model, *family, ns, &hs, *side, epsilon, cap)?;
            let v = if r.nonincreasing && r.below_epsilon_at.is_some() { Verdict::Success } else { Verdict::Failure };
            with_verdict(v, &r)
        }
        Operation::Product { a, b, out, wa, wb } => {
            let r = product_set(&oracle(a)?, &oracle(b)?, &win(out)?, &win(wa)?, &win(wb)?)?;
            with_verdict(Verdict::Success, &r)
        }
        Operation::Delta { set, epsilon, candidates, params } => {
            let r = delta_set(&oracle(set)?, epsilon, &win(candidates)?, &with_cap(params))?;
            with_verdict(Verdict::Success, &r)
        }
        Operation::Syndetic { set, k, region, pool, strict } => {
            let a = oracle(set)?;
            let region = win(region)?;
            let c = syndetic_cover_search(&a, *k, &region, &win(pool)?, opts(*strict))?;
            let (v, mut m) = with_verdict(c.verdict, &c);
            if c.verdict == Verdict::Success {
                let (f, density) = syndetic_density_witness(&a, &c.f, &region)?;
                m.insert("density_witness".into(), serde_json::to_value(DensityWitness { f, density }).expect("serializes"));
            }
            (v, m)
        }
        Operation::Thick { set, probes, pool } => {
            let r = thickness_check(&oracle(set)?, probes, &win(pool)?)?;
            with_verdict(r.verdict, &r)
        }
        Operation::Pws { set, k, probes, f_pool, shift_pool, strict } => {
            let c = piecewise_syndetic_check(&oracle(set)?, *k, probes, &win(f_pool)?, &win(shift_pool)?, opts(*strict))?;
            with_verdict(c.verdict, &c)
        }
        Operation::Embed { probes, a, b, pool } => {
            let ps = probes.probes(model, cap)?;
            let a = a.as_ref().map(&oracle).transpose()?;
            let r = finite_embed_check(&ps, &oracle(b)?, &win(pool)?, a.as_ref())?;
            let (v, mut m) = with_verdict(r.verdict, &r);
            let diffs = difference_witnesses(model, &ps, &r);
            m.insert("difference_witnesses".into(), Value::from(diffs.len()));
            (v, m)
        }
        Operation::LemmaOverlap { e, family } => {
            let r = overlap_pair_bound(&win(e)?, family)?;
            with_verdict(if r.holds { Verdict::Success } else { Verdict::Failure }, &r)
        }
        Operation::LemmaDeltaCover { c, e, epsilon, p, g0, candidates } => {
            let e = win(e)?;
            let members = members_in(&oracle(c)?, &e)?;
            let cands = candidates.as_ref().map(&win).transpose()?;
            let p = win(p)?;
            let g0 = g0.clone().unwrap_or_else(|| p.first());
            let r = greedy_delta_cover(&members, &e, epsilon, &p, &g0, cands.as_ref())?;
            let v = if r.covered && r.reason != Some(BoundReason::Violated) { Verdict::Success } else { Verdict::Failure };
            with_verdict(v, &r)
        }
        Operation::LemmaShift { u, v, c, d, side } => {
            let (u, v) = (win(u)?, win(v)?);
            let cm = members_in(&oracle(c)?, &u)?;
            let dm = members_in(&oracle(d)?, &v)?;
            let r = concentration_shift(&u, &v, &cm, &dm, *side)?;
            with_verdict(if r.achieved >= r.floor { Verdict::Success } else { Verdict::Failure }, &r)
        }
        Operation::LemmaChain { sets: names, e, plan, side } => {
            let r = concentration_chain(&oracles(names)?, &win(e)?, plan, *side)?;
            with_verdict(if r.holds { Verdict::Success } else { Verdict::Failure }, &r)
        }
        Operation::ThmDeltaCover { sets: names, epsilon, p, g0, params } => {
            let params = params.resolve(model, cap)?;
            let p = win(p)?;
            let g0 = g0.clone().unwrap_or_else(|| p.first());
            let c = delta_intersection_cover(&oracles(names)?, epsilon, &p, &g0, &params)?;
            with_verdict(c.verdict, &c)
        }
        Operation::ThmRoots { sets: names, epsilon, k, params } => {
            let c = root_delta_cover(&oracles(names)?, epsilon, *k, &params.resolve(model, cap)?)?;
            with_verdict(c.verdict, &c)
        }
        Operation::ThmJin { a, b, x, w, params } => {
            let params = params.resolve(model, cap)?;
            let w = w.clone().unwrap_or_else(|| params.base.first());
            let c = jin_witness(&oracle(a)?, &oracle(b)?, &oracle(x)?, &w, &params)?;
            with_verdict(c.verdict, &c)
        }
        Operation::ThmJinPws { a, b, params } => {
            let c = jin_piecewise_check(&oracle(a)?, &oracle(b)?, &params.resolve(model, cap)?)?;
            with_verdict(c.verdict, &c)
        }
        Operation::ThmPullback { c, e, params, pool } => {
            let e = win(e)?;
            let members = members_in(&oracle(c)?, &e)?;
            let pool = match pool {
                Some(p) => win(p)?,
                None => e.clone(),
            };
            let r = pullback_search(&members, &e, &with_cap(params), &pool)?;
            with_verdict(if r.reaches_target { Verdict::Success } else { Verdict::Failure }, &r)
        }
        Operation::ThmEmbed { sets: names, params } => {
            let r = dense_embed_search(&oracles(names)?, &params.resolve(model, cap)?)?;
            with_verdict(r.verdict, &r)
        }
        Operation::ThmInverseProbe { set, params } => {
            let r = inverse_density_probe(&oracle(set)?, &with_cap(params))?;
            with_verdict(r.verdict, &r)
        }
        Operation::Counterexample { m, n, l, k } => {
            if !model.is_integers() {
                return Err(Error::InvalidModel("the counterexample family lives in ℤ".into()));
            }
            let r = counterexample_report(*m, *n, *l, *k)?;
            let v = if r.densities_exact_and_not_thick() { Verdict::Success } else { Verdict::Failure };
            let (v, mut map) = with_verdict(v, &r);
            map.insert("observed_gap".into(), serde_json::to_value(r.observed_gap()).expect("serializes"));
            (v, map)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn density_envelope_shape() {
        let c = cfg(r#"{"operation":{"op":"density","set":"evens","params":{"family":"anchored","n_min":12,"n_max":12,"shifts":{"kind":"identity"}}}}"#);
        let env = run(&c).unwrap();
        let v: Value = serde_json::from_str(&env.to_json()).unwrap();
        assert_eq!(v["verdict"], "success");
        assert_eq!(v["value"], "1/2");
        assert_eq!(v["operation"], "density");
        let back = Envelope::from_json(&env.to_json()).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn named_sets_and_unknown_fields() {
        let c = cfg(r#"{"sets":{"A":"mod:3:1"},"operation":{"op":"density","set":"A"}}"#);
        assert_eq!(run(&c).unwrap().sets["A"], SetExpr::multiples(3, 1));
        assert!(RunConfig::from_json(r#"{"operation":{"op":"density","set":"A","bogus":1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"operation":{"op":"nope"}}"#).is_err());
        let missing = cfg(r#"{"operation":{"op":"density","set":"Q"}}"#);
        assert_eq!(run(&missing).unwrap_err().kind(), "schema");
    }

    #[test]
    fn counterexample_via_run() {
        let c = cfg(r#"{"operation":{"op":"counterexample","m":1,"n":1,"l":4,"k":3}}"#);
        let env = run(&c).unwrap();
        assert_eq!(env.verdict, Verdict::Success);
        assert_eq!(env.result["density_a"], "1/4");
    }

    #[test]
    fn jin_via_run_is_deterministic() {
        let c = cfg(r#"{"operation":{"op":"thm-jin","a":"evens","b":"evens","params":{"e":{"interval":[0,240]}}}}"#);
        let a = run(&c).unwrap().to_json();
        let b = run(&c).unwrap().to_json();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["k_bound"], 4);
    }
}
