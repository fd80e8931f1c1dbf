//! Membership oracles for subsets of a group.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, WindowSpec};
use crate::intsets::{IntervalsLiteral, PeriodicSet};
use crate::rational::Rational;

/// Membership predicate supplied from code; never serialized.
#[derive(Clone)]
pub struct Predicate {
    pub name: String,
    pub test: Arc<dyn Fn(&GroupElement) -> bool + Send + Sync>,
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate({})", self.name)
    }
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.test, &other.test)
    }
}

/// `x_coord ≡ residue (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Congruence {
    #[serde(default)]
    pub coord: usize,
    pub modulus: u64,
    pub residue: i64,
}

/// Finite point set, optionally declared complete on a bounding box.
/// Outside the box membership is undefined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExplicitLiteral", into = "ExplicitLiteral")]
pub struct ExplicitSet {
    members: Vec<GroupElement>,
    domain: Option<Vec<(i64, i64)>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitLiteral {
    pub members: Vec<GroupElement>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub domain: Option<Vec<(i64, i64)>>,
}

impl TryFrom<ExplicitLiteral> for ExplicitSet {
    type Error = Error;

    fn try_from(lit: ExplicitLiteral) -> Result<ExplicitSet> {
        ExplicitSet::new(lit.members, lit.domain)
    }
}

impl From<ExplicitSet> for ExplicitLiteral {
    fn from(s: ExplicitSet) -> ExplicitLiteral {
        ExplicitLiteral { members: s.members, domain: s.domain }
    }
}

impl ExplicitSet {
    pub fn new(mut members: Vec<GroupElement>, domain: Option<Vec<(i64, i64)>>) -> Result<ExplicitSet> {
        members.sort();
        members.dedup();
        if let Some(d) = &domain {
            if d.iter().any(|(lo, hi)| hi < lo) {
                return Err(Error::Schema("empty explicit domain".into()));
            }
            if let Some(m) = members.iter().find(|m| !in_box(d, m)) {
                return Err(Error::Schema(format!("member {m} outside declared domain")));
            }
        }
        Ok(ExplicitSet { members, domain })
    }

    pub fn members(&self) -> &[GroupElement] {
        &self.members
    }

    pub fn domain(&self) -> Option<&[(i64, i64)]> {
        self.domain.as_deref()
    }

    fn contains(&self, g: &GroupElement) -> Result<bool> {
        if let Some(d) = &self.domain {
            if !in_box(d, g) {
                return Err(Error::OracleUndefined(g.to_string()));
            }
        }
        Ok(self.members.binary_search(g).is_ok())
    }
}

fn in_box(ranges: &[(i64, i64)], g: &GroupElement) -> bool {
    ranges.len() == g.arity() && ranges.iter().zip(g.coords()).all(|((lo, hi), x)| lo <= x && x <= hi)
}

/// A subset of a group given by a membership rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetExpr {
    All,
    Empty,
    /// Eventually periodic subset of ℤ.
    Periodic(PeriodicSet),
    /// Repeated intervals in ℤ, compiled to a periodic set.
    Intervals(IntervalsLiteral),
    /// Intersection of coordinate congruences.
    Congruence { conditions: Vec<Congruence> },
    Explicit(ExplicitSet),
    /// Pseudo-random set of the given density, keyed on coordinates.
    Random { density: Rational, seed: u64 },
    /// `⋃_{j ≥ 1} [2^j, 2^j + j)` in ℤ.
    PowerRuns,
    Union { sets: Vec<SetExpr> },
    Intersection { sets: Vec<SetExpr> },
    Complement { set: Box<SetExpr> },
    /// `g·A`.
    LeftTranslate { by: GroupElement, set: Box<SetExpr> },
    /// `A·g`.
    RightTranslate { set: Box<SetExpr>, by: GroupElement },
    /// `A⁻¹`.
    Inverse { set: Box<SetExpr> },
    /// `F·A` for a finite `F`.
    Translates { by: Vec<GroupElement>, set: Box<SetExpr> },
    /// `A·B` with the `A` factor drawn from `pool`; exact when every
    /// factorization needs `a ∈ pool`, an inner approximation otherwise.
    Product { left: Box<SetExpr>, right: Box<SetExpr>, pool: WindowSpec },
    #[serde(skip)]
    Predicate(Predicate),
}

/// A set expression checked against a group model, with periodic
/// literals compiled.
#[derive(Clone, Debug)]
pub struct SetOracle {
    model: GroupModel,
    expr: SetExpr,
    node: Node,
}

#[derive(Clone, Debug)]
enum Node {
    All,
    Empty,
    Periodic(PeriodicSet),
    Congruence(Vec<Congruence>),
    Explicit(ExplicitSet),
    Random { num: u128, den: u128, seed: u64 },
    PowerRuns,
    Union(Vec<Node>),
    Intersection(Vec<Node>),
    Complement(Box<Node>),
    Left(GroupElement, Box<Node>),
    Right(Box<Node>, GroupElement),
    Inverse(Box<Node>),
    Translates(Vec<GroupElement>, Box<Node>),
    Product(Vec<GroupElement>, Box<Node>),
    Predicate(Predicate),
}

const MAX_DEPTH: usize = 64;
/// Largest translate list or product pool.
const MAX_FACTORS: usize = 1 << 16;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn coord_hash(seed: u64, g: &GroupElement) -> u64 {
    g.coords().iter().fold(splitmix(seed), |h, x| splitmix(h ^ (*x as u64)))
}

impl SetExpr {
    pub fn periodic(s: PeriodicSet) -> SetExpr {
        SetExpr::Periodic(s)
    }

    /// `aℤ + r` on coordinate 0.
    pub fn multiples(modulus: u64, residue: i64) -> SetExpr {
        SetExpr::Congruence { conditions: vec![Congruence { coord: 0, modulus, residue }] }
    }

    pub fn predicate(name: &str, f: impl Fn(&GroupElement) -> bool + Send + Sync + 'static) -> SetExpr {
        SetExpr::Predicate(Predicate { name: name.to_string(), test: Arc::new(f) })
    }

    pub fn complement(self) -> SetExpr {
        SetExpr::Complement { set: Box::new(self) }
    }

    pub fn left_translate(self, by: GroupElement) -> SetExpr {
        SetExpr::LeftTranslate { by, set: Box::new(self) }
    }

    pub fn right_translate(self, by: GroupElement) -> SetExpr {
        SetExpr::RightTranslate { set: Box::new(self), by }
    }

    pub fn inverse(self) -> SetExpr {
        SetExpr::Inverse { set: Box::new(self) }
    }

    pub fn compile(&self, model: &GroupModel) -> Result<SetOracle> {
        model.validate()?;
        let node = self.node(model, 0)?;
        Ok(SetOracle { model: model.clone(), expr: self.clone(), node })
    }

    fn node(&self, model: &GroupModel, depth: usize) -> Result<Node> {
        if depth > MAX_DEPTH {
            return Err(Error::Schema("set expression nested too deeply".into()));
        }
        let element = |g: &GroupElement| -> Result<GroupElement> {
            if !model.is_canonical(g) {
                return Err(Error::Parameter(format!("{g} is not a canonical element")));
            }
            Ok(g.clone())
        };
        let need_integers = |what: &str| -> Result<()> {
            if model.is_integers() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{what} sets live in ℤ")))
            }
        };
        Ok(match self {
            SetExpr::All => Node::All,
            SetExpr::Empty => Node::Empty,
            SetExpr::Periodic(p) => {
                need_integers("periodic")?;
                Node::Periodic(p.clone())
            }
            SetExpr::Intervals(lit) => {
                need_integers("interval")?;
                Node::Periodic(lit.compile()?)
            }
            SetExpr::Congruence { conditions } => {
                for c in conditions {
                    if c.coord >= model.arity() {
                        return Err(Error::Arity { expected: model.arity(), found: c.coord + 1 });
                    }
                    if c.modulus == 0 {
                        return Err(Error::Parameter("congruence modulus must be >= 1".into()));
                    }
                }
                Node::Congruence(conditions.clone())
            }
            SetExpr::Explicit(e) => {
                if let Some(m) = e.members.iter().find(|m| m.arity() != model.arity()) {
                    return Err(Error::Arity { expected: model.arity(), found: m.arity() });
                }
                if e.domain.as_ref().is_some_and(|d| d.len() != model.arity()) {
                    return Err(Error::Schema("explicit domain arity mismatch".into()));
                }
                Node::Explicit(e.clone())
            }
            SetExpr::Random { density, seed } => {
                if density.is_negative() || *density > Rational::one() {
                    return Err(Error::Parameter("random density must lie in [0, 1]".into()));
                }
                // membership iff hash < density * 2^64, compared as h * den < num * 2^64
                let den = density.denom().to_string().parse::<u128>();
                let num = density.numer().to_string().parse::<u128>();
                match (num, den) {
                    (Ok(num), Ok(den)) if den < (1 << 60) => Node::Random { num, den, seed: *seed },
                    _ => return Err(Error::Parameter("random density denominator too large".into())),
                }
            }
            SetExpr::PowerRuns => {
                need_integers("power-run")?;
                Node::PowerRuns
            }
            SetExpr::Union { sets } => {
                Node::Union(sets.iter().map(|s| s.node(model, depth + 1)).collect::<Result<_>>()?)
            }
            SetExpr::Intersection { sets } => {
                Node::Intersection(sets.iter().map(|s| s.node(model, depth + 1)).collect::<Result<_>>()?)
            }
            SetExpr::Complement { set } => Node::Complement(Box::new(set.node(model, depth + 1)?)),
            SetExpr::LeftTranslate { by, set } => {
                Node::Left(model.inv(&element(by)?)?, Box::new(set.node(model, depth + 1)?))
            }
            SetExpr::RightTranslate { set, by } => {
                Node::Right(Box::new(set.node(model, depth + 1)?), model.inv(&element(by)?)?)
            }
            SetExpr::Inverse { set } => Node::Inverse(Box::new(set.node(model, depth + 1)?)),
            SetExpr::Translates { by, set } => {
                if by.is_empty() || by.len() > MAX_FACTORS {
                    return Err(Error::Parameter(format!("translate list must have 1..={MAX_FACTORS} elements")));
                }
                let inv = by.iter().map(|g| model.inv(&element(g)?)).collect::<Result<_>>()?;
                Node::Translates(inv, Box::new(set.node(model, depth + 1)?))
            }
            SetExpr::Product { left, right, pool } => {
                let pool = pool.build(model, MAX_FACTORS)?;
                let a = left.node(model, depth + 1)?;
                let mut inv = Vec::new();
                for g in pool.iter() {
                    if a.contains(model, &g)? {
                        inv.push(model.inv_fast(&g));
                    }
                }
                Node::Product(inv, Box::new(right.node(model, depth + 1)?))
            }
            SetExpr::Predicate(p) => Node::Predicate(p.clone()),
        })
    }
}

impl Node {
    fn contains(&self, model: &GroupModel, g: &GroupElement) -> Result<bool> {
        Ok(match self {
            Node::All => true,
            Node::Empty => false,
            Node::Periodic(p) => p.contains(g.coords()[0]),
            Node::Congruence(cs) => {
                cs.iter().all(|c| g.coords()[c.coord].rem_euclid(c.modulus as i64) == c.residue.rem_euclid(c.modulus as i64))
            }
            Node::Explicit(e) => e.contains(g)?,
            Node::Random { num, den, seed } => (coord_hash(*seed, g) as u128) * den < num << 64,
            Node::PowerRuns => {
                let x = g.coords()[0];
                if x < 2 {
                    false
                } else {
                    let j = 63 - x.leading_zeros() as i64;
                    x < (1i64 << j) + j
                }
            }
            Node::Union(ns) => {
                for n in ns {
                    if n.contains(model, g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Node::Intersection(ns) => {
                for n in ns {
                    if !n.contains(model, g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Complement(n) => !n.contains(model, g)?,
            Node::Left(inv, n) => n.contains(model, &model.mul_fast(inv, g))?,
            Node::Right(n, inv) => n.contains(model, &model.mul_fast(g, inv))?,
            Node::Inverse(n) => n.contains(model, &model.inv_fast(g))?,
            Node::Translates(inv, n) | Node::Product(inv, n) => {
                for f in inv {
                    if n.contains(model, &model.mul_fast(f, g))? {
                        return Ok(true);
                    }
                }
                false
            }
            Node::Predicate(p) => (p.test)(g),
        })
    }
}

impl SetOracle {
    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn expr(&self) -> &SetExpr {
        &self.expr
    }

    /// Membership of a canonical element of the oracle's model.
    pub fn contains(&self, g: &GroupElement) -> Result<bool> {
        if g.arity() != self.model.arity() {
            return Err(Error::Arity { expected: self.model.arity(), found: g.arity() });
        }
        self.node.contains(&self.model, g)
    }

    /// The periodic set behind this oracle, when it is one.
    pub fn as_periodic(&self) -> Option<&PeriodicSet> {
        match &self.node {
            Node::Periodic(p) => Some(p),
            _ => None,
        }
    }
}

/// Command-line shorthands: `all`, `empty`, `evens`, `odds`, `runs`,
/// `mod:m:r` (coordinate 0), `random:num/den:seed`, `finite:x,y,...`
/// (ℤ only) or a JSON set literal.
impl FromStr for SetExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<SetExpr> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()));
        }
        let bad = || Error::Schema(format!("unknown set shorthand {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["all"] => Ok(SetExpr::All),
            ["empty"] => Ok(SetExpr::Empty),
            ["evens"] => Ok(SetExpr::multiples(2, 0)),
            ["odds"] => Ok(SetExpr::multiples(2, 1)),
            ["runs"] => Ok(SetExpr::PowerRuns),
            ["mod", m, r] => {
                let m: u64 = m.parse().map_err(|_| bad())?;
                let r: i64 = r.parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(SetExpr::multiples(m, r))
            }
            ["random", d, seed] => Ok(SetExpr::Random { density: d.parse()?, seed: seed.parse().map_err(|_| bad())? }),
            ["finite", xs] => {
                let members = xs
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.trim().parse::<i64>().map(GroupElement::scalar).map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SetExpr::Explicit(ExplicitSet::new(members, None)?))
            }
            _ => Err(bad()),
        }
    }
}
