//! Concrete amenable groups, Følner windows and invariance defects.
//!
//! Elements are integer coordinate tuples. `Zd` uses ℤ^d vectors,
//! `Heisenberg3` uses triples `(a, b, c)` with the law
//! `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`, `FiniteCyclic(n)` uses a
//! single residue in `[0, n)`, and products concatenate factor coordinates.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest coordinate magnitude accepted from external input.
pub const COORD_LIMIT: i64 = 1 << 30;

/// Default cap on the number of elements a window may hold.
pub const DEFAULT_WINDOW_CAP: usize = 10_000_000;

const MAX_LATTICE_RANK: u32 = 16;
const MAX_MODEL_DEPTH: usize = 8;
const MAX_ARITY: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub SmallVec<[i64; 4]>);

impl GroupElement {
    pub fn new(coords: &[i64]) -> GroupElement {
        GroupElement(SmallVec::from_slice(coords))
    }

    pub fn scalar(x: i64) -> GroupElement {
        GroupElement(smallvec::smallvec![x])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum GroupModel {
    #[serde(rename = "Zd")]
    IntegerLattice { d: u32 },
    Heisenberg3,
    FiniteCyclic { n: u64 },
    #[serde(rename = "Product")]
    DirectProduct { factors: Vec<GroupModel> },
}

/// The three primitive operations of a group model.
#[derive(Clone, Debug)]
pub enum ElementOp {
    Mul(GroupElement, GroupElement),
    Inv(GroupElement),
    Id,
}

impl GroupModel {
    pub fn integers() -> GroupModel {
        GroupModel::IntegerLattice { d: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_depth(0)?;
        if self.arity() > MAX_ARITY {
            return Err(Error::InvalidModel(format!("arity {} exceeds {MAX_ARITY}", self.arity())));
        }
        Ok(())
    }

    fn validate_depth(&self, depth: usize) -> Result<()> {
        if depth > MAX_MODEL_DEPTH {
            return Err(Error::InvalidModel("product nesting too deep".into()));
        }
        match self {
            GroupModel::IntegerLattice { d } => {
                if *d == 0 || *d > MAX_LATTICE_RANK {
                    return Err(Error::InvalidModel(format!("Zd rank must be in 1..={MAX_LATTICE_RANK}, got {d}")));
                }
            }
            GroupModel::Heisenberg3 => {}
            GroupModel::FiniteCyclic { n } => {
                if *n == 0 || *n > COORD_LIMIT as u64 {
                    return Err(Error::InvalidModel(format!("cyclic order must be in 1..={COORD_LIMIT}, got {n}")));
                }
            }
            GroupModel::DirectProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidModel("direct product needs at least one factor".into()));
                }
                for f in factors {
                    f.validate_depth(depth + 1)?;
                }
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        match self {
            GroupModel::IntegerLattice { d } => *d as usize,
            GroupModel::Heisenberg3 => 3,
            GroupModel::FiniteCyclic { .. } => 1,
            GroupModel::DirectProduct { factors } => factors.iter().map(GroupModel::arity).sum(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupModel::Heisenberg3 => false,
            GroupModel::DirectProduct { factors } => factors.iter().all(GroupModel::is_abelian),
            _ => true,
        }
    }

    /// Group order, or `None` for infinite models.
    pub fn order(&self) -> Option<u128> {
        match self {
            GroupModel::IntegerLattice { .. } | GroupModel::Heisenberg3 => None,
            GroupModel::FiniteCyclic { n } => Some(*n as u128),
            GroupModel::DirectProduct { factors } => {
                factors.iter().try_fold(1u128, |acc, f| f.order().and_then(|o| acc.checked_mul(o)))
            }
        }
    }

    pub fn is_integers(&self) -> bool {
        matches!(self, GroupModel::IntegerLattice { d: 1 })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(smallvec::smallvec![0; self.arity()])
    }

    pub fn check_arity(&self, g: &GroupElement) -> Result<()> {
        if g.arity() != self.arity() {
            return Err(Error::Arity { expected: self.arity(), found: g.arity() });
        }
        Ok(())
    }

    /// Validates arity and reduces finite-factor coordinates.
    pub fn canonicalize(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.arity() {
            return Err(Error::Arity { expected: self.arity(), found: coords.len() });
        }
        let mut out = SmallVec::from_slice(coords);
        self.reduce_in_place(&mut out);
        Ok(GroupElement(out))
    }

    pub fn is_canonical(&self, g: &GroupElement) -> bool {
        g.arity() == self.arity() && {
            let mut c = g.0.clone();
            self.reduce_in_place(&mut c);
            c == g.0
        }
    }

    fn reduce_in_place(&self, c: &mut [i64]) {
        match self {
            GroupModel::FiniteCyclic { n } => c[0] = c[0].rem_euclid(*n as i64),
            GroupModel::DirectProduct { factors } => {
                let mut off = 0;
                for f in factors {
                    let a = f.arity();
                    f.reduce_in_place(&mut c[off..off + a]);
                    off += a;
                }
            }
            _ => {}
        }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check_arity(g)?;
        self.check_arity(h)?;
        Ok(self.mul_fast(g, h))
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check_arity(g)?;
        Ok(self.inv_fast(g))
    }

    pub fn apply(&self, op: &ElementOp) -> Result<GroupElement> {
        match op {
            ElementOp::Mul(g, h) => self.mul(g, h),
            ElementOp::Inv(g) => self.inv(g),
            ElementOp::Id => Ok(self.identity()),
        }
    }

    /// Multiplication without arity checks; operands must be canonical.
    /// Arithmetic wraps, so out-of-range coordinates never panic.
    pub fn mul_fast(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        debug_assert_eq!(g.arity(), self.arity());
        debug_assert_eq!(h.arity(), self.arity());
        let mut out = SmallVec::with_capacity(g.arity());
        self.mul_into(&g.0, &h.0, &mut out);
        GroupElement(out)
    }

    pub fn inv_fast(&self, g: &GroupElement) -> GroupElement {
        let mut out = SmallVec::with_capacity(g.arity());
        self.inv_into(&g.0, &mut out);
        GroupElement(out)
    }

    fn mul_into(&self, a: &[i64], b: &[i64], out: &mut SmallVec<[i64; 4]>) {
        match self {
            GroupModel::IntegerLattice { .. } => {
                out.extend(a.iter().zip(b).map(|(x, y)| x.wrapping_add(*y)));
            }
            GroupModel::Heisenberg3 => {
                out.push(a[0].wrapping_add(b[0]));
                out.push(a[1].wrapping_add(b[1]));
                out.push(a[2].wrapping_add(b[2]).wrapping_add(a[0].wrapping_mul(b[1])));
            }
            GroupModel::FiniteCyclic { n } => {
                let n = *n as i64;
                out.push((a[0].rem_euclid(n) + b[0].rem_euclid(n)) % n);
            }
            GroupModel::DirectProduct { factors } => {
                let mut off = 0;
                for f in factors {
                    let k = f.arity();
                    f.mul_into(&a[off..off + k], &b[off..off + k], out);
                    off += k;
                }
            }
        }
    }

    fn inv_into(&self, a: &[i64], out: &mut SmallVec<[i64; 4]>) {
        match self {
            GroupModel::IntegerLattice { .. } => out.extend(a.iter().map(|x| x.wrapping_neg())),
            GroupModel::Heisenberg3 => {
                out.push(a[0].wrapping_neg());
                out.push(a[1].wrapping_neg());
                out.push(a[0].wrapping_mul(a[1]).wrapping_sub(a[2]));
            }
            GroupModel::FiniteCyclic { n } => {
                let n = *n as i64;
                out.push((n - a[0].rem_euclid(n)) % n);
            }
            GroupModel::DirectProduct { factors } => {
                let mut off = 0;
                for f in factors {
                    let k = f.arity();
                    f.inv_into(&a[off..off + k], out);
                    off += k;
                }
            }
        }
    }

    /// `g^k` by repeated squaring.
    pub fn pow(&self, g: &GroupElement, k: u64) -> Result<GroupElement> {
        self.check_arity(g)?;
        Ok(self.pow_fast(g, k))
    }

    pub fn pow_fast(&self, g: &GroupElement, mut k: u64) -> GroupElement {
        let mut acc = self.identity();
        let mut base = g.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_fast(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul_fast(&base, &base);
            }
        }
        acc
    }

    /// A standard generating set: unit vectors for ℤ^d, the two
    /// non-central generators for Heisenberg, `1` for cyclic groups.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self {
            GroupModel::IntegerLattice { d } => (0..*d as usize)
                .map(|i| {
                    let mut c = smallvec::smallvec![0; *d as usize];
                    c[i] = 1;
                    GroupElement(c)
                })
                .collect(),
            GroupModel::Heisenberg3 => vec![GroupElement::new(&[1, 0, 0]), GroupElement::new(&[0, 1, 0])],
            GroupModel::FiniteCyclic { n } => vec![GroupElement::scalar(if *n == 1 { 0 } else { 1 })],
            GroupModel::DirectProduct { factors } => {
                let mut gens = Vec::new();
                let total = self.arity();
                let mut off = 0;
                for f in factors {
                    for g in f.generators() {
                        let mut c: SmallVec<[i64; 4]> = smallvec::smallvec![0; total];
                        c[off..off + f.arity()].copy_from_slice(&g.0);
                        gens.push(GroupElement(c));
                    }
                    off += f.arity();
                }
                gens
            }
        }
    }

    fn box_ranges(&self, n: u64, family: WindowFamily, out: &mut Vec<(i64, i64)>) -> Result<()> {
        let n = i64::try_from(n).ok().filter(|v| *v <= COORD_LIMIT).ok_or_else(|| {
            Error::Parameter(format!("window index {n} exceeds {COORD_LIMIT}"))
        })?;
        match (self, family) {
            (GroupModel::IntegerLattice { d }, WindowFamily::Symmetric) => {
                out.extend(std::iter::repeat_n((-n, n), *d as usize))
            }
            (GroupModel::IntegerLattice { d }, WindowFamily::Anchored) => {
                out.extend(std::iter::repeat_n((0, n - 1), *d as usize))
            }
            (GroupModel::Heisenberg3, WindowFamily::Symmetric) => {
                out.extend([(-n, n), (-n, n), (-n * n, n * n)]);
            }
            (GroupModel::Heisenberg3, WindowFamily::Anchored) => {
                out.extend([(0, n - 1), (0, n - 1), (0, n * n - 1)]);
            }
            (GroupModel::FiniteCyclic { n: m }, _) => out.push((0, *m as i64 - 1)),
            (GroupModel::DirectProduct { factors }, fam) => {
                for f in factors {
                    f.box_ranges(n as u64, fam, out)?;
                }
            }
        }
        Ok(())
    }
}

/// The two standard box families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFamily {
    /// `[-n, n]^d`, `[-n,n]² × [-n², n²]` for Heisenberg.
    #[default]
    Symmetric,
    /// `[0, n)^d`, `[0,n)² × [0, n²)` for Heisenberg.
    Anchored,
}

impl WindowFamily {
    pub fn window(self, model: &GroupModel, n: u64, cap: usize) -> Result<Window> {
        if n == 0 {
            return Err(Error::Parameter("window index n must be >= 1".into()));
        }
        model.validate()?;
        let mut ranges = Vec::with_capacity(model.arity());
        model.box_ranges(n, self, &mut ranges)?;
        let shape = match self {
            WindowFamily::Symmetric => ShapeKind::Symmetric,
            WindowFamily::Anchored => ShapeKind::Anchored,
        };
        Window::from_box(model.clone(), ranges, WindowParams { shape, n: Some(n) }, cap)
    }
}

/// Standard Følner window: symmetric box family at index `n`.
pub fn folner_window(model: &GroupModel, n: u64, cap: usize) -> Result<Window> {
    WindowFamily::Symmetric.window(model, n, cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Symmetric,
    Anchored,
    Box,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowParams {
    pub shape: ShapeKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Shape {
    /// Inclusive per-coordinate ranges.
    Box(Vec<(i64, i64)>),
    /// Sorted, duplicate-free.
    Points(Vec<GroupElement>),
}

/// A finite nonempty subset of a group, stored in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    group: GroupModel,
    shape: Shape,
    params: WindowParams,
    len: usize,
}

fn box_len(ranges: &[(i64, i64)]) -> Option<u128> {
    ranges.iter().try_fold(1u128, |acc, (lo, hi)| {
        if hi < lo {
            return None;
        }
        acc.checked_mul((*hi as i128 - *lo as i128 + 1) as u128)
    })
}

impl Window {
    pub fn from_box(group: GroupModel, ranges: Vec<(i64, i64)>, params: WindowParams, cap: usize) -> Result<Window> {
        if ranges.len() != group.arity() {
            return Err(Error::Arity { expected: group.arity(), found: ranges.len() });
        }
        let len = box_len(&ranges).ok_or(Error::Empty("window box"))?;
        if len > cap as u128 {
            return Err(Error::WindowCap { requested: len, cap });
        }
        // finite factors must stay inside their residue range
        let probe_lo: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let probe_hi: Vec<i64> = ranges.iter().map(|r| r.1).collect();
        if !group.is_canonical(&GroupElement::new(&probe_lo)) || !group.is_canonical(&GroupElement::new(&probe_hi)) {
            return Err(Error::Parameter("box leaves the canonical range of a finite factor".into()));
        }
        Ok(Window { group, shape: Shape::Box(ranges), params, len: len as usize })
    }

    /// Box with explicit inclusive ranges.
    pub fn box_window(group: &GroupModel, ranges: Vec<(i64, i64)>, cap: usize) -> Result<Window> {
        Window::from_box(group.clone(), ranges, WindowParams { shape: ShapeKind::Box, n: None }, cap)
    }

    /// Half-open integer interval `[a, b)` in ℤ.
    pub fn interval(a: i64, b: i64) -> Result<Window> {
        if b <= a {
            return Err(Error::Empty("interval"));
        }
        Window::box_window(&GroupModel::integers(), vec![(a, b - 1)], usize::MAX)
    }

    pub fn from_points<I: IntoIterator<Item = GroupElement>>(group: &GroupModel, points: I) -> Result<Window> {
        let mut pts: Vec<GroupElement> = Vec::new();
        for p in points {
            if !group.is_canonical(&p) {
                return Err(if p.arity() != group.arity() {
                    Error::Arity { expected: group.arity(), found: p.arity() }
                } else {
                    Error::Parameter(format!("non-canonical element {p}"))
                });
            }
            pts.push(p);
        }
        pts.sort();
        pts.dedup();
        if pts.is_empty() {
            return Err(Error::Empty("window"));
        }
        let len = pts.len();
        Ok(Window {
            group: group.clone(),
            shape: Shape::Points(pts),
            params: WindowParams { shape: ShapeKind::Explicit, n: None },
            len,
        })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn params(&self) -> &WindowParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-coordinate inclusive ranges when the window is a box.
    pub fn box_ranges(&self) -> Option<&[(i64, i64)]> {
        match &self.shape {
            Shape::Box(r) => Some(r),
            Shape::Points(_) => None,
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match &self.shape {
            Shape::Box(r) => g.arity() == r.len() && g.0.iter().zip(r).all(|(x, (lo, hi))| lo <= x && x <= hi),
            Shape::Points(p) => p.binary_search(g).is_ok(),
        }
    }

    /// Position of `g` in window order.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        match &self.shape {
            Shape::Box(r) => {
                if !self.contains(g) {
                    return None;
                }
                let mut idx = 0usize;
                for (x, (lo, hi)) in g.0.iter().zip(r) {
                    idx = idx * (hi - lo + 1) as usize + (x - lo) as usize;
                }
                Some(idx)
            }
            Shape::Points(p) => p.binary_search(g).ok(),
        }
    }

    pub fn get(&self, idx: usize) -> Option<GroupElement> {
        if idx >= self.len {
            return None;
        }
        match &self.shape {
            Shape::Box(r) => {
                let mut c: SmallVec<[i64; 4]> = smallvec::smallvec![0; r.len()];
                let mut rest = idx;
                for (i, (lo, hi)) in r.iter().enumerate().rev() {
                    let w = (hi - lo + 1) as usize;
                    c[i] = lo + (rest % w) as i64;
                    rest /= w;
                }
                Some(GroupElement(c))
            }
            Shape::Points(p) => Some(p[idx].clone()),
        }
    }

    pub fn first(&self) -> GroupElement {
        self.get(0).expect("windows are nonempty")
    }

    pub fn iter(&self) -> WindowIter<'_> {
        WindowIter { window: self, pos: 0, cursor: None }
    }

    pub fn to_vec(&self) -> Vec<GroupElement> {
        self.iter().collect()
    }

    /// Splits the window into contiguous runs (in window order) for
    /// parallel scans.
    fn chunks(&self) -> Vec<(usize, usize)> {
        let parts = (rayon::current_num_threads() * 4).max(1);
        let step = self.len.div_ceil(parts).max(1024);
        (0..self.len).step_by(step).map(|s| (s, (s + step).min(self.len))).collect()
    }

    fn iter_range(&self, start: usize, end: usize) -> impl Iterator<Item = GroupElement> + '_ {
        WindowIter { window: self, pos: start, cursor: None }.take(end - start)
    }

    /// Number of elements satisfying `pred`, scanned in parallel.
    pub fn count_where<F>(&self, pred: F) -> usize
    where
        F: Fn(&GroupElement) -> bool + Sync,
    {
        self.chunks().into_par_iter().map(|(s, e)| self.iter_range(s, e).filter(|g| pred(g)).count()).sum()
    }

    /// Fallible variant of [`Window::count_where`]; the first error in
    /// window order is reported.
    pub fn try_count_where<F>(&self, pred: F) -> Result<usize>
    where
        F: Fn(&GroupElement) -> Result<bool> + Sync,
    {
        let parts: Vec<Result<usize>> = self
            .chunks()
            .into_par_iter()
            .map(|(s, e)| {
                let mut n = 0;
                for g in self.iter_range(s, e) {
                    if pred(&g)? {
                        n += 1;
                    }
                }
                Ok(n)
            })
            .collect();
        parts.into_iter().sum()
    }

    /// Least element (in window order) satisfying `pred`.
    pub fn find_first<F>(&self, pred: F) -> Option<GroupElement>
    where
        F: Fn(&GroupElement) -> bool + Sync,
    {
        self.chunks()
            .into_par_iter()
            .find_map_first(|(s, e)| self.iter_range(s, e).find(|g| pred(g)))
    }

    pub fn try_find_first<F>(&self, pred: F) -> Result<Option<GroupElement>>
    where
        F: Fn(&GroupElement) -> Result<bool> + Sync,
    {
        let found: Vec<Result<Option<GroupElement>>> = self
            .chunks()
            .into_par_iter()
            .map(|(s, e)| {
                for g in self.iter_range(s, e) {
                    if pred(&g)? {
                        return Ok(Some(g));
                    }
                }
                Ok(None)
            })
            .collect();
        for f in found {
            if let Some(g) = f? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }

    /// `{ k g : k ∈ self }` as an explicit window.
    pub fn right_translate(&self, g: &GroupElement) -> Result<Window> {
        self.group.check_arity(g)?;
        if let (Shape::Box(r), GroupModel::IntegerLattice { .. }) = (&self.shape, &self.group) {
            let ranges = r
                .iter()
                .zip(g.coords())
                .map(|((lo, hi), s)| (lo.wrapping_add(*s), hi.wrapping_add(*s)))
                .collect();
            let params = WindowParams { shape: ShapeKind::Box, n: self.params.n };
            return Window::from_box(self.group.clone(), ranges, params, usize::MAX);
        }
        Window::from_points(&self.group, self.iter().map(|k| self.group.mul_fast(&k, g)))
    }

    pub fn left_translate(&self, g: &GroupElement) -> Result<Window> {
        self.group.check_arity(g)?;
        Window::from_points(&self.group, self.iter().map(|k| self.group.mul_fast(g, &k)))
    }

    pub fn inverse(&self) -> Result<Window> {
        if let (Shape::Box(r), GroupModel::IntegerLattice { .. }) = (&self.shape, &self.group) {
            let ranges = r.iter().map(|(lo, hi)| (-hi, -lo)).collect();
            return Window::box_window(&self.group, ranges, usize::MAX);
        }
        Window::from_points(&self.group, self.iter().map(|k| self.group.inv_fast(&k)))
    }
}

/// Serializable description of a window.
///
/// Exactly one of `family` (with `n`), `box`, `interval` or `elements`
/// is given; `shift` right-translates the result.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<WindowFamily>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none", default)]
    pub ranges: Option<Vec<(i64, i64)>>,
    /// Half-open `[a, b)` in ℤ.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub interval: Option<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elements: Option<Vec<GroupElement>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shift: Option<GroupElement>,
}

impl WindowSpec {
    pub fn family(family: WindowFamily, n: u64) -> WindowSpec {
        WindowSpec { family: Some(family), n: Some(n), ..WindowSpec::default() }
    }

    pub fn interval(a: i64, b: i64) -> WindowSpec {
        WindowSpec { interval: Some((a, b)), ..WindowSpec::default() }
    }

    pub fn boxed(ranges: Vec<(i64, i64)>) -> WindowSpec {
        WindowSpec { ranges: Some(ranges), ..WindowSpec::default() }
    }

    pub fn elements(elements: Vec<GroupElement>) -> WindowSpec {
        WindowSpec { elements: Some(elements), ..WindowSpec::default() }
    }

    pub fn build(&self, model: &GroupModel, cap: usize) -> Result<Window> {
        model.validate()?;
        let given = [self.family.is_some() || self.n.is_some(), self.ranges.is_some(), self.interval.is_some(), self.elements.is_some()];
        if given.iter().filter(|b| **b).count() != 1 {
            return Err(Error::Schema("window needs exactly one of family/n, box, interval, elements".into()));
        }
        let base = if let Some(r) = &self.ranges {
            if r.iter().any(|(lo, hi)| lo.abs() > COORD_LIMIT || hi.abs() > COORD_LIMIT) {
                return Err(Error::Parameter(format!("box coordinates exceed ±{COORD_LIMIT}")));
            }
            Window::box_window(model, r.clone(), cap)?
        } else if let Some((a, b)) = self.interval {
            if !model.is_integers() {
                return Err(Error::InvalidModel("interval windows live in ℤ".into()));
            }
            if a.abs() > COORD_LIMIT || b.abs() > COORD_LIMIT || b <= a {
                return Err(Error::Parameter(format!("bad interval [{a}, {b})")));
            }
            if (b - a) as u128 > cap as u128 {
                return Err(Error::WindowCap { requested: (b - a) as u128, cap });
            }
            Window::interval(a, b)?
        } else if let Some(el) = &self.elements {
            if el.len() > cap {
                return Err(Error::WindowCap { requested: el.len() as u128, cap });
            }
            Window::from_points(model, el.iter().cloned())?
        } else {
            let n = self.n.ok_or_else(|| Error::Schema("window family needs `n`".into()))?;
            if n > COORD_LIMIT as u64 {
                return Err(Error::Parameter("window index too large".into()));
            }
            self.family.unwrap_or_default().window(model, n, cap)?
        };
        match &self.shift {
            None => Ok(base),
            Some(g) => {
                if !model.is_canonical(g) {
                    return Err(Error::Parameter(format!("non-canonical shift {g}")));
                }
                base.right_translate(g)
            }
        }
    }
}

impl Window {
    /// A spec that rebuilds this window.
    pub fn spec(&self) -> WindowSpec {
        match (&self.shape, self.params.shape, self.params.n) {
            (Shape::Box(_), ShapeKind::Symmetric, Some(n)) => WindowSpec::family(WindowFamily::Symmetric, n),
            (Shape::Box(_), ShapeKind::Anchored, Some(n)) => WindowSpec::family(WindowFamily::Anchored, n),
            (Shape::Box(r), _, _) => WindowSpec::boxed(r.clone()),
            (Shape::Points(p), _, _) => WindowSpec::elements(p.clone()),
        }
    }
}

pub struct WindowIter<'a> {
    window: &'a Window,
    pos: usize,
    cursor: Option<SmallVec<[i64; 4]>>,
}

impl Iterator for WindowIter<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        if self.pos >= self.window.len {
            return None;
        }
        let out = match &self.window.shape {
            Shape::Points(p) => p[self.pos].clone(),
            Shape::Box(r) => {
                match &mut self.cursor {
                    None => {
                        self.cursor = Some(self.window.get(self.pos)?.0);
                    }
                    Some(c) => {
                        // odometer increment, last coordinate fastest
                        for i in (0..r.len()).rev() {
                            if c[i] < r[i].1 {
                                c[i] += 1;
                                break;
                            }
                            c[i] = r[i].0;
                        }
                    }
                }
                GroupElement(self.cursor.clone().expect("cursor set"))
            }
        };
        self.pos += 1;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.window.len - self.pos.min(self.window.len);
        (rest, Some(rest))
    }
}

/// Side of translation used in a defect computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// `|hK △ K|` (left) or `|Kh △ K|` (right), as an integer.
pub fn symmetric_difference_size(window: &Window, h: &GroupElement, side: Side) -> usize {
    let g = &window.group;
    if let (Shape::Box(r), GroupModel::IntegerLattice { .. }) = (&window.shape, g) {
        let overlap = r.iter().zip(h.coords()).try_fold(1usize, |acc, ((lo, hi), t)| {
            let len = (hi - lo + 1) as u64;
            let keep = len.saturating_sub(t.unsigned_abs());
            acc.checked_mul(keep as usize)
        });
        return 2 * (window.len - overlap.unwrap_or(0));
    }
    let escaped = window.count_where(|k| {
        let t = match side {
            Side::Left => g.mul_fast(h, k),
            Side::Right => g.mul_fast(k, h),
        };
        !window.contains(&t)
    });
    // translation is injective, so |hK \ K| = |K \ hK|
    2 * escaped
}

/// `max_{h ∈ H} |hK △ K| / |K|` exactly.
pub fn invariance_defect(window: &Window, translations: &[GroupElement], side: Side) -> Result<Rational> {
    if translations.is_empty() {
        return Err(Error::Empty("translation set H"));
    }
    let mut worst = 0usize;
    for h in translations {
        window.group.check_arity(h)?;
        if !window.group.is_canonical(h) {
            return Err(Error::Parameter(format!("non-canonical translation {h}")));
        }
        worst = worst.max(symmetric_difference_size(window, h, side));
    }
    Ok(Rational::ratio(worst, window.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(c: &[i64]) -> GroupElement {
        GroupElement::new(c)
    }

    #[test]
    fn element_ops_examples() {
        let z2 = GroupModel::IntegerLattice { d: 2 };
        assert_eq!(z2.mul(&e(&[1, 2]), &e(&[3, 4])).unwrap(), e(&[4, 6]));

        let h = GroupModel::Heisenberg3;
        assert_eq!(h.mul(&e(&[1, 2, 3]), &e(&[4, 5, 6])).unwrap(), e(&[5, 7, 3 + 6 + 5]));
        assert_eq!(h.inv(&e(&[2, 3, 4])).unwrap(), e(&[-2, -3, 6 - 4]));

        let c6 = GroupModel::FiniteCyclic { n: 6 };
        assert_eq!(c6.mul(&e(&[4]), &e(&[5])).unwrap(), e(&[3]));
        assert_eq!(c6.apply(&ElementOp::Id).unwrap(), e(&[0]));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let z2 = GroupModel::IntegerLattice { d: 2 };
        assert!(matches!(z2.mul(&e(&[1]), &e(&[1, 2])), Err(Error::Arity { expected: 2, found: 1 })));
        assert!(z2.inv(&e(&[1, 2, 3])).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(GroupModel::IntegerLattice { d: 0 }.validate().is_err());
        assert!(GroupModel::FiniteCyclic { n: 0 }.validate().is_err());
        assert!(GroupModel::DirectProduct { factors: vec![] }.validate().is_err());
        let json = r#"{"kind":"Product","factors":[{"kind":"Zd","d":2},{"kind":"FiniteCyclic","n":6}]}"#;
        let m: GroupModel = serde_json::from_str(json).unwrap();
        m.validate().unwrap();
        assert_eq!(m.arity(), 3);
        assert_eq!(serde_json::to_string(&m).unwrap(), json);
    }

    #[test]
    fn product_law_is_componentwise() {
        let m = GroupModel::DirectProduct {
            factors: vec![GroupModel::Heisenberg3, GroupModel::FiniteCyclic { n: 5 }],
        };
        let g = e(&[1, 0, 0, 3]);
        let h = e(&[0, 1, 0, 4]);
        assert_eq!(m.mul(&g, &h).unwrap(), e(&[1, 1, 1, 2]));
        assert_eq!(m.mul(&g, &m.inv(&g).unwrap()).unwrap(), m.identity());
    }

    #[test]
    fn lattice_fast_paths_match_enumeration() {
        let z2 = GroupModel::IntegerLattice { d: 2 };
        let w = Window::box_window(&z2, vec![(-2, 3), (0, 4)], 1000).unwrap();
        let pts = Window::from_points(&z2, w.iter()).unwrap();
        for h in [e(&[0, 0]), e(&[1, -2]), e(&[7, 0]), e(&[-3, 3])] {
            assert_eq!(symmetric_difference_size(&w, &h, Side::Left), symmetric_difference_size(&pts, &h, Side::Left));
        }
        assert_eq!(w.inverse().unwrap().to_vec(), pts.inverse().unwrap().to_vec());
    }

    #[test]
    fn window_spec_round_trip() {
        let z2 = GroupModel::IntegerLattice { d: 2 };
        let specs = [
            WindowSpec::family(WindowFamily::Anchored, 3),
            WindowSpec::boxed(vec![(-1, 2), (0, 0)]),
            WindowSpec::elements(vec![e(&[0, 1]), e(&[5, 5])]),
        ];
        for s in specs {
            let w = s.build(&z2, DEFAULT_WINDOW_CAP).unwrap();
            assert_eq!(w.spec().build(&z2, DEFAULT_WINDOW_CAP).unwrap().to_vec(), w.to_vec());
        }
        let shifted: WindowSpec = serde_json::from_str(r#"{"interval":[0,4],"shift":[10]}"#).unwrap();
        let w = shifted.build(&GroupModel::integers(), 100).unwrap();
        assert_eq!(w.first(), e(&[10]));
        assert_eq!(w.len(), 4);
        let both: WindowSpec = serde_json::from_str(r#"{"interval":[0,4],"n":3}"#).unwrap();
        assert!(matches!(both.build(&GroupModel::integers(), 100), Err(Error::Schema(_))));
    }

    #[test]
    fn folner_window_examples() {
        let w = folner_window(&GroupModel::integers(), 5, DEFAULT_WINDOW_CAP).unwrap();
        assert_eq!(w.len(), 11);
        assert_eq!(w.first(), e(&[-5]));
        // (2n+1)^2 (2n^2+1) counted by enumeration
        let hw = folner_window(&GroupModel::Heisenberg3, 2, DEFAULT_WINDOW_CAP).unwrap();
        assert_eq!(hw.iter().count(), 225);
        assert_eq!(hw.len(), 225);
        let c = folner_window(&GroupModel::FiniteCyclic { n: 6 }, 17, DEFAULT_WINDOW_CAP).unwrap();
        assert_eq!(c.to_vec(), (0..6).map(|i| e(&[i])).collect::<Vec<_>>());
    }

    #[test]
    fn window_cap_enforced() {
        let err = folner_window(&GroupModel::IntegerLattice { d: 3 }, 100, 1000).unwrap_err();
        assert!(matches!(err, Error::WindowCap { .. }));
        assert!(folner_window(&GroupModel::integers(), 0, 10).is_err());
    }

    #[test]
    fn box_iteration_is_sorted_and_indexable() {
        let w = folner_window(&GroupModel::Heisenberg3, 1, 1000).unwrap();
        let v = w.to_vec();
        assert!(v.windows(2).all(|p| p[0] < p[1]));
        for (i, g) in v.iter().enumerate() {
            assert_eq!(w.index_of(g), Some(i));
            assert_eq!(w.get(i).as_ref(), Some(g));
        }
        let sub: Vec<_> = w.iter_range(5, 9).collect();
        assert_eq!(sub, v[5..9].to_vec());
    }

    #[test]
    fn invariance_defect_examples() {
        let k = Window::interval(0, 10).unwrap();
        assert_eq!(invariance_defect(&k, &[e(&[1])], Side::Left).unwrap(), Rational::new(1, 5));

        let c = GroupModel::FiniteCyclic { n: 7 };
        let full = folner_window(&c, 1, 100).unwrap();
        assert_eq!(invariance_defect(&full, &[e(&[3]), e(&[5])], Side::Left).unwrap(), Rational::zero());

        let z2 = GroupModel::IntegerLattice { d: 2 };
        let sq = Window::box_window(&z2, vec![(0, 9), (0, 9)], 1000).unwrap();
        assert_eq!(invariance_defect(&sq, &[e(&[1, 0])], Side::Left).unwrap(), Rational::new(1, 5));

        assert!(matches!(invariance_defect(&k, &[], Side::Left), Err(Error::Empty(_))));
    }

    #[test]
    fn heisenberg_left_and_right_defects_differ() {
        let w = folner_window(&GroupModel::Heisenberg3, 3, 100_000).unwrap();
        let x = e(&[1, 0, 0]);
        let l = invariance_defect(&w, std::slice::from_ref(&x), Side::Left).unwrap();
        let r = invariance_defect(&w, &[x], Side::Right).unwrap();
        assert!(l.is_positive() && r.is_positive());
        // right multiplication by x only moves the first coordinate
        assert_eq!(r, Rational::new(2, 7));
    }

    #[test]
    fn right_translate_matches_pointwise() {
        let h = GroupModel::Heisenberg3;
        let w = folner_window(&h, 1, 1000).unwrap();
        let g = e(&[2, -1, 5]);
        let t = w.right_translate(&g).unwrap();
        let mut expect: Vec<_> = w.iter().map(|k| h.mul_fast(&k, &g)).collect();
        expect.sort();
        assert_eq!(t.to_vec(), expect);

        let z = Window::interval(0, 4).unwrap().right_translate(&e(&[10])).unwrap();
        assert_eq!(z.to_vec(), (10..14).map(|i| e(&[i])).collect::<Vec<_>>());
    }
}
