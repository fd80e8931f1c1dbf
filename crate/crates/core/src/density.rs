//! Window-scale upper and lower Banach density estimates.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, Window, WindowFamily, DEFAULT_WINDOW_CAP};
use crate::oracle::SetOracle;
use crate::rational::Rational;

/// `|A ∩ W| / |W|`.
pub fn relative_density(set: &SetOracle, window: &Window) -> Result<Rational> {
    let hits = window.try_count_where(|g| set.contains(g))?;
    Ok(Rational::ratio(hits, window.len()))
}

/// `|A ∩ W·g| / |W|`, counted over `W` without materializing `W·g`.
pub fn shifted_density(set: &SetOracle, window: &Window, g: &GroupElement) -> Result<Rational> {
    let model = window.group();
    let hits = window.try_count_where(|x| set.contains(&model.mul_fast(x, g)))?;
    Ok(Rational::ratio(hits, window.len()))
}

/// Shift grid searched for each window `F_n`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftSpec {
    Identity,
    /// The elements of `F_n` itself.
    #[default]
    Window,
    /// The symmetric window of index `n²`.
    Squared,
    /// Inclusive coordinate box.
    Box { ranges: Vec<(i64, i64)> },
    Explicit { elements: Vec<GroupElement> },
}

impl ShiftSpec {
    /// Shifts for window index `n`, in lexicographic order.
    pub fn shifts(&self, model: &GroupModel, family: WindowFamily, n: u64, cap: usize) -> Result<Vec<GroupElement>> {
        let w = match self {
            ShiftSpec::Identity => return Ok(vec![model.identity()]),
            ShiftSpec::Window => family.window(model, n, cap)?,
            ShiftSpec::Squared => {
                let m = n.checked_mul(n).ok_or_else(|| Error::Parameter("n² overflows".into()))?;
                WindowFamily::Symmetric.window(model, m, cap)?
            }
            ShiftSpec::Box { ranges } => Window::box_window(model, ranges.clone(), cap)?,
            ShiftSpec::Explicit { elements } => {
                if elements.is_empty() {
                    return Err(Error::Empty("shift list"));
                }
                Window::from_points(model, elements.iter().cloned())?
            }
        };
        Ok(w.to_vec())
    }
}

/// `identity`, `window`, `squared`, `box:lo:hi` (same range on every
/// coordinate) or a JSON object.
impl FromStr for ShiftSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<ShiftSpec> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()));
        }
        let bad = || Error::Schema(format!("unknown shift spec {s:?}"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["identity"] => Ok(ShiftSpec::Identity),
            ["window"] => Ok(ShiftSpec::Window),
            ["squared"] => Ok(ShiftSpec::Squared),
            ["box", lo, hi] => {
                let lo = lo.parse().map_err(|_| bad())?;
                let hi = hi.parse().map_err(|_| bad())?;
                Ok(ShiftSpec::Box { ranges: vec![(lo, hi)] })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upper,
    Lower,
}

/// Grid of windows `F_n · g`, `n` in an inclusive range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    #[serde(default)]
    pub family: WindowFamily,
    pub n_min: u64,
    pub n_max: u64,
    #[serde(default)]
    pub shifts: ShiftSpec,
    #[serde(default = "default_cap", skip_serializing)]
    pub cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_WINDOW_CAP
}

impl DensityParams {
    pub fn new(family: WindowFamily, n_min: u64, n_max: u64, shifts: ShiftSpec) -> DensityParams {
        DensityParams { family, n_min, n_max, shifts, cap: DEFAULT_WINDOW_CAP }
    }

    /// Single symmetric window `F_n` at the identity.
    pub fn at(n: u64) -> DensityParams {
        DensityParams::new(WindowFamily::Symmetric, n, n, ShiftSpec::Identity)
    }

    fn check(&self) -> Result<()> {
        if self.n_min == 0 || self.n_max < self.n_min {
            return Err(Error::Parameter(format!("empty window range {}..={}", self.n_min, self.n_max)));
        }
        if self.n_max - self.n_min > 4096 {
            return Err(Error::Parameter("window range too long".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: Rational,
    /// Window index of the optimum.
    pub n: u64,
    pub shift: GroupElement,
    pub direction: Direction,
    pub params: DensityParams,
}

/// All grid values `(n, g, density)`, in lexicographic `(n, g)` order.
pub fn density_grid(set: &SetOracle, params: &DensityParams) -> Result<Vec<(u64, GroupElement, Rational)>> {
    params.check()?;
    let model = set.model();
    let mut out = Vec::new();
    for n in params.n_min..=params.n_max {
        let window = params.family.window(model, n, params.cap)?;
        let shifts = params.shifts.shifts(model, params.family, n, params.cap)?;
        if (window.len() as u128) * (shifts.len() as u128) > (params.cap as u128) * 16 {
            return Err(Error::WindowCap {
                requested: window.len() as u128 * shifts.len() as u128,
                cap: params.cap * 16,
            });
        }
        let vals: Vec<Result<Rational>> = shifts.par_iter().map(|g| shifted_density(set, &window, g)).collect();
        for (g, v) in shifts.into_iter().zip(vals) {
            out.push((n, g, v?));
        }
    }
    Ok(out)
}

fn estimate(set: &SetOracle, params: &DensityParams, direction: Direction) -> Result<DensityEstimate> {
    let grid = density_grid(set, params)?;
    // strict comparison keeps the lexicographically least optimum
    let mut best: Option<(u64, GroupElement, Rational)> = None;
    for (n, g, v) in grid {
        let better = match &best {
            None => true,
            Some((_, _, b)) => match direction {
                Direction::Upper => v > *b,
                Direction::Lower => v < *b,
            },
        };
        if better {
            best = Some((n, g, v));
        }
    }
    let (n, shift, value) = best.ok_or(Error::Empty("density grid"))?;
    Ok(DensityEstimate { value, n, shift, direction, params: params.clone() })
}

/// Maximum of `|A ∩ F_n·g| / |F_n|` over the grid.
pub fn upper_density_estimate(set: &SetOracle, params: &DensityParams) -> Result<DensityEstimate> {
    estimate(set, params, Direction::Upper)
}

/// Minimum of `|A ∩ F_n·g| / |F_n|` over the grid.
pub fn lower_density_estimate(set: &SetOracle, params: &DensityParams) -> Result<DensityEstimate> {
    estimate(set, params, Direction::Lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SetExpr;

    fn z_set(s: &str) -> SetOracle {
        s.parse::<SetExpr>().unwrap().compile(&GroupModel::integers()).unwrap()
    }

    #[test]
    fn relative_density_examples() {
        let w = Window::interval(0, 10).unwrap();
        assert_eq!(relative_density(&z_set("evens"), &w).unwrap(), Rational::new(1, 2));
        assert_eq!(relative_density(&z_set("empty"), &w).unwrap(), Rational::zero());
        assert_eq!(relative_density(&z_set("mod:3:0"), &w).unwrap(), Rational::new(2, 5));
    }

    #[test]
    fn periodic_and_trivial_estimates() {
        let p = DensityParams::new(WindowFamily::Anchored, 1, 12, ShiftSpec::Window);
        let evens = z_set("evens");
        let up = upper_density_estimate(&evens, &p).unwrap();
        assert_eq!(up.value, Rational::one());
        assert_eq!((up.n, up.shift.coords()), (1, &[0][..]));
        let even_n = DensityParams::new(WindowFamily::Anchored, 2, 2, ShiftSpec::Window);
        assert_eq!(upper_density_estimate(&evens, &even_n).unwrap().value, Rational::new(1, 2));
        assert_eq!(lower_density_estimate(&evens, &even_n).unwrap().value, Rational::new(1, 2));
        let all = z_set("all");
        assert_eq!(lower_density_estimate(&all, &p).unwrap().value, Rational::one());
    }

    #[test]
    fn power_runs_need_shifts() {
        let runs = z_set("runs");
        let n = 6;
        let fixed = DensityParams::new(WindowFamily::Anchored, n, n, ShiftSpec::Identity);
        let moved = DensityParams::new(WindowFamily::Anchored, n, n, ShiftSpec::Box { ranges: vec![(0, 80)] });
        let at_zero = upper_density_estimate(&runs, &fixed).unwrap().value;
        let best = upper_density_estimate(&runs, &moved).unwrap();
        // the run [64, 70) fills a window of length 6
        assert_eq!(best.value, Rational::one());
        assert_eq!(best.shift, GroupElement::scalar(64));
        assert!(at_zero < best.value);
        assert_eq!(lower_density_estimate(&runs, &moved).unwrap().value, Rational::zero());
    }

    #[test]
    fn shift_spec_parsing() {
        assert_eq!("box:-3:3".parse::<ShiftSpec>().unwrap(), ShiftSpec::Box { ranges: vec![(-3, 3)] });
        assert_eq!("window".parse::<ShiftSpec>().unwrap(), ShiftSpec::Window);
        assert!("box:1".parse::<ShiftSpec>().is_err());
    }

    #[test]
    fn empty_range_is_rejected() {
        let p = DensityParams::new(WindowFamily::Anchored, 3, 2, ShiftSpec::Identity);
        assert!(matches!(upper_density_estimate(&z_set("evens"), &p), Err(Error::Parameter(_))));
    }
}
