//! Command-line shorthands for models, windows and probe families. Each
//! also accepts its JSON form.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, WindowFamily, WindowSpec};
use crate::setops::ProbeFamily;

fn json<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
}

fn int<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Schema(format!("bad {what} {s:?}")))
}

/// `z`, `zN` (ℤ^N), `heisenberg`, `cyclic:n`, or JSON.
impl FromStr for GroupModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupModel> {
        let s = s.trim();
        let model = if s.starts_with('{') {
            json(s)?
        } else if s == "z" {
            GroupModel::integers()
        } else if s == "heisenberg" || s == "heis" {
            GroupModel::Heisenberg3
        } else if let Some(n) = s.strip_prefix("cyclic:") {
            GroupModel::FiniteCyclic { n: int(n, "cyclic order")? }
        } else if let Some(d) = s.strip_prefix('z') {
            GroupModel::IntegerLattice { d: int(d, "lattice rank")? }
        } else {
            return Err(Error::Schema(format!("unknown group {s:?}")));
        };
        model.validate()?;
        Ok(model)
    }
}

/// `sym:n`, `anchored:n`, `interval:a:b` (half-open, ℤ),
/// `box:lo:hi[,lo:hi...]` (inclusive, one range per coordinate),
/// `elements:x,y,...` (ℤ), or JSON.
impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<WindowSpec> {
        let s = s.trim();
        if s.starts_with('{') {
            return json(s);
        }
        let (head, rest) = s.split_once(':').ok_or_else(|| Error::Schema(format!("unknown window {s:?}")))?;
        match head {
            "sym" => Ok(WindowSpec::family(WindowFamily::Symmetric, int(rest, "window index")?)),
            "anchored" => Ok(WindowSpec::family(WindowFamily::Anchored, int(rest, "window index")?)),
            "interval" => {
                let (a, b) = rest.split_once(':').ok_or_else(|| Error::Schema(format!("bad interval {rest:?}")))?;
                Ok(WindowSpec::interval(int(a, "interval end")?, int(b, "interval end")?))
            }
            "box" => {
                let ranges = rest
                    .split(',')
                    .map(|r| {
                        let (lo, hi) = r.split_once(':').ok_or_else(|| Error::Schema(format!("bad range {r:?}")))?;
                        Ok((int(lo, "box bound")?, int(hi, "box bound")?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(WindowSpec::boxed(ranges))
            }
            "elements" => {
                let els = rest
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| Ok(GroupElement::scalar(int(t, "element")?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(WindowSpec::elements(els))
            }
            _ => Err(Error::Schema(format!("unknown window {s:?}"))),
        }
    }
}

/// `3`, `1,2,3`, `(1,2,3)` or a JSON array.
impl FromStr for GroupElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupElement> {
        let s = s.trim();
        if s.starts_with('[') {
            return json(s);
        }
        let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
        let coords = inner.split(',').map(|t| int(t, "coordinate")).collect::<Result<Vec<i64>>>()?;
        Ok(GroupElement::new(&coords))
    }
}

/// `sym`/`symmetric` or `anchored`.
impl FromStr for WindowFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<WindowFamily> {
        match s.trim() {
            "sym" | "symmetric" => Ok(WindowFamily::Symmetric),
            "anchored" => Ok(WindowFamily::Anchored),
            other => Err(Error::Schema(format!("unknown window family {other:?}"))),
        }
    }
}

/// `intervals:s` or JSON.
impl FromStr for ProbeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<ProbeFamily> {
        let s = s.trim();
        if s.starts_with('{') {
            return json(s);
        }
        match s.strip_prefix("intervals:") {
            Some(n) => Ok(ProbeFamily::IntervalsUpTo(int(n, "probe size")?)),
            None => Err(Error::Schema(format!("unknown probe family {s:?}"))),
        }
    }
}
