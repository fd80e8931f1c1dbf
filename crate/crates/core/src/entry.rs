//! Byte-level entry points shared by the fuzz targets and the corpus
//! replay test. None of these may panic.

use crate::density::ShiftSpec;
use crate::group::{GroupModel, WindowSpec};
use crate::oracle::SetExpr;
use crate::rational::Rational;
use crate::run::{normalize, resolve_sets, Envelope, RunConfig};
use crate::setops::ProbeFamily;
use crate::GroupElement;

/// Windows built while fuzzing stay below this many elements.
pub const FUZZ_CAP: usize = 1 << 12;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

pub fn parse_group(data: &[u8]) {
    if let Some(Ok(g)) = text(data).map(str::parse::<GroupModel>) {
        let _ = g.identity();
        let _ = g.generators();
    }
}

pub fn parse_window(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(w) = s.parse::<WindowSpec>() {
        for g in [GroupModel::integers(), GroupModel::IntegerLattice { d: 2 }, GroupModel::Heisenberg3] {
            if let Ok(win) = w.build(&g, FUZZ_CAP) {
                assert!(!win.is_empty());
                let first = win.first();
                assert!(win.contains(&first));
            }
        }
    }
}

pub fn parse_set(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(e) = s.parse::<SetExpr>() {
        let z = GroupModel::integers();
        if let Ok(o) = e.compile(&z) {
            for x in -8..8 {
                let _ = o.contains(&GroupElement::scalar(x));
            }
        }
    }
}

pub fn parse_scalars(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(r) = s.parse::<Rational>() {
        assert_eq!(r.to_string().parse::<Rational>().ok(), Some(r));
    }
    let _ = s.parse::<GroupElement>();
    if let Ok(p) = s.parse::<ProbeFamily>() {
        let _ = p.probes(&GroupModel::integers(), FUZZ_CAP);
    }
    if let Ok(sh) = s.parse::<ShiftSpec>() {
        let _ = sh.shifts(&GroupModel::integers(), Default::default(), 4, FUZZ_CAP);
    }
}

pub fn parse_config(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(s) {
        if cfg.group.validate().is_ok() {
            let _ = resolve_sets(&cfg);
            let _ = normalize(&cfg.operation, &cfg.group, FUZZ_CAP);
        }
        let back = serde_json::to_string(&cfg).expect("config serializes");
        assert!(RunConfig::from_json(&back).is_ok());
    }
}

pub fn verify_certificate(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(mut env) = Envelope::from_json(s) {
        env.budgets.window_cap = Some(env.budgets.window_cap().min(FUZZ_CAP));
        let _ = crate::verify::verify(&env);
    }
}
