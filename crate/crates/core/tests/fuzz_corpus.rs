use std::path::PathBuf;

use amenable::entry;
use amenable::run::{Envelope, RunConfig};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn seeds_replay_without_panicking() {
    let targets: [(&str, fn(&[u8])); 6] = [
        ("parse_group", entry::parse_group),
        ("parse_window", entry::parse_window),
        ("parse_set", entry::parse_set),
        ("parse_scalars", entry::parse_scalars),
        ("parse_config", entry::parse_config),
        ("verify_certificate", entry::verify_certificate),
    ];
    for (t, f) in targets {
        for (_, data) in seeds(t) {
            f(&data);
            for cut in [0, data.len() / 2, data.len().saturating_sub(1)] {
                f(&data[..cut]);
            }
        }
    }
}

#[test]
fn structured_seeds_are_valid() {
    for (name, data) in seeds("parse_config") {
        RunConfig::from_json(std::str::from_utf8(&data).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, data) in seeds("verify_certificate") {
        let env = Envelope::from_json(std::str::from_utf8(&data).unwrap()).unwrap();
        assert!(amenable::verify::verify(&env).unwrap().ok, "{name}");
    }
}

proptest::proptest! {
    #[test]
    fn arbitrary_text_never_panics(s in "[-a-z0-9:,(){}\\[\\]\"/ ]{0,40}") {
        let b = s.as_bytes();
        entry::parse_group(b);
        entry::parse_window(b);
        entry::parse_set(b);
        entry::parse_scalars(b);
        entry::parse_config(b);
    }

    #[test]
    fn mutated_seeds_never_panic(i in 0usize..64, at in 0usize..4096, byte in proptest::num::u8::ANY) {
        let all: Vec<_> = ["parse_window", "parse_set", "parse_config", "verify_certificate"]
            .into_iter()
            .flat_map(|t| seeds(t).into_iter().map(move |(_, d)| (t, d)))
            .collect();
        let (t, mut data) = all[i % all.len()].clone();
        let at = at % data.len();
        data[at] = byte;
        match t {
            "parse_window" => entry::parse_window(&data),
            "parse_set" => entry::parse_set(&data),
            "parse_config" => entry::parse_config(&data),
            _ => entry::verify_certificate(&data),
        }
    }
}
