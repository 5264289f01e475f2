//! Replays the checked-in fuzz corpus through the same invariants the fuzz
//! targets assert, so the seeds stay meaningful on a stable toolchain.

use std::path::{Path, PathBuf};

use emimo::harness::{ExperimentConfig, Manifest, Scheme};
use emimo::ldpc::{decode_sum_product, parse_alist, write_alist, TannerGraph};

fn corpus(name: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(name);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus {name}");
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, bytes) in corpus("config") {
        let text = String::from_utf8(bytes).unwrap();
        if let Ok(cfg) = ExperimentConfig::from_json(&text) {
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg, "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn manifest_seeds() {
    for (path, bytes) in corpus("manifest") {
        let m = Manifest::from_json(std::str::from_utf8(&bytes).unwrap());
        assert!(m.is_ok(), "{}: {m:?}", path.display());
    }
}

#[test]
fn scheme_seeds() {
    for (_, bytes) in corpus("scheme") {
        let text = String::from_utf8(bytes).unwrap();
        if let Ok(s) = text.parse::<Scheme>() {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
    }
}

#[test]
fn alist_seeds() {
    let mut accepted = 0;
    for (_, bytes) in corpus("alist") {
        if let Ok(g) = parse_alist(std::str::from_utf8(&bytes).unwrap()) {
            assert_eq!(parse_alist(&write_alist(&g)).unwrap(), g);
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn decoder_seeds() {
    for (path, bytes) in corpus("decoder") {
        let mut it = bytes.iter().copied();
        let n = (it.next().unwrap() % 32) as usize + 1;
        let m = it.next().unwrap();
        let mut checks = Vec::new();
        for _ in 0..m % 16 {
            let d = it.next().unwrap();
            checks.push(it.by_ref().take((d % 8) as usize).map(|v| v as usize % n).collect::<Vec<_>>());
        }
        let graph = TannerGraph::from_check_lists(n, &checks).unwrap();
        let rest: Vec<u8> = it.collect();
        let llrs: Vec<f64> = rest
            .chunks(8)
            .map(|c| {
                let mut b = [0u8; 8];
                b[..c.len()].copy_from_slice(c);
                f64::from_le_bytes(b)
            })
            .chain(std::iter::repeat(0.0))
            .take(n)
            .collect();
        match decode_sum_product(&graph, &llrs, 20) {
            Ok(out) => {
                assert_eq!(out.bits.len(), n);
                if out.converged {
                    assert!(graph.is_codeword(&out.bits), "{}", path.display());
                }
            }
            Err(_) => assert!(llrs.iter().any(|l| l.is_nan()), "{}", path.display()),
        }
    }
}
