#![no_main]

use emimo::ldpc::{decode_sum_product, TannerGraph};
use libfuzzer_sys::fuzz_target;

// Layout: n_vars, n_checks, then per check a degree byte and that many
// variable bytes, then 8-byte little-endian LLRs.
fuzz_target!(|data: &[u8]| {
    let mut it = data.iter().copied();
    let (Some(n), Some(m)) = (it.next(), it.next()) else { return };
    let n = (n % 32) as usize + 1;
    let mut checks = Vec::new();
    for _ in 0..m % 16 {
        let Some(d) = it.next() else { return };
        let list: Vec<usize> = it.by_ref().take((d % 8) as usize).map(|v| v as usize % n).collect();
        checks.push(list);
    }
    let Ok(graph) = TannerGraph::from_check_lists(n, &checks) else { return };
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
    if let Ok(out) = decode_sum_product(&graph, &llrs, 20) {
        assert_eq!(out.bits.len(), n);
        if out.converged {
            assert!(graph.is_codeword(&out.bits));
        }
    }
});
