#![no_main]

use emimo::harness::Scheme;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = text.parse::<Scheme>() {
        let again: Scheme = s.to_string().parse().expect("displayed scheme re-parses");
        assert_eq!(again, s);
    }
});
