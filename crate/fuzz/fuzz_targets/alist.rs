#![no_main]

use emimo::ldpc::{parse_alist, write_alist};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_alist(text) {
        let again = parse_alist(&write_alist(&g)).expect("written alist re-parses");
        assert_eq!(again.check_lists(), g.check_lists());
    }
});
