#![no_main]

use abmod::scalar::{fmt_rational, parse_rational};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(r) = parse_rational(s) {
        assert_eq!(parse_rational(&fmt_rational(&r)).unwrap(), r);
    }
});
