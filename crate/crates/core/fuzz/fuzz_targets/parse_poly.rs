#![no_main]

use abmod::series::{render_poly, TruncSeries};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(c) = TruncSeries::parse_poly(s, 'b') {
        let back = TruncSeries::parse_poly(&render_poly(&c, "b"), 'b').unwrap();
        let n = c.len().max(back.len());
        assert_eq!(
            TruncSeries::from_poly(&c, n),
            TruncSeries::from_poly(&back, n)
        );
    }
});
