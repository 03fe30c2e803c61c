#![no_main]

use abmod::module::module_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(m) = module_from_json(s) {
        let _ = m.is_simple_pole();
        let _ = m.to_json();
    }
});
