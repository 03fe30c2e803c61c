#![no_main]

use abmod::gauss_manin::DiffSystem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(sys) = DiffSystem::from_json(s) {
        let again = DiffSystem::from_json(&sys.to_json().to_string()).unwrap();
        assert_eq!(again, sys);
    }
});
