#![no_main]

use abmod::session::parse_session;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(session) = parse_session(s) {
        let again = parse_session(&session.to_string()).expect("rendered session parses");
        assert_eq!(again, session);
    }
});
