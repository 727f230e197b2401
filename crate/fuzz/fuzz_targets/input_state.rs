//! Fuzz the `--input` flag parser. Parsing must never panic, and a parsed
//! state must render and re-parse to itself.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::{Dim, InitialState};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for dim in [Dim::One, Dim::Two] {
        if let Ok(init) = InitialState::parse(dim, text) {
            let rendered = init.to_flag_string(dim);
            let round_tripped =
                InitialState::parse(dim, &rendered).expect("rendered states always parse");
            assert_eq!(init, round_tripped);
        }
    }
});
