//! Fuzz the lattice JSON decoder (the run-length-encoded interchange
//! format). Decoding must never panic or over-allocate, and anything that
//! decodes must re-encode losslessly.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::CoinLattice;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lattice) = CoinLattice::from_json_str(text) {
        let re_encoded = lattice.to_json_string();
        let round_tripped =
            CoinLattice::from_json_str(&re_encoded).expect("an encoded lattice always decodes");
        assert_eq!(lattice, round_tripped);
    }
});
