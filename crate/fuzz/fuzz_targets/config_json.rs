//! Fuzz the experiment-config JSON decoder. Parsing and validation must
//! never panic; a validated config must have a coherent extent and must
//! survive an encode/decode round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = serde_json::from_str::<ExperimentConfig>(text) else {
        return;
    };
    if config.validate().is_err() {
        return;
    }
    let extent = config.extent().expect("validated configs have an extent");
    assert!(extent.contains(config.x0));
    let re_encoded = serde_json::to_string(&config).expect("configs encode");
    let round_tripped: ExperimentConfig =
        serde_json::from_str(&re_encoded).expect("an encoded config always decodes");
    assert_eq!(config, round_tripped);
});
