#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = aztext_cli::RunConfig::from_json(text) {
        let again = aztext_cli::RunConfig::from_json(&config.to_json()).expect("own output parses");
        // NaN never equals itself, so compare the serialized form.
        assert_eq!(again.to_json(), config.to_json());
    }
});
