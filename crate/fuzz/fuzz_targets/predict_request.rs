#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Err(e) = aztext_serve::parse_predict_request(data) {
        assert!(e.status().is_client_error());
    }
});
