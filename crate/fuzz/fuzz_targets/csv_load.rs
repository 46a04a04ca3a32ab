#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = aztext::corpus::read_csv(data) {
        // Whatever loads must write back out and reload to the same documents.
        let mut out = Vec::new();
        aztext::corpus::write_csv(&corpus, &mut out).expect("write to Vec");
        let again = aztext::corpus::read_csv(out.as_slice()).expect("own output reloads");
        assert_eq!(again, corpus);
    }
});
