#![no_main]

use aztext::text::{count_sentences, normalize, PipelineConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let once = normalize(text);
    assert_eq!(normalize(&once), once);
    let _ = count_sentences(text);
    let mut pipeline = PipelineConfig::default();
    pipeline.stemming = true;
    for token in pipeline.analyze(text) {
        assert!(!token.as_str().is_empty());
    }
});
