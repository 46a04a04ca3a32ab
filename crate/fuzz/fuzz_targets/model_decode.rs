#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = aztext::classify::decode_model(data) {
        let bytes = aztext::classify::encode_model(&model);
        let again = aztext::classify::decode_model(&bytes).expect("re-encoded model decodes");
        assert_eq!(aztext::classify::encode_model(&again), bytes);
        let _ = model.predict_text("Bakıda yeni park açıldı.");
    }
});
