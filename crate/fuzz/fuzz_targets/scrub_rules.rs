#![no_main]

use libfuzzer_sys::fuzz_target;

// Input: rule file, then a NUL byte, then the text to scrub.
fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    let (rules, text) = input.split_once('\0').unwrap_or((input, "Ətraflı: saytında. <script>x</script>"));
    if let Ok(rules) = aztext::corpus::parse_rules(rules) {
        let _ = aztext::corpus::scrub_text(text, &rules);
    }
});
