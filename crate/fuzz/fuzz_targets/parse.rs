#![no_main]

use a11y_mend::dom::parse_document;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let once = parse_document(text).to_html();
    assert_eq!(parse_document(&once).to_html(), once);
});
