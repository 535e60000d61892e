#![no_main]

use a11y_mend::dom::normalize;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let n = normalize(text);
    assert_eq!(normalize(&n), n);
});
