#![no_main]

use a11y_mend::dom::parse_document;
use a11y_mend::semantic::{ground_findings, parse_semantic_findings};
use a11y_mend::taxonomy::Registry;
use libfuzzer_sys::fuzz_target;

const PAGE: &str = "<html><body><img src=\"a.jpg\" alt=\"image\"><a href=\"x\">click here</a></body></html>";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let findings = parse_semantic_findings(text);
    let n = findings.len();
    let (kept, discarded) = ground_findings(findings, &parse_document(PAGE), &Registry::bundled());
    assert_eq!(kept.len() + discarded.len(), n);
});
