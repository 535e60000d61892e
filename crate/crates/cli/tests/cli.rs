use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_a11y-mend"))
        .args(args)
        .env_remove("A11Y_REPAIR_API_KEY")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn detect_exit_codes_follow_lint_convention() {
    let broken = run(&["detect", p(&data("corpus/vitamins_broken.html"))]);
    assert_eq!(code(&broken), 1);
    assert!(!json(&broken)["entries"].as_array().unwrap().is_empty());

    let fixed = run(&["detect", p(&data("corpus/vitamins_fixed.html"))]);
    assert_eq!(code(&fixed), 0, "{}", String::from_utf8_lossy(&fixed.stderr));
    assert_eq!(json(&fixed)["entries"].as_array().unwrap().len(), 0);

    assert_eq!(code(&run(&["detect", "/no/such/file.html"])), 2);

    let mut child = Command::new(env!("CARGO_BIN_EXE_a11y-mend"))
        .args(["detect", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"<button></button>").unwrap();
    let piped = child.wait_with_output().unwrap();
    assert_eq!(code(&piped), 1);
    assert_eq!(json(&piped)["entries"][0]["violationName"], "button-name");
}

#[test]
fn semantic_detection_needs_a_screenshot_decision() {
    let html = data("corpus/vitamins_broken.html");
    assert_eq!(code(&run(&["detect", p(&html), "--semantic"])), 2);
    let skipped = run(&["detect", p(&html), "--semantic", "--no-screenshot"]);
    assert_eq!(code(&skipped), 1);
    assert!(String::from_utf8_lossy(&skipped.stderr).contains("skipped"));

    let out = run(&[
        "detect",
        p(&html),
        "--screenshot",
        p(&data("dataset/vitamins.png")),
        "--mock",
        p(&data("mock/semantic.json")),
    ]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    let entries = r["entries"].as_array().unwrap();
    assert!(entries.len() >= 9);
    assert_eq!(entries.iter().filter(|e| e["category"] == "semantic").count(), 1);
    assert_eq!(r["discarded"].as_array().unwrap().len(), 2);
}

#[test]
fn correct_with_oracle_and_refusal_mocks() {
    let ds = data("dataset/vitamins.json");
    let oracle = run(&["correct", p(&ds), "--mock", p(&data("mock/oracle.json"))]);
    assert_eq!(code(&oracle), 0, "{}", String::from_utf8_lossy(&oracle.stderr));
    for e in json(&oracle)["entries"].as_array().unwrap() {
        assert_eq!(e["correction"]["source"], "LLM1", "{e}");
        assert_eq!(e["correction"]["finalScore"], 0);
    }
    let refusal = run(&["correct", p(&ds), "--mock", p(&data("mock/refusal.json"))]);
    for e in json(&refusal)["entries"].as_array().unwrap() {
        assert_eq!(e["correction"]["flags"]["notFixed"], true);
        assert_eq!(e["correction"]["finalScore"], e["violationScore"]);
    }
}

#[test]
fn detect_correct_apply_evaluate_compose_on_files() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("det.json");
    let cor = dir.path().join("cor.json");
    let page = dir.path().join("fixed.html");
    let metrics = dir.path().join("metrics.json");
    assert_eq!(code(&run(&["detect", p(&data("corpus/vitamins_broken.html")), "-o", p(&det)])), 1);
    assert_eq!(code(&run(&["correct", p(&det), "--mock", p(&data("mock/oracle.json")), "-o", p(&cor)])), 0);
    let applied = run(&["apply", p(&data("corpus/vitamins_broken.html")), p(&cor), "-o", p(&page)]);
    assert_eq!(code(&applied), 0, "{}", String::from_utf8_lossy(&applied.stderr));
    assert_eq!(code(&run(&["evaluate", p(&det), p(&cor), "-o", p(&metrics)])), 0);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    let i = m["improvement_i"].as_f64().or(m["improvementI"].as_f64()).unwrap();
    assert!(i > 0.0 && i < 1.0, "only the scripted entries are fixed: {i}");
}

#[test]
fn apply_reference_fixes_yields_a_clean_page() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("fixed.html");
    let out = run(&[
        "apply",
        p(&data("corpus/vitamins_broken.html")),
        p(&data("fixtures/vitamins_corrections.json")),
        "-o",
        p(&page),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&run(&["detect", p(&page)])), 0);
}

#[test]
fn apply_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let html = dir.path().join("in.html");
    std::fs::write(&html, "<p>one</p><div><span>two</span></div>").unwrap();
    let out = run(&["apply", p(&html), p(&empty)]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "<p>one</p><div><span>two</span></div>");

    let stray = dir.path().join("stray.json");
    std::fs::write(
        &stray,
        r#"[{"violationId":"x:9","affectedHtml":["<b>gone</b>"],"chosenHtml":"<b>x</b>","source":"LLM1",
            "scores":{"original":4,"llm1":0,"llm2":null},"flags":{"notFixed":false,"invalidLlm1":false,"invalidLlm2":false},
            "finalScore":0}]"#,
    )
    .unwrap();
    let out = run(&["apply", p(&html), p(&stray)]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}

#[test]
fn evaluate_identical_reports_is_zero_improvement() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("det.json");
    run(&["detect", p(&data("corpus/vitamins_broken.html")), "-o", p(&det)]);
    let out = run(&["evaluate", p(&det), p(&det)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["improvementI"], 0.0);
}

#[test]
fn benchmark_strategies_and_call_counts() {
    let ds = data("dataset/vitamins.json");
    let zs = run(&["benchmark", p(&ds), "--strategy", "zero-shot", "--mock", p(&data("mock/refusal.json"))]);
    assert_eq!(code(&zs), 0, "{}", String::from_utf8_lossy(&zs.stderr));
    assert_eq!(json(&zs)["improvementI"], 0.0);

    let nr = json(&run(&["benchmark", p(&ds), "--strategy", "accessguru-no-reprompt", "--mock", p(&data("mock/partial.json"))]));
    assert!(nr["llmCalls"].as_u64().unwrap() <= nr["n"].as_u64().unwrap());

    assert_eq!(code(&run(&["benchmark", p(&ds), "--strategy", "self-refine", "--mock", p(&data("mock/refusal.json"))])), 2);
}

#[test]
fn benchmark_output_is_reproducible() {
    let args = ["benchmark", p(&data("dataset/vitamins.json")).to_string().leak(), "--mock"];
    let mock = p(&data("mock/partial.json")).to_string();
    let a = run(&[args[0], args[1], args[2], &mock]);
    let b = run(&[args[0], args[1], args[2], &mock]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["reports"].as_array().unwrap().len(), 5);
}

#[test]
fn taxonomy_listing_and_lookup() {
    let show = run(&["taxonomy", "show", "button-name"]);
    let text = String::from_utf8_lossy(&show.stdout);
    assert!(text.contains("Critical") && text.contains("WCAG 4.1.2"), "{text}");
    let list = String::from_utf8_lossy(&run(&["taxonomy", "list", "--category", "layout"]).stdout).to_string();
    for name in ["meta-viewport", "color-contrast", "avoid-inline-spacing"] {
        assert!(list.contains(name), "{list}");
    }
    assert_eq!(code(&run(&["taxonomy", "show", "no-such-type"])), 2);
}

#[test]
fn keys_are_not_accepted_on_the_command_line() {
    assert_eq!(code(&run(&["--api-key", "sk-x", "taxonomy", "list"])), 2);
    let out = run(&["correct", p(&data("dataset/vitamins.json"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("A11Y_REPAIR_API_KEY"));
}

#[test]
fn fetch_saves_the_served_bytes() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let body = "<html><body>hi</body></html>";
    std::thread::spawn(move || {
        if let Some(Ok(stream)) = listener.incoming().next() {
            let mut r = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while r.read_line(&mut line).unwrap_or(0) > 0 && line != "\r\n" {
                line.clear();
            }
            let mut s = stream;
            let _ = write!(s, "HTTP/1.1 200 OK\r\nContent-Type: text/html\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}", body.len());
        }
    });
    let out = run(&["fetch", &format!("http://{addr}/")]);
    assert_eq!(code(&out), 0);
    assert_eq!(out.stdout, body.as_bytes());
}
