use std::process::Command;

fn limp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_limp"))
        .args(args)
        .env_remove("LIMP_COLOR")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn run_resolution_demo() {
    let (code, out, _) = limp(&["run", "corpus/resolution.lim"]);
    assert_eq!(code, 0);
    assert_eq!(out, "true : Bool\n");
}

#[test]
fn check_reports_span_and_premise() {
    let (code, _, err) = limp(&["check", "corpus/not_subtype.lim"]);
    assert_eq!(code, 1);
    assert!(err.contains("2:1-2:5: NotASubtype"), "{err}");
    assert!(err.contains("subsumption"), "{err}");
}

#[test]
fn sub_and_disjoint_exit_codes() {
    let (code, out, _) = limp(&["sub", "Int & (Int -> Bool)", "Bool", "--trace"]);
    assert_eq!(code, 0);
    assert!(out.contains("F-MP"));
    let (code, out, _) = limp(&["sub", "Int", "Bool"]);
    assert_eq!(code, 1);
    assert!(out.contains("not a subtype"));
    assert_eq!(limp(&["disjoint", "Int", "Int -> Int"]).0, 0);
    assert_eq!(limp(&["disjoint", "Int & (Int -> Bool)", "Bool"]).0, 1);
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(limp(&["sub", "Int"]).0, 64);
    assert_eq!(limp(&["compare", "--max-size", "x"]).0, 64);
    assert_eq!(limp(&["run", "corpus/does_not_exist.lim"]).0, 2);
}

#[test]
fn corpus_passes() {
    let (code, out, _) = limp(&["corpus", "corpus"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.ends_with("0 failed\n"));
}

#[test]
fn json_output_is_stable() {
    let args = ["coherence", "--max-size", "3", "--json"];
    let (code, first, _) = limp(&args);
    assert_eq!(code, 0);
    let (_, second, _) = limp(&args);
    assert_eq!(first, second);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["command"], "coherence");
    assert_eq!(
        v["report"]["label"],
        "observational coherence up to canonical probes"
    );
}

#[test]
fn color_only_when_asked() {
    let out = Command::new(env!("CARGO_BIN_EXE_limp"))
        .args(["sub", "Int", "Top"])
        .env("LIMP_COLOR", "1")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("\x1b[32m"));
    assert!(!limp(&["sub", "Int", "Top"]).1.contains('\x1b'));
}
