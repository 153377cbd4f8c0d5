use std::path::Path;
use std::process::Command;

fn tracktree(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tracktree")).args(args).output().expect("run tracktree");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into(),
        String::from_utf8_lossy(&out.stderr).into(),
    )
}

fn instance(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("instances").join(name).to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(tracktree(&["check", "E2"]).0, 0);
    assert_eq!(tracktree(&["check", &instance("crossing.toml")]).0, 2);
    assert_eq!(tracktree(&["check", "no-such-instance"]).0, 4);
    // Margin 1 no longer covers the translate `tt`.
    assert_eq!(tracktree(&["--margin", "1", "check", "E1"]).0, 3);
}

#[test]
fn tree_dot_and_report_files() {
    let (code, dot, _) = tracktree(&["tree", "E1"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("graph \"E1\" {"));
    assert_eq!(dot.matches(" -- ").count(), 4);

    let dir = std::env::temp_dir().join(format!("tracktree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (code, _, _) = tracktree(&["check", "E1", "E4", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    for name in ["E1", "E4"] {
        let text = std::fs::read_to_string(dir.join(format!("{name}.report.json"))).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["status"], "pass");
        assert_eq!(doc["timing_ms"], serde_json::json!({}));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_and_random() {
    let (code, out, _) = tracktree(&["oracle", "E3"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["orientations"]["vertices"].as_array().unwrap().len(), 6);
    assert_eq!(doc["labellings"]["count"], 1);
    let (code, out, _) = tracktree(&["random", "--seed", "3", "--classes", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"instance\": \"random-3-5\""));
    assert_eq!(tracktree(&["random", "--classes", "40"]).0, 4);
}
