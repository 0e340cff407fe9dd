//! Compiles and runs a C client against the generated header and static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| cc)
}

/// `target/<profile>`, the parent of this test binary's `deps` directory.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qprop.h")).unwrap();
    for name in [
        "QP_STATUS_OK = 0",
        "QP_STATUS_INTERNAL = 7",
        "typedef struct QpScenario QpScenario;",
        "qp_scenario_parse(const char *toml, QpScenario **out)",
        "void qp_scenario_free(QpScenario *handle)",
        "qp_run(const QpScenario *handle,",
        "qp_bell_chsh(const QpScenario *handle, int64_t *num, int64_t *den)",
        "void qp_string_free(char *s)",
        "const char *qp_last_error(void)",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_client_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let lib = profile_dir().join("libqprop_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = env!("CARGO_MANIFEST_DIR");
    let exe = std::env::temp_dir().join(format!("qprop-smoke-{}", std::process::id()));
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(format!("{dir}/include"))
        .arg(format!("{dir}/tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
