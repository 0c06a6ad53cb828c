//! Compiles a C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test-binary> -> target/<profile>/
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libids_bandit_ffi.a");
    lib.exists().then_some(lib)
}

fn have(cmd: &str) -> bool {
    Command::new(cmd).arg("--version").output().is_ok()
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ids_bandit.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "typedef struct IdsSolution IdsSolution;",
        "IDS_STATUS_OK = 0",
        "IDS_STATUS_ITERATION_LIMIT = 3",
        "ids_solve_optimal(",
        "ids_evaluate_ids(",
        "ids_solution_free(",
        "ids_solution_copy(",
        "ids_last_error_message(",
        "ids_fair_coin_boundary(",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found next to the test binary; skipping");
        return;
    };
    if !have("cc") {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile_path("ids_c_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/c_smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "C program exited with {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 101 "));
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
