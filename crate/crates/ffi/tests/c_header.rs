//! Compiles and runs a real C program against the generated header and the
//! shared library, proving the ABI is usable from C (and that the header
//! also parses as C++).

use std::path::PathBuf;
use std::process::Command;

/// Directory holding the built library artifacts for the active profile
/// (the grandparent of the test executable's own path).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().expect("test executable path");
    exe.parent()
        .and_then(|deps| deps.parent())
        .expect("artifact directory")
        .to_path_buf()
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn c_program_builds_links_and_runs() {
    let include = manifest_dir().join("include");
    let source = manifest_dir().join("tests").join("smoke.c");
    let libdir = artifact_dir();
    assert!(
        libdir.join("libspatweib_ffi.so").exists(),
        "shared library missing from {}",
        libdir.display()
    );
    let bin = libdir.join("spatweib-ffi-smoke");

    let compile = Command::new("cc")
        .arg(&source)
        .arg("-o")
        .arg(&bin)
        .arg(format!("-I{}", include.display()))
        .arg(format!("-L{}", libdir.display()))
        .arg(format!("-Wl,-rpath,{}", libdir.display()))
        .arg("-lspatweib_ffi")
        .arg("-lm")
        .args(["-Wall", "-Wextra", "-Werror"])
        .output()
        .expect("invoke cc");
    assert!(
        compile.status.success(),
        "C compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().expect("run smoke binary");
    assert!(
        run.status.success(),
        "smoke binary exited with {:?}:\n{}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c-abi-ok"));
}

#[test]
fn header_parses_as_cpp() {
    let include = manifest_dir().join("include");
    let source = manifest_dir().join("tests").join("smoke.c");
    let check = Command::new("c++")
        .args(["-x", "c++", "-fsyntax-only"])
        .arg(format!("-I{}", include.display()))
        .arg(&source)
        .output()
        .expect("invoke c++");
    assert!(
        check.status.success(),
        "C++ syntax check failed:\n{}",
        String::from_utf8_lossy(&check.stderr)
    );
}
