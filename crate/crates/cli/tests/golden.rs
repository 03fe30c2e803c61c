use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sessions_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../sessions")
}

fn abmod(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_abmod"));
    cmd.args(args);
    match stdin {
        Some(text) => {
            use std::io::Write;
            use std::process::Stdio;
            let mut child = cmd
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::piped())
                .spawn()
                .unwrap();
            child
                .stdin
                .take()
                .unwrap()
                .write_all(text.as_bytes())
                .unwrap();
            child.wait_with_output().unwrap()
        }
        None => cmd.output().unwrap(),
    }
}

fn session_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(sessions_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ab"))
        .collect();
    v.sort();
    v
}

/// Set `ABMOD_BLESS=1` to rewrite the golden files.
#[test]
fn golden_outputs() {
    let bless = std::env::var_os("ABMOD_BLESS").is_some();
    let files = session_files();
    assert!(files.len() >= 5);
    for f in files {
        for (fmt, ext) in [("text", "txt"), ("json", "json")] {
            let out = abmod(&["--output", fmt, f.to_str().unwrap()], None);
            let golden = f.with_extension(ext);
            if bless {
                std::fs::write(&golden, &out.stdout).unwrap();
                continue;
            }
            let want =
                std::fs::read(&golden).unwrap_or_else(|_| panic!("missing {}", golden.display()));
            assert!(
                out.stdout == want,
                "{} differs from {}",
                f.display(),
                golden.display()
            );
            let again = abmod(&["--output", fmt, f.to_str().unwrap()], None);
            assert_eq!(out.stdout, again.stdout);
        }
    }
}

#[test]
fn exit_status_follows_errors() {
    let dir = sessions_dir();
    assert_eq!(
        abmod(&[dir.join("failures.ab").to_str().unwrap()], None)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        abmod(&[dir.join("theme.ab").to_str().unwrap()], None)
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn reads_stdin_and_honours_flags() {
    let out = abmod(
        &["--output", "json", "--precision", "6"],
        Some("let X = xi 1/2 1\nshow saturate X\n"),
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"][0]["result"]["module"]["prec"], 6);

    let out = abmod(&[], Some(""));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let out = abmod(
        &["--max-sat-iter", "2"],
        Some("let M = module [[1]]\nshow saturate M\n"),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 iterations"));
}

#[test]
fn check_flag_promotes_diagnostics() {
    let text = "let F = fresco [(3/2), (1/2)]\nshow jh F [-1/2*b, 1]\n";
    assert_eq!(abmod(&[], Some(text)).status.code(), Some(0));
    assert_eq!(abmod(&["--check"], Some(text)).status.code(), Some(1));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let out = abmod(&[], Some("let F = fresco [(3/2)]\nshow bernstein G\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = abmod(&["--precision", "0"], Some(""));
    assert_eq!(out.status.code(), Some(2));
}
