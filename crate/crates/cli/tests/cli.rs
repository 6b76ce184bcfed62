use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eojeol"))
}

fn resources() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../resources")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Compile the bundled mini resources into `dir` and return the lexicon path.
fn compile_mini(dir: &Path) -> PathBuf {
    let lexicon = dir.join("mini.lex");
    let out = bin()
        .args(["compile", "--manifest"])
        .arg(resources().join("mini/bundle.toml"))
        .arg("--output")
        .arg(&lexicon)
        .output()
        .unwrap();
    assert!(out.status.success(), "compile failed: {}", stderr(&out));
    lexicon
}

#[test]
fn compile_reports_resource_counts() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = dir.path().join("mini.lex");
    let out = bin()
        .args(["compile", "--manifest"])
        .arg(resources().join("mini/bundle.toml"))
        .arg("--output")
        .arg(&lexicon)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = stdout(&out);
    assert!(report.contains("stem_entries=46\n"), "{report}");
    assert!(report.contains("variant_entries=78\n"), "{report}");
    assert!(report.contains("endings.V01=7\n"), "{report}");
    assert!(report.contains("output="), "{report}");
    assert!(lexicon.exists());
}

#[test]
fn annotate_writes_expected_dag() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let dag = dir.path().join("small.dag");
    let out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(resources().join("fixtures/small.txt"))
        .arg("--output")
        .arg(&dag)
        .output()
        .unwrap();
    assert!(out.status.success(), "annotate failed: {}", stderr(&out));
    let text = std::fs::read_to_string(&dag).unwrap();
    assert!(text.starts_with("#sentence 1\n"), "{text}");
    assert!(text.contains("\tㅓㅆ\t었\tep+te=past\n"), "{text}");
    assert!(text.contains("\t바나나\t바나나\tUNK\n"), "{text}");
}

#[test]
fn annotate_to_stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(resources().join("fixtures/small.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());

    let dag = dir.path().join("small.dag");
    let file_out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(resources().join("fixtures/small.txt"))
        .arg("--output")
        .arg(&dag)
        .output()
        .unwrap();
    assert!(file_out.status.success());
    assert_eq!(out.stdout, std::fs::read(&dag).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = compile_mini(dir.path());
    let first_bytes = std::fs::read(&first).unwrap();
    std::fs::remove_file(&first).unwrap();
    let second = compile_mini(dir.path());
    assert_eq!(first_bytes, std::fs::read(&second).unwrap());
}

#[test]
fn eval_prints_exact_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let dag = dir.path().join("small.dag");
    let out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(resources().join("fixtures/small.txt"))
        .arg("--output")
        .arg(&dag)
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = bin()
        .args(["eval", "--system"])
        .arg(&dag)
        .arg("--reference")
        .arg(resources().join("fixtures/small.ref"))
        .arg("--map")
        .arg(resources().join("mini/downgrade.tsv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "eval failed: {}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "total_words=4\nsingle_stem_words=4\nmatched_words=3\nrecall=3/4\nprecision=5/8\n"
    );
}

#[test]
fn eval_on_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let dag = dir.path().join("corpus.dag");
    let out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(resources().join("fixtures/corpus.txt"))
        .arg("--output")
        .arg(&dag)
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = bin()
        .args(["eval", "--system"])
        .arg(&dag)
        .arg("--reference")
        .arg(resources().join("fixtures/corpus.ref"))
        .arg("--map")
        .arg(resources().join("mini/downgrade.tsv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "eval failed: {}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "total_words=200\nsingle_stem_words=190\nmatched_words=171\nrecall=9/10\nprecision=4/5\n"
    );
}

#[test]
fn bench_reports_word_rate() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let out = bin()
        .args(["bench", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(resources().join("fixtures/corpus.txt"))
        .output()
        .unwrap();
    assert!(out.status.success(), "bench failed: {}", stderr(&out));
    let report = stdout(&out);
    assert!(report.contains("words=200\n"), "{report}");
    assert!(report.contains("words_per_s="), "{report}");
}

#[test]
fn usage_error_exits_with_one() {
    let out = bin().args(["annotate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--lexicon"));
}

#[test]
fn unknown_subcommand_exits_with_one() {
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_with_zero() {
    let out = bin().args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("compile"));
}

#[test]
fn bad_resource_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("bundle.toml");
    std::fs::write(&manifest, "this is not toml [").unwrap();
    let out = bin()
        .args(["compile", "--manifest"])
        .arg(&manifest)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).starts_with("error: "), "{}", stderr(&out));
}

#[test]
fn missing_input_file_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(dir.path().join("does-not-exist.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn utf16_input_is_decoded() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = compile_mini(dir.path());
    let text = "크다.\n";
    let mut bytes = vec![0xff, 0xfe];
    for unit in text.encode_utf16() {
        bytes.extend_from_slice(&unit.to_le_bytes());
    }
    let input = dir.path().join("small16.txt");
    std::fs::write(&input, bytes).unwrap();
    let out = bin()
        .args(["annotate", "--lexicon"])
        .arg(&lexicon)
        .arg("--input")
        .arg(&input)
        .args(["--encoding", "utf16le"])
        .output()
        .unwrap();
    assert!(out.status.success(), "annotate failed: {}", stderr(&out));
    assert!(stdout(&out).contains("\t크다\t크다\taj\n"), "{}", stdout(&out));
}
