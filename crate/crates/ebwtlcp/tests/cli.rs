//! End-to-end checks of the command-line surface, driving the real binary.

mod common;

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ebwtlcp"))
}

fn write_input(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("input.txt");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn build_writes_all_outputs_and_cleans_tmp() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "abac\ncbab\nbca\ncba\n");
    let prefix = dir.path().join("out/coll");
    let tmp = dir.path().join("work");

    let status = bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(&prefix)
        .args(["--tmp-dir"])
        .arg(&tmp)
        .args(["--with-gsa", "--verify"])
        .status()
        .unwrap();
    assert!(status.success());

    let ebwt = std::fs::read(dir.path().join("out/coll.ebwt")).unwrap();
    assert_eq!(ebwt, b"cbaacbb$bacca$ab$$");
    assert!(dir.path().join("out/coll.lcp").exists());
    assert!(dir.path().join("out/coll.gsa").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/coll.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["m"], 4);
    assert_eq!(meta["n"], 18);
    assert_eq!(meta["k"], 5);
    assert_eq!(meta["format_version"], 1);
    // tmp dir cleaned on success
    assert_eq!(std::fs::read_dir(&tmp).unwrap().count(), 0);
}

#[test]
fn build_is_byte_deterministic() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "tacgt\nacg\nttac\n");
    let mut blobs = Vec::new();
    for run in 0..2 {
        let prefix = dir.path().join(format!("run{run}"));
        let status = bin()
            .args(["build", "--input"])
            .arg(&input)
            .args(["--output-prefix"])
            .arg(&prefix)
            .arg("--with-gsa")
            .status()
            .unwrap();
        assert!(status.success());
        let mut blob = Vec::new();
        for ext in ["ebwt", "lcp", "gsa", "meta.json"] {
            blob.extend(std::fs::read(dir.path().join(format!("run{run}.{ext}"))).unwrap());
        }
        blobs.push(blob);
    }
    assert_eq!(blobs[0], blobs[1]);
}

#[test]
fn build_rejects_end_marker_in_input() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "ab$c\n");
    let out = bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("end-marker"), "stderr: {stderr}");
}

#[test]
fn build_rejects_empty_collection() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "");
    let out = bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn verify_detects_tampered_lcp() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "banana\nananas\nnan\n");
    let prefix = dir.path().join("out");
    assert!(bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(&prefix)
        .status()
        .unwrap()
        .success());

    // clean verify passes and writes the key=value report
    let out = bin()
        .args(["verify", "--prefix"])
        .arg(&prefix)
        .args(["--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("out.audit")).unwrap();
    assert!(report.contains("result=pass"));

    // flip a byte in .lcp: verify must fail and name the first bad index
    let lcp_path = dir.path().join("out.lcp");
    let mut raw = std::fs::read(&lcp_path).unwrap();
    raw[7] ^= 1;
    std::fs::write(&lcp_path, raw).unwrap();
    let out = bin()
        .args(["verify", "--prefix"])
        .arg(&prefix)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("oracle_lcp") && stdout.contains("index 8"), "{stdout}");
}

#[test]
fn verify_missing_metadata_fails() {
    let dir = common::scratch_dir();
    let out = bin()
        .args(["verify", "--prefix"])
        .arg(dir.path().join("ghost"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing metadata"));
}

#[test]
fn verify_input_mode_audits_a_fresh_build() {
    let dir = common::scratch_dir();
    let strings: Vec<Vec<u8>> = (0..40)
        .map(|i| (0..10).map(|j| b'a' + ((i * 7 + j * 3) % 4) as u8).collect())
        .collect();
    let input = common::write_lines(dir.path(), "reads.txt", &strings);
    let out = bin()
        .args(["verify", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("sequential_io"), "{stdout}");
    assert!(std::fs::read_to_string(dir.path().join("reads.txt.audit"))
        .unwrap()
        .contains("check.sequential_io=pass"));
}

#[test]
fn inspect_prints_requested_rows() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "abac\ncbab\nbca\ncba\n");
    let prefix = dir.path().join("out");
    assert!(bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(&prefix)
        .arg("--with-gsa")
        .status()
        .unwrap()
        .success());

    let out = bin()
        .args(["inspect", "--prefix"])
        .arg(&prefix)
        .args(["--range", "1..4", "--suffixes", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    // the end-marker block: four rows, lcp 0, suffix text "$"
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert!(row.trim_start().starts_with(&(i + 1).to_string()), "{row}");
        assert!(row.contains('$'), "{row}");
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols[2], "0", "lcp column in {row}");
    }

    // out-of-range request fails
    let out = bin()
        .args(["inspect", "--prefix"])
        .arg(&prefix)
        .args(["--range", "1..40"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn fasta_and_fastq_inputs_build() {
    let dir = common::scratch_dir();
    let fasta = dir.path().join("in.fa");
    std::fs::write(&fasta, ">r1\nACGT\nAC\n>r2\nGGT\n").unwrap();
    let prefix = dir.path().join("fa");
    assert!(bin()
        .args(["build", "--input"])
        .arg(&fasta)
        .args(["--output-prefix"])
        .arg(&prefix)
        .arg("--verify")
        .status()
        .unwrap()
        .success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fa.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["m"], 2);
    assert_eq!(meta["n"], 11); // ACGTAC + GGT + two markers

    let fastq = dir.path().join("in.fq");
    std::fs::write(&fastq, "@r1\nACGT\n+\nIIII\n@r2\nTT\n+\nII\n").unwrap();
    let prefix = dir.path().join("fq");
    assert!(bin()
        .args(["build", "--input"])
        .arg(&fastq)
        .args(["--output-prefix"])
        .arg(&prefix)
        .arg("--verify")
        .status()
        .unwrap()
        .success());
}

#[test]
fn no_lcp_build_omits_lcp_file() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "abc\ncba\n");
    let prefix = dir.path().join("nolcp");
    assert!(bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(&prefix)
        .args(["--no-lcp", "--verify"])
        .status()
        .unwrap()
        .success());
    assert!(dir.path().join("nolcp.ebwt").exists());
    assert!(!dir.path().join("nolcp.lcp").exists());
}

#[test]
fn tmpdir_env_var_is_honored() {
    let dir = common::scratch_dir();
    let input = write_input(dir.path(), "ab\nba\n");
    let prefix = dir.path().join("envtmp");
    let custom = dir.path().join("custom-tmp");
    assert!(bin()
        .args(["build", "--input"])
        .arg(&input)
        .args(["--output-prefix"])
        .arg(&prefix)
        .env("EBWTLCP_TMPDIR", &custom)
        .status()
        .unwrap()
        .success());
    // the custom dir was created (and emptied) by the build
    assert!(custom.is_dir());
    assert!(!dir.path().join("envtmp.tmp").exists());
}
