//! End-to-end tests against the built `rlnc` binary: flags, exit codes and
//! the documented output surfaces.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn rlnc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlnc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn encode_then_decode_restores_the_file() {
    let dir = tempdir().unwrap();
    let data: Vec<u8> = (0..10_000u32).map(|i| (i * 31 % 251) as u8).collect();
    std::fs::write(dir.path().join("input.bin"), &data).unwrap();

    let encode = rlnc(
        &["encode", "input.bin", "--packets", "8", "--field-bits", "8", "--seed", "7"],
        dir.path(),
    );
    assert!(encode.status.success(), "{}", stderr(&encode));
    assert!(stdout(&encode).contains("input.bin.ncp"));

    let decode = rlnc(&["decode", "input.bin.ncp", "-o", "restored.bin"], dir.path());
    assert!(decode.status.success(), "{}", stderr(&decode));
    assert_eq!(std::fs::read(dir.path().join("restored.bin")).unwrap(), data);
}

#[test]
fn decode_strips_the_container_extension_by_default() {
    let dir = tempdir().unwrap();
    std::fs::write(dir.path().join("notes.txt"), b"hello coded world").unwrap();
    let encode = rlnc(&["encode", "notes.txt", "--packets", "2"], dir.path());
    assert!(encode.status.success(), "{}", stderr(&encode));
    std::fs::rename(dir.path().join("notes.txt.ncp"), dir.path().join("copy.ncp")).unwrap();
    let decode = rlnc(&["decode", "copy.ncp"], dir.path());
    assert!(decode.status.success(), "{}", stderr(&decode));
    assert_eq!(std::fs::read(dir.path().join("copy")).unwrap(), b"hello coded world");
}

#[test]
fn rank_shortfall_exits_3_and_reports_recoverables() {
    let dir = tempdir().unwrap();
    std::fs::write(dir.path().join("input.bin"), vec![5u8; 4096]).unwrap();
    let encode = rlnc(
        &["encode", "input.bin", "--packets", "16", "--redundancy", "10"],
        dir.path(),
    );
    assert!(encode.status.success());

    let decode = rlnc(&["decode", "input.bin.ncp"], dir.path());
    assert_eq!(decode.status.code(), Some(3));
    let err = stderr(&decode);
    assert!(err.contains("rank"), "stderr: {err}");
    assert!(err.contains("of 16"), "stderr: {err}");
}

#[test]
fn corrupt_container_exits_4() {
    let dir = tempdir().unwrap();
    std::fs::write(dir.path().join("junk.ncp"), b"not a container at all").unwrap();
    let decode = rlnc(&["decode", "junk.ncp"], dir.path());
    assert_eq!(decode.status.code(), Some(4));
}

#[test]
fn missing_input_exits_1_and_bad_flags_exit_2() {
    let dir = tempdir().unwrap();
    let missing = rlnc(&["encode", "absent.bin"], dir.path());
    assert_eq!(missing.status.code(), Some(1));

    let bad_flag = rlnc(&["encode", "absent.bin", "--field-bits", "nope"], dir.path());
    assert_eq!(bad_flag.status.code(), Some(2));

    let bad_width = rlnc(&["table", "--field-bits", "3"], dir.path());
    assert_eq!(bad_width.status.code(), Some(2));

    let no_args = rlnc(&[], dir.path());
    assert_eq!(no_args.status.code(), Some(2));
}

#[test]
fn table_prints_the_worked_inverse() {
    let dir = tempdir().unwrap();
    let table = rlnc(&["table", "--field-bits", "8"], dir.path());
    assert!(table.status.success());
    let text = stdout(&table);
    let row = text.lines().nth(2 + 10).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[0], "0a");
    assert_eq!(cells[2 + 41], "01");
}

#[test]
fn bench_reports_both_modes() {
    let dir = tempdir().unwrap();
    let bench = rlnc(&["bench", "mul", "200000", "--field-bits", "8"], dir.path());
    assert!(bench.status.success(), "{}", stderr(&bench));
    let text = stdout(&bench);
    assert!(text.contains("on-the-fly:"));
    assert!(text.contains("table:"));
}

#[test]
fn sim_is_deterministic_and_honors_config_files() {
    let dir = tempdir().unwrap();
    let args = ["sim", "--scenario", "butterfly", "--packets", "8", "--slots", "12", "--seed", "5"];
    let first = rlnc(&args, dir.path());
    let second = rlnc(&args, dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("destination D1"));

    std::fs::write(
        dir.path().join("scenario.cfg"),
        "scenario = relay\npackets = 4\nslots = 15\nseed = 3\n",
    )
    .unwrap();
    let from_file = rlnc(&["sim", "scenario.cfg", "-o", "slots.csv"], dir.path());
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert!(stdout(&from_file).contains("destination D"));
    let csv = std::fs::read_to_string(dir.path().join("slots.csv")).unwrap();
    assert_eq!(csv.lines().count(), 16); // header + 15 slots
    assert!(csv.starts_with("slot,"));

    // Flags override the file.
    let overridden = rlnc(&["sim", "scenario.cfg", "--slots", "6"], dir.path());
    assert!(stdout(&overridden).contains("slots=6"));
}

#[test]
fn uncoded_sim_runs_report_zero_multiplications() {
    let dir = tempdir().unwrap();
    let run = rlnc(
        &["sim", "--scenario", "butterfly", "--coding", "off", "--packets", "8", "--slots", "10"],
        dir.path(),
    );
    assert!(run.status.success());
    assert!(stdout(&run).contains("field_multiplications=0"));
}
