//! End-to-end runs of the installed binary against real files.

use std::path::Path;
use std::process::{Command, Output};

use dlmc_core::circuit::builder::xor_circuit;
use dlmc_core::circuit::netlist;
use dlmc_core::machine::manifest::save_spec;
use dlmc_core::parity::standard_sampler;

fn dlmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlmc")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_xor_netlist(path: &Path) {
    std::fs::write(path, netlist::serialize(&xor_circuit(2))).unwrap();
}

#[test]
fn compile_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("xor.net");
    let spec = dir.path().join("xor.dlm");
    write_xor_netlist(&net);

    let out = dlmc(&[
        "compile",
        "--strategy",
        "trace",
        "--in",
        net.to_str().unwrap(),
        "--out",
        spec.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("mode=standard"));

    let out = dlmc(&[
        "verify",
        "--circuit",
        net.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--exact",
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("ok (4 prompts)"));
}

#[test]
fn verify_rejects_a_different_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("xor.net");
    let spec = dir.path().join("xor.dlm");
    write_xor_netlist(&net);
    dlmc(&[
        "compile",
        "--strategy",
        "revision",
        "--in",
        net.to_str().unwrap(),
        "--out",
        spec.to_str().unwrap(),
    ]);

    // An AND in place of the XOR: same shape, different law.
    let and_net = dir.path().join("and.net");
    std::fs::write(
        &and_net,
        "vertex 1 1 input\nvertex 2 1 input\nvertex 3 2 and 1 2\noutputs 3\n",
    )
    .unwrap();
    let out = dlmc(&[
        "verify",
        "--circuit",
        and_net.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(stdout(&out).contains("MISMATCH"));
}

#[test]
fn seeded_runs_write_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("xor.net");
    let spec = dir.path().join("xor.dlm");
    write_xor_netlist(&net);
    dlmc(&[
        "compile",
        "--strategy",
        "remask",
        "--in",
        net.to_str().unwrap(),
        "--out",
        spec.to_str().unwrap(),
    ]);

    let t1 = dir.path().join("t1.jsonl");
    let t2 = dir.path().join("t2.jsonl");
    for t in [&t1, &t2] {
        let out = dlmc(&[
            "run",
            "--spec",
            spec.to_str().unwrap(),
            "--input",
            "10",
            "--seed",
            "7",
            "--trace-out",
            t.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        assert_eq!(stdout(&out).trim(), "1");
    }
    assert_eq!(std::fs::read(&t1).unwrap(), std::fs::read(&t2).unwrap());

    let out = dlmc(&["audit", "--spec", spec.to_str().unwrap(), "--trace", t1.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("audit clean"));

    // Flip one recorded coin; the audit must notice.
    let tampered = std::fs::read_to_string(&t1).unwrap().replacen(
        "\"f_coins\":[]",
        "\"f_coins\":[true]",
        1,
    );
    std::fs::write(&t2, tampered).unwrap();
    let out = dlmc(&["audit", "--spec", spec.to_str().unwrap(), "--trace", t2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn parity_verify_reports_the_round_count() {
    let out = dlmc(&["parity", "--mode", "revision", "--n", "8", "--verify"]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).trim(), "exact match, 2 rounds");

    let out = dlmc(&["parity", "--mode", "remask", "--n", "6", "--verify"]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).trim(), "exact match, 6 rounds");

    let out = dlmc(&["parity", "--mode", "remask", "--n", "5", "--verify"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn advantage_prints_the_exact_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let spec = standard_sampler(4, 2);
    save_spec(&spec, dir.path()).unwrap();
    let out = dlmc(&[
        "parity",
        "advantage",
        "--spec",
        dir.path().to_str().unwrap(),
        "--rounds",
        "2",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("accuracy 5/8"), "{text}");
    assert!(text.contains("[1, 2]"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    let out = dlmc(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dlmc(&["verify", "--circuit", "nowhere.net", "--spec", "nowhere.dlm"]);
    assert_eq!(out.status.code(), Some(1));
}
