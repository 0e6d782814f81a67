use std::fs;
use std::path::Path;
use std::process::Command;

use consflux::checkpoint::Checkpoint;
use consflux::data::read_dataset;

fn consflux(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_consflux"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &Path) {
    let (code, err) = consflux(&[
        "generate", "--preset", "burgers-caseI", "--n", "32", "--n-traj", "3", "--l", "4", "--m", "10", "--seed", "2",
        "--out", s(dir),
    ]);
    assert_eq!(code, 0, "{err}");
}

fn small_checkpoint(data: &Path, out: &Path, epochs: &str) {
    let (code, err) = consflux(&[
        "train", "--model", "cfn", "--data", s(data), "--epochs", epochs, "--hidden-layers", "1", "--hidden-width", "4",
        "--out", s(out),
    ]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn generate_echo_reproduces_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("a");
    small_dataset(&first);
    let again = tmp.path().join("b");
    let (code, err) = consflux(&["generate", "--config", s(&first.join("config.toml")), "--out", s(&again)]);
    assert_eq!(code, 0, "{err}");
    for f in ["manifest.json", "data.bin", "config.toml"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_epochs_gives_initial_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let run = tmp.path().join("run");
    small_checkpoint(&data, &run, "0");
    let ck = Checkpoint::load(&run.join("checkpoint.json")).unwrap();
    assert_eq!(ck.meta.epoch, 0);
    assert_eq!(ck.model.mlp().layer_dims(), &[ck.model.stencil().width(), 4, 1]);
}

#[test]
fn train_echo_and_seed_reproduce_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let a = tmp.path().join("a");
    small_checkpoint(&data, &a, "3");
    let b = tmp.path().join("b");
    small_checkpoint(&data, &b, "3");
    let c = tmp.path().join("c");
    let (code, err) = consflux(&["train", "--config", s(&a.join("train_config.toml")), "--data", s(&data), "--out", s(&c)]);
    assert_eq!(code, 0, "{err}");
    let ck = fs::read(a.join("checkpoint.json")).unwrap();
    assert_eq!(ck, fs::read(b.join("checkpoint.json")).unwrap());
    assert_eq!(ck, fs::read(c.join("checkpoint.json")).unwrap());
}

#[test]
fn lambda2_on_plain_ncfn_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let (code, err) = consflux(&["train", "--model", "ncfn", "--lambda2", "0.01", "--data", s(&data), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(code, 1);
    assert!(err.contains("lambda2"), "{err}");
}

#[test]
fn lambda2_auto_writes_probes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let out = tmp.path().join("reg");
    let (code, err) = consflux(&[
        "train", "--model", "ncfn-reg", "--lambda2", "auto", "--probe-epochs", "2", "--epochs", "2", "--hidden-layers", "1",
        "--hidden-width", "4", "--data", s(&data), "--out", s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let probes = fs::read_to_string(out.join("lambda2_probes.csv")).unwrap();
    assert_eq!(probes.lines().count(), 6);
    let echo = fs::read_to_string(out.join("train_config.toml")).unwrap();
    assert!(echo.contains("lambda2_mode = \"auto\""));
}

#[test]
fn predict_zero_time_echoes_initial_state() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let run = tmp.path().join("run");
    small_checkpoint(&data, &run, "1");
    let pred = tmp.path().join("pred");
    let (code, err) = consflux(&[
        "predict", "--checkpoint", s(&run.join("checkpoint.json")), "--ic", s(&data), "--traj", "2", "--t-end", "0", "--out",
        s(&pred),
    ]);
    assert_eq!(code, 0, "{err}");
    let p = read_dataset(&pred).unwrap();
    let d = read_dataset(&data).unwrap();
    assert_eq!(p.trajectories()[0].snapshots().len(), 1);
    assert_eq!(p.trajectories()[0].initial(), d.trajectories()[2].initial());
}

#[test]
fn predict_figure_ic_runs_requested_steps() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let run = tmp.path().join("run");
    small_checkpoint(&data, &run, "1");
    let pred = tmp.path().join("pred");
    let ck = s(&run.join("checkpoint.json")).to_string();
    let (code, err) = consflux(&["predict", "--checkpoint", &ck, "--ic", "burgers-figure", "--t-end", "3", "--out", s(&pred)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read_dataset(&pred).unwrap().len_steps(), 600);
    let (code, _) = consflux(&["predict", "--checkpoint", &ck, "--ic", "burgers-figure", "--t-end", "0.0031", "--out", s(&pred)]);
    assert_eq!(code, 1);
    let (code, _) = consflux(&["predict", "--checkpoint", &ck, "--ic", "swe-figure", "--t-end", "1", "--out", s(&pred)]);
    assert_eq!(code, 1);
}

#[test]
fn predict_grid_mismatch_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let run = tmp.path().join("run");
    small_checkpoint(&data, &run, "0");
    let other = tmp.path().join("other");
    let (code, _) = consflux(&[
        "generate", "--preset", "burgers-caseI", "--n", "64", "--n-traj", "1", "--l", "2", "--m", "4", "--out", s(&other),
    ]);
    assert_eq!(code, 0);
    let (code, err) = consflux(&[
        "predict", "--checkpoint", s(&run.join("checkpoint.json")), "--ic", s(&other), "--t-end", "0.01", "--out",
        s(&tmp.path().join("p")),
    ]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn blow_up_writes_partial_trajectory_and_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let run = tmp.path().join("run");
    small_checkpoint(&data, &run, "0");
    let mut ck = Checkpoint::load(&run.join("checkpoint.json")).unwrap();
    for layer in 0..2 {
        ck.model.mlp_mut().scale_layer(layer, 1e80);
    }
    let bad = tmp.path().join("bad.json");
    ck.save(&bad).unwrap();
    let pred = tmp.path().join("pred");
    let (code, err) = consflux(&["predict", "--checkpoint", s(&bad), "--ic", s(&data), "--t-end", "0.5", "--out", s(&pred)]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("step"), "{err}");
    let partial = read_dataset(&pred).unwrap();
    assert!(partial.len_steps() < 100);
}

#[test]
fn evaluate_identical_prediction_and_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let out = tmp.path().join("eval");
    let (code, err) = consflux(&["evaluate", "--prediction", s(&data), "--reference", s(&data), "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    for metric in ["l1", "l2", "linf"] {
        assert_eq!(m["metrics"][metric]["u"], 0.0);
    }
    assert!(m["metrics"]["shock_x_model"].get("u").is_some());
    assert!(m["config"]["prediction_checksum"].is_string());
    let text = fs::read_to_string(out.join("metrics.json")).unwrap();
    assert!(!text.contains(s(&data)), "paths must not leak into the echo");
}

#[test]
fn missing_inputs_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let nowhere = tmp.path().join("nowhere");
    let (code, _) = consflux(&["evaluate", "--prediction", s(&data), "--reference", s(&nowhere), "--out", s(&tmp.path().join("e"))]);
    assert_eq!(code, 3);
    let (code, _) = consflux(&["train", "--data", s(&nowhere), "--out", s(&tmp.path().join("t"))]);
    assert_eq!(code, 3);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(consflux(&["generate", "--out", "x"]).0, 1);
    assert_eq!(consflux(&["frobnicate"]).0, 1);
    assert_eq!(consflux(&["generate", "--preset", "burgers-caseIX", "--out", "x"]).0, 1);
    assert_eq!(consflux(&["--help"]).0, 0);
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let one = tmp.path().join("one");
    let four = tmp.path().join("four");
    for (dir, threads) in [(&one, "1"), (&four, "4")] {
        let (code, err) = consflux(&[
            "--threads", threads, "generate", "--preset", "swe-caseI", "--n", "32", "--n-traj", "4", "--l", "3", "--out",
            s(dir),
        ]);
        assert_eq!(code, 0, "{err}");
        let run = dir.join("run");
        let (code, err) = consflux(&[
            "--threads", threads, "train", "--model", "ncfn-reg", "--epochs", "2", "--hidden-layers", "1", "--hidden-width",
            "4", "--data", s(dir), "--out", s(&run),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    assert_eq!(fs::read(one.join("data.bin")).unwrap(), fs::read(four.join("data.bin")).unwrap());
    assert_eq!(fs::read(one.join("run/checkpoint.json")).unwrap(), fs::read(four.join("run/checkpoint.json")).unwrap());
}
