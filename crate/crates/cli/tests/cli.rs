use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use circlereg::io::{read_phase_image, read_report, read_signal};

fn circlereg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlereg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = circlereg(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails_with(dir: &Path, args: &[&str], category: &str) {
    let out = circlereg(dir, args);
    assert!(!out.status.success(), "{args:?} should fail");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.starts_with(&format!("error[{category}]")),
        "{args:?}: {stderr}"
    );
}

#[test]
fn synthetic_chain_denoises_to_a_certified_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--d1",
            "--seed",
            "7",
            "--truth",
            "truth.txt",
            "--noisy",
            "noisy.txt",
        ],
    );
    assert_eq!(read_signal(d.join("truth.txt")).unwrap().len(), 1000);

    let line = ok(
        d,
        &[
            "denoise",
            "-i",
            "noisy.txt",
            "--method",
            "sdp",
            "--lambda",
            "50",
            "--tau",
            "0.1",
            "-o",
            "sdp.txt",
            "--report",
            "sdp.json",
            "--seed",
            "7",
        ],
    );
    assert_eq!(line.lines().count(), 1);
    let sdp = read_report(d.join("sdp.json")).unwrap();
    assert_eq!(sdp.tight, Some(true));
    assert_eq!(sdp.seed, Some(7));
    let psi_conv = sdp.psi_conv_star.unwrap();
    assert!(psi_conv <= sdp.psi_approx + 1e-6);
    assert!(psi_conv <= sdp.psi_orig_baseline.unwrap() + 1e-6);

    ok(
        d,
        &[
            "denoise",
            "-i",
            "noisy.txt",
            "--method",
            "baseline",
            "--lambda",
            "50",
            "-o",
            "base.txt",
            "--report",
            "base.json",
        ],
    );
    let base = read_report(d.join("base.json")).unwrap();
    assert!(base.psi_orig_baseline.unwrap() >= sdp.psi_approx);
    assert_eq!(base.psi_orig_baseline, sdp.psi_orig_baseline);
}

#[test]
fn interpolation_fills_the_gap_uniformly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut text = String::from("# circle-signal v1 n=10\n-1\n");
    text.push_str(&"nan\n".repeat(8));
    text.push_str("2\n");
    fs::write(d.join("gap.txt"), text).unwrap();

    ok(
        d,
        &[
            "interpolate",
            "-i",
            "gap.txt",
            "-o",
            "filled.txt",
            "--report",
            "r.json",
        ],
    );
    let filled = read_signal(d.join("filled.txt")).unwrap();
    for (k, a) in filled.iter().enumerate() {
        let want = (k as f64 - 3.0) / 3.0;
        assert!((a - want).abs() < 1e-6, "node {k}: {a} vs {want}");
    }
    assert_eq!(read_report(d.join("r.json")).unwrap().tight, Some(true));

    ok(
        d,
        &[
            "interpolate",
            "-i",
            "gap.txt",
            "--method",
            "baseline",
            "-o",
            "lin.txt",
        ],
    );
    let lin = read_signal(d.join("lin.txt")).unwrap();
    assert_eq!(lin[0], -1.0);
    assert_eq!(lin[9], 2.0);
}

#[test]
fn constraints_pin_nodes_on_top_of_soft_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("data.txt"),
        "# circle-signal v1 n=5\n0.1\n0.2\nnan\n0.1\n0.0\n",
    )
    .unwrap();
    fs::write(d.join("pins.txt"), "# node angle\n4 1.0\n").unwrap();
    ok(
        d,
        &[
            "interpolate",
            "-i",
            "data.txt",
            "--constraints",
            "pins.txt",
            "--lambda",
            "2",
            "-o",
            "out.txt",
        ],
    );
    let out = read_signal(d.join("out.txt")).unwrap();
    assert!((out[4] - 1.0).abs() < 1e-12);
    assert!(out[0] < out[4]);
}

#[test]
fn general_graphs_and_weight_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("y.txt"),
        "# circle-signal v1 n=4\n0.3\n1.1\n-0.4\n0.8\n",
    )
    .unwrap();
    fs::write(
        d.join("edges.txt"),
        "0 1 1.0\n2 1 0.5\n2 3 2.0\n3 0 1.0\n0 2 0.1\n",
    )
    .unwrap();
    fs::write(d.join("w.txt"), "1\n2\ninf\n0.5\n").unwrap();
    ok(
        d,
        &[
            "denoise",
            "-i",
            "y.txt",
            "--edges",
            "edges.txt",
            "--weights",
            "w.txt",
            "-o",
            "x.txt",
            "--report",
            "r.json",
            "--lifted-out",
            "s.json",
            "--trace-out",
            "trace.csv",
        ],
    );
    let x = read_signal(d.join("x.txt")).unwrap();
    assert!((x[2] + 0.4).abs() < 1e-12);
    let report = read_report(d.join("r.json")).unwrap();
    assert_eq!(report.config.lambda, None);
    assert_eq!(report.config.node_weight, None);

    let trace = fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,psi_conv,step_change\n"));
    assert_eq!(trace.lines().count(), report.iterations_run.unwrap() + 1);

    let line = ok(
        d,
        &[
            "certify",
            "-i",
            "y.txt",
            "--edges",
            "edges.txt",
            "--weights",
            "w.txt",
            "--lifted",
            "s.json",
            "--report",
            "c.json",
        ],
    );
    assert!(line.starts_with("certify:"));
    let cert = read_report(d.join("c.json")).unwrap();
    assert_eq!(cert.psi_conv_star, report.psi_conv_star);
    assert_eq!(cert.tight, report.tight);
}

#[test]
fn phase_images_round_trip_through_denoising() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--d2",
            "--seed",
            "3",
            "--height",
            "16",
            "--width",
            "20",
            "--truth",
            "truth.pgm",
            "--noisy",
            "noisy.cf64",
        ],
    );
    ok(
        d,
        &[
            "denoise",
            "-i",
            "noisy.cf64",
            "--lambda",
            "5",
            "-o",
            "x.pgm",
            "--report",
            "r.json",
        ],
    );
    let img = read_phase_image(d.join("x.pgm")).unwrap();
    assert_eq!((img.height, img.width), (16, 20));
    let r = read_report(d.join("r.json")).unwrap();
    assert!(r.psi_conv_star.unwrap() <= r.psi_orig_baseline.unwrap() + 1e-6);

    let line = ok(
        d,
        &[
            "denoise",
            "-i",
            "noisy.cf64",
            "--method",
            "meanfilter",
            "--kernel-std",
            "1.5",
            "-o",
            "m.cf64",
            "--report",
            "m.json",
        ],
    );
    assert!(line.contains("meanfilter"));
    let m = read_report(d.join("m.json")).unwrap();
    assert_eq!(m.config.kernel_std, Some(1.5));
    assert!(m.psi_orig_baseline.is_some());
}

#[test]
fn oracle_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["oracle", "--nodes", "4", "--count", "2", "--levels", "128"],
    );
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().last().unwrap().starts_with("oracle:"));
}

#[test]
fn failures_report_a_category() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fails_with(d, &["denoise", "-i", "missing.txt", "-o", "x.txt"], "io");
    fs::write(d.join("bad.txt"), "not a signal\n").unwrap();
    fails_with(d, &["denoise", "-i", "bad.txt", "-o", "x.txt"], "format");
    fs::write(d.join("y.txt"), "# circle-signal v1 n=4\n0\n0\n0\n0\n").unwrap();
    fs::write(d.join("split.txt"), "0 1 1\n2 3 1\n").unwrap();
    fails_with(
        d,
        &[
            "denoise",
            "-i",
            "y.txt",
            "--edges",
            "split.txt",
            "-o",
            "x.txt",
        ],
        "topology",
    );
    fails_with(
        d,
        &["denoise", "-i", "y.txt", "--tau=-1", "-o", "x.txt"],
        "invalid-input",
    );
    fails_with(
        d,
        &["interpolate", "-i", "y.txt", "-o", "x.txt"],
        "invalid-input",
    );
    fails_with(
        d,
        &[
            "denoise",
            "-i",
            "y.txt",
            "--method",
            "baseline",
            "--lifted-out",
            "s.json",
            "-o",
            "x.txt",
        ],
        "invalid-input",
    );
    fails_with(
        d,
        &[
            "denoise",
            "-i",
            "y.txt",
            "--node-weight",
            "0",
            "--method",
            "baseline",
            "-o",
            "x.txt",
        ],
        "numeric",
    );
    fails_with(d, &["synth", "--truth", "a", "--noisy", "b"], "usage");
}
