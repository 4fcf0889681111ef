use std::path::Path;
use std::process::{Command, Output};

fn tvflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvflow"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn tvflow")
}

fn rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn biharmonic_run_writes_twenty_rows_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# biharmonic, Gaussian start\nscheme = biharm-coupled\nnx = 100\nny = 100\ndt_k = 2\niters = 20\nic = gaussian\noutput_prefix = b\n",
    )
    .unwrap();
    let out = tvflow(
        &["run", "--config", "run.cfg", "--snapshots", "4,20"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(rows(&dir.path().join("b_diag.csv")), 20);
    assert!(dir.path().join("b_u4.pgm").exists());
    assert!(dir.path().join("b_u20.pgm").exists());
}

#[test]
fn unstable_tv_run_exits_with_divergence_and_keeps_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = tvflow(
        &[
            "run",
            "--scheme",
            "tvh1-hundsdorfer",
            "--eps",
            "0.1",
            "--ic",
            "oscillatory",
            "--n",
            "100",
            "--dtk",
            "3",
            "--iters",
            "5000",
            "--prefix",
            "tv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[divergence]"));
    let n = rows(&dir.path().join("tv_diag.csv"));
    assert!(n > 0 && n < 5000);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "nx = 16\nwidth = 3\n").unwrap();
    let out = tvflow(&["run", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("width"), "{err}");
    let out = tvflow(&["run", "--theta", "two"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn version_and_help() {
    let dir = tempfile::tempdir().unwrap();
    let out = tvflow(&["version"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("tvflow "));
    let flags: &[(&str, &[&str])] = &[
        (
            "run",
            &[
                "--config",
                "--scheme",
                "--dtk",
                "--eps",
                "--theta",
                "--snapshots",
                "--prefix",
            ],
        ),
        (
            "sweep",
            &[
                "--scheme",
                "--ic",
                "--thetas",
                "--dtcs",
                "--eps-ladder",
                "--horizon",
            ],
        ),
        (
            "inpaint",
            &["--image", "--mask", "--lambda", "--eps", "--dtk", "--iters"],
        ),
        ("steady", &["--config", "--tol", "--cap"]),
        ("version", &[]),
    ];
    for (cmd, want) in flags {
        let out = tvflow(&[cmd, "--help"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let text = String::from_utf8_lossy(&out.stdout);
        for f in *want {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |p: &str| {
        let out = tvflow(
            &[
                "run",
                "--scheme",
                "amos",
                "--n",
                "24",
                "--eps",
                "0.01",
                "--dtk",
                "3",
                "--iters",
                "15",
                "--ic",
                "oscillatory",
                "--snapshots",
                "15",
                "--prefix",
                p,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    };
    run("a");
    run("b");
    for suffix in ["_diag.csv", "_u15.pgm"] {
        let a = std::fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix}");
    }
}

#[test]
fn sweep_and_inpaint_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = tvflow(
        &[
            "sweep",
            "--scheme",
            "biharm-coupled",
            "--n",
            "16",
            "--thetas",
            "0.5,sqrt3",
            "--dtcs",
            "0.1",
            "--eps-ladder",
            "1",
            "--horizon",
            "5",
            "--prefix",
            "s",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("s_stability.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,dt,eps_min"));
    assert_eq!(csv.lines().count(), 3);

    let img = [b"P5 8 8 255\n".as_slice(), &[200u8; 64]].concat();
    let mut mask = [b"P5 8 8 255\n".as_slice(), &[0u8; 64]].concat();
    let header = mask.len() - 64;
    mask[header + 27] = 1;
    std::fs::write(dir.path().join("f.pgm"), img).unwrap();
    std::fs::write(dir.path().join("d.pgm"), mask).unwrap();
    let out = tvflow(
        &[
            "inpaint", "--image", "f.pgm", "--mask", "d.pgm", "--iters", "3", "--prefix", "i",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("i_inpainted.pgm").exists());
    assert_eq!(rows(&dir.path().join("i_diag.csv")), 3);
}
