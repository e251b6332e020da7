use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chaoscope::sets::PointCloud;
use chaoscope::spaces::SpaceModel;

fn chaoscope(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoscope"))
        .args(args)
        .current_dir(dir)
        .env_remove("CHAOSCOPE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const DOUBLING: &str = r#"name = "doubling"

[space]
kind = "euclidean"
dim = 1

[[maps]]
kind = "affine"
matrix = [[2.0]]
offset = [0.0]

[defaults]
x0 = [1.0]
reference = [[0.0]]
"#;

#[test]
fn sierpinski_run_against_oracle_converges() {
    let dir = tempfile::tempdir().unwrap();
    let o = chaoscope(
        dir.path(),
        &["run", "--system", "sierpinski", "--steps", "100000", "--seed", "42", "--reference", "oracle"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("converged = true"), "{report}");
    let last = report
        .lines()
        .filter(|l| l.starts_with("final_d_h"))
        .find_map(|l| l.split('=').nth(1)?.trim().parse::<f64>().ok())
        .expect("final distance line");
    assert!(last <= 0.02, "{last}");
    assert!(dir.path().join("sierpinski-seed42.trace").exists());
}

#[test]
fn too_few_steps_is_not_converged() {
    let dir = tempfile::tempdir().unwrap();
    let o = chaoscope(
        dir.path(),
        &["run", "--system", "sierpinski", "--x0", "1,1", "--steps", "20", "--ladder", "0,10", "--reference", "oracle"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged = false"));
}

#[test]
fn projective_run_without_reference_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = chaoscope(dir.path(), &["run", "--system", "projective-bv", "--steps", "2000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("reference = none"));
    assert!(dir.path().join("projective-bv-seed7.trace").exists());
}

#[test]
fn usage_and_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--system", "sierpinski", "--steps", "-5"][..],
        &["run", "--system", "no-such-system"],
        &["render"],
        &["frobnicate"],
        &["basin", "--system", "sierpinski", "--grid", "0,1,0,1,0,3"],
    ] {
        let o = chaoscope(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty(), "{args:?}");
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "system = \"sierpinski\"\nsteps = 10\nseed = \"abc\"\n").unwrap();
    let o = chaoscope(dir.path(), &["run", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:3:"), "{}", stderr(&o));

    fs::write(dir.path().join("sys.toml"), DOUBLING.replace("[[2.0]]", "[[2.0, 1.0]]")).unwrap();
    let o = chaoscope(dir.path(), &["run", "--system", "sys.toml", "--steps", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sys.toml:7:"), "{}", stderr(&o));
}

#[test]
fn expanding_system_trips_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("doubling.toml"), DOUBLING).unwrap();
    let o = chaoscope(dir.path(), &["run", "--system", "doubling.toml", "--steps", "1000"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = chaoscope(
        dir.path(),
        &["basin", "--system", "doubling.toml", "--grid", "-1,1,3", "--k-max", "200"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    let verdict = |x: &str| {
        table
            .lines()
            .find(|l| l.starts_with(x))
            .and_then(|l| l.split_whitespace().nth(1))
            .map(str::to_string)
    };
    assert_eq!(verdict("-1 ").as_deref(), Some("DIVERGED"), "{table}");
    assert_eq!(verdict("0 ").as_deref(), Some("ATTRACTED"), "{table}");
}

#[test]
fn seed_from_environment_yields_to_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_chaoscope"));
        c.args(["run", "--system", "sierpinski", "--steps", "100"]).args(extra).current_dir(dir.path());
        match env {
            Some(v) => c.env("CHAOSCOPE_SEED", v),
            None => c.env_remove("CHAOSCOPE_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    assert!(run(Some("5"), &[]).contains("seed = 5"));
    assert!(run(Some("5"), &["--seed", "9"]).contains("seed = 9"));
    assert!(run(None, &[]).contains("seed = 0"));
}

#[test]
fn single_point_cloud_renders_one_dark_pixel() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = PointCloud::from_raw(SpaceModel::Euclidean { dim: 2 }, [[0.25, 0.75]]).unwrap();
    fs::write(dir.path().join("one.cloud"), cloud.to_text()).unwrap();
    let o = chaoscope(
        dir.path(),
        &["render", "one.cloud", "--out", "one.pgm", "--width", "16", "--height", "16"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = fs::read(dir.path().join("one.pgm")).unwrap();
    let header = b"P5\n16 16\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    let pixels = &bytes[header.len()..];
    assert_eq!(pixels.len(), 256);
    assert_eq!(pixels.iter().filter(|p| **p < 255).count(), 1);
}

#[test]
fn sierpinski_render_fills_a_fraction_of_the_frame() {
    let dir = tempfile::tempdir().unwrap();
    let o = chaoscope(
        dir.path(),
        &["oracle", "--system", "sierpinski", "--out", "tri.cloud"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = chaoscope(
        dir.path(),
        &["render", "tri.cloud", "--out", "tri.pgm", "--width", "512", "--height", "512"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = fs::read(dir.path().join("tri.pgm")).unwrap();
    let pixels = &bytes[bytes.len() - 512 * 512..];
    let fill = pixels.iter().filter(|p| **p < 255).count() as f64 / pixels.len() as f64;
    assert!((0.03..=0.30).contains(&fill), "{fill}");
}
