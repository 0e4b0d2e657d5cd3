use std::path::Path;
use std::process::{Command, Output};

fn dhn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhn")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = dhn(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn build_validate_eval_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let net = path(dir.path(), "sq.json");
    ok(&["build", "square", "--L", "3", "--p1", "1", "--skips", "1,0", "-o", &net]);
    assert!(ok(&["validate", &net]).starts_with("ok: skip network, depth 3"));

    let csv = ok(&["eval", &net, "--grid", "5"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x1,y1"));
    for line in lines {
        let (x, y) = line.split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!((x * x - y).abs() <= 0.25, "{line}");
    }

    let pts = path(dir.path(), "pts.csv");
    std::fs::write(&pts, "0.1\n0.9\n").unwrap();
    let out = path(dir.path(), "out.csv");
    ok(&["eval", &net, "--points", &pts, "-o", &out]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);

    let part: serde_json::Value = serde_json::from_str(&ok(&["pieces", &net, "--from", "0", "--to", "1"])).unwrap();
    let pieces = part["values"].as_array().unwrap().len();
    let sampled: usize = ok(&["pieces", &net, "--from", "0", "--to", "1", "--sampled", "10000"]).trim().parse().unwrap();
    assert_eq!(pieces, sampled);
}

#[test]
fn pc1d_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "spec.json");
    std::fs::write(&spec, r#"{"breakpoints":[0.5],"sides":[-1],"values":[0.0,2.0]}"#).unwrap();
    let net = path(dir.path(), "pc.json");
    ok(&["build", "pc1d", "--spec", &spec, "-o", &net]);
    let csv = ok(&["eval", &net, "--grid", "3"]);
    assert_eq!(csv, "x1,y1\n0,0\n0.5,0\n1,2\n");

    std::fs::write(&spec, r#"{"breakpoints":[0.5],"sides":["up"],"values":[0.0,2.0]}"#).unwrap();
    let out = dhn(&["build", "pc1d", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sides"));
}

#[test]
fn bounds_and_sweep() {
    let csv = ok(&["bounds", "--kind", "skip", "--L", "4", "--p", "8"]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "38400");

    let sweep = ok(&["sweep", "square", "--L", "2..3", "--s", "1..2", "--grid", "2001"]);
    assert_eq!(sweep.lines().count(), 5);
    for line in sweep.lines().skip(1) {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(ratio <= 1.0, "{line}");
    }
}

#[test]
fn shatter_certificate() {
    let cert: serde_json::Value = serde_json::from_str(&ok(&["shatter", "--kind", "skip", "--m", "1", "--n", "1"])).unwrap();
    assert_eq!(cert["failures"].as_array().unwrap().len(), 0);
    assert_eq!(cert["exhaustive"], true);
    let a = ok(&["shatter", "--kind", "lin", "--m", "2", "--n", "2", "--t", "1", "--samples", "50", "--seed", "9"]);
    let b = ok(&["shatter", "--kind", "lin", "--m", "2", "--n", "2", "--t", "1", "--samples", "50", "--seed", "9"]);
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    assert_eq!(dhn(&["--help"]).status.code(), Some(0));
    assert_eq!(dhn(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dhn(&["validate", "/nonexistent/net.json"]).status.code(), Some(2));

    // shape mismatch that only validation reports
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(
        &bad,
        r#"{"kind":"plain","depth":1,"widths":[1,2,1],"layers":[{"W":[[1.0]],"b":[0.0]},{"W":[[1.0,1.0]],"b":[0.0]}]}"#,
    )
    .unwrap();
    let out = dhn(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("invalid"));
}
