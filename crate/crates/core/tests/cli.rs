use std::path::PathBuf;
use std::process::{Command, Output};

use coarsebound::chains::parse_dump;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarsebound")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coarsebound-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn vanish_line_table() {
    let out = bin(&["cert", "vanish", "--space", "zd:1", "--f", "const", "--rmax", "8", "--format", "tsv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for (r, line) in text.lines().skip(1).enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        let k: f64 = cols[1].parse().unwrap();
        assert!((k - (r as f64 + 1.0 - 0.5)).abs() < 1e-9);
    }
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn spread_check_and_dump_round_trip() {
    let dump = scratch("spread.txt");
    let out = bin(&["tails", "spread", "--space", "zd:2", "--radius", "9", "--check", "--chain-out", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["boundary_defects"], 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    let parsed = parse_dump(&text).unwrap();
    assert_eq!(coarsebound::chains::write_dump(&parsed.space, parsed.radius, &parsed.chain).unwrap(), text);

    let bd = bin(&["chain", "boundary", "--chain", dump.to_str().unwrap()]);
    assert!(bd.status.success());
    let b = parse_dump(std::str::from_utf8(&bd.stdout).unwrap()).unwrap();
    assert_eq!(b.chain.dim(), 0);
}

#[test]
fn exit_statuses() {
    assert_eq!(bin(&["cert", "vanish"]).status.code(), Some(1));
    assert_eq!(bin(&["space", "ball", "--space", "nope", "--radius", "2"]).status.code(), Some(2));
    assert_eq!(bin(&["cert", "vanish", "--space", "zd:1", "--rmax", "3", "--tol", "1e-9"]).status.code(), Some(1));
    let capped = Command::new(env!("CARGO_BIN_EXE_coarsebound"))
        .args(["space", "ball", "--space", "free:3", "--radius", "6"])
        .env("COARSEBOUND_BALL_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("radius 3"));
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("gap.json");
    let out = bin(&["spec", "gap", "--space", "zd:1", "--radius", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!((v["lambda_min"].as_f64().unwrap() - 0.30448).abs() < 1e-4);
}

#[test]
fn pushforward_maps() {
    let line = scratch("line.txt");
    assert!(bin(&["tails", "coset", "--space", "zd:1", "--radius", "4", "--chain-out", line.to_str().unwrap()]).status.success());
    let src = parse_dump(&std::fs::read_to_string(&line).unwrap()).unwrap();
    let padded = bin(&["chain", "push", "--chain", line.to_str().unwrap(), "--map", "pad", "--target", "zd:2"]);
    let p = parse_dump(std::str::from_utf8(&padded.stdout).unwrap()).unwrap();
    assert_eq!(p.chain.len(), src.chain.len());
    let mut coeffs_src: Vec<String> = src.chain.iter().map(|(_, c)| c.to_string()).collect();
    let mut coeffs_dst: Vec<String> = p.chain.iter().map(|(_, c)| c.to_string()).collect();
    coeffs_src.sort();
    coeffs_dst.sort();
    assert_eq!(coeffs_src, coeffs_dst);
    let collapsed = bin(&["chain", "push", "--chain", line.to_str().unwrap(), "--map", "collapse", "--target", "heis"]);
    assert!(parse_dump(std::str::from_utf8(&collapsed.stdout).unwrap()).unwrap().chain.is_empty());
}
