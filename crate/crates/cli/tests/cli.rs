use std::process::{Command, Output};

use serde_json::Value;

fn cubehom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubehom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_timing(mut v: Value) -> Value {
    if let Some(m) = v.as_object_mut() {
        m.remove("elapsed_ms");
    }
    v
}

#[test]
fn pentagon_h2_vanishes() {
    let out = cubehom(&["homology", "--gen", "cycle:5", "--dim", "2", "--ring", "z"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["betti"], 0);
    assert_eq!(v["torsion"], serde_json::json!([]));
}

#[test]
fn subdivision_golden_chain() {
    let v = json_of(&cubehom(&[
        "subdivide",
        "--gen",
        "cycle:5",
        "--cube",
        "1,2,2,3",
        "--N",
        "3",
    ]));
    let terms: Vec<(Vec<u64>, i64)> = v["chain"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["labels"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|x| x.as_u64().unwrap())
                    .collect(),
                t["coeff"].as_i64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        terms,
        vec![
            (vec![1, 1, 1, 2], 2),
            (vec![1, 2, 2, 2], 3),
            (vec![2, 2, 2, 3], 1)
        ]
    );
}

#[test]
fn tower_has_a_2_class() {
    let v = json_of(&cubehom(&[
        "homology",
        "--gen",
        "times:cycle:5:4",
        "--dim",
        "2",
        "--ring",
        "q",
    ]));
    assert_eq!(v["betti"], 1);
}

#[test]
fn exit_codes() {
    assert_eq!(
        cubehom(&["homology", "--gen", "nonsense", "--dim", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cubehom(&["subdivide", "--gen", "cycle:5", "--cube", "0,2", "--N", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cubehom(&[
            "enumerate",
            "--gen",
            "cycle:5",
            "--dim",
            "3",
            "--max-cubes",
            "5"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        cubehom(&["mv-check", "--gen", "times:cycle:5:2", "--k", "2"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        cubehom(&[
            "homology",
            "--gen",
            "cycle:5",
            "--dim",
            "1",
            "--no-such-flag"
        ])
        .status
        .code(),
        Some(64)
    );
    assert_eq!(cubehom(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn homotopy_check_fails_loudly_on_the_triangle() {
    let out = cubehom(&["verify-homotopy", "--gen", "cycle:3", "--cube", "0,1,0,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lift"));
}

#[test]
fn threads_do_not_change_results() {
    for args in [
        vec!["homology", "--gen", "petersen", "--dim", "2", "--ring", "z"],
        vec!["enumerate", "--gen", "octahedron", "--dim", "2", "--list"],
        vec![
            "verify-homotopy",
            "--gen",
            "cycle:6",
            "--dim",
            "3",
            "--samples",
            "30",
            "--seed",
            "7",
        ],
        vec!["compare-covering", "--gen", "wheel:5", "--dmax", "2"],
    ] {
        let runs: Vec<Value> = ["1", "4"]
            .iter()
            .map(|t| {
                let mut a = args.clone();
                a.extend(["--threads", t]);
                without_timing(json_of(&cubehom(&a)))
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{args:?}");
    }
}

#[test]
fn seed_determines_samples() {
    let a = cubehom(&[
        "verify-homotopy",
        "--gen",
        "cycle:7",
        "--dim",
        "2",
        "--samples",
        "20",
        "--seed",
        "3",
    ]);
    let b = cubehom(&[
        "verify-homotopy",
        "--gen",
        "cycle:7",
        "--dim",
        "2",
        "--samples",
        "20",
        "--seed",
        "3",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn cache_dir_round_trip() {
    let dir = std::env::temp_dir().join(format!("cubehom-cli-cache-{}", std::process::id()));
    let d = dir.to_str().unwrap();
    let first = json_of(&cubehom(&[
        "enumerate",
        "--gen",
        "petersen",
        "--dim",
        "2",
        "--cache-dir",
        d,
    ]));
    assert!(std::fs::read_dir(&dir).unwrap().count() > 0);
    let second = json_of(&cubehom(&[
        "enumerate",
        "--gen",
        "petersen",
        "--dim",
        "2",
        "--cache-dir",
        d,
    ]));
    assert_eq!(first, second);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn graph_file_and_out_flag() {
    let dir = std::env::temp_dir().join(format!("cubehom-cli-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let gen = json_of(&cubehom(&["gen", "--gen", "cycle:4"]));
    assert_eq!(gen["vertices"], 4);
    let file = dir.join("square.txt");
    std::fs::write(&file, "4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let out = dir.join("h1.json");
    let status = cubehom(&[
        "homology",
        "--graph",
        file.to_str().unwrap(),
        "--dim",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["betti"], 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cellular_and_restricted() {
    let cell = json_of(&cubehom(&["cellular", "--gen", "octahedron", "--dim", "2"]));
    assert_eq!(cell["betti"], 4);
    let cov = json_of(&cubehom(&[
        "homology",
        "--gen",
        "hypercube:3",
        "--dim",
        "2",
        "--restriction",
        "covering",
        "--ring",
        "z",
    ]));
    assert_eq!(cov["betti"], 1);
    let tp = json_of(&cubehom(&[
        "homology",
        "--gen",
        "cycle:5",
        "--dim",
        "1",
        "--restriction",
        "two_point",
    ]));
    assert_eq!(tp["betti"], 1);
}
