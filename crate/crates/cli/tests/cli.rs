use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-forcing"))
        .args(args)
        .output()
        .expect("failed to start the binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn force_query_answers() {
    let o = run(&["force-query", "1/3 v 1/2", "2/5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "true\n");

    let o = run(&["force-query", "1/3 v 1/2", "3/5"]);
    assert_eq!(stdout(&o), "false\n");

    let o = run(&["force-query", "1/2 v 1/3", "2/5 v 1/3"]);
    assert_eq!(stdout(&o), "true\n");

    let o = run(&["force-query", "2/5", "1/3 v 1/2"]);
    assert_eq!(stdout(&o), "false\n");
}

#[test]
fn non_neighbours_are_an_input_error() {
    let o = run(&["force-query", "1/4 v 1/2", "1/3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    let err = stderr(&o);
    assert!(err.contains("not Farey neighbors (determinant 2)"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn malformed_input_exits_two() {
    for args in [
        &["force-query", "1/3 v 1/2", "1 / 3"][..],
        &["force-query", "1/0", "1/3"],
        &["force-closure", "1/3 v 1/2", "--max-den", "x"],
        &["force-tree", "1/3 v 1/2", "--depth", "33"],
        &["markov-orbits", "1/3 v 1/2", "--max-period", "65"],
        &[
            "orbit-find",
            "--k",
            "-1",
            "--omega",
            "0",
            "--period",
            "1",
            "--wj",
            "0",
        ],
        &[
            "orbit-find",
            "--k",
            "0.5",
            "--omega",
            "zero",
            "--period",
            "1",
            "--wj",
            "0",
        ],
        &[
            "orbit-find",
            "--k",
            "0.5",
            "--omega",
            "0",
            "--period",
            "0",
            "--wj",
            "0",
        ],
        &["no-such-command"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn force_closure_lists_orbits_and_pairs() {
    let o = run(&["force-closure", "1/3 v 1/2", "--max-den", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let items = v.as_array().unwrap();
    // orbits 1/3, 2/5, 1/2 and pairs 1/3 v 1/2, 2/5 v 1/3, 2/5 v 1/2
    assert_eq!(items.len(), 6);
    let orbits: Vec<&str> = items
        .iter()
        .filter(|e| e["kind"] == "orbit")
        .map(|e| e["value"].as_str().unwrap())
        .collect();
    assert_eq!(orbits, ["1/3", "2/5", "1/2"]);
    assert!(items
        .iter()
        .any(|e| e["kind"] == "pair" && e["endpoints"] == serde_json::json!(["2/5", "1/2"])));
}

#[test]
fn force_tree_renders_levels() {
    let o = run(&["force-tree", "1/3 v 1/2", "--depth", "1"]);
    assert_eq!(stdout(&o), "1/3 v 1/2 -> 2/5\n  2/5 v 1/3\n  2/5 v 1/2\n");
}

#[test]
fn markov_verify_passes_on_the_example() {
    let o = run(&["markov-verify", "1/3 v 1/2", "--max-den", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS"), "{}", stdout(&o));
}

#[test]
fn markov_orbits_carry_rotation_numbers() {
    let o = run(&["markov-orbits", "1/3 v 1/2", "--max-period", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rotations: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["rotation"].as_str().unwrap())
        .collect();
    assert_eq!(rotations, ["1/2", "1/3", "2/5", "3/7", "3/8"]);
}

#[test]
fn markov_graph_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.dot");
    let o = run(&["markov-graph", "1/3 v 1/2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph markov {"));
    assert!(dot.contains(r#"r1 [label="r1:D"]"#));
    assert_eq!(dot.matches("->").count(), 10);
}

#[test]
fn orbit_find_reports_orbits_or_exits_three() {
    let o = run(&[
        "orbit-find",
        "--k",
        "2/15pi",
        "--omega",
        "1pi",
        "--period",
        "2",
        "--wj",
        "1",
        "--grid",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let orbits = v.as_array().unwrap();
    assert!(!orbits.is_empty());
    for orbit in orbits {
        assert_eq!(orbit["p"], 2);
        assert_eq!(orbit["w_J"], 1);
        assert_eq!(orbit["points"].as_array().unwrap().len(), 2);
        assert!(orbit["residual"].as_f64().unwrap() <= 1e-12);
    }
    assert!(orbits.iter().any(|o| o["stability"] == "elliptic"));

    let o = run(&[
        "orbit-find",
        "--k",
        "0.001",
        "--omega",
        "1",
        "--period",
        "2",
        "--wj",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).is_empty());
}

#[test]
fn sweep_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(
        &cfg,
        "# window\nk_max = 0.5\nnk = 4\nnomega = 6\nmax_period = 2\n",
    )
    .unwrap();
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let (a, b, svg) = (out("a.csv"), out("b.csv"), out("a.svg"));
    let cfg = cfg.to_str().unwrap();
    for csv in [&a, &b] {
        let o = run(&["sweep-run", "--config", cfg, "--csv", csv, "--svg", &svg]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    // header plus 4 x 6 cells x 2 classes
    assert_eq!(text.lines().count(), 1 + 4 * 6 * 2);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));

    // flags override the file
    let c = out("c.csv");
    let o = run(&[
        "sweep-run",
        "--config",
        cfg,
        "--csv",
        &c,
        "--nk",
        "2",
        "--periods",
        "1:0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&c).unwrap().lines().count(),
        1 + 2 * 6
    );

    let o = run(&[
        "sweep-run",
        "--config",
        cfg,
        "--csv",
        &c,
        "--max-period",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep-run", "--config", &out("missing.cfg"), "--csv", &c]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_inputs_give_identical_output() {
    for args in [
        &["force-closure", "2/5 v 1/2", "--max-den", "12"][..],
        &["markov-orbits", "1/4 v 1/3", "--max-period", "12"],
        &[
            "orbit-find",
            "--k",
            "0.5",
            "--omega",
            "0.3",
            "--period",
            "1",
            "--wj",
            "0",
        ],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}
