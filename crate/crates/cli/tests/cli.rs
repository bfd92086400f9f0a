use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use discovery_bounds::experiments::{run_power_experiment, simulate_study, write_power_csv, PowerScenario};
use discovery_bounds::{
    calibrate_lambda, condition_on_nulls, derive_stream, full_closure, hc_critical_value, higher_criticism, load_study,
    minimal_transversals, mr_lower_bound, preprocess, write_study, AnalysisConfig, HypothesisSet, LocalTest,
    PValueStudy, SetFamily,
};

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/data/demo.csv")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn dbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbounds")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = dbounds(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Runs a command expected to fail; returns its single stderr line.
fn failure(args: &[&str]) -> String {
    let out = dbounds(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    err
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn golden_demo_outputs() {
    let study = demo();
    let study = path_str(&study);
    assert_eq!(
        stdout(&["bound", "--study", study, "--alpha", "0.05", "--method", "simes", "--set", "h1,h2,h3"]),
        golden("bound_demo_all.txt")
    );
    assert_eq!(stdout(&["bound", "--study", study]), golden("bound_demo_all.txt"));
    assert_eq!(
        stdout(&["bound", "--study", study, "--set", "h3"]),
        golden("bound_demo_h3.txt")
    );

    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("defining.txt");
    stdout(&["closure", "--study", study, "--out-defining", path_str(&family)]);
    assert_eq!(std::fs::read_to_string(&family).unwrap(), golden("defining_demo.txt"));
    assert_eq!(
        stdout(&["dual", "--family", path_str(&family)]),
        golden("dual_demo.txt")
    );
    assert_eq!(
        stdout(&["dual", "--family", path_str(&family), "--known-null", "h1"]),
        golden("dual_demo_known_h1.txt")
    );

    // A family file without a universe line.
    let bare = dir.path().join("bare.txt");
    std::fs::write(&bare, "h1\nh2\n").unwrap();
    assert_eq!(stdout(&["dual", "--family", path_str(&bare)]), golden("dual_demo.txt"));
}

#[test]
fn csv_format() {
    let study = demo();
    assert_eq!(
        stdout(&["--format", "csv", "bound", "--study", path_str(&study)]),
        "size,d,alpha,engine\n3,2,0.05,closure\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("f.txt");
    std::fs::write(&family, "a,b\nb,c\n").unwrap();
    assert_eq!(
        stdout(&[
            "dual",
            "--family",
            path_str(&family),
            "--known-null",
            "a",
            "--format",
            "csv"
        ]),
        "kind,set\ntransversal,b\ntransversal,a;c\npruned,b\nimplicated,b\n"
    );
}

#[test]
fn validation_errors_exit_2_with_one_line() {
    let study = demo();
    let study = path_str(&study);
    let err = failure(&["bound", "--study", study, "--set", "h1,h9"]);
    assert!(err.contains("h9"), "{err}");
    assert!(failure(&["bound", "--study", study, "--alpha", "1.5"]).contains("alpha"));
    assert!(failure(&["bound", "--study", "/no/such/file.csv"]).contains("file.csv"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "label,p\nh1,0.5\nh2,1.5\n").unwrap();
    assert!(failure(&["bound", "--study", path_str(&bad)]).contains("line 3"));

    let config = dir.path().join("power.cfg");
    std::fs::write(&config, "m_grid=20\nbogus=1\n").unwrap();
    let out = dir.path().join("power.csv");
    assert!(failure(&["power", "--config", path_str(&config), "--out", path_str(&out)]).contains("bogus"));

    let family = dir.path().join("f.txt");
    std::fs::write(&family, "h1\nh2\n").unwrap();
    assert!(failure(&["dual", "--family", path_str(&family), "--known-null", "h7"]).contains("h7"));
}

#[test]
fn bound_picks_engine_by_size_and_method() {
    let dir = tempfile::tempdir().unwrap();
    for id in 0..10u64 {
        let mut s = derive_stream(31, id);
        let m = 3 + (s.next_u64() % 8) as usize;
        let p: Vec<f64> = (0..m)
            .map(|_| s.uniform() * if s.uniform() < 0.5 { 0.03 } else { 1.0 })
            .collect();
        let study = PValueStudy::from_pvalues(p).unwrap();
        let path = dir.path().join(format!("s{id}.csv"));
        write_study(&study, &path).unwrap();
        let mask = s.next_u64() & ((1 << m) - 1);
        let set = HypothesisSet::from_mask(mask);
        let labels = study.labels_of(&set).join(",");
        for test in [LocalTest::Simes, LocalTest::Fisher] {
            let d = full_closure(&study, &AnalysisConfig::new(0.1, test).unwrap())
                .unwrap()
                .discovery_bound(&set)
                .unwrap()
                .d;
            let out = stdout(&[
                "bound",
                "--study",
                path_str(&path),
                "--alpha",
                "0.1",
                "--method",
                test.name(),
                "--set",
                &labels,
            ]);
            assert_eq!(out, format!("size={} d={d} alpha=0.1 engine=closure\n", set.len()));
        }
        // Below m the closure is off-limits: Simes falls back to the shortcut, Fisher refuses.
        let d = preprocess(&study, 0.1).unwrap().shortcut_bound(&set).unwrap().d;
        let out = stdout(&[
            "bound",
            "--study",
            path_str(&path),
            "--alpha",
            "0.1",
            "--set",
            &labels,
            "--closure-cap",
            "2",
        ]);
        assert_eq!(out, format!("size={} d={d} alpha=0.1 engine=shortcut\n", set.len()));
        let err = failure(&[
            "bound",
            "--study",
            path_str(&path),
            "--method",
            "fisher",
            "--closure-cap",
            "2",
        ]);
        assert!(err.contains("simes"), "{err}");
    }
}

#[test]
fn closure_and_dual_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = derive_stream(32, 0);
    for id in 0..8 {
        let m = 4 + id % 6;
        let p: Vec<f64> = (0..m).map(|_| s.uniform() * 0.05).collect();
        let study = PValueStudy::from_pvalues(p).unwrap();
        let path = dir.path().join("s.csv");
        write_study(&study, &path).unwrap();
        let family_path = dir.path().join("f.txt");
        stdout(&[
            "closure",
            "--study",
            path_str(&path),
            "--method",
            "fisher",
            "--out-defining",
            path_str(&family_path),
        ]);
        let defining = full_closure(&study, &AnalysisConfig::new(0.05, LocalTest::Fisher).unwrap())
            .unwrap()
            .defining_family();
        let (loaded, labels) = SetFamily::load(&family_path).unwrap();
        assert_eq!(loaded, defining);

        let dual = minimal_transversals(&defining).unwrap();
        let known = HypothesisSet::from_mask(s.next_u64() & ((1 << m) - 1) & s.next_u64());
        let (kept, implicated) = condition_on_nulls(&dual, &known).unwrap();
        let mut expected: Vec<String> = dual
            .to_labels(&labels)
            .iter()
            .map(|t| format!("{{{}}}", t.join(",")))
            .collect();
        expected.push("pruned:".into());
        expected.extend(kept.to_labels(&labels).iter().map(|t| format!("{{{}}}", t.join(","))));
        expected.push(format!("implicated: {{{}}}", study.labels_of(&implicated).join(",")));
        let known_labels = study.labels_of(&known).join(",");
        let out = stdout(&[
            "dual",
            "--family",
            path_str(&family_path),
            "--known-null",
            &known_labels,
        ]);
        assert_eq!(out.lines().collect::<Vec<_>>(), expected);
    }
}

#[test]
fn global_statistics_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let study = simulate_study(200, 20, 0.01, &mut derive_stream(33, 0)).unwrap();
    let path = dir.path().join("s.csv");
    write_study(&study, &path).unwrap();

    let cfg = calibrate_lambda(200, 0.05, 1000, 4).unwrap();
    let out = stdout(&[
        "mr-bound",
        "--study",
        path_str(&path),
        "--calib-reps",
        "1000",
        "--seed",
        "4",
    ]);
    assert_eq!(
        out,
        format!(
            "mr_bound={} lambda={}\n",
            mr_lower_bound(&study, &cfg).unwrap(),
            cfg.lambda
        )
    );
    let cache = dir.path().join("cache");
    let args = [
        "mr-bound",
        "--study",
        path_str(&path),
        "--calib-reps",
        "1000",
        "--seed",
        "4",
        "--cache-dir",
        path_str(&cache),
    ];
    assert_eq!(stdout(&args), out);
    assert_eq!(stdout(&args), out);

    let hc = higher_criticism(&study).unwrap();
    assert_eq!(stdout(&["hc", "--study", path_str(&path)]), format!("hc={hc}\n"));
    let crit = hc_critical_value(200, 0.05, 1000, 5).unwrap();
    assert_eq!(
        stdout(&[
            "hc",
            "--study",
            path_str(&path),
            "--alpha",
            "0.05",
            "--reps",
            "1000",
            "--seed",
            "5"
        ]),
        format!("hc={hc} critical_value={crit} reject={}\n", hc > crit)
    );
}

#[test]
fn simulate_and_power_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.csv");
    stdout(&["simulate", "--m", "50", "--seed", "9", "--out", path_str(&sim)]);
    let expected = simulate_study(50, 10, 0.1, &mut derive_stream(9, 0)).unwrap();
    assert_eq!(load_study(&sim).unwrap(), expected);

    let config = dir.path().join("power.cfg");
    std::fs::write(
        &config,
        "# small grid\nm_grid=20,40\nreps=40\ncalibration_reps=1000\nseed=3\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    stdout(&["power", "--config", path_str(&config), "--out", path_str(&a)]);
    stdout(&[
        "power",
        "--config",
        path_str(&config),
        "--out",
        path_str(&b),
        "--cache-dir",
        path_str(dir.path()),
    ]);
    let scenario = PowerScenario::from_config_str(&std::fs::read_to_string(&config).unwrap()).unwrap();
    let mut expected = Vec::new();
    write_power_csv(
        &scenario,
        &run_power_experiment(&scenario, None).unwrap(),
        &mut expected,
    )
    .unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), expected);
    assert_eq!(std::fs::read(&b).unwrap(), expected);
}

#[test]
fn bench_writes_timing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("timing.cfg");
    std::fs::write(
        &config,
        "closure_m_grid=2,4\nshortcut_m_grid=1000\nlocal_tests=simes\nmin_sample_secs=0\n",
    )
    .unwrap();
    let out = dir.path().join("timing.csv");
    stdout(&["bench", "--config", path_str(&config), "--out", path_str(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows[0], ["method", "local_test", "m", "seconds"]);
    let keys: Vec<_> = rows[1..].iter().map(|r| (r[0], r[1], r[2])).collect();
    assert_eq!(
        keys,
        [
            ("full_closure", "simes", "2"),
            ("full_closure", "simes", "4"),
            ("shortcut", "simes", "1000")
        ]
    );
    assert!(rows[1..].iter().all(|r| r[3].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn serve_answers_http() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_dbounds"))
        .args([
            "serve",
            "--port",
            &port.to_string(),
            "--study-dir",
            path_str(dir.path()),
        ])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let request = |text: String| -> Option<String> {
        let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
        stream.write_all(text.as_bytes()).ok()?;
        let mut response = String::new();
        stream.read_to_string(&mut response).ok()?;
        Some(response)
    };
    let body = r#"{"labels":["h1","h2","h3"],"pvalues":[0.01,0.02,0.9],"alpha":0.05,"method":"simes"}"#;
    let post = format!(
        "POST /api/sessions HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    let start = Instant::now();
    let created = loop {
        if let Some(r) = request(post.clone()) {
            break r;
        }
        assert!(start.elapsed() < Duration::from_secs(20), "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    let id = created
        .split("\"id\":\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap()
        .to_string();
    let get = format!("GET /api/sessions/{id}/bound?ids=h1,h2,h3 HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n");
    let bound = request(get).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(created.starts_with("HTTP/1.1 200"), "{created}");
    assert!(bound.contains(r#""d":2"#), "{bound}");
    assert!(dir.path().join(format!("{id}.csv")).exists());
}
