use std::path::PathBuf;

use rand::Rng;
use serde_json::Value;
use stochcoop::cli::run;
use stochcoop::harness;
use stochcoop::schema::{self, GameInput, NewsvendorFile};
use stochcoop_core::{ClassicalGame, Distribution, Family, StochasticGame};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("stochcoop").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--output", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = call(&full);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn game_files_round_trip() {
    let mut rng = harness::rng(81);
    let families = [Family::Normal, Family::Uniform, Family::Gamma, Family::DiscreteUniform, Family::AlphaCutUniform];
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let family = families[rng.random_range(0..5)];
        let alpha = rng.random_range(0.05..0.95);
        let count = rng.random_range(1..=4);
        let g = StochasticGame::from_fn(n, |_| harness::distribution(&mut rng, family, alpha, count)).unwrap();
        let input = GameInput::Stochastic(g);
        let text = schema::game_to_json(&input);
        assert_eq!(schema::parse_game(&text).unwrap(), input);
        assert_eq!(schema::game_to_json(&schema::parse_game(&text).unwrap()), text);
    }
    let mean = ClassicalGame::from_fn(3, |s| 0.1 * s.mask() as f64).unwrap();
    let lower = ClassicalGame::from_fn(3, |s| -(s.len() as f64) / 3.0).unwrap();
    let input = GameInput::Derived { mean, lower };
    assert_eq!(schema::parse_game(&schema::game_to_json(&input)).unwrap(), input);
}

#[test]
fn newsvendor_files_round_trip() {
    let mut rng = harness::rng(82);
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let prob = harness::newsvendor_problem(&mut rng, n);
        let text = serde_json::to_string(&NewsvendorFile::from_problem(&prob)).unwrap();
        assert_eq!(schema::parse_newsvendor(&text).unwrap(), prob);
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cases: [&[&str]; 4] = [
        &["game", "analyze", "--input", &data("uniform_pair.json"), "--allocation-type", "dr"],
        &["newsvendor", "analyze", "--input", &data("two_vendors.json")],
        &["--seed", "9", "selftest"],
        &["game", "check", "--input", &data("losing_pair.json"), "--allocation", &data("even_split.json")],
    ];
    for args in cases {
        for format in ["json", "text"] {
            let mut full = vec!["--output", format];
            full.extend_from_slice(args);
            assert_eq!(call(&full), call(&full));
        }
    }
}

#[test]
fn text_and_json_share_numbers() {
    let args = ["newsvendor", "analyze", "--input", &data("two_vendors.json")];
    let (_, v) = json(&args);
    let (_, text, _) = call(&args);
    for row in v["result"]["coalitions"].as_array().unwrap() {
        for key in ["protection", "market_quality", "order"] {
            assert!(text.contains(&row[key].to_string()), "{key}: {}", row[key]);
        }
    }
}

#[test]
fn three_player_examples() {
    let (code, v) = json(&["game", "analyze", "--input", &data("three_players.json"), "--allocation-type", "dr"]);
    assert_eq!((code, v["result"]["verdict"].as_str()), (0, Some("empty")));
    let (code, _) = json(&[
        "--fail-on-empty",
        "game",
        "analyze",
        "--input",
        &data("three_players.json"),
        "--allocation-type",
        "dr",
    ]);
    assert_eq!(code, 1);
    let (_, v) = json(&["game", "analyze", "--input", &data("three_players_raised.json"), "--allocation-type", "dr"]);
    assert_eq!(v["result"]["verdict"], "nonempty");
    assert!(v["result"]["witness_min_slack"].as_f64().unwrap() >= -1e-9);
    let (code, _, err) = call(&["game", "analyze", "--input", &data("three_players.json"), "--allocation-type", "r"]);
    assert_eq!(code, 2);
    assert!(err.contains("derived"), "{err}");
}

#[test]
fn analyze_writes_the_report_file() {
    let path = std::env::temp_dir().join(format!("stochcoop-report-{}.json", std::process::id()));
    let p = path.display().to_string();
    let (code, stdout) =
        json(&["game", "analyze", "--input", &data("normal_pair.json"), "--allocation-type", "dr", "--report", &p]);
    assert_eq!(code, 0);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(file, stdout);
    assert_eq!(file["result"]["witness_member"], true);
    assert_eq!(file["tolerance"], 1e-9);
    assert_eq!(file["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn single_player_is_nonempty_for_every_type() {
    for kind in ["r", "dr", "dr-signed"] {
        let (code, v) = json(&["game", "analyze", "--input", &data("single.json"), "--allocation-type", kind]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["verdict"], "nonempty", "{kind}");
    }
}

#[test]
fn newsvendor_reports() {
    let (code, v) = json(&["newsvendor", "analyze", "--input", &data("two_vendors.json")]);
    assert_eq!(code, 0);
    let r: Vec<f64> = v["result"]["witness"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((r[0] - 0.5).abs() < 1e-6 && (r[1] - 0.5).abs() < 1e-6, "{r:?}");
    let (code, v) = json(&["--fail-on-empty", "newsvendor", "analyze", "--input", &data("no_pooling.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["feasible"], false);
    assert_eq!(v["result"]["direct_feasible"], false);
}

#[test]
fn cdf_export_spans_the_widened_support() {
    let (code, csv, _) = call(&[
        "newsvendor",
        "export-cdf",
        "--input",
        &data("two_vendors.json"),
        "--coalition",
        "1,2",
        "--points",
        "160",
    ]);
    assert_eq!(code, 0);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,F"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, f) = l.split_once(',').unwrap();
            (x.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 161);
    // Profit of the pooled order: alpha-cut uniform on [-6, 10], width 16.
    assert!((rows[0].0 + 6.8).abs() < 1e-12 && (rows[160].0 - 10.8).abs() < 1e-12);
    let law = Distribution::alpha_cut_uniform(-6.0, 10.0, 0.5).unwrap();
    for (x, f) in rows {
        assert_eq!(f, law.cdf(x));
    }
    let (code, _, err) = call(&["newsvendor", "export-cdf", "--input", &data("two_vendors.json"), "--coalition", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains('3'), "{err}");
}

#[test]
fn ssd_compare_inline_and_across_families() {
    let x = r#"{"family":"alpha_cut_uniform","a":0,"b":5,"alpha":0.5}"#;
    let y = r#"{"family":"alpha_cut_uniform","a":-5,"b":5,"alpha":0.5}"#;
    let (code, v) = json(&["ssd", "compare", "--left", x, "--right", y, "--numeric"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["closed_form"]["verdict"], "left_dominates");
    assert_eq!(v["result"]["numeric"]["left_over_right"]["verdict"], "true");
    let n = r#"{"family":"normal","mu":0,"sigma2":1}"#;
    let u = r#"{"family":"uniform","a":-0.5,"b":1.5}"#;
    assert_eq!(call(&["ssd", "compare", "--left", n, "--right", u]).0, 2);
    let (code, v) = json(&["ssd", "compare", "--left", n, "--right", u, "--numeric"]);
    assert_eq!(code, 0);
    assert!(v["result"]["closed_form_error"].is_string());
    // Higher mean and thinner tails: the uniform law dominates the normal.
    assert_eq!(v["result"]["numeric"]["right_over_left"]["verdict"], "true");
}

#[test]
fn input_errors_exit_two_and_name_the_problem() {
    let dir = std::env::temp_dir();
    let write = |name: &str, body: &str| {
        let p = dir.join(format!("stochcoop-{}-{name}", std::process::id()));
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    };
    let missing = write(
        "missing.json",
        r#"{"players":2,"family":"normal","coalitions":{"1":{"mu":1,"sigma2":1},"2":{"mu":1,"sigma2":1}}}"#,
    );
    let (code, _, err) = call(&["game", "analyze", "--input", &missing, "--allocation-type", "r"]);
    assert_eq!(code, 2);
    assert!(err.contains("\"1,2\""), "{err}");
    let malformed = write("malformed.json", "{\"players\": 2,");
    assert_eq!(call(&["game", "analyze", "--input", &malformed, "--allocation-type", "r"]).0, 2);
    assert_eq!(call(&["--tolerance", "-1", "selftest"]).0, 2);
    assert_eq!(call(&["game", "check", "--input", &data("losing_pair.json"), "--allocation", &missing]).0, 2);
    let gamma = write("gamma.json", r#"{"players":1,"family":"gamma","coalitions":{"1":{"k":1,"theta":1}}}"#);
    let (code, _, err) = call(&["game", "analyze", "--input", &gamma, "--allocation-type", "dr"]);
    assert_eq!(code, 2);
    assert!(err.contains("gamma"), "{err}");
    for p in [missing, malformed, gamma] {
        std::fs::remove_file(p).unwrap();
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(call(&["--help"]).0, 0);
    let (code, out, _) = call(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(call(&["frobnicate"]).0, 2);
}
