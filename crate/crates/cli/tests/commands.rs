use std::path::PathBuf;
use std::process::{Command, Output};

use deuce_cli::sweep::read_sweep_csv;

fn deuce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deuce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

/// `metric -> (closed_form, engine)` from eval CSV output.
fn eval_table(o: &Output) -> Vec<(String, String, String)> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2].to_string())
        })
        .collect()
}

#[test]
fn eval_existing_game_at_half() {
    let o = deuce(&["eval", "--game", "T", "--p", "0.5"]);
    assert!(o.status.success());
    let t = eval_table(&o);
    assert_eq!(t[0], ("win".into(), "0.500000".into(), "0.500000".into()));
    assert_eq!(t[1].2, "0.604167");
    assert_eq!(t[2].2, "6.750000");
}

#[test]
fn eval_deuce_only_game() {
    let o = deuce(&["eval", "--game", "A", "--p", "0.696"]);
    assert!(o.status.success());
    assert_eq!(eval_table(&o)[0].2, "0.839787");
}

#[test]
fn eval_single_serve_rule_json() {
    let o = deuce(&[
        "--json", "eval", "--game", "C", "--pf", "0.696", "--ps", "0.55", "--x", "3",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let e = &v["engine"];
    assert!((e["win_prob"].as_f64().unwrap() - 0.749).abs() < 1e-3);
    assert!((e["bp_prob"].as_f64().unwrap() - 0.345).abs() < 1e-3);
    assert!((e["expected_points"].as_f64().unwrap() - 6.378).abs() < 1e-3);
    assert!(v["max_gap"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["schedule"], "FFFsss(s)*");
}

#[test]
fn eval_without_closed_form_reports_engine_only() {
    let o = deuce(&["eval", "--game", "C5", "--pf", "0.7", "--ps", "0.5"]);
    assert!(o.status.success());
    let t = eval_table(&o);
    assert_eq!(t[0].1, "");
    assert!(!t[0].2.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["eval", "--game", "C", "--p", "0.5"],
        vec!["eval", "--game", "Q", "--p", "0.5"],
        vec!["eval", "--game", "T", "--p", "1.5"],
        vec!["eval", "--game", "B", "--pf", "0.5"],
        vec!["eval", "--game", "T", "--x", "3", "--p", "0.5"],
        vec!["eval", "--game", "T", "--p", "0.5", "--pf", "0.4"],
        vec!["sweep", "--games", "A", "--start", "0.5", "--stop", "0.4"],
        vec!["nonsense"],
    ] {
        let o = deuce(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_round_trips_and_plots() {
    let csv = scratch("sweep_a_t.csv");
    let svg = scratch("sweep_a_t.svg");
    let o = deuce(&[
        "sweep",
        "--games",
        "A,T",
        "--metrics",
        "win,points",
        "--step",
        "0.01",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_sweep_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 101);
    let at = |game: &str, metric: &str, p: f64| {
        rows.iter()
            .find(|r| r.game == game && r.metric == metric && (r.p - p).abs() < 1e-9)
            .unwrap()
            .value
    };
    assert_eq!(at("A", "win", 0.5), 0.5);
    assert_eq!(at("T", "win", 0.5), 0.5);
    let (peak, arg) = rows
        .iter()
        .filter(|r| r.game == "T" && r.metric == "points")
        .fold((0.0, 0.0), |acc, r| if r.value > acc.0 { (r.value, r.p) } else { acc });
    assert_eq!((peak, arg), (6.75, 0.5));

    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 4);
    assert!(plot.contains("E_T"));
}

#[test]
fn sweep_with_delta_puts_alternating_game_on_partner() {
    let o = deuce(&[
        "sweep",
        "--games",
        "Bj,B",
        "--metrics",
        "win",
        "--var",
        "p_F",
        "--delta",
        "0.05",
        "--step",
        "0.05",
    ]);
    assert!(o.status.success());
    let rows = read_sweep_csv(o.stdout.as_slice()).unwrap();
    let bj = rows
        .iter()
        .find(|r| r.game == "Bj1" && (r.p_f - 0.5).abs() < 1e-9)
        .unwrap();
    assert_eq!(bj.value, 0.55);
    assert!(rows.iter().all(|r| r.p_s <= 1.0));
}

#[test]
fn fit_bundled_sample() {
    let o = deuce(&["fit"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("rank,name,p_emp,predicted,observed,residual"));
    assert_eq!(out.lines().count(), 1 + 6);
}

#[test]
fn fit_perfect_rows_have_zero_residual() {
    let path = scratch("perfect.csv");
    // p_emp = 1 * 0.6 and p_t_won set to the model value at 0.6.
    let predicted = deuce::closed_form::p_win_t(deuce::Probability::new(0.6).unwrap()).value();
    std::fs::write(
        &path,
        format!("rank,name,p_f_in,p_f_won,p_s_won,p_t_won\n3,Model,1.0,0.6,0.5,{predicted}\n"),
    )
    .unwrap();
    let o = deuce(&["--json", "fit", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["summary"]["max_abs_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn data_errors_exit_three_with_line_numbers() {
    let path = scratch("bad.csv");
    std::fs::write(
        &path,
        "rank,name,p_f_in,p_f_won,p_s_won,p_t_won\n1,A,0.6,0.7,0.5,0.8\n2,B,0.6,1.7,0.5,0.8\n",
    )
    .unwrap();
    let o = deuce(&["fit", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = deuce(&["fit", "/nonexistent/stats.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let o = deuce(&["shape", "--low", "Nobody"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn empty_stats_file_is_a_usage_error() {
    let path = scratch("empty.csv");
    std::fs::write(&path, "").unwrap();
    assert_eq!(deuce(&["fit", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, "rank,name,p_f_in,p_f_won,p_s_won,p_t_won\n").unwrap();
    assert_eq!(deuce(&["fit", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn shape_defaults_pick_the_two_named_players() {
    let o = deuce(&["shape"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("low,T. Gabashvili"));
    assert!(out.contains("high,R. Federer"));
    assert!(out.contains("x_recommended,3"));
    let o = deuce(&["--json", "shape", "--low", "200", "--high", "federer"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["x_recommended"], 3);
}

#[test]
fn compare_six_decimal_csv_and_three_decimal_echo() {
    let o = deuce(&["compare", "--x", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row7 = out.lines().find(|l| l.starts_with("7,")).unwrap();
    assert!(row7.starts_with("7,0.696000,0.550000,0.895958,0.749280,0.204935,0.345079,5.861318,6.377608,"));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("7,0.696,0.550,0.896,0.749,0.205,0.345,5.861,6.378,"));
}

#[test]
fn simulate_is_deterministic_and_close() {
    let args = [
        "simulate", "--game", "T", "--p", "0.696", "--n", "200000", "--seed", "1",
    ];
    let a = deuce(&args);
    let b = deuce(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    for line in stdout(&a).lines().skip(1) {
        let z: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(z.abs() <= 4.0, "{line}");
    }
}

#[test]
fn simulate_single_game_has_no_standard_error() {
    let o = deuce(&["--json", "simulate", "--game", "T", "--p", "0.6", "--n", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for m in v["metrics"].as_array().unwrap() {
        assert!(m["std_err"].is_null());
        assert!(m["z"].is_null());
    }
}

#[test]
fn simulate_deuce_cap_is_reported() {
    let o = deuce(&[
        "simulate",
        "--game",
        "A",
        "--p",
        "0.5",
        "--n",
        "1000",
        "--max-deuce-cycles",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("deuce"));
}
