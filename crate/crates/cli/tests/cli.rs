use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use foldkit::design::{export_map, sweep, SweepGrid};
use foldkit::model::{solve_equilibrium, BandSpec, HingeSpec, JointConfig};
use foldkit::net::{fold_net, read_net};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldkit"))
        .args(args)
        .env_remove("FOLDKIT_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn fields<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
    text.split_whitespace()
        .filter_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const YELLOW_EXAMPLE: &[&str] = &[
    "solve",
    "--layers",
    "2",
    "--layer-height-mm",
    "0.2",
    "--width-mm",
    "10",
    "--length-mm",
    "5",
    "--young-gpa",
    "2",
    "--band",
    "yellow",
    "--diameter-mm",
    "12",
    "--gamma",
    "0.9",
    "--kb",
    "100",
    "--spacing-mm",
    "30",
];

#[test]
fn solve_without_band_stiffness_stays_flat() {
    let out = run(&["solve", "--layers", "1", "--kb", "0", "--spacing-mm", "30"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).lines().any(|l| l == "alpha_deg=180.0000"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn zero_layers_is_an_input_error_naming_layers() {
    let out = run(&["solve", "--layers", "0", "--kb", "100", "--spacing-mm", "30"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("layers"), "{}", stderr(&out));
}

#[test]
fn solve_matches_library_bit_for_bit() {
    let out = run(YELLOW_EXAMPLE);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let printed: f64 = field(&stdout(&out), "alpha_rad").parse().unwrap();

    let hinge = HingeSpec::with_layers(2, 0.2 / 1e3, 10.0 / 1e3, 5.0 / 1e3)
        .unwrap()
        .with_young_modulus(2.0 * 1e9)
        .unwrap();
    let band = BandSpec::new("yellow", 12.0 / 1e3, 100.0)
        .unwrap()
        .with_gamma(0.9)
        .unwrap();
    let joint = JointConfig::new(hinge, band, 30.0 / 1e3).unwrap();
    let solved = solve_equilibrium(&joint).unwrap();
    assert_eq!(printed.to_bits(), solved.alpha.to_bits());
}

#[test]
fn placeholder_band_stiffness_warns() {
    let out = run(&["solve", "--layers", "1", "--spacing-mm", "30"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("requires calibration"), "{}", stderr(&out));
    let quiet = run(&["solve", "--layers", "1", "--spacing-mm", "30", "--kb", "120"]);
    assert!(!stderr(&quiet).contains("warning"));
}

#[test]
fn map_writes_library_export() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("map.csv");
    let out = run(&[
        "map",
        "--bands",
        "yellow",
        "--kb",
        "120",
        "--layers",
        "1,3",
        "--spacings-mm",
        "20,40,60",
        "--layer-height-mm",
        "0.2",
        "--width-mm",
        "10",
        "--length-mm",
        "5",
        "--young-gpa",
        "2",
        "--out",
        path(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "rows=6");

    let band = BandSpec::new("yellow", 12.0 / 1e3, 120.0)
        .unwrap()
        .with_gamma(0.9)
        .unwrap();
    let hinges = [1, 3]
        .iter()
        .map(|&n| {
            HingeSpec::with_layers(n, 0.2 / 1e3, 10.0 / 1e3, 5.0 / 1e3)
                .unwrap()
                .with_young_modulus(2.0 * 1e9)
                .unwrap()
        })
        .collect();
    let spacings = [20.0, 40.0, 60.0].iter().map(|v| v / 1e3).collect();
    let grid = SweepGrid::new(spacings, vec![band], hinges).unwrap();
    assert_eq!(fs::read_to_string(&file).unwrap(), export_map(&sweep(&grid).unwrap()));
}

#[test]
fn map_default_grid_row_count_and_header() {
    let out = run(&["map", "--kb", "120"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "band,layers,hook_spacing_mm,alpha_deg,band_slack,stop_limited"
    );
    assert_eq!(text.lines().count(), 1 + 3 * 3 * 21);
    assert!(stderr(&out).contains("rows=189"));
}

#[test]
fn map_rejects_mismatched_stiffness_list() {
    let out = run(&["map", "--bands", "yellow,black", "--kb", "1,2,3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn design_polyhedron_is_an_alias_for_its_target() {
    let explicit = run(&["design", "--target-deg", "90", "--kb", "120"]);
    let alias = run(&["design", "--polyhedron", "cube", "--kb", "120"]);
    let both = run(&["design", "--target-deg", "90", "--polyhedron", "cube", "--kb", "120"]);
    assert_eq!(code(&explicit), 0, "{}", stderr(&explicit));
    assert_eq!(stdout(&explicit), stdout(&alias));
    assert_eq!(stdout(&explicit), stdout(&both));
    assert_eq!(field(&stdout(&alias), "within_tolerance"), "true");
}

#[test]
fn unreachable_target_exits_one_with_best_candidate() {
    let out = run(&["design", "--target-deg", "10", "--kb", "120"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert_eq!(field(&text, "within_tolerance"), "false");
    let predicted: f64 = field(&text, "predicted_deg").parse().unwrap();
    assert!(predicted > 10.0);
}

#[test]
fn design_without_target_is_rejected() {
    assert_eq!(code(&run(&["design", "--kb", "120"])), 2);
}

#[test]
fn canonical_cube_closes_at_target_angles() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("cube.json");
    let geometry = dir.path().join("cube.csv");
    let out = run(&["net", "--polyhedron", "cube", "--edge-mm", "30", "--out", path(&net)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "faces=6 hinges=5 mating=7");

    let out = run(&["fold", "--net", path(&net), "--geometry", path(&geometry)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let closure: f64 = field(&text, "closure_error_m").parse().unwrap();
    assert!(closure < 1e-9, "{closure}");
    assert_eq!(fields(&text, "angle_deg"), vec!["90.0000"; 5]);

    let csv = fs::read_to_string(&geometry).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "face,vertex,x_mm,y_mm,z_mm");
    assert_eq!(csv.lines().count(), 1 + 6 * 4);
}

#[test]
fn fold_reads_angle_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("cube.json");
    let angles = dir.path().join("angles.csv");
    run(&["net", "--polyhedron", "cube", "--out", path(&net)]);
    fs::write(&angles, "hinge,angle_deg\n0,90\n1,90\n2,90\n3,90\n4,80\n").unwrap();
    let out = run(&["fold", "--net", path(&net), "--angles", path(&angles)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let closure: f64 = field(&stdout(&out), "closure_error_m").parse().unwrap();
    assert!(closure > 1e-4 * 0.03);

    fs::write(&angles, "hinge,angle_deg\n0,90\n").unwrap();
    let out = run(&["fold", "--net", path(&net), "--angles", path(&angles)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("hinge 1"), "{}", stderr(&out));
}

#[test]
fn predict_with_slack_bands_stays_flat() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cube.json");
    let out = run(&[
        "net",
        "--polyhedron",
        "cube",
        "--layers",
        "1",
        "--kb",
        "0",
        "--spacing-mm",
        "30",
        "--out",
        path(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["fold", "--net", path(&file), "--predict"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(fields(&text, "state"), vec!["flat"; 5]);
    let printed: f64 = field(&text, "closure_error_m").parse().unwrap();

    let net = read_net(&file).unwrap();
    let flat = fold_net(&net, &vec![PI; net.hinges.len()]).unwrap();
    assert_eq!(printed, flat.closure_error);
    assert!(printed > 0.01);
}

#[test]
fn cyclic_net_is_rejected_naming_faces() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ring.json");
    let hinge = |a: &str, b: &str, ea: [u32; 2], eb: [u32; 2]| {
        format!(
            r#"{{"face_a": "{a}", "face_b": "{b}", "edge_a": [{}, {}], "edge_b": [{}, {}], "target_angle_deg": 90}}"#,
            ea[0], ea[1], eb[0], eb[1]
        )
    };
    let text = format!(
        r#"{{
            "faces": [
                {{"id": "a", "vertices": [[0, 0], [30, 0], [30, 30], [0, 30]]}},
                {{"id": "b", "vertices": [[30, 0], [60, 0], [60, 30], [30, 30]]}},
                {{"id": "c", "vertices": [[30, 30], [60, 30], [60, 60], [30, 60]]}},
                {{"id": "d", "vertices": [[0, 30], [30, 30], [30, 60], [0, 60]]}}
            ],
            "hinges": [{}, {}, {}, {}],
            "root_face": "a"
        }}"#,
        hinge("a", "b", [1, 2], [0, 3]),
        hinge("b", "c", [2, 3], [0, 1]),
        hinge("c", "d", [3, 0], [1, 2]),
        hinge("d", "a", [0, 1], [2, 3]),
    );
    fs::write(&file, text).unwrap();
    let out = run(&["fold", "--net", path(&file)]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("cycle") && err.contains("`d`") && err.contains("`a`"),
        "{err}"
    );
}

#[test]
fn missing_net_file_is_an_io_error() {
    let out = run(&["fold", "--net", "/nonexistent/net.json"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn zero_schedule_stays_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("s.csv");
    let traj = dir.path().join("t.csv");
    fs::write(&schedule, "duty1,duty2,duration_s\n0,0,2\n").unwrap();
    let out = run(&["sim", "--schedule", path(&schedule), "--out", path(&traj)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(&traj).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x_m,y_m,heading_rad");
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&cols[1..], &[0.0, 0.0, 0.0]);
        rows += 1;
    }
    assert_eq!(rows, 2001);
}

#[test]
fn single_motor_sweep_prints_decreasing_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("s.csv");
    let traj = dir.path().join("t.csv");
    fs::write(
        &schedule,
        "duty1,duty2,duration_s\n0.392,0,5\n0.588,0,5\n0.784,0,5\n0.98,0,5\n",
    )
    .unwrap();
    let out = run(&[
        "sim",
        "--straight-pair",
        "43.1,31.4",
        "--schedule",
        path(&schedule),
        "--out",
        path(&traj),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let kappas: Vec<f64> = fields(&stdout(&out), "curvature_per_m")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(kappas.len(), 4);
    assert!(kappas.windows(2).all(|w| w[1] < w[0]), "{kappas:?}");
}

#[test]
fn straightening_pair_drives_straight() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("s.csv");
    let traj = dir.path().join("t.csv");
    fs::write(&schedule, "duty1,duty2,duration_s\n0.431,0.314,10\n0.431,0.431,10\n").unwrap();
    let out = run(&[
        "sim",
        "--straight-pair",
        "43.1,31.4",
        "--schedule",
        path(&schedule),
        "--out",
        path(&traj),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let kappas: Vec<f64> = fields(&stdout(&out), "curvature_per_m")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(kappas[0].abs() < 0.02 * kappas[1].abs(), "{kappas:?}");
}

#[test]
fn straight_reports_calibrated_duty() {
    let out = run(&["straight", "--straight-pair", "43.1,31.4", "--duty1", "43.1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let duty: f64 = field(&stdout(&out), "duty2").parse().unwrap();
    assert!((duty - 0.314).abs() < 1e-6, "{duty}");

    let out = run(&["straight", "--straight-pair", "43.1", "--duty1", "43.1"]);
    assert_eq!(code(&out), 2);
    let out = run(&["straight", "--bias", "0", "--duty1", "43.1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(field(&stdout(&out), "duty2"), "0.431");
}

#[test]
fn straight_without_root_exits_one() {
    let out = run(&["straight", "--bias", "5", "--duty1", "50"]);
    assert_eq!(code(&out), 1);
    assert_eq!(field(&stdout(&out), "duty2"), "none");
}

#[test]
fn malformed_schedule_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("s.csv");
    fs::write(&schedule, "duty1,duty2,duration_s\n1.5,0,1\n").unwrap();
    assert_eq!(code(&run(&["sim", "--schedule", path(&schedule)])), 2);
    fs::write(&schedule, "a,b\n1,2\n").unwrap();
    assert_eq!(code(&run(&["sim", "--schedule", path(&schedule)])), 2);
}

#[test]
fn unit_a_log_gives_one_docking_event() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("hall.csv");
    let events = dir.path().join("events.csv");
    let out = run(&[
        "synth",
        "--kind",
        "hall",
        "--stats",
        "unit-a",
        "--spans",
        "0:5,1:8,0:5",
        "--seed",
        "3",
        "--out",
        path(&log),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["classify", "--kind", "hall", "--in", path(&log), "--out", path(&events)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "events"), "1");
    let csv = fs::read_to_string(&events).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "hall");
    let onset: f64 = row[0].parse().unwrap();
    let release: f64 = row[1].parse().unwrap();
    assert!((onset - 5.0).abs() < 0.2 && (release - 13.0).abs() < 0.2, "{row:?}");
}

#[test]
fn constant_log_has_no_events() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("flat.csv");
    let mut text = String::from("t,value\n");
    for k in 0..500 {
        text.push_str(&format!("{},{}\n", k as f64 / 100.0, 512.0));
    }
    fs::write(&log, text).unwrap();
    for kind in ["hall", "touch"] {
        let out = run(&["classify", "--kind", kind, "--in", path(&log)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out), "onset_t,release_t,kind\n");
        assert!(stderr(&out).contains("events=0"));
    }
    let out = run(&["classify", "--kind", "hall", "--in", path(&log), "--snr"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn touch_log_snr_near_reference() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("touch.csv");
    let out = run(&[
        "synth",
        "--kind",
        "touch",
        "--stats",
        "touch",
        "--spans",
        "0:60,1:60",
        "--out",
        path(&log),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let events = dir.path().join("events.csv");
    let out = run(&[
        "classify",
        "--kind",
        "touch",
        "--in",
        path(&log),
        "--snr",
        "--out",
        path(&events),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let snr: f64 = field(&stdout(&out), "snr_db").parse().unwrap();
    assert!((snr - 20.15).abs() < 0.3, "{snr}");
}

#[test]
fn malformed_log_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.csv");
    fs::write(&log, "t,value\n0,1\n0.01,x\n").unwrap();
    assert_eq!(code(&run(&["classify", "--kind", "hall", "--in", path(&log)])), 2);
    assert_eq!(code(&run(&["classify", "--kind", "magnet", "--in", path(&log)])), 2);
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("foldkit.toml");
    fs::write(
        &config,
        "[bands.yellow]\ninner_diameter_mm = 12.0\nstiffness_n_per_m = 0.0\n\n[output]\ndecimals = 2\n",
    )
    .unwrap();
    let args = ["solve", "--layers", "1", "--spacing-mm", "30"];

    let mut with_file = vec!["--config", path(&config)];
    with_file.extend(args);
    let out = run(&with_file);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "alpha_deg"), "180.00");
    assert!(!stderr(&out).contains("warning"), "calibrated preset should not warn");

    with_file.extend(["--kb", "120"]);
    let flagged = run(&with_file);
    let reference = run(&["solve", "--layers", "1", "--spacing-mm", "30", "--kb", "120"]);
    let expected: f64 = field(&stdout(&reference), "alpha_rad").parse().unwrap();
    assert_eq!(field(&stdout(&flagged), "alpha_rad").parse::<f64>().unwrap(), expected);

    let via_env = Command::new(env!("CARGO_BIN_EXE_foldkit"))
        .args(args)
        .env("FOLDKIT_CONFIG", &config)
        .output()
        .unwrap();
    assert_eq!(stdout(&via_env), stdout(&out));
}

#[test]
fn bad_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[solver]\ngrid_step = -1\n").unwrap();
    let out = run(&[
        "--config",
        path(&config),
        "solve",
        "--layers",
        "1",
        "--spacing-mm",
        "30",
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "--config",
        "/nonexistent.toml",
        "solve",
        "--layers",
        "1",
        "--spacing-mm",
        "30",
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("s.csv");
    fs::write(&schedule, "duty1,duty2,duration_s\n0.6,0.4,3\n").unwrap();
    let runs: Vec<Vec<&str>> = vec![
        YELLOW_EXAMPLE.to_vec(),
        vec!["map", "--kb", "120"],
        vec!["design", "--polyhedron", "dodecahedron", "--kb", "120"],
        vec!["net", "--polyhedron", "octahedron"],
        vec![
            "sim",
            "--schedule",
            path(&schedule),
            "--noise-sigma",
            "0.3",
            "--seed",
            "9",
        ],
        vec![
            "synth",
            "--kind",
            "touch",
            "--stats",
            "touch",
            "--taps-bpm",
            "90",
            "--duration",
            "20",
            "--seed",
            "4",
        ],
    ];
    for args in runs {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stderr, b.stderr, "{args:?}");
        assert_eq!(a.status, b.status, "{args:?}");
    }
}

#[test]
fn version_and_help() {
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("foldkit "));
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    for cmd in ["solve", "map", "design", "fold", "sim", "classify"] {
        assert!(stdout(&out).contains(cmd), "{cmd}");
    }
}
