use std::path::Path;
use std::process::{Command, Output};

fn tio2kit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tio2kit"))
        .args(args)
        .current_dir(dir)
        .env_remove("TIO2KIT_CONFIG_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn mcia_reports_the_anatase_001_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = tio2kit(&["mcia", "--film", "anatase", "--planes", "001,110"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# tool: tio2kit"));
    assert!(text.contains("# command: tio2kit mcia --film anatase --planes 001,110"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "substrate,substrate_plane,film,film_plane,area_A2,film_area_A2,n_sub_cells,n_film_cells,misfit_pct,rotation_deg,is_min"
    );
    let row = text.lines().find(|l| l.contains("anatase,001")).unwrap();
    let area: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((area - 64.0).abs() < 0.05 * 64.0, "{row}");
    assert!(row.ends_with("true"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = tio2kit(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_scan_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "two_theta,counts\n25.0,10\n25.1,abc\n").unwrap();
    let o = tio2kit(&["xrd-fit", "bad.csv", "--window", "25:26"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("bad.csv"), "{err}");
}

#[test]
fn flat_scan_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..200 {
        text.push_str(&format!("{},{}\n", 25.0 + 0.01 * i as f64, 100 + (i * 7919) % 5));
    }
    std::fs::write(dir.path().join("flat.csv"), text).unwrap();
    let o = tio2kit(&["xrd-fit", "flat.csv", "--window", "25:27"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: xrd-fit: ill-posed"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["vacancy", "scan", "--buffers", "0,5,10", "--out", "scan.csv"];
    let a = tio2kit(&args, dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    let first = std::fs::read(dir.path().join("scan.csv")).unwrap();
    tio2kit(&args, dir.path());
    assert_eq!(first, std::fs::read(dir.path().join("scan.csv")).unwrap());
}

#[test]
fn jobs_preserve_row_order() {
    let dir = tempfile::tempdir().unwrap();
    let body = |jobs: &str| {
        let o = tio2kit(&["mcia", "--substrate", "gaas,gasb,si", "--jobs", jobs], dir.path());
        assert!(o.status.success());
        stdout(&o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect::<Vec<_>>()
    };
    let seq = body("1");
    assert_eq!(seq.len(), 1 + 3 * 2 * 6);
    assert_eq!(body("8"), seq);
}

#[test]
fn plot_on_a_table_only_command_is_refused_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let o = tio2kit(
        &["film", "predict", "--substrate", "gaas", "--prep", "capped", "--tgrow", "390", "--plot", "x.svg"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!dir.path().join("x.svg").exists());
}

#[test]
fn map_plot_marks_minimum_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = tio2kit(&["mcia", "--film", "rutile", "--plot", "map.csv", "--out", "t.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let plot = std::fs::read_to_string(dir.path().join("map.csv")).unwrap();
    assert!(plot.starts_with("row,col,row_index,col_index,area_A2,min_marker\n"));
    assert_eq!(plot.lines().filter(|l| l.ends_with('*')).count(), 1);
    let o = tio2kit(&["mcia", "--film", "rutile", "--plot", "map.svg"], dir.path());
    assert!(o.status.success());
    assert!(std::fs::read_to_string(dir.path().join("map.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn config_dir_overrides_phase_rules() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("phase_rules.toml"), "t_rutile_c = 380.0\n").unwrap();
    let args = ["film", "predict", "--substrate", "gaas", "--prep", "capped", "--tgrow", "390", "--buffer-shots", "70"];
    let default = stdout(&tio2kit(&args, dir.path()));
    assert!(default.lines().last().unwrap().contains(",anatase,"));
    let mut with = args.to_vec();
    with.extend(["--config-dir", "."]);
    let o = tio2kit(&with, dir.path());
    assert!(stdout(&o).lines().last().unwrap().contains(",rutile,"), "{}", stdout(&o));
    assert!(stdout(&o).contains("# param: t_rutile_c=380"));

    std::fs::write(dir.path().join("phase_rules.toml"), "t_rutile = 380.0\n").unwrap();
    let o = tio2kit(&with, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("phase_rules.toml"));
}

#[test]
fn vacancy_sim_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[params]\nd_v = 0.01\ndz = 0.5\nincorporation = { kind = \"constant\", value = 0.05 }\n\
         annihilation = { kind = \"constant\", value = 0.001 }\n\n\
         [[segment]]\nduration_s = 200.0\nrate_nm_s = 0.05\npressure_torr = 0.0\nbuffer = true\n\n\
         [[segment]]\nduration_s = 300.0\nrate_nm_s = 0.0\npressure_torr = 0.02\n",
    )
    .unwrap();
    let o = tio2kit(&["vacancy", "sim", "run.toml", "--snapshots", "snap.csv", "--plot", "ts.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = stdout(&o);
    assert!(t.contains("t_s,thickness_nm,mean_c_frac"));
    assert!(t.contains("# note: well-mixed mean"));
    let snap = std::fs::read_to_string(dir.path().join("snap.csv")).unwrap();
    assert!(snap.contains("t_s,z_nm,c_frac"));
    assert!(std::fs::read_to_string(dir.path().join("ts.csv")).unwrap().starts_with("t_s,"));
}
