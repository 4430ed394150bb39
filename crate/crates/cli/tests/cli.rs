use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qees_cli::aggregate::{mean_std, read_aggregate};
use qees_cli::plot::data_path;

fn qees(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qees")).args(args).output().unwrap()
}

fn write_config(dir: &Path, variant: &str, generations: u64) -> PathBuf {
    let trap = if variant == "deceptive" {
        "[environment.trap]\nfront_wall_x = 4.0\nside_wall_y = 2.0\nside_wall_length = 4.0\nwall_thickness = 0.2\n"
    } else {
        ""
    };
    let text = format!(
        r#"format_version = 1

[run]
mode = "quality_evolvability"
population = 16
sigma = 0.05
generations = {generations}

[noise]
length = 20000

[task]
kind = "locomotion"

[environment]
variant = "{variant}"
max_steps = 40
{trap}
[policy]
obs_dim = 4
action_dim = 2
hidden = [4]
"#
    );
    let path = dir.join(format!("{variant}.cfg"));
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_outputs_and_reports_progress() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "normal", 3);
    let out = tmp.path().join("run");
    let o = qees(&["run", "--config", s(&cfg), "--seed", "1", "--out", s(&out), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("gen ")).count(), 3);
    for f in ["records.csv", "behaviors.csv", "checkpoint.qees", "config.toml"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn run_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "deceptive", 3);
    for d in ["a", "b"] {
        let o = qees(&["run", "--config", s(&cfg), "--seed", "4", "--out", s(&tmp.path().join(d))]);
        assert!(o.status.success());
    }
    for f in ["records.csv", "behaviors.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn config_problems_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let missing = qees(&["run", "--config", "/nonexistent/cfg.toml", "--seed", "1", "--out", s(&out)]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "format_version = 1\n[run]\nmode = \"fitness_only\"\npopulation = 7\n").unwrap();
    let o = qees(&["run", "--config", s(&bad), "--seed", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line") || err.contains("run."), "{err}");

    let typo = tmp.path().join("typo.cfg");
    let text = fs::read_to_string(write_config(tmp.path(), "normal", 1)).unwrap().replace("sigma", "sigmaa");
    fs::write(&typo, text).unwrap();
    let o = qees(&["run", "--config", s(&typo), "--seed", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigmaa"));
}

#[test]
fn shipped_presets_parse() {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    for name in ["normal.cfg", "directional.cfg", "deceptive.cfg", "paper-scale.cfg"] {
        let cfg = qees::RunConfig::load(&presets.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        if name == "paper-scale.cfg" {
            assert_eq!(cfg.run.sigma, 0.02);
            assert_eq!(cfg.optimizer.alpha, 0.01);
            assert_eq!(cfg.optimizer.l2_coeff, 0.005);
            assert_eq!(cfg.run.population, 10_000);
        } else {
            assert_eq!(cfg.run.population, 200);
            assert!((100..=300).contains(&cfg.run.generations));
        }
    }
}

#[test]
fn sweep_aggregates_and_curve_reproduces_means() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "normal", 4);
    let out = tmp.path().join("sweep");
    let o = qees(&["sweep", "--config", s(&cfg), "--seeds", "1,2,3", "--out", s(&out), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let agg = read_aggregate(&out.join("aggregate.csv")).unwrap();
    assert_eq!(agg.len(), 4);

    // Recompute from each seed's records.
    let runs: Vec<_> = [1, 2, 3]
        .iter()
        .map(|sd| qees::records::read_records(&out.join(format!("seed_{sd}")).join("records.csv")).unwrap())
        .collect();
    for (g, row) in agg.iter().enumerate() {
        let vals: Vec<f64> = runs.iter().map(|r| r[g].mean_fitness).collect();
        let (m, sd) = mean_std(&vals);
        let (am, asd) = row.stat("mean_fitness").unwrap();
        assert!((m - am).abs() <= 1e-9 && (sd - asd).abs() <= 1e-9);
    }

    let svg = tmp.path().join("curve.svg");
    let o = qees(&[
        "plot", "--in", s(&out), "--kind", "curve", "--out", s(&svg), "--metric", "mean_fitness", "--metric", "max_fitness",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);

    let mut rdr = csv::Reader::from_path(data_path(&svg)).unwrap();
    for (rec, row) in rdr.records().zip(&agg) {
        let rec = rec.unwrap();
        let mean: f64 = rec[1].parse().unwrap();
        assert!((mean - row.stat("mean_fitness").unwrap().0).abs() <= 1e-9);
    }
}

#[test]
fn single_seed_sweep_has_zero_std() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "normal", 2);
    let out = tmp.path().join("one");
    assert!(qees(&["sweep", "--config", s(&cfg), "--seeds", "7", "--out", s(&out)]).status.success());
    let agg = read_aggregate(&out.join("aggregate.csv")).unwrap();
    assert!(agg.iter().all(|r| r.stats.iter().all(|(_, sd)| *sd == 0.0)));
}

#[test]
fn duplicate_seeds_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "normal", 1);
    let out = tmp.path().join("dup");
    let o = qees(&["sweep", "--config", s(&cfg), "--seeds", "1,2,1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn histogram_counts_every_behavior_and_draws_walls() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "deceptive", 2);
    let run = tmp.path().join("run");
    assert!(qees(&["run", "--config", s(&cfg), "--seed", "2", "--out", s(&run)]).status.success());
    let before = fs::read(run.join("behaviors.csv")).unwrap();

    let svg = tmp.path().join("hist.svg");
    let o = qees(&["plot", "--in", s(&run), "--kind", "histogram", "--out", s(&svg), "--bins", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="wall""#).count(), 3);

    let mut rdr = csv::Reader::from_path(data_path(&svg)).unwrap();
    let total: u64 = rdr.records().map(|r| r.unwrap()[6].parse::<u64>().unwrap()).sum();
    let rows = qees::records::read_behaviors(&run.join("behaviors.csv")).unwrap().len();
    assert_eq!(total, rows as u64);
    assert_eq!(fs::read(run.join("behaviors.csv")).unwrap(), before);
}

#[test]
fn histogram_of_points_at_origin_has_one_bin() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fake");
    fs::create_dir_all(&dir).unwrap();
    let mut body = String::from("sample_index,fitness,final_x,final_y\n");
    for i in 0..30 {
        body += &format!("{i},0,0,0\n");
    }
    fs::write(dir.join("behaviors.csv"), body).unwrap();
    let svg = tmp.path().join("h.svg");
    assert!(qees(&["plot", "--in", s(&dir), "--kind", "histogram", "--out", s(&svg)]).status.success());
    assert_eq!(fs::read_to_string(&svg).unwrap().matches(r#"class="bin""#).count(), 1);
}

#[test]
fn plot_with_missing_inputs_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p.svg");
    for kind in ["curve", "histogram"] {
        let o = qees(&["plot", "--in", s(tmp.path()), "--kind", kind, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(2), "{kind}");
    }
    let o = qees(&["plot", "--in", "/nonexistent", "--kind", "curve", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resume_continues_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "normal", 4);
    let full = tmp.path().join("full");
    assert!(qees(&["run", "--config", s(&cfg), "--seed", "3", "--out", s(&full)]).status.success());

    let short_cfg = tmp.path().join("short.cfg");
    fs::write(&short_cfg, fs::read_to_string(&cfg).unwrap().replace("generations = 4", "generations = 2")).unwrap();
    let part = tmp.path().join("part");
    assert!(qees(&["run", "--config", s(&short_cfg), "--seed", "3", "--out", s(&part)]).status.success());
    let ck = part.join("checkpoint.qees");
    let o = qees(&["run", "--config", s(&cfg), "--seed", "3", "--out", s(&part), "--resume", s(&ck)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(full.join("records.csv")).unwrap(), fs::read(part.join("records.csv")).unwrap());
}
