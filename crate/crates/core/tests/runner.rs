use std::fs;
use std::path::Path;

use qees::checkpoint::Checkpoint;
use qees::runner::{checkpoint_file_name, BEHAVIORS_FILE, FINAL_CHECKPOINT_FILE, RECORDS_FILE};
use qees::{run_experiment, RunConfig, RunOptions};

fn locomotion_config(variant: &str, mode: &str, generations: u64) -> RunConfig {
    let obs = if variant == "directional" { 6 } else { 4 };
    let trap = if variant == "deceptive" {
        "[environment.trap]\nfront_wall_x = 4.0\nside_wall_y = 2.0\nside_wall_length = 4.0\nwall_thickness = 0.2\n"
    } else {
        ""
    };
    RunConfig::from_toml_str(&format!(
        r#"
format_version = 1

[run]
mode = "{mode}"
population = 20
sigma = 0.05
generations = {generations}
checkpoint_interval = 2

[noise]
seed = 4
length = 50000

[task]
kind = "locomotion"

[environment]
variant = "{variant}"
max_steps = 60
{trap}
[policy]
obs_dim = {obs}
action_dim = 2
hidden = [6]
"#
    ))
    .unwrap()
}

fn bytes(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn identical_inputs_give_identical_files() {
    for (variant, mode) in [("normal", "evolvability_only"), ("directional", "fitness_only"), ("deceptive", "quality_evolvability")] {
        let cfg = locomotion_config(variant, mode, 4);
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        run_experiment(&cfg, 9, &a, RunOptions { workers: 1, ..Default::default() }).unwrap();
        run_experiment(&cfg, 9, &b, RunOptions { workers: 3, ..Default::default() }).unwrap();
        for f in [RECORDS_FILE, BEHAVIORS_FILE, FINAL_CHECKPOINT_FILE] {
            assert_eq!(bytes(&a, f), bytes(&b, f), "{variant}/{mode}: {f}");
        }
    }
}

#[test]
fn different_seeds_diverge() {
    let cfg = locomotion_config("normal", "fitness_only", 2);
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&cfg, 1, &tmp.path().join("a"), RunOptions::default()).unwrap();
    run_experiment(&cfg, 2, &tmp.path().join("b"), RunOptions::default()).unwrap();
    assert_ne!(bytes(&tmp.path().join("a"), RECORDS_FILE), bytes(&tmp.path().join("b"), RECORDS_FILE));
}

#[test]
fn resume_from_half_run_matches_uninterrupted() {
    let cfg = locomotion_config("deceptive", "quality_evolvability", 6);
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    run_experiment(&cfg, 5, &full, RunOptions::default()).unwrap();

    // Reproduce a run interrupted after generation 3, then resume it.
    let mut half_cfg = cfg.clone();
    half_cfg.run.generations = 3;
    let part = tmp.path().join("part");
    run_experiment(&half_cfg, 5, &part, RunOptions::default()).unwrap();
    let ck = part.join(FINAL_CHECKPOINT_FILE);
    assert_eq!(Checkpoint::load(&ck).unwrap().generation, 3);
    run_experiment(&cfg, 5, &part, RunOptions { resume: Some(ck), ..Default::default() }).unwrap();

    for f in [RECORDS_FILE, BEHAVIORS_FILE, FINAL_CHECKPOINT_FILE] {
        assert_eq!(bytes(&full, f), bytes(&part, f), "{f}");
    }
}

#[test]
fn periodic_checkpoint_resume_matches() {
    let cfg = locomotion_config("normal", "quality_evolvability", 4);
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    run_experiment(&cfg, 8, &full, RunOptions::default()).unwrap();
    let resumed = tmp.path().join("resumed");
    fs::create_dir_all(&resumed).unwrap();
    let ck = full.join(checkpoint_file_name(2));
    run_experiment(&cfg, 8, &resumed, RunOptions { resume: Some(ck), ..Default::default() }).unwrap();
    assert_eq!(bytes(&full, FINAL_CHECKPOINT_FILE), bytes(&resumed, FINAL_CHECKPOINT_FILE));
    assert_eq!(bytes(&full, BEHAVIORS_FILE), bytes(&resumed, BEHAVIORS_FILE));
}

#[test]
fn resume_with_changed_config_is_refused() {
    let cfg = locomotion_config("normal", "fitness_only", 2);
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("a");
    run_experiment(&cfg, 1, &dir, RunOptions::default()).unwrap();
    let mut other = cfg.clone();
    other.run.sigma = 0.07;
    let ck = dir.join(FINAL_CHECKPOINT_FILE);
    assert!(run_experiment(&other, 1, &dir, RunOptions { resume: Some(ck.clone()), ..Default::default() }).is_err());
    assert!(run_experiment(&cfg, 2, &dir, RunOptions { resume: Some(ck), ..Default::default() }).is_err());
}

#[test]
fn center_evaluation_does_not_steer_the_run() {
    // run_experiment additionally evaluates and reports the center; a bare
    // Runner must still land on the same parameters.
    use qees::runner::{RunSettings, Runner};
    use qees::config::Task;
    let cfg = locomotion_config("normal", "fitness_only", 3);
    let Task::Locomotion(task) = cfg.task().unwrap() else { unreachable!() };
    let table = qees::runner::build_table(&cfg).unwrap();
    let digest = cfg.digest(3);
    let mut r = Runner::new(RunSettings::from_config(&cfg), task, table, 3, cfg.run.init_seed, digest, 1).unwrap();
    let mut centers = Vec::new();
    for _ in 0..3 {
        let out = r.run_generation_detailed().unwrap();
        centers.push(r.center().clone());
        // The update is exactly one Adam step on the reported gradient.
        assert_eq!(out.gradient.vector.len(), r.center().dim());
    }
    let tmp = tempfile::tempdir().unwrap();
    let s = run_experiment(&cfg, 3, tmp.path(), RunOptions::default()).unwrap();
    assert_eq!(s.final_checkpoint.center, centers[2]);
}
