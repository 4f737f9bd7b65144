use deep_vqe::effective::{recurse, SecondStageAnsatz};
use deep_vqe::error::Error;
use deep_vqe::oracle::exact_ground_effective;
use deep_vqe::pipeline::{
    build_effective, run_pipeline, run_staged, solve_block, RunConfig, Stage,
};
use deep_vqe::vqe::VqeConfig;

fn small(n: usize) -> RunConfig {
    RunConfig {
        n_blocks: n,
        ..RunConfig::default()
    }
}

#[test]
fn staged_run_matches_single_pass_and_resumes() {
    let cfg = small(2);
    let direct = run_pipeline(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();

    assert!(run_staged(&cfg, Some(dir.path()), Some(Stage::BuildEffective))
        .unwrap()
        .is_none());
    assert!(dir.path().join("solve-block.json").exists());
    assert!(dir.path().join("build-effective.json").exists());
    assert!(!dir.path().join("solve-effective.json").exists());

    let resumed = run_staged(&cfg, Some(dir.path()), None).unwrap().unwrap();
    assert_eq!(resumed.deep_vqe_energy, direct.deep_vqe_energy);
    assert_eq!(resumed.local_energy, direct.local_energy);
    assert_eq!(resumed.effective_exact, direct.effective_exact);
    assert_eq!(resumed.seeds, direct.seeds);
    // cached stages are not re-timed
    assert!(!resumed.wall_times.contains_key("solve-block"));
    assert!((direct.deep_vqe_energy + 14.4641).abs() < 1e-3);
}

#[test]
fn artifact_directory_is_tied_to_its_configuration() {
    let dir = tempfile::tempdir().unwrap();
    run_staged(&small(2), Some(dir.path()), Some(Stage::SolveBlock)).unwrap();
    let other = small(2).with_seed(99);
    assert!(matches!(
        run_staged(&other, Some(dir.path()), Some(Stage::SolveBlock)),
        Err(Error::Input(_))
    ));
}

#[test]
fn reruns_are_identical() {
    let cfg = small(2).with_seed(5);
    let text = serde_json::to_string(&cfg).unwrap();
    let again: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, again);
    let a = run_pipeline(&cfg).unwrap();
    let b = run_pipeline(&again).unwrap();
    assert_eq!(a.first_vqe_energy.to_bits(), b.first_vqe_energy.to_bits());
    assert_eq!(a.deep_vqe_energy.to_bits(), b.deep_vqe_energy.to_bits());
}

#[test]
fn unknown_config_fields_are_rejected() {
    assert!(serde_json::from_str::<RunConfig>(r#"{"n_blokcs": 3}"#).is_err());
    let cfg: RunConfig = serde_json::from_str(r#"{"n_blocks": 3}"#).unwrap();
    assert_eq!(cfg.n_blocks, 3);
    assert_eq!(cfg.first_vqe, VqeConfig::default());
}

#[test]
fn zero_iteration_second_stage_returns_local_energy() {
    let mut cfg = small(3);
    cfg.second_vqe.restarts = 0;
    cfg.second_vqe.max_iter = 0;
    let r = run_pipeline(&cfg).unwrap();
    assert!((r.deep_vqe_energy - r.local_energy).abs() < 1e-10);
    assert!((r.local_energy + 21.0).abs() < 1e-6);
}

#[test]
fn two_level_recursion_on_four_blocks() {
    let cfg = small(4);
    let problem = cfg.problem().unwrap();
    let block = solve_block(&cfg, &problem, false).unwrap();
    let eff = build_effective(&problem, &block).unwrap();
    let exact = exact_ground_effective(&eff.problem).unwrap().ground_energy;
    let plan = vec![vec![vec![0, 1], vec![2, 3]], vec![vec![0, 1]]];
    let out = recurse(&eff.problem, &plan, SecondStageAnsatz::EffectiveGenerated, &cfg.second_vqe).unwrap();
    assert_eq!(out.levels.len(), 2);
    assert_eq!(out.levels[0].group_qubits, vec![6, 6]);
    // the coarse basis spans a subspace of the effective space
    assert!(out.energy >= exact - 1e-8);
    assert!(out.energy < eff.local_energy - 1.0);
    assert!((out.energy - exact).abs() < 0.02, "{} vs {exact}", out.energy);

    let open_plan = vec![vec![vec![0, 1], vec![2, 3]]];
    assert!(recurse(&eff.problem, &open_plan, SecondStageAnsatz::EffectiveGenerated, &cfg.second_vqe).is_err());
    let overlapping = vec![vec![vec![0, 1], vec![1, 2, 3]], vec![vec![0, 1]]];
    assert!(recurse(&eff.problem, &overlapping, SecondStageAnsatz::EffectiveGenerated, &cfg.second_vqe).is_err());
}

#[test]
fn stage_names_round_trip() {
    for s in Stage::ALL {
        assert_eq!(s.name().parse::<Stage>().unwrap(), s);
    }
    assert!("solve".parse::<Stage>().is_err());
}
