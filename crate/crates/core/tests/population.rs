use jpsro::jpsro::{initial_policies, RunConfig};
use jpsro::population::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use jpsro::population::{neupl_jpsro_run, parametric, pr_br, NeuplConfig, PopulationMode, MODE_PARAMETRIC};

fn parametric_config(game: &str, iterations: usize) -> NeuplConfig {
    let mut run = RunConfig::new(game.parse().unwrap());
    run.solver_epsilon = 0.0;
    run.max_iterations = iterations;
    NeuplConfig::new(run, PopulationMode::SharedParametric)
}

#[test]
fn schedule_boundaries() {
    assert_eq!(pr_br(0, 1, 10), 1.0);
    assert_eq!(pr_br(1, 2, 10), 0.2);
    assert_eq!(pr_br(7, 8, 10), 0.5);
    assert_eq!(pr_br(0, 5, 10), 0.0);
}

#[test]
fn parametric_records_carry_estimates_and_distillation() {
    let out = neupl_jpsro_run(&parametric_config("rps", 4)).unwrap();
    for r in &out.records {
        assert_eq!(r.mode.as_deref(), Some(MODE_PARAMETRIC));
        assert_eq!(r.estimated_deviation_gains.as_ref().unwrap().len(), 2);
        assert_eq!(r.distill_kl.as_ref().unwrap().len(), 2);
    }
}

#[test]
fn parametric_run_is_deterministic() {
    let config = parametric_config("kuhn_poker", 3);
    let a = neupl_jpsro_run(&config).unwrap();
    let b = neupl_jpsro_run(&config).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.sigmas, b.sigmas);
}

#[test]
fn checkpoint_file_round_trip() {
    let config = parametric_config("kuhn_poker", 2);
    let game = config.run.game.build().unwrap();
    let run = parametric::run(&game, &config, initial_policies(&game, 0).unwrap(), |_, _| {}).unwrap();
    let checkpoint = Checkpoint {
        model: run.model,
        head: run.head,
        estimator: run.estimator,
    };
    let tmp = tempfile::NamedTempFile::new().unwrap();
    write_checkpoint(&checkpoint, tmp.as_file()).unwrap();
    let back = read_checkpoint(std::fs::File::open(tmp.path()).unwrap()).unwrap();
    let a = back.model.extract_all(&game).unwrap();
    let b = checkpoint.model.extract_all(&game).unwrap();
    assert_eq!(a.sizes(), b.sizes());
    for p in 0..2 {
        assert_eq!(a.policies(p), b.policies(p));
    }
    assert!(read_checkpoint(&b"not a checkpoint"[..]).is_err());
}

#[test]
fn estimator_mode_runs_on_matrix_games() {
    let mut config = parametric_config("rps", 3);
    config.use_estimator = true;
    config.estimator_steps = 200;
    let out = neupl_jpsro_run(&config).unwrap();
    assert!(!out.records.is_empty());
    assert!(out.records.iter().all(|r| r.cce_gap.is_finite()));
}

#[test]
fn invalid_population_configs_are_rejected() {
    let mut config = parametric_config("rps", 3);
    config.top_k = 0;
    assert!(neupl_jpsro_run(&config).is_err());
    let mut config = parametric_config("rps", 3);
    config.mode = PopulationMode::TabularExact;
    config.use_estimator = true;
    assert!(neupl_jpsro_run(&config).is_err());
}
