use jpsro::br::cce_gap;
use jpsro::experiments::{read_bundle, run_experiment, write_bundle, Algo, ExperimentConfig};
use jpsro::jpsro::{evaluate_trace, jpsro_run, read_trace_jsonl, run_on_game, write_trace_jsonl, RunConfig, RunStatus};
use jpsro::population::{NeuplConfig, PopulationMode};
use jpsro::policy::TabularPolicy;
use jpsro::solver::Objective;
use jpsro::GameSpec;

fn config(game: &str) -> RunConfig {
    let mut run = RunConfig::new(game.parse().unwrap());
    run.solver_epsilon = 0.0;
    run
}

#[test]
fn rps_trace_starts_from_rock_rock() {
    let game = GameSpec::new("rps").build().unwrap();
    let rock = (0..2)
        .map(|p| TabularPolicy::deterministic(&game, p, &[0]).unwrap())
        .collect();
    let out = run_on_game(&game, &config("rps"), rock).unwrap();
    assert_eq!(out.status, RunStatus::Converged);
    assert_eq!(out.records[0].cce_gap, 2.0);
    assert_eq!(out.records[0].population_sizes, vec![1, 1]);
    assert!(out.records.last().unwrap().cce_gap < 2e-3);
}

#[test]
fn kuhn_value_matches_the_known_game_value() {
    let out = jpsro_run(&config("kuhn_poker")).unwrap();
    let last = out.records.last().unwrap();
    assert!((last.values[0] + 1.0 / 18.0).abs() < 2e-3, "{:?}", last.values);
    let game = GameSpec::new("kuhn_poker").build().unwrap();
    let gap = cce_gap(&game, &out.population, &out.sigma, None).unwrap();
    assert!((gap - last.cce_gap).abs() < 1e-9);
}

#[test]
fn every_objective_converges_on_kuhn() {
    for objective in [Objective::MaxGini, Objective::MaxWelfare, Objective::MaxEntropy] {
        let mut run = config("kuhn_poker");
        run.objective = objective;
        let out = jpsro_run(&run).unwrap();
        assert_eq!(out.status, RunStatus::Converged, "{objective:?}");
    }
}

#[test]
fn iteration_cap_returns_the_partial_trace() {
    let mut run = config("kuhn_poker(players=3)");
    run.max_iterations = 2;
    let out = jpsro_run(&run).unwrap();
    assert_eq!(out.status, RunStatus::IterationCap);
    assert_eq!(out.records.len(), 2);
    assert_eq!(out.sigmas.len(), 2);
}

#[test]
fn stored_trace_re_evaluates_to_the_live_trace() {
    let out = jpsro_run(&config("goofspiel(num_cards=3)")).unwrap();
    let game = GameSpec::new("goofspiel").with("num_cards", 3).build().unwrap();
    let policies: Vec<_> = (0..2).map(|p| out.population.policies(p).to_vec()).collect();
    let again = evaluate_trace(&game, &policies, &out.sigmas).unwrap();
    assert_eq!(again.len(), out.records.len());
    for (a, b) in again.iter().zip(&out.records) {
        for (x, y) in a.deviation_gains.iter().zip(&b.deviation_gains) {
            assert!((x - y).abs() < 1e-9);
        }
    }
    let mut text = Vec::new();
    write_trace_jsonl(&out.records, &mut text).unwrap();
    assert_eq!(read_trace_jsonl(std::str::from_utf8(&text).unwrap()).unwrap(), out.records);
}

#[test]
fn simulated_evaluation_still_certifies_exactly() {
    let mut run = config("kuhn_poker");
    run.simulated_episodes = Some(200);
    run.max_iterations = 5;
    let out = jpsro_run(&run).unwrap();
    let game = GameSpec::new("kuhn_poker").build().unwrap();
    assert!(out.records.iter().all(|r| r.cce_gap.is_finite() && r.cce_gap >= 0.0));
    assert!(cce_gap(&game, &out.population, &out.sigma, None).unwrap() >= 0.0);
}

#[test]
fn bundle_round_trip() {
    let run = config("rps");
    let experiment = ExperimentConfig {
        algo: Algo::NeuplTabular,
        neupl: NeuplConfig::new(run, PopulationMode::TabularExact),
        seeds: vec![0, 1],
    };
    let bundle = run_experiment(&experiment).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    write_bundle(&bundle, tmp.path()).unwrap();
    let back = read_bundle(tmp.path()).unwrap();
    assert_eq!(back.header, bundle.header);
    assert_eq!(back.aggregate, bundle.aggregate);
    for (a, b) in back.runs.iter().zip(&bundle.runs) {
        assert_eq!(a.records, b.records);
        assert_eq!(a.sigmas, b.sigmas);
        assert_eq!(a.policies, b.policies);
    }
}
