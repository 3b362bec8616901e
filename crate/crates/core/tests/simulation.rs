use std::sync::Arc;

use cccr::concurrent::{value_iterate, IterationConfig};
use cccr::simulation::{
    delayed_evasion_strategy, estimate_value, guessing_cop_strategy, run_episode, StrategyHandle,
};
use cccr::turn_based::solve_copwin;
use cccr::{generate, Placement, Side};

#[test]
fn triangle_optimal_play_averages_two_rounds() {
    let g = generate("clique:3").unwrap();
    let (_, mix) = value_iterate(&g, 1, &IterationConfig::default()).unwrap();
    let mix = Arc::new(mix);
    let cop = StrategyHandle::mixed(mix.clone(), Side::Cop);
    let rob = StrategyHandle::mixed(mix, Side::Robber);
    let start = Placement::from_labels(&g, &["3"], "1").unwrap();
    let e = estimate_value(&g, &cop, &rob, &start, 100_000, 200, 11).unwrap();
    assert!((e.mean - 2.0).abs() < 0.05, "{e:?}");
    assert_eq!(e.truncated, 0);
}

#[test]
fn delayed_evasion_outlasts_random_cops_on_c5() {
    let g = generate("cycle:5").unwrap();
    let robber = delayed_evasion_strategy(&solve_copwin(&g, 1).unwrap()).unwrap();
    let cop = StrategyHandle::uniform_random(Side::Cop);
    let start = Placement::from_labels(&g, &["1"], "3").unwrap();
    for seed in 0..10_000 {
        let t = run_episode(&g, &cop, &robber, &start, 60, seed).unwrap();
        assert!(t.truncated(), "caught with seed {seed}");
    }
}

#[test]
fn guessing_cops_catch_random_robbers() {
    for spec in ["paper-tree", "path:6", "gavenciak"] {
        let g = generate(spec).unwrap();
        let cop = guessing_cop_strategy(&solve_copwin(&g, 1).unwrap()).unwrap();
        let rob = StrategyHandle::uniform_random(Side::Robber);
        let start = Placement::new(vec![0], g.node_count() - 1);
        let e = estimate_value(&g, &cop, &rob, &start, 2_000, 5_000, 3).unwrap();
        assert_eq!(e.truncated, 0, "{spec}: {e:?}");
    }
}

#[test]
fn per_side_streams_do_not_interact() {
    // Changing the robber's rule must not change the cops' draws while
    // nobody is caught.
    let g = generate("path:8").unwrap();
    let cop = StrategyHandle::uniform_random(Side::Cop);
    let start = Placement::from_labels(&g, &["1"], "8").unwrap();
    let a = run_episode(&g, &cop, &StrategyHandle::stationary(Side::Robber), &start, 3, 77).unwrap();
    let b = run_episode(&g, &cop, &StrategyHandle::uniform_random(Side::Robber), &start, 3, 77).unwrap();
    let cops = |t: &cccr::simulation::EpisodeTrace| t.positions.iter().map(|p| p.cops.clone()).collect::<Vec<_>>();
    assert_eq!(cops(&a), cops(&b));
}
