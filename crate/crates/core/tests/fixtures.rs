use cccr::concurrent::{local_game, query_strategy, value_iterate, IterationConfig, ValueTable};
use cccr::matrix_game::solve_matrix_game;
use cccr::turn_based::{cop_number, solve_copwin, tbcr_capture_time};
use cccr::{generate, Graph, Placement, Side};

fn solve(spec: &str, k: usize) -> (Graph, ValueTable) {
    let g = generate(spec).unwrap();
    let (v, _) = value_iterate(&g, k, &IterationConfig::default()).unwrap();
    (g, v)
}

fn matrix(v: &ValueTable) -> Vec<Vec<f64>> {
    let n = v.graph().node_count();
    v.values().chunks(n).map(<[f64]>::to_vec).collect()
}

fn at(g: &Graph, cop: &str, robber: &str) -> Placement {
    Placement::from_labels(g, &[cop], robber).unwrap()
}

#[test]
fn path_of_five() {
    let (_, v) = solve("path:5", 1);
    let expected = [
        [0.0, 4.0, 4.0, 4.0, 4.0],
        [1.0, 0.0, 3.0, 3.0, 3.0],
        [2.0, 2.0, 0.0, 2.0, 2.0],
        [3.0, 3.0, 3.0, 0.0, 1.0],
        [4.0, 4.0, 4.0, 4.0, 0.0],
    ];
    assert_eq!(matrix(&v), expected.map(Vec::from).to_vec());
    assert!(v.converged);
    assert_eq!(v.capture_time(), 4.0);
}

#[test]
fn small_tree() {
    let (_, v) = solve("paper-tree", 1);
    let expected = [
        [0.0, 1.0, 2.0, 2.0, 2.0],
        [3.0, 0.0, 3.0, 3.0, 3.0],
        [2.0, 2.0, 0.0, 1.0, 1.0],
        [3.0, 3.0, 3.0, 0.0, 2.0],
        [3.0, 3.0, 3.0, 2.0, 0.0],
    ];
    assert_eq!(matrix(&v), expected.map(Vec::from).to_vec());
}

#[test]
fn triangle() {
    let g = generate("clique:3").unwrap();
    let (v, s) = value_iterate(&g, 1, &IterationConfig::default()).unwrap();
    assert!(v.converged && v.iterations_used <= 10, "{}", v.iterations_used);
    for (p, value) in v.entries() {
        let target = if p.is_capture() { 0.0 } else { 2.0 };
        assert!((value - target).abs() < 1e-2, "{p:?}: {value}");
    }
    // Each round the cop guesses right with probability 1/2: mean 2.
    let p = at(&g, "3", "1");
    let cop = query_strategy(&s, &p, Side::Cop).unwrap();
    assert!((cop.prob(&[g.node("1").unwrap()]) - 0.5).abs() < 1e-9);
    assert!((cop.prob(&[g.node("2").unwrap()]) - 0.5).abs() < 1e-9);
    let robber = query_strategy(&s, &p, Side::Robber).unwrap();

    // The cop mix comes from the last sweep's game, one iterate behind the
    // table, so it secures the final local game to within the tolerance.
    let game = local_game(&g, &p, &v).unwrap();
    let sol = solve_matrix_game(&game.matrix, 1e-9).unwrap();
    let mix: Vec<f64> = game.cop_moves.iter().map(|m| cop.prob(m)).collect();
    let worst = game.matrix.col_payoffs(&mix).into_iter().fold(f64::NEG_INFINITY, f64::max);
    assert!((worst - sol.value).abs() < 1e-2, "{worst} vs {}", sol.value);
    // Robber mixes are not unique here ((1/2, 1/2, 0) and (0, 1/2, 1/2)
    // both work); only their security level is pinned.
    let mix: Vec<f64> = game.robber_moves.iter().map(|&y| robber.prob(&[y])).collect();
    let worst = game.matrix.row_payoffs(&mix).into_iter().fold(f64::INFINITY, f64::min);
    assert!((worst - sol.value).abs() < 1e-2, "{worst} vs {}", sol.value);
}

#[test]
fn gavenciak() {
    let (g, v) = solve("gavenciak", 1);
    let value = v.value(&at(&g, "2", "1")).unwrap();
    assert!((18.77..=18.87).contains(&value), "{value}");
    assert!((80..=100).contains(&v.iterations_used), "{}", v.iterations_used);
    assert!(v.all_finite());
    assert_eq!(tbcr_capture_time(&g, 1).unwrap(), Some(7));
}

#[test]
fn cop_numbers() {
    let count = |spec: &str| cop_number(&generate(spec).unwrap(), 4).unwrap();
    assert_eq!(count("paper-tree"), Some(1));
    assert_eq!(count("clique:3"), Some(1));
    assert_eq!(count("gavenciak"), Some(1));
    for n in 4..=8 {
        assert_eq!(count(&format!("cycle:{n}")), Some(2), "cycle:{n}");
    }
    for n in 2..=8 {
        assert_eq!(count(&format!("path:{n}")), Some(1), "path:{n}");
    }
}

#[test]
fn finite_tables_exactly_when_the_cops_win() {
    let (_, v) = solve("cycle:4", 1);
    assert!(v.divergent() > 0 && v.capture_time().is_infinite());
    let (_, v) = solve("cycle:4", 2);
    assert!(v.all_finite());
    let (_, v) = solve("paper-tree", 1);
    assert!(v.all_finite());
    for spec in ["cycle:4", "cycle:5", "paper-tree", "gavenciak"] {
        let g = generate(spec).unwrap();
        assert_eq!(solve_copwin(&g, 1).unwrap().cops_win(), solve(spec, 1).1.all_finite(), "{spec}");
    }
}

#[test]
fn iterates_are_monotone_and_pinned_on_the_diagonal() {
    let g = generate("gavenciak").unwrap();
    let mut previous: Option<ValueTable> = None;
    for sweeps in [1, 2, 5, 20] {
        let config = IterationConfig {
            max_iter: sweeps,
            tol: 1e-300,
            ..IterationConfig::default()
        };
        let (v, _) = value_iterate(&g, 1, &config).unwrap();
        for (p, value) in v.entries() {
            if p.is_capture() {
                assert_eq!(value, 0.0);
            }
        }
        if let Some(prev) = previous {
            assert!(v.values().iter().zip(prev.values()).all(|(a, b)| a >= b));
        }
        previous = Some(v);
    }
}

#[test]
fn converged_tables_satisfy_their_equations() {
    let g = generate("gavenciak").unwrap();
    let (v, _) = value_iterate(&g, 1, &IterationConfig::with_tol(1e-9)).unwrap();
    for (p, value) in v.entries().filter(|(p, _)| !p.is_capture()) {
        let game = local_game(&g, &p, &v).unwrap();
        let val = solve_matrix_game(&game.matrix, 1e-9).unwrap().value;
        assert!((val - value).abs() < 1e-6, "{p:?}: {val} vs {value}");
    }
}
