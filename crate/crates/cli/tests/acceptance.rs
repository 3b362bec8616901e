//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if
//! any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use cccr::concurrent::{local_game, query_strategy, value_iterate, IterationConfig, ValueTable};
use cccr::matrix_game::{saddle_point_shortcut, solve_matrix_game, MatrixGame};
use cccr::simulation::{
    delayed_evasion_strategy, estimate_value, exhaustive_evasion, guessing_cop_strategy, run_episode,
    survival_bound, StrategyHandle,
};
use cccr::turn_based::{cop_number, solve_copwin, tbcr_capture_time};
use cccr::{generate, Graph, Placement, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn at(g: &Graph, cops: &[&str], robber: &str) -> Placement {
    Placement::from_labels(g, cops, robber).unwrap()
}

fn solve(g: &Graph, k: usize, tol: f64) -> (ValueTable, cccr::concurrent::MixedStrategyTable) {
    value_iterate(g, k, &IterationConfig::with_tol(tol)).unwrap()
}

fn rows(v: &ValueTable) -> Vec<Vec<f64>> {
    let n = v.graph().node_count();
    v.values().chunks(n).map(<[f64]>::to_vec).collect()
}

fn p5_matrix() -> Check {
    let started = Instant::now();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["cccr", "solve", "--generator", "path:5", "--format", "csv"];
    let code = cccr_cli::cli::run(args, &mut out, &mut err);
    let elapsed = started.elapsed();
    let expected = "cop\\robber,1,2,3,4,5\n1,0,4,4,4,4\n2,1,0,3,3,3\n3,2,2,0,2,2\n4,3,3,3,0,1\n5,4,4,4,4,0\n";
    let got = String::from_utf8_lossy(&out);
    ensure(
        code == 0 && got == expected && elapsed < Duration::from_secs(1),
        format!("exit {code}, exact match {}, {elapsed:.2?}", got == expected),
    )
}

fn tree_matrix() -> Check {
    let started = Instant::now();
    let g = generate("paper-tree").unwrap();
    let (v, _) = solve(&g, 1, 1e-2);
    let elapsed = started.elapsed();
    let expected: Vec<Vec<f64>> = [
        [0.0, 1.0, 2.0, 2.0, 2.0],
        [3.0, 0.0, 3.0, 3.0, 3.0],
        [2.0, 2.0, 0.0, 1.0, 1.0],
        [3.0, 3.0, 3.0, 0.0, 2.0],
        [3.0, 3.0, 3.0, 2.0, 0.0],
    ]
    .map(Vec::from)
    .to_vec();
    let exact = rows(&v) == expected;
    ensure(
        exact && elapsed < Duration::from_secs(1),
        format!("exact match {exact}, {} sweeps, {elapsed:.2?}", v.iterations_used),
    )
}

fn triangle() -> Check {
    let g = generate("clique:3").unwrap();
    let (v, s) = solve(&g, 1, 1e-2);
    let worst_off = v
        .entries()
        .filter(|(p, _)| !p.is_capture())
        .map(|(_, x)| (x - 2.0).abs())
        .fold(0.0, f64::max);
    let p = at(&g, &["3"], "1");
    let cop = query_strategy(&s, &p, Side::Cop).unwrap();
    let game = local_game(&g, &p, &v).unwrap();
    let value = solve_matrix_game(&game.matrix, 1e-9).unwrap().value;
    let mix: Vec<f64> = game.cop_moves.iter().map(|m| cop.prob(m)).collect();
    let secured = game.matrix.col_payoffs(&mix).into_iter().fold(f64::NEG_INFINITY, f64::max);
    // Probability the cop mix catches each robber reply in one round; the
    // value of a game caught with probability q per round is 1/q.
    let catch: Vec<f64> = game
        .robber_moves
        .iter()
        .map(|&y| {
            cop.support()
                .filter(|(m, _)| cccr::concurrent::cccr_transition(&g, &p, m, y).unwrap().captured())
                .map(|(_, w)| w)
                .sum()
        })
        .collect();
    let q = catch.iter().copied().fold(f64::INFINITY, f64::min);
    let analytic = 1.0 / q;
    ensure(
        worst_off < 1e-2
            && v.converged
            && v.iterations_used <= 10
            && (secured - value).abs() < 1e-2
            && (analytic - 2.0).abs() < 1e-9,
        format!(
            "max |v-2| = {worst_off:.2e}, {} sweeps, cop mix secures {secured:.4} vs {value:.4}, 1/q = {analytic}",
            v.iterations_used
        ),
    )
}

fn gavenciak() -> Check {
    let started = Instant::now();
    let g = generate("gavenciak").unwrap();
    let (v, _) = solve(&g, 1, 1e-2);
    let value = v.value(&at(&g, &["2"], "1")).unwrap();
    let tbcr = tbcr_capture_time(&g, 1).unwrap();
    let elapsed = started.elapsed();
    ensure(
        (18.77..=18.87).contains(&value)
            && (80..=100).contains(&v.iterations_used)
            && tbcr == Some(7)
            && elapsed < Duration::from_secs(30),
        format!(
            "v((2),1) = {value:.4}, {} sweeps, turn-based capture time {tbcr:?}, {elapsed:.2?}",
            v.iterations_used
        ),
    )
}

fn cop_numbers() -> Check {
    let mut cases: Vec<(String, usize)> = vec![("paper-tree".into(), 1), ("clique:3".into(), 1)];
    cases.extend((4..=8).map(|n| (format!("cycle:{n}"), 2)));
    cases.extend((2..=8).map(|n| (format!("path:{n}"), 1)));
    let mut slowest = Duration::ZERO;
    let mut wrong = Vec::new();
    for (spec, expected) in &cases {
        let started = Instant::now();
        let got = cop_number(&generate(spec).unwrap(), 4).unwrap();
        slowest = slowest.max(started.elapsed());
        if got != Some(*expected) {
            wrong.push(format!("{spec}: {got:?}"));
        }
    }
    ensure(
        wrong.is_empty() && slowest < Duration::from_secs(5),
        format!("{} graphs, slowest {slowest:.2?}, mismatches {wrong:?}", cases.len()),
    )
}

fn theorem_equivalence() -> Check {
    let c4 = generate("cycle:4").unwrap();
    let (one, _) = solve(&c4, 1, 1e-2);
    let (two, _) = solve(&c4, 2, 1e-2);
    let tree = generate("paper-tree").unwrap();
    let (t, _) = solve(&tree, 1, 1e-2);
    ensure(
        one.divergent() > 0 && two.all_finite() && t.all_finite(),
        format!(
            "cycle:4 K=1 has {} infinite positions, K=2 all finite {}, paper-tree all finite {}",
            one.divergent(),
            two.all_finite(),
            t.all_finite()
        ),
    )
}

fn matrix_solver() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_gap, mut worst_residual, mut worst_analytic) = (0.0f64, 0.0f64, 0.0f64);
    let mut two_by_two = 0;
    for i in 0..1000 {
        let (m, n) = if i % 5 == 0 { (2, 2) } else { (rng.gen_range(1..=8), rng.gen_range(1..=8)) };
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| if i % 3 == 0 { f64::from(rng.gen_range(0..5)) } else { rng.gen_range(-10.0..10.0) })
                    .collect()
            })
            .collect();
        let game = MatrixGame::new(a.clone()).unwrap();
        let s = match solve_matrix_game(&game, 1e-7) {
            Ok(s) => s,
            Err(e) => return Err(format!("matrix {i} failed: {e}")),
        };
        let (lower, upper) = s.security_levels(&game);
        worst_gap = worst_gap.max(upper - lower);
        worst_residual = worst_residual.max(s.security_residual(&game));
        if (m, n) == (2, 2) {
            two_by_two += 1;
            let expected = match saddle_point_shortcut(&game) {
                Some(pure) => pure.value,
                None => {
                    let [[a, b], [c, d]] = [[a[0][0], a[0][1]], [a[1][0], a[1][1]]];
                    (a * d - b * c) / (a + d - b - c)
                }
            };
            worst_analytic = worst_analytic.max((s.value - expected).abs());
        }
    }
    ensure(
        worst_gap < 1e-7 && worst_residual < 1e-7 && worst_analytic < 1e-9,
        format!(
            "1000 games: max gap {worst_gap:.1e}, max residual {worst_residual:.1e}; {two_by_two} 2x2 games off by at most {worst_analytic:.1e}"
        ),
    )
}

fn monte_carlo() -> Check {
    let started = Instant::now();
    let fixtures = [
        ("path:5", "1", "2"),
        ("paper-tree", "2", "1"),
        ("clique:3", "3", "1"),
        ("gavenciak", "2", "1"),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (i, (spec, cop, robber)) in fixtures.into_iter().enumerate() {
        let g = generate(spec).unwrap();
        // A tightly converged table, so the mixes are optimal for the
        // values they are compared with.
        let (v, s) = solve(&g, 1, 1e-9);
        let s = Arc::new(s);
        let start = at(&g, &[cop], robber);
        let e = estimate_value(
            &g,
            &StrategyHandle::mixed(s.clone(), Side::Cop),
            &StrategyHandle::mixed(s, Side::Robber),
            &start,
            100_000,
            10_000,
            i as u64,
        )
        .unwrap();
        let value = v.value(&start).unwrap();
        let within = (e.mean - value).abs() <= 3.0 * e.stderr + 1e-6 && e.truncated == 0;
        ok &= within;
        details.push(format!("{spec} {:.3}±{:.3} vs {value:.3}", e.mean, e.stderr));
    }
    let elapsed = started.elapsed();
    ensure(
        ok && elapsed < Duration::from_secs(60),
        format!("{}; {elapsed:.2?}", details.join(", ")),
    )
}

fn guessing_cop() -> Check {
    let g = generate("paper-tree").unwrap();
    let table = solve_copwin(&g, 1).unwrap();
    let cop = guessing_cop_strategy(&table).unwrap();
    let robber = StrategyHandle::uniform_random(Side::Robber);
    let start = at(&g, &["2"], "5");
    let t = table.horizon();
    let n = g.node_count();
    let episodes = 10_000u64;
    let horizon = 10_000;
    let mut rounds = Vec::with_capacity(episodes as usize);
    for seed in 0..episodes {
        let trace = run_episode(&g, &cop, &robber, &start, horizon, seed).unwrap();
        rounds.push(trace.capture_round);
    }
    let captured = rounds.iter().filter(|r| r.is_some()).count() as u64;
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 1..=20u32 {
        let survived = rounds.iter().filter(|r| r.is_none_or(|c| c > k * t)).count() as f64 / episodes as f64;
        let bound = survival_bound(t, n, k);
        let slack = 3.0 * (bound * (1.0 - bound) / episodes as f64).sqrt() + 1.0 / episodes as f64;
        worst_excess = worst_excess.max(survived - bound - slack);
    }
    ensure(
        captured == episodes && worst_excess <= 0.0,
        format!("{captured}/{episodes} captured, T = {t}, n = {n}, envelope margin {:.3}", -worst_excess),
    )
}

fn delayed_evasion() -> Check {
    let g = generate("cycle:4").unwrap();
    let robber = delayed_evasion_strategy(&solve_copwin(&g, 1).unwrap()).unwrap();
    let report = exhaustive_evasion(&g, &robber, &at(&g, &["1"], "3"), 50).unwrap();
    ensure(
        report.evaded() && !report.en_passant,
        format!(
            "capture round {:?}, en passant {}, {} reachable positions over 50 rounds",
            report.capture_round, report.en_passant, report.reachable
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("P5 value matrix", p5_matrix),
        ("tree value matrix", tree_matrix),
        ("K3 values, sweeps and cop mix", triangle),
        ("Gavenciak value, sweeps, turn-based time", gavenciak),
        ("cop numbers", cop_numbers),
        ("finite values iff enough cops", theorem_equivalence),
        ("matrix-game solver", matrix_solver),
        ("Monte Carlo consistency", monte_carlo),
        ("guessing cop captures within envelope", guessing_cop),
        ("delayed evasion survives every cop sequence", delayed_evasion),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
