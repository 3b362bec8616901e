//! One-shot two-person zero-sum matrix games.
//!
//! Rows belong to the maximizer, columns to the minimizer; entry `(i, j)` is
//! what the column player pays the row player. Games are solved as a linear
//! program after shifting every entry to be positive, with a dense tableau
//! simplex (smallest-index entering column, two-pass ratio test). Both players' mixes come out of the
//! same final tableau (primal for the columns, dual for the rows).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::MatrixGameError;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const RATIO_SLACK: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MatrixGameError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(MatrixGameError::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(MatrixGameError::Ragged {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
            entries.extend(row);
        }
        Self::from_row_major(m, n, entries)
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, MatrixGameError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixGameError::EmptyMatrix);
        }
        assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
        if let Some(k) = entries.iter().position(|x| !x.is_finite()) {
            return Err(MatrixGameError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Expected payoff to the row player of row mix `p` against each column.
    fn negated_transpose(&self) -> MatrixGame {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            entries.extend((0..self.rows).map(|i| -self.get(i, j)));
        }
        MatrixGame {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn row_payoffs(&self, p: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| p[i] * self.get(i, j)).sum())
            .collect()
    }

    /// Expected payoff of each row against column mix `q`.
    pub fn col_payoffs(&self, q: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(q).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub value: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
}

impl GameSolution {
    /// `(guaranteed by rows, conceded by columns)`: the worst column payoff
    /// against `row_mix` and the worst row payoff against `col_mix`.
    pub fn security_levels(&self, game: &MatrixGame) -> (f64, f64) {
        let lower = game
            .row_payoffs(&self.row_mix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let upper = game
            .col_payoffs(&self.col_mix)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        (lower, upper)
    }

    /// Largest amount by which either mix falls short of `value`.
    pub fn security_residual(&self, game: &MatrixGame) -> f64 {
        let (lower, upper) = self.security_levels(game);
        (self.value - lower).max(upper - self.value).max(0.0)
    }
}

/// Pure solution if the game has a saddle point (max of row minima equals
/// min of column maxima), else `None`.
pub fn saddle_point_shortcut(game: &MatrixGame) -> Option<GameSolution> {
    let (mut best_row, mut maxmin) = (0, f64::NEG_INFINITY);
    for i in 0..game.rows {
        let low = game.row(i).iter().copied().fold(f64::INFINITY, f64::min);
        if low > maxmin {
            maxmin = low;
            best_row = i;
        }
    }
    let (mut best_col, mut minmax) = (0, f64::INFINITY);
    for j in 0..game.cols {
        let high = (0..game.rows)
            .map(|i| game.get(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        if high < minmax {
            minmax = high;
            best_col = j;
        }
    }
    if maxmin < minmax {
        return None;
    }
    let mut row_mix = vec![0.0; game.rows];
    let mut col_mix = vec![0.0; game.cols];
    row_mix[best_row] = 1.0;
    col_mix[best_col] = 1.0;
    Some(GameSolution {
        value: game.get(best_row, best_col),
        row_mix,
        col_mix,
    })
}

/// Solves `game` and checks that both returned mixes secure the value to
/// within `tol`.
pub fn solve_matrix_game(game: &MatrixGame, tol: f64) -> Result<GameSolution, MatrixGameError> {
    if !(tol > 0.0) {
        return Err(MatrixGameError::BadTolerance);
    }
    if let Some(pure) = saddle_point_shortcut(game) {
        return Ok(pure);
    }
    let candidates = solve_lp(game)?;
    let mut best = merge(game, candidates);
    if best.security_residual(game) <= tol {
        return Ok(best);
    }
    // Near-duplicate rows or columns make the basis ill-conditioned, and the
    // dual read off the reduced costs suffers most. Solving the negated
    // transpose swaps primal and dual, so pool both and keep the better mix
    // for each side.
    let flipped = solve_lp(&game.negated_transpose())?;
    let mut pool = vec![best];
    pool.extend(flipped.into_iter().map(|f| GameSolution {
        value: -f.value,
        row_mix: f.col_mix,
        col_mix: f.row_mix,
    }));
    best = merge(game, pool);
    let residual = best.security_residual(game);
    if residual > tol {
        return Err(MatrixGameError::Inaccurate { residual });
    }
    Ok(best)
}

/// Best row mix and best column mix among `candidates`, valued at the
/// midpoint of their security levels.
fn merge(game: &MatrixGame, candidates: Vec<GameSolution>) -> GameSolution {
    let mut row = (f64::NEG_INFINITY, Vec::new());
    let mut col = (f64::INFINITY, Vec::new());
    for c in candidates {
        let (lower, upper) = c.security_levels(game);
        if lower > row.0 {
            row = (lower, c.row_mix);
        }
        if upper < col.0 {
            col = (upper, c.col_mix);
        }
    }
    GameSolution {
        value: 0.5 * (row.0 + col.0),
        row_mix: row.1,
        col_mix: col.1,
    }
}

/// Shift to entries in `[1/scale, 1]`, then
/// `max Σw  s.t.  B w <= 1, w >= 0`.
///
/// Returns the tableau's reading of the optimum and, when the final basis
/// can be refactored, a recomputation from the original entries.
fn solve_lp(game: &MatrixGame) -> Result<Vec<GameSolution>, MatrixGameError> {
    let (m, n) = (game.rows, game.cols);
    let shift = game.min_entry() - 1.0;
    let scale = game.max_entry() - shift;

    let width = n + m + 1;
    let mut tab = vec![0.0; m * width];
    for i in 0..m {
        let row = &mut tab[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = (game.get(i, j) - shift) / scale;
        }
        row[n + i] = 1.0;
        row[width - 1] = 1.0;
    }
    // Reduced costs of the maximisation objective.
    let mut cost = vec![0.0; n + m];
    cost[..n].fill(1.0);
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..MAX_PIVOTS {
        let Some(enter) = cost.iter().position(|&c| c > PIVOT_EPS) else {
            let mut out = vec![extract(game, &tab, &cost, &basis, shift, scale)];
            out.extend(refactor(game, &basis, shift, scale));
            return Ok(out);
        };
        // Two-pass (Harris) ratio test: bound the step with a small
        // feasibility slack, then take the largest pivot within the bound.
        let rhs = |i: usize| tab[i * width + width - 1].max(0.0);
        let col = |i: usize| tab[i * width + enter];
        let bound = (0..m)
            .filter(|&i| col(i) > PIVOT_EPS)
            .map(|i| (rhs(i) + RATIO_SLACK) / col(i))
            .fold(f64::INFINITY, f64::min);
        let leave = (0..m)
            .filter(|&i| col(i) > PIVOT_EPS && rhs(i) / col(i) <= bound)
            .max_by(|&a, &b| col(a).total_cmp(&col(b)).then(basis[b].cmp(&basis[a])));
        // The feasible region is bounded because every entry is positive.
        let row = leave.expect("bounded linear program");
        pivot(&mut tab, &mut cost, width, row, enter);
        basis[row] = enter;
    }
    Err(MatrixGameError::Inaccurate {
        residual: f64::INFINITY,
    })
}

fn pivot(tab: &mut [f64], cost: &mut [f64], width: usize, row: usize, col: usize) {
    let m = tab.len() / width;
    let p = tab[row * width + col];
    for x in &mut tab[row * width..(row + 1) * width] {
        *x /= p;
    }
    let pivot_row: Vec<f64> = tab[row * width..(row + 1) * width].to_vec();
    for i in (0..m).filter(|&i| i != row) {
        let f = tab[i * width + col];
        if f != 0.0 {
            for (x, &pr) in tab[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
        }
    }
    let f = cost[col];
    for (c, &pr) in cost.iter_mut().zip(&pivot_row) {
        *c -= f * pr;
    }
}

fn extract(
    game: &MatrixGame,
    tab: &[f64],
    cost: &[f64],
    basis: &[usize],
    shift: f64,
    scale: f64,
) -> GameSolution {
    let (m, n) = (game.rows, game.cols);
    let width = n + m + 1;
    let mut w = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            w[b] = tab[i * width + width - 1].max(0.0);
        }
    }
    let y: Vec<f64> = (0..m).map(|i| (-cost[n + i]).max(0.0)).collect();
    let total_w: f64 = w.iter().sum();
    let total_y: f64 = y.iter().sum();
    GameSolution {
        value: scale / total_w + shift,
        row_mix: y.iter().map(|v| v / total_y).collect(),
        col_mix: w.iter().map(|v| v / total_w).collect(),
    }
}

/// Re-solves `B_basis z = 1` and `B_basis^T y = c_basis` by LU on the
/// shifted original matrix; backward stability keeps the payoffs accurate
/// even where the tableau has drifted.
fn refactor(game: &MatrixGame, basis: &[usize], shift: f64, scale: f64) -> Option<GameSolution> {
    let (m, n) = (game.rows, game.cols);
    let basic = DMatrix::from_fn(m, m, |i, k| match basis[k] {
        j if j < n => (game.get(i, j) - shift) / scale,
        s => f64::from(u8::from(s - n == i)),
    });
    let lu = basic.clone().lu();
    let z = lu.solve(&DVector::from_element(m, 1.0))?;
    let c = DVector::from_fn(m, |k, _| f64::from(u8::from(basis[k] < n)));
    let y = basic.transpose().lu().solve(&c)?;

    let mut w = vec![0.0; n];
    for (k, &b) in basis.iter().enumerate() {
        if b < n {
            w[b] = z[k].max(0.0);
        }
    }
    let y: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    let (total_w, total_y): (f64, f64) = (w.iter().sum(), y.iter().sum());
    if !(total_w > 0.0 && total_y > 0.0 && total_w.is_finite() && total_y.is_finite()) {
        return None;
    }
    Some(GameSolution {
        value: scale / total_w + shift,
        row_mix: y.iter().map(|v| v / total_y).collect(),
        col_mix: w.iter().map(|v| v / total_w).collect(),
    })
}
