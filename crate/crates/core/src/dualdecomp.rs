//! Row/column dual decomposition: each cell gets a row copy and a column
//! copy coupled by a multiplier. The row problem sees only horizontal TV,
//! the column problem only vertical TV, and each keeps the full capacity.

use num_traits::Signed;

use crate::error::Result;
use crate::grid::Grid;
use crate::instance::{IntStep, TripInstance};
use crate::num::{rat, Rational};
use crate::pathdp::{solve_line, LineProblem};

/// Multipliers are rounded to this grid during ascent.
pub const LAMBDA_GRID: i64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdState {
    pub lambda: Grid<Rational>,
    pub d_row: IntStep,
    pub d_col: IntStep,
    pub value_row: Rational,
    pub value_col: Rational,
    pub bound: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// `max(1, |bound at λ=0|) / (k+1)`.
    Harmonic,
    Constant(Rational),
}

fn solve_half(
    inst: &TripInstance,
    cost: &Grid<Rational>,
    by_rows: bool,
) -> Result<(IntStep, Rational)> {
    let (n, m) = inst.shape();
    let order: Vec<usize> = if by_rows {
        (0..n * m).collect()
    } else {
        (0..m)
            .flat_map(|j| (0..n).map(move |i| i * m + j))
            .collect()
    };
    let line_len = if by_rows { m } else { n };
    let prev = inst.prev().as_slice();
    let lp = LineProblem {
        cost: order.iter().map(|&k| cost.as_slice()[k]).collect(),
        prev: order.iter().map(|&k| prev[k]).collect(),
        edge_weight: (1..order.len())
            .map(|p| {
                if p % line_len == 0 {
                    rat(0)
                } else {
                    inst.alpha()
                }
            })
            .collect(),
        penalty: Vec::new(),
        xi_lo: inst.xi_lo(),
        xi_hi: inst.xi_hi(),
        budget: inst.budget(),
    };
    let sol = solve_line(&lp)?;
    let mut d = inst.zero_step();
    for (&k, &v) in order.iter().zip(&sol.values) {
        d.as_mut_slice()[k] = v - prev[k];
    }
    Ok((d, sol.objective))
}

/// Decomposition bound for fixed multipliers; never above the integer optimum.
pub fn dd_bound(inst: &TripInstance, lambda: &Grid<Rational>) -> Result<DdState> {
    inst.check_shape(lambda)?;
    let half = Rational::new(1, 2);
    let c_row = inst
        .cost()
        .zip_map(lambda, |&c, &l| (c + rat(2) * l) * half);
    let c_col = inst
        .cost()
        .zip_map(lambda, |&c, &l| (c - rat(2) * l) * half);
    let (d_row, value_row) = solve_half(inst, &c_row, true)?;
    let (d_col, value_col) = solve_half(inst, &c_col, false)?;
    Ok(DdState {
        lambda: lambda.clone(),
        d_row,
        d_col,
        value_row,
        value_col,
        bound: value_row + value_col,
    })
}

/// When both copies agree the common step is optimal for the integer problem.
pub fn dd_certificate(state: &DdState) -> Option<IntStep> {
    (state.d_row == state.d_col).then(|| state.d_row.clone())
}

/// Projected-free subgradient ascent on the multipliers with subgradient
/// `d_row − d_col`. Returns the state with the best bound seen; stops early
/// once the copies agree.
pub fn dd_ascent(inst: &TripInstance, iters: usize, rule: StepRule) -> Result<DdState> {
    let (n, m) = inst.shape();
    let mut lambda = Grid::filled(n, m, rat(0));
    let first = dd_bound(inst, &lambda)?;
    let scale = {
        let b = first.bound.abs();
        if b > rat(1) {
            b
        } else {
            rat(1)
        }
    };
    let mut best = first.clone();
    let mut cur = first;
    for k in 1..iters.max(1) {
        if dd_certificate(&cur).is_some() {
            break;
        }
        let step = match rule {
            StepRule::Harmonic => scale / rat(k as i64 + 1),
            StepRule::Constant(t) => t,
        };
        lambda = lambda.zip_map(&cur.d_row.zip_map(&cur.d_col, |a, b| a - b), |&l, &g| {
            let t = (l + step * rat(g)) * rat(LAMBDA_GRID);
            Rational::new(t.round().to_integer(), LAMBDA_GRID)
        });
        cur = dd_bound(inst, &lambda)?;
        if cur.bound > best.bound {
            best = cur.clone();
        }
    }
    Ok(best)
}
