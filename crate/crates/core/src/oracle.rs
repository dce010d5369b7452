//! Exhaustive reference solvers. All arithmetic is exact: rational data is
//! scaled by the least common denominator and enumerated in `i128`.

use crate::error::{Error, Result};
use crate::grid::{edges, Grid};
use crate::instance::{complete, IntStep, TripInstance};
use crate::num::{common_denominator, rat, scaled_int, Rational};
use crate::simplex::{ExtraRow, Sense, VarRef, VarRole};

/// Limit on the number of points an enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;
/// At most this many optimal steps are kept in a tie set.
pub const MAX_TIES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub objective: Rational,
    /// Optimal steps in enumeration order (row-major, lowest value first).
    pub optima: Vec<IntStep>,
    /// True when the tie set was cut off at [`MAX_TIES`].
    pub ties_truncated: bool,
}

impl OracleResult {
    pub fn contains(&self, d: &IntStep) -> bool {
        self.optima.iter().any(|o| o == d)
    }
}

/// Number of integer steps with `x + d ∈ Ξ` and `Σ|d| ≤ budget`,
/// saturating at `u128::MAX`.
pub fn count_feasible(inst: &TripInstance, budget: Option<i64>) -> u128 {
    let Some(budget) = budget else {
        return (inst.xi_len() as u128).saturating_pow(inst.n_cells() as u32);
    };
    let b = budget.max(0) as usize;
    let mut ways = vec![0u128; b + 1];
    ways[0] = 1;
    for &x in inst.prev().iter() {
        let mut next = vec![0u128; b + 1];
        for v in inst.xi_lo()..=inst.xi_hi() {
            let cost = (v - x).unsigned_abs() as usize;
            for used in 0..=b.saturating_sub(cost) {
                if cost <= b {
                    next[used + cost] = next[used + cost].saturating_add(ways[used]);
                }
            }
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &w| a.saturating_add(w))
}

struct Enumerator<'a> {
    n: usize,
    m: usize,
    lo: i64,
    hi: i64,
    prev: &'a [i64],
    /// Scaled cost per cell, including any per-unit capacity price.
    cost: Vec<i128>,
    unit_price: i128,
    alpha: i128,
    budget: Option<i64>,
    y: Vec<i64>,
}

impl Enumerator<'_> {
    fn run(&mut self, k: usize, used: i64, acc: i128, visit: &mut impl FnMut(&[i64], i128)) {
        if k == self.n * self.m {
            visit(&self.y, acc);
            return;
        }
        let (i, j) = (k / self.m, k % self.m);
        for v in self.lo..=self.hi {
            let step = v - self.prev[k];
            let u = used + step.abs();
            if self.budget.is_some_and(|b| u > b) {
                continue;
            }
            let mut jumps = 0i64;
            if i > 0 {
                jumps += (v - self.y[k - self.m]).abs();
            }
            if j > 0 {
                jumps += (v - self.y[k - 1]).abs();
            }
            self.y[k] = v;
            let delta = self.cost[k] * step as i128
                + self.unit_price * step.abs() as i128
                + self.alpha * jumps as i128;
            self.run(k + 1, u, acc + delta, visit);
        }
    }
}

/// Calls `visit(x + d, scale * objective)` for every enumerated point, where
/// the objective is `c·d + α·jumps + price·Σ|d|`. Returns the scale.
fn enumerate(
    inst: &TripInstance,
    price: Rational,
    budget: Option<i64>,
    visit: &mut impl FnMut(&[i64], i128),
) -> Result<i64> {
    let count = count_feasible(inst, budget);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!(
            "{count} candidate points exceed the limit {ENUMERATION_LIMIT}"
        )));
    }
    let alpha = inst.alpha();
    let scale = common_denominator(inst.cost().iter().chain([&alpha, &price]));
    let mut e = Enumerator {
        n: inst.n_rows(),
        m: inst.n_cols(),
        lo: inst.xi_lo(),
        hi: inst.xi_hi(),
        prev: inst.prev().as_slice(),
        cost: inst.cost().iter().map(|&c| scaled_int(c, scale)).collect(),
        unit_price: scaled_int(price, scale),
        alpha: scaled_int(alpha, scale),
        budget,
        y: vec![0; inst.n_cells()],
    };
    e.run(0, 0, 0, visit);
    Ok(scale)
}

fn minimize(
    inst: &TripInstance,
    price: Rational,
    budget: Option<i64>,
) -> Result<(Rational, Vec<IntStep>, bool)> {
    let mut best = i128::MAX;
    let mut ties: Vec<Vec<i64>> = Vec::new();
    let mut truncated = false;
    let scale = enumerate(inst, price, budget, &mut |y, obj| {
        if obj < best {
            best = obj;
            ties.clear();
            truncated = false;
        }
        if obj == best {
            if ties.len() < MAX_TIES {
                ties.push(y.to_vec());
            } else {
                truncated = true;
            }
        }
    })?;
    let (n, m) = inst.shape();
    let optima = ties
        .into_iter()
        .map(|y| {
            let d: Vec<i64> = y
                .iter()
                .zip(inst.prev().iter())
                .map(|(a, b)| a - b)
                .collect();
            Grid::from_vec(n, m, d).expect("enumerated vectors have N*M entries")
        })
        .collect();
    let objective = Rational::new(
        i64::try_from(best).map_err(|_| Error::TooLarge("objective overflow".into()))?,
        scale,
    );
    Ok((objective, optima, truncated))
}

/// Exact optimum of the integer subproblem by enumeration.
pub fn brute_force_ip(inst: &TripInstance) -> Result<OracleResult> {
    let (objective, optima, ties_truncated) = minimize(inst, rat(0), Some(inst.budget()))?;
    Ok(OracleResult {
        objective,
        optima,
        ties_truncated,
    })
}

/// Exact minimum of `c·d + ω(d) + μ(Σ|d| − Δ)` over all Ξ-valued steps,
/// with the capacity moved into the objective.
pub fn brute_lr_inner(inst: &TripInstance, mu: Rational) -> Result<OracleResult> {
    let (objective, optima, ties_truncated) = minimize(inst, mu, None)?;
    Ok(OracleResult {
        objective: objective - mu * inst.delta_cap(),
        optima,
        ties_truncated,
    })
}

/// Calls `visit` with every integer-feasible step.
pub fn for_each_feasible(inst: &TripInstance, mut visit: impl FnMut(&IntStep)) -> Result<()> {
    let (n, m) = inst.shape();
    let prev = inst.prev().clone();
    enumerate(inst, rat(0), Some(inst.budget()), &mut |y, _| {
        let d: Vec<i64> = y.iter().zip(prev.iter()).map(|(a, b)| a - b).collect();
        visit(&Grid::from_vec(n, m, d).expect("N*M entries"));
    })?;
    Ok(())
}

/// `min |∂U| / |U|` over nonempty `U ⊂ component` with `|U| ≤ delta_r`,
/// where `∂U` counts grid edges between `U` and the rest of the component.
pub fn brute_min_cut_ratio(component: &[(usize, usize)], delta_r: i64) -> Result<Rational> {
    let k = component.len();
    if k > 20 {
        return Err(Error::TooLarge(format!("component of {k} cells")));
    }
    if k == 0 || delta_r < 1 {
        return Err(Error::OutOfRange(
            "need a nonempty component and delta_r >= 1".into(),
        ));
    }
    let mut adj = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let (p, q) = (component[a], component[b]);
            if p.0.abs_diff(q.0) + p.1.abs_diff(q.1) == 1 {
                adj.push((a, b));
            }
        }
    }
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1u32 << k) {
        let size = mask.count_ones() as i64;
        if size > delta_r {
            continue;
        }
        let cut = adj
            .iter()
            .filter(|&&(a, b)| ((mask >> a) & 1) != ((mask >> b) & 1))
            .count() as i64;
        let r = Rational::new(cut, size);
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one subset of size 1"))
}

/// Minimum number of grid edges cut by a `K`-subset of an `n x m` grid.
pub fn brute_box_cut(k: usize, n: usize, m: usize) -> Result<usize> {
    if n * m > 16 {
        return Err(Error::TooLarge(format!("{n}x{m} grid")));
    }
    if k > n * m {
        return Err(Error::OutOfRange(format!("K = {k} exceeds {n}x{m} cells")));
    }
    let es = edges(n, m);
    let best = (0u32..(1u32 << (n * m)))
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| {
            es.iter()
                .filter(|&&(a, b)| ((mask >> a) & 1) != ((mask >> b) & 1))
                .count()
        })
        .min();
    Ok(best.unwrap_or(0))
}

/// Evaluates a row at the completion of an integer step.
pub fn row_activity(inst: &TripInstance, row: &ExtraRow, d: &IntStep) -> Result<Rational> {
    let cp = complete(inst, d)?;
    let mut lhs = rat(0);
    for &(v, a) in &row.coeffs {
        let VarRef { role, i, j } = v;
        let val = match role {
            VarRole::D => cp.d.get(i, j),
            VarRole::Delta => cp.delta.get(i, j),
            VarRole::Beta => cp.beta.get(i, j),
            VarRole::Gamma => cp.gamma.get(i, j),
        }
        .copied()
        .ok_or_else(|| Error::UnknownVariable(v.name()))?;
        lhs += a * val;
    }
    Ok(lhs)
}

pub fn row_satisfied(row: &ExtraRow, lhs: Rational) -> bool {
    match row.sense {
        Sense::Ge => lhs >= row.rhs,
        Sense::Le => lhs <= row.rhs,
        Sense::Eq => lhs == row.rhs,
    }
}

/// True iff no integer-feasible point violates the row.
pub fn validate_row(inst: &TripInstance, row: &ExtraRow) -> Result<bool> {
    if count_feasible(inst, None) > 1 << 20 {
        return Err(Error::TooLarge(
            "cut validation is limited to 2^20 assignments".into(),
        ));
    }
    let mut ok = true;
    let mut err = None;
    for_each_feasible(inst, |d| {
        if !ok || err.is_some() {
            return;
        }
        match row_activity(inst, row, d) {
            Ok(lhs) => ok = row_satisfied(row, lhs),
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(ok),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{ex1, ex1_opt, ex2};
    use crate::instance::{gen_random, objective_ip};
    use crate::num::ratio;

    #[test]
    fn worked_examples() {
        let r1 = brute_force_ip(&ex1()).unwrap();
        assert_eq!(r1.objective, ratio(-11, 10));
        assert!(r1.contains(&ex1_opt()));
        let r2 = brute_force_ip(&ex2()).unwrap();
        assert_eq!(r2.objective, rat(0));
        assert_eq!(r2.optima, vec![ex2().zero_step()]);
        let r0 = brute_force_ip(&ex1().with_delta_cap(rat(0)).unwrap()).unwrap();
        assert_eq!(r0.objective, rat(0));
    }

    #[test]
    fn optima_evaluate_to_objective() {
        for seed in 0..5 {
            let inst = gen_random(seed, 3, 3, 0, 2, 3, rat(3)).unwrap();
            let r = brute_force_ip(&inst).unwrap();
            for d in &r.optima {
                assert_eq!(objective_ip(&inst, d).unwrap(), r.objective);
            }
        }
    }

    #[test]
    fn feasible_count() {
        // Binary 2x2, Δ = 1: the zero step plus four single flips.
        assert_eq!(count_feasible(&ex2(), Some(1)), 5);
        assert_eq!(count_feasible(&ex2(), None), 16);
        let mut seen = 0;
        for_each_feasible(&ex2(), |_| seen += 1).unwrap();
        assert_eq!(seen, 5);
    }

    #[test]
    fn cut_ratios() {
        assert_eq!(brute_min_cut_ratio(&[(0, 0), (0, 1)], 1).unwrap(), rat(1));
        assert_eq!(
            brute_min_cut_ratio(&[(0, 0), (0, 1), (1, 0), (1, 1)], 1).unwrap(),
            rat(2)
        );
        assert_eq!(
            brute_min_cut_ratio(&[(0, 0), (0, 1), (1, 0), (1, 1)], 2).unwrap(),
            rat(1)
        );
    }

    #[test]
    fn box_cuts() {
        assert_eq!(brute_box_cut(2, 4, 4).unwrap(), 3);
        assert_eq!(brute_box_cut(8, 4, 4).unwrap(), 4);
        assert_eq!(brute_box_cut(0, 4, 4).unwrap(), 0);
        assert!(brute_box_cut(2, 5, 5).is_err());
    }

    #[test]
    fn lr_inner_matches_capacity_free_minimum() {
        let inst = ex2();
        // μ = 0: flipping everything costs -2 with no jumps.
        let r = brute_lr_inner(&inst, rat(0)).unwrap();
        assert_eq!(r.objective, rat(-2));
        assert_eq!(r.optima, vec![Grid::filled(2, 2, 1)]);
        let r = brute_lr_inner(&inst, ratio(1, 2)).unwrap();
        assert_eq!(r.objective, ratio(-1, 2));
    }

    #[test]
    fn too_large_is_an_error() {
        let inst = gen_random(1, 6, 6, 0, 2, 30, rat(1)).unwrap();
        assert!(matches!(brute_force_ip(&inst), Err(Error::TooLarge(_))));
    }
}
