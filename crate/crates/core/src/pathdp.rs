//! Exact dynamic programming for one-dimensional subproblems, and the
//! reduced problem in which every other row (or column) is frozen.
//!
//! A line is a sequence of cells with a TV weight between consecutive
//! cells; a zero weight marks a break between two serialized grid lines.
//! The DP runs over (position, value, capacity used).

use crate::error::{Error, Result};
use crate::grid::{neighbors, Grid};
use crate::instance::{capacity_used, is_feasible, IntStep, TripInstance};
use crate::num::{rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineProblem {
    pub cost: Vec<Rational>,
    pub prev: Vec<i64>,
    /// Weight of `|v_{k+1} − v_k|`; one entry per consecutive pair.
    pub edge_weight: Vec<Rational>,
    /// Additive cost of each value `xi_lo + idx` per cell; empty means none.
    pub penalty: Vec<Vec<Rational>>,
    pub xi_lo: i64,
    pub xi_hi: i64,
    pub budget: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineSolution {
    /// New values `x + d` per cell.
    pub values: Vec<i64>,
    pub objective: Rational,
    pub capacity: i64,
}

/// Exact optimum of `Σ c_k (v_k − x_k) + Σ w_k |v_{k+1} − v_k| + Σ pen_k(v_k)`
/// subject to `Σ |v_k − x_k| ≤ budget`. Among equal objectives the smallest
/// capacity wins, then the lexicographically smallest values.
pub fn solve_line(lp: &LineProblem) -> Result<LineSolution> {
    let len = lp.cost.len();
    if lp.prev.len() != len
        || lp.edge_weight.len() + 1 != len.max(1)
        || (!lp.penalty.is_empty() && lp.penalty.len() != len)
    {
        return Err(Error::OutOfRange(
            "inconsistent line problem lengths".into(),
        ));
    }
    if lp.budget < 0 {
        return Err(Error::InfeasibleStep(format!(
            "negative line budget {}",
            lp.budget
        )));
    }
    if len == 0 {
        return Ok(LineSolution {
            values: Vec::new(),
            objective: rat(0),
            capacity: 0,
        });
    }
    let nv = (lp.xi_hi - lp.xi_lo + 1) as usize;
    let span = (lp.xi_hi - lp.xi_lo) as usize;
    let budget = (lp.budget as usize).min(len * span);
    let width = nv * (budget + 1);
    let at = |v: usize, u: usize| v * (budget + 1) + u;
    let value = |v: usize| lp.xi_lo + v as i64;
    let unary = |k: usize, v: usize| {
        let mut c = lp.cost[k] * rat(value(v) - lp.prev[k]);
        if !lp.penalty.is_empty() {
            c += lp.penalty[k][v];
        }
        c
    };
    let used = |k: usize, v: usize| (value(v) - lp.prev[k]).unsigned_abs() as usize;

    let mut dp: Vec<Option<Rational>> = vec![None; width];
    let mut parent: Vec<Vec<u16>> = Vec::with_capacity(len);
    for v in 0..nv {
        let u = used(0, v);
        if u <= budget {
            dp[at(v, u)] = Some(unary(0, v));
        }
    }
    parent.push(vec![0; width]);
    for k in 1..len {
        let mut next: Vec<Option<Rational>> = vec![None; width];
        let mut par = vec![0u16; width];
        let w = lp.edge_weight[k - 1];
        for v in 0..nv {
            let add = used(k, v);
            let base = unary(k, v);
            for pv in 0..nv {
                let jump = w * rat((v as i64 - pv as i64).abs());
                for pu in 0..=budget.saturating_sub(add) {
                    if pu + add > budget {
                        break;
                    }
                    if let Some(pval) = dp[at(pv, pu)] {
                        let cand = pval + jump + base;
                        let slot = &mut next[at(v, pu + add)];
                        if slot.is_none_or(|s| cand < s) {
                            *slot = Some(cand);
                            par[at(v, pu + add)] = pv as u16;
                        }
                    }
                }
            }
        }
        dp = next;
        parent.push(par);
    }
    let mut best: Option<(Rational, usize, usize)> = None;
    for u in 0..=budget {
        for v in 0..nv {
            if let Some(val) = dp[at(v, u)] {
                if best.is_none_or(|b| val < b.0) {
                    best = Some((val, v, u));
                }
            }
        }
    }
    let (objective, mut v, mut u) =
        best.ok_or_else(|| Error::InfeasibleStep("no feasible line assignment".into()))?;
    let capacity = u as i64;
    let mut values = vec![0i64; len];
    for k in (0..len).rev() {
        values[k] = value(v);
        if k > 0 {
            let pv = parent[k][at(v, u)] as usize;
            u -= used(k, v);
            v = pv;
        }
    }
    Ok(LineSolution {
        values,
        objective,
        capacity,
    })
}

/// Which lines are held fixed. Row/column numbers are 1-based, so
/// `EvenRows` freezes the 2nd, 4th, ... row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FreezePattern {
    OddCols,
    EvenCols,
    OddRows,
    EvenRows,
}

impl FreezePattern {
    pub const ALL: [FreezePattern; 4] = [
        FreezePattern::OddCols,
        FreezePattern::EvenCols,
        FreezePattern::OddRows,
        FreezePattern::EvenRows,
    ];

    pub fn is_frozen(self, i: usize, j: usize) -> bool {
        // 0-based index k is line k + 1, which is even iff k is odd.
        match self {
            FreezePattern::EvenRows => i % 2 == 1,
            FreezePattern::OddRows => i.is_multiple_of(2),
            FreezePattern::EvenCols => j % 2 == 1,
            FreezePattern::OddCols => j.is_multiple_of(2),
        }
    }

    fn by_rows(self) -> bool {
        matches!(self, FreezePattern::EvenRows | FreezePattern::OddRows)
    }
}

/// Free cells in serialization order and, per consecutive pair, whether the
/// pair straddles a line break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SerializedRedIp {
    pub cells: Vec<usize>,
    pub row_break: Vec<bool>,
}

pub fn serialize_free(n: usize, m: usize, pattern: FreezePattern) -> SerializedRedIp {
    let mut cells = Vec::new();
    let mut row_break = Vec::new();
    let lines: Vec<Vec<usize>> = if pattern.by_rows() {
        (0..n)
            .filter(|&i| !pattern.is_frozen(i, 0))
            .map(|i| (0..m).map(|j| i * m + j).collect())
            .collect()
    } else {
        (0..m)
            .filter(|&j| !pattern.is_frozen(0, j))
            .map(|j| (0..n).map(|i| i * m + j).collect())
            .collect()
    };
    for line in lines {
        for (p, &k) in line.iter().enumerate() {
            if !cells.is_empty() {
                row_break.push(p == 0);
            }
            cells.push(k);
        }
    }
    SerializedRedIp { cells, row_break }
}

/// Optimal step among those agreeing with `d_tilde` on the frozen lines,
/// sharing the integer capacity `⌊Δ⌋` with the frozen cells.
pub fn solve_red_ip(
    inst: &TripInstance,
    d_tilde: &IntStep,
    pattern: FreezePattern,
) -> Result<IntStep> {
    if !is_feasible(inst, d_tilde)?.feasible {
        return Err(Error::InfeasibleStep("warm start is not feasible".into()));
    }
    let (n, m) = inst.shape();
    let ser = serialize_free(n, m, pattern);
    let prev = inst.prev().as_slice();
    let y: Vec<i64> = d_tilde.iter().zip(prev).map(|(d, x)| d + x).collect();
    let free: Vec<bool> = (0..n * m)
        .map(|k| !pattern.is_frozen(k / m, k % m))
        .collect();
    let frozen_used: i64 = (0..n * m)
        .filter(|&k| !free[k])
        .map(|k| d_tilde.as_slice()[k].abs())
        .sum();
    let alpha = inst.alpha();
    let penalty = ser
        .cells
        .iter()
        .map(|&k| {
            (inst.xi_lo()..=inst.xi_hi())
                .map(|v| {
                    let jumps: i64 = neighbors(n, m, k)
                        .filter(|&w| !free[w])
                        .map(|w| (v - y[w]).abs())
                        .sum();
                    alpha * rat(jumps)
                })
                .collect()
        })
        .collect();
    let line = LineProblem {
        cost: ser
            .cells
            .iter()
            .map(|&k| inst.cost().as_slice()[k])
            .collect(),
        prev: ser.cells.iter().map(|&k| prev[k]).collect(),
        edge_weight: ser
            .row_break
            .iter()
            .map(|&b| if b { rat(0) } else { alpha })
            .collect(),
        penalty,
        xi_lo: inst.xi_lo(),
        xi_hi: inst.xi_hi(),
        budget: inst.budget() - frozen_used,
    };
    let sol = solve_line(&line)?;
    let mut out = d_tilde.clone();
    for (&k, &v) in ser.cells.iter().zip(&sol.values) {
        out.as_mut_slice()[k] = v - prev[k];
    }
    debug_assert!(capacity_used(&out) <= inst.delta_cap());
    Ok(out)
}

/// All steps of a line problem by enumeration, for testing.
#[cfg(test)]
pub(crate) fn brute_line(lp: &LineProblem) -> Rational {
    let len = lp.cost.len();
    let nv = (lp.xi_hi - lp.xi_lo + 1) as usize;
    let mut best: Option<Rational> = None;
    for code in 0..nv.pow(len as u32) {
        let mut c = code;
        let vals: Vec<i64> = (0..len)
            .map(|_| {
                let v = lp.xi_lo + (c % nv) as i64;
                c /= nv;
                v
            })
            .collect();
        let used: i64 = vals.iter().zip(&lp.prev).map(|(v, x)| (v - x).abs()).sum();
        if used > lp.budget {
            continue;
        }
        let mut obj = rat(0);
        for k in 0..len {
            obj += lp.cost[k] * rat(vals[k] - lp.prev[k]);
            if !lp.penalty.is_empty() {
                obj += lp.penalty[k][(vals[k] - lp.xi_lo) as usize];
            }
            if k > 0 {
                obj += lp.edge_weight[k - 1] * rat((vals[k] - vals[k - 1]).abs());
            }
        }
        if best.is_none_or(|b| obj < b) {
            best = Some(obj);
        }
    }
    best.expect("zero step is always feasible")
}

/// Shape helper used by callers that pass a step as nested rows.
pub fn step_from_values(inst: &TripInstance, values: &Grid<i64>) -> IntStep {
    values.zip_map(inst.prev(), |v, x| v - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_random, objective_ip};
    use crate::oracle::brute_force_ip;
    use rand::{Rng, SeedableRng};

    #[test]
    fn trivial_lines() {
        let one = LineProblem {
            cost: vec![rat(-1)],
            prev: vec![0],
            edge_weight: vec![],
            penalty: vec![],
            xi_lo: 0,
            xi_hi: 1,
            budget: 1,
        };
        let s = solve_line(&one).unwrap();
        assert_eq!((s.values, s.objective), (vec![1], rat(-1)));
        let frozen = LineProblem {
            cost: vec![rat(-3), rat(2), rat(-1)],
            prev: vec![0, 1, 2],
            edge_weight: vec![rat(1), rat(1)],
            penalty: vec![],
            xi_lo: 0,
            xi_hi: 2,
            budget: 0,
        };
        let s = solve_line(&frozen).unwrap();
        assert_eq!(s.values, vec![0, 1, 2]);
        assert_eq!(s.objective, rat(2));
    }

    #[test]
    fn random_lines_match_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let len = rng.gen_range(1..=6);
            let hi = rng.gen_range(1..=2);
            let lp = LineProblem {
                cost: (0..len)
                    .map(|_| Rational::new(rng.gen_range(-30..=30), 10))
                    .collect(),
                prev: (0..len).map(|_| rng.gen_range(0..=hi)).collect(),
                edge_weight: (1..len)
                    .map(|_| Rational::new(rng.gen_range(0..=20), 10))
                    .collect(),
                penalty: if rng.gen_bool(0.5) {
                    (0..len)
                        .map(|_| {
                            (0..=hi)
                                .map(|_| Rational::new(rng.gen_range(0..=20), 10))
                                .collect()
                        })
                        .collect()
                } else {
                    vec![]
                },
                xi_lo: 0,
                xi_hi: hi,
                budget: rng.gen_range(0..=4),
            };
            let s = solve_line(&lp).unwrap();
            assert_eq!(s.objective, brute_line(&lp), "{lp:?}");
        }
    }

    #[test]
    fn patterns_split_grid_in_halves() {
        for p in FreezePattern::ALL {
            let ser = serialize_free(4, 4, p);
            assert_eq!(ser.cells.len(), 8);
            assert_eq!(ser.row_break.iter().filter(|&&b| b).count(), 1);
        }
        assert_eq!(
            serialize_free(4, 3, FreezePattern::EvenRows).cells,
            vec![0, 1, 2, 6, 7, 8]
        );
        assert_eq!(
            serialize_free(3, 2, FreezePattern::OddCols).cells,
            vec![1, 3, 5]
        );
    }

    #[test]
    fn reduced_problem_never_worsens_and_keeps_optimum() {
        for seed in 0..20 {
            let inst = gen_random(seed, 4, 4, 0, 1, 4, rat(3)).unwrap();
            let opt = brute_force_ip(&inst).unwrap();
            let d = &opt.optima[0];
            for p in FreezePattern::ALL {
                let r = solve_red_ip(&inst, d, p).unwrap();
                assert_eq!(objective_ip(&inst, &r).unwrap(), opt.objective);
            }
            let zero = inst.zero_step();
            for p in FreezePattern::ALL {
                let r = solve_red_ip(&inst, &zero, p).unwrap();
                assert!(objective_ip(&inst, &r).unwrap() <= objective_ip(&inst, &zero).unwrap());
                assert!(is_feasible(&inst, &r).unwrap().feasible);
                for (k, &v) in r.iter().enumerate() {
                    if p.is_frozen(k / 4, k % 4) {
                        assert_eq!(v, 0);
                    }
                }
            }
        }
    }
}
