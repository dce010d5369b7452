//! Exact solver for two-valued instances by branch and bound on the
//! Lagrangian bound. Nodes fix cell values; each node is bounded by the
//! capacity-relaxed minimum cut with those fixings. Intended for large,
//! structured instances where enumeration is out of reach.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::neighbors;
use crate::instance::{capacity_used, objective_ip, IntStep, TripInstance};
use crate::num::{rat, Rational};

use super::lr::solve_lr_with;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSolution {
    pub objective: Rational,
    pub step: IntStep,
    pub nodes: usize,
    /// Cells fixed up front because changing them can never pay off.
    pub dominated: usize,
}

struct Node {
    bound: Rational,
    id: usize,
    fixed: Vec<Option<i64>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

/// Fixings of cells whose change costs more than the largest possible TV
/// saving: dropping such a change from any step is strictly better.
pub fn dominance_fixings(inst: &TripInstance) -> Vec<Option<i64>> {
    let (n, m) = inst.shape();
    let lo = inst.xi_lo();
    (0..n * m)
        .map(|k| {
            let x = inst.prev().as_slice()[k];
            let c = inst.cost().as_slice()[k];
            let change_cost = if x == lo { c } else { -c };
            let saving = inst.alpha() * rat(neighbors(n, m, k).count() as i64);
            (change_cost > saving).then_some(x)
        })
        .collect()
}

/// Exact optimum of a two-valued instance, or an error past `max_nodes`.
pub fn lr_branch_and_bound(inst: &TripInstance, max_nodes: usize) -> Result<ExactSolution> {
    inst.require_binary()?;
    let prev = inst.prev().as_slice();
    let root = dominance_fixings(inst);
    let dominated = root.iter().filter(|f| f.is_some()).count();
    let mut best = inst.zero_step();
    let mut best_obj = objective_ip(inst, &best)?;
    let mut heap = BinaryHeap::from([Node {
        bound: Rational::from_integer(i64::MIN / 4),
        id: 0,
        fixed: root,
    }]);
    let mut next_id = 1;
    let mut nodes = 0;
    while let Some(node) = heap.pop() {
        if node.bound >= best_obj {
            break;
        }
        if nodes >= max_nodes {
            return Err(Error::TooLarge(format!(
                "exact search exceeded {max_nodes} nodes"
            )));
        }
        nodes += 1;
        let forced: i64 = node
            .fixed
            .iter()
            .zip(prev)
            .map(|(f, x)| f.map_or(0, |v| (v - x).abs()))
            .sum();
        if forced > inst.budget() {
            continue;
        }
        let lr = solve_lr_with(inst, Some(&node.fixed))?;
        let low_obj = objective_ip(inst, &lr.d_low)?;
        if low_obj < best_obj && capacity_used(&lr.d_low) <= inst.delta_cap() {
            best = lr.d_low.clone();
            best_obj = low_obj;
        }
        if lr.value >= best_obj || low_obj == lr.value {
            continue;
        }
        let Some(k) = (0..prev.len()).find(|&k| {
            node.fixed[k].is_none() && lr.d_low.as_slice()[k] != lr.d_high.as_slice()[k]
        }) else {
            return Err(Error::Lp(
                "Lagrangian optima agree but the bound is not attained".into(),
            ));
        };
        for d in [lr.d_high.as_slice()[k], lr.d_low.as_slice()[k]] {
            let mut fixed = node.fixed.clone();
            fixed[k] = Some(prev[k] + d);
            heap.push(Node {
                bound: lr.value,
                id: next_id,
                fixed,
            });
            next_id += 1;
        }
    }
    Ok(ExactSolution {
        objective: best_obj,
        step: best,
        nodes,
        dominated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_random;
    use crate::oracle::brute_force_ip;

    #[test]
    fn matches_enumeration() {
        for seed in 0..40 {
            let inst = gen_random(
                300 + seed,
                3 + (seed % 2) as usize,
                4,
                0,
                1,
                1 + (seed % 6) as i64,
                rat(4),
            )
            .unwrap();
            let exact = lr_branch_and_bound(&inst, 10_000).unwrap();
            let opt = brute_force_ip(&inst).unwrap();
            assert_eq!(exact.objective, opt.objective, "seed {seed}");
            assert!(opt.contains(&exact.step));
        }
    }

    #[test]
    fn dominance_keeps_optimum() {
        for seed in 0..20 {
            let inst = gen_random(900 + seed, 3, 3, 0, 1, 3, rat(8)).unwrap();
            let fixed = dominance_fixings(&inst);
            let opt = brute_force_ip(&inst).unwrap();
            for d in &opt.optima {
                for (k, f) in fixed.iter().enumerate() {
                    if let Some(v) = f {
                        assert_eq!(inst.prev().as_slice()[k] + d.as_slice()[k], *v);
                    }
                }
            }
        }
    }
}
