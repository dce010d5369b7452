//! Primal improvement by cycling through the four frozen-line patterns
//! until none of them gives a strict decrease.

use crate::error::{Error, Result};
use crate::instance::{is_feasible, objective_ip, IntStep, TripInstance};
use crate::num::Rational;
use crate::pathdp::{solve_red_ip, FreezePattern};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImproveResult {
    pub step: IntStep,
    pub objective: Rational,
    pub start_objective: Rational,
    /// Full passes over the four patterns, including the final idle pass.
    pub cycles: usize,
    pub improvements: usize,
    /// False if the pass limit stopped the loop before a fixed point.
    pub converged: bool,
}

/// Bound on strict improvements: `NM·|Ξ|·max(1, ⌊Δ⌋)`.
pub fn improvement_guard(inst: &TripInstance) -> usize {
    inst.n_cells() * inst.xi_len() * inst.budget().max(1) as usize
}

/// Improves a feasible integer step. The result is a fixed point: applying
/// any single pattern to it gives no strict improvement.
pub fn improve(inst: &TripInstance, d0: &IntStep) -> Result<ImproveResult> {
    if !is_feasible(inst, d0)?.feasible {
        return Err(Error::InfeasibleStep(
            "start point violates Xi or the capacity".into(),
        ));
    }
    let start_objective = objective_ip(inst, d0)?;
    let mut cur = d0.clone();
    let mut cur_obj = start_objective;
    let mut cycles = 0;
    let mut improvements = 0;
    let guard = improvement_guard(inst);
    let mut converged = true;
    loop {
        if improvements > guard {
            converged = false;
            break;
        }
        cycles += 1;
        let mut improved = false;
        for p in FreezePattern::ALL {
            let cand = solve_red_ip(inst, &cur, p)?;
            let obj = objective_ip(inst, &cand)?;
            if obj < cur_obj {
                cur = cand;
                cur_obj = obj;
                improved = true;
                improvements += 1;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(ImproveResult {
        step: cur,
        objective: cur_obj,
        start_objective,
        cycles,
        improvements,
        converged,
    })
}
