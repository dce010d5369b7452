//! Best-first branch and cut over the LP relaxation, with root cuts, the
//! pattern heuristic for incumbents and a row-parity branching rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::cuts::{separate, CutFamily};
use crate::error::{Error, Result};
use crate::heuristic::improve;
use crate::instance::{is_feasible, objective_ip, IntStep, TripInstance};
use crate::num::{format_rational, to_f64, Rational};
use crate::relax::solve_lr;
use crate::simplex::{
    build_lp, extract_components, solve_lp_from, FractionalAnalysis, LinearProgram, LpSolution,
    LpStatus, SimplexOptions, VarRef, VarStatus,
};

/// Relative slack below the incumbent under which a node is pruned.
const PRUNE_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchRule {
    EvenRowsFirst,
    MostFractional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub gap_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub use_fc_cut: bool,
    pub use_box_cut: bool,
    pub cut_rounds: usize,
    /// Separate at every node instead of only at the root.
    pub cuts_at_all_nodes: bool,
    pub heuristic_on: bool,
    /// Run the heuristic on every node whose id is a multiple of this.
    pub heuristic_every: usize,
    pub branch_rule: BranchRule,
    pub rng_seed: u64,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap_tol: 1e-3,
            time_limit: None,
            node_limit: None,
            use_fc_cut: true,
            use_box_cut: true,
            cut_rounds: 2,
            cuts_at_all_nodes: false,
            heuristic_on: true,
            heuristic_every: 10,
            branch_rule: BranchRule::EvenRowsFirst,
            rng_seed: 0,
            trace: false,
        }
    }
}

impl SolverConfig {
    /// Configuration for a tool combination named like `p-b-c`: `p` primal
    /// heuristic, `b` row-parity branching, `c` cuts; `none` disables all.
    pub fn for_tools(tools: &str) -> Result<Self> {
        let mut cfg = SolverConfig {
            use_fc_cut: false,
            use_box_cut: false,
            heuristic_on: false,
            branch_rule: BranchRule::MostFractional,
            ..SolverConfig::default()
        };
        if tools != "none" {
            for t in tools.split('-') {
                match t {
                    "p" => cfg.heuristic_on = true,
                    "b" => cfg.branch_rule = BranchRule::EvenRowsFirst,
                    "c" => {
                        cfg.use_fc_cut = true;
                        cfg.use_box_cut = true;
                    }
                    _ => {
                        return Err(Error::OutOfRange(format!(
                            "unknown tool '{t}' in '{tools}'"
                        )))
                    }
                }
            }
        }
        Ok(cfg)
    }
}

pub const TOOL_COMBINATIONS: [&str; 8] = ["none", "p", "b", "c", "p-b", "p-c", "b-c", "p-b-c"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// The tree was closed: the bound meets the incumbent.
    Optimal,
    /// Stopped because the relative gap fell below `gap_tol`.
    GapLimit,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

/// Value bounds `lo ≤ x + d ≤ hi` on cells, accumulated along a branch.
#[derive(Clone, Debug, PartialEq)]
pub struct BnbNode {
    pub id: usize,
    pub bounds: Vec<(usize, i64, i64)>,
    pub depth: usize,
    pub parent_bound: f64,
    basis: Option<Vec<VarStatus>>,
}

struct HeapEntry(BnbNode);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Max-heap on the reverse: smallest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .parent_bound
            .total_cmp(&self.0.parent_bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.id.cmp(&self.0.id))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub node: usize,
    pub depth: usize,
    pub bound: f64,
    pub incumbent: Rational,
    pub action: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub step: IntStep,
    pub objective: Rational,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub cuts_fc: usize,
    pub cuts_box: usize,
    pub heuristic_improvements: usize,
    pub trace: Vec<TraceRow>,
}

impl SolveResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("node,depth,bound,incumbent,action\n");
        for r in &self.trace {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.node,
                r.depth,
                r.bound,
                format_rational(r.incumbent),
                r.action
            );
        }
        s
    }
}

pub fn gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1e-10)).max(0.0)
}

fn distance_to_int(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Branching cell and the floor of its value. Children impose
/// `x + d ≤ floor` and `x + d ≥ floor + 1`.
pub fn select_branch(fa: &FractionalAnalysis, rule: BranchRule) -> Result<(usize, i64)> {
    if fa.fractional.is_empty() {
        return Err(Error::IntegralSolution);
    }
    let m = fa.value.cols();
    let vals = fa.value.as_slice();
    let key = |k: usize| {
        // Rows are counted from 1, so even rows have odd 0-based index.
        let parity = match rule {
            BranchRule::EvenRowsFirst => u8::from((k / m) % 2 == 1),
            BranchRule::MostFractional => 0,
        };
        (parity, distance_to_int(vals[k]))
    };
    let mut best = fa.fractional[0];
    for &k in &fa.fractional[1..] {
        let (pb, db) = key(best);
        let (pk, dk) = key(k);
        if pk > pb || (pk == pb && dk > db) {
            best = k;
        }
    }
    Ok((best, vals[best].floor() as i64))
}

struct Search<'a> {
    inst: &'a TripInstance,
    cfg: &'a SolverConfig,
    opts: SimplexOptions,
    lp: LinearProgram,
    incumbent: IntStep,
    inc_obj: Rational,
    cuts_fc: usize,
    cuts_box: usize,
    heuristic_improvements: usize,
    trace: Vec<TraceRow>,
}

impl Search<'_> {
    fn offer(&mut self, d: &IntStep, from_heuristic: bool) -> Result<bool> {
        if !is_feasible(self.inst, d)?.feasible {
            return Ok(false);
        }
        let obj = objective_ip(self.inst, d)?;
        if obj < self.inc_obj {
            self.incumbent = d.clone();
            self.inc_obj = obj;
            if from_heuristic {
                self.heuristic_improvements += 1;
            }
            return Ok(true);
        }
        Ok(false)
    }

    fn try_heuristic(&mut self, start: &IntStep) -> Result<()> {
        let r = improve(self.inst, start)?;
        self.offer(&r.step, true)?;
        Ok(())
    }

    fn node_lp(&self, node: &BnbNode) -> Result<LinearProgram> {
        let mut lp = self.lp.clone();
        let m = self.inst.n_cols();
        for &(k, lo, hi) in &node.bounds {
            let x = self.inst.prev().as_slice()[k];
            lp.set_bounds(VarRef::d(k / m, k % m), (lo - x) as f64, (hi - x) as f64)?;
        }
        Ok(lp)
    }

    fn solve_node(&self, lp: &LinearProgram, warm: Option<&[VarStatus]>) -> Result<LpSolution> {
        let sol = solve_lp_from(lp, warm, &self.opts);
        if sol.status != LpStatus::NumericalFailure {
            return Ok(sol);
        }
        let cold = solve_lp_from(lp, None, &self.opts);
        if cold.status == LpStatus::NumericalFailure {
            return Err(Error::Lp(cold.diagnostics));
        }
        Ok(cold)
    }

    /// Adds violated cuts to the global LP for up to `cut_rounds` rounds.
    fn cut_loop(&mut self, node: &BnbNode, mut sol: LpSolution) -> Result<LpSolution> {
        for round in 0..self.cfg.cut_rounds {
            let fa = extract_components(self.inst, &sol);
            if fa.is_integral {
                break;
            }
            let lp = self.node_lp(node)?;
            let seed = self
                .cfg
                .rng_seed
                .wrapping_add((node.id as u64) << 8)
                .wrapping_add(round as u64);
            let cuts = separate(
                self.inst,
                &lp,
                &sol,
                &fa,
                self.cfg.use_fc_cut,
                self.cfg.use_box_cut,
                seed,
            )?;
            if cuts.is_empty() {
                break;
            }
            for cut in &cuts {
                match cut.family {
                    CutFamily::FullyConnected => self.cuts_fc += 1,
                    CutFamily::BoundingBox => self.cuts_box += 1,
                }
                self.lp.add_row(&cut.to_row())?;
            }
            let lp = self.node_lp(node)?;
            sol = self.solve_node(&lp, Some(&sol.basis))?;
            if sol.status != LpStatus::Optimal {
                break;
            }
        }
        Ok(sol)
    }

    fn rounded_start(&self, fa: &FractionalAnalysis) -> IntStep {
        // Truncation toward zero keeps both the Xi range and the capacity.
        fa.d.map(|&v| {
            let r = v.round();
            if (v - r).abs() <= 1e-6 {
                r as i64
            } else {
                v.trunc() as i64
            }
        })
    }
}

/// Solves the integer problem by branch and cut.
pub fn solve(inst: &TripInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    if cfg.gap_tol.is_nan() || cfg.gap_tol < 0.0 {
        return Err(Error::OutOfRange(
            "gap tolerance must be non-negative".into(),
        ));
    }
    let start = Instant::now();
    let zero = inst.zero_step();
    let mut s = Search {
        inst,
        cfg,
        opts: SimplexOptions::default(),
        lp: build_lp(inst, &[])?,
        inc_obj: objective_ip(inst, &zero)?,
        incumbent: zero,
        cuts_fc: 0,
        cuts_box: 0,
        heuristic_improvements: 0,
        trace: Vec::new(),
    };
    let cuts_on = cfg.use_fc_cut || cfg.use_box_cut;
    if cfg.heuristic_on && inst.is_binary() {
        let lr = solve_lr(inst)?;
        s.offer(&lr.d_low, true)?;
        s.try_heuristic(&lr.d_low)?;
    }

    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry(BnbNode {
        id: 0,
        bounds: Vec::new(),
        depth: 0,
        parent_bound: f64::NEG_INFINITY,
        basis: None,
    }));
    let mut next_id = 1;
    let mut nodes = 0;
    let mut global_bound = f64::NEG_INFINITY;
    let mut status = SolveStatus::Optimal;

    while let Some(HeapEntry(node)) = heap.pop() {
        let inc = to_f64(s.inc_obj);
        let tol = PRUNE_EPS * inc.abs().max(1.0);
        global_bound = global_bound.max(node.parent_bound);
        if node.parent_bound >= inc - tol {
            // Every open node is at least as bad.
            heap.clear();
            break;
        }
        if gap(inc, node.parent_bound) <= cfg.gap_tol {
            heap.push(HeapEntry(node));
            status = SolveStatus::GapLimit;
            break;
        }
        if cfg.node_limit.is_some_and(|l| nodes >= l) {
            heap.push(HeapEntry(node));
            status = SolveStatus::NodeLimit;
            break;
        }
        if cfg.time_limit.is_some_and(|t| start.elapsed() >= t) {
            heap.push(HeapEntry(node));
            status = SolveStatus::TimeLimit;
            break;
        }
        nodes += 1;
        let lp = s.node_lp(&node)?;
        let mut sol = s.solve_node(&lp, node.basis.as_deref())?;
        let mut action = "branch";
        if sol.status == LpStatus::Optimal && cuts_on && (node.id == 0 || cfg.cuts_at_all_nodes) {
            sol = s.cut_loop(&node, sol)?;
        }
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                action = "infeasible";
            }
            LpStatus::Unbounded | LpStatus::NumericalFailure => {
                return Err(Error::Lp(format!(
                    "node {}: {:?} {}",
                    node.id, sol.status, sol.diagnostics
                )));
            }
        }
        if action == "branch" {
            let z = sol.objective;
            let fa = extract_components(inst, &sol);
            if fa.is_integral {
                let d = fa.d.map(|v| v.round() as i64);
                s.offer(&d, false)?;
                action = "integral";
            } else {
                if cfg.heuristic_on && node.id % cfg.heuristic_every.max(1) == 0 {
                    let start = s.rounded_start(&fa);
                    if is_feasible(inst, &start)?.feasible {
                        s.try_heuristic(&start)?;
                    }
                }
                let inc = to_f64(s.inc_obj);
                if z >= inc - PRUNE_EPS * inc.abs().max(1.0) {
                    action = "prune";
                } else {
                    let (k, fl) = select_branch(&fa, cfg.branch_rule)?;
                    let (lo, hi) = node
                        .bounds
                        .iter()
                        .rev()
                        .find(|b| b.0 == k)
                        .map(|b| (b.1, b.2))
                        .unwrap_or((inst.xi_lo(), inst.xi_hi()));
                    for (clo, chi) in [(lo, fl), (fl + 1, hi)] {
                        if clo > chi {
                            continue;
                        }
                        let mut bounds = node.bounds.clone();
                        bounds.push((k, clo, chi));
                        heap.push(HeapEntry(BnbNode {
                            id: next_id,
                            bounds,
                            depth: node.depth + 1,
                            parent_bound: z,
                            basis: Some(sol.basis.clone()),
                        }));
                        next_id += 1;
                    }
                }
            }
        }
        if cfg.trace {
            s.trace.push(TraceRow {
                node: node.id,
                depth: node.depth,
                bound: if sol.status == LpStatus::Optimal {
                    sol.objective
                } else {
                    f64::INFINITY
                },
                incumbent: s.inc_obj,
                action,
            });
        }
    }

    let inc = to_f64(s.inc_obj);
    let bound = match heap.peek() {
        Some(HeapEntry(n)) => global_bound.max(n.parent_bound).min(inc),
        None => inc,
    };
    Ok(SolveResult {
        status,
        step: s.incumbent,
        objective: s.inc_obj,
        bound,
        gap: gap(inc, bound),
        nodes,
        cuts_fc: s.cuts_fc,
        cuts_box: s.cuts_box,
        heuristic_improvements: s.heuristic_improvements,
        trace: s.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::instance::fixtures::{ex1, ex2};
    use crate::instance::gen_random;
    use crate::num::{rat, Rational};
    use crate::oracle::brute_force_ip;
    use crate::simplex::analyze_step;

    fn exact() -> SolverConfig {
        SolverConfig {
            gap_tol: 1e-9,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn worked_examples() {
        let r = solve(&ex1(), &exact()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Rational::new(-11, 10));
        let r = solve(&ex2(), &exact()).unwrap();
        assert_eq!(r.objective, rat(0));
        assert_eq!(r.step, ex2().zero_step());
    }

    #[test]
    fn matches_enumeration_for_all_tool_sets() {
        for seed in 0..12 {
            let hi = 1 + (seed % 2) as i64;
            let inst = gen_random(70 + seed, 3, 3, 0, hi, 1 + (seed % 5) as i64, rat(3)).unwrap();
            let opt = brute_force_ip(&inst).unwrap();
            for tools in TOOL_COMBINATIONS {
                let cfg = SolverConfig {
                    gap_tol: 1e-9,
                    ..SolverConfig::for_tools(tools).unwrap()
                };
                let r = solve(&inst, &cfg).unwrap();
                assert_eq!(r.objective, opt.objective, "seed {seed} tools {tools}");
                assert!(opt.contains(&r.step));
            }
        }
    }

    #[test]
    fn branch_selection_prefers_even_rows() {
        let inst = gen_random(1, 3, 4, 0, 1, 2, rat(1)).unwrap();
        let mut d = Grid::filled(3, 4, 0.0);
        // 1-based (1,2) and (2,3).
        d[(0, 1)] = 0.5;
        d[(1, 2)] = 0.2;
        let fa = analyze_step(&inst, &d, 1e-6, 1e-7);
        assert_eq!(select_branch(&fa, BranchRule::EvenRowsFirst).unwrap().0, 6);
        assert_eq!(select_branch(&fa, BranchRule::MostFractional).unwrap().0, 1);
    }

    #[test]
    fn limits_are_reported() {
        let inst = gen_random(3, 6, 6, 0, 1, 6, rat(2)).unwrap();
        let cfg = SolverConfig {
            node_limit: Some(1),
            heuristic_on: false,
            use_fc_cut: false,
            use_box_cut: false,
            ..SolverConfig::default()
        };
        let r = solve(&inst, &cfg).unwrap();
        assert!(matches!(
            r.status,
            SolveStatus::NodeLimit | SolveStatus::Optimal | SolveStatus::GapLimit
        ));
        assert!(r.bound <= to_f64(r.objective) + 1e-9);
        assert!(SolverConfig::for_tools("p-x").is_err());
    }

    #[test]
    fn deterministic() {
        let inst = gen_random(8, 5, 5, 0, 1, 3, rat(2)).unwrap();
        let cfg = SolverConfig {
            trace: true,
            ..SolverConfig::default()
        };
        assert_eq!(solve(&inst, &cfg).unwrap(), solve(&inst, &cfg).unwrap());
    }
}
