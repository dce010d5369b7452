//! LP relaxation of the subproblem and a bounded-variable primal simplex
//! that returns basic (vertex) optima.

mod analysis;
mod solver;

pub use analysis::{
    analyze_step, extract_components, extract_components_with, FractionalAnalysis, TOL_EQ, TOL_INT,
};
pub use solver::{solve_lp, solve_lp_from, LpSolution, LpStatus, SimplexOptions, VarStatus};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::instance::TripInstance;
use crate::num::{to_f64, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRole {
    D,
    Delta,
    Beta,
    Gamma,
}

/// A variable addressed by role and 0-based grid index. For `Beta` the
/// index is the upper cell of a vertical edge, for `Gamma` the left cell of
/// a horizontal edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub role: VarRole,
    pub i: usize,
    pub j: usize,
}

impl VarRef {
    pub fn d(i: usize, j: usize) -> Self {
        VarRef {
            role: VarRole::D,
            i,
            j,
        }
    }
    pub fn delta(i: usize, j: usize) -> Self {
        VarRef {
            role: VarRole::Delta,
            i,
            j,
        }
    }
    pub fn beta(i: usize, j: usize) -> Self {
        VarRef {
            role: VarRole::Beta,
            i,
            j,
        }
    }
    pub fn gamma(i: usize, j: usize) -> Self {
        VarRef {
            role: VarRole::Gamma,
            i,
            j,
        }
    }

    /// Name in 1-based grid coordinates, e.g. `delta_2_3`.
    pub fn name(&self) -> String {
        let role = match self.role {
            VarRole::D => "d",
            VarRole::Delta => "delta",
            VarRole::Beta => "beta",
            VarRole::Gamma => "gamma",
        };
        format!("{role}_{}_{}", self.i + 1, self.j + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarInfo {
    pub var: VarRef,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear row over named variables with exact coefficients, e.g. a cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraRow {
    pub coeffs: Vec<(VarRef, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    shape: (usize, usize),
    vars: Vec<VarInfo>,
    rows: Vec<Row>,
    objective: Vec<f64>,
    base_rows: usize,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Rows belonging to the relaxation itself, before any extra rows.
    pub fn n_base_rows(&self) -> usize {
        self.base_rows
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Column index of a variable.
    pub fn index(&self, v: VarRef) -> Result<usize> {
        let (n, m) = self.shape;
        let nm = n * m;
        let bad = || Error::UnknownVariable(v.name());
        match v.role {
            VarRole::D if v.i < n && v.j < m => Ok(v.i * m + v.j),
            VarRole::Delta if v.i < n && v.j < m => Ok(nm + v.i * m + v.j),
            VarRole::Beta if v.i + 1 < n && v.j < m => Ok(2 * nm + v.i * m + v.j),
            VarRole::Gamma if v.i < n && v.j + 1 < m => {
                Ok(2 * nm + (n - 1) * m + v.i * (m - 1) + v.j)
            }
            _ => Err(bad()),
        }
    }

    pub fn add_row(&mut self, row: &ExtraRow) -> Result<()> {
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(v, a) in &row.coeffs {
            coeffs.push((self.index(v)?, to_f64(a)));
        }
        coeffs.sort_by_key(|&(k, _)| k);
        coeffs.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        self.rows.push(Row {
            coeffs,
            sense: row.sense,
            rhs: to_f64(row.rhs),
        });
        Ok(())
    }

    /// Bound override on a variable, e.g. a branching decision on `d`.
    pub fn set_bounds(&mut self, v: VarRef, lower: f64, upper: f64) -> Result<()> {
        let k = self.index(v)?;
        self.vars[k].lower = lower;
        self.vars[k].upper = upper;
        Ok(())
    }

    /// The `d` block of a full variable vector.
    pub fn d_grid(&self, x: &[f64]) -> Grid<f64> {
        let (n, m) = self.shape;
        Grid::from_vec(n, m, x[..n * m].to_vec()).expect("d block has N*M entries")
    }

    /// CPLEX-style text dump for cross-checking with external solvers.
    pub fn to_lp_text(&self) -> String {
        let mut s = String::from("\\ trust-region subproblem relaxation\nMinimize\n obj:");
        for (k, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(
                    s,
                    " {} {} {}",
                    if c < 0.0 { "-" } else { "+" },
                    c.abs(),
                    self.vars[k].var.name()
                );
            }
        }
        s.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(s, " r{r}:");
            for &(k, a) in &row.coeffs {
                let _ = write!(
                    s,
                    " {} {} {}",
                    if a < 0.0 { "-" } else { "+" },
                    a.abs(),
                    self.vars[k].var.name()
                );
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(s, " {op} {}", row.rhs);
        }
        s.push_str("Bounds\n");
        for v in &self.vars {
            let lo = if v.lower.is_finite() {
                v.lower.to_string()
            } else {
                "-inf".into()
            };
            let hi = if v.upper.is_finite() {
                v.upper.to_string()
            } else {
                "+inf".into()
            };
            let _ = writeln!(s, " {lo} <= {} <= {hi}", v.var.name());
        }
        s.push_str("End\n");
        s
    }
}

/// The relaxation over the polyhedron with capacity, plus `extra` rows.
///
/// Rows, in order: value range of `x + d` (two per cell), the two
/// absolute-value rows of each vertical and each horizontal difference, the
/// two rows `δ ≥ ±d` per cell, and the capacity row `Σδ ≤ Δ`.
pub fn build_lp(inst: &TripInstance, extra: &[ExtraRow]) -> Result<LinearProgram> {
    let (n, m) = inst.shape();
    let mut vars = Vec::with_capacity(4 * n * m);
    for i in 0..n {
        for j in 0..m {
            vars.push(VarInfo {
                var: VarRef::d(i, j),
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            });
        }
    }
    let nonneg = |var| VarInfo {
        var,
        lower: 0.0,
        upper: f64::INFINITY,
    };
    for i in 0..n {
        for j in 0..m {
            vars.push(nonneg(VarRef::delta(i, j)));
        }
    }
    for i in 0..n.saturating_sub(1) {
        for j in 0..m {
            vars.push(nonneg(VarRef::beta(i, j)));
        }
    }
    for i in 0..n {
        for j in 0..m.saturating_sub(1) {
            vars.push(nonneg(VarRef::gamma(i, j)));
        }
    }
    let mut lp = LinearProgram {
        shape: (n, m),
        objective: vec![0.0; vars.len()],
        vars,
        rows: Vec::new(),
        base_rows: 0,
    };
    let alpha = to_f64(inst.alpha());
    for i in 0..n {
        for j in 0..m {
            lp.objective[i * m + j] = to_f64(inst.cost()[(i, j)]);
        }
    }
    for k in 2 * n * m..lp.vars.len() {
        lp.objective[k] = alpha;
    }

    let x = |i: usize, j: usize| inst.prev()[(i, j)] as f64;
    let (lo, hi) = (inst.xi_lo() as f64, inst.xi_hi() as f64);
    let d = |i, j| i * m + j;
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..m {
            rows.push(Row {
                coeffs: vec![(d(i, j), 1.0)],
                sense: Sense::Ge,
                rhs: lo - x(i, j),
            });
            rows.push(Row {
                coeffs: vec![(d(i, j), 1.0)],
                sense: Sense::Le,
                rhs: hi - x(i, j),
            });
        }
    }
    // |y_b - y_a| ≤ aux, with y = x + d, as aux - d_b + d_a ≥ x_b - x_a and aux + d_b - d_a ≥ x_a - x_b.
    let mut diff = |aux: usize, a: (usize, usize), b: (usize, usize)| {
        let gap = x(b.0, b.1) - x(a.0, a.1);
        let (ka, kb) = (d(a.0, a.1), d(b.0, b.1));
        let mut plus = vec![(ka, 1.0), (kb, -1.0), (aux, 1.0)];
        let mut minus = vec![(ka, -1.0), (kb, 1.0), (aux, 1.0)];
        plus.sort_by_key(|e| e.0);
        minus.sort_by_key(|e| e.0);
        rows.push(Row {
            coeffs: plus,
            sense: Sense::Ge,
            rhs: gap,
        });
        rows.push(Row {
            coeffs: minus,
            sense: Sense::Ge,
            rhs: -gap,
        });
    };
    for i in 0..n.saturating_sub(1) {
        for j in 0..m {
            let aux = lp.index(VarRef::beta(i, j))?;
            diff(aux, (i, j), (i + 1, j));
        }
    }
    for i in 0..n {
        for j in 0..m.saturating_sub(1) {
            let aux = lp.index(VarRef::gamma(i, j))?;
            diff(aux, (i, j), (i, j + 1));
        }
    }
    let nm = n * m;
    for k in 0..nm {
        rows.push(Row {
            coeffs: vec![(k, -1.0), (nm + k, 1.0)],
            sense: Sense::Ge,
            rhs: 0.0,
        });
        rows.push(Row {
            coeffs: vec![(k, 1.0), (nm + k, 1.0)],
            sense: Sense::Ge,
            rhs: 0.0,
        });
    }
    rows.push(Row {
        coeffs: (nm..2 * nm).map(|k| (k, 1.0)).collect(),
        sense: Sense::Le,
        rhs: to_f64(inst.delta_cap()),
    });
    lp.base_rows = rows.len();
    lp.rows = rows;
    for r in extra {
        lp.add_row(r)?;
    }
    Ok(lp)
}

/// Index of the capacity row in a program built by [`build_lp`].
pub fn capacity_row(lp: &LinearProgram) -> usize {
    lp.n_base_rows() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::ex2;
    use crate::num::rat;

    #[test]
    fn ex2_dimensions() {
        let lp = build_lp(&ex2(), &[]).unwrap();
        assert_eq!(lp.n_vars(), 12);
        assert_eq!(lp.n_rows(), 25);
        let cap = &lp.rows()[capacity_row(&lp)];
        assert_eq!(cap.coeffs.len(), 4);
        assert!(cap
            .coeffs
            .iter()
            .all(|&(k, a)| a == 1.0 && lp.vars()[k].var.role == VarRole::Delta));
        assert_eq!(cap.rhs, 1.0);
    }

    #[test]
    fn extra_rows_and_bounds() {
        let inst = ex2();
        let cut = ExtraRow {
            coeffs: vec![(VarRef::delta(0, 0), rat(1)), (VarRef::beta(0, 1), rat(2))],
            sense: Sense::Ge,
            rhs: rat(0),
        };
        let mut lp = build_lp(&inst, &[cut]).unwrap();
        assert_eq!(lp.n_rows(), 26);
        assert_eq!(lp.n_vars(), 12);
        lp.set_bounds(VarRef::d(0, 0), 1.0, 1.0).unwrap();
        assert_eq!(lp.vars()[lp.index(VarRef::d(0, 0)).unwrap()].lower, 1.0);
        let bad = ExtraRow {
            coeffs: vec![(VarRef::beta(1, 0), rat(1))],
            sense: Sense::Ge,
            rhs: rat(0),
        };
        assert!(matches!(lp.add_row(&bad), Err(Error::UnknownVariable(_))));
        assert!(lp.to_lp_text().contains("delta_1_1 + 2 beta_1_2 >= 0"));
    }
}
