use std::collections::VecDeque;

use super::LpSolution;
use crate::grid::{neighbors, Grid};
use crate::instance::TripInstance;
use crate::num::to_f64;

pub const TOL_INT: f64 = 1e-6;
pub const TOL_EQ: f64 = 1e-7;

/// Fractional structure of an LP point. Cells are flat row-major indices.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalAnalysis {
    /// `x + d` per cell.
    pub value: Grid<f64>,
    pub d: Grid<f64>,
    /// Cells whose value is not integral.
    pub fractional: Vec<usize>,
    /// Maximal 4-connected sets of fractional cells with equal value.
    pub components: Vec<Vec<usize>>,
    /// Largest connected equal-value set that also shares one previous control.
    pub g: Vec<usize>,
    /// Integral cells with a nonzero step.
    pub h: Vec<usize>,
    pub delta_out: f64,
    pub delta_r: f64,
    pub is_integral: bool,
}

impl FractionalAnalysis {
    pub fn is_fractional(&self, k: usize) -> bool {
        self.fractional.binary_search(&k).is_ok()
    }
}

pub fn extract_components(inst: &TripInstance, sol: &LpSolution) -> FractionalAnalysis {
    extract_components_with(inst, sol, TOL_INT, TOL_EQ)
}

pub fn extract_components_with(
    inst: &TripInstance,
    sol: &LpSolution,
    tol_int: f64,
    tol_eq: f64,
) -> FractionalAnalysis {
    let (n, m) = inst.shape();
    let d = Grid::from_vec(n, m, sol.x[..n * m].to_vec()).expect("solution covers the d block");
    analyze_step(inst, &d, tol_int, tol_eq)
}

/// Same analysis for an arbitrary step matrix.
pub fn analyze_step(
    inst: &TripInstance,
    d: &Grid<f64>,
    tol_int: f64,
    tol_eq: f64,
) -> FractionalAnalysis {
    let (n, m) = inst.shape();
    let value = inst.prev().zip_map(d, |&x, &v| x as f64 + v);
    let y = value.as_slice();
    let is_frac = |k: usize| (y[k] - y[k].round()).abs() > tol_int;
    let fractional: Vec<usize> = (0..n * m).filter(|&k| is_frac(k)).collect();

    let group = |same_x: bool| {
        let mut seen = vec![false; n * m];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for &s in &fractional {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                for b in neighbors(n, m, a) {
                    if !seen[b]
                        && is_frac(b)
                        && (y[a] - y[b]).abs() <= tol_eq
                        && (!same_x || inst.prev().as_slice()[a] == inst.prev().as_slice()[b])
                    {
                        seen[b] = true;
                        comp.push(b);
                        queue.push_back(b);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    };
    let components = group(false);
    let g = group(true).into_iter().fold(
        Vec::new(),
        |best, c| if c.len() > best.len() { c } else { best },
    );
    let h: Vec<usize> = (0..n * m)
        .filter(|&k| !is_frac(k) && d.as_slice()[k].abs() > tol_int)
        .collect();
    let delta_out: f64 = h.iter().map(|&k| d.as_slice()[k].abs()).sum();
    FractionalAnalysis {
        delta_r: to_f64(inst.delta_cap()) - delta_out,
        is_integral: fractional.is_empty(),
        value,
        d: d.clone(),
        fractional,
        components,
        g,
        h,
        delta_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::ex2;
    use crate::simplex::{build_lp, solve_lp, SimplexOptions};

    #[test]
    fn ex2_single_component() {
        let inst = ex2();
        let sol = solve_lp(&build_lp(&inst, &[]).unwrap(), &SimplexOptions::default());
        let fa = extract_components(&inst, &sol);
        assert!(!fa.is_integral);
        assert_eq!(fa.components, vec![vec![0, 1, 2, 3]]);
        assert_eq!(fa.g, vec![0, 1, 2, 3]);
        assert!(fa.h.is_empty());
        assert_eq!(fa.delta_out, 0.0);
        assert!((fa.delta_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integral_step() {
        let inst = ex2();
        let d = Grid::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let fa = analyze_step(&inst, &d, TOL_INT, TOL_EQ);
        assert!(fa.is_integral);
        assert!(fa.fractional.is_empty());
        assert_eq!(fa.h, vec![0]);
        assert_eq!(fa.delta_out, 1.0);
    }
}
