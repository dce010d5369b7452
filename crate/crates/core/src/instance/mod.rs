//! Problem data for the total-variation trust-region subproblem and the
//! exact evaluators used throughout the crate.

mod generate;
mod io;
mod mbfh;

pub use generate::gen_random;
pub use io::{read_instance, write_instance};
pub use mbfh::{
    brute_bisection_width, reduce_mbfh, reduce_mbfh_with_limit, MbfhClass, MbfhReduction,
    MBFH_DEFAULT_MAX_N,
};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::grid::{edges, Grid};
use crate::num::{abs, rat, Rational};

/// Integer step on the grid, the usual form of a candidate solution.
pub type IntStep = Grid<i64>;
/// Possibly fractional step, e.g. an LP point.
pub type ControlStep = Grid<Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripInstance {
    n_rows: usize,
    n_cols: usize,
    alpha: Rational,
    delta_cap: Rational,
    xi_lo: i64,
    xi_hi: i64,
    cost: Grid<Rational>,
    prev: Grid<i64>,
}

impl TripInstance {
    pub fn new(
        alpha: Rational,
        delta_cap: Rational,
        xi_lo: i64,
        xi_hi: i64,
        cost: Grid<Rational>,
        prev: Grid<i64>,
    ) -> Result<Self> {
        let (n, m) = cost.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInstance(format!("empty grid {n}x{m}")));
        }
        if prev.shape() != (n, m) {
            return Err(Error::ShapeMismatch {
                expected: (n, m),
                got: prev.shape(),
            });
        }
        if alpha <= Rational::zero() {
            return Err(Error::InvalidInstance(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if delta_cap.is_negative() {
            return Err(Error::InvalidInstance(format!(
                "capacity must be nonnegative, got {delta_cap}"
            )));
        }
        if xi_lo > xi_hi {
            return Err(Error::InvalidInstance(format!(
                "empty value range {xi_lo}..={xi_hi}"
            )));
        }
        if let Some(k) = prev.iter().position(|&v| v < xi_lo || v > xi_hi) {
            let (i, j) = prev.coords(k);
            return Err(Error::InvalidInstance(format!(
                "previous control {} at ({i}, {j}) outside {xi_lo}..={xi_hi}",
                prev.as_slice()[k]
            )));
        }
        Ok(TripInstance {
            n_rows: n,
            n_cols: m,
            alpha,
            delta_cap,
            xi_lo,
            xi_hi,
            cost,
            prev,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn delta_cap(&self) -> Rational {
        self.delta_cap
    }

    /// Largest integer capacity usable by an integer step.
    pub fn budget(&self) -> i64 {
        self.delta_cap.floor().to_integer()
    }

    pub fn xi_lo(&self) -> i64 {
        self.xi_lo
    }

    pub fn xi_hi(&self) -> i64 {
        self.xi_hi
    }

    pub fn xi_len(&self) -> usize {
        (self.xi_hi - self.xi_lo + 1) as usize
    }

    pub fn is_binary(&self) -> bool {
        self.xi_hi == self.xi_lo + 1
    }

    pub fn require_binary(&self) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::NonBinary {
                lo: self.xi_lo,
                hi: self.xi_hi,
            })
        }
    }

    pub fn cost(&self) -> &Grid<Rational> {
        &self.cost
    }

    pub fn prev(&self) -> &Grid<i64> {
        &self.prev
    }

    pub fn with_delta_cap(&self, delta_cap: Rational) -> Result<Self> {
        let mut out = self.clone();
        if delta_cap.is_negative() {
            return Err(Error::InvalidInstance(format!(
                "capacity must be nonnegative, got {delta_cap}"
            )));
        }
        out.delta_cap = delta_cap;
        Ok(out)
    }

    pub fn check_shape<T>(&self, g: &Grid<T>) -> Result<()> {
        if g.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                got: g.shape(),
            });
        }
        Ok(())
    }

    /// `x + d` as rationals.
    pub fn state_after<T: Copy + Into<Rational>>(&self, d: &Grid<T>) -> Grid<Rational> {
        self.prev.zip_map(d, |&x, &v| rat(x) + v.into())
    }

    pub fn zero_step(&self) -> IntStep {
        Grid::filled(self.n_rows, self.n_cols, 0)
    }
}

/// A step together with its minimal auxiliary variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletedPoint {
    pub d: Grid<Rational>,
    /// `|d|` per cell.
    pub delta: Grid<Rational>,
    /// Vertical differences, `(N-1) x M`.
    pub beta: Grid<Rational>,
    /// Horizontal differences, `N x (M-1)`.
    pub gamma: Grid<Rational>,
}

impl CompletedPoint {
    pub fn jump_sum(&self) -> Rational {
        self.beta.iter().chain(self.gamma.iter()).copied().sum()
    }
}

pub fn complete<T: Copy + Into<Rational>>(
    inst: &TripInstance,
    d: &Grid<T>,
) -> Result<CompletedPoint> {
    inst.check_shape(d)?;
    let (n, m) = inst.shape();
    let d = d.map(|&v| v.into());
    let y = inst.state_after(&d);
    let delta = d.map(|&v| abs(v));
    let mut beta = Vec::with_capacity(n.saturating_sub(1) * m);
    for i in 0..n.saturating_sub(1) {
        for j in 0..m {
            beta.push(abs(y[(i + 1, j)] - y[(i, j)]));
        }
    }
    let mut gamma = Vec::with_capacity(n * m.saturating_sub(1));
    for i in 0..n {
        for j in 0..m.saturating_sub(1) {
            gamma.push(abs(y[(i, j + 1)] - y[(i, j)]));
        }
    }
    Ok(CompletedPoint {
        d,
        delta,
        beta: Grid::from_vec(n - 1, m, beta)?,
        gamma: Grid::from_vec(n, m - 1, gamma)?,
    })
}

/// Unweighted sum of absolute differences of `x + d` over grid edges.
pub fn jump_sum<T: Copy + Into<Rational>>(inst: &TripInstance, d: &Grid<T>) -> Rational {
    let y = inst.state_after(d);
    let (n, m) = inst.shape();
    edges(n, m)
        .into_iter()
        .map(|(a, b)| abs(y.as_slice()[a] - y.as_slice()[b]))
        .sum()
}

/// `ω(d)`: the α-weighted total variation of `x + d`.
pub fn tv_omega<T: Copy + Into<Rational>>(inst: &TripInstance, d: &Grid<T>) -> Result<Rational> {
    inst.check_shape(d)?;
    Ok(inst.alpha * jump_sum(inst, d))
}

/// The constant `α·TV(x)`.
pub fn tv_const(inst: &TripInstance) -> Rational {
    inst.alpha * jump_sum(inst, &inst.zero_step())
}

pub fn linear_cost<T: Copy + Into<Rational>>(inst: &TripInstance, d: &Grid<T>) -> Rational {
    inst.cost
        .iter()
        .zip(d.iter())
        .map(|(&c, &v)| c * v.into())
        .sum()
}

pub fn objective_ip<T: Copy + Into<Rational>>(
    inst: &TripInstance,
    d: &Grid<T>,
) -> Result<Rational> {
    inst.check_shape(d)?;
    Ok(linear_cost(inst, d) + inst.alpha * jump_sum(inst, d))
}

/// Objective shifted by the constant TV of the previous control; zero at `d = 0`.
pub fn objective_og<T: Copy + Into<Rational>>(
    inst: &TripInstance,
    d: &Grid<T>,
) -> Result<Rational> {
    Ok(objective_ip(inst, d)? - tv_const(inst))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub capacity_used: Rational,
}

/// Integer feasibility: `x + d` integral and inside Ξ, and `Σ|d| ≤ Δ`.
pub fn is_feasible<T: Copy + Into<Rational>>(
    inst: &TripInstance,
    d: &Grid<T>,
) -> Result<Feasibility> {
    inst.check_shape(d)?;
    let capacity_used: Rational = d.iter().map(|&v| abs(v.into())).sum();
    let lo = rat(inst.xi_lo);
    let hi = rat(inst.xi_hi);
    let in_range = inst
        .state_after(d)
        .iter()
        .all(|y| y.is_integer() && *y >= lo && *y <= hi);
    Ok(Feasibility {
        feasible: in_range && capacity_used <= inst.delta_cap,
        capacity_used,
    })
}

pub fn capacity_used<T: Copy + Into<Rational>>(d: &Grid<T>) -> Rational {
    d.iter().map(|&v| abs(v.into())).sum()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::num::ratio;

    pub fn ex1() -> TripInstance {
        let c = vec![
            vec![rat(-2), rat(100), ratio(-21, 10)],
            vec![rat(-2), rat(100), rat(100)],
            vec![rat(100), rat(100), rat(100)],
        ];
        TripInstance::new(
            rat(1),
            rat(3),
            0,
            2,
            Grid::from_rows(c).unwrap(),
            Grid::filled(3, 3, 0),
        )
        .unwrap()
    }

    pub fn ex1_opt() -> IntStep {
        Grid::from_rows(vec![vec![1, 0, 1], vec![1, 0, 0], vec![0, 0, 0]]).unwrap()
    }

    pub fn ex2() -> TripInstance {
        TripInstance::new(
            rat(1),
            rat(1),
            0,
            1,
            Grid::filled(2, 2, ratio(-1, 2)),
            Grid::filled(2, 2, 0),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::num::ratio;

    fn rgrid(rows: Vec<Vec<Rational>>) -> Grid<Rational> {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn ex1_completion_and_objective() {
        let inst = ex1();
        let d = ex1_opt();
        let cp = complete(&inst, &d).unwrap();
        assert_eq!(cp.delta, d.map(|&v| rat(v.abs())));
        assert_eq!(cp.jump_sum(), rat(5));
        assert_eq!(objective_ip(&inst, &d).unwrap(), ratio(-11, 10));
        let f = is_feasible(&inst, &d).unwrap();
        assert!(f.feasible);
        assert_eq!(f.capacity_used, rat(3));
    }

    #[test]
    fn ex1_convex_combination() {
        let inst = ex1();
        let h = ratio(1, 2);
        let z = rat(0);
        let d1 = rgrid(vec![vec![h, z, rat(2)], vec![h, z, z], vec![z, z, z]]);
        let d2 = rgrid(vec![
            vec![ratio(3, 2), z, z],
            vec![ratio(3, 2), z, z],
            vec![z, z, z],
        ]);
        let o1 = objective_ip(&inst, &d1).unwrap();
        let o2 = objective_ip(&inst, &d2).unwrap();
        assert_eq!(o1, ratio(-7, 10));
        assert_eq!(o2, ratio(-3, 2));
        assert_eq!((o1 + o2) / rat(2), ratio(-11, 10));
        let mid = d1.zip_map(&d2, |a, b| (a + b) / rat(2));
        assert_eq!(mid, ex1_opt().map(|&v| rat(v)));
    }

    #[test]
    fn ex2_zero_and_fractional() {
        let inst = ex2();
        let zero = inst.zero_step();
        let cp = complete(&inst, &zero).unwrap();
        assert!(cp
            .delta
            .iter()
            .chain(cp.beta.iter())
            .chain(cp.gamma.iter())
            .all(Zero::is_zero));
        assert_eq!(objective_ip(&inst, &zero).unwrap(), rat(0));
        assert_eq!(tv_const(&inst), rat(0));
        assert_eq!(objective_og(&inst, &zero).unwrap(), rat(0));
        let quarter = Grid::filled(2, 2, ratio(1, 4));
        let f = is_feasible(&inst, &quarter).unwrap();
        assert!(!f.feasible);
        assert_eq!(f.capacity_used, rat(1));
        let over = Grid::from_rows(vec![vec![1i64, 1], vec![0, 0]]).unwrap();
        assert!(!is_feasible(&inst, &over).unwrap().feasible);
    }

    #[test]
    fn negative_steps_complete_to_absolute_values() {
        let inst = TripInstance::new(
            rat(1),
            rat(2),
            0,
            1,
            Grid::filled(1, 2, rat(1)),
            Grid::from_rows(vec![vec![1, 0]]).unwrap(),
        )
        .unwrap();
        let d = Grid::from_rows(vec![vec![-1i64, 0]]).unwrap();
        let cp = complete(&inst, &d).unwrap();
        assert_eq!(cp.delta[(0, 0)], rat(1));
        assert_eq!(cp.gamma[(0, 0)], rat(0));
        assert_eq!(objective_og(&inst, &d).unwrap(), rat(-2));
    }

    #[test]
    fn shape_and_invariant_errors() {
        let inst = ex2();
        assert!(matches!(
            complete(&inst, &Grid::filled(3, 2, 0i64)),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(TripInstance::new(
            rat(0),
            rat(1),
            0,
            1,
            Grid::filled(1, 1, rat(0)),
            Grid::filled(1, 1, 0)
        )
        .is_err());
        assert!(TripInstance::new(
            rat(1),
            rat(-1),
            0,
            1,
            Grid::filled(1, 1, rat(0)),
            Grid::filled(1, 1, 0)
        )
        .is_err());
        assert!(TripInstance::new(
            rat(1),
            rat(1),
            0,
            1,
            Grid::filled(1, 1, rat(0)),
            Grid::filled(1, 1, 2)
        )
        .is_err());
    }

    #[test]
    fn completion_is_idempotent() {
        let inst = ex1();
        let cp = complete(&inst, &ex1_opt()).unwrap();
        assert_eq!(complete(&inst, &cp.d).unwrap(), cp);
    }
}
