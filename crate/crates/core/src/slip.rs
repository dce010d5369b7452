//! Outer trust-region loop: linearize the smooth part at the current
//! control, solve the integer subproblem, and accept or halve the radius.

use std::fmt::Write as _;

use crate::bnb::{solve, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{edges, Grid};
use crate::instance::{objective_og, TripInstance};
use crate::num::{abs, format_rational, rat, to_f64, Rational};

/// Smooth part `F` of the objective and its gradient on integer controls,
/// plus the TV weight `α` of `J = F + α·TV`.
pub trait ObjectiveOracle {
    fn value(&self, v: &Grid<Rational>) -> Rational;
    fn gradient(&self, v: &Grid<Rational>) -> Grid<Rational>;
    fn alpha(&self) -> Rational;
}

pub fn total_variation(v: &Grid<Rational>) -> Rational {
    let (n, m) = v.shape();
    let s = v.as_slice();
    edges(n, m).into_iter().map(|(a, b)| abs(s[a] - s[b])).sum()
}

/// `J(v) = F(v) + α·TV(v)`.
pub fn full_objective(oracle: &dyn ObjectiveOracle, v: &Grid<Rational>) -> Rational {
    oracle.value(v) + oracle.alpha() * total_variation(v)
}

/// `F(v) = ½ Σ (v − target)²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticTracking {
    pub target: Grid<Rational>,
    pub alpha: Rational,
}

pub fn quadratic_tracking_oracle(target: Grid<Rational>, alpha: Rational) -> QuadraticTracking {
    QuadraticTracking { target, alpha }
}

impl ObjectiveOracle for QuadraticTracking {
    fn value(&self, v: &Grid<Rational>) -> Rational {
        let sq: Rational = v
            .iter()
            .zip(self.target.iter())
            .map(|(&a, &t)| (a - t) * (a - t))
            .sum();
        sq / rat(2)
    }

    fn gradient(&self, v: &Grid<Rational>) -> Grid<Rational> {
        v.zip_map(&self.target, |&a, &t| a - t)
    }

    fn alpha(&self) -> Rational {
        self.alpha
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlipAction {
    Accept,
    Reject,
    Terminate,
}

impl SlipAction {
    pub fn name(self) -> &'static str {
        match self {
            SlipAction::Accept => "accept",
            SlipAction::Reject => "reject",
            SlipAction::Terminate => "terminate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlipRecord {
    pub outer: usize,
    pub inner: usize,
    pub delta: Rational,
    pub predicted: Rational,
    pub actual: Rational,
    pub action: SlipAction,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlipLog {
    pub records: Vec<SlipRecord>,
}

impl SlipLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("outer,inner,delta,pr,ared,action\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.outer,
                r.inner,
                format_rational(r.delta),
                format_rational(r.predicted),
                format_rational(r.actual),
                r.action.name()
            );
        }
        s
    }

    /// Checks the halving and reset rules of the radius sequence.
    pub fn radius_rules_hold(&self, delta0: Rational) -> bool {
        self.records.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            match a.action {
                SlipAction::Reject => {
                    b.outer == a.outer && b.inner == a.inner + 1 && b.delta == a.delta / rat(2)
                }
                SlipAction::Accept => b.outer == a.outer + 1 && b.inner == 0 && b.delta == delta0,
                SlipAction::Terminate => false,
            }
        }) && self
            .records
            .first()
            .is_none_or(|r| r.inner == 0 && r.delta == delta0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlipOptions {
    pub delta0: Rational,
    pub rho_accept: Rational,
    pub max_outer: usize,
    pub sub_config: SolverConfig,
}

impl SlipOptions {
    pub fn new(delta0: Rational) -> Self {
        SlipOptions {
            delta0,
            rho_accept: Rational::new(1, 10_000),
            max_outer: 100,
            sub_config: SolverConfig::default(),
        }
    }
}

/// Predicted reductions at or below this count as zero.
const PR_ZERO: f64 = 1e-9;

/// Runs the trust-region loop from `v0` with values in `[xi_lo, xi_hi]`.
pub fn run_slip(
    oracle: &dyn ObjectiveOracle,
    v0: &Grid<i64>,
    xi_lo: i64,
    xi_hi: i64,
    opts: &SlipOptions,
) -> Result<(Grid<i64>, SlipLog)> {
    if v0.iter().any(|&v| v < xi_lo || v > xi_hi) {
        return Err(Error::InvalidInstance("start control outside Xi".into()));
    }
    let (n, m) = v0.shape();
    let mut v = v0.clone();
    let mut log = SlipLog::default();
    let to_rat = |g: &Grid<i64>| g.map(|&x| rat(x));
    for outer in 1..=opts.max_outer {
        let vr = to_rat(&v);
        let j_cur = full_objective(oracle, &vr);
        let grad = oracle.gradient(&vr);
        if grad.shape() != (n, m) {
            return Err(Error::ShapeMismatch {
                expected: (n, m),
                got: grad.shape(),
            });
        }
        let mut delta = opts.delta0;
        let mut inner = 0;
        loop {
            let wrap = |e: Error| Error::Subproblem {
                iteration: outer,
                step: inner,
                source: Box::new(e),
            };
            let inst =
                TripInstance::new(oracle.alpha(), delta, xi_lo, xi_hi, grad.clone(), v.clone())
                    .map_err(wrap)?;
            let res = solve(&inst, &opts.sub_config).map_err(wrap)?;
            let predicted = -objective_og(&inst, &res.step).map_err(wrap)?;
            let trial = v.zip_map(&res.step, |a, d| a + d);
            let actual = j_cur - full_objective(oracle, &to_rat(&trial));
            let action = if to_f64(predicted) <= PR_ZERO {
                SlipAction::Terminate
            } else if actual < opts.rho_accept * predicted {
                SlipAction::Reject
            } else {
                SlipAction::Accept
            };
            log.records.push(SlipRecord {
                outer,
                inner,
                delta,
                predicted,
                actual,
                action,
            });
            match action {
                SlipAction::Terminate => return Ok((v, log)),
                SlipAction::Reject => {
                    delta /= rat(2);
                    inner += 1;
                }
                SlipAction::Accept => {
                    v = trial;
                    break;
                }
            }
        }
    }
    Ok((v, log))
}
