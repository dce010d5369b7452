//! Lagrangian relaxation of the capacity constraint for two-valued Ξ.
//!
//! For a fixed multiplier μ the inner problem
//! `min c·d + ω(d) + μ(Σ|d| − Δ)` is a binary labelling problem with unary
//! terms and uniform pairwise terms α, solved exactly by one minimum cut.
//! All capacities are scaled to integers, and ties between optimal labellings
//! are broken by capacity through a lexicographic secondary term, so the
//! returned optima are exact.

use num_traits::{Signed, Zero};

use super::maxflow::FlowNetwork;
use crate::error::{Error, Result};
use crate::grid::{edges, Grid};
use crate::instance::{
    capacity_used, complete, objective_ip, CompletedPoint, IntStep, TripInstance,
};
use crate::num::{abs, common_denominator, rat, scaled_int, Rational};
use crate::simplex::{analyze_step, LpSolution, TOL_EQ, TOL_INT};

/// Which optimal labelling to return when several attain the inner optimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    FewestChanges,
    MostChanges,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LrSolution {
    pub mu_star: Rational,
    /// Inner optimum at `mu_star` with capacity at most Δ.
    pub d_low: IntStep,
    /// Inner optimum at `mu_star` with capacity at least Δ, unless the
    /// multiplier is zero and no optimum reaches Δ (then equal to `d_low`).
    pub d_high: IntStep,
    /// Outer (dual) value, equal to the inner optimum at `mu_star`.
    pub value: Rational,
    pub iterations: usize,
}

/// Upper end of the multiplier search: beyond it no change pays off.
pub fn mu_upper_bound(inst: &TripInstance) -> Rational {
    let max_c = inst
        .cost()
        .iter()
        .map(|&c| abs(c))
        .max()
        .unwrap_or_else(Rational::zero);
    max_c + rat(4) * inst.alpha()
}

/// Solves the inner problem with optional per-cell fixings of the new value
/// (`Some(v)` forces `x + d = v`). Returns the step and the inner value
/// including `−μΔ`, or `None` if the fixings conflict.
pub fn solve_lr_inner_with(
    inst: &TripInstance,
    mu: Rational,
    fixed: Option<&[Option<i64>]>,
    tie: TieBreak,
) -> Result<(IntStep, Rational)> {
    inst.require_binary()?;
    if mu.is_negative() {
        return Err(Error::OutOfRange(format!(
            "multiplier must be nonnegative, got {mu}"
        )));
    }
    let (n, m) = inst.shape();
    let cells = n * m;
    let lo = inst.xi_lo();
    let prev = inst.prev().as_slice();
    let scale = common_denominator(inst.cost().iter().chain([&inst.alpha(), &mu]));
    let tie_factor = cells as i128 + 1;
    let alpha = scaled_int(inst.alpha(), scale) * tie_factor;
    let mu_s = scaled_int(mu, scale);
    let tie_unit: i128 = match tie {
        TieBreak::FewestChanges => 1,
        TieBreak::MostChanges => -1,
    };

    // Unary costs of labels 0 and 1 (label = value − lo).
    let mut unary = Vec::with_capacity(cells);
    let mut total: i128 = 0;
    for k in 0..cells {
        let x = prev[k] - lo;
        let c = scaled_int(inst.cost().as_slice()[k], scale);
        let change = (c * (1 - 2 * x) as i128 + mu_s) * tie_factor + tie_unit;
        let (u0, u1) = if x == 0 { (0, change) } else { (change, 0) };
        total += u0.abs().max(u1.abs());
        unary.push((u0, u1));
    }
    total += alpha * edges(n, m).len() as i128;
    let inf = total + 1;
    if inf > i128::MAX / 4 {
        return Err(Error::OutOfRange(
            "capacities overflow the flow representation".into(),
        ));
    }
    let (s, t) = (cells, cells + 1);
    let mut net = FlowNetwork::new(cells + 2);
    for (k, &(u0, u1)) in unary.iter().enumerate() {
        let base = u0.min(u1);
        let (mut src, mut snk) = (u1 - base, u0 - base);
        if let Some(f) = fixed.and_then(|f| f[k]) {
            match f - lo {
                0 => src = inf,
                1 => snk = inf,
                _ => return Err(Error::OutOfRange(format!("fixing {f} outside Xi"))),
            }
        }
        // Sink side means label 1: cutting s→k costs u1, cutting k→t costs u0.
        if src > 0 {
            net.add_edge(s, k, src, 0);
        }
        if snk > 0 {
            net.add_edge(k, t, snk, 0);
        }
    }
    for (a, b) in edges(n, m) {
        net.add_edge(a, b, alpha, alpha);
    }
    let (_, sink_side) = net.min_cut(s, t);
    let d: Vec<i64> = (0..cells)
        .map(|k| lo + sink_side[k] as i64 - prev[k])
        .collect();
    let d = Grid::from_vec(n, m, d)?;
    if let Some(f) = fixed {
        if f.iter()
            .zip(d.iter().zip(prev))
            .any(|(fk, (dk, xk))| fk.is_some_and(|v| v != dk + xk))
        {
            return Err(Error::InfeasibleStep("conflicting fixings".into()));
        }
    }
    let value = inner_value(inst, &d, mu)?;
    Ok((d, value))
}

/// `c·d + ω(d) + μ(Σ|d| − Δ)`.
pub fn inner_value(inst: &TripInstance, d: &IntStep, mu: Rational) -> Result<Rational> {
    Ok(objective_ip(inst, d)? + mu * (capacity_used(d) - inst.delta_cap()))
}

pub fn solve_lr_inner(inst: &TripInstance, mu: Rational) -> Result<(IntStep, Rational)> {
    solve_lr_inner_with(inst, mu, None, TieBreak::FewestChanges)
}

/// Maximizes the concave dual over μ ≥ 0 by intersecting supporting lines.
/// Each inner optimum `d` contributes the line `f(d) + μ(|d| − Δ)`; the next
/// trial multiplier is the intersection of the best lines with slope above
/// and below zero, which is exact and terminates at a breakpoint.
pub fn solve_lr(inst: &TripInstance) -> Result<LrSolution> {
    solve_lr_with(inst, None)
}

pub fn solve_lr_with(inst: &TripInstance, fixed: Option<&[Option<i64>]>) -> Result<LrSolution> {
    inst.require_binary()?;
    let delta = inst.delta_cap();
    let line = |d: &IntStep| -> Result<(Rational, Rational)> {
        Ok((objective_ip(inst, d)?, capacity_used(d)))
    };
    let (d0, v0) = solve_lr_inner_with(inst, rat(0), fixed, TieBreak::FewestChanges)?;
    if capacity_used(&d0) <= delta {
        return Ok(LrSolution {
            mu_star: rat(0),
            d_high: d0.clone(),
            d_low: d0,
            value: v0,
            iterations: 1,
        });
    }
    let mu_hi = mu_upper_bound(inst) + rat(1);
    let (d1, _) = solve_lr_inner_with(inst, mu_hi, fixed, TieBreak::FewestChanges)?;
    let (mut above, mut below) = (d0, d1);
    let (mut fa, mut ka) = line(&above)?;
    let (mut fb, mut kb) = line(&below)?;
    if kb > delta {
        return Err(Error::InfeasibleStep(
            "fixings force more change than the capacity allows".into(),
        ));
    }
    for iterations in 2..400 {
        let mu = (fb - fa) / (ka - kb);
        let target = fa + mu * (ka - delta);
        let (dl, vl) = solve_lr_inner_with(inst, mu, fixed, TieBreak::FewestChanges)?;
        if vl == target {
            let (dh, _) = solve_lr_inner_with(inst, mu, fixed, TieBreak::MostChanges)?;
            return Ok(LrSolution {
                mu_star: mu,
                d_low: dl,
                d_high: dh,
                value: vl,
                iterations,
            });
        }
        let (f, k) = line(&dl)?;
        if k > delta {
            (above, fa, ka) = (dl, f, k);
        } else {
            (below, fb, kb) = (dl, f, k);
        }
    }
    let _ = (above, below);
    Err(Error::Lp("multiplier search did not converge".into()))
}

/// A point of the LP relaxation built from LR optima.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpPoint {
    pub point: CompletedPoint,
    pub objective: Rational,
}

/// Convex combination of `d_low` and `d_high` that uses exactly capacity Δ
/// (or `d_low` itself if no combination is needed).
pub fn lr_to_lp(inst: &TripInstance, lr: &LrSolution) -> Result<LpPoint> {
    inst.require_binary()?;
    let kl = capacity_used(&lr.d_low);
    let kh = capacity_used(&lr.d_high);
    let d: Grid<Rational> = if kh == kl || kl == inst.delta_cap() {
        lr.d_low.map(|&v| rat(v))
    } else {
        let lambda = (inst.delta_cap() - kl) / (kh - kl);
        lr.d_low.zip_map(&lr.d_high, |&a, &b| {
            (rat(1) - lambda) * rat(a) + lambda * rat(b)
        })
    };
    let point = complete(inst, &d)?;
    let objective = objective_ip(inst, &point.d)?;
    Ok(LpPoint { point, objective })
}

/// Integer LR optimum and multiplier from an LP vertex: the fractional
/// component is rounded as a whole to the side that uses less capacity and
/// μ is the slope between the two roundings.
pub fn lp_to_lr(inst: &TripInstance, sol: &LpSolution) -> Result<(IntStep, Rational)> {
    inst.require_binary()?;
    let (n, m) = inst.shape();
    let d = Grid::from_vec(n, m, sol.x[..n * m].to_vec())?;
    let fa = analyze_step(inst, &d, TOL_INT, TOL_EQ);
    let round = |up: bool| -> IntStep {
        fa.value.zip_map(inst.prev(), |&y, &x| {
            let frac = (y - y.round()).abs() > TOL_INT;
            let v = if frac {
                if up {
                    y.ceil()
                } else {
                    y.floor()
                }
            } else {
                y.round()
            };
            v as i64 - x
        })
    };
    if fa.is_integral {
        return Ok((round(false), rat(0)));
    }
    let (dn, up) = (round(false), round(true));
    let (kn, ku) = (capacity_used(&dn), capacity_used(&up));
    let (r, o, kr, ko) = if kn <= ku {
        (dn, up, kn, ku)
    } else {
        (up, dn, ku, kn)
    };
    if kr == ko {
        return Ok((r, rat(0)));
    }
    let mu = (objective_ip(inst, &r)? - objective_ip(inst, &o)?) / (ko - kr);
    Ok((r, mu.max(rat(0))))
}

/// `x + d` is set to the upper value exactly where the LP value exceeds `t`.
pub fn threshold(inst: &TripInstance, lp_d: &Grid<f64>, t: f64) -> Result<IntStep> {
    inst.require_binary()?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfRange(format!("threshold {t} outside (0, 1)")));
    }
    inst.check_shape(lp_d)?;
    let lo = inst.xi_lo();
    Ok(inst
        .prev()
        .zip_map(lp_d, |&x, &d| lo + ((x - lo) as f64 + d > t) as i64 - x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PApproxCertificate {
    pub p: Rational,
    pub guaranteed: bool,
}

/// `p = |d_low| / Δ`; when `p > 0`, `d_low` achieves at least the fraction
/// `p` of the optimal predicted reduction.
pub fn papprox_certificate(inst: &TripInstance, lr: &LrSolution) -> PApproxCertificate {
    let delta = inst.delta_cap();
    if delta.is_zero() {
        return PApproxCertificate {
            p: rat(0),
            guaranteed: false,
        };
    }
    let p = (capacity_used(&lr.d_low) / delta).min(rat(1));
    PApproxCertificate {
        p,
        guaranteed: p > rat(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::ex2;
    use crate::instance::gen_random;
    use crate::num::ratio;
    use crate::oracle::brute_lr_inner;

    #[test]
    fn dominant_multiplier_gives_zero_step() {
        let inst = gen_random(4, 4, 4, 0, 1, 3, rat(2)).unwrap();
        let (d, _) = solve_lr_inner(&inst, mu_upper_bound(&inst)).unwrap();
        assert!(d.iter().all(|&v| v == 0));
    }

    #[test]
    fn strongly_negative_costs_flip_everything() {
        let inst = TripInstance::new(
            rat(1),
            rat(2),
            0,
            1,
            Grid::filled(3, 3, rat(-5)),
            Grid::filled(3, 3, 0),
        )
        .unwrap();
        let (d, _) = solve_lr_inner(&inst, rat(0)).unwrap();
        assert!(d.iter().all(|&v| v == 1));
    }

    #[test]
    fn inner_matches_enumeration() {
        for seed in 0..30 {
            let inst = gen_random(seed, 4, 4, 0, 1, 4, rat(3)).unwrap();
            for mu in [rat(0), ratio(1, 10), rat(1)] {
                let (_, v) = solve_lr_inner(&inst, mu).unwrap();
                assert_eq!(
                    v,
                    brute_lr_inner(&inst, mu).unwrap().objective,
                    "seed {seed} mu {mu}"
                );
            }
        }
    }

    #[test]
    fn ex2_multiplier() {
        let inst = ex2();
        let lr = solve_lr(&inst).unwrap();
        assert_eq!(lr.mu_star, ratio(1, 2));
        assert!(lr.d_low.iter().all(|&v| v == 0));
        assert!(capacity_used(&lr.d_high) >= rat(1));
        assert_eq!(lr.value, ratio(-1, 2));
        let lp = lr_to_lp(&inst, &lr).unwrap();
        assert_eq!(lp.objective, ratio(-1, 2));
        assert_eq!(capacity_used(&lp.point.d), rat(1));
        let cert = papprox_certificate(&inst, &lr);
        assert_eq!(cert.p, rat(0));
        assert!(!cert.guaranteed);
    }

    #[test]
    fn threshold_rules() {
        let inst = ex2();
        let lp = Grid::filled(2, 2, 0.25);
        assert!(threshold(&inst, &lp, 0.5).unwrap().iter().all(|&v| v == 0));
        assert!(threshold(&inst, &lp, 0.1).unwrap().iter().all(|&v| v == 1));
        assert!(threshold(&inst, &lp, 1.0).is_err());
    }

    #[test]
    fn non_binary_rejected() {
        let inst = gen_random(1, 3, 3, 0, 2, 2, rat(1)).unwrap();
        assert!(matches!(solve_lr(&inst), Err(Error::NonBinary { .. })));
    }
}
