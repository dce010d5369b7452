//! Valid inequalities for binary instances derived from a fractional LP
//! vertex: the fully-connected-graph cut and the bounding-box cut.
//!
//! Both families hold for every feasible integer point regardless of the
//! node they are generated at, since their derivation only uses integer
//! feasibility. The LP point only selects the sets involved.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::neighbors;
use crate::instance::TripInstance;
use crate::num::{format_rational, rat, to_f64, Rational};
use crate::simplex::{ExtraRow, FractionalAnalysis, LinearProgram, LpSolution, Sense, VarRef};

/// Components larger than this only get the bounding-box cut.
pub const FC_MAX_COMPONENT: usize = 200;
/// Minimum violation for a cut to be returned by [`separate`].
pub const MIN_VIOLATION: f64 = 1e-7;
const TOL_DELTA_OUT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutFamily {
    FullyConnected,
    BoundingBox,
}

impl CutFamily {
    pub fn name(self) -> &'static str {
        match self {
            CutFamily::FullyConnected => "fully_connected",
            CutFamily::BoundingBox => "bounding_box",
        }
    }
}

/// `Σ coeffs · vars ≥ rhs` over δ, β and γ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub family: CutFamily,
    pub coeffs: Vec<(VarRef, Rational)>,
    pub rhs: Rational,
    pub big_m: Rational,
    /// Jump-per-capacity ratio multiplying the δ sum.
    pub ratio: Rational,
    /// Cells of G (resp. the box B).
    pub support: Vec<usize>,
    /// Cells of H (resp. H \ B).
    pub outside: Vec<usize>,
}

impl Cut {
    pub fn to_row(&self) -> ExtraRow {
        ExtraRow {
            coeffs: self.coeffs.clone(),
            sense: Sense::Ge,
            rhs: self.rhs,
        }
    }

    pub fn activity(&self, lp: &LinearProgram, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for &(v, a) in &self.coeffs {
            s += to_f64(a) * x[lp.index(v)?];
        }
        Ok(s)
    }

    /// Positive when `x` violates the cut.
    pub fn violation(&self, lp: &LinearProgram, x: &[f64]) -> Result<f64> {
        Ok(to_f64(self.rhs) - self.activity(lp, x)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} ratio={} M={} rhs={} :",
            self.family.name(),
            format_rational(self.ratio),
            format_rational(self.big_m),
            format_rational(self.rhs)
        );
        for (v, a) in &self.coeffs {
            let _ = write!(s, " {}*{}", format_rational(*a), v.name());
        }
        s.push_str(" >=");
        s
    }
}

fn isqrt(z: i64) -> i64 {
    let mut r = (z as f64).sqrt() as i64;
    while r * r > z {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= z {
        r += 1;
    }
    r
}

/// `round_half_up(√z) + ceil(√z)`.
fn sqrt_pair(z: i64) -> i64 {
    let r = isqrt(z);
    let round = if z > r * r + r { r + 1 } else { r };
    let ceil = if r * r == z { r } else { r + 1 };
    round + ceil
}

/// Lower bound on the edges cut by `k` ones in an `n x m` grid that already
/// holds `c2` ones at fixed places.
pub fn box_lb(k: i64, n: i64, m: i64, c2: i64) -> Result<i64> {
    if n <= 0 || m <= 0 || c2 < 0 || k < 0 || k > n * m - c2 {
        return Err(Error::OutOfRange(format!("box_lb({k}, {n}, {m}, {c2})")));
    }
    Ok(sqrt_pair(k).min(n).min(m).min(sqrt_pair(n * m - k - c2)))
}

/// `min_{0<K≤cap} box_lb(K, n, m, c2)/K`, or `None` when no `K` qualifies.
pub fn box_ratio(n: i64, m: i64, c2: i64, cap: i64) -> Result<Option<Rational>> {
    let top = cap.min(n * m - c2);
    let mut best: Option<Rational> = None;
    for k in 1..=top {
        let r = Rational::new(box_lb(k, n, m, c2)?, k);
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    }
    Ok(best)
}

/// Big-M for the fully-connected cut with `|G| = g`, capacity `delta` and
/// residual capacity `delta_r`.
pub fn fc_big_m(g: i64, delta: Rational, delta_r: Rational) -> Rational {
    let g = rat(g);
    let rho = g - delta_r;
    let u = if g < delta { g } else { delta };
    if u == delta_r {
        return rho;
    }
    rho - ((g - u) * u - (g - delta_r) * delta_r) / (u - delta_r)
}

/// Edge weights on `cells` (grid of width `m`) such that for any subset U,
/// the weighted count of cut grid edges is at least `|U|·|G \ U|`. Each
/// grid edge starts at 1; every non-adjacent pair adds 1 along a shortest
/// path chosen by a BFS with seeded neighbor order. Edges are `(a, b)` with
/// `a < b`.
pub fn fc_edge_weights(
    n: usize,
    m: usize,
    cells: &[usize],
    seed: u64,
) -> Vec<((usize, usize), i64)> {
    let pos: HashMap<usize, usize> = cells.iter().enumerate().map(|(p, &k)| (k, p)).collect();
    let adj: Vec<Vec<usize>> = cells
        .iter()
        .map(|&k| {
            neighbors(n, m, k)
                .filter_map(|w| pos.get(&w).copied())
                .collect()
        })
        .collect();
    let mut weight: HashMap<(usize, usize), i64> = HashMap::new();
    for (p, list) in adj.iter().enumerate() {
        for &q in list {
            if p < q {
                weight.insert((cells[p].min(cells[q]), cells[p].max(cells[q])), 1);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = cells.len();
    for src in 0..len {
        let mut parent = vec![usize::MAX; len];
        parent[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let mut order = adj[u].clone();
            order.shuffle(&mut rng);
            for v in order {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        for dst in src + 1..len {
            if adj[src].contains(&dst) || parent[dst] == usize::MAX {
                continue;
            }
            let mut v = dst;
            while v != src {
                let u = parent[v];
                let key = (cells[u].min(cells[v]), cells[u].max(cells[v]));
                *weight
                    .get_mut(&key)
                    .expect("path edge lies in the component") += 1;
                v = u;
            }
        }
    }
    let mut out: Vec<_> = weight.into_iter().collect();
    out.sort();
    out
}

fn edge_var(m: usize, a: usize, b: usize) -> VarRef {
    let (a, b) = (a.min(b), a.max(b));
    if b == a + m {
        VarRef::beta(a / m, a % m)
    } else {
        VarRef::gamma(a / m, a % m)
    }
}

fn integral_out(value: f64) -> Option<i64> {
    let r = value.round();
    ((value - r).abs() <= TOL_DELTA_OUT).then_some(r as i64)
}

/// Fully-connected-graph cut from the largest equal-x fractional component.
/// `Ok(None)` when the preconditions fail or the component exceeds
/// [`FC_MAX_COMPONENT`].
pub fn fc_cut(inst: &TripInstance, fa: &FractionalAnalysis, seed: u64) -> Result<Option<Cut>> {
    inst.require_binary()?;
    if fa.is_integral {
        return Err(Error::IntegralSolution);
    }
    let g = &fa.g;
    if g.is_empty() || g.len() > FC_MAX_COMPONENT {
        return Ok(None);
    }
    let prev = inst.prev().as_slice();
    if g.iter().any(|&k| prev[k] != prev[g[0]]) {
        return Err(Error::MixedComponent);
    }
    let Some(delta_out) = integral_out(fa.delta_out) else {
        return Ok(None);
    };
    let delta = inst.delta_cap();
    let delta_r = delta - rat(delta_out);
    let rho = rat(g.len() as i64) - delta_r;
    if rho <= rat(0) {
        return Ok(None);
    }
    let big_m = fc_big_m(g.len() as i64, delta, delta_r);
    let (n, m) = inst.shape();
    let mut coeffs = Vec::new();
    for ((a, b), w) in fc_edge_weights(n, m, g, seed) {
        coeffs.push((edge_var(m, a, b), rat(w)));
    }
    for &k in &fa.h {
        coeffs.push((VarRef::delta(k / m, k % m), -big_m));
    }
    for &k in g {
        coeffs.push((VarRef::delta(k / m, k % m), -rho));
    }
    Ok(Some(Cut {
        family: CutFamily::FullyConnected,
        coeffs,
        rhs: -big_m * rat(delta_out),
        big_m,
        ratio: rho,
        support: g.clone(),
        outside: fa.h.clone(),
    }))
}

/// Bounding-box cut over the smallest box containing all fractional cells.
pub fn box_cut(inst: &TripInstance, fa: &FractionalAnalysis) -> Result<Option<Cut>> {
    inst.require_binary()?;
    if fa.is_integral || fa.fractional.is_empty() {
        return Err(Error::IntegralSolution);
    }
    let (n, m) = inst.shape();
    let (mut i0, mut i1, mut j0, mut j1) = (n, 0, m, 0);
    for &k in &fa.fractional {
        let (i, j) = (k / m, k % m);
        i0 = i0.min(i);
        i1 = i1.max(i);
        j0 = j0.min(j);
        j1 = j1.max(j);
    }
    let inside = |k: usize| (i0..=i1).contains(&(k / m)) && (j0..=j1).contains(&(k % m));
    let h_b: Vec<usize> = fa.h.iter().copied().filter(|&k| !inside(k)).collect();
    let d = fa.d.as_slice();
    let Some(delta_out_b) = integral_out(h_b.iter().map(|&k| d[k].abs()).sum()) else {
        return Ok(None);
    };
    let box_cells: Vec<usize> = (i0..=i1)
        .flat_map(|i| (j0..=j1).map(move |j| i * m + j))
        .collect();
    let prev = inst.prev().as_slice();
    let c2 = box_cells
        .iter()
        .filter(|&&k| prev[k] == inst.xi_hi())
        .count() as i64;
    let (bn, bm) = ((i1 - i0 + 1) as i64, (j1 - j0 + 1) as i64);
    let cap = (inst.delta_cap() - rat(delta_out_b)).floor().to_integer();
    let Some(ratio) = box_ratio(bn, bm, c2, cap)? else {
        return Ok(None);
    };
    if ratio <= rat(0) {
        return Ok(None);
    }
    let big_m = ratio + rat(2);
    let mut coeffs = Vec::new();
    for i in i0..=i1 {
        for j in j0..=j1 {
            if i < i1 {
                coeffs.push((VarRef::beta(i, j), rat(1)));
            }
            if j < j1 {
                coeffs.push((VarRef::gamma(i, j), rat(1)));
            }
        }
    }
    for &k in &h_b {
        coeffs.push((VarRef::delta(k / m, k % m), -big_m));
    }
    for &k in &box_cells {
        if prev[k] == inst.xi_lo() {
            coeffs.push((VarRef::delta(k / m, k % m), -ratio));
        }
    }
    Ok(Some(Cut {
        family: CutFamily::BoundingBox,
        coeffs,
        rhs: -big_m * rat(delta_out_b),
        big_m,
        ratio,
        support: box_cells,
        outside: h_b,
    }))
}

/// Generates the enabled families and keeps the cuts the LP point violates
/// by more than [`MIN_VIOLATION`].
pub fn separate(
    inst: &TripInstance,
    lp: &LinearProgram,
    sol: &LpSolution,
    fa: &FractionalAnalysis,
    use_fc: bool,
    use_box: bool,
    seed: u64,
) -> Result<Vec<Cut>> {
    let mut out = Vec::new();
    if fa.is_integral || !inst.is_binary() {
        return Ok(out);
    }
    let mut candidates = Vec::new();
    if use_fc {
        candidates.extend(fc_cut(inst, fa, seed)?);
    }
    if use_box {
        candidates.extend(box_cut(inst, fa)?);
    }
    for cut in candidates {
        if cut.violation(lp, &sol.x)? > MIN_VIOLATION {
            out.push(cut);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_box_cut;

    #[test]
    fn box_lb_values() {
        assert_eq!(box_lb(2, 5, 5, 0).unwrap(), 3);
        assert_eq!(box_lb(4, 5, 5, 0).unwrap(), 4);
        assert_eq!(box_lb(10, 5, 5, 0).unwrap(), 5);
        assert_eq!(box_lb(12, 5, 5, 0).unwrap(), 5);
        assert_eq!(box_lb(0, 3, 7, 0).unwrap(), 0);
        assert_eq!(box_lb(6, 3, 3, 3).unwrap(), 0);
        assert!(box_lb(7, 3, 3, 3).is_err());
    }

    #[test]
    fn box_lb_is_lower_bound() {
        for n in 1..=4usize {
            for m in 1..=4usize {
                for k in 0..=n * m {
                    let exact = brute_box_cut(k, n, m).unwrap() as i64;
                    assert!(
                        box_lb(k as i64, n as i64, m as i64, 0).unwrap() <= exact,
                        "{k} {n} {m}"
                    );
                }
            }
        }
    }

    #[test]
    fn box_lb_drops_by_at_most_two() {
        for n in 1..=9 {
            for m in 1..=9 {
                for c2 in 0..=3.min(n * m) {
                    for k in 0..n * m - c2 {
                        let a = box_lb(k, n, m, c2).unwrap();
                        let b = box_lb(k + 1, n, m, c2).unwrap();
                        assert!(a - b <= 2);
                    }
                }
            }
        }
    }

    #[test]
    fn box_ratio_on_small_box() {
        assert_eq!(box_ratio(3, 3, 0, 2).unwrap(), Some(Rational::new(3, 2)));
        assert_eq!(box_ratio(3, 3, 0, 0).unwrap(), None);
    }

    #[test]
    fn fc_big_m_example() {
        let m = fc_big_m(10, rat(8), rat(3));
        assert_eq!(m, rat(8));
        assert_eq!(rat(10) - rat(3), rat(7));
        assert_eq!(fc_big_m(4, rat(8), rat(4)), rat(0));
    }

    #[test]
    fn path_weights_dominate_complete_graph_cuts() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, m) = (4usize, 4usize);
        for trial in 0..60 {
            // Grow a random connected set of up to 8 cells.
            let size = rng.gen_range(2..=8);
            let mut cells = vec![rng.gen_range(0..n * m)];
            while cells.len() < size {
                let &k = cells.choose(&mut rng).unwrap();
                let nb: Vec<usize> = neighbors(n, m, k).filter(|w| !cells.contains(w)).collect();
                if let Some(&w) = nb.choose(&mut rng) {
                    cells.push(w);
                }
            }
            let w = fc_edge_weights(n, m, &cells, trial);
            for mask in 0u32..(1 << cells.len()) {
                let inside =
                    |k: usize| (mask >> cells.iter().position(|&c| c == k).unwrap()) & 1 == 1;
                let weighted: i64 = w
                    .iter()
                    .filter(|((a, b), _)| inside(*a) != inside(*b))
                    .map(|(_, x)| x)
                    .sum();
                let u = mask.count_ones() as i64;
                assert!(weighted >= u * (cells.len() as i64 - u));
            }
        }
    }
}
