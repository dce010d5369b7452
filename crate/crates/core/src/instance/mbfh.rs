//! Instance generator from minimum bisection on grid subgraphs.
//!
//! Every graph node becomes an `n² x n²` square of cells, graph edges become
//! single connector cells in the one-cell gap between two squares, and all
//! remaining cells form a costly border so that every square cell has four
//! neighbours. Optimal steps then flip exactly `n/2` whole squares, and the
//! optimum plus `5n/2` is the bisection width.

use std::collections::{BTreeSet, HashSet};

use super::TripInstance;
use crate::error::{Error, Result};
use crate::grid::{neighbors, Grid};
use crate::num::{rat, Rational};

pub const MBFH_DEFAULT_MAX_N: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MbfhClass {
    /// Cell of the square standing for graph node `k` (index into `nodes`).
    Square(usize),
    /// Connector cell for the graph edge between nodes `a < b`.
    Connector(usize, usize),
    Border,
}

#[derive(Clone, Debug)]
pub struct MbfhReduction {
    pub instance: TripInstance,
    pub classes: Grid<MbfhClass>,
    /// Graph nodes in sorted order; `Square(k)` refers to `nodes[k]`.
    pub nodes: Vec<(i64, i64)>,
    pub edges: Vec<(usize, usize)>,
    /// Side length of each square (`n²`).
    pub side: usize,
    /// Added to the optimal objective this gives the bisection width.
    pub constant: Rational,
}

impl MbfhReduction {
    /// The step that flips the squares of `part` (node indices) together
    /// with every connector whose two squares both lie in `part`.
    pub fn canonical_step(&self, part: &[usize]) -> Grid<i64> {
        let chosen: HashSet<usize> = part.iter().copied().collect();
        self.classes.map(|cls| match *cls {
            MbfhClass::Square(k) => chosen.contains(&k) as i64,
            MbfhClass::Connector(a, b) => (chosen.contains(&a) && chosen.contains(&b)) as i64,
            MbfhClass::Border => 0,
        })
    }
}

pub fn reduce_mbfh(nodes: &[(i64, i64)]) -> Result<MbfhReduction> {
    reduce_mbfh_with_limit(nodes, MBFH_DEFAULT_MAX_N)
}

/// `nodes` are `(row, col)` points of ℤ²; edges are all unit-distance pairs.
pub fn reduce_mbfh_with_limit(nodes: &[(i64, i64)], max_n: usize) -> Result<MbfhReduction> {
    let set: BTreeSet<(i64, i64)> = nodes.iter().copied().collect();
    if set.len() != nodes.len() {
        return Err(Error::OutOfRange("duplicate graph nodes".into()));
    }
    let n = set.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::OutOfRange(format!(
            "need an even node count of at least 4, got {n}"
        )));
    }
    if n > max_n {
        return Err(Error::OutOfRange(format!(
            "node count {n} exceeds the limit {max_n}"
        )));
    }
    let nodes: Vec<(i64, i64)> = set.into_iter().collect();
    let min_r = nodes.iter().map(|p| p.0).min().unwrap_or(0);
    let min_c = nodes.iter().map(|p| p.1).min().unwrap_or(0);
    let max_r = nodes.iter().map(|p| p.0).max().unwrap_or(0);
    let max_c = nodes.iter().map(|p| p.1).max().unwrap_or(0);

    let side = n * n;
    let pitch = side + 1;
    let height = 1 + (max_r - min_r + 1) as usize * pitch;
    let width = 1 + (max_c - min_c + 1) as usize * pitch;
    let dim = height.max(width);
    let mut classes = Grid::filled(dim, dim, MbfhClass::Border);
    let origin = |k: usize| {
        let (r, c) = nodes[k];
        (
            1 + (r - min_r) as usize * pitch,
            1 + (c - min_c) as usize * pitch,
        )
    };
    for k in 0..n {
        let (top, left) = origin(k);
        for i in 0..side {
            for j in 0..side {
                classes[(top + i, left + j)] = MbfhClass::Square(k);
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (ra, ca) = nodes[a];
            let (rb, cb) = nodes[b];
            let (top, left) = origin(a);
            // Of the two middle cells of a side, take the lower resp. left one.
            let cell = if ra == rb && cb == ca + 1 {
                (top + side / 2, left + side)
            } else if ca == cb && rb == ra + 1 {
                (top + side, left + side / 2 - 1)
            } else {
                continue;
            };
            classes[cell] = MbfhClass::Connector(a, b);
            edges.push((a, b));
        }
    }

    let n4 = (n as i64).pow(4);
    let flat = classes.as_slice();
    let cost: Vec<Rational> = (0..dim * dim)
        .map(|k| {
            let border_nbrs = neighbors(dim, dim, k)
                .filter(|&w| flat[w] == MbfhClass::Border)
                .count() as i64;
            match flat[k] {
                MbfhClass::Square(_) => Rational::new(-5, n4) - rat(border_nbrs),
                MbfhClass::Connector(..) => rat(-border_nbrs),
                MbfhClass::Border => rat(5),
            }
        })
        .collect();
    let n_i = n as i64;
    let delta = Rational::new(n_i.pow(5), 2) + rat(4 * n_i);
    let instance = TripInstance::new(
        rat(1),
        delta,
        0,
        1,
        Grid::from_vec(dim, dim, cost)?,
        Grid::filled(dim, dim, 0),
    )?;
    Ok(MbfhReduction {
        instance,
        classes,
        nodes,
        edges,
        side,
        constant: Rational::new(5 * n_i, 2),
    })
}

/// Minimum number of edges between two equal halves, by enumeration.
pub fn brute_bisection_width(n: usize, edges: &[(usize, usize)]) -> Result<usize> {
    if !n.is_multiple_of(2) || n > 24 {
        return Err(Error::TooLarge(format!(
            "bisection enumeration over {n} nodes"
        )));
    }
    let mut best = usize::MAX;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n / 2 || mask & 1 == 0 {
            continue;
        }
        let cut = edges
            .iter()
            .filter(|&&(a, b)| ((mask >> a) & 1) != ((mask >> b) & 1))
            .count();
        best = best.min(cut);
    }
    Ok(best)
}
