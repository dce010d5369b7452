use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major matrix over grid cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Grid {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                got: (data.len() / cols.max(1), cols),
            });
        }
        Ok(Grid { rows, cols, data })
    }

    /// Builds from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::ShapeMismatch {
                expected: (n, m),
                got: (n, bad.len()),
            });
        }
        Ok(Grid {
            rows: n,
            cols: m,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U: Clone, V: Clone>(&self, other: &Grid<U>, f: impl Fn(&T, &U) -> V) -> Grid<V> {
        assert_eq!(self.shape(), other.shape(), "grid shapes differ");
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl<T> Grid<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn index_of(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.cols, k % self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        (i < self.rows && j < self.cols).then(|| &self.data[i * self.cols + j])
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// The 4-neighbours of cell `k` in an `n x m` grid, as flat indices.
pub fn neighbors(n: usize, m: usize, k: usize) -> impl Iterator<Item = usize> {
    let (i, j) = (k / m, k % m);
    let up = (i > 0).then(|| k - m);
    let down = (i + 1 < n).then(|| k + m);
    let left = (j > 0).then(|| k - 1);
    let right = (j + 1 < m).then(|| k + 1);
    [up, down, left, right].into_iter().flatten()
}

/// All grid edges as `(a, b)` flat index pairs with `a < b`: vertical
/// edges first (row-major over their upper cell), then horizontal ones.
pub fn edges(n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2 * n * m);
    for i in 0..n.saturating_sub(1) {
        for j in 0..m {
            out.push((i * m + j, (i + 1) * m + j));
        }
    }
    for i in 0..n {
        for j in 0..m.saturating_sub(1) {
            out.push((i * m + j, i * m + j + 1));
        }
    }
    out
}
