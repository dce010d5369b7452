//! Bounded-variable revised primal simplex.
//!
//! Every row `r` gets a logical variable `s_r = a_r·x` whose bounds encode
//! the row sense, so the working system is `[A | -I] (x, s) = 0` and all
//! constraints live in variable bounds. The basis inverse is kept densely
//! (column-major) with product-form updates and periodic refactorization
//! through the kernel of basic structural columns. Phase 1 minimizes the sum
//! of bound violations of basic variables; phase 2 uses Dantzig pricing and
//! switches to Bland's rule after a streak of degenerate pivots.

use super::{LinearProgram, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub tol_feas: f64,
    pub tol_opt: f64,
    /// Zero selects `20 (m + n) + 1000`.
    pub max_iter: usize,
    pub refactor_every: usize,
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            tol_feas: 1e-9,
            tol_opt: 1e-9,
            max_iter: 0,
            refactor_every: 64,
            bland_after: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values.
    pub x: Vec<f64>,
    pub row_activity: Vec<f64>,
    pub objective: f64,
    /// Status of every structural followed by every row logical.
    pub basis: Vec<VarStatus>,
    pub iterations: usize,
    pub diagnostics: String,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn failed(
        status: LpStatus,
        n: usize,
        m: usize,
        iterations: usize,
        diagnostics: String,
    ) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            row_activity: vec![0.0; m],
            objective: f64::NAN,
            basis: Vec::new(),
            iterations,
            diagnostics,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram, opts: &SimplexOptions) -> LpSolution {
    solve_lp_from(lp, None, opts)
}

/// Solve starting from a previous basis. A basis recorded for a program
/// with fewer rows is extended with basic logicals for the new rows; an
/// unusable basis silently falls back to the all-logical start.
pub fn solve_lp_from(
    lp: &LinearProgram,
    warm: Option<&[VarStatus]>,
    opts: &SimplexOptions,
) -> LpSolution {
    let mut s = Simplex::new(lp, opts);
    let warm_ok = warm.is_some_and(|b| s.load_basis(b));
    if !warm_ok {
        s.slack_basis();
    }
    if !s.refactor() {
        s.slack_basis();
        s.refactor();
    }
    s.run()
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    opts: &'a SimplexOptions,
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    value: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    /// Basis inverse, column-major: entry (i, r) at `binv[r * m + i]`.
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
}

const NOT_BASIC: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;

enum Ratio {
    Flip,
    Pivot {
        pos: usize,
        to_upper: bool,
        step: f64,
    },
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, opts: &'a SimplexOptions) -> Self {
        let n = lp.n_vars();
        let m = lp.n_rows();
        let mut counts = vec![0usize; n + 1];
        for row in lp.rows() {
            for &(k, _) in &row.coeffs {
                counts[k + 1] += 1;
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut fill = col_start.clone();
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut row_start = Vec::with_capacity(m + 1);
        let mut row_col = Vec::with_capacity(nnz);
        let mut row_val = Vec::with_capacity(nnz);
        row_start.push(0);
        for (r, row) in lp.rows().iter().enumerate() {
            for &(k, a) in &row.coeffs {
                col_row[fill[k]] = r;
                col_val[fill[k]] = a;
                fill[k] += 1;
                row_col.push(k);
                row_val.push(a);
            }
            row_start.push(row_col.len());
        }
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for v in lp.vars() {
            lower.push(v.lower);
            upper.push(v.upper);
        }
        for row in lp.rows() {
            let (l, u) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            lower.push(l);
            upper.push(u);
        }
        let mut cost = lp.objective().to_vec();
        cost.resize(n + m, 0.0);
        Simplex {
            lp,
            opts,
            n,
            m,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            lower,
            upper,
            cost,
            value: vec![0.0; n + m],
            status: vec![VarStatus::AtLower; n + m],
            basis: Vec::new(),
            pos: vec![NOT_BASIC; n + m],
            binv: vec![0.0; m * m],
            since_refactor: 0,
            iterations: 0,
        }
    }

    fn nonbasic_status(&self, j: usize, hint: VarStatus) -> VarStatus {
        let (l, u) = (self.lower[j], self.upper[j]);
        match hint {
            VarStatus::AtUpper if u.is_finite() => VarStatus::AtUpper,
            VarStatus::AtLower if l.is_finite() => VarStatus::AtLower,
            _ if l.is_finite() && u.is_finite() => {
                if l.abs() <= u.abs() {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                }
            }
            _ if l.is_finite() => VarStatus::AtLower,
            _ if u.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Free,
        }
    }

    fn set_nonbasic(&mut self, j: usize, hint: VarStatus) {
        let st = self.nonbasic_status(j, hint);
        self.status[j] = st;
        self.pos[j] = NOT_BASIC;
        self.value[j] = match st {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            _ => 0.0,
        };
    }

    fn slack_basis(&mut self) {
        for j in 0..self.n {
            self.set_nonbasic(j, VarStatus::AtLower);
        }
        self.basis = (self.n..self.n + self.m).collect();
        for (p, &j) in self.basis.iter().enumerate() {
            self.status[j] = VarStatus::Basic;
            self.pos[j] = p;
        }
    }

    fn load_basis(&mut self, warm: &[VarStatus]) -> bool {
        let (n, m) = (self.n, self.m);
        if warm.len() < n || warm.len() > n + m {
            return false;
        }
        let mut st: Vec<VarStatus> = warm.to_vec();
        st.resize(n + m, VarStatus::Basic);
        if st.iter().filter(|&&s| s == VarStatus::Basic).count() != m {
            return false;
        }
        self.basis.clear();
        for (j, &s) in st.iter().enumerate() {
            if s == VarStatus::Basic {
                self.status[j] = VarStatus::Basic;
                self.pos[j] = self.basis.len();
                self.basis.push(j);
            } else {
                self.set_nonbasic(j, s);
            }
        }
        true
    }

    /// Rebuilds the basis inverse from scratch and recomputes basic values.
    /// Returns false if the basis matrix is numerically singular.
    fn refactor(&mut self) -> bool {
        let (n, m) = (self.n, self.m);
        let structs: Vec<usize> = self.basis.iter().copied().filter(|&j| j < n).collect();
        let mut in_s = vec![NOT_BASIC; n];
        for (b, &j) in structs.iter().enumerate() {
            in_s[j] = b;
        }
        let kernel_rows: Vec<usize> = (0..m)
            .filter(|&r| self.status[n + r] != VarStatus::Basic)
            .collect();
        let k = structs.len();
        if kernel_rows.len() != k {
            return false;
        }
        // Gauss-Jordan on [K | I] with partial pivoting.
        let w = 2 * k;
        let mut aug = vec![0.0; k * w];
        for (a, &r) in kernel_rows.iter().enumerate() {
            for q in self.row_start[r]..self.row_start[r + 1] {
                let b = in_s[self.row_col[q]];
                if b != NOT_BASIC {
                    aug[a * w + b] = self.row_val[q];
                }
            }
            aug[a * w + k + a] = 1.0;
        }
        for c in 0..k {
            let piv = (c..k)
                .max_by(|&x, &y| aug[x * w + c].abs().total_cmp(&aug[y * w + c].abs()))
                .unwrap_or(c);
            if aug[piv * w + c].abs() < 1e-11 {
                return false;
            }
            if piv != c {
                for q in 0..w {
                    aug.swap(piv * w + q, c * w + q);
                }
            }
            let inv = 1.0 / aug[c * w + c];
            for q in 0..w {
                aug[c * w + q] *= inv;
            }
            for r in 0..k {
                if r != c {
                    let f = aug[r * w + c];
                    if f != 0.0 {
                        for q in 0..w {
                            aug[r * w + q] -= f * aug[c * w + q];
                        }
                    }
                }
            }
        }
        // kinv[b][a] = aug[b * w + k + a]
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for (p, &j) in self.basis.iter().enumerate() {
            if j < n {
                let b = in_s[j];
                for (a, &r) in kernel_rows.iter().enumerate() {
                    self.binv[r * m + p] = aug[b * w + k + a];
                }
            } else {
                let l = j - n;
                self.binv[l * m + p] = -1.0;
                for q in self.row_start[l]..self.row_start[l + 1] {
                    let b = in_s[self.row_col[q]];
                    if b != NOT_BASIC {
                        let coef = self.row_val[q];
                        for (a, &r) in kernel_rows.iter().enumerate() {
                            self.binv[r * m + p] += coef * aug[b * w + k + a];
                        }
                    }
                }
            }
        }
        self.since_refactor = 0;
        self.recompute_basics();
        true
    }

    fn recompute_basics(&mut self) {
        let (n, m) = (self.n, self.m);
        let mut rhs = vec![0.0; m];
        for j in 0..n {
            if self.status[j] != VarStatus::Basic && self.value[j] != 0.0 {
                for q in self.col_start[j]..self.col_start[j + 1] {
                    rhs[self.col_row[q]] -= self.col_val[q] * self.value[j];
                }
            }
        }
        for r in 0..m {
            if self.status[n + r] != VarStatus::Basic {
                rhs[r] += self.value[n + r];
            }
        }
        let mut xb = vec![0.0; m];
        for (r, &b) in rhs.iter().enumerate() {
            if b != 0.0 {
                let col = &self.binv[r * m..(r + 1) * m];
                for (x, &c) in xb.iter_mut().zip(col) {
                    *x += c * b;
                }
            }
        }
        for (p, &j) in self.basis.iter().enumerate() {
            self.value[j] = xb[p];
        }
    }

    fn violation(&self, j: usize) -> f64 {
        let v = self.value[j];
        (self.lower[j] - v).max(v - self.upper[j]).max(0.0)
    }

    fn max_violation(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| self.violation(j))
            .fold(0.0, f64::max)
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        let mut add = |r: usize, a: f64| {
            let col = &self.binv[r * m..(r + 1) * m];
            for (x, &c) in alpha.iter_mut().zip(col) {
                *x += c * a;
            }
        };
        if j < self.n {
            for q in self.col_start[j]..self.col_start[j + 1] {
                add(self.col_row[q], self.col_val[q]);
            }
        } else {
            add(j - self.n, -1.0);
        }
        alpha
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let tol = self.opts.tol_feas;
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&j| {
                if phase1 {
                    let v = self.value[j];
                    if v < self.lower[j] - tol {
                        -1.0
                    } else if v > self.upper[j] + tol {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[j]
                }
            })
            .collect();
        (0..m)
            .map(|r| {
                self.binv[r * m..(r + 1) * m]
                    .iter()
                    .zip(&cb)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase1: bool) -> f64 {
        let c = if phase1 { 0.0 } else { self.cost[j] };
        if j < self.n {
            let mut d = c;
            for q in self.col_start[j]..self.col_start[j + 1] {
                d -= y[self.col_row[q]] * self.col_val[q];
            }
            d
        } else {
            c + y[j - self.n]
        }
    }

    /// Entering variable and its direction of movement.
    fn price(&self, y: &[f64], phase1: bool, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.tol_opt;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, y, phase1);
            let dir = match st {
                VarStatus::AtLower if d < -tol => 1.0,
                VarStatus::AtUpper if d > tol => -1.0,
                VarStatus::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|b| d.abs() > b.2) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Harris-style two-pass ratio test.
    fn ratio(&self, e: usize, dir: f64, alpha: &[f64], phase1: bool) -> Ratio {
        let tol = self.opts.tol_feas;
        let mut limit = f64::INFINITY;
        // Pass 1: largest step keeping every basic within its relaxed bounds.
        let candidates: Vec<(usize, f64, f64, bool)> = self
            .basis
            .iter()
            .enumerate()
            .filter_map(|(p, &j)| {
                let rate = -dir * alpha[p];
                if rate.abs() < PIVOT_TOL {
                    return None;
                }
                let (v, l, u) = (self.value[j], self.lower[j], self.upper[j]);
                if phase1 && v < l - tol {
                    return (rate > 0.0).then(|| (p, (l - v) / rate, rate, false));
                }
                if phase1 && v > u + tol {
                    return (rate < 0.0).then(|| (p, (v - u) / -rate, rate, true));
                }
                if rate < 0.0 && l.is_finite() {
                    Some((p, (v - l) / -rate, rate, false))
                } else if rate > 0.0 && u.is_finite() {
                    Some((p, (u - v) / rate, rate, true))
                } else {
                    None
                }
            })
            .collect();
        for &(_, t, rate, _) in &candidates {
            limit = limit.min(t + tol / rate.abs());
        }
        let flip = self.upper[e] - self.lower[e];
        if flip.is_finite() && flip <= limit {
            return Ratio::Flip;
        }
        if candidates.is_empty() {
            return Ratio::Unbounded;
        }
        // Pass 2: among steps within the relaxed limit, the largest pivot.
        let mut best: Option<(usize, bool, f64, f64)> = None;
        for &(p, t, _, to_upper) in &candidates {
            if t <= limit {
                let mag = alpha[p].abs();
                if best.is_none_or(|b| mag > b.3) {
                    best = Some((p, to_upper, t, mag));
                }
            }
        }
        match best {
            Some((pos, to_upper, step, _)) => Ratio::Pivot {
                pos,
                to_upper,
                step: step.max(0.0),
            },
            None => Ratio::Unbounded,
        }
    }

    fn pivot(&mut self, e: usize, p: usize, alpha: &[f64]) {
        let m = self.m;
        let ap = alpha[p];
        for r in 0..m {
            let col = &mut self.binv[r * m..(r + 1) * m];
            let v = col[p] / ap;
            if v != 0.0 {
                for (i, x) in col.iter_mut().enumerate() {
                    *x -= alpha[i] * v;
                }
            }
            col[p] = v;
        }
        let leaving = self.basis[p];
        self.pos[leaving] = NOT_BASIC;
        self.basis[p] = e;
        self.pos[e] = p;
        self.status[e] = VarStatus::Basic;
        self.since_refactor += 1;
    }

    fn step(&mut self, e: usize, dir: f64, phase1: bool) -> Result<bool, LpStatus> {
        let alpha = self.ftran(e);
        match self.ratio(e, dir, &alpha, phase1) {
            Ratio::Unbounded => Err(if phase1 {
                LpStatus::NumericalFailure
            } else {
                LpStatus::Unbounded
            }),
            Ratio::Flip => {
                let t = self.upper[e] - self.lower[e];
                for (p, &j) in self.basis.iter().enumerate() {
                    self.value[j] -= dir * t * alpha[p];
                }
                let to_upper = self.status[e] == VarStatus::AtLower;
                self.status[e] = if to_upper {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                self.value[e] = if to_upper {
                    self.upper[e]
                } else {
                    self.lower[e]
                };
                Ok(t > 1e-12)
            }
            Ratio::Pivot {
                pos,
                to_upper,
                step,
            } => {
                for (p, &j) in self.basis.iter().enumerate() {
                    self.value[j] -= dir * step * alpha[p];
                }
                self.value[e] += dir * step;
                let leaving = self.basis[pos];
                self.pivot(e, pos, &alpha);
                self.status[leaving] = if to_upper {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                self.value[leaving] = if to_upper {
                    self.upper[leaving]
                } else {
                    self.lower[leaving]
                };
                Ok(step > 1e-12)
            }
        }
    }

    /// Moves nonbasic free variables into the basis along zero-cost
    /// directions so the returned point is a vertex.
    fn basify_free(&mut self) {
        for j in 0..self.n {
            if self.status[j] != VarStatus::Free {
                continue;
            }
            let alpha = self.ftran(j);
            for dir in [1.0, -1.0] {
                if let Ratio::Pivot {
                    pos,
                    to_upper,
                    step,
                } = self.ratio(j, dir, &alpha, false)
                {
                    for (p, &b) in self.basis.iter().enumerate() {
                        self.value[b] -= dir * step * alpha[p];
                    }
                    self.value[j] += dir * step;
                    let leaving = self.basis[pos];
                    self.pivot(j, pos, &alpha);
                    self.status[leaving] = if to_upper {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    self.value[leaving] = if to_upper {
                        self.upper[leaving]
                    } else {
                        self.lower[leaving]
                    };
                    break;
                }
            }
        }
    }

    fn run(mut self) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let max_iter = if self.opts.max_iter == 0 {
            20 * (n + m) + 1000
        } else {
            self.opts.max_iter
        };
        let mut degenerate = 0usize;
        let mut restarts = 0usize;
        let mut basified = false;
        loop {
            if self.iterations >= max_iter {
                return LpSolution::failed(
                    LpStatus::NumericalFailure,
                    n,
                    m,
                    self.iterations,
                    format!(
                        "iteration limit {max_iter} reached, infeasibility {:.3e}",
                        self.max_violation()
                    ),
                );
            }
            if self.since_refactor >= self.opts.refactor_every && !self.refactor() {
                if restarts > 2 {
                    return LpSolution::failed(
                        LpStatus::NumericalFailure,
                        n,
                        m,
                        self.iterations,
                        "singular basis".into(),
                    );
                }
                restarts += 1;
                self.slack_basis();
                self.refactor();
            }
            let phase1 = self.max_violation() > self.opts.tol_feas;
            let y = self.duals(phase1);
            let bland = degenerate >= self.opts.bland_after;
            match self.price(&y, phase1, bland) {
                Some((e, dir)) => {
                    self.iterations += 1;
                    match self.step(e, dir, phase1) {
                        Ok(true) => degenerate = 0,
                        Ok(false) => degenerate += 1,
                        Err(status) => {
                            if self.since_refactor > 0 && self.refactor() {
                                continue;
                            }
                            return LpSolution::failed(
                                status,
                                n,
                                m,
                                self.iterations,
                                format!("no blocking variable for entering column {e}"),
                            );
                        }
                    }
                }
                None => {
                    if self.since_refactor > 0 {
                        if !self.refactor() {
                            restarts += 1;
                            if restarts > 3 {
                                return LpSolution::failed(
                                    LpStatus::NumericalFailure,
                                    n,
                                    m,
                                    self.iterations,
                                    "singular basis at optimality check".into(),
                                );
                            }
                            self.slack_basis();
                            self.refactor();
                        }
                        continue;
                    }
                    if phase1 {
                        return LpSolution::failed(
                            LpStatus::Infeasible,
                            n,
                            m,
                            self.iterations,
                            format!(
                                "phase 1 ended with infeasibility {:.3e}",
                                self.max_violation()
                            ),
                        );
                    }
                    if !basified {
                        basified = true;
                        self.basify_free();
                        if self.since_refactor > 0 {
                            continue;
                        }
                    }
                    return self.finish();
                }
            }
        }
    }

    fn finish(self) -> LpSolution {
        let x: Vec<f64> = self.value[..self.n].to_vec();
        let objective = x.iter().zip(self.lp.objective()).map(|(a, b)| a * b).sum();
        let row_activity = (0..self.m)
            .map(|r| {
                (self.row_start[r]..self.row_start[r + 1])
                    .map(|q| self.row_val[q] * x[self.row_col[q]])
                    .sum()
            })
            .collect();
        LpSolution {
            status: LpStatus::Optimal,
            x,
            row_activity,
            objective,
            basis: self.status,
            iterations: self.iterations,
            diagnostics: String::new(),
        }
    }
}
