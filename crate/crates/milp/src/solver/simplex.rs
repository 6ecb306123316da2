//! Bounded-variable revised simplex.
//!
//! Every row `i` gets a logical variable `r_i = a_i x` whose bounds encode the
//! row sense, so the working problem is
//!
//! ```text
//! min c'x   s.t.   A x - r = 0,   l <= (x, r) <= u
//! ```
//!
//! Variable bounds are handled inside the ratio tests, never as rows. A dual
//! simplex restores primal feasibility (on the true costs when the start is
//! dual feasible, on a box-derived artificial cost otherwise) and a primal
//! simplex finishes optimization. The basis is kept as a sparse LU factor plus
//! product-form eta updates, refactorized periodically.

use log::{debug, trace};

use super::lu::LuFactors;
use crate::model::{MilpModel, Sense};

const REFACTOR_INTERVAL: usize = 100;
const PIVOT_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;
const MAX_ROUNDS: usize = 8;
const MIN_WEIGHT: f64 = 1e-6;

/// `out <- B^{-1} work` through the LU factors and the eta file; `work` is
/// indexed by row and cleared.
fn ftran(lu: &LuFactors, etas: &[Eta], work: &mut [f64], out: &mut [f64]) {
    lu.solve(work, out);
    for eta in etas {
        let xr = out[eta.pos] / eta.pivot;
        out[eta.pos] = xr;
        if xr != 0.0 {
            for &(i, a) in &eta.entries {
                out[i] -= a * xr;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub primal: f64,
    pub dual: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
}

/// Result of one LP solve in model space.
#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// Structural values (unscaled).
    pub x: Vec<f64>,
    /// Row duals (unscaled), sign convention of the model rows.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

/// Scaled, solver-ready copy of a model. Built once and solved many times with
/// different structural bounds.
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    n: usize,
    /// Rows with at least one nonzero; empty rows are checked once and left out.
    m: usize,
    model_rows: Vec<usize>,
    model_m: usize,
    /// Largest amount by which zero violates the bounds of an empty row.
    empty_row_violation: f64,
    col_start: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    row_start: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    col_scale: Vec<f64>,
    row_scale: Vec<f64>,
}

fn pow2_round(x: f64) -> f64 {
    if !x.is_finite() || x <= 0.0 {
        return 1.0;
    }
    2f64.powi(x.log2().round().clamp(-40.0, 40.0) as i32)
}

impl LpData {
    pub(crate) fn new(model: &MilpModel) -> Self {
        let n = model.num_vars();
        let model_m = model.num_constraints();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut model_rows = Vec::new();
        let mut empty_row_violation = 0.0f64;
        for (i, row) in model.constraints().iter().enumerate() {
            let k = model_rows.len();
            let before = triplets.len();
            for &(v, a) in &row.terms {
                if a != 0.0 {
                    triplets.push((k, v.0, a));
                }
            }
            if triplets.len() > before {
                model_rows.push(i);
            } else {
                let v = match row.sense {
                    Sense::Le => -row.rhs,
                    Sense::Ge => row.rhs,
                    Sense::Eq => row.rhs.abs(),
                };
                empty_row_violation = empty_row_violation.max(v);
            }
        }
        let m = model_rows.len();

        // geometric-mean scaling, rounded to powers of two so it is exact
        let mut row_scale = vec![1.0; m];
        let mut col_scale = vec![1.0; n];
        for _ in 0..6 {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for &(i, j, a) in &triplets {
                let v = a.abs() * col_scale[j];
                rmin[i] = rmin[i].min(v);
                rmax[i] = rmax[i].max(v);
            }
            for i in 0..m {
                if rmax[i] > 0.0 {
                    row_scale[i] = 1.0 / (rmin[i] * rmax[i]).sqrt();
                }
            }
            let mut cmin = vec![f64::INFINITY; n];
            let mut cmax = vec![0.0f64; n];
            for &(i, j, a) in &triplets {
                let v = a.abs() * row_scale[i];
                cmin[j] = cmin[j].min(v);
                cmax[j] = cmax[j].max(v);
            }
            for j in 0..n {
                if cmax[j] > 0.0 {
                    col_scale[j] = 1.0 / (cmin[j] * cmax[j]).sqrt();
                }
            }
        }
        for s in row_scale.iter_mut().chain(col_scale.iter_mut()) {
            *s = pow2_round(*s);
        }

        let mut col_count = vec![0usize; n];
        let mut row_count = vec![0usize; m];
        for &(i, j, _) in &triplets {
            col_count[j] += 1;
            row_count[i] += 1;
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + col_count[j];
        }
        let mut row_start = vec![0usize; m + 1];
        for i in 0..m {
            row_start[i + 1] = row_start[i] + row_count[i];
        }
        let nnz = triplets.len();
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0.0; nnz];
        let mut row_cols = vec![0usize; nnz];
        let mut row_vals = vec![0.0; nnz];
        let mut cfill = col_start.clone();
        let mut rfill = row_start.clone();
        for &(i, j, a) in &triplets {
            let v = a * row_scale[i] * col_scale[j];
            col_rows[cfill[j]] = i;
            col_vals[cfill[j]] = v;
            cfill[j] += 1;
            row_cols[rfill[i]] = j;
            row_vals[rfill[i]] = v;
            rfill[i] += 1;
        }

        let cost = (0..n).map(|j| model.objective()[j] * col_scale[j]).collect();
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for (j, v) in model.variables().iter().enumerate() {
            lower.push(v.lower / col_scale[j]);
            upper.push(v.upper / col_scale[j]);
        }
        for (i, &mi) in model_rows.iter().enumerate() {
            let row = model.constraint(crate::model::RowId(mi));
            let b = row.rhs * row_scale[i];
            let (lo, up) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, b),
                Sense::Ge => (b, f64::INFINITY),
                Sense::Eq => (b, b),
            };
            lower.push(lo);
            upper.push(up);
        }

        Self {
            n,
            m,
            model_rows,
            model_m,
            empty_row_violation,
            col_start,
            col_rows,
            col_vals,
            row_start,
            row_cols,
            row_vals,
            cost,
            lower,
            upper,
            col_scale,
            row_scale,
        }
    }

    /// Solves with structural bounds replaced by `overrides` (model units).
    pub(crate) fn solve(&self, overrides: &[(usize, f64, f64)], tol: &Tolerances) -> LpOutcome {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for &(j, lo, up) in overrides {
            lower[j] = lo / self.col_scale[j];
            upper[j] = up / self.col_scale[j];
        }
        if self.empty_row_violation > tol.primal || (0..self.n + self.m).any(|j| lower[j] > upper[j]) {
            return LpOutcome {
                status: LpStatus::Infeasible,
                x: vec![0.0; self.n],
                duals: vec![0.0; self.model_m],
                iterations: 0,
            };
        }
        let mut s = Simplex::new(self, lower, upper, *tol);
        let status = s.run();
        let x = (0..self.n).map(|j| s.x[j] * self.col_scale[j]).collect();
        let mut duals = vec![0.0; self.model_m];
        if status == LpStatus::Optimal {
            s.set_costs_real();
            let y = s.compute_row_duals();
            for ((y, r), &mi) in y.iter().zip(&self.row_scale).zip(&self.model_rows) {
                duals[mi] = y * r;
            }
        }
        debug!(
            "lp solve: {} rows, {} cols, status {:?}, {} iterations",
            self.m, self.n, status, s.iterations
        );
        LpOutcome {
            status,
            x,
            duals,
            iterations: s.iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Free,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

enum PhaseEnd {
    Optimal,
    Infeasible,
    Unbounded,
    /// Dual simplex found a nonbasic reduced cost of the wrong sign that no
    /// bound flip can repair.
    LostDualFeasibility,
    IterationLimit,
    Numerical,
}

struct Simplex<'a> {
    lp: &'a LpData,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    lu: LuFactors,
    etas: Vec<Eta>,
    work: Vec<f64>,
    col: Vec<f64>,
    rho: Vec<f64>,
    /// `B^{-1} rho`, for the steepest-edge update.
    tau: Vec<f64>,
    /// Dual steepest-edge weights `||e_p^T B^{-1}||^2` by basis position.
    dse: Vec<f64>,
    alpha_row: Vec<f64>,
    touched: Vec<usize>,
    in_touched: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
    degenerate_run: usize,
    bland: bool,
    tol: Tolerances,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LpData, lower: Vec<f64>, upper: Vec<f64>, tol: Tolerances) -> Self {
        let (n, m) = (lp.n, lp.m);
        let total = n + m;
        let mut s = Self {
            lp,
            n,
            m,
            lower,
            upper,
            cost: vec![0.0; total],
            x: vec![0.0; total],
            d: vec![0.0; total],
            state: vec![State::Lower; total],
            basis: (n..total).collect(),
            lu: LuFactors::default(),
            etas: Vec::new(),
            work: vec![0.0; m],
            col: vec![0.0; m],
            rho: vec![0.0; m],
            tau: vec![0.0; m],
            dse: vec![1.0; m],
            alpha_row: vec![0.0; total],
            touched: Vec::new(),
            in_touched: vec![false; total],
            iterations: 0,
            max_iterations: 200 * total + 20_000,
            degenerate_run: 0,
            bland: false,
            tol,
        };
        s.set_costs_real();
        for j in 0..n {
            let (lo, up, c) = (s.lower[j], s.upper[j], s.cost[j]);
            let (state, value) = if lo.is_finite() && up.is_finite() {
                if c < 0.0 {
                    (State::Upper, up)
                } else {
                    (State::Lower, lo)
                }
            } else if lo.is_finite() {
                (State::Lower, lo)
            } else if up.is_finite() {
                (State::Upper, up)
            } else {
                (State::Free, 0.0)
            };
            s.state[j] = state;
            s.x[j] = value;
        }
        for (pos, &v) in s.basis.iter().enumerate() {
            s.state[v] = State::Basic(pos);
        }
        s
    }

    fn set_costs_real(&mut self) {
        self.cost[..self.n].copy_from_slice(&self.lp.cost);
        for c in &mut self.cost[self.n..] {
            *c = 0.0;
        }
    }

    /// Costs that make the current basis dual feasible: push every nonbasic
    /// variable toward the bound it sits on.
    fn set_costs_artificial(&mut self) {
        for j in 0..self.n + self.m {
            self.cost[j] = match self.state[j] {
                State::Basic(_) | State::Free => 0.0,
                State::Lower if self.lower[j] == self.upper[j] => 0.0,
                State::Lower => 1.0,
                State::Upper => -1.0,
            };
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (structural, logical) = if j < self.n {
            let r = self.lp.col_start[j]..self.lp.col_start[j + 1];
            (Some(r), None)
        } else {
            (None, Some(j - self.n))
        };
        structural
            .into_iter()
            .flat_map(move |r| {
                self.lp.col_rows[r.clone()]
                    .iter()
                    .copied()
                    .zip(self.lp.col_vals[r].iter().copied())
            })
            .chain(logical.map(|i| (i, -1.0)))
    }

    fn refactor(&mut self) -> bool {
        for _attempt in 0..4 {
            let cols: Vec<Vec<(usize, f64)>> =
                self.basis.iter().map(|&v| self.column(v).collect()).collect();
            match LuFactors::factorize(self.m, &cols) {
                Ok(lu) => {
                    trace!("refactorized basis: {} nonzeros", lu.nnz());
                    self.lu = lu;
                    self.etas.clear();
                    return true;
                }
                Err(singular) => {
                    debug!("singular basis: replacing {} columns", singular.cols.len());
                    for (&pos, &row) in singular.cols.iter().zip(&singular.rows) {
                        let out = self.basis[pos];
                        self.make_nonbasic_at_nearest(out);
                        let logical = self.n + row;
                        self.basis[pos] = logical;
                        self.state[logical] = State::Basic(pos);
                    }
                }
            }
        }
        false
    }

    fn make_nonbasic_at_nearest(&mut self, j: usize) {
        let (lo, up, v) = (self.lower[j], self.upper[j], self.x[j]);
        let (state, value) = match (lo.is_finite(), up.is_finite()) {
            (false, false) => (State::Free, 0.0),
            (true, false) => (State::Lower, lo),
            (false, true) => (State::Upper, up),
            (true, true) => {
                if (v - lo).abs() <= (up - v).abs() {
                    (State::Lower, lo)
                } else {
                    (State::Upper, up)
                }
            }
        };
        self.state[j] = state;
        self.x[j] = value;
    }

    /// `col <- B^{-1} a_j` indexed by basis position.
    fn ftran_var(&mut self, j: usize) {
        for w in self.work.iter_mut() {
            *w = 0.0;
        }
        let entries: Vec<(usize, f64)> = self.column(j).collect();
        for (i, a) in entries {
            self.work[i] += a;
        }
        self.ftran_work();
    }

    fn ftran_work(&mut self) {
        ftran(&self.lu, &self.etas, &mut self.work, &mut self.col);
    }

    /// `tau <- B^{-1} rho`.
    fn ftran_rho(&mut self) {
        self.work.copy_from_slice(&self.rho);
        ftran(&self.lu, &self.etas, &mut self.work, &mut self.tau);
    }

    /// `rho <- B^{-T} work` with `work` indexed by basis position.
    fn btran_work(&mut self) {
        for eta in self.etas.iter().rev() {
            let mut v = self.work[eta.pos];
            for &(i, a) in &eta.entries {
                v -= a * self.work[i];
            }
            self.work[eta.pos] = v / eta.pivot;
        }
        self.lu.solve_transposed(&mut self.work, &mut self.rho);
    }

    fn compute_primal(&mut self) {
        for w in self.work.iter_mut() {
            *w = 0.0;
        }
        for j in 0..self.n + self.m {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            if j < self.n {
                for k in self.lp.col_start[j]..self.lp.col_start[j + 1] {
                    self.work[self.lp.col_rows[k]] -= self.lp.col_vals[k] * xj;
                }
            } else {
                self.work[j - self.n] += xj;
            }
        }
        self.ftran_work();
        for pos in 0..self.m {
            self.x[self.basis[pos]] = self.col[pos];
        }
    }

    fn compute_row_duals(&mut self) -> Vec<f64> {
        for pos in 0..self.m {
            self.work[pos] = self.cost[self.basis[pos]];
        }
        self.btran_work();
        self.rho.clone()
    }

    fn compute_duals(&mut self) {
        let y = self.compute_row_duals();
        for j in 0..self.n {
            if matches!(self.state[j], State::Basic(_)) {
                self.d[j] = 0.0;
                continue;
            }
            let mut dj = self.cost[j];
            for k in self.lp.col_start[j]..self.lp.col_start[j + 1] {
                dj -= y[self.lp.col_rows[k]] * self.lp.col_vals[k];
            }
            self.d[j] = dj;
        }
        for (i, yi) in y.iter().enumerate() {
            let j = self.n + i;
            self.d[j] = if matches!(self.state[j], State::Basic(_)) {
                0.0
            } else {
                self.cost[j] + yi
            };
        }
    }

    fn refresh(&mut self) -> bool {
        if !self.refactor() {
            return false;
        }
        self.compute_primal();
        self.compute_duals();
        true
    }

    fn primal_infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lower[j] - v).max(v - self.upper[j]).max(0.0)
    }

    fn is_primal_feasible(&self) -> bool {
        self.basis
            .iter()
            .all(|&j| self.primal_infeasibility(j) <= self.tol.primal)
    }

    /// Flips boxed variables whose reduced cost has the wrong sign; returns
    /// false if an unboxed variable is dual infeasible.
    fn repair_dual_feasibility(&mut self) -> bool {
        let mut flipped = false;
        let mut ok = true;
        for j in 0..self.n + self.m {
            let dj = self.d[j];
            match self.state[j] {
                State::Basic(_) => {}
                State::Lower if self.lower[j] == self.upper[j] => {}
                State::Lower if dj < -self.tol.dual => {
                    if self.upper[j].is_finite() {
                        self.state[j] = State::Upper;
                        self.x[j] = self.upper[j];
                        flipped = true;
                    } else {
                        ok = false;
                    }
                }
                State::Upper if dj > self.tol.dual => {
                    if self.lower[j].is_finite() {
                        self.state[j] = State::Lower;
                        self.x[j] = self.lower[j];
                        flipped = true;
                    } else {
                        ok = false;
                    }
                }
                State::Free if dj.abs() > self.tol.dual => ok = false,
                _ => {}
            }
        }
        if flipped {
            self.compute_primal();
        }
        ok
    }

    fn is_dual_feasible(&self) -> bool {
        (0..self.n + self.m).all(|j| match self.state[j] {
            State::Basic(_) => true,
            State::Lower if self.lower[j] == self.upper[j] => true,
            State::Lower => self.d[j] >= -self.tol.dual,
            State::Upper => self.d[j] <= self.tol.dual,
            State::Free => self.d[j].abs() <= self.tol.dual,
        })
    }

    fn run(&mut self) -> LpStatus {
        for round in 0..MAX_ROUNDS {
            self.set_costs_real();
            if !self.refresh() {
                return LpStatus::NumericalFailure;
            }
            if !self.is_primal_feasible() {
                let mut need_phase_one = true;
                if self.repair_dual_feasibility() {
                    match self.dual_simplex() {
                        PhaseEnd::Optimal => need_phase_one = false,
                        PhaseEnd::Infeasible => return LpStatus::Infeasible,
                        PhaseEnd::IterationLimit => return LpStatus::IterationLimit,
                        PhaseEnd::LostDualFeasibility | PhaseEnd::Numerical => {}
                        PhaseEnd::Unbounded => unreachable!("dual simplex never reports unbounded"),
                    }
                }
                if need_phase_one {
                    self.set_costs_artificial();
                    if !self.refresh() {
                        return LpStatus::NumericalFailure;
                    }
                    match self.dual_simplex() {
                        PhaseEnd::Optimal => {}
                        PhaseEnd::Infeasible => return LpStatus::Infeasible,
                        PhaseEnd::IterationLimit => return LpStatus::IterationLimit,
                        PhaseEnd::LostDualFeasibility | PhaseEnd::Numerical => continue,
                        PhaseEnd::Unbounded => unreachable!("dual simplex never reports unbounded"),
                    }
                    self.set_costs_real();
                    self.compute_duals();
                }
            }
            match self.primal_simplex() {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => return LpStatus::Unbounded,
                PhaseEnd::IterationLimit => return LpStatus::IterationLimit,
                PhaseEnd::Infeasible | PhaseEnd::LostDualFeasibility | PhaseEnd::Numerical => continue,
            }
            if !self.refresh() {
                return LpStatus::NumericalFailure;
            }
            if self.is_primal_feasible() && self.is_dual_feasible() {
                return LpStatus::Optimal;
            }
            debug!("round {round}: optimality lost after refactorization, retrying");
        }
        LpStatus::NumericalFailure
    }

    fn note_step(&mut self, degenerate: bool) {
        if degenerate {
            self.degenerate_run += 1;
            if self.degenerate_run > self.tol.stall_threshold && !self.bland {
                trace!("stalling after {} degenerate pivots, using Bland's rule", self.degenerate_run);
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    /// Pivot row `alpha_r = e_r^T B^{-1} [A, -I]` for nonbasic columns,
    /// computed from `rho`.
    fn compute_pivot_row(&mut self) {
        for &j in &self.touched {
            self.alpha_row[j] = 0.0;
            self.in_touched[j] = false;
        }
        self.touched.clear();
        for i in 0..self.m {
            let r = self.rho[i];
            if r == 0.0 {
                continue;
            }
            for k in self.lp.row_start[i]..self.lp.row_start[i + 1] {
                let j = self.lp.row_cols[k];
                if !self.in_touched[j] {
                    self.in_touched[j] = true;
                    self.touched.push(j);
                }
                self.alpha_row[j] += r * self.lp.row_vals[k];
            }
            let j = self.n + i;
            if !self.in_touched[j] {
                self.in_touched[j] = true;
                self.touched.push(j);
            }
            self.alpha_row[j] -= r;
        }
    }

    fn btran_unit(&mut self, pos: usize) {
        for w in self.work.iter_mut() {
            *w = 0.0;
        }
        self.work[pos] = 1.0;
        self.btran_work();
    }

    /// Basis change: `q` enters at position `r` after moving by `delta`; the
    /// leaving variable is set to `target` with nonbasic state `leave_state`.
    /// Expects `col` = B^{-1} a_q and `alpha_row` for row `r`.
    fn pivot(&mut self, r: usize, q: usize, delta: f64, target: f64, leave_state: State) {
        let leaving = self.basis[r];
        let alpha_rq = self.col[r];
        self.x[q] += delta;
        if delta != 0.0 {
            for pos in 0..self.m {
                let c = self.col[pos];
                if c != 0.0 {
                    self.x[self.basis[pos]] -= c * delta;
                }
            }
        }
        self.x[leaving] = target;

        let theta = self.d[q] / alpha_rq;
        if theta != 0.0 {
            for &j in &self.touched {
                if !matches!(self.state[j], State::Basic(_)) {
                    self.d[j] -= theta * self.alpha_row[j];
                }
            }
        }
        self.d[leaving] = -theta;
        self.d[q] = 0.0;

        self.state[leaving] = leave_state;
        self.state[q] = State::Basic(r);
        self.basis[r] = q;

        let entries = (0..self.m)
            .filter(|&i| i != r && self.col[i].abs() > ZERO_TOL)
            .map(|i| (i, self.col[i]))
            .collect();
        self.etas.push(Eta {
            pos: r,
            pivot: alpha_rq,
            entries,
        });
        self.iterations += 1;
    }

    fn leave_state(&self, j: usize, to_upper: bool) -> State {
        if to_upper && self.lower[j] != self.upper[j] {
            State::Upper
        } else {
            State::Lower
        }
    }

    fn dual_simplex(&mut self) -> PhaseEnd {
        let mut fresh = true;
        self.degenerate_run = 0;
        self.bland = false;
        // exact for the slack basis every solve starts from
        self.dse.fill(1.0);
        loop {
            if self.iterations >= self.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            if self.etas.len() >= REFACTOR_INTERVAL {
                if !self.refresh() {
                    return PhaseEnd::Numerical;
                }
                if !self.repair_dual_feasibility() {
                    return PhaseEnd::LostDualFeasibility;
                }
                fresh = true;
            }

            // leaving row: largest weighted bound violation, or lowest index
            // under Bland
            let mut best: Option<(usize, f64)> = None;
            for pos in 0..self.m {
                let j = self.basis[pos];
                let inf = self.primal_infeasibility(j);
                if inf <= self.tol.primal {
                    continue;
                }
                let inf = inf * inf / self.dse[pos];
                let better = match best {
                    None => true,
                    Some((bpos, binf)) => {
                        if self.bland {
                            j < self.basis[bpos]
                        } else {
                            inf > binf
                        }
                    }
                };
                if better {
                    best = Some((pos, inf));
                }
            }
            let Some((r, _)) = best else {
                return PhaseEnd::Optimal;
            };
            let leaving = self.basis[r];
            let to_upper = self.x[leaving] > self.upper[leaving];
            let target = if to_upper {
                self.upper[leaving]
            } else {
                self.lower[leaving]
            };
            let s = if to_upper { 1.0 } else { -1.0 };

            self.btran_unit(r);
            self.compute_pivot_row();

            let Some(q) = self.dual_ratio_test(s) else {
                if !fresh {
                    if !self.refresh() {
                        return PhaseEnd::Numerical;
                    }
                    if !self.repair_dual_feasibility() {
                        return PhaseEnd::LostDualFeasibility;
                    }
                    fresh = true;
                    continue;
                }
                return PhaseEnd::Infeasible;
            };

            self.ftran_var(q);
            let alpha_rq = self.col[r];
            let check = self.alpha_row[q];
            if alpha_rq.abs() < PIVOT_TOL || (alpha_rq - check).abs() > 1e-7 * (1.0 + alpha_rq.abs()) {
                if fresh {
                    return PhaseEnd::Numerical;
                }
                if !self.refresh() {
                    return PhaseEnd::Numerical;
                }
                if !self.repair_dual_feasibility() {
                    return PhaseEnd::LostDualFeasibility;
                }
                fresh = true;
                continue;
            }
            self.update_dse(r, alpha_rq);
            let delta = (self.x[leaving] - target) / alpha_rq;
            let degenerate = self.d[q].abs() <= ZERO_TOL;
            self.note_step(degenerate);
            let state = self.leave_state(leaving, to_upper);
            self.pivot(r, q, delta, target, state);
            fresh = false;
        }
    }

    /// Steepest-edge weights for the basis after pivoting on row `r`. Needs
    /// `rho` for row `r` and `col` for the entering column.
    fn update_dse(&mut self, r: usize, alpha_rq: f64) {
        let w_r: f64 = self.rho.iter().map(|v| v * v).sum();
        self.ftran_rho();
        for pos in 0..self.m {
            let c = self.col[pos];
            if pos == r || c == 0.0 {
                continue;
            }
            let ratio = c / alpha_rq;
            let w = self.dse[pos] + ratio * (ratio * w_r - 2.0 * self.tau[pos]);
            self.dse[pos] = w.max(MIN_WEIGHT);
        }
        self.dse[r] = (w_r / (alpha_rq * alpha_rq)).max(MIN_WEIGHT);
    }

    /// Harris two-pass dual ratio test over the current pivot row.
    fn dual_ratio_test(&self, s: f64) -> Option<usize> {
        let mut theta_max = f64::INFINITY;
        let mut cands: Vec<(usize, f64, f64)> = Vec::new();
        for &j in &self.touched {
            let a = s * self.alpha_row[j];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let dj = self.d[j];
            let (ratio, relaxed) = match self.state[j] {
                State::Basic(_) => continue,
                State::Lower if self.lower[j] == self.upper[j] => continue,
                State::Lower if a > 0.0 => (dj.max(0.0) / a, (dj + self.tol.dual) / a),
                State::Upper if a < 0.0 => ((-dj).max(0.0) / -a, (-dj + self.tol.dual) / -a),
                State::Free => (dj.abs() / a.abs(), (dj.abs() + self.tol.dual) / a.abs()),
                _ => continue,
            };
            theta_max = theta_max.min(relaxed);
            cands.push((j, a.abs(), ratio));
        }
        if cands.is_empty() {
            return None;
        }
        if self.bland {
            let min_ratio = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            return cands
                .iter()
                .filter(|c| c.2 <= min_ratio)
                .map(|c| c.0)
                .min();
        }
        let mut best: Option<(usize, f64)> = None;
        for &(j, mag, ratio) in &cands {
            if ratio <= theta_max && best.is_none_or(|(bj, bm)| mag > bm || (mag == bm && j < bj)) {
                best = Some((j, mag));
            }
        }
        best.map(|b| b.0)
    }

    fn choose_entering(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.m {
            let dj = self.d[j];
            let score = match self.state[j] {
                State::Basic(_) => continue,
                State::Lower if self.lower[j] == self.upper[j] => continue,
                State::Lower if dj < -self.tol.dual => -dj,
                State::Upper if dj > self.tol.dual => dj,
                State::Free if dj.abs() > self.tol.dual => dj.abs(),
                _ => continue,
            };
            if self.bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        best.map(|b| b.0)
    }

    fn primal_simplex(&mut self) -> PhaseEnd {
        let mut fresh = false;
        self.degenerate_run = 0;
        self.bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            if self.etas.len() >= REFACTOR_INTERVAL {
                if !self.refresh() {
                    return PhaseEnd::Numerical;
                }
                if !self.is_primal_feasible() {
                    return PhaseEnd::Infeasible;
                }
                fresh = true;
            }
            let Some(q) = self.choose_entering() else {
                return PhaseEnd::Optimal;
            };
            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
            self.ftran_var(q);

            // Harris ratio test over basic variables
            let mut t_max = f64::INFINITY;
            for pos in 0..self.m {
                let g = -self.col[pos] * dir;
                if g.abs() <= PIVOT_TOL {
                    continue;
                }
                let i = self.basis[pos];
                let relaxed = if g > 0.0 {
                    (self.upper[i] + self.tol.primal - self.x[i]) / g
                } else {
                    (self.lower[i] - self.tol.primal - self.x[i]) / g
                };
                t_max = t_max.min(relaxed);
            }
            let flip = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, f64, f64)> = None; // (pos, |g|, ratio)
            let mut min_ratio = f64::INFINITY;
            for pos in 0..self.m {
                let g = -self.col[pos] * dir;
                if g.abs() <= PIVOT_TOL {
                    continue;
                }
                let i = self.basis[pos];
                let ratio = if g > 0.0 {
                    (self.upper[i] - self.x[i]) / g
                } else {
                    (self.lower[i] - self.x[i]) / g
                };
                if !ratio.is_finite() {
                    continue;
                }
                let ratio = ratio.max(0.0);
                if self.bland {
                    if ratio < min_ratio || (ratio == min_ratio && leave.is_some_and(|l| i < self.basis[l.0])) {
                        min_ratio = ratio;
                        leave = Some((pos, g.abs(), ratio));
                    }
                } else if ratio <= t_max && leave.is_none_or(|(_, m, _)| g.abs() > m) {
                    leave = Some((pos, g.abs(), ratio));
                }
            }

            let step = leave.map(|l| l.2).unwrap_or(f64::INFINITY);
            if flip.is_finite() && flip <= step {
                // bound flip, no basis change
                let delta = dir * flip;
                self.x[q] += delta;
                for pos in 0..self.m {
                    let c = self.col[pos];
                    if c != 0.0 {
                        self.x[self.basis[pos]] -= c * delta;
                    }
                }
                self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                self.iterations += 1;
                self.note_step(false);
                continue;
            }
            let Some((r, _, ratio)) = leave else {
                if !fresh {
                    if !self.refresh() {
                        return PhaseEnd::Numerical;
                    }
                    fresh = true;
                    continue;
                }
                return PhaseEnd::Unbounded;
            };

            let leaving = self.basis[r];
            let g = -self.col[r] * dir;
            let to_upper = g > 0.0;
            let target = if to_upper {
                self.upper[leaving]
            } else {
                self.lower[leaving]
            };
            self.btran_unit(r);
            self.compute_pivot_row();
            let check = self.alpha_row[q];
            if (self.col[r] - check).abs() > 1e-7 * (1.0 + check.abs()) {
                if fresh {
                    return PhaseEnd::Numerical;
                }
                if !self.refresh() {
                    return PhaseEnd::Numerical;
                }
                fresh = true;
                continue;
            }
            self.note_step(ratio <= ZERO_TOL);
            let state = self.leave_state(leaving, to_upper);
            self.pivot(r, q, dir * ratio, target, state);
            fresh = false;
        }
    }
}
