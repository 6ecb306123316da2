//! Sparse LU factorization of a square basis matrix.
//!
//! Right-looking Gaussian elimination with Markowitz pivot selection and
//! threshold partial pivoting. Column and row singletons are taken first;
//! they dominate simplex bases built from slack columns and chained storage
//! rows and cause no fill.

/// Pivot must be at least this fraction of the largest entry in its column.
const THRESHOLD: f64 = 0.1;
/// Entries below this magnitude are treated as structural zeros.
const DROP_TOL: f64 = 1e-14;
/// Absolute pivot magnitude below which the matrix is considered singular.
const PIVOT_TOL: f64 = 1e-11;
/// Number of candidate pivots examined during a Markowitz search.
const SEARCH_LIMIT: usize = 4;

#[derive(Debug)]
pub(crate) struct Singular {
    /// Columns that could not be pivoted.
    pub cols: Vec<usize>,
    /// Rows left without a pivot, same length as `cols`.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactors {
    m: usize,
    /// Pivot row and column of each elimination step.
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    /// Nonempty L columns in elimination order: (pivot row, [(row, multiplier)]).
    l_etas: Vec<(usize, Vec<(usize, f64)>)>,
    u_diag: Vec<f64>,
    /// Off-diagonal U entries by step, as (column, value).
    u_rows: Vec<Vec<(usize, f64)>>,
    /// Off-diagonal U entries by step of the column, as (earlier step, value).
    u_cols: Vec<Vec<(usize, f64)>>,
}

/// Count-indexed buckets with O(1) insert/remove.
struct Buckets {
    count: Vec<usize>,
    pos: Vec<usize>,
    lists: Vec<Vec<usize>>,
}

const NONE: usize = usize::MAX;

impl Buckets {
    fn new(n: usize) -> Self {
        Self {
            count: vec![NONE; n],
            pos: vec![NONE; n],
            lists: vec![Vec::new(); n + 2],
        }
    }

    fn insert(&mut self, item: usize, count: usize) {
        let list = &mut self.lists[count];
        self.pos[item] = list.len();
        self.count[item] = count;
        list.push(item);
    }

    fn remove(&mut self, item: usize) {
        let c = self.count[item];
        if c == NONE {
            return;
        }
        let p = self.pos[item];
        let list = &mut self.lists[c];
        let last = *list.last().unwrap();
        list.swap_remove(p);
        if last != item {
            self.pos[last] = p;
        }
        self.count[item] = NONE;
        self.pos[item] = NONE;
    }

    fn update(&mut self, item: usize, count: usize) {
        if self.count[item] != count {
            self.remove(item);
            self.insert(item, count);
        }
    }
}

struct Active {
    rows: Vec<Vec<(usize, f64)>>,
    /// Row indices per column. Retired rows are left in place and skipped;
    /// `col_len` holds the live count.
    cols: Vec<Vec<usize>>,
    col_len: Vec<usize>,
    /// Cached largest magnitude per column, recomputed when `col_dirty`.
    col_max: Vec<f64>,
    col_dirty: Vec<bool>,
    row_done: Vec<bool>,
    col_done: Vec<bool>,
    row_buckets: Buckets,
    col_buckets: Buckets,
}

impl Active {
    fn value(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .iter()
            .find(|&&(c, _)| c == col)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    }

    fn live_rows(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        self.cols[col].iter().copied().filter(|&r| !self.row_done[r])
    }

    fn col_max(&mut self, col: usize) -> f64 {
        if self.col_dirty[col] {
            let mx = self.live_rows(col).map(|r| self.value(r, col).abs()).fold(0.0, f64::max);
            self.col_max[col] = mx;
            self.col_dirty[col] = false;
        }
        self.col_max[col]
    }

    fn remove_from_col(&mut self, col: usize, row: usize) {
        let list = &mut self.cols[col];
        if let Some(p) = list.iter().position(|&r| r == row) {
            list.swap_remove(p);
            self.col_len[col] -= 1;
        }
        self.col_dirty[col] = true;
    }

    /// Drops retired rows from a column list once they dominate it.
    fn retire_from_col(&mut self, col: usize) {
        self.col_len[col] -= 1;
        self.col_dirty[col] = true;
        if self.cols[col].len() > 2 * self.col_len[col] + 8 {
            let done = &self.row_done;
            self.cols[col].retain(|&r| !done[r]);
        }
    }
}

impl LuFactors {
    /// Factorizes the `m x m` matrix given column-wise as `(row, value)` lists.
    pub(crate) fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(columns.len(), m);
        let mut act = Active {
            rows: vec![Vec::new(); m],
            cols: vec![Vec::new(); m],
            col_len: vec![0; m],
            col_max: vec![0.0; m],
            col_dirty: vec![true; m],
            row_done: vec![false; m],
            col_done: vec![false; m],
            row_buckets: Buckets::new(m),
            col_buckets: Buckets::new(m),
        };
        for (j, col) in columns.iter().enumerate() {
            for &(i, v) in col {
                if v.abs() > DROP_TOL {
                    act.rows[i].push((j, v));
                    act.cols[j].push(i);
                }
            }
            act.col_len[j] = act.cols[j].len();
        }
        for i in 0..m {
            act.row_buckets.insert(i, act.rows[i].len());
        }
        for j in 0..m {
            act.col_buckets.insert(j, act.col_len[j]);
        }

        let mut f = LuFactors {
            m,
            row_perm: Vec::with_capacity(m),
            col_perm: Vec::with_capacity(m),
            l_etas: Vec::new(),
            u_diag: Vec::with_capacity(m),
            u_rows: Vec::with_capacity(m),
            u_cols: Vec::new(),
        };
        let mut mark = vec![NONE; m];

        for _step in 0..m {
            let Some((p, q)) = select_pivot(&mut act) else {
                break;
            };
            let pivot = act.value(p, q);

            // eliminate column q from the other active rows
            let others: Vec<usize> = act.live_rows(q).filter(|&r| r != p).collect();
            let mut l_col = Vec::with_capacity(others.len());
            let prow: Vec<(usize, f64)> = act.rows[p].iter().copied().filter(|&(c, _)| c != q).collect();
            for &i in &others {
                let a_iq = act.value(i, q);
                let l = a_iq / pivot;
                l_col.push((i, l));
                // drop entry q from row i
                if let Some(k) = act.rows[i].iter().position(|&(c, _)| c == q) {
                    act.rows[i].swap_remove(k);
                }
                for (k, &(c, _)) in act.rows[i].iter().enumerate() {
                    mark[c] = k;
                }
                let mut dropped = Vec::new();
                for &(c, a) in &prow {
                    let k = mark[c];
                    act.col_dirty[c] = true;
                    if k != NONE {
                        let entry = &mut act.rows[i][k];
                        entry.1 -= l * a;
                        if entry.1.abs() <= DROP_TOL {
                            dropped.push(c);
                        }
                    } else {
                        act.rows[i].push((c, -l * a));
                        act.cols[c].push(i);
                        act.col_len[c] += 1;
                    }
                }
                for &(c, _) in &act.rows[i] {
                    mark[c] = NONE;
                }
                for c in dropped {
                    if let Some(k) = act.rows[i].iter().position(|&(cc, _)| cc == c) {
                        act.rows[i].swap_remove(k);
                    }
                    act.remove_from_col(c, i);
                }
            }

            // retire row p and column q
            act.row_done[p] = true;
            act.col_done[q] = true;
            act.row_buckets.remove(p);
            act.col_buckets.remove(q);
            for &(c, _) in &prow {
                act.retire_from_col(c);
            }
            act.cols[q].clear();
            act.col_len[q] = 0;
            act.rows[p].clear();
            for &i in &others {
                act.row_buckets.update(i, act.rows[i].len());
            }
            for &(c, _) in &prow {
                act.col_buckets.update(c, act.col_len[c]);
            }
            f.row_perm.push(p);
            f.col_perm.push(q);
            f.u_diag.push(pivot);
            f.u_rows.push(prow);
            if !l_col.is_empty() {
                f.l_etas.push((p, l_col));
            }
        }

        if f.row_perm.len() < m {
            let cols = (0..m).filter(|&j| !act.col_done[j]).collect();
            let rows = (0..m).filter(|&i| !act.row_done[i]).collect();
            return Err(Singular { cols, rows });
        }

        // column-wise copy of U keyed by elimination step
        let mut col_step = vec![0usize; m];
        for (k, &q) in f.col_perm.iter().enumerate() {
            col_step[q] = k;
        }
        let mut u_cols = vec![Vec::new(); m];
        for (k, row) in f.u_rows.iter_mut().enumerate() {
            for entry in row.iter_mut() {
                u_cols[col_step[entry.0]].push((k, entry.1));
            }
        }
        f.u_cols = u_cols;
        Ok(f)
    }

    pub(crate) fn nnz(&self) -> usize {
        self.m
            + self.l_etas.iter().map(|(_, e)| e.len()).sum::<usize>()
            + self.u_rows.iter().map(Vec::len).sum::<usize>()
    }

    /// Solves `B x = b` in place: `work` holds `b` indexed by row on entry and
    /// `x` indexed by column on exit.
    pub(crate) fn solve(&self, work: &mut [f64], out: &mut [f64]) {
        for (p, entries) in &self.l_etas {
            let bp = work[*p];
            if bp != 0.0 {
                for &(i, l) in entries {
                    work[i] -= l * bp;
                }
            }
        }
        for k in (0..self.m).rev() {
            let p = self.row_perm[k];
            let val = work[p];
            work[p] = 0.0;
            if val == 0.0 {
                out[self.col_perm[k]] = 0.0;
                continue;
            }
            let x = val / self.u_diag[k];
            out[self.col_perm[k]] = x;
            for &(k2, u) in &self.u_cols[k] {
                work[self.row_perm[k2]] -= u * x;
            }
        }
    }

    /// Solves `B^T y = c`: `work` holds `c` indexed by column on entry,
    /// `out` receives `y` indexed by row.
    pub(crate) fn solve_transposed(&self, work: &mut [f64], out: &mut [f64]) {
        for k in 0..self.m {
            let q = self.col_perm[k];
            let val = work[q];
            work[q] = 0.0;
            let p = self.row_perm[k];
            if val == 0.0 {
                out[p] = 0.0;
                continue;
            }
            let z = val / self.u_diag[k];
            out[p] = z;
            for &(c, u) in &self.u_rows[k] {
                work[c] -= u * z;
            }
        }
        for (p, entries) in self.l_etas.iter().rev() {
            let mut acc = 0.0;
            for &(i, l) in entries {
                acc += l * out[i];
            }
            out[*p] -= acc;
        }
    }
}

fn select_pivot(act: &mut Active) -> Option<(usize, usize)> {
    // column singletons: no elimination work at all
    if let Some(&q) = act.col_buckets.lists[1].first() {
        let p = act.live_rows(q).next().expect("singleton column has a live row");
        if act.value(p, q).abs() > PIVOT_TOL {
            return Some((p, q));
        }
    }
    // row singletons: no fill, subject to the threshold test
    for k in 0..act.row_buckets.lists[1].len().min(SEARCH_LIMIT * 4) {
        let p = act.row_buckets.lists[1][k];
        let (q, v) = act.rows[p][0];
        if v.abs() > PIVOT_TOL && v.abs() >= THRESHOLD * act.col_max(q) {
            return Some((p, q));
        }
    }
    markowitz(act)
}

fn markowitz(act: &mut Active) -> Option<(usize, usize)> {
    let m = act.rows.len();
    let mut best: Option<(usize, usize, usize, f64)> = None; // (cost, p, q, |v|)
    let mut examined = 0;
    let better = |cost: usize, mag: f64, p: usize, q: usize, best: &Option<(usize, usize, usize, f64)>| match best {
        None => true,
        Some((bc, bp, bq, bm)) => {
            cost < *bc || (cost == *bc && (mag > *bm || (mag == *bm && (q, p) < (*bq, *bp))))
        }
    };
    for count in 1..=m {
        // columns with `count` entries
        for k in 0..act.col_buckets.lists[count].len() {
            let q = act.col_buckets.lists[count][k];
            let cmax = act.col_max(q);
            if cmax <= PIVOT_TOL {
                continue;
            }
            for p in act.live_rows(q) {
                let v = act.value(p, q).abs();
                if v < THRESHOLD * cmax || v <= PIVOT_TOL {
                    continue;
                }
                let cost = (act.rows[p].len() - 1) * (count - 1);
                if better(cost, v, p, q, &best) {
                    best = Some((cost, p, q, v));
                }
            }
            examined += 1;
            if examined >= SEARCH_LIMIT && best.is_some() {
                return best.map(|(_, p, q, _)| (p, q));
            }
        }
        // rows with `count` entries
        for k in 0..act.row_buckets.lists[count].len() {
            let p = act.row_buckets.lists[count][k];
            for e in 0..act.rows[p].len() {
                let (q, v) = act.rows[p][e];
                let v = v.abs();
                if v <= PIVOT_TOL {
                    continue;
                }
                let cmax = act.col_max(q);
                if v < THRESHOLD * cmax {
                    continue;
                }
                let cost = (count - 1) * (act.col_len[q] - 1);
                if better(cost, v, p, q, &best) {
                    best = Some((cost, p, q, v));
                }
            }
            examined += 1;
            if examined >= SEARCH_LIMIT && best.is_some() {
                return best.map(|(_, p, q, _)| (p, q));
            }
        }
        if let Some((cost, p, q, _)) = best {
            // no later bucket can beat a cost below (count - 1)^2
            if cost <= (count - 1) * (count - 1) {
                return Some((p, q));
            }
        }
    }
    best.map(|(_, p, q, _)| (p, q))
}
