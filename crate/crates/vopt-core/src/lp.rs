//! Small dense linear programming: a two-phase simplex with Bland's
//! anti-cycling rule, and a brute-force vertex-enumeration oracle used to
//! cross-check it in tests.
//!
//! Problem sizes here are tiny (multiplier searches have at most `p + m`
//! variables and `n + 1` rows), so a dense tableau is all that is needed.
//! Strict-inequality verdicts downstream apply their own margins, so rounding
//! cannot silently flip a certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;

const PIVOT_TOL: f64 = 1e-9;

/// Lower bound of a variable: nonnegative or free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lower {
    Zero,
    NegInf,
}

/// Per-variable bounds. `upper` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy)]
pub struct VarBound {
    pub lower: Lower,
    pub upper: f64,
}

impl VarBound {
    pub fn nonneg() -> Self {
        VarBound { lower: Lower::Zero, upper: f64::INFINITY }
    }

    pub fn free() -> Self {
        VarBound { lower: Lower::NegInf, upper: f64::INFINITY }
    }
}

/// Maximization problem `max c·x` subject to `A_le x <= b_le`, `A_eq x = b_eq`,
/// and per-variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub a_le: Vec<Vec<f64>>,
    pub b_le: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub bounds: Vec<VarBound>,
}

impl LpProblem {
    /// All-nonnegative problem with no rows yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let bounds = vec![VarBound::nonneg(); objective.len()];
        LpProblem {
            objective,
            a_le: Vec::new(),
            b_le: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            bounds,
        }
    }

    pub fn push_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_le.push(row);
        self.b_le.push(rhs);
    }

    pub fn push_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::Dimension(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for row in self.a_le.iter().chain(&self.a_eq) {
            if row.len() != n {
                return Err(LpError::Dimension(format!("row width {} != {n}", row.len())));
            }
        }
        if self.a_le.len() != self.b_le.len() || self.a_eq.len() != self.b_eq.len() {
            return Err(LpError::Dimension("rhs length mismatch".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.b_le.iter())
            .chain(self.b_eq.iter())
            .chain(self.a_le.iter().flatten())
            .chain(self.a_eq.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// Numerical degeneracy: the iteration cap was exhausted.
    Stalled { iterations: usize },
    Dimension(String),
    NonFinite,
    /// Vertex-enumeration size cap exceeded.
    SizeCap { vars: usize, rows: usize },
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Stalled { iterations } => {
                write!(f, "simplex stalled after {iterations} iterations")
            }
            LpError::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            LpError::NonFinite => write!(f, "non-finite entry in LP data"),
            LpError::SizeCap { vars, rows } => {
                write!(f, "vertex enumeration cap exceeded ({vars} vars, {rows} rows)")
            }
        }
    }
}

impl core::error::Error for LpError {}

/// Standard-form expansion: all variables nonnegative, rows as equalities with
/// nonnegative rhs, slack and artificial columns appended.
struct Standard {
    /// For each original variable, its column and (for free variables) the
    /// column of its negative part.
    var_cols: Vec<(usize, Option<usize>)>,
    ncols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    first_artificial: usize,
    basis: Vec<usize>,
    b_scale: f64,
}

fn standardize(lp: &LpProblem) -> Standard {
    let n = lp.objective.len();
    let mut var_cols = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in &lp.bounds {
        let pos = ncols;
        ncols += 1;
        let neg = if b.lower == Lower::NegInf {
            ncols += 1;
            Some(pos + 1)
        } else {
            None
        };
        var_cols.push((pos, neg));
    }

    // Rows: explicit <=, finite upper bounds as extra <=, then equalities.
    let mut le_rows: Vec<(Vec<f64>, f64)> = lp
        .a_le
        .iter()
        .zip(&lp.b_le)
        .map(|(r, &b)| (r.clone(), b))
        .collect();
    for (j, b) in lp.bounds.iter().enumerate() {
        if b.upper.is_finite() {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            le_rows.push((row, b.upper));
        }
    }
    let eq_rows: Vec<(Vec<f64>, f64)> = lp
        .a_eq
        .iter()
        .zip(&lp.b_eq)
        .map(|(r, &b)| (r.clone(), b))
        .collect();

    let expand = |row: &[f64], width: usize| -> Vec<f64> {
        let mut out = vec![0.0; width];
        for (j, &(pos, neg)) in var_cols.iter().enumerate() {
            out[pos] = row[j];
            if let Some(nc) = neg {
                out[nc] = -row[j];
            }
        }
        out
    };

    let first_slack = ncols;
    let first_artificial = first_slack + le_rows.len();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut basis = Vec::new();
    let mut n_art = 0;

    for (i, (row, b)) in le_rows.iter().enumerate() {
        let mut r = expand(row, first_artificial);
        let mut b = *b;
        let mut slack_coef = 1.0;
        if b < 0.0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
            b = -b;
            slack_coef = -1.0;
        }
        r[first_slack + i] = slack_coef;
        rows.push(r);
        rhs.push(b);
        if slack_coef > 0.0 {
            basis.push(first_slack + i);
        } else {
            basis.push(usize::MAX); // artificial, patched below
            n_art += 1;
        }
    }
    for (row, b) in &eq_rows {
        let mut r = expand(row, first_artificial);
        let mut b = *b;
        if b < 0.0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
            b = -b;
        }
        rows.push(r);
        rhs.push(b);
        basis.push(usize::MAX);
        n_art += 1;
    }

    let ncols_total = first_artificial + n_art;
    let mut next_art = first_artificial;
    for (i, row) in rows.iter_mut().enumerate() {
        row.resize(ncols_total, 0.0);
        if basis[i] == usize::MAX {
            row[next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        }
    }

    let b_scale = 1.0 + linalg::norm_inf(&rhs);
    Standard {
        var_cols,
        ncols: ncols_total,
        rows,
        rhs,
        first_artificial,
        basis,
        b_scale,
    }
}

/// One simplex run maximizing `obj`; columns `>= banned` never enter.
/// `Ok(true)` on optimal, `Ok(false)` on unbounded objective.
fn run_simplex(
    rows: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    obj: &[f64],
    banned: usize,
    cap: usize,
) -> Result<bool, LpError> {
    let m = rows.len();
    let ncols = obj.len();
    // Cost row in z - c form, canonicalized over the current basis.
    let mut cost: Vec<f64> = obj.iter().map(|c| -c).collect();
    for i in 0..m {
        let cb = obj[basis[i]];
        if cb != 0.0 {
            for j in 0..ncols {
                cost[j] += cb * rows[i][j];
            }
        }
    }

    for _ in 0..cap {
        // Bland: entering column is the smallest eligible index.
        let Some(e) = (0..banned).find(|&j| cost[j] < -PIVOT_TOL) else {
            return Ok(true);
        };
        // Ratio test; ties go to the smallest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = rows[i][e];
            if a > PIVOT_TOL {
                let ratio = rhs[i] / a;
                let better = match leave {
                    None => true,
                    Some((bi, br)) => {
                        ratio < br - PIVOT_TOL
                            || (ratio <= br + PIVOT_TOL && basis[i] < basis[bi])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((li, _)) = leave else {
            return Ok(false);
        };

        let p = rows[li][e];
        for v in rows[li].iter_mut() {
            *v /= p;
        }
        rhs[li] /= p;
        for i in 0..m {
            if i != li {
                let f = rows[i][e];
                if f != 0.0 {
                    for j in 0..ncols {
                        let sub = f * rows[li][j];
                        rows[i][j] -= sub;
                    }
                    rhs[i] -= f * rhs[li];
                    if rhs[i] < 0.0 && rhs[i] > -1e-12 {
                        rhs[i] = 0.0;
                    }
                }
            }
        }
        let f = cost[e];
        if f != 0.0 {
            for j in 0..ncols {
                let sub = f * rows[li][j];
                cost[j] -= sub;
            }
        }
        basis[li] = e;
    }
    Err(LpError::Stalled { iterations: cap })
}

/// Two-phase simplex. `Optimal.value` is the recomputed `c·x` of the returned
/// point.
pub fn solve(lp: &LpProblem) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let mut sf = standardize(lp);
    let m = sf.rows.len();
    let ncols = sf.ncols;
    let cap = 10_000 * (ncols + m);

    if sf.first_artificial < ncols {
        // Phase 1: maximize minus the artificial sum.
        let mut obj1 = vec![0.0; ncols];
        for c in obj1.iter_mut().skip(sf.first_artificial) {
            *c = -1.0;
        }
        let optimal = run_simplex(&mut sf.rows, &mut sf.rhs, &mut sf.basis, &obj1, ncols, cap)?;
        debug_assert!(optimal, "phase-1 objective is bounded by construction");
        let art_sum: f64 = (0..m)
            .filter(|&i| sf.basis[i] >= sf.first_artificial)
            .map(|i| sf.rhs[i])
            .sum();
        if art_sum > 1e-8 * sf.b_scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot lingering artificials out where possible; redundant rows keep
        // them basic at zero, harmless once the columns are banned.
        for i in 0..m {
            if sf.basis[i] >= sf.first_artificial {
                let Some(j) =
                    (0..sf.first_artificial).find(|&j| sf.rows[i][j].abs() > PIVOT_TOL)
                else {
                    continue;
                };
                let p = sf.rows[i][j];
                for v in sf.rows[i].iter_mut() {
                    *v /= p;
                }
                sf.rhs[i] /= p;
                for k in 0..m {
                    if k != i {
                        let f = sf.rows[k][j];
                        if f != 0.0 {
                            for col in 0..ncols {
                                let sub = f * sf.rows[i][col];
                                sf.rows[k][col] -= sub;
                            }
                            sf.rhs[k] -= f * sf.rhs[i];
                        }
                    }
                }
                sf.basis[i] = j;
            }
        }
    }

    // Phase 2: the actual objective over structural columns.
    let mut obj2 = vec![0.0; ncols];
    for (j, &(pos, neg)) in sf.var_cols.iter().enumerate() {
        obj2[pos] = lp.objective[j];
        if let Some(nc) = neg {
            obj2[nc] = -lp.objective[j];
        }
    }
    let optimal = run_simplex(
        &mut sf.rows,
        &mut sf.rhs,
        &mut sf.basis,
        &obj2,
        sf.first_artificial,
        cap,
    )?;
    if !optimal {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x_std = vec![0.0; ncols];
    for i in 0..m {
        x_std[sf.basis[i]] = sf.rhs[i];
    }
    let x: Vec<f64> = sf
        .var_cols
        .iter()
        .map(|&(pos, neg)| x_std[pos] - neg.map_or(0.0, |nc| x_std[nc]))
        .collect();
    let value = linalg::dot(&lp.objective, &x);
    Ok(LpOutcome::Optimal { x, value })
}

/// Lexicographically next size-`k` combination out of `0..n`. Returns `false`
/// when exhausted.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Brute-force oracle: enumerates candidate points as intersections of active
/// constraint subsets and returns the best feasible one. Test use only.
/// Unboundedness is detected via an artificial box at `1e7`.
pub fn enumerate_vertices(lp: &LpProblem) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let nv = lp.objective.len();
    let nr = lp.a_le.len() + lp.a_eq.len();
    if nv > 6 || nr > 10 {
        return Err(LpError::SizeCap { vars: nv, rows: nr });
    }
    const BIG: f64 = 1e7;

    let mut pool: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
    for (r, &b) in lp.a_le.iter().zip(&lp.b_le) {
        pool.push((r.clone(), b));
    }
    for (r, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        eqs.push((r.clone(), b));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let mut lo_row = vec![0.0; nv];
        lo_row[j] = -1.0;
        let lo_rhs = match b.lower {
            Lower::Zero => 0.0,
            Lower::NegInf => BIG,
        };
        pool.push((lo_row, lo_rhs));
        let mut up_row = vec![0.0; nv];
        up_row[j] = 1.0;
        pool.push((up_row, if b.upper.is_finite() { b.upper } else { BIG }));
    }

    if eqs.len() > nv {
        return Err(LpError::Dimension("more equalities than variables".into()));
    }
    let need = nv - eqs.len();
    let pool_n = pool.len();
    let mut best: Option<(Vec<f64>, f64)> = None;

    let mut subset: Vec<usize> = (0..need).collect();
    loop {
        let mut mat: Vec<Vec<f64>> = eqs.iter().map(|(r, _)| r.clone()).collect();
        let mut rhs: Vec<f64> = eqs.iter().map(|(_, b)| *b).collect();
        for &k in &subset {
            mat.push(pool[k].0.clone());
            rhs.push(pool[k].1);
        }
        if let Some(x) = linalg::solve_square(&mat, &rhs, 1e-10) {
            let feas_tol = 1e-7;
            let ok_le = pool
                .iter()
                .all(|(r, b)| linalg::dot(r, &x) <= b + feas_tol * (1.0 + b.abs()));
            let ok_eq = eqs
                .iter()
                .all(|(r, b)| (linalg::dot(r, &x) - b).abs() <= feas_tol * (1.0 + b.abs()));
            if ok_le && ok_eq {
                let v = linalg::dot(&lp.objective, &x);
                if best.as_ref().map_or(true, |(_, bv)| v > *bv) {
                    best = Some((x, v));
                }
            }
        }
        if !next_combination(&mut subset, pool_n) {
            break;
        }
    }

    match best {
        Some((x, _)) if x.iter().any(|v| v.abs() >= BIG - 1.0) => Ok(LpOutcome::Unbounded),
        Some((x, value)) => Ok(LpOutcome::Optimal { x, value }),
        None => Ok(LpOutcome::Infeasible),
    }
}
