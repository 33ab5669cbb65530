//! Active index sets, the critical cone and its relatives as polyhedral
//! H-cones, triviality tests, and unit-direction sampling inside cones.
//!
//! The underlying sets use exact equalities; here every threshold scales with
//! the norm of the vector being tested, since inputs are doubles.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{self, ExprError};
use crate::linalg;
use crate::lp::{self, LpError, LpOutcome, LpProblem, VarBound};
use crate::problem::{Point, Problem};
use crate::rng::Stream;

/// Numerical thresholds for activity, feasibility, zero inner products, and
/// strict-inequality margins.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Constraint activity threshold.
    pub eps_active: f64,
    /// Feasibility slack.
    pub eps_feas: f64,
    /// Zero-inner-product threshold, scaled by the tested vector's norm.
    pub eps_zero: f64,
    /// Margin for strict inequalities in verdicts.
    pub tau_strict: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_active: 1e-8,
            eps_feas: 1e-8,
            eps_zero: 1e-8,
            tau_strict: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), ConeError> {
        let ok = self.eps_active > 0.0
            && self.eps_feas > 0.0
            && self.eps_zero > 0.0
            && self.tau_strict > 0.0;
        if ok {
            Ok(())
        } else {
            Err(ConeError::BadTolerances)
        }
    }
}

/// Index sets at a candidate point for a given direction: active constraints,
/// objectives with vanishing directional derivative, and active constraints
/// with vanishing directional derivative. Zero-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSets {
    pub i_active: Vec<usize>,
    pub j_zero: Vec<usize>,
    pub i_zero: Vec<usize>,
}

/// Polyhedral cone in H-representation: `{w : <a, w> <= 0 for a in a_le,
/// <e, w> = 0 for e in a_eq}`. Always closed, convex, and containing zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeH {
    pub a_le: Vec<Vec<f64>>,
    pub a_eq: Vec<Vec<f64>>,
    pub n: usize,
}

impl ConeH {
    pub fn new(n: usize) -> Self {
        ConeH { a_le: Vec::new(), a_eq: Vec::new(), n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeError {
    /// The point violates a constraint beyond the feasibility slack.
    Infeasible { index: usize, value: f64 },
    Expr(ExprError),
    Lp(LpError),
    ZeroDirection,
    BadTolerances,
    Dimension { expected: usize, got: usize },
}

impl fmt::Display for ConeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeError::Infeasible { index, value } => {
                write!(f, "point is infeasible: g{}(x) = {value} > 0", index + 1)
            }
            ConeError::Expr(e) => write!(f, "{e}"),
            ConeError::Lp(e) => write!(f, "{e}"),
            ConeError::ZeroDirection => write!(f, "direction must be nonzero"),
            ConeError::BadTolerances => write!(f, "tolerances must all be positive"),
            ConeError::Dimension { expected, got } => {
                write!(f, "dimension {got}, expected {expected}")
            }
        }
    }
}

impl core::error::Error for ConeError {}

impl From<ExprError> for ConeError {
    fn from(e: ExprError) -> Self {
        ConeError::Expr(e)
    }
}

impl From<LpError> for ConeError {
    fn from(e: LpError) -> Self {
        ConeError::Lp(e)
    }
}

/// Indices of constraints active at `x`. Errors when `x` is infeasible beyond
/// the feasibility slack.
pub fn active_constraints(
    problem: &Problem,
    x: &Point,
    tol: &Tolerances,
) -> Result<Vec<usize>, ConeError> {
    tol.validate()?;
    let mut active = Vec::new();
    for (i, g) in problem.constraints().iter().enumerate() {
        let v = expr::eval(g, x)?;
        if v > tol.eps_feas {
            return Err(ConeError::Infeasible { index: i, value: v });
        }
        if v.abs() <= tol.eps_active {
            active.push(i);
        }
    }
    Ok(active)
}

/// Objectives and active constraints whose gradients are orthogonal to `d`
/// (within `eps_zero * ||d||`).
pub fn zero_sets(
    problem: &Problem,
    x: &Point,
    d: &[f64],
    tol: &Tolerances,
) -> Result<ActiveSets, ConeError> {
    tol.validate()?;
    if linalg::norm(d) == 0.0 {
        return Err(ConeError::ZeroDirection);
    }
    let i_active = active_constraints(problem, x, tol)?;
    let band = tol.eps_zero * linalg::norm(d);
    let mut j_zero = Vec::new();
    for (j, f) in problem.objectives().iter().enumerate() {
        let g = expr::grad(f, x)?;
        if linalg::dot(&g, d).abs() <= band {
            j_zero.push(j);
        }
    }
    let mut i_zero = Vec::new();
    for &i in &i_active {
        let g = expr::grad(problem.constraint(i), x)?;
        if linalg::dot(&g, d).abs() <= band {
            i_zero.push(i);
        }
    }
    Ok(ActiveSets { i_active, j_zero, i_zero })
}

/// The critical cone at `x`: directions with non-positive inner product
/// against every objective gradient and every active constraint gradient.
pub fn critical_cone(problem: &Problem, x: &Point, tol: &Tolerances) -> Result<ConeH, ConeError> {
    let active = active_constraints(problem, x, tol)?;
    let mut cone = ConeH::new(problem.n());
    for f in problem.objectives() {
        cone.a_le.push(expr::grad(f, x)?);
    }
    for &i in &active {
        cone.a_le.push(expr::grad(problem.constraint(i), x)?);
    }
    Ok(cone)
}

/// The cone `{w : <grad g_i(x), w> <= 0, i in I(x; d)}` intersected with the
/// hyperplane orthogonal to `d`, optionally with rows `<grad f_j(x), w> <= 0`
/// for `j in J(x; d)`. With the objective rows included, triviality of this
/// cone is the second-order support condition for the direction `d`.
pub fn cone_cxd_perp(
    problem: &Problem,
    x: &Point,
    d: &[f64],
    with_objectives: bool,
    tol: &Tolerances,
) -> Result<ConeH, ConeError> {
    let sets = zero_sets(problem, x, d, tol)?;
    let mut cone = ConeH::new(problem.n());
    for &i in &sets.i_zero {
        cone.a_le.push(expr::grad(problem.constraint(i), x)?);
    }
    if with_objectives {
        for &j in &sets.j_zero {
            cone.a_le.push(expr::grad(problem.objective(j), x)?);
        }
    }
    cone.a_eq.push(d.to_vec());
    Ok(cone)
}

/// Membership test with thresholds scaled by `||w||`.
pub fn contains(cone: &ConeH, w: &[f64], tol: &Tolerances) -> bool {
    if w.len() != cone.n {
        return false;
    }
    let band = tol.eps_zero * linalg::norm(w);
    cone.a_le.iter().all(|a| linalg::dot(a, w) <= band)
        && cone.a_eq.iter().all(|e| linalg::dot(e, w).abs() <= band)
}

/// Whether the cone is `{0}`, decided by `2n` bounded LPs: for each coordinate
/// and sign, maximize that signed coordinate subject to the cone rows and a
/// unit cap. Trivial iff every optimum stays below `tau_strict`.
pub fn is_trivial(cone: &ConeH, tol: &Tolerances) -> Result<bool, ConeError> {
    tol.validate()?;
    let n = cone.n;
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut obj = vec![0.0; n];
            obj[k] = sign;
            let mut lp = LpProblem::new(obj.clone());
            lp.bounds = vec![VarBound::free(); n];
            for a in &cone.a_le {
                lp.push_le(a.clone(), 0.0);
            }
            for e in &cone.a_eq {
                lp.push_eq(e.clone(), 0.0);
            }
            lp.push_le(obj, 1.0);
            match lp::solve(&lp)? {
                LpOutcome::Optimal { value, .. } => {
                    if value > tol.tau_strict {
                        return Ok(false);
                    }
                }
                // The objective is capped at 1, so the solver cannot report
                // unbounded; infeasible cannot happen since 0 is a member.
                LpOutcome::Unbounded | LpOutcome::Infeasible => {
                    return Err(ConeError::Lp(LpError::NonFinite));
                }
            }
        }
    }
    Ok(true)
}

/// Unit directions sampled inside a cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub directions: Vec<Vec<f64>>,
    /// Extreme rays found by enumeration (always included in `directions`).
    pub ray_count: usize,
    /// Set when acceptance stalled and fewer than the requested count could
    /// be produced.
    pub stalled: bool,
}

const REJECTION_ATTEMPTS: usize = 128;

/// Extreme-ray candidates for `n <= 3`, from null spaces of row subsets of
/// size `n - 1` (equality rows always included).
fn extreme_rays(cone: &ConeH, tol: &Tolerances) -> Vec<Vec<f64>> {
    let n = cone.n;
    if n > 3 || cone.a_eq.len() > n.saturating_sub(1) {
        return Vec::new();
    }
    let pick = n - 1 - cone.a_eq.len();
    let m = cone.a_le.len();
    if pick > m {
        // Not enough rows to pin a one-dimensional face.
        return Vec::new();
    }

    let mut rays: Vec<Vec<f64>> = Vec::new();
    let push_candidates = |rows: &[Vec<f64>], rays: &mut Vec<Vec<f64>>| {
        let basis = linalg::null_space_basis(rows, n, 1e-10);
        if basis.len() != 1 {
            return;
        }
        for sign in [1.0, -1.0] {
            let cand = linalg::scale(&basis[0], sign);
            if contains(cone, &cand, tol)
                && !rays.iter().any(|r| {
                    r.iter().zip(&cand).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= 1e-9
                })
            {
                rays.push(cand);
            }
        }
    };

    let mut subset: Vec<usize> = (0..pick).collect();
    loop {
        let mut rows: Vec<Vec<f64>> = cone.a_eq.clone();
        for &k in &subset {
            rows.push(cone.a_le[k].clone());
        }
        push_candidates(&rows, &mut rays);
        // Next combination.
        let mut i = pick;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if subset[i] < m - (pick - i) {
                subset[i] += 1;
                for j in i + 1..pick {
                    subset[j] = subset[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    rays
}

/// Samples `count` unit vectors inside the cone: all extreme rays first (for
/// `n <= 3`), then seeded rejection samples in the equality null space, then
/// conic combinations of known rays when acceptance is poor. Degenerate cones
/// (a single ray) legitimately produce repeated directions.
pub fn sample_unit(cone: &ConeH, count: usize, seed: u64, tol: &Tolerances) -> SampleSet {
    let n = cone.n;
    let mut directions = extreme_rays(cone, tol);
    directions.truncate(count);
    let ray_count = directions.len();

    // Basis of the equality null space; sampling happens inside it so that
    // equality rows hold to rounding rather than by rejection luck.
    let basis = if cone.a_eq.is_empty() {
        let mut id = Vec::with_capacity(n);
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            id.push(e);
        }
        id
    } else {
        linalg::null_space_basis(&cone.a_eq, n, 1e-10)
    };

    let mut stalled = false;
    let mut index = ray_count as u64;
    while directions.len() < count {
        let mut stream = Stream::derived(seed, index);
        index += 1;
        let mut accepted = false;
        if !basis.is_empty() {
            for _ in 0..REJECTION_ATTEMPTS {
                let mut w = vec![0.0; n];
                for b in &basis {
                    let c = stream.normal();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi += c * bi;
                    }
                }
                let norm = linalg::norm(&w);
                if norm <= 1e-12 {
                    continue;
                }
                let w = linalg::scale(&w, 1.0 / norm);
                if contains(cone, &w, tol) {
                    directions.push(w);
                    accepted = true;
                    break;
                }
            }
        }
        if !accepted {
            // Conic combination of known rays.
            if ray_count > 0 {
                let mut w = vec![0.0; n];
                for ray in directions.iter().take(ray_count) {
                    let c = stream.normal().abs();
                    for (wi, ri) in w.iter_mut().zip(ray) {
                        *wi += c * ri;
                    }
                }
                let norm = linalg::norm(&w);
                if norm > 1e-12 {
                    let w = linalg::scale(&w, 1.0 / norm);
                    if contains(cone, &w, tol) {
                        directions.push(w);
                        continue;
                    }
                }
            }
            stalled = true;
            break;
        }
    }
    SampleSet { directions, ray_count, stalled }
}
