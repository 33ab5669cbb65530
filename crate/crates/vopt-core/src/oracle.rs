//! Brute-force, sampling-based ground truth for the efficiency definitions,
//! plus the random-instance harness that cross-validates certificates against
//! these oracles.
//!
//! The order-2 check uses the ratio `q(y) = max_j (f_j(y) - f_j(x)) / ||y-x||^2`
//! over feasible points on shrinking shells: the point is strictly locally
//! efficient of order 2 exactly when that ratio stays bounded away from zero
//! near `x`. Shell samples are augmented with critical-cone rays, since the
//! violating directions of degenerate problems live on measure-zero strata
//! that uniform sphere sampling misses.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::certify::{self, Certificate, CertifyConfig, CertifyError, TheoremId, Verdict};
use crate::cones::{self, ConeError, Tolerances};
use crate::expr::{self, Expr, ExprError};
use crate::linalg;
use crate::lp::LpError;
use crate::problem::{Point, Problem};
use crate::rng::{self, Stream};

/// Sampling settings for the efficiency oracles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Total sample budget (split across shells for the order-2 kind).
    pub n_samples: usize,
    /// Number of shrinking shells for the order-2 check.
    pub shells: usize,
    /// Outer shell radius.
    pub r0: f64,
    /// Order-2 modulus threshold: `Supported` needs `q >= alpha_min` on every
    /// shell, `Falsified` needs `q < alpha_min / 100` on the two smallest.
    pub alpha_min: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_samples: 10_000,
            shells: 12,
            r0: 0.5,
            alpha_min: 1e-3,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(OracleError::BadConfig("r0 must be positive"));
        }
        if self.shells < 4 {
            return Err(OracleError::BadConfig("shells must be at least 4"));
        }
        if !(self.alpha_min > 0.0) {
            return Err(OracleError::BadConfig("alpha_min must be positive"));
        }
        if self.n_samples == 0 {
            return Err(OracleError::BadConfig("n_samples must be positive"));
        }
        Ok(())
    }
}

/// Which efficiency notion to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EfficiencyKind {
    /// No feasible point strictly dominates in every component.
    GlobalWeak,
    /// No feasible point dominates componentwise with one strict component.
    GlobalEfficient,
    /// No other feasible point is componentwise no worse.
    StrictGlobal,
    /// The dominance gap grows at least quadratically near the point.
    StrictLocalOrder2,
}

impl EfficiencyKind {
    pub fn cli_name(&self) -> &'static str {
        match self {
            EfficiencyKind::GlobalWeak => "weak",
            EfficiencyKind::GlobalEfficient => "efficient",
            EfficiencyKind::StrictGlobal => "strict-global",
            EfficiencyKind::StrictLocalOrder2 => "strict-local-2",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Self> {
        [
            EfficiencyKind::GlobalWeak,
            EfficiencyKind::GlobalEfficient,
            EfficiencyKind::StrictGlobal,
            EfficiencyKind::StrictLocalOrder2,
        ]
        .into_iter()
        .find(|k| k.cli_name() == name)
    }
}

/// Summary statistics behind a `Supported` verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportStats {
    pub samples: usize,
    pub feasible: usize,
    /// For global kinds: the closest any feasible sample came to dominating
    /// (most negative is closest). For the order-2 kind: the smallest ratio q.
    pub margin: f64,
    /// Per-shell minimum of q, order-2 kind only.
    pub per_shell_min_q: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleVerdict {
    Supported { stats: SupportStats },
    Falsified { witness: Point, values: Vec<f64> },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    Expr(ExprError),
    Cone(ConeError),
    Lp(LpError),
    Certify(CertifyError),
    BadConfig(&'static str),
    /// No feasible samples at all: nothing to estimate.
    NoFeasibleSamples,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Expr(e) => write!(f, "{e}"),
            OracleError::Cone(e) => write!(f, "{e}"),
            OracleError::Lp(e) => write!(f, "{e}"),
            OracleError::Certify(e) => write!(f, "{e}"),
            OracleError::BadConfig(msg) => write!(f, "bad oracle config: {msg}"),
            OracleError::NoFeasibleSamples => write!(f, "no feasible samples found"),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<ExprError> for OracleError {
    fn from(e: ExprError) -> Self {
        OracleError::Expr(e)
    }
}

impl From<ConeError> for OracleError {
    fn from(e: ConeError) -> Self {
        OracleError::Cone(e)
    }
}

impl From<CertifyError> for OracleError {
    fn from(e: CertifyError) -> Self {
        OracleError::Certify(e)
    }
}

fn is_feasible(problem: &Problem, y: &Point, tol: &Tolerances) -> Result<bool, ExprError> {
    for g in problem.constraints() {
        match expr::eval(g, y) {
            Ok(v) => {
                if v > tol.eps_feas {
                    return Ok(false);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Componentwise margins used by the global falsification clauses, relative to
/// the values at the candidate point.
fn dominance_taus(f_base: &[f64]) -> Vec<f64> {
    f_base.iter().map(|v| 1e-9 * (1.0 + v.abs())).collect()
}

/// Whether `values` at a point distinct from the base falsify `kind` against
/// `f_base`. Shared between the sampler, witness rechecks, and tests.
pub fn values_falsify(
    kind: EfficiencyKind,
    f_base: &[f64],
    values: &[f64],
    distinct: bool,
) -> bool {
    let taus = dominance_taus(f_base);
    match kind {
        EfficiencyKind::GlobalWeak => values
            .iter()
            .zip(f_base)
            .zip(&taus)
            .all(|((v, b), tau)| v < &(b - tau)),
        EfficiencyKind::GlobalEfficient => {
            let all_le = values
                .iter()
                .zip(f_base)
                .zip(&taus)
                .all(|((v, b), tau)| v <= &(b + tau));
            let one_lt = values
                .iter()
                .zip(f_base)
                .zip(&taus)
                .any(|((v, b), tau)| v <= &(b - tau));
            all_le && one_lt
        }
        EfficiencyKind::StrictGlobal => {
            distinct
                && values
                    .iter()
                    .zip(f_base)
                    .zip(&taus)
                    .all(|((v, b), tau)| v <= &(b + tau))
        }
        EfficiencyKind::StrictLocalOrder2 => false,
    }
}

/// Re-checks a reported witness against the definition clause with fresh
/// evaluations: feasibility within the slack plus the dominance comparison
/// (or, for the order-2 kind, the ratio threshold).
pub fn recheck_witness(
    problem: &Problem,
    x: &Point,
    kind: EfficiencyKind,
    witness: &Point,
    cfg: &OracleConfig,
    tol: &Tolerances,
) -> Result<bool, OracleError> {
    if !is_feasible(problem, witness, tol)? {
        return Ok(false);
    }
    let f_base = expr::eval_all(problem.objectives(), x)?;
    let values = expr::eval_all(problem.objectives(), witness)?;
    let diff: Vec<f64> = witness
        .coords()
        .iter()
        .zip(x.coords())
        .map(|(a, b)| a - b)
        .collect();
    let dist = linalg::norm(&diff);
    if kind == EfficiencyKind::StrictLocalOrder2 {
        if dist <= tol.eps_zero {
            return Ok(false);
        }
        let q = values
            .iter()
            .zip(&f_base)
            .map(|(v, b)| (v - b) / (dist * dist))
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(q < cfg.alpha_min / 100.0);
    }
    Ok(values_falsify(kind, &f_base, &values, dist > tol.eps_zero))
}

/// Brute-force efficiency check at `x`.
pub fn check_efficiency(
    problem: &Problem,
    x: &Point,
    kind: EfficiencyKind,
    cfg: &OracleConfig,
    tol: &Tolerances,
) -> Result<OracleVerdict, OracleError> {
    cfg.validate()?;
    // Feasibility of the candidate itself.
    cones::active_constraints(problem, x, tol)?;
    if kind == EfficiencyKind::StrictLocalOrder2 {
        return order2_check(problem, x, cfg, tol);
    }

    let f_base = expr::eval_all(problem.objectives(), x)?;
    let mut feasible = 0usize;
    let mut min_margin = f64::INFINITY;

    // Structured candidates first: points along critical-cone directions at
    // geometric radii. Dominating points of degenerate problems often sit on
    // active-constraint boundaries that uniform box sampling cannot hit.
    let mut candidates: Vec<Point> = Vec::new();
    let cone = cones::critical_cone(problem, x, tol)?;
    if !cones::is_trivial(&cone, tol)? {
        let set = cones::sample_unit(&cone, 16, rng::derive_seed(cfg.seed, 0x434f_4e45), tol);
        let radius0 = problem
            .search_box()
            .iter()
            .zip(x.coords())
            .map(|(&(lo, hi), &c)| (hi - c).max(c - lo))
            .fold(0.0f64, f64::max);
        for d in &set.directions {
            let mut r = radius0;
            for _ in 0..=12 {
                candidates.push(x.offset(d, r));
                r *= 0.5;
            }
        }
    }
    for index in 0..cfg.n_samples {
        let mut stream = Stream::derived(cfg.seed, index as u64);
        let y: Vec<f64> = problem
            .search_box()
            .iter()
            .map(|&(lo, hi)| stream.uniform_in(lo, hi))
            .collect();
        candidates.push(Point::new_unchecked(y));
    }

    for y in candidates {
        match is_feasible(problem, &y, tol) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(_) => continue,
        }
        let values = match expr::eval_all(problem.objectives(), &y) {
            Ok(v) => v,
            Err(_) => continue,
        };
        feasible += 1;
        let diff: Vec<f64> = y
            .coords()
            .iter()
            .zip(x.coords())
            .map(|(a, b)| a - b)
            .collect();
        let distinct = linalg::norm(&diff) > tol.eps_zero;
        if values_falsify(kind, &f_base, &values, distinct) {
            return Ok(OracleVerdict::Falsified { witness: y, values });
        }
        let margin = values
            .iter()
            .zip(&f_base)
            .map(|(v, b)| v - b)
            .fold(f64::NEG_INFINITY, f64::max);
        min_margin = min_margin.min(margin);
    }
    if feasible == 0 {
        return Ok(OracleVerdict::Inconclusive {
            reason: "no feasible samples in the search box".to_string(),
        });
    }
    Ok(OracleVerdict::Supported {
        stats: SupportStats {
            samples: cfg.n_samples,
            feasible,
            margin: min_margin,
            per_shell_min_q: None,
        },
    })
}

/// Shell points probing the order-2 dominance gap: uniform sphere samples
/// plus critical-cone rays and samples, all scaled to the shell radius.
fn shell_directions(
    problem: &Problem,
    x: &Point,
    cfg: &OracleConfig,
    tol: &Tolerances,
    shell: usize,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let n = problem.n();
    let per_shell = (cfg.n_samples / cfg.shells).max(8);
    let mut dirs = Vec::with_capacity(per_shell + 20);
    let mut stream = Stream::derived(cfg.seed, 0x5348_454c ^ shell as u64);
    for _ in 0..per_shell {
        dirs.push(stream.unit_vector(n));
    }
    // Critical-cone augmentation: violating rays of degenerate problems are
    // measure-zero for the sphere sampler.
    let cone = cones::critical_cone(problem, x, tol)?;
    if !cones::is_trivial(&cone, tol)? {
        let set = cones::sample_unit(&cone, 16, rng::derive_seed(cfg.seed, 0x434f_4e45), tol);
        dirs.extend(set.directions);
    }
    Ok(dirs)
}

fn order2_check(
    problem: &Problem,
    x: &Point,
    cfg: &OracleConfig,
    tol: &Tolerances,
) -> Result<OracleVerdict, OracleError> {
    let f_base = expr::eval_all(problem.objectives(), x)?;
    let threshold = cfg.alpha_min / 100.0;
    let mut per_shell_min: Vec<Option<f64>> = vec![None; cfg.shells];
    let mut feasible = 0usize;
    let mut samples = 0usize;
    let mut worst: Option<(f64, Point, Vec<f64>, usize)> = None;

    for shell in 0..cfg.shells {
        let r = cfg.r0 * libm::pow(2.0, -(shell as f64));
        for d in shell_directions(problem, x, cfg, tol, shell)? {
            samples += 1;
            let y = x.offset(&d, r);
            match is_feasible(problem, &y, tol) {
                Ok(true) => {}
                _ => continue,
            }
            let values = match expr::eval_all(problem.objectives(), &y) {
                Ok(v) => v,
                Err(_) => continue,
            };
            feasible += 1;
            let q = values
                .iter()
                .zip(&f_base)
                .map(|(v, b)| (v - b) / (r * r))
                .fold(f64::NEG_INFINITY, f64::max);
            let slot = &mut per_shell_min[shell];
            *slot = Some(slot.map_or(q, |m: f64| m.min(q)));
            if worst.as_ref().map_or(true, |(wq, ..)| q < *wq) {
                worst = Some((q, y, values, shell));
            }
        }
    }

    if feasible == 0 {
        return Ok(OracleVerdict::Inconclusive {
            reason: "no feasible shell samples".to_string(),
        });
    }

    // Falsified: the gap collapses on both of the two smallest populated shells.
    let populated: Vec<(usize, f64)> = per_shell_min
        .iter()
        .enumerate()
        .filter_map(|(s, m)| m.map(|v| (s, v)))
        .collect();
    if populated.len() >= 2 {
        let last = populated[populated.len() - 1];
        let prev = populated[populated.len() - 2];
        if last.1 < threshold && prev.1 < threshold {
            let (_, y, values, _) = worst.expect("feasible sample recorded");
            return Ok(OracleVerdict::Falsified { witness: y, values });
        }
    }

    let min_q = populated.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    if populated.len() == cfg.shells && min_q >= cfg.alpha_min {
        return Ok(OracleVerdict::Supported {
            stats: SupportStats {
                samples,
                feasible,
                margin: min_q,
                per_shell_min_q: Some(populated.iter().map(|&(_, v)| v).collect()),
            },
        });
    }
    Ok(OracleVerdict::Inconclusive {
        reason: format!(
            "order-2 gap between thresholds: min q = {min_q}, populated shells = {}",
            populated.len()
        ),
    })
}

/// Smallest observed order-2 ratio over all feasible shell samples; may be
/// non-positive at points that are not strictly efficient of order 2.
pub fn alpha_estimate(
    problem: &Problem,
    x: &Point,
    cfg: &OracleConfig,
    tol: &Tolerances,
) -> Result<f64, OracleError> {
    cfg.validate()?;
    cones::active_constraints(problem, x, tol)?;
    let f_base = expr::eval_all(problem.objectives(), x)?;
    let mut min_q = f64::INFINITY;
    let mut feasible = 0usize;
    for shell in 0..cfg.shells {
        let r = cfg.r0 * libm::pow(2.0, -(shell as f64));
        for d in shell_directions(problem, x, cfg, tol, shell)? {
            let y = x.offset(&d, r);
            match is_feasible(problem, &y, tol) {
                Ok(true) => {}
                _ => continue,
            }
            let values = match expr::eval_all(problem.objectives(), &y) {
                Ok(v) => v,
                Err(_) => continue,
            };
            feasible += 1;
            let q = values
                .iter()
                .zip(&f_base)
                .map(|(v, b)| (v - b) / (r * r))
                .fold(f64::NEG_INFINITY, f64::max);
            min_q = min_q.min(q);
        }
    }
    if feasible == 0 {
        return Err(OracleError::NoFeasibleSamples);
    }
    Ok(min_q)
}

/// Random instance families for the cross-validation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemClass {
    /// Strictly convex quadratics with linear constraints and a constructed
    /// efficient anchor point.
    ConvexQuadratic,
    /// Sparse random polynomials of degree at most 4 with a feasible anchor.
    Polynomial,
}

fn quadratic_expr(n: usize, q: &[Vec<f64>], c: &[f64]) -> Expr {
    use crate::expr::{BinaryOp, Expr as E, UnaryOp};
    let shifted = |k: usize| {
        E::Binary(
            BinaryOp::Sub,
            alloc::boxed::Box::new(E::Var(k)),
            alloc::boxed::Box::new(E::Const(c[k])),
        )
    };
    let mut acc: Option<E> = None;
    for k in 0..n {
        for l in 0..n {
            if q[k][l] == 0.0 {
                continue;
            }
            let term = E::Binary(
                BinaryOp::Mul,
                alloc::boxed::Box::new(E::Binary(
                    BinaryOp::Mul,
                    alloc::boxed::Box::new(E::Const(q[k][l].abs())),
                    alloc::boxed::Box::new(shifted(k)),
                )),
                alloc::boxed::Box::new(shifted(l)),
            );
            let term = if q[k][l] < 0.0 {
                E::Unary(UnaryOp::Neg, alloc::boxed::Box::new(term))
            } else {
                term
            };
            acc = Some(match acc {
                None => term,
                Some(prev) => {
                    E::Binary(BinaryOp::Add, alloc::boxed::Box::new(prev), alloc::boxed::Box::new(term))
                }
            });
        }
    }
    acc.unwrap_or(E::Const(0.0))
}

fn linear_expr(n: usize, a: &[f64], rhs: f64) -> Expr {
    use crate::expr::{BinaryOp, Expr as E, UnaryOp};
    let mut acc = E::Const(0.0);
    for (k, &ak) in a.iter().enumerate() {
        if ak == 0.0 {
            continue;
        }
        let term = E::Binary(
            BinaryOp::Mul,
            alloc::boxed::Box::new(E::Const(ak.abs())),
            alloc::boxed::Box::new(E::Var(k)),
        );
        let term = if ak < 0.0 {
            E::Unary(UnaryOp::Neg, alloc::boxed::Box::new(term))
        } else {
            term
        };
        acc = E::Binary(BinaryOp::Add, alloc::boxed::Box::new(acc), alloc::boxed::Box::new(term));
    }
    let _ = n;
    E::Binary(BinaryOp::Sub, alloc::boxed::Box::new(acc), alloc::boxed::Box::new(E::Const(rhs)))
}

/// Deterministically generates a problem of the given class together with a
/// distinguished anchor point. Convex quadratic instances anchor at the
/// minimizer of a positive weighted sum, which is an efficient point; half of
/// them carry one active linear constraint whose gradient balances the
/// stationarity equation with unit multiplier.
pub fn random_problem(seed: u64, class: ProblemClass) -> (Problem, Point) {
    let mut s = Stream::new(seed);
    let n = 1 + (s.next_u64() % 3) as usize;
    let p = 1 + (s.next_u64() % 3) as usize;
    let m = (s.next_u64() % 4) as usize;

    match class {
        ProblemClass::ConvexQuadratic => {
            // Q_j = M^T M + 0.1 I, centers in the unit cube.
            let mut qs = Vec::with_capacity(p);
            let mut cs = Vec::with_capacity(p);
            for _ in 0..p {
                let mmat: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| s.uniform_in(-1.0, 1.0)).collect())
                    .collect();
                let mut q = vec![vec![0.0; n]; n];
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = 0.0;
                        for r in 0..n {
                            acc += mmat[r][k] * mmat[r][l];
                        }
                        q[k][l] = acc + if k == l { 0.1 } else { 0.0 };
                    }
                }
                qs.push(q);
                cs.push((0..n).map(|_| s.uniform_in(-1.0, 1.0)).collect::<Vec<f64>>());
            }
            // Positive weights bounded away from zero.
            let raw: Vec<f64> = (0..p).map(|_| s.uniform_in(0.1, 1.0)).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

            let active_variant = m > 0 && s.next_u64() % 2 == 0;
            let anchor: Vec<f64> = if active_variant {
                (0..n).map(|_| s.uniform_in(-0.5, 0.5)).collect()
            } else {
                // Solve sum_j w_j Q_j (x - c_j) = 0.
                let mut a = vec![vec![0.0; n]; n];
                let mut b = vec![0.0; n];
                for j in 0..p {
                    for k in 0..n {
                        for l in 0..n {
                            a[k][l] += weights[j] * qs[j][k][l];
                            b[k] += weights[j] * qs[j][k][l] * cs[j][l];
                        }
                    }
                }
                linalg::solve_square(&a, &b, 1e-12).expect("positive definite system")
            };

            let objectives: Vec<Expr> =
                (0..p).map(|j| quadratic_expr(n, &qs[j], &cs[j])).collect();

            let mut constraints = Vec::with_capacity(m);
            for i in 0..m {
                if i == 0 && active_variant {
                    // Gradient balancing: a = -sum_j w_j grad f_j(anchor).
                    let mut a = vec![0.0; n];
                    for j in 0..p {
                        for k in 0..n {
                            for l in 0..n {
                                a[k] -= weights[j] * 2.0 * qs[j][k][l] * (anchor[l] - cs[j][l]);
                            }
                        }
                    }
                    let rhs = linalg::dot(&a, &anchor);
                    constraints.push(linear_expr(n, &a, rhs));
                } else {
                    let a: Vec<f64> = (0..n).map(|_| s.uniform_in(-1.0, 1.0)).collect();
                    let rhs = linalg::dot(&a, &anchor) + s.uniform_in(0.3, 1.0);
                    constraints.push(linear_expr(n, &a, rhs));
                }
            }

            let mut search_box = Vec::with_capacity(n);
            for k in 0..n {
                let mut lo = anchor[k];
                let mut hi = anchor[k];
                for c in &cs {
                    lo = lo.min(c[k]);
                    hi = hi.max(c[k]);
                }
                search_box.push((lo - 1.0, hi + 1.0));
            }
            let problem = Problem::new(n, objectives, constraints, search_box)
                .expect("generated problem is well-formed");
            (problem, Point::new_unchecked(anchor))
        }
        ProblemClass::Polynomial => {
            let anchor: Vec<f64> = (0..n).map(|_| s.uniform_in(-0.5, 0.5)).collect();
            let mut objectives = Vec::with_capacity(p);
            for _ in 0..p {
                let terms = 2 + (s.next_u64() % 4) as usize;
                let mut acc: Option<Expr> = None;
                for _ in 0..terms {
                    use crate::expr::{BinaryOp, Expr as E};
                    let coef = s.uniform_in(-2.0, 2.0);
                    let mut term = E::Const(coef);
                    let mut degree_left = 4usize;
                    for k in 0..n {
                        let e = ((s.next_u64() % 3) as usize).min(degree_left);
                        degree_left -= e;
                        if e > 0 {
                            let var_pow = E::Binary(
                                BinaryOp::Pow,
                                alloc::boxed::Box::new(E::Var(k)),
                                alloc::boxed::Box::new(E::Const(e as f64)),
                            );
                            term = E::Binary(
                                BinaryOp::Mul,
                                alloc::boxed::Box::new(term),
                                alloc::boxed::Box::new(var_pow),
                            );
                        }
                    }
                    acc = Some(match acc {
                        None => term,
                        Some(prev) => E::Binary(
                            BinaryOp::Add,
                            alloc::boxed::Box::new(prev),
                            alloc::boxed::Box::new(term),
                        ),
                    });
                }
                objectives.push(acc.unwrap());
            }
            let mut constraints = Vec::with_capacity(m);
            for _ in 0..m {
                let a: Vec<f64> = (0..n).map(|_| s.uniform_in(-1.0, 1.0)).collect();
                let rhs = linalg::dot(&a, &anchor) + s.uniform_in(0.3, 1.0);
                constraints.push(linear_expr(n, &a, rhs));
            }
            let search_box = (0..n)
                .map(|k| (anchor[k] - 1.5, anchor[k] + 1.5))
                .collect();
            let problem = Problem::new(n, objectives, constraints, search_box)
                .expect("generated problem is well-formed");
            (problem, Point::new_unchecked(anchor))
        }
    }
}

/// Which oracle validates which theorem's conclusion.
pub fn matching_oracle(theorem: TheoremId) -> EfficiencyKind {
    match theorem {
        TheoremId::LocalOrder2 => EfficiencyKind::StrictLocalOrder2,
        TheoremId::GlobalWeakKkt => EfficiencyKind::GlobalWeak,
        TheoremId::GlobalStrictKkt
        | TheoremId::GlobalStrictFj
        | TheoremId::GlobalStrictQuasiconvex => EfficiencyKind::StrictGlobal,
    }
}

/// A `(certified, oracle-falsified)` pair: a soundness violation.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub instance: String,
    pub theorem: TheoremId,
    pub witness: Point,
    pub values: Vec<f64>,
    /// Set for the demonstration instance that runs with knowingly weakened
    /// hypotheses.
    pub intentional: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremTally {
    pub theorem: TheoremId,
    pub certified: usize,
    pub not_certified: usize,
    pub inconclusive: usize,
    pub oracle_supported: usize,
    pub oracle_inconclusive: usize,
}

/// Cross-validation outcome over a batch of generated instances.
#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub instances: usize,
    pub tallies: Vec<TheoremTally>,
    pub violations: Vec<Violation>,
    pub intentional_violations: usize,
}

/// Harness settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub class: ProblemClass,
    pub certify: CertifyConfig,
    pub oracle: OracleConfig,
    /// Append the demonstration instance that certifies under substituted
    /// quasiinvexity hypotheses and is then falsified by the oracle.
    pub include_gap_demo: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        let mut certify = CertifyConfig::default();
        certify.directions = 64;
        certify.falsify_samples = 400;
        let mut oracle = OracleConfig::default();
        oracle.n_samples = 2000;
        oracle.shells = 10;
        HarnessConfig {
            class: ProblemClass::ConvexQuadratic,
            certify,
            oracle,
            include_gap_demo: false,
        }
    }
}

fn harness_instance(
    report: &mut HarnessReport,
    instance: &str,
    problem: &Problem,
    anchor: &Point,
    cfg: &HarnessConfig,
    intentional: bool,
    only_theorem: Option<TheoremId>,
    certify_cfg: &CertifyConfig,
) -> Result<(), OracleError> {
    for (t_idx, theorem) in TheoremId::ALL.iter().copied().enumerate() {
        if only_theorem.is_some_and(|t| t != theorem) {
            continue;
        }
        let cert: Certificate = certify::certify(problem, anchor, theorem, certify_cfg)?;
        let tally = &mut report.tallies[t_idx];
        match &cert.verdict {
            Verdict::CertifiedOnSamples => {
                tally.certified += 1;
                let kind = matching_oracle(theorem);
                let verdict =
                    check_efficiency(problem, anchor, kind, &cfg.oracle, &certify_cfg.tol)?;
                match verdict {
                    OracleVerdict::Falsified { witness, values } => {
                        if intentional {
                            report.intentional_violations += 1;
                        }
                        report.violations.push(Violation {
                            instance: instance.to_string(),
                            theorem,
                            witness,
                            values,
                            intentional,
                        });
                    }
                    OracleVerdict::Supported { .. } => tally.oracle_supported += 1,
                    OracleVerdict::Inconclusive { .. } => tally.oracle_inconclusive += 1,
                }
            }
            Verdict::NotCertified { .. } => tally.not_certified += 1,
            Verdict::Inconclusive { .. } => tally.inconclusive += 1,
        }
    }
    Ok(())
}

/// Generates `n_instances` seeded problems, runs every theorem checker, and
/// validates each positive certificate against the matching efficiency oracle.
/// Any `(certified, falsified)` pair lands in `violations` verbatim.
pub fn cross_validate(
    n_instances: usize,
    seed: u64,
    cfg: &HarnessConfig,
) -> Result<HarnessReport, OracleError> {
    let mut report = HarnessReport {
        instances: 0,
        tallies: TheoremId::ALL
            .iter()
            .map(|&theorem| TheoremTally {
                theorem,
                certified: 0,
                not_certified: 0,
                inconclusive: 0,
                oracle_supported: 0,
                oracle_inconclusive: 0,
            })
            .collect(),
        violations: Vec::new(),
        intentional_violations: 0,
    };

    for i in 0..n_instances {
        let instance_seed = rng::derive_seed(seed, i as u64);
        let (problem, anchor) = random_problem(instance_seed, cfg.class);
        let mut certify_cfg = cfg.certify.clone();
        certify_cfg.seed = rng::derive_seed(instance_seed, 1);
        let name = format!("{}-{i}", match cfg.class {
            ProblemClass::ConvexQuadratic => "convex-quadratic",
            ProblemClass::Polynomial => "polynomial",
        });
        harness_instance(
            &mut report,
            &name,
            &problem,
            &anchor,
            cfg,
            false,
            None,
            &certify_cfg,
        )?;
        report.instances += 1;
    }

    if cfg.include_gap_demo {
        let (problem, anchor) = gap_demo_problem();
        let mut certify_cfg = cfg.certify.clone();
        certify_cfg.seed = rng::derive_seed(seed, 0x4741_50);
        certify_cfg.quasiinvex_substitution = true;
        harness_instance(
            &mut report,
            "quasiinvex-substitution-demo",
            &problem,
            &anchor,
            cfg,
            true,
            Some(TheoremId::GlobalStrictQuasiconvex),
            &certify_cfg,
        )?;
        report.instances += 1;
    }

    Ok(report)
}

/// The demonstration instance: a cubic objective whose constraint is
/// quasiinvex (both gradients vanish at the origin) but not quasiconvex, so
/// substituting quasiinvexity into the strict quasiconvex theorem certifies a
/// point the strict-global oracle then falsifies.
pub fn gap_demo_problem() -> (Problem, Point) {
    let f = expr::parse_expr("-(x1^3)", 1).expect("fixture parses");
    let g = expr::parse_expr("-(x1^3) + x1^2", 1).expect("fixture parses");
    let eta = vec![expr::parse_expr("-x1", 1).expect("fixture parses")];
    let problem = Problem::new(1, vec![f], vec![g], vec![(-2.0, 2.0)])
        .expect("fixture is well-formed")
        .with_eta(eta)
        .expect("eta dimension matches");
    (problem, Point::new_unchecked(vec![0.0]))
}
