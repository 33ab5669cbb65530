//! Second-order sufficiency certificates: per-direction multiplier searches
//! over the sampled critical cone, the support-cone triviality condition for
//! the local theorem, and generalized-convexity hypothesis falsifiers for the
//! global ones.
//!
//! Quantification over the infinite direction cone is realized by extreme rays
//! plus seeded samples, so the positive verdict is always `CertifiedOnSamples`,
//! never an unconditional "certified". The local theorem quantifies over the
//! linearized cone, a superset of the tangent-cone intersection it needs;
//! checking hypotheses on a superset may over-reject but never over-certifies.
//! Directions whose second-order derivatives do not stabilize yield
//! `Inconclusive`, not `Violated`: the underlying conditions are silent there
//! and the tool must not claim falsity.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::cones::{self, ConeError, Tolerances};
use crate::deriv::{self, DerivConfig, DirDeriv2Result};
use crate::expr::ExprError;
use crate::gencvx::{self, FalsifyConfig, FalsifyReport, GencvxError, PropertyKind};
use crate::linalg;
use crate::lp::{self, LpError, LpOutcome, LpProblem};
use crate::problem::{Point, Problem};
use crate::rng;

/// The five sufficiency checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    /// Strict local efficiency of order 2 via Fritz-John multipliers with a
    /// positive second-order form plus the support-cone condition.
    #[serde(rename = "local2")]
    LocalOrder2,
    /// Global weak efficiency: KKT multipliers, non-strict second-order form,
    /// 2-pseudoconvex objectives and quasiconvex active constraints.
    #[serde(rename = "kkt-weak")]
    GlobalWeakKkt,
    /// Strict global efficiency with strictly 2-pseudoconvex objectives.
    #[serde(rename = "kkt-strict")]
    GlobalStrictKkt,
    /// Strict global efficiency, Fritz-John multipliers, strictly
    /// 2-pseudoconvex objectives and active constraints.
    #[serde(rename = "fj-strict")]
    GlobalStrictFj,
    /// Strict global efficiency with quasiconvex data and a strictly positive
    /// second-order form.
    #[serde(rename = "qc-strict")]
    GlobalStrictQuasiconvex,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [
        TheoremId::LocalOrder2,
        TheoremId::GlobalWeakKkt,
        TheoremId::GlobalStrictKkt,
        TheoremId::GlobalStrictFj,
        TheoremId::GlobalStrictQuasiconvex,
    ];

    pub fn cli_name(&self) -> &'static str {
        match self {
            TheoremId::LocalOrder2 => "local2",
            TheoremId::GlobalWeakKkt => "kkt-weak",
            TheoremId::GlobalStrictKkt => "kkt-strict",
            TheoremId::GlobalStrictFj => "fj-strict",
            TheoremId::GlobalStrictQuasiconvex => "qc-strict",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<TheoremId> {
        TheoremId::ALL.iter().copied().find(|t| t.cli_name() == name)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

/// Normalization of the multiplier vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierMode {
    /// `(mu, lambda)` jointly normalized; the objective part may vanish.
    FritzJohn,
    /// `mu` normalized on its own, so the objective part is nonzero.
    Kkt,
}

/// Requirement on the second-order form value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// `> tau_strict`.
    Strict,
    /// `>= -tau_strict`.
    NonStrict,
}

/// Reference to one component function of the problem. Serializes as
/// `objective:<k>` / `constraint:<k>` with 1-based `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionRef {
    Objective(usize),
    Constraint(usize),
}

impl fmt::Display for FunctionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionRef::Objective(j) => write!(f, "objective:{}", j + 1),
            FunctionRef::Constraint(i) => write!(f, "constraint:{}", i + 1),
        }
    }
}

impl Serialize for FunctionRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A multiplier vector satisfying the stationarity, sign, complementarity and
/// normalization conditions, with the value of the second-order form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierPair {
    pub mu: Vec<f64>,
    /// Full-length vector; entries off the active set are zero.
    pub lambda: Vec<f64>,
    /// Value of the weighted second-order form for the direction at hand.
    pub slack: f64,
}

/// Second-order derivative of one component function along a direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionDeriv {
    pub function: FunctionRef,
    pub result: DirDeriv2Result,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionStatus {
    Satisfied,
    Violated { reason: String },
    Inconclusive { reason: String },
}

/// Everything the checker established for one sampled direction.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionRecord {
    pub d: Vec<f64>,
    pub multipliers: Option<MultiplierPair>,
    /// Support-cone condition outcome; only the local theorem populates it.
    pub cond2_ok: Option<bool>,
    pub derivs: Vec<FunctionDeriv>,
    pub status: DirectionStatus,
}

/// Outcome of one hypothesis falsifier run.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub function: FunctionRef,
    pub property: String,
    pub report: FalsifyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedOnSamples,
    NotCertified {
        cause: String,
        /// Index into `records` when a direction witnessed the failure.
        direction: Option<usize>,
    },
    Inconclusive {
        cause: String,
        direction: Option<usize>,
    },
}

/// Settings for a certification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Number of sampled directions (extreme rays included).
    pub directions: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub deriv: DerivConfig,
    /// Sample budget per hypothesis falsifier.
    pub falsify_samples: usize,
    /// Segment grid resolution for quasiconvexity falsifiers.
    pub t_grid: usize,
    /// Demonstration switch: substitute quasiinvexity (with the problem's
    /// kernel) for quasiconvexity in the strict quasiconvex theorem's
    /// hypotheses. This reproduces a known unsound weakening; the harness
    /// flags the resulting certificate against the efficiency oracle.
    pub quasiinvex_substitution: bool,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            directions: 256,
            seed: 0,
            tol: Tolerances::default(),
            deriv: DerivConfig::default(),
            falsify_samples: 1000,
            t_grid: 16,
            quasiinvex_substitution: false,
        }
    }
}

impl CertifyConfig {
    fn falsify_config(&self, salt: u64) -> FalsifyConfig {
        FalsifyConfig {
            n_samples: self.falsify_samples,
            seed: rng::derive_seed(self.seed, 0x4859_5053 ^ salt),
            t_grid: self.t_grid,
            deriv: self.deriv.clone(),
        }
    }
}

/// The assembled certificate.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub theorem: TheoremId,
    pub verdict: Verdict,
    pub hypothesis_reports: Vec<HypothesisReport>,
    pub records: Vec<DirectionRecord>,
    pub config: CertifyConfig,
    /// A multiplier pair valid for every sampled direction, when the first
    /// direction's pair happens to work everywhere.
    pub common_multipliers: Option<MultiplierPair>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertifyError {
    Cone(ConeError),
    Lp(LpError),
    Expr(ExprError),
    Gencvx(GencvxError),
    BadConfig(&'static str),
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::Cone(e) => write!(f, "{e}"),
            CertifyError::Lp(e) => write!(f, "{e}"),
            CertifyError::Expr(e) => write!(f, "{e}"),
            CertifyError::Gencvx(e) => write!(f, "{e}"),
            CertifyError::BadConfig(msg) => write!(f, "bad certify config: {msg}"),
        }
    }
}

impl core::error::Error for CertifyError {}

impl From<ConeError> for CertifyError {
    fn from(e: ConeError) -> Self {
        CertifyError::Cone(e)
    }
}

impl From<LpError> for CertifyError {
    fn from(e: LpError) -> Self {
        CertifyError::Lp(e)
    }
}

impl From<ExprError> for CertifyError {
    fn from(e: ExprError) -> Self {
        CertifyError::Expr(e)
    }
}

impl From<GencvxError> for CertifyError {
    fn from(e: GencvxError) -> Self {
        CertifyError::Gencvx(e)
    }
}

/// Multiplier search for one direction: maximize the second-order form over
/// stationary, complementary, sign-constrained, normalized multipliers.
///
/// `f_curv[j]` is the second-order derivative of objective `j` and
/// `g_curv[k]` that of constraint `active[k]`, along the direction at hand.
/// An unbounded form (possible only under KKT normalization) counts as
/// satisfiable; the pair is re-extracted under a large cap so that a concrete
/// witness with a finite recomputable slack is always returned.
pub fn find_multipliers(
    problem: &Problem,
    x: &Point,
    active: &[usize],
    f_curv: &[f64],
    g_curv: &[f64],
    mode: MultiplierMode,
    strictness: Strictness,
    tol: &Tolerances,
) -> Result<Option<MultiplierPair>, CertifyError> {
    let p = problem.num_objectives();
    let na = active.len();
    assert_eq!(f_curv.len(), p);
    assert_eq!(g_curv.len(), na);

    let grads_f: Vec<Vec<f64>> = problem
        .objectives()
        .iter()
        .map(|f| crate::expr::grad(f, x))
        .collect::<Result<_, _>>()?;
    let grads_g: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| crate::expr::grad(problem.constraint(i), x))
        .collect::<Result<_, _>>()?;

    let build = |cap: Option<f64>| {
        let mut objective = Vec::with_capacity(p + na);
        objective.extend_from_slice(f_curv);
        objective.extend_from_slice(g_curv);
        let mut lp = LpProblem::new(objective);
        for k in 0..problem.n() {
            let mut row = Vec::with_capacity(p + na);
            for gf in &grads_f {
                row.push(gf[k]);
            }
            for gg in &grads_g {
                row.push(gg[k]);
            }
            lp.push_eq(row, 0.0);
        }
        let norm_row: Vec<f64> = match mode {
            MultiplierMode::FritzJohn => vec![1.0; p + na],
            MultiplierMode::Kkt => {
                let mut r = vec![1.0; p];
                r.resize(p + na, 0.0);
                r
            }
        };
        lp.push_eq(norm_row, 1.0);
        if cap.is_some() {
            lp.push_le(vec![1.0; p + na], cap.unwrap());
        }
        lp
    };

    let outcome = lp::solve(&build(None))?;
    let solution = match outcome {
        LpOutcome::Infeasible => return Ok(None),
        LpOutcome::Optimal { x, value } => Some((x, value)),
        LpOutcome::Unbounded => {
            // Only the constraint part can blow up; re-extract under a cap.
            match lp::solve(&build(Some(1e3)))? {
                LpOutcome::Optimal { x, value } => Some((x, value)),
                _ => None,
            }
        }
    };
    let Some((vars, value)) = solution else {
        return Ok(None);
    };

    let ok = match strictness {
        Strictness::Strict => value > tol.tau_strict,
        Strictness::NonStrict => value >= -tol.tau_strict,
    };
    if !ok {
        return Ok(None);
    }

    let mu = vars[..p].to_vec();
    let mut lambda = vec![0.0; problem.num_constraints()];
    for (k, &i) in active.iter().enumerate() {
        lambda[i] = vars[p + k];
    }
    let slack = linalg::dot(&mu, f_curv) + linalg::dot(&vars[p..], g_curv);
    Ok(Some(MultiplierPair { mu, lambda, slack }))
}

/// Support-cone condition for a critical direction: every nonzero vector of
/// the orthogonal support cone must make a positive inner product with some
/// objective gradient from the vanishing set. Equivalently, the cone with the
/// objective rows included collapses to the origin. An empty vanishing set
/// leaves the cone without objective rows, so the condition holds only
/// vacuously, i.e. when even that cone is trivial.
pub fn check_condition_ii(
    problem: &Problem,
    x: &Point,
    d: &[f64],
    tol: &Tolerances,
) -> Result<bool, CertifyError> {
    let cone = cones::cone_cxd_perp(problem, x, d, true, tol)?;
    Ok(cones::is_trivial(&cone, tol)?)
}

fn requirements(theorem: TheoremId) -> (MultiplierMode, Strictness, bool) {
    match theorem {
        TheoremId::LocalOrder2 => (MultiplierMode::FritzJohn, Strictness::Strict, true),
        TheoremId::GlobalWeakKkt => (MultiplierMode::Kkt, Strictness::NonStrict, false),
        TheoremId::GlobalStrictKkt => (MultiplierMode::Kkt, Strictness::NonStrict, false),
        TheoremId::GlobalStrictFj => (MultiplierMode::FritzJohn, Strictness::NonStrict, false),
        TheoremId::GlobalStrictQuasiconvex => (MultiplierMode::Kkt, Strictness::Strict, false),
    }
}

/// Hypothesis falsifier plan for a theorem: which property to probe on which
/// functions. The local theorem has no generalized-convexity hypotheses.
fn hypothesis_plan(
    theorem: TheoremId,
    problem: &Problem,
    active: &[usize],
    substitute_quasiinvex: bool,
) -> Vec<(FunctionRef, PropertyKind)> {
    let objective_refs = (0..problem.num_objectives()).map(FunctionRef::Objective);
    let active_refs = active.iter().map(|&i| FunctionRef::Constraint(i));
    let quasiinvex = || {
        problem.eta().map(|eta| PropertyKind::Quasiinvex { eta: eta.to_vec() })
    };
    match theorem {
        TheoremId::LocalOrder2 => Vec::new(),
        TheoremId::GlobalWeakKkt => objective_refs
            .map(|f| (f, PropertyKind::TwoPseudoconvex))
            .chain(active_refs.map(|g| (g, PropertyKind::Quasiconvex)))
            .collect(),
        TheoremId::GlobalStrictKkt => objective_refs
            .map(|f| (f, PropertyKind::StrictlyTwoPseudoconvex))
            .chain(active_refs.map(|g| (g, PropertyKind::Quasiconvex)))
            .collect(),
        TheoremId::GlobalStrictFj => objective_refs
            .map(|f| (f, PropertyKind::StrictlyTwoPseudoconvex))
            .chain(active_refs.map(|g| (g, PropertyKind::StrictlyTwoPseudoconvex)))
            .collect(),
        TheoremId::GlobalStrictQuasiconvex => {
            let kind = if substitute_quasiinvex {
                quasiinvex().unwrap_or(PropertyKind::Quasiconvex)
            } else {
                PropertyKind::Quasiconvex
            };
            objective_refs
                .map(|f| (f, kind.clone()))
                .chain(active_refs.map(|g| (g, kind.clone())))
                .collect()
        }
    }
}

fn function_expr<'p>(problem: &'p Problem, fref: FunctionRef) -> &'p crate::expr::Expr {
    match fref {
        FunctionRef::Objective(j) => problem.objective(j),
        FunctionRef::Constraint(i) => problem.constraint(i),
    }
}

/// Runs the hypothesis falsifiers a theorem requires at `x`.
pub fn run_hypothesis_falsifiers(
    problem: &Problem,
    x: &Point,
    theorem: TheoremId,
    cfg: &CertifyConfig,
) -> Result<Vec<HypothesisReport>, CertifyError> {
    let active = cones::active_constraints(problem, x, &cfg.tol)?;
    let plan = hypothesis_plan(theorem, problem, &active, cfg.quasiinvex_substitution);
    let mut out = Vec::with_capacity(plan.len());
    for (salt, (fref, kind)) in plan.into_iter().enumerate() {
        let report = gencvx::falsify(
            function_expr(problem, fref),
            x,
            &kind,
            problem.search_box(),
            &cfg.falsify_config(salt as u64),
            &cfg.tol,
        )?;
        out.push(HypothesisReport {
            function: fref,
            property: kind.name().to_string(),
            report,
        });
    }
    Ok(out)
}

/// The sampled direction set over the critical cone, or `None` when the cone
/// is trivial (conditions hold vacuously).
pub fn plan_directions(
    problem: &Problem,
    x: &Point,
    cfg: &CertifyConfig,
) -> Result<Option<cones::SampleSet>, CertifyError> {
    if cfg.directions == 0 {
        return Err(CertifyError::BadConfig("directions must be positive"));
    }
    let cone = cones::critical_cone(problem, x, &cfg.tol)?;
    if cones::is_trivial(&cone, &cfg.tol)? {
        return Ok(None);
    }
    Ok(Some(cones::sample_unit(&cone, cfg.directions, cfg.seed, &cfg.tol)))
}

/// Evaluates every theorem clause for one direction. Hard numerical failures
/// fold into an `Inconclusive` status instead of aborting the whole run.
pub fn evaluate_direction(
    problem: &Problem,
    x: &Point,
    d: &[f64],
    theorem: TheoremId,
    cfg: &CertifyConfig,
) -> DirectionRecord {
    let (mode, strictness, needs_cond2) = requirements(theorem);
    let mut record = DirectionRecord {
        d: d.to_vec(),
        multipliers: None,
        cond2_ok: None,
        derivs: Vec::new(),
        status: DirectionStatus::Satisfied,
    };

    let active = match cones::active_constraints(problem, x, &cfg.tol) {
        Ok(a) => a,
        Err(e) => {
            record.status = DirectionStatus::Inconclusive { reason: e.to_string() };
            return record;
        }
    };

    // Second-order derivatives of every objective and active constraint.
    let mut f_curv = Vec::with_capacity(problem.num_objectives());
    let mut g_curv = Vec::with_capacity(active.len());
    let targets = (0..problem.num_objectives())
        .map(FunctionRef::Objective)
        .chain(active.iter().map(|&i| FunctionRef::Constraint(i)));
    for fref in targets {
        let result = match deriv::second_dp(function_expr(problem, fref), x, d, &cfg.deriv) {
            Ok(r) => r,
            Err(e) => {
                record.status = DirectionStatus::Inconclusive {
                    reason: format!("second-order derivative of {fref} failed: {e}"),
                };
                return record;
            }
        };
        match result.finite() {
            Some((value, _)) => match fref {
                FunctionRef::Objective(_) => f_curv.push(value),
                FunctionRef::Constraint(_) => g_curv.push(value),
            },
            None => {
                record.derivs.push(FunctionDeriv { function: fref, result });
                record.status = DirectionStatus::Inconclusive {
                    reason: format!(
                        "second-order derivative of {fref} has no stable limit along d"
                    ),
                };
                return record;
            }
        }
        record.derivs.push(FunctionDeriv { function: fref, result });
    }

    match find_multipliers(problem, x, &active, &f_curv, &g_curv, mode, strictness, &cfg.tol) {
        Ok(Some(pair)) => record.multipliers = Some(pair),
        Ok(None) => {
            let what = match strictness {
                Strictness::Strict => "positive",
                Strictness::NonStrict => "non-negative",
            };
            record.status = DirectionStatus::Violated {
                reason: format!(
                    "no admissible multipliers give a {what} second-order form along d"
                ),
            };
            return record;
        }
        Err(e) => {
            record.status = DirectionStatus::Inconclusive {
                reason: format!("multiplier search failed: {e}"),
            };
            return record;
        }
    }

    if needs_cond2 {
        match check_condition_ii(problem, x, d, &cfg.tol) {
            Ok(true) => record.cond2_ok = Some(true),
            Ok(false) => {
                record.cond2_ok = Some(false);
                record.status = DirectionStatus::Violated {
                    reason: "support cone orthogonal to d has a nonzero member on which \
                             no vanishing-set objective gradient is positive"
                        .to_string(),
                };
                return record;
            }
            Err(e) => {
                record.status = DirectionStatus::Inconclusive {
                    reason: format!("support-cone test failed: {e}"),
                };
                return record;
            }
        }
    }

    record
}

/// Aggregates hypothesis reports and direction records into the certificate.
/// Records must be in sample order; aggregation itself is order-independent.
pub fn assemble_certificate(
    theorem: TheoremId,
    cfg: &CertifyConfig,
    hypothesis_reports: Vec<HypothesisReport>,
    records: Vec<DirectionRecord>,
    mut note: Option<String>,
) -> Certificate {
    let falsified = hypothesis_reports
        .iter()
        .find(|h| matches!(h.report, FalsifyReport::Falsified { .. }));
    let verdict = if let Some(h) = falsified {
        Verdict::NotCertified {
            cause: format!("hypothesis falsified: {} is not {}", h.function, h.property),
            direction: None,
        }
    } else if let Some((idx, rec)) = records
        .iter()
        .enumerate()
        .find(|(_, r)| matches!(r.status, DirectionStatus::Violated { .. }))
    {
        let reason = match &rec.status {
            DirectionStatus::Violated { reason } => reason.clone(),
            _ => unreachable!(),
        };
        Verdict::NotCertified { cause: reason, direction: Some(idx) }
    } else if let Some((idx, rec)) = records
        .iter()
        .enumerate()
        .find(|(_, r)| matches!(r.status, DirectionStatus::Inconclusive { .. }))
    {
        let reason = match &rec.status {
            DirectionStatus::Inconclusive { reason } => reason.clone(),
            _ => unreachable!(),
        };
        Verdict::Inconclusive { cause: reason, direction: Some(idx) }
    } else if let Some(h) = hypothesis_reports
        .iter()
        .find(|h| matches!(h.report, FalsifyReport::Inconclusive { .. }))
    {
        Verdict::Inconclusive {
            cause: format!("hypothesis falsifier inconclusive on {}", h.function),
            direction: None,
        }
    } else {
        Verdict::CertifiedOnSamples
    };

    // Direction-independent multipliers: re-test the first direction's pair
    // against every other record's second-order data.
    let (_, strictness, _) = requirements(theorem);
    let common_multipliers = if matches!(verdict, Verdict::CertifiedOnSamples) {
        records.first().and_then(|r0| r0.multipliers.clone()).filter(|pair| {
            records.iter().all(|r| {
                let mut slack = 0.0;
                for fd in &r.derivs {
                    let Some((value, _)) = fd.result.finite() else {
                        return false;
                    };
                    let weight = match fd.function {
                        FunctionRef::Objective(j) => pair.mu[j],
                        FunctionRef::Constraint(i) => pair.lambda[i],
                    };
                    slack += weight * value;
                }
                match strictness {
                    Strictness::Strict => slack > cfg.tol.tau_strict,
                    Strictness::NonStrict => slack >= -cfg.tol.tau_strict,
                }
            })
        })
    } else {
        None
    };

    if records.is_empty() && matches!(verdict, Verdict::CertifiedOnSamples) && note.is_none() {
        note = Some("critical cone is trivial; the conditions hold vacuously".to_string());
    }

    Certificate {
        theorem,
        verdict,
        hypothesis_reports,
        records,
        config: cfg.clone(),
        common_multipliers,
        note,
    }
}

/// Full sequential certification run for one theorem at one point.
pub fn certify(
    problem: &Problem,
    x: &Point,
    theorem: TheoremId,
    cfg: &CertifyConfig,
) -> Result<Certificate, CertifyError> {
    // Feasibility gate; also fails fast on evaluation errors at the point.
    cones::active_constraints(problem, x, &cfg.tol)?;

    let hypothesis_reports = run_hypothesis_falsifiers(problem, x, theorem, cfg)?;
    if hypothesis_reports
        .iter()
        .any(|h| matches!(h.report, FalsifyReport::Falsified { .. }))
    {
        return Ok(assemble_certificate(theorem, cfg, hypothesis_reports, Vec::new(), None));
    }

    let Some(samples) = plan_directions(problem, x, cfg)? else {
        return Ok(assemble_certificate(theorem, cfg, hypothesis_reports, Vec::new(), None));
    };
    let note = samples
        .stalled
        .then(|| "direction sampling stalled before reaching the requested count".to_string());
    let records: Vec<DirectionRecord> = samples
        .directions
        .iter()
        .map(|d| evaluate_direction(problem, x, d, theorem, cfg))
        .collect();
    Ok(assemble_certificate(theorem, cfg, hypothesis_reports, records, note))
}
