//! Sampling-based falsifiers for generalized-convexity hypotheses at a point:
//! quasiconvexity, pseudoconvexity, second-order pseudoconvexity (plain and
//! strict), and quasiinvexity with a user-supplied kernel.
//!
//! These are falsifiers, not verifiers: `NotFalsified` is sample-bounded
//! evidence over the search box, never a proof, since the definitions
//! quantify over the whole ambient set. Antecedents of strict inequalities
//! carry a `tau_strict` margin and equality antecedents an `eps_zero` band, so
//! that every `Falsified` witness re-verifies deterministically; violations
//! are likewise decided at `tau_strict` resolution.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::cones::Tolerances;
use crate::deriv::{self, DerivConfig, DerivError, DirDeriv2Result};
use crate::expr::{self, Expr, ExprError};
use crate::linalg;
use crate::problem::Point;
use crate::rng::Stream;

/// Hypothesis kinds the falsifier understands.
#[derive(Debug, Clone)]
pub enum PropertyKind {
    Quasiconvex,
    Pseudoconvex,
    TwoPseudoconvex,
    StrictlyTwoPseudoconvex,
    /// Quasiinvexity with respect to the kernel `eta`, given as one expression
    /// per coordinate in the variables `y1..yn` (stored over `x1..xn`).
    Quasiinvex { eta: Vec<Expr> },
}

impl PropertyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PropertyKind::Quasiconvex => "quasiconvex",
            PropertyKind::Pseudoconvex => "pseudoconvex",
            PropertyKind::TwoPseudoconvex => "2-pseudoconvex",
            PropertyKind::StrictlyTwoPseudoconvex => "strictly-2-pseudoconvex",
            PropertyKind::Quasiinvex { .. } => "quasiinvex",
        }
    }

    /// Whether the antecedent contains a vanishing-inner-product clause, which
    /// sampling alone essentially never hits.
    fn has_equality_stratum(&self) -> bool {
        matches!(
            self,
            PropertyKind::TwoPseudoconvex | PropertyKind::StrictlyTwoPseudoconvex
        )
    }
}

/// A candidate point that violated the property, with the segment parameter
/// for the quasiconvexity clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub y: Point,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FalsifyReport {
    Falsified {
        witness: Witness,
        violated_clause: String,
    },
    NotFalsified {
        samples_used: usize,
        /// Samples dropped due to evaluation errors.
        skipped: usize,
        /// Samples whose second-order clause could not be decided because the
        /// directional limit did not stabilize.
        second_order_inconclusive: usize,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GencvxError {
    Expr(ExprError),
    Deriv(DerivError),
    /// The base point must lie in the interior of the sampling box.
    PointNotInterior,
    BadBox,
    EtaDimension { expected: usize, got: usize },
}

impl fmt::Display for GencvxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GencvxError::Expr(e) => write!(f, "{e}"),
            GencvxError::Deriv(e) => write!(f, "{e}"),
            GencvxError::PointNotInterior => {
                write!(f, "base point must lie in the interior of the sampling box")
            }
            GencvxError::BadBox => write!(f, "sampling box is empty or non-finite"),
            GencvxError::EtaDimension { expected, got } => {
                write!(f, "eta has {got} components, expected {expected}")
            }
        }
    }
}

impl core::error::Error for GencvxError {}

impl From<ExprError> for GencvxError {
    fn from(e: ExprError) -> Self {
        GencvxError::Expr(e)
    }
}

impl From<DerivError> for GencvxError {
    fn from(e: DerivError) -> Self {
        GencvxError::Deriv(e)
    }
}

/// Sampling settings for the falsifiers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Segment grid resolution for the quasiconvexity clause: `t = k/t_grid`.
    pub t_grid: usize,
    pub deriv: DerivConfig,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        FalsifyConfig {
            n_samples: 1000,
            seed: 0,
            t_grid: 16,
            deriv: DerivConfig::default(),
        }
    }
}

enum CandidateOutcome {
    Violation { t: Option<f64>, clause: String },
    Holds,
    Skip,
    SecondOrderInconclusive,
}

struct Checker<'a> {
    ast: &'a Expr,
    base: &'a Point,
    base_value: f64,
    base_grad: Vec<f64>,
    kind: &'a PropertyKind,
    tol: &'a Tolerances,
    deriv_cfg: &'a DerivConfig,
    t_grid: usize,
}

impl<'a> Checker<'a> {
    /// Margin for strict value comparisons at the base point's scale.
    fn tau_value(&self) -> f64 {
        self.tol.tau_strict * (1.0 + self.base_value.abs())
    }

    /// Whether a second-derivative estimate is confidently not negative.
    fn clearly_not_negative(&self, value: f64, uncertainty: f64) -> bool {
        value - uncertainty >= -self.tol.tau_strict * value.abs().max(1.0)
    }

    fn check(&self, y: &Point) -> Result<CandidateOutcome, GencvxError> {
        let step: Vec<f64> = y
            .coords()
            .iter()
            .zip(self.base.coords())
            .map(|(a, b)| a - b)
            .collect();
        let step_norm = linalg::norm(&step);
        let phi_y = match expr::eval(self.ast, y) {
            Ok(v) => v,
            Err(_) => return Ok(CandidateOutcome::Skip),
        };

        match self.kind {
            PropertyKind::Quasiconvex => {
                if !(phi_y <= self.base_value) {
                    return Ok(CandidateOutcome::Holds);
                }
                for k in 1..self.t_grid {
                    let t = k as f64 / self.t_grid as f64;
                    let z = self.base.offset(&step, t);
                    let phi_z = match expr::eval(self.ast, &z) {
                        Ok(v) => v,
                        Err(_) => return Ok(CandidateOutcome::Skip),
                    };
                    if phi_z > self.base_value + self.tau_value() {
                        return Ok(CandidateOutcome::Violation {
                            t: Some(t),
                            clause: format!(
                                "segment value {phi_z} at t={t} exceeds the base value {}",
                                self.base_value
                            ),
                        });
                    }
                }
                Ok(CandidateOutcome::Holds)
            }
            PropertyKind::Pseudoconvex => {
                if !(phi_y < self.base_value - self.tau_value()) {
                    return Ok(CandidateOutcome::Holds);
                }
                let inner = linalg::dot(&self.base_grad, &step);
                if inner >= -self.tol.tau_strict * step_norm {
                    return Ok(CandidateOutcome::Violation {
                        t: None,
                        clause: format!(
                            "descent point has non-negative gradient inner product {inner}"
                        ),
                    });
                }
                Ok(CandidateOutcome::Holds)
            }
            PropertyKind::TwoPseudoconvex => {
                if !(phi_y < self.base_value - self.tau_value()) {
                    return Ok(CandidateOutcome::Holds);
                }
                self.second_order_clauses(&step, step_norm, false)
            }
            PropertyKind::StrictlyTwoPseudoconvex => {
                if step_norm <= self.tol.eps_zero {
                    return Ok(CandidateOutcome::Holds);
                }
                if !(phi_y <= self.base_value) {
                    return Ok(CandidateOutcome::Holds);
                }
                self.second_order_clauses(&step, step_norm, true)
            }
            PropertyKind::Quasiinvex { eta } => {
                if !(phi_y <= self.base_value) {
                    return Ok(CandidateOutcome::Holds);
                }
                let mut kernel = Vec::with_capacity(eta.len());
                for e in eta {
                    match expr::eval(e, y) {
                        Ok(v) => kernel.push(v),
                        Err(_) => return Ok(CandidateOutcome::Skip),
                    }
                }
                let inner = linalg::dot(&self.base_grad, &kernel);
                if inner > self.tol.tau_strict * (1.0 + linalg::norm(&kernel)) {
                    return Ok(CandidateOutcome::Violation {
                        t: None,
                        clause: format!("kernel inner product {inner} is positive"),
                    });
                }
                Ok(CandidateOutcome::Holds)
            }
        }
    }

    /// First-order clause plus the vanishing-inner-product second-order clause
    /// shared by the plain and strict second-order pseudoconvexity kinds.
    fn second_order_clauses(
        &self,
        step: &[f64],
        step_norm: f64,
        strict: bool,
    ) -> Result<CandidateOutcome, GencvxError> {
        let inner = linalg::dot(&self.base_grad, step);
        if inner > self.tol.tau_strict * step_norm {
            return Ok(CandidateOutcome::Violation {
                t: None,
                clause: format!("gradient inner product {inner} is positive"),
            });
        }
        if inner.abs() > self.tol.eps_zero * step_norm {
            return Ok(CandidateOutcome::Holds);
        }
        match deriv::second_dp(self.ast, self.base, step, self.deriv_cfg) {
            Ok(DirDeriv2Result::Finite { value, uncertainty }) => {
                if self.clearly_not_negative(value, uncertainty) {
                    let which = if strict { "strict" } else { "descent" };
                    Ok(CandidateOutcome::Violation {
                        t: None,
                        clause: format!(
                            "{which} second-order clause: directional second derivative \
                             {value} is not negative"
                        ),
                    })
                } else {
                    Ok(CandidateOutcome::Holds)
                }
            }
            Ok(_) => Ok(CandidateOutcome::SecondOrderInconclusive),
            Err(DerivError::Expr(_)) => Ok(CandidateOutcome::Skip),
            Err(e) => Err(e.into()),
        }
    }
}

/// Searches the box for a point violating the property at `base`. Samples are
/// drawn uniformly with per-index seeded streams; kinds with a
/// vanishing-inner-product antecedent also test each sample's projection onto
/// the hyperplane orthogonal to the gradient, since raw sampling essentially
/// never lands in that stratum.
pub fn falsify(
    ast: &Expr,
    base: &Point,
    kind: &PropertyKind,
    sampling_box: &[(f64, f64)],
    cfg: &FalsifyConfig,
    tol: &Tolerances,
) -> Result<FalsifyReport, GencvxError> {
    if sampling_box.is_empty()
        || sampling_box.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
    {
        return Err(GencvxError::BadBox);
    }
    if sampling_box.len() != base.dim() {
        return Err(GencvxError::BadBox);
    }
    let interior = base
        .coords()
        .iter()
        .zip(sampling_box)
        .all(|(&c, &(lo, hi))| lo < c && c < hi);
    if !interior {
        return Err(GencvxError::PointNotInterior);
    }
    if let PropertyKind::Quasiinvex { eta } = kind {
        if eta.len() != base.dim() {
            return Err(GencvxError::EtaDimension { expected: base.dim(), got: eta.len() });
        }
    }

    let base_value = expr::eval(ast, base)?;
    let base_grad = expr::grad(ast, base)?;
    let checker = Checker {
        ast,
        base,
        base_value,
        base_grad: base_grad.clone(),
        kind,
        tol,
        deriv_cfg: &cfg.deriv,
        t_grid: cfg.t_grid.max(2),
    };

    let grad_norm2 = linalg::dot(&base_grad, &base_grad);
    let project = kind.has_equality_stratum() && grad_norm2 > tol.eps_zero * tol.eps_zero;

    let mut skipped = 0usize;
    let mut second_order_inconclusive = 0usize;
    for index in 0..cfg.n_samples {
        let mut stream = Stream::derived(cfg.seed, index as u64);
        let y: Vec<f64> = sampling_box
            .iter()
            .map(|&(lo, hi)| stream.uniform_in(lo, hi))
            .collect();
        let mut candidates = Vec::with_capacity(2);
        candidates.push(Point::new_unchecked(y.clone()));
        if project {
            let step: Vec<f64> = y
                .iter()
                .zip(base.coords())
                .map(|(a, b)| a - b)
                .collect();
            let c = linalg::dot(&base_grad, &step) / grad_norm2;
            let projected: Vec<f64> = y
                .iter()
                .zip(&base_grad)
                .map(|(yi, gi)| yi - c * gi)
                .collect();
            candidates.push(Point::new_unchecked(projected));
        }
        for y in candidates {
            if y.coords().iter().any(|v| !v.is_finite()) {
                skipped += 1;
                continue;
            }
            match checker.check(&y)? {
                CandidateOutcome::Violation { t, clause } => {
                    return Ok(FalsifyReport::Falsified {
                        witness: Witness { y, t },
                        violated_clause: clause,
                    });
                }
                CandidateOutcome::Holds => {}
                CandidateOutcome::Skip => skipped += 1,
                CandidateOutcome::SecondOrderInconclusive => second_order_inconclusive += 1,
            }
        }
    }

    if skipped * 2 > cfg.n_samples {
        return Ok(FalsifyReport::Inconclusive {
            reason: format!("{skipped} of {} samples failed to evaluate", cfg.n_samples),
        });
    }
    Ok(FalsifyReport::NotFalsified {
        samples_used: cfg.n_samples,
        skipped,
        second_order_inconclusive,
    })
}

/// Deterministically re-evaluates the property clauses at a reported witness.
/// For the quasiconvexity clause the witness must carry `t` in `(0, 1)` and
/// violate the segment inequality at exactly that `t`.
pub fn recheck_witness(
    ast: &Expr,
    base: &Point,
    kind: &PropertyKind,
    witness: &Witness,
    cfg: &FalsifyConfig,
    tol: &Tolerances,
) -> Result<bool, GencvxError> {
    let base_value = expr::eval(ast, base)?;
    let base_grad = expr::grad(ast, base)?;
    let checker = Checker {
        ast,
        base,
        base_value,
        base_grad,
        kind,
        tol,
        deriv_cfg: &cfg.deriv,
        t_grid: cfg.t_grid.max(2),
    };

    if let PropertyKind::Quasiconvex = kind {
        let Some(t) = witness.t else {
            return Ok(false);
        };
        if !(t > 0.0 && t < 1.0) {
            return Ok(false);
        }
        let phi_y = match expr::eval(ast, &witness.y) {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        if !(phi_y <= base_value) {
            return Ok(false);
        }
        let step: Vec<f64> = witness
            .y
            .coords()
            .iter()
            .zip(base.coords())
            .map(|(a, b)| a - b)
            .collect();
        let z = base.offset(&step, t);
        let phi_z = match expr::eval(ast, &z) {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        return Ok(phi_z > base_value + checker.tau_value());
    }

    match checker.check(&witness.y)? {
        CandidateOutcome::Violation { .. } => Ok(true),
        _ => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::test_fixtures::pt;
    use alloc::vec;

    fn cfg() -> FalsifyConfig {
        FalsifyConfig::default()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn boxed(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        vec![(lo, hi); n]
    }

    #[test]
    fn cubic_constraint_is_not_quasiconvex_at_zero() {
        // g(y) <= g(0) = 0 holds for y >= 1 while the segment rises:
        // g(t y) = (t y)^2 (1 - t y) > 0 on the way.
        let g = parse_expr("-(x1^3) + x1^2", 1).unwrap();
        let report = falsify(
            &g,
            &pt(&[0.0]),
            &PropertyKind::Quasiconvex,
            &boxed(-2.0, 2.0, 1),
            &cfg(),
            &tol(),
        )
        .unwrap();
        match &report {
            FalsifyReport::Falsified { witness, .. } => {
                let y = witness.y.coords()[0];
                let t = witness.t.expect("segment witness carries t");
                assert!(y >= 1.0 - 1e-9, "witness y = {y}");
                assert!(t > 0.0 && t < 1.0);
                let seg = (t * y) * (t * y) * (1.0 - t * y);
                assert!(seg > 0.0, "g along segment: {seg}");
                assert!(recheck_witness(&g, &pt(&[0.0]), &PropertyKind::Quasiconvex, witness, &cfg(), &tol()).unwrap());
            }
            other => panic!("expected falsified, got {other:?}"),
        }
    }

    #[test]
    fn linear_objective_is_not_strictly_2_pseudoconvex() {
        // On the hyperplane orthogonal to the gradient the value ties and the
        // second-order derivative vanishes instead of being negative.
        let f1 = parse_expr("x1", 2).unwrap();
        let report = falsify(
            &f1,
            &pt(&[0.0, 0.0]),
            &PropertyKind::StrictlyTwoPseudoconvex,
            &boxed(-2.0, 2.0, 2),
            &cfg(),
            &tol(),
        )
        .unwrap();
        match &report {
            FalsifyReport::Falsified { witness, violated_clause } => {
                assert!(witness.y.coords()[0].abs() <= 1e-9, "witness {witness:?}");
                assert!(violated_clause.contains("second"), "{violated_clause}");
                assert!(recheck_witness(
                    &f1,
                    &pt(&[0.0, 0.0]),
                    &PropertyKind::StrictlyTwoPseudoconvex,
                    witness,
                    &cfg(),
                    &tol()
                )
                .unwrap());
            }
            other => panic!("expected falsified, got {other:?}"),
        }
    }

    #[test]
    fn signed_parabola_is_2_pseudoconvex_but_not_pseudoconvex() {
        let phi = parse_expr("if x1 >= 0 then x1^2 else -(x1^2)", 1).unwrap();
        let two = falsify(
            &phi,
            &pt(&[0.0]),
            &PropertyKind::TwoPseudoconvex,
            &boxed(-1.0, 1.0, 1),
            &cfg(),
            &tol(),
        )
        .unwrap();
        assert!(
            matches!(two, FalsifyReport::NotFalsified { .. }),
            "expected not falsified, got {two:?}"
        );

        // The zero gradient kills the strict first-order consequent.
        let pseudo = falsify(
            &phi,
            &pt(&[0.0]),
            &PropertyKind::Pseudoconvex,
            &boxed(-1.0, 1.0, 1),
            &cfg(),
            &tol(),
        )
        .unwrap();
        assert!(matches!(pseudo, FalsifyReport::Falsified { .. }), "{pseudo:?}");
    }

    #[test]
    fn vanishing_gradient_makes_any_kernel_quasiinvex() {
        let f = parse_expr("-(x1^3)", 1).unwrap();
        for eta_text in ["-x1", "x1^2 + 1", "sin(x1)"] {
            let eta = vec![parse_expr(eta_text, 1).unwrap()];
            let report = falsify(
                &f,
                &pt(&[0.0]),
                &PropertyKind::Quasiinvex { eta },
                &boxed(-2.0, 2.0, 1),
                &cfg(),
                &tol(),
            )
            .unwrap();
            assert!(
                matches!(report, FalsifyReport::NotFalsified { .. }),
                "eta {eta_text}: {report:?}"
            );
        }
    }

    #[test]
    fn fabricated_witnesses_fail_recheck() {
        let f1 = parse_expr("x1", 2).unwrap();
        // Antecedent fails: f1(1,1) = 1 > 0.
        let fake = Witness { y: pt(&[1.0, 1.0]), t: None };
        assert!(!recheck_witness(
            &f1,
            &pt(&[0.0, 0.0]),
            &PropertyKind::StrictlyTwoPseudoconvex,
            &fake,
            &cfg(),
            &tol()
        )
        .unwrap());

        // Segment parameter outside (0,1) is rejected outright.
        let g = parse_expr("-(x1^3) + x1^2", 1).unwrap();
        let fake = Witness { y: pt(&[1.5]), t: Some(1.5) };
        assert!(!recheck_witness(&g, &pt(&[0.0]), &PropertyKind::Quasiconvex, &fake, &cfg(), &tol()).unwrap());
        let fake = Witness { y: pt(&[1.5]), t: None };
        assert!(!recheck_witness(&g, &pt(&[0.0]), &PropertyKind::Quasiconvex, &fake, &cfg(), &tol()).unwrap());
    }

    #[test]
    fn strict_hierarchy_on_convex_fixtures() {
        // Strictly-2-pseudoconvex not-falsified implies 2-pseudoconvex
        // not-falsified on these fixtures.
        for text in ["x1^2", "x1^4", "if x1 >= 0 then x1^2 else -(x1^2)", "exp(x1) - 1"] {
            let f = parse_expr(text, 1).unwrap();
            let strict = falsify(
                &f,
                &pt(&[0.0]),
                &PropertyKind::StrictlyTwoPseudoconvex,
                &boxed(-1.0, 1.0, 1),
                &cfg(),
                &tol(),
            )
            .unwrap();
            if matches!(strict, FalsifyReport::NotFalsified { .. }) {
                let plain = falsify(
                    &f,
                    &pt(&[0.0]),
                    &PropertyKind::TwoPseudoconvex,
                    &boxed(-1.0, 1.0, 1),
                    &cfg(),
                    &tol(),
                )
                .unwrap();
                assert!(
                    matches!(plain, FalsifyReport::NotFalsified { .. }),
                    "{text}: strict held but plain was falsified: {plain:?}"
                );
            }
        }
    }

    #[test]
    fn reports_are_deterministic_given_seed() {
        let g = parse_expr("-(x1^3) + x1^2", 1).unwrap();
        let a = falsify(&g, &pt(&[0.0]), &PropertyKind::Quasiconvex, &boxed(-2.0, 2.0, 1), &cfg(), &tol()).unwrap();
        let b = falsify(&g, &pt(&[0.0]), &PropertyKind::Quasiconvex, &boxed(-2.0, 2.0, 1), &cfg(), &tol()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn base_point_must_be_interior() {
        let f = parse_expr("x1^2", 1).unwrap();
        let err = falsify(&f, &pt(&[2.0]), &PropertyKind::Quasiconvex, &boxed(-1.0, 1.0, 1), &cfg(), &tol());
        assert!(matches!(err, Err(GencvxError::PointNotInterior)));
    }
}
