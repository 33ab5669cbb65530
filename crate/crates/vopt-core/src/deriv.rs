//! First- and second-order directional derivatives as numerical limits.
//!
//! The second-order directional derivative here is the Demyanov-Pevnyi limit
//! `lim_{t->0+} (2/t^2) [phi(x+td) - phi(x) - t <grad phi(x), d>]`, estimated on
//! a geometric step grid with convergence diagnostics. A Hadamard-variant
//! estimator perturbs the direction while shrinking the step, and a gradient
//! stability probe estimates a local Lipschitz modulus of the gradient.
//!
//! Limit detection runs three classifiers in order: a tight median window, a
//! shrinking-envelope path for fractional-power convergence rates (where a
//! plain Cauchy window would stall), and a monotone-growth divergence test.
//! Sequences that stabilize into an oscillation band are reported as having no
//! limit, with the band width as the amplitude. The envelope path can in
//! principle mistake a late-settling oscillation for convergence; its
//! uncertainty field carries the envelope width so that callers see the
//! achievable resolution rather than a false point estimate.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{self, Expr, ExprError};
use crate::linalg;
use crate::problem::Point;
use crate::rng::Stream;

/// Step-grid and tolerance settings for the directional-derivative limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivConfig {
    /// Initial step of the geometric grid.
    pub t0: f64,
    /// Step shrink factor in (0, 1).
    pub rho: f64,
    /// Number of grid steps.
    pub max_steps: usize,
    /// Window length for convergence tests.
    pub window: usize,
    /// Relative convergence tolerance.
    pub tol_rel: f64,
    /// Absolute convergence tolerance.
    pub tol_abs: f64,
}

impl Default for DerivConfig {
    fn default() -> Self {
        DerivConfig {
            t0: 1e-1,
            rho: 0.5,
            max_steps: 40,
            window: 6,
            tol_rel: 1e-6,
            tol_abs: 1e-9,
        }
    }
}

impl DerivConfig {
    pub fn validate(&self) -> Result<(), DerivError> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(DerivError::BadConfig("t0 must be positive"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(DerivError::BadConfig("rho must be in (0, 1)"));
        }
        if self.window < 3 {
            return Err(DerivError::BadConfig("window must be at least 3"));
        }
        if self.max_steps < self.window {
            return Err(DerivError::BadConfig("max_steps must be at least window"));
        }
        if !(self.tol_rel > 0.0 && self.tol_abs > 0.0) {
            return Err(DerivError::BadConfig("tolerances must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a second-order directional-derivative limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirDeriv2Result {
    /// The quotients stabilized; `uncertainty` is the spread of the last
    /// window of quotients that witnessed convergence.
    Finite { value: f64, uncertainty: f64 },
    /// The quotients grow without bound.
    Divergent { sign: i8 },
    /// The quotients oscillate with a non-decaying amplitude.
    NoLimit { amplitude: f64, trace: Vec<f64> },
}

impl DirDeriv2Result {
    pub fn finite(&self) -> Option<(f64, f64)> {
        match self {
            DirDeriv2Result::Finite { value, uncertainty } => Some((*value, *uncertainty)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivError {
    Expr(ExprError),
    ZeroDirection,
    BadConfig(&'static str),
    DimensionMismatch { expected: usize, got: usize },
    /// Too many samples of the stability probe failed to differentiate.
    StabilityInconclusive { skipped: usize, total: usize },
}

impl fmt::Display for DerivError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivError::Expr(e) => write!(f, "{e}"),
            DerivError::ZeroDirection => write!(f, "direction must be nonzero"),
            DerivError::BadConfig(msg) => write!(f, "bad derivative config: {msg}"),
            DerivError::DimensionMismatch { expected, got } => {
                write!(f, "direction has dimension {got}, expected {expected}")
            }
            DerivError::StabilityInconclusive { skipped, total } => {
                write!(f, "stability probe inconclusive: {skipped}/{total} samples skipped")
            }
        }
    }
}

impl core::error::Error for DerivError {}

impl From<ExprError> for DerivError {
    fn from(e: ExprError) -> Self {
        DerivError::Expr(e)
    }
}

fn check_direction(x: &Point, d: &[f64]) -> Result<(), DerivError> {
    if d.len() != x.dim() {
        return Err(DerivError::DimensionMismatch { expected: x.dim(), got: d.len() });
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(DerivError::BadConfig("direction has non-finite entries"));
    }
    Ok(())
}

/// First-order directional derivative `<grad phi(x), d>`.
pub fn dir_deriv1(ast: &Expr, x: &Point, d: &[f64]) -> Result<f64, DerivError> {
    check_direction(x, d)?;
    let g = expr::grad(ast, x)?;
    Ok(linalg::dot(&g, d))
}

fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn spread(values: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// Median of the window of width `w` ending `back` whole windows behind the
/// window that ends at index `end`.
fn block_median(qs: &[f64], end: usize, w: usize, back: usize) -> Option<f64> {
    let end_idx = end.checked_sub(back * w)?;
    if end_idx + 1 < w {
        return None;
    }
    Some(median(&qs[end_idx + 1 - w..=end_idx]))
}

/// Aitken extrapolation over three consecutive block medians ending at `end`.
/// Exact for geometrically decaying residuals; guarded back to the newest
/// block median when the block differences are erratic.
fn aitken_refine(qs: &[f64], end: usize, w: usize) -> f64 {
    let m0 = match block_median(qs, end, w, 0) {
        Some(m) => m,
        None => return median(&qs[..=end]),
    };
    let (Some(m1), Some(m2)) = (block_median(qs, end, w, 1), block_median(qs, end, w, 2)) else {
        return m0;
    };
    let d1 = m0 - m1;
    let d2 = m1 - m2;
    let denom = d1 - d2;
    if denom.abs() <= 1e-12 * (d1.abs() + d2.abs()) {
        return m0;
    }
    let correction = d1 * d1 / denom;
    if correction.abs() > d1.abs() {
        return m0;
    }
    m0 - correction
}

/// Per-sequence classification shared by the plain and Hadamard estimators.
#[derive(Debug, Clone)]
enum SeqClass {
    /// A whole window sat within tolerance of its median.
    Tight { value: f64, spread: f64, end: usize },
    /// Window spreads shrank steadily into a valley: slow convergence with the
    /// envelope width as the honest uncertainty.
    Envelope { value: f64, width: f64, end: usize },
    Divergent { sign: i8 },
    NoLimit { amplitude: f64 },
}

impl SeqClass {
    fn finite_value(&self) -> Option<(f64, f64, usize)> {
        match self {
            SeqClass::Tight { value, spread, end } => Some((*value, *spread, *end)),
            SeqClass::Envelope { value, width, end } => Some((*value, *width, *end)),
            _ => None,
        }
    }
}

/// Ratio the valley spread must improve on the first window's spread for the
/// envelope path to accept convergence.
const ENVELOPE_IMPROVEMENT: f64 = 8.0;
/// Minimum tail growth factor for the divergence verdict.
const DIVERGENCE_GROWTH: f64 = 16.0;

fn classify(qs: &[f64], cfg: &DerivConfig) -> SeqClass {
    let w = cfg.window;
    if qs.len() < w {
        return SeqClass::NoLimit { amplitude: spread(qs) };
    }

    // Tight path: deepest window whose members all sit within tolerance of
    // the window median.
    let mut tight: Option<(f64, f64, usize)> = None;
    for end in (w - 1)..qs.len() {
        let win = &qs[end + 1 - w..=end];
        let med = median(win);
        let tol = cfg.tol_abs + cfg.tol_rel * med.abs();
        if win.iter().all(|q| (q - med).abs() <= tol) {
            tight = Some((med, spread(win), end));
        }
    }
    if let Some((value, s, end)) = tight {
        return SeqClass::Tight { value, spread: s, end };
    }

    // Envelope path: window spreads must improve substantially into a valley.
    let first_spread = spread(&qs[..w]);
    let mut valley = (w - 1, first_spread);
    for end in w..qs.len() {
        let s = spread(&qs[end + 1 - w..=end]);
        if s < valley.1 {
            valley = (end, s);
        }
    }
    if valley.1 <= first_spread / ENVELOPE_IMPROVEMENT {
        let value = aitken_refine(qs, valley.0, w);
        return SeqClass::Envelope { value, width: valley.1, end: valley.0 };
    }

    // Divergence: |q| monotone non-decreasing over the tail with real growth.
    let tail = &qs[qs.len().saturating_sub(2 * w)..];
    let mono = tail.windows(2).all(|p| p[1].abs() >= p[0].abs());
    let last = *tail.last().unwrap();
    let growth = last.abs() / tail[0].abs().max(f64::MIN_POSITIVE);
    if mono
        && last.abs() > cfg.tol_abs
        && (last.abs() > 1.0 / cfg.tol_abs || growth >= DIVERGENCE_GROWTH)
    {
        return SeqClass::Divergent { sign: if last >= 0.0 { 1 } else { -1 } };
    }

    SeqClass::NoLimit { amplitude: spread(&qs[qs.len() - w..]) }
}

fn to_result(class: SeqClass, qs: Vec<f64>) -> DirDeriv2Result {
    match class {
        SeqClass::Tight { value, spread, .. } => {
            DirDeriv2Result::Finite { value, uncertainty: spread }
        }
        SeqClass::Envelope { value, width, .. } => {
            DirDeriv2Result::Finite { value, uncertainty: width }
        }
        SeqClass::Divergent { sign } => DirDeriv2Result::Divergent { sign },
        SeqClass::NoLimit { amplitude } => DirDeriv2Result::NoLimit { amplitude, trace: qs },
    }
}

enum Quotients {
    Full(Vec<f64>),
    EarlyDivergent { sign: i8 },
}

/// Collects the difference quotients `2 [phi(x + t u(t)) - phi0 - t lin(t)] / t^2`
/// over the geometric grid, where `u(t)` and the linear term may depend on `t`.
fn collect_quotients(
    ast: &Expr,
    x: &Point,
    phi0: f64,
    cfg: &DerivConfig,
    mut ray: impl FnMut(f64) -> (Vec<f64>, f64),
) -> Result<Quotients, DerivError> {
    let mut qs = Vec::with_capacity(cfg.max_steps);
    let mut t = cfg.t0;
    for _ in 0..cfg.max_steps {
        let (u, lin) = ray(t);
        let xt = x.offset(&u, t);
        let phi_t = expr::eval(ast, &xt)?;
        let q = 2.0 * (phi_t - phi0 - t * lin) / (t * t);
        if !q.is_finite() {
            return Ok(Quotients::EarlyDivergent { sign: if q >= 0.0 { 1 } else { -1 } });
        }
        qs.push(q);
        t *= cfg.rho;
    }
    Ok(Quotients::Full(qs))
}

/// Second-order directional derivative as a numerical limit over the geometric
/// step grid, with convergence diagnostics.
pub fn second_dp(
    ast: &Expr,
    x: &Point,
    d: &[f64],
    cfg: &DerivConfig,
) -> Result<DirDeriv2Result, DerivError> {
    cfg.validate()?;
    check_direction(x, d)?;
    if linalg::norm(d) == 0.0 {
        return Err(DerivError::ZeroDirection);
    }
    let phi0 = expr::eval(ast, x)?;
    let g1 = dir_deriv1(ast, x, d)?;
    let qs = collect_quotients(ast, x, phi0, cfg, |_| (d.to_vec(), g1))?;
    match qs {
        Quotients::EarlyDivergent { sign } => Ok(DirDeriv2Result::Divergent { sign }),
        Quotients::Full(qs) => {
            let class = classify(&qs, cfg);
            Ok(to_result(class, qs))
        }
    }
}

/// Probe offsets for the truncated-Taylor fast path.
const AD_PROBES: [f64; 3] = [1e-4, 5e-5, 2.5e-5];

/// Fast path for rays that are twice differentiable at `t = 0+`: second-order
/// jet evaluation at small positive probes with extrapolation to zero. Returns
/// `None` when a kink or branch boundary lies inside the probe range, or when
/// the probes disagree about the extrapolated value.
pub fn second_ad(ast: &Expr, x: &Point, d: &[f64]) -> Result<Option<f64>, DerivError> {
    check_direction(x, d)?;
    let (_, base_sig) = match expr::eval_with_signature(ast, x) {
        Ok(v) => v,
        Err(ExprError::Kink { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };

    let mut d2 = [0.0; 3];
    for (slot, &t) in d2.iter_mut().zip(AD_PROBES.iter()) {
        let mut sig = Vec::new();
        let jet = match expr::jet_along(ast, x, d, t, Some(&mut sig)) {
            Ok(j) => j,
            Err(ExprError::Kink { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        if sig != base_sig {
            return Ok(None);
        }
        *slot = jet.d2;
    }

    // Quadratic extrapolation to t = 0, cross-checked against the linear
    // extrapolation from the two smallest probes.
    let (t1, t2, t3) = (AD_PROBES[0], AD_PROBES[1], AD_PROBES[2]);
    let quad = d2[0] * (t2 * t3) / ((t1 - t2) * (t1 - t3))
        + d2[1] * (t1 * t3) / ((t2 - t1) * (t2 - t3))
        + d2[2] * (t1 * t2) / ((t3 - t1) * (t3 - t2));
    let lin = d2[2] + (d2[2] - d2[1]) * t3 / (t2 - t3);
    if !quad.is_finite() || (quad - lin).abs() > 1e-6 * quad.abs().max(1.0) {
        return Ok(None);
    }
    Ok(Some(quad))
}

/// Number of unit perturbation directions for the Hadamard-variant estimator.
const HADAMARD_PERTURBATIONS: usize = 8;
/// Fixed seed of the perturbation set; the estimator is deterministic.
const HADAMARD_SEED: u64 = 0x4841_4441_4d52_4432;

/// Agreement tolerance multiplier across perturbed sequences.
const HADAMARD_AGREE_FACTOR: f64 = 10.0;

/// Hadamard-variant second-order estimate: the difference quotient over a grid
/// of `(t_k, u_k)` with `u_k = d + sqrt(t_k) v` for fixed unit perturbations
/// `v`. Finite only when all perturbed sequences converge and agree with the
/// unperturbed one; disagreement while the unperturbed sequence converges
/// witnesses a directional limit that exists where the joint limit does not
/// stabilize at the achievable resolution.
pub fn hadamard_second_estimate(
    ast: &Expr,
    x: &Point,
    d: &[f64],
    cfg: &DerivConfig,
) -> Result<DirDeriv2Result, DerivError> {
    cfg.validate()?;
    check_direction(x, d)?;
    let n = d.len();
    if linalg::norm(d) == 0.0 {
        return Err(DerivError::ZeroDirection);
    }
    let phi0 = expr::eval(ast, x)?;
    let g = expr::grad(ast, x)?;
    let g1 = linalg::dot(&g, d);

    let mut stream = Stream::new(HADAMARD_SEED);
    let perturbations: Vec<Vec<f64>> = (0..HADAMARD_PERTURBATIONS)
        .map(|_| stream.unit_vector(n))
        .collect();

    // Unperturbed sequence first; its verdict anchors the result.
    let base_q = collect_quotients(ast, x, phi0, cfg, |_| (d.to_vec(), g1))?;
    let base_qs = match base_q {
        Quotients::EarlyDivergent { sign } => {
            return Ok(DirDeriv2Result::Divergent { sign });
        }
        Quotients::Full(qs) => qs,
    };
    let base_class = classify(&base_qs, cfg);
    let Some((_, base_unc, base_end)) = base_class.finite_value() else {
        return Ok(to_result(base_class, base_qs));
    };
    let base_value = aitken_refine(&base_qs, base_end, cfg.window);

    let mut worst_dev: f64 = 0.0;
    for v in &perturbations {
        let q = collect_quotients(ast, x, phi0, cfg, |t| {
            let delta = libm::sqrt(t);
            let u: Vec<f64> = d.iter().zip(v).map(|(&di, &vi)| di + delta * vi).collect();
            let lin = linalg::dot(&g, &u);
            (u, lin)
        })?;
        let qs = match q {
            Quotients::EarlyDivergent { .. } => {
                return Ok(DirDeriv2Result::NoLimit {
                    amplitude: f64::INFINITY,
                    trace: base_qs,
                });
            }
            Quotients::Full(qs) => qs,
        };
        let class = classify(&qs, cfg);
        let Some((_, _, end)) = class.finite_value() else {
            let amplitude = match &class {
                SeqClass::NoLimit { amplitude } => *amplitude,
                _ => spread(&qs[qs.len() - cfg.window..]),
            };
            return Ok(DirDeriv2Result::NoLimit { amplitude, trace: base_qs });
        };
        let value = aitken_refine(&qs, end, cfg.window);
        worst_dev = worst_dev.max((value - base_value).abs());
    }

    let tol_agree =
        HADAMARD_AGREE_FACTOR * (cfg.tol_abs + cfg.tol_rel * base_value.abs().max(1.0));
    if worst_dev <= tol_agree {
        Ok(DirDeriv2Result::Finite {
            value: base_value,
            uncertainty: base_unc.max(worst_dev),
        })
    } else {
        Ok(DirDeriv2Result::NoLimit { amplitude: worst_dev, trace: base_qs })
    }
}

/// Gradient stability probe outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub bounded: bool,
    pub modulus_estimate: f64,
}

const STABILITY_SEED: u64 = 0x5354_4142_4c45_5345;
const STABILITY_SAMPLES_PER_SHELL: usize = 16;
/// Blow-up factor between the outermost and innermost shells that flags an
/// unstable gradient.
const STABILITY_GROWTH: f64 = 10.0;

/// Samples `max ||grad phi(y) - grad phi(x)|| / ||y - x||` over shells of
/// shrinking radius. Bounded when the ratio plateaus; unbounded when it keeps
/// growing as the shells shrink.
pub fn gradient_stability_estimate(
    ast: &Expr,
    x: &Point,
    cfg: &DerivConfig,
) -> Result<StabilityReport, DerivError> {
    cfg.validate()?;
    let n = x.dim().max(ast.max_var());
    let g0 = expr::grad(ast, x)?;

    let mut shell_max: Vec<f64> = Vec::with_capacity(cfg.max_steps);
    let mut skipped = 0usize;
    let mut total = 0usize;
    let mut r = cfg.t0;
    for shell in 0..cfg.max_steps {
        let mut stream = Stream::derived(STABILITY_SEED, shell as u64);
        let mut worst: f64 = 0.0;
        let mut seen = false;
        for _ in 0..STABILITY_SAMPLES_PER_SHELL {
            total += 1;
            let u = stream.unit_vector(n);
            let y = x.offset(&u, r);
            match expr::grad(ast, &y) {
                Ok(gy) => {
                    let diff: Vec<f64> =
                        gy.iter().zip(&g0).map(|(a, b)| a - b).collect();
                    worst = worst.max(linalg::norm(&diff) / r);
                    seen = true;
                }
                Err(_) => skipped += 1,
            }
        }
        if seen {
            shell_max.push(worst);
        }
        r *= cfg.rho;
    }
    if skipped * 2 > total || shell_max.len() < 6 {
        return Err(DerivError::StabilityInconclusive { skipped, total });
    }

    let head = median(&shell_max[..3]);
    let tail = median(&shell_max[shell_max.len() - 3..]);
    let bounded = !(tail > STABILITY_GROWTH * head + cfg.tol_abs);
    let modulus_estimate = shell_max.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(StabilityReport { bounded, modulus_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use alloc::vec;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn oscillating_objective() -> Expr {
        parse_expr("if x1 != 0 then x1^(7/3)*sin(1/x1) + x2 else x2", 2).unwrap()
    }

    #[test]
    fn first_order_fixtures() {
        let g = parse_expr("x1^2 - x2", 2).unwrap();
        assert_eq!(dir_deriv1(&g, &pt(&[0.0, 0.0]), &[-1.0, 0.0]).unwrap(), 0.0);

        let f2 = parse_expr("x1", 2).unwrap();
        assert_eq!(dir_deriv1(&f2, &pt(&[0.0, 0.0]), &[-1.0, 0.0]).unwrap(), -1.0);

        let any = parse_expr("sin(x1)*x2", 2).unwrap();
        assert_eq!(dir_deriv1(&any, &pt(&[0.4, 0.8]), &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_constraint_curvature_is_exact() {
        let g = parse_expr("x1^2 - x2", 2).unwrap();
        let r = second_dp(&g, &pt(&[0.0, 0.0]), &[-1.0, 0.0], &DerivConfig::default()).unwrap();
        let (value, unc) = r.finite().expect("finite");
        assert!((value - 2.0).abs() <= 1e-9, "value {value}");
        assert!(unc <= 1e-9);
    }

    #[test]
    fn oscillating_term_converges_through_envelope() {
        // The quotient is 2 t^(1/3) sin(1/t): sign-oscillating with a shrinking
        // envelope, so the tight window never fires at default tolerances.
        let f1 = oscillating_objective();
        let r = second_dp(&f1, &pt(&[0.0, 0.0]), &[-1.0, 0.0], &DerivConfig::default()).unwrap();
        let (value, unc) = r.finite().expect("finite");
        assert!(value.abs() <= 1e-3, "value {value}");
        assert!(unc > 0.0 && unc <= 2e-3, "uncertainty {unc}");
    }

    #[test]
    fn signed_parabola_has_negative_curvature_on_the_left() {
        let phi = parse_expr("if x1 >= 0 then x1^2 else -(x1^2)", 1).unwrap();
        let r = second_dp(&phi, &pt(&[0.0]), &[-1.0], &DerivConfig::default()).unwrap();
        let (value, unc) = r.finite().expect("finite");
        assert!((value + 2.0).abs() <= 1e-9, "value {value}");
        assert!(unc <= 1e-9);
    }

    #[test]
    fn pure_oscillation_has_no_limit() {
        // phi(t) = t^2 sin(1/t): the quotient is 2 sin(1/t).
        let phi = parse_expr("if x1 != 0 then x1^2*sin(1/x1) else 0", 1).unwrap();
        let r = second_dp(&phi, &pt(&[0.0]), &[1.0], &DerivConfig::default()).unwrap();
        match r {
            DirDeriv2Result::NoLimit { amplitude, trace } => {
                assert!(amplitude > 1.0, "amplitude {amplitude}");
                assert!(trace.len() >= DerivConfig::default().window);
            }
            other => panic!("expected no limit, got {other:?}"),
        }
    }

    #[test]
    fn super_quadratic_rate_diverges() {
        let phi = parse_expr("x1^(4/3)", 1).unwrap();
        let r = second_dp(&phi, &pt(&[0.0]), &[1.0], &DerivConfig::default()).unwrap();
        assert_eq!(r, DirDeriv2Result::Divergent { sign: 1 });
        let neg = parse_expr("-x1^(4/3)", 1).unwrap();
        // Grammar note: -x1^(4/3) is (-x1)^(4/3); along +1 that is (-t)^(4/3) = t^(4/3).
        let r = second_dp(&neg, &pt(&[0.0]), &[1.0], &DerivConfig::default()).unwrap();
        assert_eq!(r, DirDeriv2Result::Divergent { sign: 1 });
    }

    #[test]
    fn zero_direction_rejected() {
        let phi = parse_expr("x1^2", 1).unwrap();
        assert!(matches!(
            second_dp(&phi, &pt(&[0.0]), &[0.0], &DerivConfig::default()),
            Err(DerivError::ZeroDirection)
        ));
    }

    #[test]
    fn jet_fast_path_fixtures() {
        let sq = parse_expr("x1^2", 1).unwrap();
        let v = second_ad(&sq, &pt(&[0.0]), &[1.0]).unwrap().expect("smooth");
        assert!((v - 2.0).abs() <= 1e-9);

        let lin = parse_expr("3*x1 - 2*x2", 2).unwrap();
        let v = second_ad(&lin, &pt(&[0.3, 0.4]), &[1.0, -0.5]).unwrap().expect("smooth");
        assert!(v.abs() <= 1e-12);

        // Matches the limit estimator on a polynomial ray.
        let g = parse_expr("x1^2 - x2", 2).unwrap();
        for d1 in [-1.0, -0.6, 0.8] {
            let d = [d1, 0.0];
            let ad = second_ad(&g, &pt(&[0.0, 0.0]), &d).unwrap().expect("smooth");
            let dp = second_dp(&g, &pt(&[0.0, 0.0]), &d, &DerivConfig::default())
                .unwrap()
                .finite()
                .unwrap()
                .0;
            assert!((ad - 2.0 * d1 * d1).abs() <= 1e-9);
            assert!((ad - dp).abs() <= 1e-9);
        }
    }

    #[test]
    fn jet_fast_path_detects_branch_boundary() {
        let f1 = oscillating_objective();
        // The predicate x1 != 0 flips between t = 0 and the probes.
        assert_eq!(second_ad(&f1, &pt(&[0.0, 0.0]), &[-1.0, 0.0]).unwrap(), None);
    }

    #[test]
    fn hadamard_agrees_for_smooth_functions() {
        let g = parse_expr("x1^2 - x2", 2).unwrap();
        let r =
            hadamard_second_estimate(&g, &pt(&[0.0, 0.0]), &[-1.0, 0.0], &DerivConfig::default())
                .unwrap();
        let (value, _) = r.finite().expect("finite");
        assert!((value - 2.0).abs() <= 1e-6, "value {value}");

        let lin = parse_expr("x1 + x2", 2).unwrap();
        let r =
            hadamard_second_estimate(&lin, &pt(&[0.0, 0.0]), &[1.0, 0.0], &DerivConfig::default())
                .unwrap();
        let (value, _) = r.finite().expect("finite");
        assert!(value.abs() <= 1e-9);
    }

    #[test]
    fn hadamard_detects_unstable_gradient_term() {
        let f1 = oscillating_objective();
        let r =
            hadamard_second_estimate(&f1, &pt(&[0.0, 0.0]), &[-1.0, 0.0], &DerivConfig::default())
                .unwrap();
        assert!(
            matches!(r, DirDeriv2Result::NoLimit { .. }),
            "expected no joint limit, got {r:?}"
        );
    }

    #[test]
    fn stability_probe_fixtures() {
        let cfg = DerivConfig::default();

        let sq = parse_expr("x1^2", 1).unwrap();
        let rep = gradient_stability_estimate(&sq, &pt(&[0.0]), &cfg).unwrap();
        assert!(rep.bounded);
        assert!((rep.modulus_estimate - 2.0).abs() <= 1e-9);

        let lin = parse_expr("x1 - x2", 2).unwrap();
        let rep = gradient_stability_estimate(&lin, &pt(&[0.2, 0.1]), &cfg).unwrap();
        assert!(rep.bounded);
        assert!(rep.modulus_estimate <= 1e-12);

        let f1 = oscillating_objective();
        let rep = gradient_stability_estimate(&f1, &pt(&[0.0, 0.0]), &cfg).unwrap();
        assert!(!rep.bounded, "modulus {}", rep.modulus_estimate);
    }

    #[test]
    fn classifier_handles_exact_constant() {
        let cfg = DerivConfig::default();
        let qs = vec![5.0; cfg.max_steps];
        match classify(&qs, &cfg) {
            SeqClass::Tight { value, spread, end } => {
                assert_eq!(value, 5.0);
                assert_eq!(spread, 0.0);
                assert_eq!(end, cfg.max_steps - 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn aitken_recovers_geometric_limit() {
        // m_b = 3 + 2 r^k exactly.
        let cfg = DerivConfig::default();
        let qs: Vec<f64> = (0..cfg.max_steps)
            .map(|k| 3.0 + 2.0 * libm::pow(0.7, k as f64))
            .collect();
        let v = aitken_refine(&qs, qs.len() - 1, cfg.window);
        assert!((v - 3.0).abs() <= 1e-9, "refined {v}");
    }
}
