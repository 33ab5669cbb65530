//! Generic tree-walking evaluator over the numeric tower, plus the public
//! evaluation and differentiation entry points.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::num::{sign_of, Dual, Num, NumFault};
use super::{BinaryOp, Expr, ExprError, UnaryOp};
use crate::problem::Point;

/// Discrete choices taken during one evaluation: conditional branches and the
/// sign of arguments at non-smooth nodes, in tree-walk order. Two evaluations
/// that select different branches produce different signatures.
pub type BranchSignature = Vec<i8>;

fn fault_to_error(fault: NumFault, node: &Expr) -> ExprError {
    match fault {
        NumFault::Domain(kind) => ExprError::Domain { node: node.to_string(), kind },
        NumFault::Kink => ExprError::Kink { node: node.to_string() },
    }
}

pub(crate) struct EvalCtx<'a, N> {
    vars: &'a [N],
    signature: Option<&'a mut BranchSignature>,
}

impl<'a, N> EvalCtx<'a, N> {
    fn record(&mut self, choice: i8) {
        if let Some(sig) = self.signature.as_deref_mut() {
            sig.push(choice);
        }
    }
}

pub(crate) fn eval_num<N: Num>(e: &Expr, ctx: &mut EvalCtx<'_, N>) -> Result<N, ExprError> {
    let out = match e {
        Expr::Const(c) => N::constant(*c),
        Expr::Var(i) => ctx.vars[*i].clone(),
        Expr::Unary(op, c) => {
            let v = eval_num(c, ctx)?;
            match op {
                UnaryOp::Neg => v.neg(),
                UnaryOp::Sin => v.sin(),
                UnaryOp::Cos => v.cos(),
                UnaryOp::Tan => v.tan(),
                UnaryOp::Exp => v.exp(),
                UnaryOp::Log => v.log().map_err(|f| fault_to_error(f, e))?,
                UnaryOp::Abs => {
                    ctx.record(sign_of(v.primal()) as i8);
                    v.abs().map_err(|f| fault_to_error(f, e))?
                }
                UnaryOp::Sqrt => v.sqrt().map_err(|f| fault_to_error(f, e))?,
                UnaryOp::Sign => {
                    ctx.record(sign_of(v.primal()) as i8);
                    v.sign().map_err(|f| fault_to_error(f, e))?
                }
            }
        }
        Expr::Binary(op, a, b) => {
            let va = eval_num(a, ctx)?;
            let vb = eval_num(b, ctx)?;
            match op {
                BinaryOp::Add => va.add(&vb),
                BinaryOp::Sub => va.sub(&vb),
                BinaryOp::Mul => va.mul(&vb),
                BinaryOp::Div => va.div(&vb).map_err(|f| fault_to_error(f, e))?,
                BinaryOp::Pow => va.pow(&vb).map_err(|f| fault_to_error(f, e))?,
            }
        }
        Expr::RationalPow(c, p, q) => {
            let v = eval_num(c, ctx)?;
            ctx.record(sign_of(v.primal()) as i8);
            v.rational_pow(*p, *q).map_err(|f| fault_to_error(f, e))?
        }
        Expr::Conditional(pred, then_e, else_e) => {
            let lhs = eval_num(&pred.lhs, ctx)?;
            let rhs = eval_num(&pred.rhs, ctx)?;
            let taken = pred.op.holds(lhs.primal(), rhs.primal());
            ctx.record(taken as i8);
            if taken {
                eval_num(then_e, ctx)?
            } else {
                eval_num(else_e, ctx)?
            }
        }
    };
    if out.primal().is_nan() {
        return Err(ExprError::Domain {
            node: e.to_string(),
            kind: super::DomainErrorKind::NanProduced,
        });
    }
    Ok(out)
}

fn check_point(e: &Expr, x: &Point) -> Result<(), ExprError> {
    let need = e.max_var();
    if x.coords().len() < need {
        return Err(ExprError::BadPoint { expected: need, got: x.coords().len() });
    }
    Ok(())
}

/// Evaluates the expression at `x`. NaN results are reported as domain errors,
/// never returned.
pub fn eval(e: &Expr, x: &Point) -> Result<f64, ExprError> {
    check_point(e, x)?;
    let mut ctx = EvalCtx { vars: x.coords(), signature: None };
    eval_num(e, &mut ctx)
}

/// Evaluates and records the discrete branch choices taken along the way.
pub fn eval_with_signature(e: &Expr, x: &Point) -> Result<(f64, BranchSignature), ExprError> {
    check_point(e, x)?;
    let mut sig = Vec::new();
    let mut ctx = EvalCtx { vars: x.coords(), signature: Some(&mut sig) };
    let v = eval_num(e, &mut ctx)?;
    Ok((v, sig))
}

/// Exact gradient of the branch-selected composite via forward-mode dual numbers.
/// Conditionals differentiate only the branch taken at `x`; hitting a kink
/// (abs/sign at 0, rational powers with exponent below 1 at 0) is an error.
pub fn grad(e: &Expr, x: &Point) -> Result<Vec<f64>, ExprError> {
    check_point(e, x)?;
    let n = x.coords().len();
    let mut out = vec![0.0; n];
    let mut seeds: Vec<Dual> = x.coords().iter().map(|&v| Dual::seed(v, 0.0)).collect();
    for k in 0..n {
        seeds[k].d = 1.0;
        let mut ctx = EvalCtx { vars: &seeds, signature: None };
        let r = eval_num(e, &mut ctx)?;
        if r.d.is_nan() {
            return Err(ExprError::Domain {
                node: e.to_string(),
                kind: super::DomainErrorKind::NanProduced,
            });
        }
        out[k] = r.d;
        seeds[k].d = 0.0;
    }
    Ok(out)
}

/// Directional first/second-order jet of `t -> e(x + t d)` at `t`, or a kink
/// fault for the caller to interpret.
pub(crate) fn jet_along(
    e: &Expr,
    x: &Point,
    d: &[f64],
    t: f64,
    sig: Option<&mut BranchSignature>,
) -> Result<super::Jet2, ExprError> {
    check_point(e, x)?;
    let seeds: Vec<super::Jet2> = x
        .coords()
        .iter()
        .zip(d)
        .map(|(&xi, &di)| super::Jet2::seed(xi + t * di, di))
        .collect();
    let mut ctx = EvalCtx { vars: &seeds, signature: sig };
    eval_num(e, &mut ctx)
}

/// Central-difference gradient approximation, one coordinate at a time.
pub fn fd_gradient(e: &Expr, x: &Point, h: f64) -> Result<Vec<f64>, ExprError> {
    check_point(e, x)?;
    let n = x.coords().len();
    let mut out = vec![0.0; n];
    let mut coords = x.coords().to_vec();
    for k in 0..n {
        let base = coords[k];
        coords[k] = base + h;
        let fp = eval(e, &Point::new_unchecked(coords.clone()))?;
        coords[k] = base - h;
        let fm = eval(e, &Point::new_unchecked(coords.clone()))?;
        coords[k] = base;
        out[k] = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}
