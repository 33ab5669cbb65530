//! Real-valued math expressions in variables `x1..xn`: parsing, printing,
//! evaluation, and forward-mode differentiation.
//!
//! Expressions support piecewise definitions (`if .. then .. else ..`) and
//! rational-exponent powers with odd denominators, which get real odd-root
//! semantics so that terms like `x1^(7/3)` stay defined for negative bases.

mod eval;
pub(crate) mod num;
mod parse;
mod print;
#[cfg(test)]
mod tests;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use eval::{eval, eval_with_signature, fd_gradient, grad, BranchSignature};
pub(crate) use eval::jet_along;
pub(crate) use num::Jet2;
pub use parse::parse_expr;

use crate::problem::Point;

/// Unary operation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Abs,
    Sqrt,
    Sign,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Abs => "abs",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sign => "sign",
        }
    }
}

/// Binary operation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Comparison operators usable in conditional predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// Exact comparison on computed doubles; no epsilon by design so that
    /// predicates like `x1 != 0` match piecewise definitions literally.
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

/// A comparison of two sub-expressions, used as a conditional predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub op: CmpOp,
    pub lhs: Expr,
    pub rhs: Expr,
}

/// Expression tree. Variables are zero-based internally and print as `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `base^(p/q)` with odd positive `q`: evaluates as `sign(v)^p * |v|^(p/q)`.
    RationalPow(Box<Expr>, i64, i64),
    Conditional(Box<Comparison>, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Largest variable index referenced, plus one (0 for constant expressions).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, c) => c.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
            Expr::RationalPow(c, _, _) => c.max_var(),
            Expr::Conditional(p, a, b) => p
                .lhs
                .max_var()
                .max(p.rhs.max_var())
                .max(a.max_var())
                .max(b.max_var()),
        }
    }
}

/// Re-parseable text form of the expression.
pub fn print_expr(e: &Expr) -> String {
    use alloc::string::ToString;
    e.to_string()
}

/// Domain-error kinds raised during evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainErrorKind {
    LogNonPositive(f64),
    SqrtNegative(f64),
    DivisionByZero,
    /// Negative base raised to a non-integer power without odd-root semantics.
    NegativeBaseFractionalPow { base: f64, exponent: f64 },
    ZeroToNonPositivePower(f64),
    NanProduced,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainErrorKind::LogNonPositive(v) => write!(f, "log of non-positive value {v}"),
            DomainErrorKind::SqrtNegative(v) => write!(f, "sqrt of negative value {v}"),
            DomainErrorKind::DivisionByZero => write!(f, "division by zero"),
            DomainErrorKind::NegativeBaseFractionalPow { base, exponent } => {
                write!(f, "negative base {base} raised to non-integer power {exponent}")
            }
            DomainErrorKind::ZeroToNonPositivePower(e) => {
                write!(f, "zero raised to non-positive power {e}")
            }
            DomainErrorKind::NanProduced => write!(f, "NaN produced"),
        }
    }
}

/// Errors from parsing, evaluation, or differentiation.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprError {
    /// Syntax error at a byte offset of the input text.
    Syntax { offset: usize, message: String },
    UnknownIdentifier { offset: usize, name: String },
    VariableOutOfRange { offset: usize, index: usize, n: usize },
    /// Evaluation left the function's domain; `node` is the printed offending
    /// sub-expression.
    Domain { node: String, kind: DomainErrorKind },
    /// A non-differentiable node was hit exactly at its kink.
    Kink { node: String },
    /// Input point has the wrong dimension or non-finite coordinates.
    BadPoint { expected: usize, got: usize },
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Syntax { offset, message } => {
                write!(f, "syntax error at byte {offset}: {message}")
            }
            ExprError::UnknownIdentifier { offset, name } => {
                write!(f, "unknown identifier `{name}` at byte {offset}")
            }
            ExprError::VariableOutOfRange { offset, index, n } => {
                write!(f, "variable x{index} at byte {offset} exceeds dimension n={n}")
            }
            ExprError::Domain { node, kind } => write!(f, "domain error in `{node}`: {kind}"),
            ExprError::Kink { node } => {
                write!(f, "non-differentiable point hit at kink of `{node}`")
            }
            ExprError::BadPoint { expected, got } => {
                write!(f, "point has dimension {got}, expected {expected} finite coordinates")
            }
        }
    }
}

impl core::error::Error for ExprError {}

/// Evaluates all component expressions at a point.
pub fn eval_all(exprs: &[Expr], x: &Point) -> Result<Vec<f64>, ExprError> {
    exprs.iter().map(|e| eval(e, x)).collect()
}
