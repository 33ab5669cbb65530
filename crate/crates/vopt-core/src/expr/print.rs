//! Minimal-parenthesis printer. Output re-parses to a structurally equal tree
//! for any tree the parser can produce.

use core::fmt;

use super::{BinaryOp, Comparison, Expr, UnaryOp};

/// Grammar production levels, loosest first. A fragment prints bare in a
/// context when its natural level is at least as tight as the context demands.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Top,
    Sum,
    Term,
    Factor,
    Atom,
}

/// The loosest grammar production that can produce this node without parens.
fn natural_level(e: &Expr) -> Level {
    match e {
        Expr::Conditional(..) => Level::Top,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => Level::Sum,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => Level::Term,
        Expr::Binary(BinaryOp::Pow, ..) | Expr::RationalPow(..) => Level::Factor,
        Expr::Const(_) | Expr::Var(_) | Expr::Unary(..) => Level::Atom,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, required: Level) -> fmt::Result {
    if natural_level(e) >= required {
        write_node(f, e)
    } else {
        write!(f, "(")?;
        write_node(f, e)?;
        write!(f, ")")
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => {
            if c.is_sign_negative() {
                // Not producible by the parser; value-preserving fallback.
                write!(f, "-{}", -c)
            } else {
                write!(f, "{c}")
            }
        }
        Expr::Var(i) => write!(f, "x{}", i + 1),
        Expr::Unary(UnaryOp::Neg, c) => {
            write!(f, "-")?;
            write_at(f, c, Level::Atom)
        }
        Expr::Unary(op, c) => {
            write!(f, "{}(", op.name())?;
            write_node(f, c)?;
            write!(f, ")")
        }
        Expr::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), a, b) => {
            write_at(f, a, Level::Sum)?;
            write!(f, " {} ", if *op == BinaryOp::Add { "+" } else { "-" })?;
            write_at(f, b, Level::Term)
        }
        Expr::Binary(op @ (BinaryOp::Mul | BinaryOp::Div), a, b) => {
            write_at(f, a, Level::Term)?;
            write!(f, " {} ", if *op == BinaryOp::Mul { "*" } else { "/" })?;
            write_at(f, b, Level::Factor)
        }
        Expr::Binary(BinaryOp::Pow, base, expo) => {
            write_at(f, base, Level::Atom)?;
            write!(f, "^")?;
            match expo.as_ref() {
                Expr::Const(c) if !c.is_sign_negative() && c.is_finite() => write!(f, "{c}"),
                other => write_at(f, other, Level::Atom),
            }
        }
        Expr::RationalPow(base, p, q) => {
            write_at(f, base, Level::Atom)?;
            write!(f, "^({p}/{q})")
        }
        Expr::Conditional(pred, a, b) => {
            write!(f, "if ")?;
            write_comparison(f, pred)?;
            write!(f, " then ")?;
            write_node(f, a)?;
            write!(f, " else ")?;
            write_node(f, b)
        }
    }
}

fn write_comparison(f: &mut fmt::Formatter<'_>, c: &Comparison) -> fmt::Result {
    write_at(f, &c.lhs, Level::Sum)?;
    write!(f, " {} ", c.op.symbol())?;
    write_at(f, &c.rhs, Level::Sum)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self)
    }
}
