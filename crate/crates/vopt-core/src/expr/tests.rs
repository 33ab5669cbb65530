use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec;

use super::*;
use crate::problem::Point;

fn pt(coords: &[f64]) -> Point {
    Point::new(coords.to_vec()).unwrap()
}

/// Example-style piecewise objective: `x1^(7/3) sin(1/x1) + x2` away from
/// `x1 = 0`, `x2` on the axis.
pub(crate) fn oscillating_objective() -> Expr {
    parse_expr("if x1 != 0 then x1^(7/3)*sin(1/x1) + x2 else x2", 2).unwrap()
}

#[test]
fn parse_basic_structure() {
    let e = parse_expr("x1^2 - x2", 2).unwrap();
    let want = Expr::Binary(
        BinaryOp::Sub,
        Box::new(Expr::Binary(
            BinaryOp::Pow,
            Box::new(Expr::Var(0)),
            Box::new(Expr::Const(2.0)),
        )),
        Box::new(Expr::Var(1)),
    );
    assert_eq!(e, want);
}

#[test]
fn parse_piecewise_with_rational_pow() {
    let e = oscillating_objective();
    match &e {
        Expr::Conditional(pred, then_e, else_e) => {
            assert_eq!(pred.op, CmpOp::Ne);
            assert_eq!(**else_e, Expr::Var(1));
            // then-branch contains RationalPow(x1, 7, 3)
            fn has_rp(e: &Expr) -> bool {
                match e {
                    Expr::RationalPow(c, 7, 3) => **c == Expr::Var(0),
                    Expr::Binary(_, a, b) => has_rp(a) || has_rp(b),
                    Expr::Unary(_, c) => has_rp(c),
                    _ => false,
                }
            }
            assert!(has_rp(then_e));
        }
        other => panic!("expected conditional, got {other:?}"),
    }
}

#[test]
fn even_denominator_rational_is_plain_power() {
    // (1/2) is not an odd-root literal; it stays an ordinary quotient exponent
    // and is undefined for negative bases at evaluation time.
    let e = parse_expr("x1^(1/2)", 1).unwrap();
    match &e {
        Expr::Binary(BinaryOp::Pow, _, expo) => {
            assert!(matches!(**expo, Expr::Binary(BinaryOp::Div, _, _)));
        }
        other => panic!("expected pow, got {other:?}"),
    }
    assert_eq!(eval(&e, &pt(&[4.0])).unwrap(), 2.0);
    assert!(matches!(
        eval(&e, &pt(&[-1.0])),
        Err(ExprError::Domain { .. })
    ));
}

#[test]
fn parse_errors() {
    assert!(matches!(
        parse_expr("x3 + 1", 2),
        Err(ExprError::VariableOutOfRange { index: 3, n: 2, .. })
    ));
    assert!(matches!(
        parse_expr("foo(x1)", 1),
        Err(ExprError::UnknownIdentifier { .. })
    ));
    match parse_expr("x1 + ", 1) {
        Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 5),
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn eval_fixtures() {
    let g = parse_expr("x1^2 - x2", 2).unwrap();
    assert_eq!(eval(&g, &pt(&[0.0, 0.0])).unwrap(), 0.0);

    let f1 = oscillating_objective();
    assert_eq!(eval(&f1, &pt(&[0.0, 0.5])).unwrap(), 0.5);

    let cube_root = parse_expr("x1^(1/3)", 1).unwrap();
    assert_eq!(eval(&cube_root, &pt(&[-8.0])).unwrap(), -2.0);
}

#[test]
fn eval_domain_errors() {
    let log = parse_expr("log(x1)", 1).unwrap();
    assert!(matches!(eval(&log, &pt(&[-1.0])), Err(ExprError::Domain { .. })));
    let div = parse_expr("1/x1", 1).unwrap();
    assert!(matches!(eval(&div, &pt(&[0.0])), Err(ExprError::Domain { .. })));
    // 0^0 via integer semantics is 1; 0^(-1) is a domain error.
    let z = parse_expr("x1^0", 1).unwrap();
    assert_eq!(eval(&z, &pt(&[0.0])).unwrap(), 1.0);
    let zn = parse_expr("x1^-1", 1).unwrap();
    assert!(matches!(eval(&zn, &pt(&[0.0])), Err(ExprError::Domain { .. })));
}

#[test]
fn grad_fixtures() {
    let g = parse_expr("x1^2 - x2", 2).unwrap();
    assert_eq!(grad(&g, &pt(&[0.0, 0.0])).unwrap(), vec![0.0, -1.0]);

    // Else-branch `x2` is the one differentiated on the axis.
    let f1 = oscillating_objective();
    assert_eq!(grad(&f1, &pt(&[0.0, 0.0])).unwrap(), vec![0.0, 1.0]);

    let f2 = parse_expr("x1", 2).unwrap();
    assert_eq!(grad(&f2, &pt(&[0.7, -0.3])).unwrap(), vec![1.0, 0.0]);
}

#[test]
fn grad_off_axis_matches_closed_form() {
    // d/dx1 [x1^(7/3) sin(1/x1)] = (7/3) x1^(4/3) sin(1/x1) - x1^(1/3) cos(1/x1)
    let f1 = oscillating_objective();
    let x1 = -0.37;
    let g = grad(&f1, &pt(&[x1, 0.2])).unwrap();
    let m = libm::pow(x1.abs(), 4.0 / 3.0); // even numerator: positive
    let c = -libm::pow(x1.abs(), 1.0 / 3.0); // odd root of negative
    let want = 7.0 / 3.0 * m * libm::sin(1.0 / x1) - c * libm::cos(1.0 / x1);
    assert!((g[0] - want).abs() <= 1e-12 * want.abs().max(1.0), "{} vs {want}", g[0]);
    assert_eq!(g[1], 1.0);
}

#[test]
fn grad_kink_errors() {
    let a = parse_expr("abs(x1)", 1).unwrap();
    assert!(matches!(grad(&a, &pt(&[0.0])), Err(ExprError::Kink { .. })));
    let s = parse_expr("sign(x1)", 1).unwrap();
    assert!(matches!(grad(&s, &pt(&[0.0])), Err(ExprError::Kink { .. })));
    let r = parse_expr("x1^(1/3)", 1).unwrap();
    assert!(matches!(grad(&r, &pt(&[0.0])), Err(ExprError::Kink { .. })));
    // Exponent >= 1 at zero is differentiable.
    let ok = parse_expr("x1^(7/3)", 1).unwrap();
    assert_eq!(grad(&ok, &pt(&[0.0])).unwrap(), vec![0.0]);
}

#[test]
fn fd_gradient_fixtures() {
    let sq = parse_expr("x1^2", 1).unwrap();
    let d = fd_gradient(&sq, &pt(&[1.0]), 1e-5).unwrap();
    assert!((d[0] - 2.0).abs() < 1e-9);

    let s = parse_expr("sin(x1)", 1).unwrap();
    let d = fd_gradient(&s, &pt(&[0.0]), 1e-5).unwrap();
    assert!((d[0] - 1.0).abs() < 1e-9);

    // Smooth region of the piecewise objective.
    let f1 = oscillating_objective();
    let x = pt(&[0.3, 0.0]);
    let ad = grad(&f1, &x).unwrap();
    let fd = fd_gradient(&f1, &x, 1e-6).unwrap();
    for (a, b) in ad.iter().zip(&fd) {
        assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn print_round_trips() {
    let corpus = [
        "x1^2 - x2",
        "if x1 != 0 then x1^(7/3)*sin(1/x1) + x2 else x2",
        "x1",
        "-x2",
        "x1^(7/3)",
        "x1 - -x2",
        "(x1 + x2)^3",
        "sin(x1)*cos(x2) - exp(x1/(1 + x2^2))",
        "abs(x1) + sqrt(x2)*sign(x1)",
        "if x1 <= x2 then x1 else x2",
        "2/x1^2",
        "-(x1^2)",
        "x1^(1/2)",
        "1.5e-3*x1 + 0.25",
    ];
    for text in corpus {
        let a = parse_expr(text, 2).unwrap();
        let printed = a.to_string();
        let b = parse_expr(&printed, 2)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        assert_eq!(a, b, "round trip failed for `{text}` -> `{printed}`");
    }
}

#[test]
fn rational_pow_prints_as_fraction() {
    let e = parse_expr("x1^(7/3)", 1).unwrap();
    assert_eq!(e.to_string(), "x1^(7/3)");
}

#[test]
fn negated_base_power_follows_grammar() {
    // Per the grammar, `-x1^2` is `(-x1)^2`: the atom consumes the minus.
    let e = parse_expr("-x1^2", 1).unwrap();
    assert_eq!(eval(&e, &pt(&[3.0])).unwrap(), 9.0);
    let roundtrip = parse_expr(&e.to_string(), 1).unwrap();
    assert_eq!(e, roundtrip);
}

#[test]
fn eval_is_deterministic() {
    let e = parse_expr("sin(x1)*exp(x2) - x1^(2/3)/(2 + cos(x2))", 2).unwrap();
    let x = pt(&[0.421, -1.77]);
    let v1 = eval(&e, &x).unwrap();
    let v2 = eval(&e, &x).unwrap();
    assert_eq!(v1.to_bits(), v2.to_bits());
    let g1 = grad(&e, &x).unwrap();
    let g2 = grad(&e, &x).unwrap();
    assert_eq!(g1, g2);
}

#[test]
fn odd_root_law_on_grid() {
    // eval(RationalPow(e, p, q)) = sign(v)^p |v|^(p/q), cross-checked against
    // cube/fifth-root identities.
    let cube = parse_expr("x1^(2/3)", 1).unwrap();
    let fifth = parse_expr("x1^(3/5)", 1).unwrap();
    let mut v = -2.0;
    while v <= 2.0 {
        if v != 0.0 {
            let c = eval(&cube, &pt(&[v])).unwrap();
            let croot = libm::cbrt(v);
            assert!((c - croot * croot).abs() < 1e-12 * c.abs().max(1.0));

            let q = eval(&fifth, &pt(&[v])).unwrap();
            let want = {
                let mag = libm::pow(v.abs(), 3.0 / 5.0);
                if v < 0.0 {
                    -mag
                } else {
                    mag
                }
            };
            assert!((q - want).abs() < 1e-12 * q.abs().max(1.0));
        }
        v += 0.25;
    }
}

#[test]
fn signature_distinguishes_branches() {
    let f1 = oscillating_objective();
    let (_, on_axis) = eval_with_signature(&f1, &pt(&[0.0, 0.3])).unwrap();
    let (_, off_axis) = eval_with_signature(&f1, &pt(&[0.2, 0.3])).unwrap();
    assert_ne!(on_axis, off_axis);
}
