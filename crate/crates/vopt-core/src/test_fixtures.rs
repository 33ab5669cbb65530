//! Problem fixtures reused across module tests: a piecewise-smooth problem
//! with an oscillating objective term, a linear bi-objective problem, and a
//! scalar cubic whose constraint is quasiinvex but not quasiconvex at zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::parse_expr;
use crate::problem::{Point, Problem};

pub(crate) fn pt(coords: &[f64]) -> Point {
    Point::new(coords.to_vec()).unwrap()
}

/// n=2, f1 piecewise with an oscillating term, f2 = x1, g = x1^2 - x2.
pub(crate) fn oscillating_problem() -> Problem {
    let f1 = parse_expr("if x1 != 0 then x1^(7/3)*sin(1/x1) + x2 else x2", 2).unwrap();
    let f2 = parse_expr("x1", 2).unwrap();
    let g = parse_expr("x1^2 - x2", 2).unwrap();
    Problem::new(2, vec![f1, f2], vec![g], vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap()
}

/// Linear bi-objective problem: f = (x1, x2), g = -x2.
pub(crate) fn linear_biobjective() -> Problem {
    let f1 = parse_expr("x1", 2).unwrap();
    let f2 = parse_expr("x2", 2).unwrap();
    let g = parse_expr("-x2", 2).unwrap();
    Problem::new(2, vec![f1, f2], vec![g], vec![(-2.0, 2.0), (-2.0, 2.0)]).unwrap()
}

/// Scalar problem f = -x^3 over {g = -x^3 + x^2 <= 0}; both gradients vanish
/// at the origin.
pub(crate) fn cubic_gap_problem() -> Problem {
    let f = parse_expr("-(x1^3)", 1).unwrap();
    let g = parse_expr("-(x1^3) + x1^2", 1).unwrap();
    Problem::new(1, vec![f], vec![g], vec![(-2.0, 2.0)]).unwrap()
}

/// Directions as plain vectors.
pub(crate) fn v(coords: &[f64]) -> Vec<f64> {
    coords.to_vec()
}
