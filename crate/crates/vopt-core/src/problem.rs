//! Shared domain types: evaluation points and the constrained vector
//! optimization problem `min f(x) s.t. g_i(x) <= 0`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;

/// A point in problem space: finite coordinates, length matching the owning
/// problem's dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, rejecting NaN/Inf coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self, PointError> {
        if let Some(&bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(PointError::NonFinite(bad));
        }
        Ok(Point(coords))
    }

    /// Internal constructor for derived points whose coordinates are already
    /// controlled by the caller.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The point `self + t * d`.
    pub fn offset(&self, d: &[f64], t: f64) -> Point {
        Point(self.0.iter().zip(d).map(|(&x, &di)| x + t * di).collect())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointError {
    NonFinite(f64),
}

impl fmt::Display for PointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointError::NonFinite(v) => write!(f, "non-finite coordinate {v}"),
        }
    }
}

impl core::error::Error for PointError {}

/// A constrained vector optimization problem: minimize the objective vector
/// componentwise over `{x : g_i(x) <= 0}`, with a search box standing in for
/// the open ambient set.
#[derive(Debug, Clone)]
pub struct Problem {
    n: usize,
    objectives: Vec<Expr>,
    constraints: Vec<Expr>,
    /// Per-coordinate `[lo, hi]` sampling bounds.
    search_box: Vec<(f64, f64)>,
    /// Invexity kernels in variables `y1..yn`, when supplied.
    eta: Option<Vec<Expr>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    NoObjectives,
    BadBox { index: usize },
    BoxDimension { expected: usize, got: usize },
    VariableOutOfRange { what: String, max_var: usize, n: usize },
    EtaDimension { expected: usize, got: usize },
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::NoObjectives => write!(f, "problem has no objectives"),
            ProblemError::BadBox { index } => {
                write!(f, "box interval {index} is empty or non-finite")
            }
            ProblemError::BoxDimension { expected, got } => {
                write!(f, "box has {got} intervals, expected {expected}")
            }
            ProblemError::VariableOutOfRange { what, max_var, n } => {
                write!(f, "{what} references x{max_var}, beyond dimension n={n}")
            }
            ProblemError::EtaDimension { expected, got } => {
                write!(f, "eta has {got} components, expected {expected}")
            }
        }
    }
}

impl core::error::Error for ProblemError {}

impl Problem {
    pub fn new(
        n: usize,
        objectives: Vec<Expr>,
        constraints: Vec<Expr>,
        search_box: Vec<(f64, f64)>,
    ) -> Result<Self, ProblemError> {
        if objectives.is_empty() {
            return Err(ProblemError::NoObjectives);
        }
        if search_box.len() != n {
            return Err(ProblemError::BoxDimension { expected: n, got: search_box.len() });
        }
        for (i, &(lo, hi)) in search_box.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ProblemError::BadBox { index: i });
            }
        }
        for (what, e) in objectives
            .iter()
            .enumerate()
            .map(|(j, e)| (alloc::format!("objective {}", j + 1), e))
            .chain(
                constraints
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (alloc::format!("constraint {}", i + 1), e)),
            )
        {
            if e.max_var() > n {
                return Err(ProblemError::VariableOutOfRange { what, max_var: e.max_var(), n });
            }
        }
        Ok(Problem { n, objectives, constraints, search_box, eta: None })
    }

    pub fn with_eta(mut self, eta: Vec<Expr>) -> Result<Self, ProblemError> {
        if eta.len() != self.n {
            return Err(ProblemError::EtaDimension { expected: self.n, got: eta.len() });
        }
        self.eta = Some(eta);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of objectives `p`.
    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    /// Number of constraints `m`.
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objectives(&self) -> &[Expr] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn objective(&self, j: usize) -> &Expr {
        &self.objectives[j]
    }

    pub fn constraint(&self, i: usize) -> &Expr {
        &self.constraints[i]
    }

    pub fn search_box(&self) -> &[(f64, f64)] {
        &self.search_box
    }

    pub fn eta(&self) -> Option<&[Expr]> {
        self.eta.as_deref()
    }

    pub fn box_contains_interior(&self, x: &Point) -> bool {
        x.dim() == self.n
            && x.coords()
                .iter()
                .zip(&self.search_box)
                .all(|(&c, &(lo, hi))| lo < c && c < hi)
    }
}
