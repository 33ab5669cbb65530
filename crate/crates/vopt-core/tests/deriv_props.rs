//! Property suites for the directional-derivative machinery: degree-2
//! homogeneity, the Taylor remainder, agreement between the jet fast path and
//! the limit estimator, and the Hadamard-implies-plain containment.
//!
//! The tight-agreement fixtures are sums of monomials of total degree 2..4
//! anchored at the origin: there the value and the first-order term vanish
//! exactly and even the ray coordinates `t * d_k` are exact, so the difference
//! quotients carry no floating-point noise and the exact second-order value
//! `2 * sum of degree-2 terms` serves as an independent oracle. The
//! homogeneity suite uses general anchors, where coordinate rounding caps the
//! achievable accuracy near `1e-7` relative; its tolerance is `1e-5`.

use vopt_core::deriv::{
    dir_deriv1, hadamard_second_estimate, second_ad, second_dp, DerivConfig, DirDeriv2Result,
};
use vopt_core::expr::{eval, grad, BinaryOp, Expr};
use vopt_core::rng::Stream;
use vopt_core::Point;

struct MonomialFixture {
    expr: Expr,
    base: Point,
    /// (coefficient, exponents) per term.
    terms: Vec<(f64, Vec<u32>)>,
}

impl MonomialFixture {
    /// Exact second-order directional derivative at the base point:
    /// `2 * sum over degree-2 terms of c * prod d^e`.
    fn exact_second(&self, d: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, exps) in &self.terms {
            let degree: u32 = exps.iter().sum();
            if degree == 2 {
                let mut m = *c;
                for (k, &e) in exps.iter().enumerate() {
                    for _ in 0..e {
                        m *= d[k];
                    }
                }
                acc += m;
            }
        }
        2.0 * acc
    }
}

fn shifted_var(k: usize, a: f64) -> Expr {
    Expr::Binary(
        BinaryOp::Sub,
        Box::new(Expr::Var(k)),
        Box::new(Expr::Const(a)),
    )
}

fn monomial_fixture(seed: u64, origin_anchor: bool) -> MonomialFixture {
    let mut s = Stream::new(seed);
    let n = 1 + (s.next_u64() % 3) as usize;
    let base: Vec<f64> = (0..n)
        .map(|_| if origin_anchor { 0.0 } else { s.uniform_in(-1.0, 1.0) })
        .collect();
    let n_terms = 2 + (s.next_u64() % 4) as usize;

    let mut terms = Vec::with_capacity(n_terms);
    let mut expr: Option<Expr> = None;
    for _ in 0..n_terms {
        let coef = {
            let mag = s.uniform_in(0.5, 2.0);
            if s.next_u64() % 2 == 0 {
                mag
            } else {
                -mag
            }
        };
        // Total degree 2..=4 spread over the variables.
        let degree = 2 + (s.next_u64() % 3) as u32;
        let mut exps = vec![0u32; n];
        for _ in 0..degree {
            let k = (s.next_u64() % n as u64) as usize;
            exps[k] += 1;
        }
        let mut term = Expr::Const(coef);
        for (k, &e) in exps.iter().enumerate() {
            if e == 1 {
                term = Expr::Binary(BinaryOp::Mul, Box::new(term), Box::new(shifted_var(k, base[k])));
            } else if e > 1 {
                let p = Expr::Binary(
                    BinaryOp::Pow,
                    Box::new(shifted_var(k, base[k])),
                    Box::new(Expr::Const(e as f64)),
                );
                term = Expr::Binary(BinaryOp::Mul, Box::new(term), Box::new(p));
            }
        }
        terms.push((coef, exps));
        expr = Some(match expr {
            None => term,
            Some(prev) => Expr::Binary(BinaryOp::Add, Box::new(prev), Box::new(term)),
        });
    }
    MonomialFixture {
        expr: expr.unwrap(),
        base: Point::new(base).unwrap(),
        terms,
    }
}

fn unit_direction(seed: u64, n: usize) -> Vec<f64> {
    Stream::new(seed).unit_vector(n)
}

#[test]
fn second_dp_matches_exact_oracle_on_100_fixtures() {
    let cfg = DerivConfig::default();
    for seed in 0..100u64 {
        let fx = monomial_fixture(seed, true);
        let d = unit_direction(seed ^ 0x5eed, fx.base.dim());
        let expected = fx.exact_second(&d);
        let got = second_dp(&fx.expr, &fx.base, &d, &cfg)
            .unwrap()
            .finite()
            .unwrap_or_else(|| panic!("seed {seed}: no finite limit"));
        assert!(
            (got.0 - expected).abs() <= 1e-7 * expected.abs().max(1.0),
            "seed {seed}: dp {} vs exact {expected}",
            got.0
        );
    }
}

#[test]
fn degree2_homogeneity_on_100_fixtures() {
    let cfg = DerivConfig::default();
    for seed in 0..100u64 {
        let fx = monomial_fixture(seed, false);
        let d = unit_direction(seed ^ 0xa1fa, fx.base.dim());
        let base_val = second_dp(&fx.expr, &fx.base, &d, &cfg).unwrap().finite();
        for alpha in [0.5, 2.0, 3.0] {
            let scaled: Vec<f64> = d.iter().map(|v| alpha * v).collect();
            let scaled_val = second_dp(&fx.expr, &fx.base, &scaled, &cfg).unwrap().finite();
            if let (Some((v, _)), Some((va, _))) = (base_val, scaled_val) {
                let want = alpha * alpha * v;
                assert!(
                    (va - want).abs() <= 1e-5 * want.abs().max(1.0),
                    "seed {seed} alpha {alpha}: {va} vs {want}"
                );
            }
        }
    }
}

#[test]
fn taylor_remainder_shrinks_below_uncertainty() {
    let cfg = DerivConfig::default();
    for seed in 0..40u64 {
        let fx = monomial_fixture(seed, true);
        let d = unit_direction(seed ^ 0x7a17, fx.base.dim());
        let Some((limit, uncertainty)) =
            second_dp(&fx.expr, &fx.base, &d, &cfg).unwrap().finite()
        else {
            panic!("seed {seed}: no finite limit");
        };
        let phi0 = eval(&fx.expr, &fx.base).unwrap();
        let g1 = dir_deriv1(&fx.expr, &fx.base, &d).unwrap();
        // Walk down to the end of the grid and check the remainder there.
        let t_last = cfg.t0 * libm::pow(cfg.rho, (cfg.max_steps - 1) as f64);
        let phi_t = eval(&fx.expr, &fx.base.offset(&d, t_last)).unwrap();
        let remainder =
            (phi_t - phi0 - t_last * g1 - 0.5 * t_last * t_last * limit).abs() / (t_last * t_last);
        let bound = 10.0 * uncertainty + 1e-13 * limit.abs().max(1.0);
        assert!(
            remainder <= bound,
            "seed {seed}: remainder {remainder} above {bound}"
        );
    }
}

#[test]
fn jet_fast_path_agrees_with_limit_estimator() {
    let cfg = DerivConfig::default();
    for seed in 0..100u64 {
        let fx = monomial_fixture(seed, true);
        let d = unit_direction(seed ^ 0x2ad2, fx.base.dim());
        let ad = second_ad(&fx.expr, &fx.base, &d)
            .unwrap()
            .unwrap_or_else(|| panic!("seed {seed}: fast path bailed on a polynomial"));
        let (dp, _) = second_dp(&fx.expr, &fx.base, &d, &cfg)
            .unwrap()
            .finite()
            .unwrap_or_else(|| panic!("seed {seed}: no finite limit"));
        assert!(
            (ad - dp).abs() <= 1e-7 * dp.abs().max(1.0),
            "seed {seed}: ad {ad} vs dp {dp}"
        );
    }
}

#[test]
fn hadamard_finite_implies_plain_finite_with_same_value() {
    let cfg = DerivConfig::default();
    for seed in 0..30u64 {
        let fx = monomial_fixture(seed, true);
        let d = unit_direction(seed ^ 0xad2d, fx.base.dim());
        let hadamard = hadamard_second_estimate(&fx.expr, &fx.base, &d, &cfg).unwrap();
        if let DirDeriv2Result::Finite { value: hv, uncertainty: hu } = hadamard {
            let (dv, du) = second_dp(&fx.expr, &fx.base, &d, &cfg)
                .unwrap()
                .finite()
                .expect("plain limit must exist when the joint limit does");
            let slack = hu + du + 1e-9 * dv.abs().max(1.0);
            assert!(
                (hv - dv).abs() <= slack,
                "seed {seed}: hadamard {hv} vs plain {dv} (slack {slack})"
            );
        }
    }
}

#[test]
fn gradient_agreement_with_finite_differences() {
    // Random smooth expressions: compositions with safe denominators and no
    // branch or kink nodes.
    fn smooth_expr(s: &mut Stream, n: usize, depth: usize) -> Expr {
        use vopt_core::expr::UnaryOp;
        if depth == 0 {
            return match s.next_u64() % 3 {
                0 => Expr::Const(s.uniform_in(-2.0, 2.0)),
                _ => Expr::Var((s.next_u64() % n as u64) as usize),
            };
        }
        match s.next_u64() % 8 {
            0 => Expr::Binary(
                BinaryOp::Add,
                Box::new(smooth_expr(s, n, depth - 1)),
                Box::new(smooth_expr(s, n, depth - 1)),
            ),
            1 => Expr::Binary(
                BinaryOp::Sub,
                Box::new(smooth_expr(s, n, depth - 1)),
                Box::new(smooth_expr(s, n, depth - 1)),
            ),
            2 => Expr::Binary(
                BinaryOp::Mul,
                Box::new(smooth_expr(s, n, depth - 1)),
                Box::new(smooth_expr(s, n, depth - 1)),
            ),
            3 => Expr::Unary(UnaryOp::Sin, Box::new(smooth_expr(s, n, depth - 1))),
            4 => Expr::Unary(UnaryOp::Cos, Box::new(smooth_expr(s, n, depth - 1))),
            5 => {
                // exp with a bounded argument: exp(sin(u)) stays tame.
                let inner = Expr::Unary(UnaryOp::Sin, Box::new(smooth_expr(s, n, depth - 1)));
                Expr::Unary(UnaryOp::Exp, Box::new(inner))
            }
            6 => {
                // Division by 2 + u^2 keeps the denominator away from zero.
                let num = smooth_expr(s, n, depth - 1);
                let den_core = smooth_expr(s, n, depth - 1);
                let den = Expr::Binary(
                    BinaryOp::Add,
                    Box::new(Expr::Const(2.0)),
                    Box::new(Expr::Binary(
                        BinaryOp::Pow,
                        Box::new(den_core),
                        Box::new(Expr::Const(2.0)),
                    )),
                );
                Expr::Binary(BinaryOp::Div, Box::new(num), Box::new(den))
            }
            _ => Expr::Binary(
                BinaryOp::Pow,
                Box::new(smooth_expr(s, n, depth - 1)),
                Box::new(Expr::Const(2.0 + (s.next_u64() % 3) as f64)),
            ),
        }
    }

    let mut done = 0;
    let mut attempt = 0u64;
    while done < 100 {
        attempt += 1;
        assert!(attempt < 600, "generator kept producing out-of-range cases");
        let mut s = Stream::new(attempt);
        let n = 1 + (s.next_u64() % 3) as usize;
        let e = smooth_expr(&mut s, n, 3);
        let x = Point::new((0..n).map(|_| s.uniform_in(-1.0, 1.0)).collect()).unwrap();
        let Ok(v) = eval(&e, &x) else { continue };
        let Ok(ad) = grad(&e, &x) else { continue };
        if v.abs() > 1e4 || ad.iter().any(|g| g.abs() > 1e4) {
            continue;
        }
        let fd = vopt_core::expr::fd_gradient(&e, &x, 1e-6).unwrap();
        let scale = ad.iter().fold(1.0f64, |m, g| m.max(g.abs()));
        for (a, b) in ad.iter().zip(&fd) {
            assert!(
                (a - b).abs() <= 1e-5 * scale,
                "attempt {attempt}: ad {a} vs fd {b} (scale {scale})"
            );
        }
        done += 1;
    }
}
