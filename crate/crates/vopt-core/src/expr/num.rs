//! Numeric tower for the generic expression evaluator: plain doubles, first-order
//! dual numbers (gradients), and second-order truncated Taylor jets along a ray.

use super::DomainErrorKind;

/// Fault raised by a numeric operation, without node context. The tree walker
/// attaches the offending sub-expression.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NumFault {
    Domain(DomainErrorKind),
    Kink,
}

fn int_pow(base: f64, mut k: u64) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    while k > 0 {
        if k & 1 == 1 {
            acc *= b;
        }
        b *= b;
        k >>= 1;
    }
    acc
}

/// Integer power with real semantics for any base; `x^0 == 1` including at
/// zero, but `0^e` with negative `e` is a domain error.
pub(crate) fn powi_checked(base: f64, e: i64) -> Result<f64, NumFault> {
    if base == 0.0 && e < 0 {
        return Err(NumFault::Domain(DomainErrorKind::ZeroToNonPositivePower(e as f64)));
    }
    let mag = int_pow(base, e.unsigned_abs());
    Ok(if e < 0 { 1.0 / mag } else { mag })
}

/// Exponent treated as an integer when it is exactly integer-valued and small
/// enough for exact integer-power semantics.
pub(crate) fn as_exact_int(e: f64) -> Option<i64> {
    if libm::trunc(e) == e && e.abs() <= 9.0e15 {
        Some(e as i64)
    } else {
        None
    }
}

fn real_pow(base: f64, expo: f64) -> Result<f64, NumFault> {
    if let Some(k) = as_exact_int(expo) {
        return powi_checked(base, k);
    }
    if base > 0.0 {
        Ok(libm::pow(base, expo))
    } else if base == 0.0 {
        if expo > 0.0 {
            Ok(0.0)
        } else {
            Err(NumFault::Domain(DomainErrorKind::ZeroToNonPositivePower(expo)))
        }
    } else {
        Err(NumFault::Domain(DomainErrorKind::NegativeBaseFractionalPow {
            base,
            exponent: expo,
        }))
    }
}

/// `sign(v)^p * |v|^(p/q)` for odd positive `q`.
pub(crate) fn rational_pow_value(v: f64, p: i64, q: i64) -> Result<f64, NumFault> {
    let r = p as f64 / q as f64;
    if v == 0.0 {
        return if r > 0.0 {
            Ok(0.0)
        } else if p == 0 {
            Ok(1.0)
        } else {
            Err(NumFault::Domain(DomainErrorKind::ZeroToNonPositivePower(r)))
        };
    }
    let mag = libm::pow(v.abs(), r);
    Ok(if v < 0.0 && p % 2 != 0 { -mag } else { mag })
}

pub(crate) fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Operations every evaluator number type must provide. Faults carry no node
/// context; `eval` adds it.
pub(crate) trait Num: Clone {
    fn constant(c: f64) -> Self;
    /// The underlying value, used for predicate tests and NaN screening.
    fn primal(&self) -> f64;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, NumFault>;
    fn neg(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn log(&self) -> Result<Self, NumFault>;
    fn abs(&self) -> Result<Self, NumFault>;
    fn sqrt(&self) -> Result<Self, NumFault>;
    fn sign(&self) -> Result<Self, NumFault>;
    fn pow(&self, expo: &Self) -> Result<Self, NumFault>;
    fn rational_pow(&self, p: i64, q: i64) -> Result<Self, NumFault>;
}

impl Num for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn primal(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self, NumFault> {
        if *o == 0.0 {
            Err(NumFault::Domain(DomainErrorKind::DivisionByZero))
        } else {
            Ok(self / o)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn tan(&self) -> Self {
        libm::tan(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn log(&self) -> Result<Self, NumFault> {
        if *self <= 0.0 {
            Err(NumFault::Domain(DomainErrorKind::LogNonPositive(*self)))
        } else {
            Ok(libm::log(*self))
        }
    }
    fn abs(&self) -> Result<Self, NumFault> {
        Ok((*self).abs())
    }
    fn sqrt(&self) -> Result<Self, NumFault> {
        if *self < 0.0 {
            Err(NumFault::Domain(DomainErrorKind::SqrtNegative(*self)))
        } else {
            Ok(libm::sqrt(*self))
        }
    }
    fn sign(&self) -> Result<Self, NumFault> {
        Ok(sign_of(*self))
    }
    fn pow(&self, expo: &Self) -> Result<Self, NumFault> {
        real_pow(*self, *expo)
    }
    fn rational_pow(&self, p: i64, q: i64) -> Result<Self, NumFault> {
        rational_pow_value(*self, p, q)
    }
}

/// First-order dual number: value and one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn seed(v: f64, d: f64) -> Self {
        Dual { v, d }
    }

    /// Chain rule through a smooth unary map given `f(v)` and `f'(v)`.
    fn lift(&self, fv: f64, dfv: f64) -> Self {
        Dual { v: fv, d: dfv * self.d }
    }
}

impl Num for Dual {
    fn constant(c: f64) -> Self {
        Dual { v: c, d: 0.0 }
    }
    fn primal(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(&self, o: &Self) -> Self {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn div(&self, o: &Self) -> Result<Self, NumFault> {
        if o.v == 0.0 {
            return Err(NumFault::Domain(DomainErrorKind::DivisionByZero));
        }
        Ok(Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        })
    }
    fn neg(&self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
    fn sin(&self) -> Self {
        self.lift(libm::sin(self.v), libm::cos(self.v))
    }
    fn cos(&self) -> Self {
        self.lift(libm::cos(self.v), -libm::sin(self.v))
    }
    fn tan(&self) -> Self {
        let t = libm::tan(self.v);
        self.lift(t, 1.0 + t * t)
    }
    fn exp(&self) -> Self {
        let e = libm::exp(self.v);
        self.lift(e, e)
    }
    fn log(&self) -> Result<Self, NumFault> {
        if self.v <= 0.0 {
            return Err(NumFault::Domain(DomainErrorKind::LogNonPositive(self.v)));
        }
        Ok(self.lift(libm::log(self.v), 1.0 / self.v))
    }
    fn abs(&self) -> Result<Self, NumFault> {
        if self.v == 0.0 {
            if self.d == 0.0 {
                return Ok(Dual { v: 0.0, d: 0.0 });
            }
            return Err(NumFault::Kink);
        }
        Ok(self.lift(self.v.abs(), sign_of(self.v)))
    }
    fn sqrt(&self) -> Result<Self, NumFault> {
        if self.v < 0.0 {
            return Err(NumFault::Domain(DomainErrorKind::SqrtNegative(self.v)));
        }
        if self.v == 0.0 {
            if self.d == 0.0 {
                return Ok(Dual { v: 0.0, d: 0.0 });
            }
            return Err(NumFault::Kink);
        }
        let s = libm::sqrt(self.v);
        Ok(self.lift(s, 0.5 / s))
    }
    fn sign(&self) -> Result<Self, NumFault> {
        if self.v == 0.0 && self.d != 0.0 {
            return Err(NumFault::Kink);
        }
        Ok(Dual { v: sign_of(self.v), d: 0.0 })
    }
    fn pow(&self, expo: &Self) -> Result<Self, NumFault> {
        if expo.d == 0.0 {
            let r = expo.v;
            let v = real_pow(self.v, r)?;
            // Power rule; valid for negative bases only with integer exponents,
            // which is exactly when real_pow accepted them.
            let dfv = if self.v == 0.0 {
                if r == 1.0 {
                    1.0
                } else if r > 1.0 {
                    0.0
                } else if self.d == 0.0 {
                    0.0
                } else {
                    return Err(NumFault::Kink);
                }
            } else {
                r * real_pow(self.v, r - 1.0).unwrap_or(f64::NAN)
            };
            Ok(self.lift(v, dfv))
        } else {
            // Variable exponent requires a positive base.
            if self.v <= 0.0 {
                return Err(NumFault::Domain(DomainErrorKind::NegativeBaseFractionalPow {
                    base: self.v,
                    exponent: expo.v,
                }));
            }
            let v = libm::pow(self.v, expo.v);
            Ok(Dual {
                v,
                d: v * (expo.d * libm::log(self.v) + expo.v * self.d / self.v),
            })
        }
    }
    fn rational_pow(&self, p: i64, q: i64) -> Result<Self, NumFault> {
        let r = p as f64 / q as f64;
        let v = rational_pow_value(self.v, p, q)?;
        if self.v == 0.0 {
            if p == 0 {
                return Ok(Dual { v, d: 0.0 });
            }
            if r < 1.0 {
                return Err(NumFault::Kink);
            }
            let d = if r == 1.0 { self.d } else { 0.0 };
            return Ok(Dual { v, d });
        }
        // d/dv [sign(v)^p |v|^r] = r sign(v)^(p+1) |v|^(r-1)
        let mag = libm::pow(self.v.abs(), r - 1.0);
        let s = if self.v < 0.0 && p % 2 == 0 { -1.0 } else { 1.0 };
        Ok(self.lift(v, r * s * mag))
    }
}

/// Second-order truncated Taylor jet of `t -> expr(x + t d)`: value, first, and
/// second derivative with respect to `t`. Any hit on a kink sets `kinked`
/// instead of producing a value the caller might trust.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn seed(v: f64, d1: f64) -> Self {
        Jet2 { v, d1, d2: 0.0 }
    }

    /// Chain rule through a smooth unary map given `f`, `f'`, `f''` at `v`.
    fn lift(&self, fv: f64, d1f: f64, d2f: f64) -> Self {
        Jet2 {
            v: fv,
            d1: d1f * self.d1,
            d2: d2f * self.d1 * self.d1 + d1f * self.d2,
        }
    }
}

impl Num for Jet2 {
    fn constant(c: f64) -> Self {
        Jet2 { v: c, d1: 0.0, d2: 0.0 }
    }
    fn primal(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
    fn sub(&self, o: &Self) -> Self {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
    fn mul(&self, o: &Self) -> Self {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
    fn div(&self, o: &Self) -> Result<Self, NumFault> {
        if o.v == 0.0 {
            return Err(NumFault::Domain(DomainErrorKind::DivisionByZero));
        }
        // w = 1/o, then self * w.
        let w = 1.0 / o.v;
        let w1 = -o.d1 * w * w;
        let w2 = (2.0 * o.d1 * o.d1 * w - o.d2) * w * w;
        Ok(self.mul(&Jet2 { v: w, d1: w1, d2: w2 }))
    }
    fn neg(&self) -> Self {
        Jet2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
    fn sin(&self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.lift(s, c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.lift(c, -s, -c)
    }
    fn tan(&self) -> Self {
        let t = libm::tan(self.v);
        let sec2 = 1.0 + t * t;
        self.lift(t, sec2, 2.0 * t * sec2)
    }
    fn exp(&self) -> Self {
        let e = libm::exp(self.v);
        self.lift(e, e, e)
    }
    fn log(&self) -> Result<Self, NumFault> {
        if self.v <= 0.0 {
            return Err(NumFault::Domain(DomainErrorKind::LogNonPositive(self.v)));
        }
        Ok(self.lift(libm::log(self.v), 1.0 / self.v, -1.0 / (self.v * self.v)))
    }
    fn abs(&self) -> Result<Self, NumFault> {
        if self.v == 0.0 {
            if self.d1 == 0.0 {
                // |v| with v = v''t²/2 + o(t²) has second derivative |v''|.
                return Ok(Jet2 { v: 0.0, d1: 0.0, d2: self.d2.abs() });
            }
            return Err(NumFault::Kink);
        }
        let s = sign_of(self.v);
        Ok(Jet2 { v: self.v.abs(), d1: s * self.d1, d2: s * self.d2 })
    }
    fn sqrt(&self) -> Result<Self, NumFault> {
        if self.v < 0.0 {
            return Err(NumFault::Domain(DomainErrorKind::SqrtNegative(self.v)));
        }
        if self.v == 0.0 {
            if self.d1 == 0.0 && self.d2 == 0.0 {
                return Ok(Jet2 { v: 0.0, d1: 0.0, d2: 0.0 });
            }
            return Err(NumFault::Kink);
        }
        let s = libm::sqrt(self.v);
        self.lift(s, 0.5 / s, -0.25 / (s * self.v)).ok()
    }
    fn sign(&self) -> Result<Self, NumFault> {
        if self.v == 0.0 && (self.d1 != 0.0 || self.d2 != 0.0) {
            return Err(NumFault::Kink);
        }
        Ok(Jet2 { v: sign_of(self.v), d1: 0.0, d2: 0.0 })
    }
    fn pow(&self, expo: &Self) -> Result<Self, NumFault> {
        if expo.d1 == 0.0 && expo.d2 == 0.0 {
            let r = expo.v;
            let v = real_pow(self.v, r)?;
            if self.v == 0.0 {
                return if r == 1.0 {
                    Ok(*self)
                } else if r >= 2.0 {
                    let d2 = if r == 2.0 { 2.0 * self.d1 * self.d1 } else { 0.0 };
                    Ok(Jet2 { v, d1: 0.0, d2 })
                } else if self.d1 == 0.0 && self.d2 == 0.0 {
                    Ok(Jet2 { v, d1: 0.0, d2: 0.0 })
                } else {
                    Err(NumFault::Kink)
                };
            }
            let f1 = r * real_pow(self.v, r - 1.0).unwrap_or(f64::NAN);
            let f2 = r * (r - 1.0) * real_pow(self.v, r - 2.0).unwrap_or(f64::NAN);
            Ok(self.lift(v, f1, f2))
        } else {
            if self.v <= 0.0 {
                return Err(NumFault::Domain(DomainErrorKind::NegativeBaseFractionalPow {
                    base: self.v,
                    exponent: expo.v,
                }));
            }
            // a^b = exp(b log a)
            let la = self.log()?;
            expo.mul(&la).exp().ok()
        }
    }
    fn rational_pow(&self, p: i64, q: i64) -> Result<Self, NumFault> {
        let r = p as f64 / q as f64;
        let v = rational_pow_value(self.v, p, q)?;
        if self.v == 0.0 {
            if p == 0 {
                return Ok(Jet2 { v, d1: 0.0, d2: 0.0 });
            }
            if self.d1 == 0.0 && self.d2 == 0.0 {
                return Ok(Jet2 { v, d1: 0.0, d2: 0.0 });
            }
            return Err(NumFault::Kink);
        }
        let s1 = if self.v < 0.0 && p % 2 == 0 { -1.0 } else { 1.0 };
        let mag1 = libm::pow(self.v.abs(), r - 1.0);
        let s2 = if self.v < 0.0 && p % 2 != 0 { -1.0 } else { 1.0 };
        let mag2 = libm::pow(self.v.abs(), r - 2.0);
        Ok(self.lift(v, r * s1 * mag1, r * (r - 1.0) * s2 * mag2))
    }
}

trait IntoOk: Sized {
    fn ok(self) -> Result<Self, NumFault>;
}

impl IntoOk for Jet2 {
    fn ok(self) -> Result<Self, NumFault> {
        Ok(self)
    }
}
