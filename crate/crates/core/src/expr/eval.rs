//! Expression evaluation in the linear and the log domain.
//!
//! Linear mode computes the value directly and reports overflow as an
//! error, signalling "use log mode". Log mode computes ln(value) without
//! ever materializing the value itself, so expressions like `2^n` or
//! `factorial(n)` stay representable for astronomically large `n`:
//!
//! * `ln(a·b) = ln a + ln b`, `ln(a/b) = ln a − ln b`, `ln(a^b) = b·ln a`;
//! * `ln(a+b)` via log-sum-exp; `ln(a−b) = ln a + ln1p(−e^{ln b − ln a})`,
//!   defined when `a ≥ b`;
//! * `factorial(x)` via the log-gamma continuation `ln Γ(x+1)`.
//!
//! A value of exactly zero is represented as `-∞` in the log domain (the
//! honest extended-real logarithm); negative values are domain errors.
//! Order and rounding builtins (`min`, `max`, `floor`, `ceil`, `abs`,
//! `mod`, `sin`, `cos`) evaluate their arguments linearly first and fall
//! back to the log domain only when the linear value overflows.

use std::collections::HashMap;

use super::{builtin_arity, BinaryOp, Expr, UnaryOp};

/// Evaluation domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Direct computation of the value.
    Linear,
    /// Computation of the natural logarithm of the value.
    Log,
}

/// Evaluation failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("pattern variable ?{0} cannot be evaluated")]
    PatternVariable(String),
    #[error("unknown function {0}/{1}")]
    UnknownFunction(String, usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow in linear mode (use log mode)")]
    Overflow,
}

pub(crate) enum Scope<'a> {
    Map(&'a HashMap<String, f64>),
    One(&'a str, f64),
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        match self {
            Scope::Map(m) => m.get(name).copied(),
            Scope::One(n, v) => (*n == name).then_some(*v),
        }
    }
}

/// Evaluate `e` with every free variable bound by `bindings`.
///
/// Linear mode returns the value; log mode returns ln(value), which is
/// `-∞` when the value is exactly zero. A non-finite linear result is
/// reported as [`EvalError::Overflow`].
pub fn eval(e: &Expr, bindings: &HashMap<String, f64>, mode: EvalMode) -> Result<f64, EvalError> {
    eval_scoped(e, &Scope::Map(bindings), mode)
}

pub(crate) fn eval_scoped(e: &Expr, scope: &Scope<'_>, mode: EvalMode) -> Result<f64, EvalError> {
    match mode {
        EvalMode::Linear => {
            let v = raw_linear(e, scope)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(EvalError::Overflow)
            }
        }
        EvalMode::Log => eval_log(e, scope),
    }
}

// Linear evaluation that lets ±∞ propagate (callers decide whether that is
// an overflow error or a cue to fall back to the log domain). NaN is always
// an error.
fn raw_linear(e: &Expr, scope: &Scope<'_>) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Number(v) => *v,
        Expr::Var(name) => scope
            .lookup(name)
            .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
        Expr::Pattern(name) => return Err(EvalError::PatternVariable(name.clone())),
        Expr::Unary(UnaryOp::Neg, c) => -raw_linear(c, scope)?,
        Expr::Binary(op, l, r) => {
            let a = raw_linear(l, scope)?;
            let b = raw_linear(r, scope)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::Domain("division by zero".into()));
                    }
                    a / b
                }
                BinaryOp::Pow => a.powf(b),
            }
        }
        Expr::Call(name, args) => {
            check_arity(name, args.len())?;
            match (name.as_str(), args.as_slice()) {
                ("sin", [a]) => finite_arg("sin", raw_linear(a, scope)?)?.sin(),
                ("cos", [a]) => finite_arg("cos", raw_linear(a, scope)?)?.cos(),
                ("exp", [a]) => raw_linear(a, scope)?.exp(),
                ("ln", [a]) => {
                    let v = raw_linear(a, scope)?;
                    if v <= 0.0 {
                        return Err(EvalError::Domain(format!("ln of non-positive value {v}")));
                    }
                    v.ln()
                }
                ("log2", [a]) => {
                    let v = raw_linear(a, scope)?;
                    if v <= 0.0 {
                        return Err(EvalError::Domain(format!("log2 of non-positive value {v}")));
                    }
                    v.log2()
                }
                ("sqrt", [a]) => {
                    let v = raw_linear(a, scope)?;
                    if v < 0.0 {
                        return Err(EvalError::Domain(format!("sqrt of negative value {v}")));
                    }
                    v.sqrt()
                }
                ("abs", [a]) => raw_linear(a, scope)?.abs(),
                ("floor", [a]) => raw_linear(a, scope)?.floor(),
                ("ceil", [a]) => raw_linear(a, scope)?.ceil(),
                ("min", [a, b]) => raw_linear(a, scope)?.min(raw_linear(b, scope)?),
                ("max", [a, b]) => raw_linear(a, scope)?.max(raw_linear(b, scope)?),
                ("mod", [a, b]) => {
                    let x = finite_arg("mod", raw_linear(a, scope)?)?;
                    let m = finite_arg("mod", raw_linear(b, scope)?)?;
                    if m == 0.0 {
                        return Err(EvalError::Domain("mod by zero".into()));
                    }
                    x % m
                }
                ("factorial", [a]) => factorial(raw_linear(a, scope)?)?,
                _ => unreachable!("arity checked above"),
            }
        }
    };
    if v.is_nan() {
        return Err(EvalError::Domain(format!(
            "indeterminate value in {}",
            head_of(e)
        )));
    }
    Ok(v)
}

fn check_arity(name: &str, found: usize) -> Result<(), EvalError> {
    match builtin_arity(name) {
        Some(arity) if arity == found => Ok(()),
        _ => Err(EvalError::UnknownFunction(name.to_string(), found)),
    }
}

fn finite_arg(what: &str, v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("{what} of non-finite argument")))
    }
}

fn factorial(x: f64) -> Result<f64, EvalError> {
    if x.is_infinite() {
        return if x > 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(EvalError::Domain("factorial of -infinity".into()))
        };
    }
    if x <= -1.0 {
        return Err(EvalError::Domain(format!(
            "factorial of value {x} below -1"
        )));
    }
    if x.fract() == 0.0 && (0.0..=170.0).contains(&x) {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k <= x {
            acc *= k;
            k += 1.0;
        }
        return Ok(acc);
    }
    Ok(libm::lgamma(x + 1.0).exp())
}

// ln Γ(x+1); x > -1 keeps Γ positive so the log is the true logarithm.
fn log_factorial(x: f64) -> Result<f64, EvalError> {
    if x.is_infinite() {
        return if x > 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(EvalError::Domain("factorial of -infinity".into()))
        };
    }
    if x <= -1.0 {
        return Err(EvalError::Domain(format!(
            "factorial of value {x} below -1"
        )));
    }
    Ok(libm::lgamma(x + 1.0))
}

fn head_of(e: &Expr) -> String {
    super::decompose_top(e).0.to_string()
}

// ln of a value known in the linear domain.
fn ln_of(v: f64, what: &str) -> Result<f64, EvalError> {
    if v > 0.0 {
        Ok(v.ln())
    } else if v == 0.0 {
        Ok(f64::NEG_INFINITY)
    } else {
        Err(EvalError::Domain(format!(
            "{what} yields negative value {v} in log mode"
        )))
    }
}

// ln(e^a + e^b), stable for extended reals.
fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

// ln(e^a − e^b), defined for a ≥ b (value zero maps to -∞).
fn log_diff_exp(a: f64, b: f64) -> Result<f64, EvalError> {
    if b == f64::NEG_INFINITY {
        return Ok(a);
    }
    if a == f64::INFINITY && b == f64::INFINITY {
        return Err(EvalError::Domain(
            "difference of two unbounded values in log mode".into(),
        ));
    }
    if a < b {
        return Err(EvalError::Domain(
            "subtraction yields negative value in log mode".into(),
        ));
    }
    if a == b {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(a + (-((b - a).exp())).ln_1p())
}

fn eval_log(e: &Expr, scope: &Scope<'_>) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Number(v) => ln_of(*v, "number")?,
        Expr::Var(name) => {
            let v = scope
                .lookup(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
            ln_of(v, "variable")?
        }
        Expr::Pattern(name) => return Err(EvalError::PatternVariable(name.clone())),
        Expr::Unary(UnaryOp::Neg, _) => {
            return Err(EvalError::Domain(
                "negation yields a non-positive value in log mode".into(),
            ))
        }
        Expr::Binary(op, l, r) => match op {
            BinaryOp::Add => log_sum_exp(eval_log(l, scope)?, eval_log(r, scope)?),
            BinaryOp::Sub => log_diff_exp(eval_log(l, scope)?, eval_log(r, scope)?)?,
            BinaryOp::Mul => eval_log(l, scope)? + eval_log(r, scope)?,
            BinaryOp::Div => eval_log(l, scope)? - eval_log(r, scope)?,
            BinaryOp::Pow => {
                let la = eval_log(l, scope)?;
                let b = raw_linear(r, scope)?;
                if la == 0.0 || b == 0.0 {
                    0.0
                } else {
                    la * b
                }
            }
        },
        Expr::Call(name, args) => {
            check_arity(name, args.len())?;
            match (name.as_str(), args.as_slice()) {
                ("exp", [a]) => raw_linear(a, scope)?,
                ("factorial", [a]) => log_factorial(raw_linear(a, scope)?)?,
                ("sqrt", [a]) => eval_log(a, scope)? / 2.0,
                ("ln", [a]) => ln_of(eval_log(a, scope)?, "ln")?,
                ("log2", [a]) => ln_of(eval_log(a, scope)? / std::f64::consts::LN_2, "log2")?,
                ("sin", [a]) => ln_of(finite_arg("sin", raw_linear(a, scope)?)?.sin(), "sin")?,
                ("cos", [a]) => ln_of(finite_arg("cos", raw_linear(a, scope)?)?.cos(), "cos")?,
                ("abs", [a]) => match eval_log(a, scope) {
                    Ok(v) => v,
                    Err(_) => {
                        let c = raw_linear(a, scope)?;
                        if c.is_finite() {
                            ln_of(c.abs(), "abs")?
                        } else {
                            f64::INFINITY
                        }
                    }
                },
                ("floor", [a]) => rounded_log(a, scope, f64::floor, "floor")?,
                ("ceil", [a]) => rounded_log(a, scope, f64::ceil, "ceil")?,
                ("min", [a, b]) => ordered_log(a, b, scope, true)?,
                ("max", [a, b]) => ordered_log(a, b, scope, false)?,
                ("mod", [a, b]) => {
                    let x = finite_arg("mod", raw_linear(a, scope)?)?;
                    let m = finite_arg("mod", raw_linear(b, scope)?)?;
                    if m == 0.0 {
                        return Err(EvalError::Domain("mod by zero".into()));
                    }
                    ln_of(x % m, "mod")?
                }
                _ => unreachable!("arity checked above"),
            }
        }
    };
    if v.is_nan() {
        return Err(EvalError::Domain(format!(
            "indeterminate value in {} (log mode)",
            head_of(e)
        )));
    }
    Ok(v)
}

// floor/ceil in the log domain: exact through the linear value while it is
// representable; for an overflowed positive value the rounding is a
// vanishing relative perturbation, so the log value passes through.
fn rounded_log(
    a: &Expr,
    scope: &Scope<'_>,
    round: impl Fn(f64) -> f64,
    what: &str,
) -> Result<f64, EvalError> {
    let c = raw_linear(a, scope)?;
    if c.is_finite() {
        ln_of(round(c), what)
    } else if c > 0.0 {
        eval_log(a, scope)
    } else {
        Err(EvalError::Domain(format!(
            "{what} of an unboundedly negative value in log mode"
        )))
    }
}

// min/max in the log domain: through linear values while both are finite
// (they may be negative there, e.g. clamp idioms); otherwise both operands
// must be log-representable and the order transfers to the logs.
fn ordered_log(a: &Expr, b: &Expr, scope: &Scope<'_>, take_min: bool) -> Result<f64, EvalError> {
    let what = if take_min { "min" } else { "max" };
    let ca = raw_linear(a, scope)?;
    let cb = raw_linear(b, scope)?;
    if ca.is_finite() && cb.is_finite() {
        let m = if take_min { ca.min(cb) } else { ca.max(cb) };
        return ln_of(m, what);
    }
    if take_min && (ca == f64::NEG_INFINITY || cb == f64::NEG_INFINITY) {
        return Err(EvalError::Domain(
            "min of an unboundedly negative value in log mode".into(),
        ));
    }
    // In this mixed branch at least one operand overflowed, so under max a
    // non-positive operand simply loses; -∞ is its stand-in on the log
    // scale. Under min the winner is the finite operand and must itself be
    // log-representable.
    let side = |c: f64, e: &Expr| -> Result<f64, EvalError> {
        if c.is_finite() {
            if take_min || c > 0.0 {
                ln_of(c, what)
            } else {
                Ok(f64::NEG_INFINITY)
            }
        } else if c > 0.0 {
            eval_log(e, scope)
        } else {
            Ok(f64::NEG_INFINITY)
        }
    };
    let va = side(ca, a)?;
    let vb = side(cb, b)?;
    if take_min {
        Ok(va.min(vb))
    } else {
        Ok(va.max(vb))
    }
}
