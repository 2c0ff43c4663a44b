//! Floating-point evaluation under symbol and function bindings.

use super::{Elementary, Expr, ExprNode};
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol {0}")]
    UnboundSymbol(String),
    #[error("unbound function value {0}")]
    UnboundFunction(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

type NumericFn = std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Numeric bindings. Symbols bind by name. Opaque functions and their
/// derivatives bind by (name, variable, order), order zero meaning the
/// function value itself; alternatively a whole function can bind as a
/// numeric rule, in which case derivative nodes up to order 2 are
/// evaluated by central finite differences at the bound variable value.
/// The symbol `Pi` is always bound to pi.
#[derive(Clone, Default)]
pub struct Bindings {
    symbols: BTreeMap<String, f64>,
    functions: BTreeMap<(String, String, u32), f64>,
    rules: BTreeMap<(String, String), NumericFn>,
}

impl std::fmt::Debug for Bindings {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bindings")
            .field("symbols", &self.symbols)
            .field("functions", &self.functions)
            .field("rules", &self.rules.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn set_symbol(&mut self, name: &str, value: f64) -> &mut Self {
        self.symbols.insert(name.to_string(), value);
        self
    }

    pub fn set_function(&mut self, name: &str, var: &str, order: u32, value: f64) -> &mut Self {
        self.functions
            .insert((name.to_string(), var.to_string(), order), value);
        self
    }

    pub fn set_function_rule(
        &mut self,
        name: &str,
        var: &str,
        rule: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> &mut Self {
        self.rules
            .insert((name.to_string(), var.to_string()), std::sync::Arc::new(rule));
        self
    }

    pub fn symbol(&self, name: &str) -> Option<f64> {
        if name == "Pi" {
            return Some(std::f64::consts::PI);
        }
        self.symbols.get(name).copied()
    }

    fn function(&self, name: &str, var: &str, order: u32) -> Option<f64> {
        self.functions
            .get(&(name.to_string(), var.to_string(), order))
            .copied()
    }

    fn rule(&self, name: &str, var: &str) -> Option<&NumericFn> {
        self.rules.get(&(name.to_string(), var.to_string()))
    }
}

pub fn eval(e: &Expr, b: &Bindings) -> Result<f64, EvalError> {
    let v = eval_node(e, b)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn eval_node(e: &Expr, b: &Bindings) -> Result<f64, EvalError> {
    match e.node() {
        ExprNode::Rational(r) => r
            .to_f64()
            .ok_or(EvalError::NonFinite),
        ExprNode::Symbol(s) => b
            .symbol(s)
            .ok_or_else(|| EvalError::UnboundSymbol(s.clone())),
        ExprNode::FuncApp(f, x) => {
            if let Some(v) = b.function(f, x, 0) {
                return Ok(v);
            }
            if let Some(rule) = b.rule(f, x) {
                let xv = b
                    .symbol(x)
                    .ok_or_else(|| EvalError::UnboundSymbol(x.clone()))?;
                return Ok(rule(xv));
            }
            Err(EvalError::UnboundFunction(format!("{f}({x})")))
        }
        ExprNode::Deriv(f, x, n) => {
            if let Some(v) = b.function(f, x, *n) {
                return Ok(v);
            }
            if let Some(rule) = b.rule(f, x) {
                let xv = b
                    .symbol(x)
                    .ok_or_else(|| EvalError::UnboundSymbol(x.clone()))?;
                // Central differences on the bound rule.
                return match n {
                    1 => {
                        let h = 1e-6 * xv.abs().max(1.0);
                        Ok((rule(xv + h) - rule(xv - h)) / (2.0 * h))
                    }
                    2 => {
                        let h = 1e-4 * xv.abs().max(1.0);
                        Ok((rule(xv + h) - 2.0 * rule(xv) + rule(xv - h)) / (h * h))
                    }
                    _ => Err(EvalError::UnboundFunction(format!(
                        "diff({f}({x}),{x},{n}) has no explicit binding and finite \
                         differences stop at order 2"
                    ))),
                };
            }
            Err(EvalError::UnboundFunction(format!("diff({f}({x}),{x},{n})")))
        }
        ExprNode::Add(terms) => {
            let mut acc = 0.0;
            for t in terms {
                acc += eval_node(t, b)?;
            }
            Ok(acc)
        }
        ExprNode::Mul(factors) => {
            let mut acc = 1.0;
            for f in factors {
                acc *= eval_node(f, b)?;
            }
            Ok(acc)
        }
        ExprNode::Pow(base, exp) => {
            let bv = eval_node(base, b)?;
            if let ExprNode::Rational(r) = exp.node() {
                if r.is_integer() {
                    if let Some(n) = r.to_integer().to_i32() {
                        if bv == 0.0 && n < 0 {
                            return Err(EvalError::Domain("zero to a negative power".into()));
                        }
                        return Ok(bv.powi(n));
                    }
                }
                if bv < 0.0 && r.denom().is_odd() {
                    // Real branch of an odd root.
                    let mag = (-bv).powf(r.to_f64().ok_or(EvalError::NonFinite)?);
                    let sign = if r.numer().is_odd() { -1.0 } else { 1.0 };
                    return Ok(sign * mag);
                }
            }
            let ev = eval_node(exp, b)?;
            let v = bv.powf(ev);
            if v.is_nan() {
                Err(EvalError::Domain(format!("{bv} raised to {ev}")))
            } else {
                Ok(v)
            }
        }
        ExprNode::Elem(f, a) => {
            let av = eval_node(a, b)?;
            match f {
                Elementary::Exp => Ok(av.exp()),
                Elementary::Ln => {
                    if av <= 0.0 {
                        Err(EvalError::Domain(format!("ln of {av}")))
                    } else {
                        Ok(av.ln())
                    }
                }
                Elementary::Sin => Ok(av.sin()),
                Elementary::Cos => Ok(av.cos()),
                Elementary::Sqrt => {
                    if av < 0.0 {
                        Err(EvalError::Domain(format!("sqrt of {av}")))
                    } else {
                        Ok(av.sqrt())
                    }
                }
            }
        }
    }
}
