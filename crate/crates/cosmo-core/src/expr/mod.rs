//! Expression kernel: immutable symbolic trees over exact rationals.
//!
//! An [`Expr`] is a reference-counted tree. Leaves are rational
//! constants, named symbols and opaque applications of single-variable
//! functions such as `R(t)`; interior nodes are sums, products, powers,
//! the elementary functions `exp`, `ln`, `sin`, `cos`, `sqrt` and
//! unevaluated derivatives of opaque functions. Trees are never mutated,
//! so sharing subtrees across threads is safe.
//!
//! The symbol `Pi` is reserved: it stays symbolic through all algebra
//! and only binds to the numeric constant during evaluation.

mod antider;
pub(crate) mod canon;
mod diff;
mod eval;
mod parse;
mod print;
mod solve;
mod subst;
mod zero;

pub use antider::{antiderivative, AntiderivativeResult};
pub use canon::{CanonError, CanonicalForm};
pub use eval::{eval, Bindings, EvalError};
pub use parse::{parse, ParseError};
pub use print::latex;
pub use solve::{solve_linear, SolveError};
pub use subst::substitute;
pub use zero::{canonically_equal, decide_zero, is_zero, DecisionPath, ZeroDecision, ZeroError};

use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Exact rational scalar used throughout the kernel.
pub type Rat = BigRational;

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Elementary single-argument functions the kernel differentiates and
/// evaluates exactly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Elementary {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sqrt => "sqrt",
        }
    }
}

/// One node of an expression tree. Obtain nodes through [`Expr::node`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExprNode {
    /// Exact rational constant.
    Rational(Rat),
    /// Named symbol, e.g. `k`, `w`, `Pi`.
    Symbol(String),
    /// Application of an opaque single-variable function, e.g. `R(t)`.
    FuncApp(String, String),
    /// Unevaluated derivative of an opaque function: name, variable, order.
    Deriv(String, String, u32),
    /// Elementary function application.
    Elem(Elementary, Expr),
    /// n-ary sum.
    Add(Vec<Expr>),
    /// n-ary product.
    Mul(Vec<Expr>),
    /// Power. Rational exponents are handled exactly; a non-rational
    /// exponent is treated as `exp(exponent*ln(base))` by canonicalization.
    Pow(Expr, Expr),
}

/// Immutable shared expression.
#[derive(Clone, PartialEq, Eq)]
pub struct Expr(Arc<ExprNode>);

impl Expr {
    pub fn node(&self) -> &ExprNode {
        &self.0
    }

    pub fn rational(r: Rat) -> Expr {
        Expr(Arc::new(ExprNode::Rational(r)))
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(rat_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::rational(rat(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr(Arc::new(ExprNode::Symbol(name.to_string())))
    }

    /// The reserved circle constant.
    pub fn pi() -> Expr {
        Expr::sym("Pi")
    }

    /// Opaque function application `name(var)`.
    pub fn func(name: &str, var: &str) -> Expr {
        Expr(Arc::new(ExprNode::FuncApp(name.to_string(), var.to_string())))
    }

    /// Unevaluated derivative node `diff(name(var), var, order)`.
    pub fn deriv(name: &str, var: &str, order: u32) -> Expr {
        assert!(order >= 1, "derivative order must be at least 1");
        Expr(Arc::new(ExprNode::Deriv(
            name.to_string(),
            var.to_string(),
            order,
        )))
    }

    pub fn elem(f: Elementary, arg: Expr) -> Expr {
        Expr(Arc::new(ExprNode::Elem(f, arg)))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::elem(Elementary::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::elem(Elementary::Ln, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::elem(Elementary::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::elem(Elementary::Cos, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::elem(Elementary::Sqrt, arg)
    }

    /// Sum of the given terms. Empty input is `0`, a single term is
    /// returned unchanged.
    pub fn add(terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr(Arc::new(ExprNode::Add(terms))),
        }
    }

    /// Product of the given factors. Empty input is `1`, a single factor
    /// is returned unchanged.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr(Arc::new(ExprNode::Mul(factors))),
        }
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        Expr(Arc::new(ExprNode::Pow(base, exponent)))
    }

    pub fn pow_int(base: Expr, n: i64) -> Expr {
        Expr::pow(base, Expr::int(n))
    }

    pub fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }

    /// Multiplicative inverse as a tree, `self^(-1)`.
    pub fn inv(self) -> Expr {
        Expr::pow_int(self, -1)
    }

    /// True when the node is the literal rational `0`.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), ExprNode::Rational(r) if r.numer().sign() == num_bigint::Sign::NoSign)
    }

    /// True when the node is the literal rational `1`.
    pub fn is_one_literal(&self) -> bool {
        matches!(self.node(), ExprNode::Rational(r) if r.is_integer() && *r == rat_int(1))
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self.node() {
            ExprNode::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Parse the canonical text grammar. See [`parse`].
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse(text)
    }

    /// Exact symbolic derivative with respect to `var`, applied `order`
    /// times. See [`diff::diff`].
    pub fn diff(&self, var: &str, order: u32) -> Expr {
        let mut cur = self.clone();
        for _ in 0..order {
            cur = diff::diff(&cur, var);
        }
        cur
    }

    /// Canonical simplification. Total: expressions the canonical form
    /// cannot represent (such as an explicit division by the literal
    /// zero) are returned unchanged.
    pub fn simplify(&self) -> Expr {
        match CanonicalForm::of(self) {
            Ok(c) => c.to_expr(),
            Err(_) => self.clone(),
        }
    }

    /// All symbol names occurring in the tree, including `Pi`.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let ExprNode::Symbol(s) = n {
                out.insert(s.clone());
            }
        });
        out
    }

    /// All opaque function names occurring in the tree, whether as
    /// applications or inside derivative nodes.
    pub fn functions(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| match n {
            ExprNode::FuncApp(f, x) => {
                out.insert((f.clone(), x.clone()));
            }
            ExprNode::Deriv(f, x, _) => {
                out.insert((f.clone(), x.clone()));
            }
            _ => {}
        });
        out
    }

    /// True when `var` occurs as a symbol, as the variable of an opaque
    /// function application, or as the variable of a derivative node.
    pub fn depends_on(&self, var: &str) -> bool {
        let mut found = false;
        self.visit(&mut |n| match n {
            ExprNode::Symbol(s) if s == var => found = true,
            ExprNode::FuncApp(_, x) | ExprNode::Deriv(_, x, _) if x == var => found = true,
            _ => {}
        });
        found
    }

    fn visit(&self, f: &mut impl FnMut(&ExprNode)) {
        f(self.node());
        match self.node() {
            ExprNode::Elem(_, a) => a.visit(f),
            ExprNode::Add(v) | ExprNode::Mul(v) => {
                for e in v {
                    e.visit(f);
                }
            }
            ExprNode::Pow(b, e) => {
                b.visit(f);
                e.visit(f);
            }
            _ => {}
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print::print(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print::print(self))
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs.neg()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs.inv()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
