//! Structural substitution.
//!
//! `substitute(e, pattern, replacement)` replaces every occurrence of
//! `pattern` as a complete subtree of `e`. Two extra rules make
//! substitution commute with differentiation the way an interactive
//! algebra user expects:
//!
//! * an opaque function pattern `f(x)` also matches every derivative
//!   node `diff(f(x), x, n)`, which becomes the n-th derivative of the
//!   replacement;
//! * a derivative pattern `diff(f(x), x, m)` also matches higher
//!   derivatives `diff(f(x), x, n)` with `n > m`, which become the
//!   `(n - m)`-th derivative of the replacement.
//!
//! Matching is purely structural otherwise: a product pattern only
//! matches a product node with identical factor lists, not a subset of
//! a larger product.

use super::{Expr, ExprNode};

pub fn substitute(e: &Expr, pattern: &Expr, replacement: &Expr) -> Expr {
    if e == pattern {
        return replacement.clone();
    }
    match (e.node(), pattern.node()) {
        (ExprNode::Deriv(f, x, n), ExprNode::FuncApp(pf, px)) if f == pf && x == px => {
            return replacement.diff(x, *n);
        }
        (ExprNode::Deriv(f, x, n), ExprNode::Deriv(pf, px, m))
            if f == pf && x == px && n >= m =>
        {
            return replacement.diff(x, n - m);
        }
        _ => {}
    }
    match e.node() {
        ExprNode::Rational(_)
        | ExprNode::Symbol(_)
        | ExprNode::FuncApp(_, _)
        | ExprNode::Deriv(_, _, _) => e.clone(),
        ExprNode::Add(terms) => Expr::add(
            terms
                .iter()
                .map(|t| substitute(t, pattern, replacement))
                .collect(),
        ),
        ExprNode::Mul(factors) => Expr::mul(
            factors
                .iter()
                .map(|f| substitute(f, pattern, replacement))
                .collect(),
        ),
        ExprNode::Pow(b, x) => Expr::pow(
            substitute(b, pattern, replacement),
            substitute(x, pattern, replacement),
        ),
        ExprNode::Elem(f, a) => Expr::elem(*f, substitute(a, pattern, replacement)),
    }
}
