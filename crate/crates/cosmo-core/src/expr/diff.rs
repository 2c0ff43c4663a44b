//! Symbolic differentiation on expression trees.

use super::{rat, Elementary, Expr, ExprNode};

/// Single derivative of `e` with respect to `var`. The result is a raw
/// tree; callers simplify as needed.
pub(super) fn diff(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e.node() {
        ExprNode::Rational(_) => Expr::zero(),
        ExprNode::Symbol(s) => {
            if s == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        ExprNode::FuncApp(f, x) => {
            if x == var {
                Expr::deriv(f, x, 1)
            } else {
                Expr::zero()
            }
        }
        ExprNode::Deriv(f, x, n) => {
            if x == var {
                Expr::deriv(f, x, n + 1)
            } else {
                Expr::zero()
            }
        }
        ExprNode::Add(terms) => {
            Expr::add(terms.iter().map(|t| diff(t, var)).collect())
        }
        ExprNode::Mul(factors) => {
            let mut terms = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                let df = diff(f, var);
                if df.is_zero_literal() {
                    continue;
                }
                let mut prod: Vec<Expr> = Vec::with_capacity(factors.len());
                for (j, g) in factors.iter().enumerate() {
                    prod.push(if i == j { df.clone() } else { g.clone() });
                }
                terms.push(Expr::mul(prod));
            }
            Expr::add(terms)
        }
        ExprNode::Pow(b, x) => {
            let db = diff(b, var);
            let dx = diff(x, var);
            if dx.is_zero_literal() {
                // d(b^c) = c * b^(c-1) * b'
                let em1 = x.clone() - Expr::one();
                return Expr::mul(vec![x.clone(), Expr::pow(b.clone(), em1), db]);
            }
            // General case through the logarithmic derivative:
            // d(b^x) = b^x * (x' ln b + x b'/b)
            let mut inner = vec![Expr::mul(vec![dx, Expr::ln(b.clone())])];
            if !db.is_zero_literal() {
                inner.push(Expr::mul(vec![x.clone(), db, b.clone().inv()]));
            }
            Expr::mul(vec![e.clone(), Expr::add(inner)])
        }
        ExprNode::Elem(f, a) => {
            let da = diff(a, var);
            if da.is_zero_literal() {
                return Expr::zero();
            }
            let outer = match f {
                Elementary::Exp => e.clone(),
                Elementary::Ln => a.clone().inv(),
                Elementary::Sin => Expr::cos(a.clone()),
                Elementary::Cos => Expr::sin(a.clone()).neg(),
                Elementary::Sqrt => Expr::mul(vec![
                    Expr::rational(rat(1, 2)),
                    Expr::pow(a.clone(), Expr::rational(rat(-1, 2))),
                ]),
            };
            Expr::mul(vec![outer, da])
        }
    }
}
