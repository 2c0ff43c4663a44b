//! Deterministic text rendering of expression trees.
//!
//! `print` produces a string in the same grammar the parser accepts, so
//! `parse(print(e))` is always canonically equal to `e`. Products are
//! rendered as fractions: factors with negative rational exponents move
//! below the bar. `latex` is a best-effort display-math rendering.

use super::{rat_int, Elementary, Expr, ExprNode, Rat};
use num_traits::Signed;

/// Render as parseable text.
pub fn print(e: &Expr) -> String {
    fmt(e, 1)
}

// Levels: 1 sum, 2 product, 3 power, 4 atom. A child whose own level is
// below the level its context requires gets parenthesized.
fn fmt(e: &Expr, min: u8) -> String {
    let (s, lvl) = render(e);
    if lvl < min {
        format!("({s})")
    } else {
        s
    }
}

fn render(e: &Expr) -> (String, u8) {
    match e.node() {
        ExprNode::Rational(r) => render_rat(r),
        ExprNode::Symbol(s) => (s.clone(), 4),
        ExprNode::FuncApp(f, x) => (format!("{f}({x})"), 4),
        ExprNode::Deriv(f, x, n) => {
            if *n == 1 {
                (format!("diff({f}({x}),{x})"), 4)
            } else {
                (format!("diff({f}({x}),{x},{n})"), 4)
            }
        }
        ExprNode::Elem(f, a) => (format!("{}({})", f.name(), fmt(a, 1)), 4),
        ExprNode::Add(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                let (neg, abs) = strip_sign(t);
                let s = fmt(&abs, 2);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                    out.push_str(&s);
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                    out.push_str(&s);
                }
            }
            if out.is_empty() {
                out.push('0');
            }
            (out, 1)
        }
        ExprNode::Mul(factors) => render_product(factors),
        ExprNode::Pow(b, x) => (render_pow(b, x), 3),
    }
}

fn render_rat(r: &Rat) -> (String, u8) {
    let neg = r.is_negative();
    let a = r.abs();
    let s = if a.is_integer() {
        format!("{}", a.numer())
    } else {
        format!("{}/{}", a.numer(), a.denom())
    };
    if neg {
        (format!("-{s}"), 1)
    } else if a.is_integer() {
        (s, 4)
    } else {
        (s, 2)
    }
}

/// Split a multiplicative sign off a term for sum rendering.
fn strip_sign(e: &Expr) -> (bool, Expr) {
    match e.node() {
        ExprNode::Rational(r) if r.is_negative() => (true, Expr::rational(r.abs())),
        ExprNode::Mul(fs) => {
            let mut neg = false;
            let mut out = Vec::with_capacity(fs.len());
            for f in fs {
                if let ExprNode::Rational(r) = f.node() {
                    if r.is_negative() {
                        neg = !neg;
                        let a = r.abs();
                        if a != rat_int(1) || fs.len() == 1 {
                            out.push(Expr::rational(a));
                        }
                        continue;
                    }
                }
                out.push(f.clone());
            }
            if neg {
                (true, Expr::mul(out))
            } else {
                (false, e.clone())
            }
        }
        _ => (false, e.clone()),
    }
}

fn render_product(factors: &[Expr]) -> (String, u8) {
    let mut coeff = rat_int(1);
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<(String, u8)> = Vec::new();
    for f in factors {
        match f.node() {
            ExprNode::Rational(r) => coeff *= r,
            ExprNode::Pow(b, x) => match x.as_rational() {
                Some(r) if r.is_negative() => {
                    let e = -r;
                    if e == rat_int(1) {
                        den.push(render(b));
                    } else {
                        den.push((render_pow(b, &Expr::rational(e)), 3));
                    }
                }
                _ => num.push(fmt(f, 2)),
            },
            _ => num.push(fmt(f, 2)),
        }
    }
    let neg = coeff.is_negative();
    let a = coeff.abs();
    if a.numer() != &rat_int(1).to_integer() || num.is_empty() {
        num.insert(0, a.numer().to_string());
    }
    if !a.denom().eq(&rat_int(1).to_integer()) {
        den.push((a.denom().to_string(), 4));
    }
    let mut out = num.join("*");
    if !den.is_empty() {
        out.push('/');
        if den.len() == 1 {
            let (s, lvl) = den.into_iter().next().unwrap();
            if lvl < 3 {
                out.push_str(&format!("({s})"));
            } else {
                out.push_str(&s);
            }
        } else {
            out.push('(');
            out.push_str(
                &den.into_iter()
                    .map(|(s, _)| s)
                    .collect::<Vec<_>>()
                    .join("*"),
            );
            out.push(')');
        }
    }
    if neg {
        (format!("-{out}"), 1)
    } else {
        (out, 2)
    }
}

fn render_pow(b: &Expr, x: &Expr) -> String {
    if let Some(r) = x.as_rational() {
        if *r == super::rat(1, 2) {
            return format!("sqrt({})", fmt(b, 1));
        }
        let bs = fmt(b, 4);
        return if r.is_integer() && !r.is_negative() {
            format!("{bs}^{}", r.numer())
        } else {
            format!("{bs}^({})", render_rat(r).0)
        };
    }
    format!("{}^({})", fmt(b, 4), fmt(x, 1))
}

/// Best-effort display-math rendering.
pub fn latex(e: &Expr) -> String {
    ltx(e, 1)
}

fn greek(name: &str) -> String {
    match name {
        "Pi" => r"\pi".into(),
        "theta" => r"\theta".into(),
        "phi" => r"\varphi".into(),
        "phi0" => r"\varphi_0".into(),
        "lambda" => r"\lambda".into(),
        "epsilon" => r"\varepsilon".into(),
        "omega" => r"\omega".into(),
        "rho" => r"\rho".into(),
        _ => {
            if let Some(rest) = name.strip_suffix(|c: char| c.is_ascii_digit()) {
                if !rest.is_empty() && name.len() == rest.len() + 1 {
                    return format!("{}_{}", rest, &name[rest.len()..]);
                }
            }
            name.into()
        }
    }
}

fn ltx(e: &Expr, min: u8) -> String {
    let (s, lvl) = ltx_render(e);
    if lvl < min {
        format!(r"\left({s}\right)")
    } else {
        s
    }
}

fn ltx_render(e: &Expr) -> (String, u8) {
    match e.node() {
        ExprNode::Rational(r) => {
            let neg = r.is_negative();
            let a = r.abs();
            let s = if a.is_integer() {
                a.numer().to_string()
            } else {
                format!(r"\tfrac{{{}}}{{{}}}", a.numer(), a.denom())
            };
            if neg {
                (format!("-{s}"), 1)
            } else {
                (s, 4)
            }
        }
        ExprNode::Symbol(s) => (greek(s), 4),
        ExprNode::FuncApp(f, x) => (format!("{}({})", greek(f), greek(x)), 4),
        ExprNode::Deriv(f, x, n) => {
            let s = match n {
                1 => format!("{}'({})", greek(f), greek(x)),
                2 => format!("{}''({})", greek(f), greek(x)),
                n => format!("{}^{{({n})}}({})", greek(f), greek(x)),
            };
            (s, 4)
        }
        ExprNode::Elem(f, a) => {
            let inner = ltx(a, 1);
            let s = match f {
                Elementary::Exp => format!(r"e^{{{inner}}}"),
                Elementary::Ln => format!(r"\ln\left({inner}\right)"),
                Elementary::Sin => format!(r"\sin\left({inner}\right)"),
                Elementary::Cos => format!(r"\cos\left({inner}\right)"),
                Elementary::Sqrt => format!(r"\sqrt{{{inner}}}"),
            };
            (s, 4)
        }
        ExprNode::Add(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                let (neg, abs) = strip_sign(t);
                let s = ltx(&abs, 2);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                    out.push_str(&s);
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                    out.push_str(&s);
                }
            }
            if out.is_empty() {
                out.push('0');
            }
            (out, 1)
        }
        ExprNode::Mul(factors) => {
            let mut coeff = rat_int(1);
            let mut num: Vec<String> = Vec::new();
            let mut den: Vec<String> = Vec::new();
            for f in factors {
                match f.node() {
                    ExprNode::Rational(r) => coeff *= r,
                    ExprNode::Pow(b, x) => match x.as_rational() {
                        Some(r) if r.is_negative() => {
                            let e = -r;
                            if e == rat_int(1) {
                                den.push(ltx(b, 2));
                            } else {
                                den.push(ltx_render_pow(b, &e));
                            }
                        }
                        _ => num.push(ltx(f, 2)),
                    },
                    _ => num.push(ltx(f, 2)),
                }
            }
            let neg = coeff.is_negative();
            let a = coeff.abs();
            if !a.numer().eq(&rat_int(1).to_integer()) || num.is_empty() {
                num.insert(0, a.numer().to_string());
            }
            if !a.denom().eq(&rat_int(1).to_integer()) {
                den.push(a.denom().to_string());
            }
            let joined = num.join(r" \, ");
            let out = if den.is_empty() {
                joined
            } else {
                format!(r"\frac{{{joined}}}{{{}}}", den.join(r" \, "))
            };
            if neg {
                (format!("-{out}"), 1)
            } else {
                (out, 2)
            }
        }
        ExprNode::Pow(b, x) => {
            if let Some(r) = x.as_rational() {
                if *r == super::rat(1, 2) {
                    return (format!(r"\sqrt{{{}}}", ltx(b, 1)), 4);
                }
                return (ltx_render_pow(b, r), 3);
            }
            (format!("{}^{{{}}}", ltx(b, 4), ltx(x, 1)), 3)
        }
    }
}

fn ltx_render_pow(b: &Expr, r: &Rat) -> String {
    let e = if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    };
    format!("{}^{{{e}}}", ltx(b, 4))
}
