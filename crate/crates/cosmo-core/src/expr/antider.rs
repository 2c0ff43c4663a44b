//! Closed-form antiderivatives for the function family the
//! reconstruction pipeline produces: sums of power terms `c * t^n`
//! (any rational n, including -1) times exponentials `exp(a*t + b)`
//! whose exponent is affine in the integration variable. Anything
//! outside that family reports `NoClosedForm` so callers can fall back
//! to a series method.

use super::canon::{Atom, CanonError, CanonicalForm, Mono};
use super::{rat_int, Expr, Rat};
use num_traits::Zero;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum AntiderivativeResult {
    /// An antiderivative with zero integration constant.
    ClosedForm(Expr),
    /// The integrand is outside the supported family.
    NoClosedForm,
}

pub fn antiderivative(e: &Expr, var: &str) -> Result<AntiderivativeResult, CanonError> {
    let canon = CanonicalForm::of(e)?;
    if canon.is_zero_canonical() {
        return Ok(AntiderivativeResult::ClosedForm(Expr::zero()));
    }
    // Multi-term denominator factors must not involve the variable;
    // constant ones just scale the result.
    for (f, _) in &canon.den {
        let fc = CanonicalForm::from_poly(f.clone());
        if fc.depends_on_symbol(var) {
            return Ok(AntiderivativeResult::NoClosedForm);
        }
    }
    let mut acc = CanonicalForm::zero();
    for (mono, c) in &canon.num.0 {
        match integrate_mono(mono, c, var)? {
            Some(piece) => acc = acc.add(&piece),
            None => return Ok(AntiderivativeResult::NoClosedForm),
        }
    }
    if !canon.den.is_empty() {
        let inv_den = CanonicalForm::reduce(
            super::canon::Poly::one(),
            canon.den.clone(),
        );
        acc = acc.mul(&inv_den);
    }
    Ok(AntiderivativeResult::ClosedForm(acc.to_expr()))
}

fn atom_depends(a: &Atom, var: &str) -> bool {
    match a {
        Atom::Sym(s) => s == var,
        Atom::Int(_) => false,
        Atom::Func(_, x) | Atom::Deriv(_, x, _) => x == var,
        Atom::Sin(u) | Atom::Cos(u) | Atom::Ln(u) | Atom::Base(u) => u.depends_on_symbol(var),
    }
}

fn integrate_mono(
    mono: &Mono,
    c: &Rat,
    var: &str,
) -> Result<Option<CanonicalForm>, CanonError> {
    let mut texp = rat_int(0);
    let mut rest = Mono::default();
    for (atom, e) in &mono.atoms {
        match atom {
            Atom::Sym(s) if s == var => texp = e.clone(),
            a if atom_depends(a, var) => return Ok(None),
            _ => {
                rest.atoms.insert(atom.clone(), e.clone());
            }
        }
    }
    if let Some(s) = &mono.expf {
        if s.depends_on_symbol(var) {
            if !texp.is_zero() {
                // Polynomial-times-exponential needs integration by
                // parts; out of scope.
                return Ok(None);
            }
            let ds = CanonicalForm::of(&s.to_expr().diff(var, 1))?;
            if ds.is_zero_canonical() || ds.depends_on_symbol(var) {
                return Ok(None);
            }
            rest.expf = Some(s.clone());
            let body = CanonicalForm {
                num: super::canon::Poly::from_mono(rest, c.clone()),
                den: Vec::new(),
            };
            return Ok(Some(body.div(&ds)?));
        }
        rest.expf = Some(s.clone());
    }
    if texp == rat_int(-1) {
        let lnt = Atom::Ln(Arc::new(CanonicalForm::of(&Expr::sym(var))?));
        rest.atoms.insert(lnt, rat_int(1));
        return Ok(Some(CanonicalForm {
            num: super::canon::Poly::from_mono(rest, c.clone()),
            den: Vec::new(),
        }));
    }
    let n1 = texp + rat_int(1);
    if !n1.is_zero() {
        rest.atoms.insert(Atom::Sym(var.to_string()), n1.clone());
    }
    Ok(Some(CanonicalForm {
        num: super::canon::Poly::from_mono(rest, c / n1),
        den: Vec::new(),
    }))
}
