//! Deciding whether an expression is identically zero.
//!
//! The primary route is canonicalization: a canonical form with an
//! empty numerator is zero, unconditionally. A canonical form with a
//! nonzero numerator proves the function nonzero whenever the kernels
//! it is built from are algebraically independent, which holds for the
//! rational fragment (symbols, opaque functions, derivatives, a single
//! logarithm argument, a single trigonometric argument, exponentials).
//!
//! Outside that fragment the canonical form can miss identities, for
//! example `sin(2u) - 2 sin(u) cos(u)` or `sqrt(x^2 + 2x + 1) - (x+1)`.
//! When the form contains an opaque fractional power, two or more
//! distinct logarithm arguments, or two or more distinct trigonometric
//! arguments, the decision falls back to seeded numeric sampling: the
//! expression is evaluated at pseudo-random points with every symbol
//! and kernel drawn uniformly from [0.1, 2.0]. Sampled decisions are
//! reported as such. Points where evaluation hits a domain error are
//! skipped; if every point is singular the result is `Undecidable`.

use super::canon::{Atom, CanonError, CanonicalForm, Poly};
use super::{eval, Bindings, EvalError, Expr, ExprNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

const SAMPLE_SEED: u64 = 0xC0540;
const SAMPLE_POINTS: usize = 20;
const SAMPLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ZeroError {
    #[error(transparent)]
    Canon(#[from] CanonError),
}

/// How a decision was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionPath {
    /// Proved by canonicalization alone.
    Canonical,
    /// Resolved by seeded numeric sampling.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroDecision {
    Zero(DecisionPath),
    NonZero(DecisionPath),
    /// Every sample point was singular.
    Undecidable,
}

pub fn decide_zero(e: &Expr) -> Result<ZeroDecision, ZeroError> {
    let canon = CanonicalForm::of(e)?;
    if canon.is_zero_canonical() {
        return Ok(ZeroDecision::Zero(DecisionPath::Canonical));
    }
    let mut triggers = Triggers::default();
    scan_canonical(&canon, &mut triggers);
    if !triggers.fire() {
        return Ok(ZeroDecision::NonZero(DecisionPath::Canonical));
    }
    Ok(sample(&canon.to_expr()))
}

/// `true` exactly when the decision is `Zero` (on either path).
pub fn is_zero(e: &Expr) -> Result<bool, ZeroError> {
    Ok(matches!(decide_zero(e)?, ZeroDecision::Zero(_)))
}

/// Structural equality of canonical forms: a deterministic, purely
/// algebraic check with no sampling involved.
pub fn canonically_equal(a: &Expr, b: &Expr) -> Result<bool, ZeroError> {
    Ok(CanonicalForm::of(a)? == CanonicalForm::of(b)?)
}

#[derive(Default)]
struct Triggers {
    opaque_bases: usize,
    ln_args: BTreeSet<CanonicalForm>,
    trig_args: BTreeSet<CanonicalForm>,
}

impl Triggers {
    fn fire(&self) -> bool {
        self.opaque_bases > 0 || self.ln_args.len() >= 2 || self.trig_args.len() >= 2
    }
}

fn scan_canonical(c: &CanonicalForm, t: &mut Triggers) {
    scan_poly(&c.num, t);
    for (f, _) in &c.den {
        scan_poly(f, t);
    }
}

fn scan_poly(p: &Poly, t: &mut Triggers) {
    for m in p.0.keys() {
        if let Some(arg) = &m.expf {
            scan_canonical(arg, t);
        }
        for atom in m.atoms.keys() {
            match atom {
                Atom::Sin(u) | Atom::Cos(u) => {
                    t.trig_args.insert((**u).clone());
                    scan_canonical(u, t);
                }
                Atom::Ln(u) => {
                    t.ln_args.insert((**u).clone());
                    scan_canonical(u, t);
                }
                Atom::Base(u) => {
                    t.opaque_bases += 1;
                    scan_canonical(u, t);
                }
                Atom::Sym(_) | Atom::Int(_) | Atom::Func(_, _) | Atom::Deriv(_, _, _) => {}
            }
        }
    }
}

fn sample(e: &Expr) -> ZeroDecision {
    let symbols = e.symbols();
    let mut kernels: BTreeSet<(String, String, u32)> = BTreeSet::new();
    collect_kernels(e, &mut kernels);
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut evaluated = 0usize;
    for _ in 0..SAMPLE_POINTS {
        let mut b = Bindings::new();
        for s in &symbols {
            if s == "Pi" {
                continue;
            }
            b.set_symbol(s, rng.gen_range(0.1..2.0));
        }
        for (f, x, n) in &kernels {
            b.set_function(f, x, *n, rng.gen_range(0.1..2.0));
        }
        match eval(e, &b) {
            Ok(v) => {
                evaluated += 1;
                if v.abs() > SAMPLE_TOLERANCE {
                    return ZeroDecision::NonZero(DecisionPath::Sampled);
                }
            }
            Err(EvalError::Domain(_)) | Err(EvalError::NonFinite) => continue,
            Err(_) => return ZeroDecision::Undecidable,
        }
    }
    if evaluated == 0 {
        ZeroDecision::Undecidable
    } else {
        ZeroDecision::Zero(DecisionPath::Sampled)
    }
}

fn collect_kernels(e: &Expr, out: &mut BTreeSet<(String, String, u32)>) {
    match e.node() {
        ExprNode::FuncApp(f, x) => {
            out.insert((f.clone(), x.clone(), 0));
        }
        ExprNode::Deriv(f, x, n) => {
            out.insert((f.clone(), x.clone(), *n));
        }
        ExprNode::Add(ts) => {
            for t in ts {
                collect_kernels(t, out);
            }
        }
        ExprNode::Mul(fs) => {
            for f in fs {
                collect_kernels(f, out);
            }
        }
        ExprNode::Pow(b, x) => {
            collect_kernels(b, out);
            collect_kernels(x, out);
        }
        ExprNode::Elem(_, a) => collect_kernels(a, out),
        ExprNode::Rational(_) | ExprNode::Symbol(_) => {}
    }
}
