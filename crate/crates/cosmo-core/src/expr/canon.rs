//! Canonical forms: ratios of multivariate polynomials over kernels.
//!
//! Every expression is rewritten as `num / (f1^m1 * f2^m2 * ...)` where
//! `num` and the `fi` are expanded polynomials whose variables are
//! opaque kernels: symbols, function applications, derivative nodes,
//! trigonometric and logarithmic applications, and fractional powers of
//! non-monomial subexpressions. Monomials carry exact rational
//! exponents, so `sqrt(k)*sqrt(k)` collapses to `k` by exponent
//! arithmetic. Each monomial also carries at most one exponential
//! factor `exp(S)`; multiplying monomials adds the `S` parts, which
//! makes the usual exponent laws hold structurally. Two rewrites keep
//! kernels independent: even powers of `sin(u)` become `1 - cos(u)^2`,
//! and terms `q*ln(X)` inside an `exp` argument are pulled out as `X^q`.
//!
//! Denominator factors are kept in factored form, normalized to have
//! content one and positive leading coefficient; the numerator is
//! reduced against them by trial exact division. Equality of two
//! canonical forms of the same mathematical function is guaranteed when
//! both are rational in the same kernel set; `sin`, `cos` and `exp`
//! identities inside that fragment are covered by the rewrites above.

use super::{rat, rat_int, Elementary, Expr, ExprNode, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CanonError {
    #[error("division by zero in canonicalization")]
    DivisionByZero,
    #[error("domain error in canonicalization: {0}")]
    Domain(String),
}

/// Kernel variable of the polynomial layer.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub(crate) enum Atom {
    Sym(String),
    /// Integer surd base (kept when a rational is raised to a
    /// fractional power), always >= 2.
    Int(BigInt),
    Func(String, String),
    Deriv(String, String, u32),
    Sin(Arc<CanonicalForm>),
    Cos(Arc<CanonicalForm>),
    Ln(Arc<CanonicalForm>),
    /// A non-monomial expression carried opaquely under a fractional
    /// exponent.
    Base(Arc<CanonicalForm>),
}

/// Product of kernels with rational exponents, plus at most one
/// exponential factor. The coefficient lives in the enclosing `Poly`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub(crate) struct Mono {
    pub(crate) atoms: BTreeMap<Atom, Rat>,
    pub(crate) expf: Option<Arc<CanonicalForm>>,
}

impl Mono {
    pub(crate) fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.expf.is_none()
    }

    pub(crate) fn exponent(&self, a: &Atom) -> Rat {
        self.atoms.get(a).cloned().unwrap_or_else(|| rat_int(0))
    }

    /// Total degree: the sum of all atom exponents.
    fn degree(&self) -> Rat {
        self.atoms
            .values()
            .fold(rat_int(0), |acc, e| acc + e)
    }

    /// Graded comparison used for polynomial division: total degree
    /// first, then lexicographic on the union of atoms, then on the
    /// exponential part. Translation invariant whenever the exponential
    /// parts agree, which is what makes the division bound sound.
    fn cmp_graded(&self, other: &Mono) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut ia = self.atoms.iter().peekable();
        let mut ib = other.atoms.iter().peekable();
        loop {
            match (ia.peek(), ib.peek()) {
                (None, None) => break,
                (Some((ka, ea)), Some((kb, eb))) => match ka.cmp(kb) {
                    Ordering::Less => {
                        // self has an atom the other lacks: exponent vs 0
                        match ea.cmp(&&rat_int(0)) {
                            Ordering::Equal => {
                                ia.next();
                            }
                            ord => return ord,
                        }
                    }
                    Ordering::Greater => match rat_int(0).cmp(eb) {
                        Ordering::Equal => {
                            ib.next();
                        }
                        ord => return ord,
                    },
                    Ordering::Equal => {
                        match ea.cmp(eb) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        ia.next();
                        ib.next();
                    }
                },
                (Some((_, ea)), None) => match ea.cmp(&&rat_int(0)) {
                    Ordering::Equal => {
                        ia.next();
                    }
                    ord => return ord,
                },
                (None, Some((_, eb))) => match rat_int(0).cmp(eb) {
                    Ordering::Equal => {
                        ib.next();
                    }
                    ord => return ord,
                },
            }
        }
        self.expf.cmp(&other.expf)
    }
}

/// Expanded polynomial: monomial -> nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub(crate) struct Poly(pub(crate) BTreeMap<Mono, Rat>);

impl Poly {
    pub(crate) fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    pub(crate) fn one() -> Poly {
        Poly::constant(rat_int(1))
    }

    pub(crate) fn constant(c: Rat) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Mono::default(), c);
        p
    }

    pub(crate) fn from_mono(m: Mono, c: Rat) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn is_one(&self) -> bool {
        self.as_constant().map_or(false, |c| c == rat_int(1))
    }

    pub(crate) fn as_constant(&self) -> Option<Rat> {
        if self.0.is_empty() {
            return Some(rat_int(0));
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub(crate) fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }

    pub(crate) fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub(crate) fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, k)| (m.clone(), k * c)).collect())
    }

    fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.0.iter().max_by(|a, b| a.0.cmp_graded(b.0))
    }

    fn trailing(&self) -> Option<(&Mono, &Rat)> {
        self.0.iter().min_by(|a, b| a.0.cmp_graded(b.0))
    }

    /// Content: rational scalar and monomial such that dividing them
    /// out leaves coprime integer coefficients, positive leading
    /// coefficient, and no extractable common atom powers. `sin` and
    /// opaque fractional-power atoms are never extracted so that the
    /// division stays rewrite-free.
    fn content(&self) -> (Rat, Mono) {
        if self.0.is_empty() {
            return (rat_int(1), Mono::default());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.0.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut g = Rat::new(num_gcd, den_lcm);
        if let Some((_, lc)) = self.leading() {
            if lc.is_negative() {
                g = -g;
            }
        }
        // Atom part: extremal exponents over all monomials (absent = 0).
        let mut mono = Mono::default();
        let first = self.0.keys().next().unwrap();
        for atom in first.atoms.keys() {
            if matches!(atom, Atom::Sin(_) | Atom::Base(_)) {
                continue;
            }
            let mut min: Option<Rat> = None;
            for m in self.0.keys() {
                let e = m.exponent(atom);
                min = Some(match min {
                    None => e,
                    Some(cur) => cur.min(e),
                });
                if min.as_ref().unwrap().is_zero() {
                    break;
                }
            }
            let min = min.unwrap();
            if !min.is_zero() {
                mono.atoms.insert(atom.clone(), min);
            }
        }
        // Negative powers may also hide on atoms absent from the first
        // monomial only if some other monomial has them negative; those
        // have min <= 0 and the loop above misses them. Collect them too.
        let mut extra: BTreeMap<Atom, Rat> = BTreeMap::new();
        for m in self.0.keys() {
            for (atom, e) in &m.atoms {
                if matches!(atom, Atom::Sin(_) | Atom::Base(_)) {
                    continue;
                }
                if e.is_negative() && !mono.atoms.contains_key(atom) {
                    let cur = extra.entry(atom.clone()).or_insert_with(|| e.clone());
                    if *e < *cur {
                        *cur = e.clone();
                    }
                }
            }
        }
        for (atom, e) in extra {
            // Verify it is really the minimum over all monomials.
            let mut min = e;
            for m in self.0.keys() {
                let x = m.exponent(&atom);
                if x < min {
                    min = x;
                }
            }
            if min.is_negative() {
                mono.atoms.insert(atom, min);
            }
        }
        // Common exponential factor only when identical on every term.
        let expf = first.expf.clone();
        if expf.is_some() && self.0.keys().all(|m| m.expf == expf) {
            mono.expf = expf;
        }
        (g, mono)
    }

    /// Divide out a content pair previously obtained from `content`.
    fn strip_content(&self, g: &Rat, mono: &Mono) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut atoms = m.atoms.clone();
            for (atom, e) in &mono.atoms {
                let cur = atoms.remove(atom).unwrap_or_else(|| rat_int(0)) - e;
                if !cur.is_zero() {
                    atoms.insert(atom.clone(), cur);
                }
            }
            let expf = if mono.expf.is_some() { None } else { m.expf.clone() };
            out.add_term(Mono { atoms, expf }, c / g);
        }
        out
    }
}

fn rat_floor_int(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

fn rat_pow_bigint(base: &Rat, n: &BigInt) -> Rat {
    let e = n
        .to_i64()
        .expect("exponent magnitude exceeds supported range");
    let mut acc = rat_int(1);
    let b = if e >= 0 { base.clone() } else { base.recip() };
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    acc
}

/// Accumulates one monomial under multiplication, applying the
/// normalization rewrites. `promote` collects factors that left the
/// monomial layer (for example `(1 - cos^2)` powers from sine rewrites).
struct MonoBuilder {
    coeff: Rat,
    atoms: BTreeMap<Atom, Rat>,
    exparg: Option<CanonicalForm>,
    promote: Option<CanonicalForm>,
}

impl MonoBuilder {
    fn new(coeff: Rat) -> Self {
        MonoBuilder {
            coeff,
            atoms: BTreeMap::new(),
            exparg: None,
            promote: None,
        }
    }

    fn promote_mul(&mut self, c: CanonicalForm) {
        self.promote = Some(match self.promote.take() {
            None => c,
            Some(p) => p.mul(&c),
        });
    }

    fn mul_atom(&mut self, atom: &Atom, exp: &Rat) {
        if exp.is_zero() {
            return;
        }
        let total = self.atoms.remove(atom).unwrap_or_else(|| rat_int(0)) + exp;
        if total.is_zero() {
            return;
        }
        match atom {
            Atom::Sin(u) => {
                // sin^e = (1 - cos^2)^m * sin^s with e = 2m + s, s in [0,2)
                let m = rat_floor_int(&(&total / rat_int(2)));
                let s = &total - Rat::from_integer(m.clone()) * rat_int(2);
                if !m.is_zero() {
                    let mut p = Poly::one();
                    let mut cos2 = Mono::default();
                    cos2.atoms.insert(Atom::Cos(u.clone()), rat_int(2));
                    p.add_term(cos2, rat_int(-1));
                    let factor = CanonicalForm::from_poly(p)
                        .pow_int(m.to_i64().expect("sine rewrite exponent too large"))
                        .expect("1 - cos^2 is not the zero polynomial");
                    self.promote_mul(factor);
                }
                if !s.is_zero() {
                    self.atoms.insert(atom.clone(), s);
                }
            }
            Atom::Int(n) => {
                // Fold integer parts of the exponent into the coefficient.
                let m = rat_floor_int(&total);
                let s = &total - Rat::from_integer(m.clone());
                if !m.is_zero() {
                    self.coeff *= rat_pow_bigint(&Rat::from_integer(n.clone()), &m);
                }
                if !s.is_zero() {
                    self.atoms.insert(atom.clone(), s);
                }
            }
            Atom::Base(b) => {
                let m = rat_floor_int(&total);
                let s = &total - Rat::from_integer(m.clone());
                if !m.is_zero() {
                    match b.pow_int(m.to_i64().expect("power exponent too large")) {
                        Ok(f) => self.promote_mul(f),
                        Err(_) => {
                            // Zero base cannot appear here; keep unsplit.
                            self.atoms.insert(atom.clone(), total);
                            return;
                        }
                    }
                }
                if !s.is_zero() {
                    self.atoms.insert(atom.clone(), s);
                }
            }
            _ => {
                self.atoms.insert(atom.clone(), total);
            }
        }
    }

    fn mul_exparg(&mut self, arg: &CanonicalForm, scale: &Rat) {
        let scaled = arg.scale(scale);
        let next = match self.exparg.take() {
            None => scaled,
            Some(cur) => cur.add(&scaled),
        };
        if !next.is_zero_canonical() {
            self.exparg = Some(next);
        }
    }

    fn mul_mono(&mut self, m: &Mono, power: &Rat) {
        for (atom, e) in &m.atoms {
            self.mul_atom(atom, &(e * power));
        }
        if let Some(arg) = &m.expf {
            self.mul_exparg(arg, power);
        }
    }

    fn finish(self) -> (Mono, Rat, Option<CanonicalForm>) {
        (
            Mono {
                atoms: self.atoms,
                expf: self.exparg.map(Arc::new),
            },
            self.coeff,
            self.promote,
        )
    }
}

/// Multiply two polynomials. The clean part comes back as a polynomial;
/// monomial products that triggered rewrites come back separately.
fn poly_mul(a: &Poly, b: &Poly) -> (Poly, Vec<(Mono, Rat, CanonicalForm)>) {
    let mut out = Poly::zero();
    let mut extras = Vec::new();
    for (ma, ca) in &a.0 {
        for (mb, cb) in &b.0 {
            let mut builder = MonoBuilder::new(ca * cb);
            builder.mul_mono(ma, &rat_int(1));
            builder.mul_mono(mb, &rat_int(1));
            let (mono, coeff, promote) = builder.finish();
            match promote {
                None => out.add_term(mono, coeff),
                Some(p) => extras.push((mono, coeff, p)),
            }
        }
    }
    (out, extras)
}

/// Quotient of two monomials, or `None` when the division would need a
/// rewrite (so trial division conservatively fails).
fn mono_div(a: &Mono, ca: &Rat, b: &Mono, cb: &Rat) -> Option<(Mono, Rat)> {
    let mut builder = MonoBuilder::new(ca / cb);
    builder.mul_mono(a, &rat_int(1));
    builder.mul_mono(b, &rat_int(-1));
    let (mono, coeff, promote) = builder.finish();
    if promote.is_some() {
        return None;
    }
    Some((mono, coeff))
}

/// Exact polynomial division, used to cancel denominator factors.
/// Returns `None` when `n` is not (recognizably) divisible by `d`.
/// Quotient of two monomials by plain exponent arithmetic, with none of
/// the normalization rewrites. Only used for ordering comparisons.
fn mono_naive_div(a: &Mono, b: &Mono) -> Mono {
    let mut atoms = a.atoms.clone();
    for (atom, e) in &b.atoms {
        let cur = atoms.remove(atom).unwrap_or_else(|| rat_int(0)) - e;
        if !cur.is_zero() {
            atoms.insert(atom.clone(), cur);
        }
    }
    let expf = match (&a.expf, &b.expf) {
        (x, None) => x.clone(),
        (None, Some(s)) => Some(Arc::new(s.neg())),
        (Some(r), Some(s)) => {
            let diff = r.sub(s);
            if diff.is_zero_canonical() {
                None
            } else {
                Some(Arc::new(diff))
            }
        }
    };
    Mono { atoms, expf }
}

fn poly_div_exact(n: &Poly, d: &Poly) -> Option<Poly> {
    if n.is_zero() {
        return Some(Poly::zero());
    }
    let (dm, dc) = d.leading()?;
    // In an exact division n = q*d every quotient monomial is at least
    // trailing(q) = trailing(n)/trailing(d), because the graded order
    // respects multiplication. A quotient monomial below that bound
    // proves the division inexact; without this check Laurent monomials
    // would let the loop expand an endless power series.
    let bound = mono_naive_div(n.trailing()?.0, d.trailing()?.0);
    let mut rem = n.clone();
    let mut q = Poly::zero();
    let mut prev_lead: Option<Mono> = None;
    for _ in 0..10_000 {
        let (rm, rc) = match rem.leading() {
            None => return Some(q),
            Some((m, c)) => (m.clone(), c.clone()),
        };
        if let Some(prev) = &prev_lead {
            // The leading monomial must strictly decrease or the
            // division cannot terminate in this order.
            if rm.cmp_graded(prev) != std::cmp::Ordering::Less {
                return None;
            }
        }
        prev_lead = Some(rm.clone());
        let (qm, qc) = mono_div(&rm, &rc, dm, dc)?;
        if qm.cmp_graded(&bound) == std::cmp::Ordering::Less {
            return None;
        }
        let (prod, extras) = poly_mul(&Poly::from_mono(qm.clone(), qc.clone()), d);
        if !extras.is_empty() {
            return None;
        }
        q.add_term(qm, qc);
        rem = rem.sub(&prod);
    }
    None
}

/// Canonical form of an expression: an expanded numerator polynomial
/// over a factored denominator. Structural equality of two canonical
/// forms implies equality of the underlying functions; the converse
/// holds for expressions rational in the same kernel set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CanonicalForm {
    pub(crate) num: Poly,
    pub(crate) den: Vec<(Poly, u32)>,
}

impl CanonicalForm {
    pub(crate) fn zero() -> Self {
        CanonicalForm {
            num: Poly::zero(),
            den: Vec::new(),
        }
    }

    pub(crate) fn one() -> Self {
        CanonicalForm::from_rat(rat_int(1))
    }

    pub(crate) fn from_rat(r: Rat) -> Self {
        CanonicalForm {
            num: Poly::constant(r),
            den: Vec::new(),
        }
    }

    pub(crate) fn from_poly(p: Poly) -> Self {
        CanonicalForm::reduce(p, Vec::new())
    }

    pub(crate) fn from_atom(a: Atom) -> Self {
        let mut m = Mono::default();
        m.atoms.insert(a, rat_int(1));
        CanonicalForm {
            num: Poly::from_mono(m, rat_int(1)),
            den: Vec::new(),
        }
    }

    /// True when this is exactly the zero constant.
    pub fn is_zero_canonical(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn as_rational_const(&self) -> Option<Rat> {
        if !self.den.is_empty() {
            return None;
        }
        self.num.as_constant()
    }

    pub(crate) fn as_single_mono(&self) -> Option<(&Mono, &Rat)> {
        if !self.den.is_empty() || self.num.0.len() != 1 {
            return None;
        }
        self.num.0.iter().next()
    }

    /// Normalizing constructor: moves monomial content of denominator
    /// factors into the numerator, cancels factors by trial division,
    /// sorts and merges what remains.
    pub(crate) fn reduce(num: Poly, den: Vec<(Poly, u32)>) -> Self {
        if num.is_zero() {
            return CanonicalForm::zero();
        }
        let mut num = num;
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (f, mult) in den {
            if mult == 0 {
                continue;
            }
            debug_assert!(!f.is_zero(), "zero denominator factor");
            let (g, cm) = f.content();
            let prim = f.strip_content(&g, &cm);
            // num /= (g * cm)^mult
            let scale = rat_pow_bigint(&g, &BigInt::from(mult)).recip();
            let mut adjusted = Poly::zero();
            for (m, c) in &num.0 {
                let mut builder = MonoBuilder::new(c * &scale);
                builder.mul_mono(m, &rat_int(1));
                builder.mul_mono(&cm, &-Rat::from_integer(BigInt::from(mult)));
                let (mono, coeff, promote) = builder.finish();
                debug_assert!(promote.is_none(), "content must be rewrite-free");
                adjusted.add_term(mono, coeff);
            }
            num = adjusted;
            if !prim.is_one() {
                factors.push((prim, mult));
            }
        }
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (f, m) in factors {
            match merged.last_mut() {
                Some((lf, lm)) if *lf == f => *lm += m,
                _ => merged.push((f, m)),
            }
        }
        for (f, m) in &mut merged {
            while *m > 0 {
                match poly_div_exact(&num, f) {
                    Some(q) => {
                        num = q;
                        *m -= 1;
                        if num.is_zero() {
                            return CanonicalForm::zero();
                        }
                    }
                    None => break,
                }
            }
        }
        merged.retain(|(_, m)| *m > 0);
        CanonicalForm { num, den: merged }
    }

    pub(crate) fn neg(&self) -> Self {
        CanonicalForm {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub(crate) fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return CanonicalForm::zero();
        }
        CanonicalForm {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        if self.is_zero_canonical() {
            return other.clone();
        }
        if other.is_zero_canonical() {
            return self.clone();
        }
        let den = den_max_merge(&self.den, &other.den);
        let ca = den_difference(&den, &self.den);
        let cb = den_difference(&den, &other.den);
        let (pa, xa) = mul_poly_by_factors(&self.num, &ca);
        let (pb, xb) = mul_poly_by_factors(&other.num, &cb);
        let mut out = CanonicalForm::reduce(pa.add(&pb), den.clone());
        let extras = xa.into_iter().chain(xb);
        for extra in extras {
            let inv_den = CanonicalForm::reduce(Poly::one(), den.clone());
            out = out.add(&extra.mul(&inv_den));
        }
        out
    }

    pub(crate) fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        if self.is_zero_canonical() || other.is_zero_canonical() {
            return CanonicalForm::zero();
        }
        let den = den_sum_merge(&self.den, &other.den);
        let (p, extras) = poly_mul(&self.num, &other.num);
        let mut out = CanonicalForm::reduce(p, den.clone());
        for (mono, coeff, promote) in extras {
            let piece = CanonicalForm {
                num: Poly::from_mono(mono, coeff),
                den: Vec::new(),
            }
            .mul(&promote);
            let inv_den = CanonicalForm::reduce(Poly::one(), den.clone());
            out = out.add(&piece.mul(&inv_den));
        }
        out
    }

    pub(crate) fn inv(&self) -> Result<Self, CanonError> {
        if self.is_zero_canonical() {
            return Err(CanonError::DivisionByZero);
        }
        // Denominator factors move to the numerator.
        let mut out = CanonicalForm::one();
        for (f, m) in &self.den {
            let fc = CanonicalForm::from_poly(f.clone());
            out = out.mul(&fc.pow_int(*m as i64)?);
        }
        // Then divide by the numerator polynomial.
        let (g, cm) = self.num.content();
        let prim = self.num.strip_content(&g, &cm);
        let mut builder = MonoBuilder::new(g.recip());
        builder.mul_mono(&cm, &rat_int(-1));
        let (mono, coeff, promote) = builder.finish();
        debug_assert!(promote.is_none());
        let content_inv = CanonicalForm {
            num: Poly::from_mono(mono, coeff),
            den: Vec::new(),
        };
        out = out.mul(&content_inv);
        if prim.is_one() {
            Ok(out)
        } else {
            let inv_prim = CanonicalForm::reduce(Poly::one(), vec![(prim, 1)]);
            Ok(out.mul(&inv_prim))
        }
    }

    pub(crate) fn div(&self, other: &Self) -> Result<Self, CanonError> {
        Ok(self.mul(&other.inv()?))
    }

    pub(crate) fn pow_int(&self, n: i64) -> Result<Self, CanonError> {
        if n == 0 {
            return Ok(CanonicalForm::one());
        }
        if self.is_zero_canonical() {
            return if n > 0 {
                Ok(CanonicalForm::zero())
            } else {
                Err(CanonError::DivisionByZero)
            };
        }
        let base = if n > 0 { self.clone() } else { self.inv()? };
        let mut acc = CanonicalForm::one();
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    pub(crate) fn pow_rat(&self, e: &Rat) -> Result<Self, CanonError> {
        if e.is_integer() {
            return self.pow_int(
                e.to_integer()
                    .to_i64()
                    .ok_or_else(|| CanonError::Domain("exponent too large".into()))?,
            );
        }
        if self.is_zero_canonical() {
            return if e.is_negative() {
                Err(CanonError::DivisionByZero)
            } else {
                Ok(CanonicalForm::zero())
            };
        }
        if let Some((mono, coeff)) = self.as_single_mono() {
            let mono = mono.clone();
            let coeff = coeff.clone();
            let mut builder = MonoBuilder::new(rat_int(1));
            builder.mul_mono(&mono, e);
            match rat_pow_rat(&coeff, e) {
                Some((c, surds)) => {
                    builder.coeff *= c;
                    for (atom, se) in surds {
                        builder.mul_atom(&atom, &se);
                    }
                }
                None => {
                    let b = CanonicalForm::from_rat(coeff);
                    builder.mul_atom(&Atom::Base(Arc::new(b)), e);
                }
            }
            let (m, c, promote) = builder.finish();
            let out = CanonicalForm {
                num: Poly::from_mono(m, c),
                den: Vec::new(),
            };
            return Ok(match promote {
                None => out,
                Some(p) => out.mul(&p),
            });
        }
        // General base: pull out monomial content, wrap the primitive
        // part as an opaque fractional power.
        let (g, cm) = self.num.content();
        let prim = self.num.strip_content(&g, &cm);
        let base = CanonicalForm::reduce(prim, self.den.clone());
        let content = CanonicalForm {
            num: Poly::from_mono(cm, g),
            den: Vec::new(),
        };
        let content_pow = content.pow_rat(e)?;
        let mut builder = MonoBuilder::new(rat_int(1));
        builder.mul_atom(&Atom::Base(Arc::new(base)), e);
        let (m, c, promote) = builder.finish();
        let out = CanonicalForm {
            num: Poly::from_mono(m, c),
            den: Vec::new(),
        };
        let out = match promote {
            None => out,
            Some(p) => out.mul(&p),
        };
        Ok(out.mul(&content_pow))
    }

    /// Build `exp(arg)`, extracting `q*ln(X)` terms as `X^q` and merging
    /// into a single exponential monomial factor.
    pub(crate) fn exp_of(arg: &CanonicalForm) -> Result<Self, CanonError> {
        if arg.is_zero_canonical() {
            return Ok(CanonicalForm::one());
        }
        let mut multiplier = CanonicalForm::one();
        let mut rest = Poly::zero();
        if arg.den.is_empty() {
            for (m, c) in &arg.num.0 {
                let extractable = m.expf.is_none()
                    && m.atoms.len() == 1
                    && matches!(m.atoms.iter().next(), Some((Atom::Ln(_), e)) if *e == rat_int(1));
                if extractable {
                    if let Some((Atom::Ln(x), _)) = m.atoms.iter().next() {
                        multiplier = multiplier.mul(&x.pow_rat(c)?);
                        continue;
                    }
                }
                rest.add_term(m.clone(), c.clone());
            }
        } else {
            rest = arg.num.clone();
        }
        if rest.is_zero() {
            return Ok(multiplier);
        }
        let rest_arg = if arg.den.is_empty() {
            CanonicalForm {
                num: rest,
                den: Vec::new(),
            }
        } else {
            CanonicalForm {
                num: rest,
                den: arg.den.clone(),
            }
        };
        let mono = Mono {
            atoms: BTreeMap::new(),
            expf: Some(Arc::new(rest_arg)),
        };
        let e = CanonicalForm {
            num: Poly::from_mono(mono, rat_int(1)),
            den: Vec::new(),
        };
        Ok(multiplier.mul(&e))
    }

    pub(crate) fn ln_of(arg: &CanonicalForm) -> Result<Self, CanonError> {
        if arg.is_zero_canonical() {
            return Err(CanonError::Domain("ln of zero".into()));
        }
        if let Some(c) = arg.as_rational_const() {
            if c.is_negative() {
                return Err(CanonError::Domain("ln of a negative constant".into()));
            }
            if c == rat_int(1) {
                return Ok(CanonicalForm::zero());
            }
            // ln(p/q) as an integer combination of prime logarithms, so
            // ln 4 and 2 ln 2 share one canonical form.
            let mut acc = CanonicalForm::zero();
            for (n, sign) in [(c.numer().clone(), 1i64), (c.denom().clone(), -1i64)] {
                if n.is_one() {
                    continue;
                }
                for (p, k) in factor_integer(&n) {
                    let atom = Atom::Ln(Arc::new(CanonicalForm::from_rat(
                        Rat::from_integer(p),
                    )));
                    acc = acc.add(
                        &CanonicalForm::from_atom(atom).scale(&rat_int(sign * k as i64)),
                    );
                }
            }
            return Ok(acc);
        }
        if let Some((m, c)) = arg.as_single_mono() {
            if c == &rat_int(1) {
                if m.atoms.is_empty() {
                    if let Some(s) = &m.expf {
                        // ln(exp(S)) = S
                        return Ok((**s).clone());
                    }
                }
                if m.expf.is_none() && m.atoms.len() == 1 {
                    let (atom, e) = m.atoms.iter().next().unwrap();
                    let inner = match atom {
                        Atom::Base(b) => CanonicalForm::ln_of(b)?,
                        Atom::Int(n) => CanonicalForm::ln_of(&CanonicalForm::from_rat(
                            Rat::from_integer(n.clone()),
                        ))?,
                        other => CanonicalForm::from_atom(Atom::Ln(Arc::new(
                            CanonicalForm::from_atom(other.clone()),
                        ))),
                    };
                    return Ok(inner.scale(e));
                }
            }
        }
        Ok(CanonicalForm::from_atom(Atom::Ln(Arc::new(arg.clone()))))
    }

    fn trig_of(f: Elementary, arg: &CanonicalForm) -> Self {
        if arg.is_zero_canonical() {
            return match f {
                Elementary::Sin => CanonicalForm::zero(),
                _ => CanonicalForm::one(),
            };
        }
        // Normalize the argument sign: cos(-u) = cos(u), sin(-u) = -sin(u).
        let flip = arg
            .num
            .0
            .iter()
            .next_back()
            .map_or(false, |(_, c)| c.is_negative());
        let (arg, sign) = if flip {
            (arg.neg(), rat_int(-1))
        } else {
            (arg.clone(), rat_int(1))
        };
        let arc = Arc::new(arg);
        match f {
            Elementary::Sin => {
                CanonicalForm::from_atom(Atom::Sin(arc)).scale(&sign)
            }
            Elementary::Cos => CanonicalForm::from_atom(Atom::Cos(arc)),
            _ => unreachable!(),
        }
    }

    /// Canonicalize an expression tree.
    pub fn of(e: &Expr) -> Result<Self, CanonError> {
        match e.node() {
            ExprNode::Rational(r) => Ok(CanonicalForm::from_rat(r.clone())),
            ExprNode::Symbol(s) => Ok(CanonicalForm::from_atom(Atom::Sym(s.clone()))),
            ExprNode::FuncApp(f, x) => {
                Ok(CanonicalForm::from_atom(Atom::Func(f.clone(), x.clone())))
            }
            ExprNode::Deriv(f, x, n) => Ok(CanonicalForm::from_atom(Atom::Deriv(
                f.clone(),
                x.clone(),
                *n,
            ))),
            ExprNode::Add(terms) => {
                let mut acc = CanonicalForm::zero();
                for t in terms {
                    acc = acc.add(&CanonicalForm::of(t)?);
                }
                Ok(acc)
            }
            ExprNode::Mul(factors) => {
                let mut acc = CanonicalForm::one();
                for f in factors {
                    if acc.is_zero_canonical() {
                        // Still canonicalize the rest so 1/0 errors surface.
                        CanonicalForm::of(f)?;
                        continue;
                    }
                    acc = acc.mul(&CanonicalForm::of(f)?);
                }
                Ok(acc)
            }
            ExprNode::Pow(b, x) => {
                let cb = CanonicalForm::of(b)?;
                let cx = CanonicalForm::of(x)?;
                match cx.as_rational_const() {
                    Some(r) => cb.pow_rat(&r),
                    None => {
                        // b^x = exp(x * ln b)
                        let lnb = CanonicalForm::ln_of(&cb)?;
                        CanonicalForm::exp_of(&cx.mul(&lnb))
                    }
                }
            }
            ExprNode::Elem(f, a) => {
                let ca = CanonicalForm::of(a)?;
                match f {
                    Elementary::Exp => CanonicalForm::exp_of(&ca),
                    Elementary::Ln => CanonicalForm::ln_of(&ca),
                    Elementary::Sqrt => ca.pow_rat(&rat(1, 2)),
                    Elementary::Sin | Elementary::Cos => Ok(CanonicalForm::trig_of(*f, &ca)),
                }
            }
        }
    }

    /// Rebuild an expression tree. The result is deterministic and
    /// canonicalizes back to `self`.
    pub fn to_expr(&self) -> Expr {
        let num = poly_to_expr(&self.num);
        if self.den.is_empty() {
            return num;
        }
        let mut factors = Vec::with_capacity(1 + self.den.len());
        factors.push(num);
        for (f, m) in &self.den {
            factors.push(Expr::pow_int(poly_to_expr(f), -(*m as i64)));
        }
        Expr::mul(factors)
    }

    /// True when any kernel argument or opaque base mentions `name`.
    pub(crate) fn depends_on_symbol(&self, name: &str) -> bool {
        fn poly_dep(p: &Poly, name: &str) -> bool {
            p.0.keys().any(|m| mono_dep(m, name))
        }
        fn mono_dep(m: &Mono, name: &str) -> bool {
            if let Some(arg) = &m.expf {
                if arg.depends_on_symbol(name) {
                    return true;
                }
            }
            m.atoms.keys().any(|a| match a {
                Atom::Sym(s) => s == name,
                Atom::Int(_) => false,
                Atom::Func(_, x) | Atom::Deriv(_, x, _) => x == name,
                Atom::Sin(u) | Atom::Cos(u) | Atom::Ln(u) | Atom::Base(u) => {
                    u.depends_on_symbol(name)
                }
            })
        }
        poly_dep(&self.num, name) || self.den.iter().any(|(f, _)| poly_dep(f, name))
    }
}

fn den_max_merge(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if i < a.len() && (j >= b.len() || a[i].0 <= b[j].0) {
            if j < b.len() && a[i].0 == b[j].0 {
                out.push((a[i].0.clone(), a[i].1.max(b[j].1)));
                j += 1;
            } else {
                out.push(a[i].clone());
            }
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out
}

fn den_sum_merge(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if i < a.len() && (j >= b.len() || a[i].0 <= b[j].0) {
            if j < b.len() && a[i].0 == b[j].0 {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                j += 1;
            } else {
                out.push(a[i].clone());
            }
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out
}

/// Multiset difference `whole - part` (requires `part` <= `whole`).
fn den_difference(whole: &[(Poly, u32)], part: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let mut j = 0;
    for (f, m) in whole {
        let mut m = *m;
        if j < part.len() && part[j].0 == *f {
            m -= part[j].1;
            j += 1;
        }
        if m > 0 {
            out.push((f.clone(), m));
        }
    }
    out
}

fn mul_poly_by_factors(
    p: &Poly,
    factors: &[(Poly, u32)],
) -> (Poly, Vec<CanonicalForm>) {
    let mut clean = p.clone();
    let mut extras: Vec<CanonicalForm> = Vec::new();
    for (f, m) in factors {
        for _ in 0..*m {
            let (next, xs) = poly_mul(&clean, f);
            clean = next;
            for (mono, coeff, promote) in xs {
                extras.push(
                    CanonicalForm {
                        num: Poly::from_mono(mono, coeff),
                        den: Vec::new(),
                    }
                    .mul(&promote),
                );
            }
        }
    }
    (clean, extras)
}

/// Fractional power of a rational: returns the rational part and surd
/// atoms, or `None` when the value has no real canonical surd form
/// (negative base with an even root).
fn rat_pow_rat(c: &Rat, e: &Rat) -> Option<(Rat, Vec<(Atom, Rat)>)> {
    debug_assert!(!e.is_integer());
    let q = e.denom();
    let mut coeff = rat_int(1);
    let mut atoms: Vec<(Atom, Rat)> = Vec::new();
    if c.is_negative() {
        if q.is_even() {
            return None;
        }
        // (-1)^(p/q) with odd q is (-1)^p.
        if e.numer().is_odd() {
            coeff = -coeff;
        }
    }
    let a = c.abs();
    for (n, sign) in [(a.numer().clone(), 1i32), (a.denom().clone(), -1i32)] {
        if n.is_one() {
            continue;
        }
        let scale = if sign > 0 { e.clone() } else { -e.clone() };
        for (p, k) in factor_integer(&n) {
            let total = scale.clone() * rat_int(k as i64);
            let ipart = rat_floor_int(&total);
            let frac = &total - Rat::from_integer(ipart.clone());
            if !ipart.is_zero() {
                coeff *= rat_pow_bigint(&Rat::from_integer(p.clone()), &ipart);
            }
            if !frac.is_zero() {
                atoms.push((Atom::Int(p), frac));
            }
        }
    }
    Some((coeff, atoms))
}

/// Factor a positive integer by trial division. Any remainder above the
/// trial bound is kept as a single composite base.
fn factor_integer(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut n = n.clone();
    let mut d = BigInt::from(2u32);
    let bound = BigInt::from(1u32 << 16);
    while &d * &d <= n && d <= bound {
        let mut k = 0u32;
        while (&n % &d).is_zero() {
            n /= &d;
            k += 1;
        }
        if k > 0 {
            out.push((d.clone(), k));
        }
        d += 1u32;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn atom_to_expr(a: &Atom) -> Expr {
    match a {
        Atom::Sym(s) => Expr::sym(s),
        Atom::Int(n) => Expr::rational(Rat::from_integer(n.clone())),
        Atom::Func(f, x) => Expr::func(f, x),
        Atom::Deriv(f, x, n) => Expr::deriv(f, x, *n),
        Atom::Sin(u) => Expr::sin(u.to_expr()),
        Atom::Cos(u) => Expr::cos(u.to_expr()),
        Atom::Ln(u) => Expr::ln(u.to_expr()),
        Atom::Base(u) => u.to_expr(),
    }
}

fn mono_to_expr(m: &Mono, c: &Rat) -> Expr {
    let mut factors = Vec::new();
    if c != &rat_int(1) || (m.atoms.is_empty() && m.expf.is_none()) {
        factors.push(Expr::rational(c.clone()));
    }
    for (atom, e) in &m.atoms {
        let base = atom_to_expr(atom);
        if e == &rat_int(1) {
            factors.push(base);
        } else {
            factors.push(Expr::pow(base, Expr::rational(e.clone())));
        }
    }
    if let Some(arg) = &m.expf {
        factors.push(Expr::exp(arg.to_expr()));
    }
    Expr::mul(factors)
}

fn poly_to_expr(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::zero();
    }
    Expr::add(p.0.iter().map(|(m, c)| mono_to_expr(m, c)).collect())
}
