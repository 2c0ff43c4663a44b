//! Linear solving over the field of canonical rational functions.
//!
//! `solve_linear(equations, unknowns)` treats each equation as
//! `expr = 0`, requires every equation to be linear in the unknowns
//! (which may be symbols or opaque function kernels such as `V(t)`),
//! and eliminates by Gaussian reduction with exact canonical-form
//! arithmetic. Coefficients may be arbitrary expressions in the
//! remaining kernels. Equations whose canonical form is a ratio are
//! cleared by their denominator first; the solution set is understood
//! up to points where that denominator vanishes.

use super::canon::{Atom, CanonError, CanonicalForm, Mono, Poly};
use super::{rat_int, Expr};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error("unknown must be a bare symbol or function application: {0}")]
    UnsupportedUnknown(String),
    #[error("system is not linear in the unknowns: {0}")]
    NotLinear(String),
    #[error("singular system: the equations do not determine every unknown")]
    Singular,
}

pub fn solve_linear(
    equations: &[Expr],
    unknowns: &[Expr],
) -> Result<Vec<(Expr, Expr)>, SolveError> {
    let mut atoms = Vec::with_capacity(unknowns.len());
    for u in unknowns {
        atoms.push(unknown_atom(u)?);
    }
    let n = atoms.len();
    // Rows are [a_1 .. a_n | c] for the equation a.u + c = 0.
    let mut rows: Vec<Vec<CanonicalForm>> = Vec::with_capacity(equations.len());
    for eq in equations {
        let canon = CanonicalForm::of(eq)?;
        rows.push(linear_row(&canon, &atoms, eq)?);
    }
    // Forward elimination with exact pivots.
    let mut pivot_row_of: Vec<Option<usize>> = vec![None; n];
    let mut next_row = 0usize;
    for col in 0..n {
        let pivot = (next_row..rows.len())
            .find(|&r| !rows[r][col].is_zero_canonical());
        let Some(pivot) = pivot else { continue };
        rows.swap(next_row, pivot);
        let p = rows[next_row][col].clone();
        for entry in rows[next_row].iter_mut() {
            *entry = entry.div(&p)?;
        }
        for r in 0..rows.len() {
            if r == next_row || rows[r][col].is_zero_canonical() {
                continue;
            }
            let factor = rows[r][col].clone();
            for k in 0..=n {
                let delta = rows[next_row][k].mul(&factor);
                rows[r][k] = rows[r][k].sub(&delta);
            }
        }
        pivot_row_of[col] = Some(next_row);
        next_row += 1;
    }
    // Leftover rows must have vanished entirely.
    for r in next_row..rows.len() {
        if !rows[r][n].is_zero_canonical() {
            return Err(SolveError::Singular);
        }
    }
    let mut out = Vec::with_capacity(n);
    for (col, u) in unknowns.iter().enumerate() {
        let Some(r) = pivot_row_of[col] else {
            return Err(SolveError::Singular);
        };
        // Row is u + c = 0 after normalization, so u = -c.
        let sol = rows[r][n].neg();
        out.push((u.clone(), sol.to_expr()));
    }
    Ok(out)
}

fn unknown_atom(u: &Expr) -> Result<Atom, SolveError> {
    let c = CanonicalForm::of(u)?;
    if let Some((m, coeff)) = c.as_single_mono() {
        if coeff == &rat_int(1) && m.expf.is_none() && m.atoms.len() == 1 {
            let (atom, e) = m.atoms.iter().next().unwrap();
            if e == &rat_int(1) {
                match atom {
                    Atom::Sym(_) | Atom::Func(_, _) | Atom::Deriv(_, _, _) => {
                        return Ok(atom.clone());
                    }
                    _ => {}
                }
            }
        }
    }
    Err(SolveError::UnsupportedUnknown(u.to_string()))
}

/// Split the numerator of `canon` into linear coefficients of the
/// unknown atoms plus a constant part.
fn linear_row(
    canon: &CanonicalForm,
    atoms: &[Atom],
    original: &Expr,
) -> Result<Vec<CanonicalForm>, SolveError> {
    let n = atoms.len();
    let mut coeffs: Vec<Poly> = vec![Poly::zero(); n];
    let mut constant = Poly::zero();
    for (mono, c) in &canon.num.0 {
        let mut hit: Option<usize> = None;
        for (j, atom) in atoms.iter().enumerate() {
            if let Some(e) = mono.atoms.get(atom) {
                if e != &rat_int(1) || hit.is_some() {
                    return Err(SolveError::NotLinear(original.to_string()));
                }
                hit = Some(j);
            }
            if mono_arg_mentions(mono, atom) {
                return Err(SolveError::NotLinear(original.to_string()));
            }
        }
        match hit {
            Some(j) => {
                let mut stripped = mono.clone();
                stripped.atoms.remove(&atoms[j]);
                coeffs[j].add_term(stripped, c.clone());
            }
            None => constant.add_term(mono.clone(), c.clone()),
        }
    }
    let mut row: Vec<CanonicalForm> = coeffs
        .into_iter()
        .map(CanonicalForm::from_poly)
        .collect();
    row.push(CanonicalForm::from_poly(constant));
    Ok(row)
}

/// Does the unknown atom occur inside a kernel argument of this
/// monomial (as opposed to as a plain factor)?
fn mono_arg_mentions(m: &Mono, target: &Atom) -> bool {
    fn canon_mentions(c: &CanonicalForm, target: &Atom) -> bool {
        let polys = std::iter::once(&c.num).chain(c.den.iter().map(|(f, _)| f));
        for p in polys {
            for mono in p.0.keys() {
                if mono.atoms.contains_key(target) || mono_arg_mentions(mono, target) {
                    return true;
                }
            }
        }
        false
    }
    if let Some(arg) = &m.expf {
        if canon_mentions(arg, target) {
            return true;
        }
    }
    m.atoms.keys().any(|a| match a {
        Atom::Sin(u) | Atom::Cos(u) | Atom::Ln(u) | Atom::Base(u) => canon_mentions(u, target),
        _ => false,
    })
}
