//! Unfolding of atoms and formulas to a uniform leaf depth.
//!
//! The rewrite is `x_w = t  <=>  x_wl = l-part of t  /\  x_wr = r-part of t`,
//! where the l/r-part of a constant term extends its path. It is sound and
//! complete because the pairing map is a bijection. Equalities between two
//! terms of the same variable whose addresses are comparable and distinct
//! collapse to `false` by the no-cycle axiom; the matching inequalities
//! collapse to `true`.

use super::{Address, Atom, AtomKind, Formula, Term};
use crate::diagram::ParamDiagram;
use crate::error::{Error, Result};

fn check_depth(term: &Term, p: usize) -> Result<()> {
    if !term.is_const() && term.path.len() > p {
        return Err(Error::DepthTooSmall { required: term.path.len(), requested: p });
    }
    Ok(())
}

/// Rewrites `a` into an equivalent formula in which every variable term has
/// path length exactly `p`. Inequalities unfold to the disjunction of
/// leaf-level inequalities.
pub fn unfold_atom(a: &Atom, p: usize, diagram: &ParamDiagram) -> Result<Formula> {
    let (lhs, rhs) = (&a.lhs, &a.rhs);
    check_depth(lhs, p)?;
    check_depth(rhs, p)?;

    // ground atoms are settled by the parameter diagram
    if lhs.is_const() && rhs.is_const() {
        let eq = diagram.const_eq(lhs, rhs);
        let truth = match a.kind {
            AtomKind::Eq => eq,
            AtomKind::Neq => !eq,
        };
        return Ok(if truth { Formula::True } else { Formula::False });
    }

    if let (Some(v1), Some(v2)) = (lhs.var_id(), rhs.var_id()) {
        if v1 == v2 {
            if lhs.path == rhs.path {
                return Ok(match a.kind {
                    AtomKind::Eq => Formula::True,
                    AtomKind::Neq => Formula::False,
                });
            }
            if lhs.path.comparable(&rhs.path) {
                // t = w(t) has no solution
                return Ok(match a.kind {
                    AtomKind::Eq => Formula::False,
                    AtomKind::Neq => Formula::True,
                });
            }
        }
        if lhs.path.len() != rhs.path.len() {
            return Err(Error::UnbalancedAtom {
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }

    let var_len = if lhs.is_const() { rhs.path.len() } else { lhs.path.len() };
    let remaining = p - var_len;
    if remaining == 0 {
        return Ok(Formula::Atom(a.clone()));
    }
    let leaves: Vec<Formula> = Address::all_of_length(remaining)
        .iter()
        .map(|suffix| {
            Formula::Atom(Atom {
                kind: a.kind,
                lhs: lhs.extend_by(suffix),
                rhs: rhs.extend_by(suffix),
            })
        })
        .collect();
    Ok(match a.kind {
        AtomKind::Eq => Formula::and(leaves),
        AtomKind::Neq => Formula::or(leaves),
    })
}

/// Negation normal form with every atom unfolded to depth `p`. The result has
/// no filiation links between variable terms: they all sit at depth `p`.
pub fn unfold_formula(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<Formula> {
    fn go(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<Formula> {
        match f {
            Formula::True => Ok(Formula::True),
            Formula::False => Ok(Formula::False),
            Formula::Atom(a) => unfold_atom(a, p, diagram),
            Formula::Not(_) => unreachable!("input is in negation normal form"),
            Formula::And(parts) => Ok(Formula::and(
                parts.iter().map(|q| go(q, p, diagram)).collect::<Result<Vec<_>>>()?,
            )),
            Formula::Or(parts) => Ok(Formula::or(
                parts.iter().map(|q| go(q, p, diagram)).collect::<Result<Vec<_>>>()?,
            )),
        }
    }
    go(&f.nnf(), p, diagram)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn generic() -> ParamDiagram {
        ParamDiagram::generic()
    }

    #[test]
    fn cycle_atom_is_false() {
        let f = parse("x = l(x)").unwrap();
        for p in 1..=3 {
            assert_eq!(unfold_formula(&f, p, &generic()).unwrap(), Formula::False);
        }
    }

    #[test]
    fn constant_side_extends() {
        let f = parse("l(x) = #c").unwrap();
        let g = unfold_formula(&f, 2, &generic()).unwrap();
        assert_eq!(g, parse("l(l(x)) = l(#c) & r(l(x)) = r(#c)").unwrap());
    }

    #[test]
    fn neq_unfolds_to_disjunction() {
        let f = parse("l(x) != r(x)").unwrap();
        let g = unfold_formula(&f, 2, &generic()).unwrap();
        assert_eq!(g, parse("l(l(x)) != l(r(x)) | r(l(x)) != r(r(x))").unwrap());
    }

    #[test]
    fn spec_formula_at_depth_one() {
        let f = parse("l(x) = #c & x = #d").unwrap();
        let g = unfold_formula(&f, 1, &generic()).unwrap();
        assert_eq!(g, parse("l(x) = #c & l(x) = l(#d) & r(x) = r(#d)").unwrap());
    }

    #[test]
    fn negation_goes_to_atoms() {
        let f = parse("!(l(x) = #c)").unwrap();
        let g = unfold_formula(&f, 1, &generic()).unwrap();
        assert_eq!(g, parse("l(x) != #c").unwrap());
    }

    #[test]
    fn already_at_depth_is_unchanged() {
        let f = parse("l(x) = r(x)").unwrap();
        assert_eq!(unfold_formula(&f, 1, &generic()).unwrap(), f);
    }

    #[test]
    fn idempotent_at_fixed_depth() {
        for src in ["l(x) = #c & x = #d", "l(x) != r(x) | x = #c", "x != #d"] {
            let f = parse(src).unwrap();
            let once = unfold_formula(&f, 2, &generic()).unwrap();
            let twice = unfold_formula(&once, 2, &generic()).unwrap();
            assert_eq!(once, twice, "unfold not idempotent on `{src}`");
        }
    }

    #[test]
    fn too_small_depth_errors() {
        let f = parse("r(l(x)) = #c").unwrap();
        match unfold_formula(&f, 1, &generic()) {
            Err(Error::DepthTooSmall { required: 2, requested: 1 }) => {}
            other => panic!("expected DepthTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn offset_variable_atom_is_rejected() {
        let f = parse("l(l(x)) = r(x)").unwrap();
        match unfold_formula(&f, 2, &generic()) {
            Err(Error::UnbalancedAtom { .. }) => {}
            other => panic!("expected UnbalancedAtom, got {other:?}"),
        }
    }

    #[test]
    fn ground_atoms_resolve_against_diagram() {
        let f = parse("#c = #d & x = x").unwrap();
        assert_eq!(unfold_formula(&f, 1, &generic()).unwrap(), Formula::False);
        let g = parse("#c != #d").unwrap();
        assert_eq!(unfold_formula(&g, 1, &generic()).unwrap(), Formula::True);
    }
}
