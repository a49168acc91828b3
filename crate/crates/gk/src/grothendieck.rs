//! The ring `Z[X]/(X - X^2)`, its isomorphism with `Z^2`, and the class
//! valuation on definable sets.
//!
//! `X` is the class of `M`. Since `M` is in definable bijection with `M^2`,
//! `X^2 = X`, and every class is of the form `aX + b`. Evaluation at `X = 0`
//! and `X = 1` is a ring isomorphism onto `Z^2` by the Chinese remainder
//! theorem.

use std::collections::{BTreeSet, HashMap};

use serde_json::json;

use crate::diagram::ParamDiagram;
use crate::error::{Error, Result};
use crate::oracle;
use crate::simple::{from_positive_conjunction, SimpleSet};
use crate::syntax::{
    max_var_depth, pack_variables, unfold_formula, Atom, AtomKind, Formula,
};

/// An element `aX + b` of `Z[X]/(X - X^2)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct K0Elem {
    /// Coefficient of `X`.
    pub a: i64,
    /// Constant term.
    pub b: i64,
}

impl K0Elem {
    pub fn new(a: i64, b: i64) -> K0Elem {
        K0Elem { a, b }
    }

    pub fn zero() -> K0Elem {
        K0Elem { a: 0, b: 0 }
    }

    pub fn one() -> K0Elem {
        K0Elem { a: 0, b: 1 }
    }

    /// The class of `M`.
    pub fn x() -> K0Elem {
        K0Elem { a: 1, b: 0 }
    }

    pub fn from_int(n: i64) -> K0Elem {
        K0Elem { a: 0, b: n }
    }

    pub fn add(self, other: K0Elem) -> Result<K0Elem> {
        Ok(K0Elem {
            a: checked(self.a.checked_add(other.a))?,
            b: checked(self.b.checked_add(other.b))?,
        })
    }

    pub fn sub(self, other: K0Elem) -> Result<K0Elem> {
        Ok(K0Elem {
            a: checked(self.a.checked_sub(other.a))?,
            b: checked(self.b.checked_sub(other.b))?,
        })
    }

    /// `(aX + b)(a'X + b') = (aa' + ab' + a'b)X + bb'` because `X^2 = X`.
    pub fn mul(self, other: K0Elem) -> Result<K0Elem> {
        let aa = checked(self.a.checked_mul(other.a))?;
        let ab = checked(self.a.checked_mul(other.b))?;
        let ba = checked(self.b.checked_mul(other.a))?;
        let a = checked(checked(aa.checked_add(ab))?.checked_add(ba))?;
        let b = checked(self.b.checked_mul(other.b))?;
        Ok(K0Elem { a, b })
    }

    /// Evaluation at `X = 0` and `X = 1`: `aX + b` maps to `(b, a + b)`.
    pub fn to_z2(self) -> (i64, i64) {
        (self.b, self.a + self.b)
    }

    pub fn from_z2(at0: i64, at1: i64) -> K0Elem {
        K0Elem { a: at1 - at0, b: at0 }
    }

    pub fn poly_string(self) -> String {
        match (self.a, self.b) {
            (0, b) => b.to_string(),
            (a, 0) => x_part(a),
            (a, b) if b > 0 => format!("{}+{b}", x_part(a)),
            (a, b) => format!("{}{b}", x_part(a)),
        }
    }

    pub fn to_json(self) -> serde_json::Value {
        let (z0, z1) = self.to_z2();
        json!({
            "class": { "a": self.a, "b": self.b },
            "poly": self.poly_string(),
            "Z2": [z0, z1],
        })
    }
}

fn x_part(a: i64) -> String {
    match a {
        1 => "X".to_string(),
        -1 => "-X".to_string(),
        a => format!("{a}X"),
    }
}

fn checked(v: Option<i64>) -> Result<i64> {
    v.ok_or_else(|| Error::Overflow("ring arithmetic".to_string()))
}

impl std::fmt::Display for K0Elem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.poly_string())
    }
}

/// Cardinality classification of a definable set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cardinality {
    Empty,
    Finite(u64),
    Infinite,
}

impl std::fmt::Display for Cardinality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cardinality::Empty => write!(f, "empty"),
            Cardinality::Finite(n) => write!(f, "finite({n})"),
            Cardinality::Infinite => write!(f, "infinite"),
        }
    }
}

/// How many distinct leaf atoms a formula may induce before the sign-pattern
/// machinery refuses to expand it.
pub const MAX_BASIC_SETS: usize = 12;

struct ClassContext<'d> {
    diagram: &'d ParamDiagram,
    depth: usize,
    memo: HashMap<Vec<Atom>, K0Elem>,
}

impl<'d> ClassContext<'d> {
    fn simple_of_literals(&mut self, eqs: &[Atom]) -> Result<SimpleSet> {
        let f = Formula::and(eqs.iter().cloned().map(Formula::Atom).collect());
        from_positive_conjunction(&f, self.depth, self.diagram)
    }

    /// Class of a conjunction of leaf literals, by inclusion-exclusion over
    /// the inequalities: each subset of them intersects to a simple set.
    fn literal_conjunction_class(&mut self, literals: &[Atom]) -> Result<K0Elem> {
        let mut key: Vec<Atom> = literals.to_vec();
        key.sort();
        key.dedup();
        if let Some(&cached) = self.memo.get(&key) {
            return Ok(cached);
        }
        let eqs: Vec<Atom> =
            key.iter().filter(|a| a.kind == AtomKind::Eq).cloned().collect();
        let neqs: Vec<Atom> =
            key.iter().filter(|a| a.kind == AtomKind::Neq).cloned().collect();
        if neqs.len() > MAX_BASIC_SETS {
            return Err(Error::DepthBudgetExceeded {
                what: "inequalities in one conjunction".to_string(),
                limit: MAX_BASIC_SETS,
                requested: neqs.len(),
            });
        }
        let base = self.simple_of_literals(&eqs)?;
        let mut total = base.class_in_k0();
        // subtract [base /\ union of the negated equalities] by inclusion-exclusion
        for mask in 1u32..(1 << neqs.len()) {
            let mut atoms = eqs.clone();
            for (i, neq) in neqs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    atoms.push(neq.positive());
                }
            }
            let cell = self.simple_of_literals(&atoms)?;
            let term = cell.class_in_k0();
            total = if mask.count_ones() % 2 == 1 {
                total.sub(term)?
            } else {
                total.add(term)?
            };
        }
        self.memo.insert(key, total);
        Ok(total)
    }

    fn class(&mut self, f: &Formula) -> Result<K0Elem> {
        match f {
            Formula::True => Ok(K0Elem::x()),
            Formula::False => Ok(K0Elem::zero()),
            Formula::Atom(a) => self.literal_conjunction_class(std::slice::from_ref(a)),
            Formula::Not(_) => unreachable!("negation normal form"),
            Formula::Or(parts) => {
                // [A u B] = [A] + [B] - [A n B]
                let (first, rest) = parts.split_first().expect("non-empty or");
                let rest_f = Formula::or(rest.to_vec());
                let a = self.class(first)?;
                let b = self.class(&rest_f)?;
                let both = self.class(&Formula::and(vec![first.clone(), rest_f]))?;
                a.add(b)?.sub(both)
            }
            Formula::And(parts) => {
                // distribute a nested disjunction, if any; otherwise the
                // conjunction consists of literals
                if let Some(pos) = parts.iter().position(|p| matches!(p, Formula::Or(_))) {
                    let Formula::Or(branches) = &parts[pos] else { unreachable!() };
                    let mut rest = parts.clone();
                    rest.remove(pos);
                    let distributed = Formula::or(
                        branches
                            .iter()
                            .map(|br| {
                                let mut conj = rest.clone();
                                conj.push(br.clone());
                                Formula::and(conj)
                            })
                            .collect(),
                    );
                    return self.class(&distributed);
                }
                let literals: Vec<Atom> = parts
                    .iter()
                    .map(|p| match p {
                        Formula::Atom(a) => Ok(a.clone()),
                        _ => Err(Error::Internal(
                            "unfolded conjunction should contain only literals".to_string(),
                        )),
                    })
                    .collect::<Result<_>>()?;
                self.literal_conjunction_class(&literals)
            }
        }
    }
}

fn distinct_positive_atoms(f: &Formula) -> BTreeSet<Atom> {
    f.atoms().into_iter().map(Atom::positive).collect()
}

/// The class of the set defined by `f` in the Grothendieck ring. Formulas
/// with several variables are packed into one variable first; the ambient
/// space of the valuation is always `M`, so the class of `true` is `X`.
pub fn class_of_formula(f: &Formula, diagram: &ParamDiagram) -> Result<K0Elem> {
    class_of_formula_at(f, None, diagram)
}

/// Same as [`class_of_formula`] with an explicit unfolding depth. The result
/// does not depend on the depth as long as it is at least the packed depth.
pub fn class_of_formula_at(
    f: &Formula,
    depth: Option<usize>,
    diagram: &ParamDiagram,
) -> Result<K0Elem> {
    let packed = pack_variables(f);
    let required = max_var_depth(&packed).max(1);
    let depth = match depth {
        None => required,
        Some(d) if d >= required => d,
        Some(d) => return Err(Error::DepthTooSmall { required, requested: d }),
    };
    let unfolded = unfold_formula(&packed, depth, diagram)?;
    let basics = distinct_positive_atoms(&unfolded);
    if basics.len() > MAX_BASIC_SETS {
        return Err(Error::DepthBudgetExceeded {
            what: "distinct leaf atoms".to_string(),
            limit: MAX_BASIC_SETS,
            requested: basics.len(),
        });
    }
    let mut ctx = ClassContext { diagram, depth, memo: HashMap::new() };
    ctx.class(&unfolded)
}

/// Cardinality classification through the counting polynomial of the
/// brute-force oracle.
pub fn cardinality(f: &Formula, diagram: &ParamDiagram) -> Result<Cardinality> {
    let packed = pack_variables(f);
    let depth = max_var_depth(&packed).max(1);
    let poly = oracle::oracle_count(&packed, depth, diagram)?;
    Ok(match poly.constant_value() {
        Some(0) => Cardinality::Empty,
        Some(n) => Cardinality::Finite(n as u64),
        None => Cardinality::Infinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn class(src: &str) -> K0Elem {
        class_of_formula(&parse(src).unwrap(), &ParamDiagram::generic()).unwrap()
    }

    #[test]
    fn x_is_idempotent() {
        assert_eq!(K0Elem::x().mul(K0Elem::x()).unwrap(), K0Elem::x());
    }

    #[test]
    fn complement_of_x_is_nilpotent_factor() {
        let one_minus_x = K0Elem::one().sub(K0Elem::x()).unwrap();
        assert_eq!(one_minus_x.mul(K0Elem::x()).unwrap(), K0Elem::zero());
    }

    #[test]
    fn polynomial_arithmetic() {
        let p = K0Elem::new(2, 1);
        let q = K0Elem::new(1, -1);
        assert_eq!(p.mul(q).unwrap(), K0Elem::new(1, -1));
    }

    #[test]
    fn z2_map_matches_evaluation() {
        assert_eq!(K0Elem::x().to_z2(), (0, 1));
        assert_eq!(K0Elem::one().sub(K0Elem::x()).unwrap().to_z2(), (1, 0));
        assert_eq!(K0Elem::new(2, 1).to_z2(), (1, 3));
        for a in -5..=5 {
            for b in -5..=5 {
                let e = K0Elem::new(a, b);
                assert_eq!(K0Elem::from_z2(e.to_z2().0, e.to_z2().1), e);
            }
        }
    }

    #[test]
    fn class_of_true_is_x() {
        assert_eq!(class("true"), K0Elem::x());
        assert_eq!(class("x = x"), K0Elem::x());
    }

    #[test]
    fn class_of_singleton() {
        assert_eq!(class("l(x) = #c & l(x) = r(x)"), K0Elem::one());
        assert_eq!(class("l(x) = #c & r(x) = #c"), K0Elem::one());
    }

    #[test]
    fn class_of_neq_is_zero() {
        assert_eq!(class("l(x) != r(x)"), K0Elem::zero());
    }

    #[test]
    fn class_of_disjoint_copies() {
        assert_eq!(class("l(x) = #c | l(x) = #d"), K0Elem::new(2, 0));
    }

    #[test]
    fn class_of_two_copies_and_a_point() {
        assert_eq!(class("l(x) = #c1 | l(x) = #c2 | x = #g"), K0Elem::new(2, 1));
        assert_eq!(K0Elem::new(2, 1).to_z2(), (1, 3));
    }

    #[test]
    fn class_of_point_complement() {
        assert_eq!(class("x != #c"), K0Elem::new(1, -1));
    }

    #[test]
    fn depth_independence_spot_checks() {
        let d = ParamDiagram::generic();
        for src in ["l(x) = #c | l(x) = r(x)", "x != #c", "l(x) != r(x) | x = #g"] {
            let f = parse(src).unwrap();
            let at1 = class_of_formula_at(&f, Some(1), &d).unwrap();
            let at2 = class_of_formula_at(&f, Some(2), &d).unwrap();
            let at3 = class_of_formula_at(&f, Some(3), &d).unwrap();
            assert_eq!(at1, at2, "{src}");
            assert_eq!(at2, at3, "{src}");
        }
    }
}
