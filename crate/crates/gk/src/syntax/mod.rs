//! Terms and quantifier-free formulas over the signature `{l, r}`.
//!
//! A term is a variable or a named constant with a path of `l`/`r`
//! applications. Paths are stored root-to-node: the address `lr` denotes
//! `r(l(x))`, i.e. the first letter is applied first. Formulas are boolean
//! combinations of equalities and inequalities between terms.

mod parse;
mod print;
mod unfold;

pub use parse::{parse, parse_term};
pub use unfold::{unfold_atom, unfold_formula};

use std::collections::BTreeSet;
use std::fmt;

/// One edge of the infinite binary tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Letter {
    L,
    R,
}

impl Letter {
    pub fn index(self) -> usize {
        match self {
            Letter::L => 0,
            Letter::R => 1,
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'l' => Some(Letter::L),
            'r' => Some(Letter::R),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::L => write!(f, "l"),
            Letter::R => write!(f, "r"),
        }
    }
}

/// Root-to-node path in the infinite binary tree. The empty address is the
/// root; its length is the depth of the node it names.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Address(Vec<Letter>);

impl Address {
    pub fn root() -> Address {
        Address(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Address {
        Address(letters)
    }

    /// Parses strings like `"lr"`. The empty string is the root.
    pub fn parse(s: &str) -> Option<Address> {
        s.chars().map(Letter::from_char).collect::<Option<Vec<_>>>().map(Address)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn child(&self, letter: Letter) -> Address {
        let mut v = self.0.clone();
        v.push(letter);
        Address(v)
    }

    pub fn join(&self, suffix: &Address) -> Address {
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0);
        Address(v)
    }

    pub fn parent(&self) -> Option<Address> {
        if self.0.is_empty() {
            None
        } else {
            Some(Address(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn strict_prefix_of(&self, other: &Address) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    /// Whether one address lies on the branch of the other.
    pub fn comparable(&self, other: &Address) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// The suffix such that `self.join(suffix) == other`, when `self` is a prefix.
    pub fn suffix_from(&self, other: &Address) -> Option<Address> {
        if other.is_prefix_of(self) {
            Some(Address(self.0[other.0.len()..].to_vec()))
        } else {
            None
        }
    }

    /// All addresses of the given length, in lexicographic order (`l` < `r`).
    pub fn all_of_length(len: usize) -> Vec<Address> {
        let mut out = Vec::with_capacity(1 << len);
        for idx in 0..(1usize << len) {
            out.push(Address::from_index(idx, len));
        }
        out
    }

    /// The `idx`-th address of length `len` in lexicographic order.
    pub fn from_index(idx: usize, len: usize) -> Address {
        let mut v = Vec::with_capacity(len);
        for bit in (0..len).rev() {
            v.push(if idx >> bit & 1 == 0 { Letter::L } else { Letter::R });
        }
        Address(v)
    }

    /// Inverse of [`Address::from_index`] for addresses of length `len`.
    pub fn to_index(&self) -> usize {
        let mut idx = 0;
        for &letter in &self.0 {
            idx = idx << 1 | letter.index();
        }
        idx
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in &self.0 {
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

/// A variable `x`, `x1`, ... or a named parameter `#name`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Base {
    Var(u32),
    Const(String),
}

/// A term: a base with a path applied to it. `Term { base: x, path: lr }`
/// denotes `r(l(x))`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Term {
    pub base: Base,
    pub path: Address,
}

impl Term {
    pub fn var(id: u32, path: Address) -> Term {
        Term { base: Base::Var(id), path }
    }

    pub fn constant(name: &str, path: Address) -> Term {
        Term { base: Base::Const(name.to_string()), path }
    }

    pub fn is_const(&self) -> bool {
        matches!(self.base, Base::Const(_))
    }

    pub fn var_id(&self) -> Option<u32> {
        match self.base {
            Base::Var(v) => Some(v),
            Base::Const(_) => None,
        }
    }

    /// Applies a further letter, i.e. `extend(L)` of `t` denotes `l(t)`.
    pub fn extend(&self, letter: Letter) -> Term {
        Term { base: self.base.clone(), path: self.path.child(letter) }
    }

    pub fn extend_by(&self, suffix: &Address) -> Term {
        Term { base: self.base.clone(), path: self.path.join(suffix) }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AtomKind {
    Eq,
    Neq,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub lhs: Term,
    pub rhs: Term,
}

impl Atom {
    pub fn eq(lhs: Term, rhs: Term) -> Atom {
        Atom { kind: AtomKind::Eq, lhs, rhs }
    }

    pub fn neq(lhs: Term, rhs: Term) -> Atom {
        Atom { kind: AtomKind::Neq, lhs, rhs }
    }

    pub fn negated(&self) -> Atom {
        Atom {
            kind: match self.kind {
                AtomKind::Eq => AtomKind::Neq,
                AtomKind::Neq => AtomKind::Eq,
            },
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
        }
    }

    /// The equality with the same operands, regardless of kind.
    pub fn positive(&self) -> Atom {
        Atom { kind: AtomKind::Eq, lhs: self.lhs.clone(), rhs: self.rhs.clone() }
    }
}

/// Quantifier-free formula. `And`/`Or` are n-ary and kept flattened.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Conjunction with flattening and unit simplification.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with flattening and unit simplification.
    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Negation normal form: negations pushed onto atoms, which absorb them
    /// by flipping between `=` and `!=`.
    pub fn nnf(&self) -> Formula {
        fn go(f: &Formula, neg: bool) -> Formula {
            match f {
                Formula::True => {
                    if neg {
                        Formula::False
                    } else {
                        Formula::True
                    }
                }
                Formula::False => {
                    if neg {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                Formula::Atom(a) => Formula::Atom(if neg { a.negated() } else { a.clone() }),
                Formula::Not(inner) => go(inner, !neg),
                Formula::And(parts) => {
                    let mapped = parts.iter().map(|p| go(p, neg)).collect();
                    if neg {
                        Formula::or(mapped)
                    } else {
                        Formula::and(mapped)
                    }
                }
                Formula::Or(parts) => {
                    let mapped = parts.iter().map(|p| go(p, neg)).collect();
                    if neg {
                        Formula::and(mapped)
                    } else {
                        Formula::or(mapped)
                    }
                }
            }
        }
        go(self, false)
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => visit(a),
            Formula::Not(inner) => inner.visit_atoms(visit),
            Formula::And(parts) | Formula::Or(parts) => {
                for p in parts {
                    p.visit_atoms(visit);
                }
            }
        }
    }

    /// Every term occurring in the formula.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| {
            out.push(&a.lhs);
            out.push(&a.rhs);
        });
        out
    }

    /// The set of variable ids occurring in the formula.
    pub fn variables(&self) -> BTreeSet<u32> {
        self.terms().into_iter().filter_map(Term::var_id).collect()
    }

    /// The set of constant names occurring in the formula.
    pub fn constant_names(&self) -> BTreeSet<String> {
        self.terms()
            .into_iter()
            .filter_map(|t| match &t.base {
                Base::Const(name) => Some(name.clone()),
                Base::Var(_) => None,
            })
            .collect()
    }

    /// Rewrites every term through `map`.
    pub fn map_terms(&self, map: &impl Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(Atom {
                kind: a.kind,
                lhs: map(&a.lhs),
                rhs: map(&a.rhs),
            }),
            Formula::Not(inner) => Formula::Not(Box::new(inner.map_terms(map))),
            Formula::And(parts) => {
                Formula::And(parts.iter().map(|p| p.map_terms(map)).collect())
            }
            Formula::Or(parts) => Formula::Or(parts.iter().map(|p| p.map_terms(map)).collect()),
        }
    }
}

/// The largest path length of any term on `var` occurring in `f`; 0 when the
/// variable does not occur.
pub fn depth_of_formula(f: &Formula, var: u32) -> usize {
    f.terms()
        .into_iter()
        .filter(|t| t.var_id() == Some(var))
        .map(|t| t.path.len())
        .max()
        .unwrap_or(0)
}

/// The largest path length of any variable term in `f`.
pub fn max_var_depth(f: &Formula) -> usize {
    f.terms()
        .into_iter()
        .filter(|t| !t.is_const())
        .map(|t| t.path.len())
        .max()
        .unwrap_or(0)
}

/// The prefix code used by [`pack_variables`]: `code(k) = r^(k-1) l` for
/// `k < n` and `code(n) = r^(n-1)`, with `k` 1-based.
pub fn pack_code(k: usize, n: usize) -> Address {
    debug_assert!(1 <= k && k <= n);
    let mut letters = vec![Letter::R; k - 1];
    if k < n {
        letters.push(Letter::L);
    }
    Address::new(letters)
}

/// Replaces the variables `x_{i1} < ... < x_{in}` of `f` by disjoint subtrees
/// of a single variable `x`, using the right-comb prefix code. The resulting
/// set is the image of the original one under the iterated pairing bijection
/// from `M^n` to `M`. Formulas with at most one variable are returned
/// unchanged.
pub fn pack_variables(f: &Formula) -> Formula {
    let vars: Vec<u32> = f.variables().into_iter().collect();
    let n = vars.len();
    if n <= 1 {
        return f.clone();
    }
    let codes: std::collections::BTreeMap<u32, Address> = vars
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, pack_code(i + 1, n)))
        .collect();
    f.map_terms(&|t| match t.var_id() {
        Some(v) => Term::var(0, codes[&v].join(&t.path)),
        None => t.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(s: &str) -> Address {
        Address::parse(s).unwrap()
    }

    #[test]
    fn address_order_and_indexing() {
        assert!(addr("l") < addr("ll"));
        assert!(addr("lr") < addr("r"));
        for (i, a) in Address::all_of_length(3).iter().enumerate() {
            assert_eq!(a.to_index(), i);
            assert_eq!(Address::from_index(i, 3), *a);
        }
    }

    #[test]
    fn depth_examples() {
        let f = parse("l(x) = r(x)").unwrap();
        assert_eq!(depth_of_formula(&f, 0), 1);
        let f = parse("r(l(x)) = #c").unwrap();
        assert_eq!(depth_of_formula(&f, 0), 2);
        let f = parse("#c = #d").unwrap();
        assert_eq!(depth_of_formula(&f, 0), 0);
    }

    #[test]
    fn pack_two_variables() {
        let f = parse("l(x1) = x2").unwrap();
        let packed = pack_variables(&f);
        assert_eq!(packed, parse("l(l(x)) = r(x)").unwrap());
    }

    #[test]
    fn pack_single_variable_is_identity() {
        let f = parse("l(x) = #c").unwrap();
        assert_eq!(pack_variables(&f), f);
    }

    #[test]
    fn pack_three_variables() {
        let f = parse("x3 = #c & x1 = x1 & x2 = x2").unwrap();
        let packed = pack_variables(&f);
        // code(3) of 3 is "rr"
        let atoms = packed.atoms();
        assert_eq!(atoms[0].lhs, Term::var(0, addr("rr")));
        assert_eq!(atoms[0].rhs, Term::constant("c", Address::root()));
    }

    #[test]
    fn nnf_pushes_negation_to_atoms() {
        let f = parse("!(l(x) = #c & x = x)").unwrap();
        let g = f.nnf();
        assert_eq!(g, parse("l(x) != #c | x != x").unwrap());
    }
}
